//! Plain-text CSV formats for fields, masks and measurements.
//!
//! Grid files start with a three-line header:
//!
//! ```text
//! <dim>
//! <origin_0>,...,<origin_{dim-1}>,<h>
//! <count_0>,...,<count_{dim-1}>
//! ```
//!
//! followed by one row per cell in row-major order, `i,j[,k],value` for real
//! fields and `i,j[,k],re,im` for complex fields. Masks are real fields with
//! values `0`/`1`. Floating-point numbers are written with 17 significant
//! digits, so every value reads back bit-exactly.
//!
//! Measurement files carry `key,value` header rows (`k`, `noise`, `seed`,
//! one `direction` row per wave), a column header line, then one row per
//! (wave, receiver): `wave,receiver,x,y[,z],re,im`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::forward::MeasurementSet;
use crate::grid::{ComplexField, RealField, ReceiverGeometry, ReceiverSet, SubdomainMask, UniformGrid};
use crate::special::Dim;

/// Formats `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn header(grid: &UniformGrid) -> String {
    let d = grid.dim().as_usize();
    let o = grid.origin();
    let c = grid.counts();
    let mut s = format!("{d}\n");
    for v in &o[..d] {
        s.push_str(&fmt_f64(*v));
        s.push(',');
    }
    s.push_str(&fmt_f64(grid.h()));
    s.push('\n');
    let counts: Vec<String> = c[..d].iter().map(|n| n.to_string()).collect();
    s.push_str(&counts.join(","));
    s.push('\n');
    s
}

fn index_prefix(out: &mut String, grid: &UniformGrid, idx: usize) {
    let mi = grid.multi_index(idx);
    for m in &mi[..grid.dim().as_usize()] {
        let _ = write!(out, "{m},");
    }
}

pub fn real_field_to_csv(field: &RealField) -> String {
    let mut s = header(&field.grid);
    s.reserve(field.values.len() * 32);
    for (i, v) in field.values.iter().enumerate() {
        index_prefix(&mut s, &field.grid, i);
        s.push_str(&fmt_f64(*v));
        s.push('\n');
    }
    s
}

pub fn complex_field_to_csv(field: &ComplexField) -> String {
    let mut s = header(&field.grid);
    for (i, v) in field.values.iter().enumerate() {
        index_prefix(&mut s, &field.grid, i);
        let _ = writeln!(s, "{},{}", fmt_f64(v.re), fmt_f64(v.im));
    }
    s
}

pub fn mask_to_csv(mask: &SubdomainMask) -> String {
    let mut s = header(&mask.grid);
    for (i, &m) in mask.mask().iter().enumerate() {
        index_prefix(&mut s, &mask.grid, i);
        s.push_str(if m { "1\n" } else { "0\n" });
    }
    s
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse { line, msg: format!("bad number {tok:?}: {e}") })
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.trim()
        .parse::<usize>()
        .map_err(|e| Error::Parse { line, msg: format!("bad integer {tok:?}: {e}") })
}

/// Parses the header and returns the grid plus the per-row value columns.
fn parse_grid_rows(text: &str, value_cols: usize) -> Result<(UniformGrid, Vec<Vec<f64>>)> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| Error::Parse { line: 0, msg: format!("missing {what}") })
    };
    let (ln, l) = next("dimension line")?;
    let d = parse_usize(l, ln)?;
    let dim = Dim::from_usize(d)
        .ok_or_else(|| Error::Parse { line: ln, msg: format!("dimension must be 2 or 3, got {d}") })?;
    let (ln, l) = next("origin line")?;
    let nums: Vec<f64> = l.split(',').map(|t| parse_f64(t, ln)).collect::<Result<_>>()?;
    if nums.len() != d + 1 {
        return Err(Error::Parse { line: ln, msg: format!("expected {} numbers", d + 1) });
    }
    let mut origin = [0.0; 3];
    origin[..d].copy_from_slice(&nums[..d]);
    let h = nums[d];
    let (ln, l) = next("counts line")?;
    let cs: Vec<usize> = l.split(',').map(|t| parse_usize(t, ln)).collect::<Result<_>>()?;
    if cs.len() != d {
        return Err(Error::Parse { line: ln, msg: format!("expected {d} counts") });
    }
    let mut counts = [1usize; 3];
    counts[..d].copy_from_slice(&cs);
    let grid = UniformGrid::new(dim, origin, h, counts)
        .map_err(|e| Error::Parse { line: ln, msg: e.to_string() })?;

    let mut rows = vec![Vec::new(); grid.len()];
    let mut seen = 0usize;
    for (ln, l) in lines {
        if l.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = l.split(',').collect();
        if toks.len() != d + value_cols {
            return Err(Error::Parse {
                line: ln,
                msg: format!("expected {} columns, got {}", d + value_cols, toks.len()),
            });
        }
        let mut mi = [0usize; 3];
        for a in 0..d {
            mi[a] = parse_usize(toks[a], ln)?;
            if mi[a] >= counts[a] {
                return Err(Error::Parse { line: ln, msg: "cell index out of range".into() });
            }
        }
        let idx = grid.linear_index(mi);
        if !rows[idx].is_empty() {
            return Err(Error::Parse { line: ln, msg: "duplicate cell".into() });
        }
        rows[idx] = toks[d..].iter().map(|t| parse_f64(t, ln)).collect::<Result<_>>()?;
        seen += 1;
    }
    if seen != grid.len() {
        return Err(Error::Parse {
            line: 0,
            msg: format!("expected {} cell rows, found {seen}", grid.len()),
        });
    }
    Ok((grid, rows))
}

pub fn real_field_from_csv(text: &str) -> Result<RealField> {
    let (grid, rows) = parse_grid_rows(text, 1)?;
    RealField::from_values(grid, rows.into_iter().map(|r| r[0]).collect())
}

pub fn complex_field_from_csv(text: &str) -> Result<ComplexField> {
    let (grid, rows) = parse_grid_rows(text, 2)?;
    let values = rows.into_iter().map(|r| Complex64::new(r[0], r[1])).collect();
    Ok(ComplexField { grid, values })
}

pub fn mask_from_csv(text: &str) -> Result<SubdomainMask> {
    let (grid, rows) = parse_grid_rows(text, 1)?;
    let mask = rows.into_iter().map(|r| r[0] != 0.0).collect();
    SubdomainMask::from_mask(grid, mask)
}

pub fn measurements_to_csv(m: &MeasurementSet) -> String {
    let d = m.dim.as_usize();
    let mut s = String::new();
    let _ = writeln!(s, "k,{}", fmt_f64(m.k));
    let _ = writeln!(s, "noise,{}", fmt_f64(m.noise));
    match m.seed {
        Some(seed) => {
            let _ = writeln!(s, "seed,{seed}");
        }
        None => s.push_str("seed,none\n"),
    }
    for (i, dir) in m.directions.iter().enumerate() {
        let _ = write!(s, "direction,{i}");
        for c in &dir[..d] {
            let _ = write!(s, ",{}", fmt_f64(*c));
        }
        s.push('\n');
    }
    s.push_str(if d == 2 { "wave,receiver,x,y,re,im\n" } else { "wave,receiver,x,y,z,re,im\n" });
    for (w, data) in m.data.iter().enumerate() {
        for (r, (p, v)) in m.receivers.points.iter().zip(data).enumerate() {
            let _ = write!(s, "{w},{r}");
            for c in &p[..d] {
                let _ = write!(s, ",{}", fmt_f64(*c));
            }
            let _ = writeln!(s, ",{},{}", fmt_f64(v.re), fmt_f64(v.im));
        }
    }
    s
}

pub fn measurements_from_csv(text: &str) -> Result<MeasurementSet> {
    let mut k = None;
    let mut noise = None;
    let mut seed = None;
    let mut directions: Vec<[f64; 3]> = Vec::new();
    let mut dim = None;
    let mut rows: Vec<(usize, usize, [f64; 3], Complex64)> = Vec::new();
    let mut in_body = false;
    for (i, l) in text.lines().enumerate() {
        let ln = i + 1;
        if l.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = l.split(',').map(str::trim).collect();
        if !in_body {
            match toks[0] {
                "k" => k = Some(parse_f64(toks.get(1).copied().unwrap_or(""), ln)?),
                "noise" => noise = Some(parse_f64(toks.get(1).copied().unwrap_or(""), ln)?),
                "seed" => {
                    let t = toks.get(1).copied().unwrap_or("");
                    seed = Some(if t == "none" {
                        None
                    } else {
                        Some(t.parse::<u64>().map_err(|e| Error::Parse {
                            line: ln,
                            msg: format!("bad seed: {e}"),
                        })?)
                    });
                }
                "direction" => {
                    let idx = parse_usize(toks.get(1).copied().unwrap_or(""), ln)?;
                    if idx != directions.len() {
                        return Err(Error::Parse { line: ln, msg: "directions out of order".into() });
                    }
                    let comps: Vec<f64> =
                        toks[2..].iter().map(|t| parse_f64(t, ln)).collect::<Result<_>>()?;
                    let mut dir = [0.0; 3];
                    if !(2..=3).contains(&comps.len()) {
                        return Err(Error::Parse { line: ln, msg: "direction needs 2 or 3 components".into() });
                    }
                    dir[..comps.len()].copy_from_slice(&comps);
                    dim = Dim::from_usize(comps.len());
                    directions.push(dir);
                }
                "wave" => in_body = true,
                other => {
                    return Err(Error::Parse { line: ln, msg: format!("unknown header key {other:?}") })
                }
            }
            continue;
        }
        let d = dim.ok_or(Error::Parse { line: ln, msg: "no direction rows".into() })?.as_usize();
        if toks.len() != d + 4 {
            return Err(Error::Parse { line: ln, msg: format!("expected {} columns", d + 4) });
        }
        let w = parse_usize(toks[0], ln)?;
        let r = parse_usize(toks[1], ln)?;
        let mut p = [0.0; 3];
        for a in 0..d {
            p[a] = parse_f64(toks[2 + a], ln)?;
        }
        let v = Complex64::new(parse_f64(toks[2 + d], ln)?, parse_f64(toks[3 + d], ln)?);
        rows.push((w, r, p, v));
    }
    let missing = |what: &str| Error::Parse { line: 0, msg: format!("missing {what}") };
    let k = k.ok_or_else(|| missing("k"))?;
    let noise = noise.ok_or_else(|| missing("noise"))?;
    let seed = seed.ok_or_else(|| missing("seed"))?;
    let dim = dim.ok_or_else(|| missing("direction"))?;
    let waves = directions.len();
    let per_wave = rows.iter().filter(|r| r.0 == 0).count();
    if rows.len() != waves * per_wave {
        return Err(Error::Parse { line: 0, msg: "ragged measurement table".into() });
    }
    let mut points = vec![[0.0; 3]; per_wave];
    let mut data = vec![vec![Complex64::new(0.0, 0.0); per_wave]; waves];
    for (w, r, p, v) in rows {
        if w >= waves || r >= per_wave {
            return Err(Error::Parse { line: 0, msg: format!("row ({w},{r}) out of range") });
        }
        if w == 0 {
            points[r] = p;
        } else if points[r] != p {
            return Err(Error::Parse { line: 0, msg: format!("receiver {r} moves between waves") });
        }
        data[w][r] = v;
    }
    Ok(MeasurementSet {
        dim,
        k,
        directions,
        receivers: ReceiverSet { points, geometry: ReceiverGeometry::Explicit },
        data,
        noise,
        seed,
    })
}

pub fn write_string(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents)?;
    Ok(())
}

pub fn read_string(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn real_field_round_trips_bit_exactly(
            vals in proptest::collection::vec(-1e300f64..1e300, 12),
            h in 1e-4f64..10.0,
            ox in -100.0f64..100.0,
        ) {
            let g = UniformGrid::new(Dim::Two, [ox, -ox / 3.0, 0.0], h, [3, 4, 1]).unwrap();
            let f = RealField::from_values(g, vals).unwrap();
            let back = real_field_from_csv(&real_field_to_csv(&f)).unwrap();
            prop_assert_eq!(back, f);
        }

        #[test]
        fn complex_field_round_trips_3d(vals in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 24)) {
            let g = UniformGrid::new(Dim::Three, [0.1, 0.2, 0.3], 0.03, [2, 3, 4]).unwrap();
            let f = ComplexField { grid: g, values: vals.into_iter().map(|(a, b)| Complex64::new(a, b)).collect() };
            let back = complex_field_from_csv(&complex_field_to_csv(&f)).unwrap();
            prop_assert_eq!(back, f);
        }
    }

    #[test]
    fn header_layout() {
        let g = UniformGrid::new(Dim::Two, [-2.0, -2.0, 0.0], 0.5, [2, 1, 1]).unwrap();
        let f = RealField::from_values(g, vec![1.0, 0.25]).unwrap();
        let s = real_field_to_csv(&f);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "2");
        assert_eq!(lines[1], "-2.0000000000000000e0,-2.0000000000000000e0,5.0000000000000000e-1");
        assert_eq!(lines[2], "2,1");
        assert_eq!(lines[3], "0,0,1.0000000000000000e0");
        assert_eq!(lines[4], "1,0,2.5000000000000000e-1");
    }

    #[test]
    fn truncated_file_is_a_parse_error() {
        let g = UniformGrid::new(Dim::Two, [0.0; 3], 1.0, [2, 2, 1]).unwrap();
        let s = real_field_to_csv(&RealField::zeros(g));
        let cut: String = s.lines().take(5).collect::<Vec<_>>().join("\n");
        assert!(matches!(real_field_from_csv(&cut), Err(Error::Parse { .. })));
        assert!(matches!(real_field_from_csv("4\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn mask_round_trip() {
        let g = UniformGrid::new(Dim::Two, [0.0; 3], 1.0, [3, 3, 1]).unwrap();
        let m = SubdomainMask::from_cells(g, &[1, 4, 8]).unwrap();
        assert_eq!(mask_from_csv(&mask_to_csv(&m)).unwrap(), m);
    }
}
