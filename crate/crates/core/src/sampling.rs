//! Direct sampling: the normalized correlation index between measured data
//! and point-source fields, support extraction and the initial coefficient.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{check_same_dim, distance, Aabb, Point, RealField, ReceiverSet, SubdomainMask, UniformGrid};
use crate::special::green_radial;

/// Sampling index on a grid, with the per-wave indices it was combined from.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexField {
    pub phi: RealField,
    pub components: Vec<RealField>,
}

/// Direct sampling index of one wave's data at every cell center of `grid`.
///
/// `phi(x_p) = |<u_s, G(., x_p)>| / (|u_s| |G(., x_p)|)` with discrete inner
/// products over the receivers and unit weights.
pub fn index_phi(
    data: &[Complex64],
    receivers: &ReceiverSet,
    grid: &UniformGrid,
    k: f64,
) -> Result<IndexField> {
    if data.len() != receivers.len() {
        return Err(Error::InvalidArgument(format!(
            "{} samples for {} receivers",
            data.len(),
            receivers.len()
        )));
    }
    let data_norm = data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if data_norm == 0.0 {
        return Err(Error::EmptyField("scattered data is identically zero"));
    }
    let dim = grid.dim();
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|p| {
            let x = grid.center(p);
            let mut inner = Complex64::new(0.0, 0.0);
            let mut gnorm = 0.0;
            for (y, u) in receivers.points.iter().zip(data) {
                let r = distance(&x, y);
                if r == 0.0 {
                    return Err(Error::Geometry(format!("receiver {y:?} coincides with a sampling point")));
                }
                let g = green_radial(k, r, dim);
                inner += u * g.conj();
                gnorm += g.norm_sqr();
            }
            Ok((inner.norm() / (data_norm * gnorm.sqrt())).min(1.0))
        })
        .collect::<Result<_>>()?;
    let phi = RealField::from_values(*grid, values)?;
    Ok(IndexField { components: vec![phi.clone()], phi })
}

/// Pointwise maximum of several indices on a common grid.
pub fn combine_indices(fields: &[IndexField]) -> Result<IndexField> {
    let first = fields
        .first()
        .ok_or_else(|| Error::InvalidArgument("no index fields to combine".into()))?;
    let grid = first.phi.grid;
    let mut values = first.phi.values.clone();
    let mut components = first.components.clone();
    for f in &fields[1..] {
        if f.phi.grid != grid {
            return Err(Error::GridMismatch("index fields live on different grids".into()));
        }
        for (v, w) in values.iter_mut().zip(&f.phi.values) {
            *v = v.max(*w);
        }
        components.extend(f.components.iter().cloned());
    }
    Ok(IndexField { phi: RealField { grid, values }, components })
}

/// How the thresholded index is turned into the inversion domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SupportMode {
    /// Keep exactly the cells with `phi >= mu max phi`.
    Threshold,
    /// Replace every face-connected component of the thresholded set by its
    /// bounding box, grown symmetrically to at least `min_width` per axis.
    Boxes { min_width: f64 },
    /// A square (cube in 3D) of the given width centred on the strongest
    /// cell of every face-connected component of the thresholded set.
    Squares { width: f64 },
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::Domain { what: "cut-off mu", value: mu });
    }
    Ok(())
}

/// Cells with `phi >= mu max phi`.
pub fn threshold_mask(phi: &RealField, mu: f64) -> Result<SubdomainMask> {
    check_mu(mu)?;
    let max = phi.max();
    if !(max > 0.0) {
        return Err(Error::EmptyField("index is identically zero"));
    }
    let cut = mu * max;
    SubdomainMask::from_mask(phi.grid, phi.values.iter().map(|&v| v >= cut).collect())
}

/// Bounding boxes of the thresholded components, grown to `min_width`.
///
/// Boxes are aligned to the index grid's cell faces and clipped to its extent.
pub fn support_boxes(phi: &RealField, mu: f64, min_width: f64) -> Result<Vec<Aabb>> {
    let mask = threshold_mask(phi, mu)?;
    let grid = phi.grid;
    let d = grid.dim().as_usize();
    let h = grid.h();
    let counts = grid.counts();
    let origin = grid.origin();
    let target = (min_width / h).round().max(1.0) as usize;
    let mut boxes = Vec::new();
    for comp in mask.components() {
        let mut lo = [usize::MAX; 3];
        let mut hi = [0usize; 3];
        for &c in &comp {
            let mi = grid.multi_index(c);
            for a in 0..3 {
                lo[a] = lo[a].min(mi[a]);
                hi[a] = hi[a].max(mi[a]);
            }
        }
        let mut b = Aabb { lo: [0.0; 3], hi: [0.0; 3] };
        for a in 0..d {
            let n = hi[a] - lo[a] + 1;
            let (mut first, mut last) = (lo[a] as i64, hi[a] as i64);
            if n < target {
                let pad = (target - n) as i64;
                first -= pad / 2;
                last += pad - pad / 2;
            }
            let first = first.max(0) as usize;
            let last = (last.min(counts[a] as i64 - 1)) as usize;
            b.lo[a] = origin[a] + first as f64 * h;
            b.hi[a] = origin[a] + (last + 1) as f64 * h;
        }
        boxes.push(b);
    }
    Ok(boxes)
}

/// Squares of side `width` centred on each thresholded component.
///
/// The centre is the middle of the component's bounding box. Boxes are
/// aligned to the index grid's cell faces and clipped to its extent.
pub fn support_squares(phi: &RealField, mu: f64, width: f64) -> Result<Vec<Aabb>> {
    let mask = threshold_mask(phi, mu)?;
    let grid = phi.grid;
    let h = grid.h();
    let counts = grid.counts();
    let origin = grid.origin();
    let n = (width / h).round().max(1.0) as i64;
    let mut boxes = Vec::new();
    for comp in mask.components() {
        let mut lo = [usize::MAX; 3];
        let mut hi = [0usize; 3];
        for &c in &comp {
            let mi = grid.multi_index(c);
            for a in 0..3 {
                lo[a] = lo[a].min(mi[a]);
                hi[a] = hi[a].max(mi[a]);
            }
        }
        let mut b = Aabb { lo: [0.0; 3], hi: [0.0; 3] };
        for a in 0..grid.dim().as_usize() {
            // first cell such that the square's centre is nearest the box centre
            let span = (lo[a] + hi[a] + 1) as i64;
            let first = ((span - n) as f64 / 2.0).round() as i64;
            let last = (first + n - 1).min(counts[a] as i64 - 1);
            b.lo[a] = origin[a] + first.max(0) as f64 * h;
            b.hi[a] = origin[a] + (last + 1) as f64 * h;
        }
        boxes.push(b);
    }
    Ok(boxes)
}

/// Inversion domain `D` on the index grid.
pub fn extract_support(phi: &IndexField, mu: f64, mode: SupportMode) -> Result<SubdomainMask> {
    match mode {
        SupportMode::Threshold => threshold_mask(&phi.phi, mu),
        SupportMode::Boxes { min_width } => {
            let boxes = support_boxes(&phi.phi, mu, min_width)?;
            Ok(Aabb::rasterize_union(&boxes, &phi.phi.grid))
        }
        SupportMode::Squares { width } => {
            let boxes = support_squares(&phi.phi, mu, width)?;
            Ok(Aabb::rasterize_union(&boxes, &phi.phi.grid))
        }
    }
}

/// `phi` restricted to `d`, zero elsewhere, on the grid of `d`.
///
/// If `d` lives on a different grid than `phi`, each cell of `d` takes the
/// value of the index cell containing its center.
pub fn initial_guess(phi: &IndexField, d: &SubdomainMask) -> Result<RealField> {
    check_same_dim(&phi.phi.grid, &d.grid)?;
    let src = &phi.phi;
    let mut out = RealField::zeros(d.grid);
    for &c in d.cells() {
        out.values[c] = if src.grid == d.grid {
            src.values[c]
        } else {
            let mi = src.grid.locate(&d.grid.center(c)).ok_or_else(|| {
                Error::GridMismatch("inversion cell outside the sampling grid".into())
            })?;
            src.values[src.grid.linear_index(mi)]
        };
    }
    Ok(out)
}

/// A local maximum of the index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub location: Point,
    pub value: f64,
}

/// Local maxima with `phi >= floor * max phi`, strongest first, keeping only
/// peaks farther than `min_separation` from every stronger kept peak.
///
/// A cell is a local maximum when no cell in its `3^dim` neighbourhood is
/// larger.
pub fn find_peaks(phi: &RealField, floor: f64, min_separation: f64) -> Vec<Peak> {
    let grid = phi.grid;
    let d = grid.dim().as_usize();
    let counts = grid.counts();
    let cut = floor * phi.max();
    let mut cands: Vec<Peak> = Vec::new();
    for i in 0..grid.len() {
        let v = phi.values[i];
        if v < cut {
            continue;
        }
        let mi = grid.multi_index(i);
        let mut is_max = true;
        'outer: for off in 0..3usize.pow(d as u32) {
            let mut nb = mi;
            let mut o = off;
            let mut center = true;
            for a in 0..d {
                let step = (o % 3) as i64 - 1;
                o /= 3;
                if step != 0 {
                    center = false;
                }
                let n = mi[a] as i64 + step;
                if n < 0 || n >= counts[a] as i64 {
                    continue 'outer;
                }
                nb[a] = n as usize;
            }
            if !center && phi.values[grid.linear_index(nb)] > v {
                is_max = false;
                break;
            }
        }
        if is_max {
            cands.push(Peak { location: grid.center(i), value: v });
        }
    }
    cands.sort_by(|a, b| b.value.total_cmp(&a.value));
    let mut kept: Vec<Peak> = Vec::new();
    for c in cands {
        if kept.iter().all(|k| distance(&k.location, &c.location) > min_separation) {
            kept.push(c);
        }
    }
    kept
}
