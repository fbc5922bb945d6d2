//! Experiment descriptions and their plain-text format.
//!
//! A scenario file holds one `section.key = value` entry per line. Vectors
//! are comma separated; lists of vectors separate their entries with `;`.
//! `scatterer.box` and `scatterer.ring` may repeat, one primitive per line.
//! Blank lines and lines starting with `#` are ignored.

use std::f64::consts::PI;
use std::fmt::Write as _;

use scatter_core::grid::unit;
use scatter_core::{
    make_receivers_circle, make_receivers_cube, Dim, IncidentWave, Point, Primitive, ReceiverSet,
    ScattererSpec, SupportMode, UniformGrid,
};

use crate::error::{HarnessError, Result};

/// An axis-aligned domain meshed with cells of width `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lo: Point,
    pub hi: Point,
    pub h: f64,
}

impl Domain {
    pub fn grid(&self, dim: Dim) -> scatter_core::Result<UniformGrid> {
        UniformGrid::covering(dim, self.lo, self.hi, self.h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Receivers {
    Circle { center: Point, radius: f64, count: usize },
    Cube { center: Point, width: f64, per_axis: usize },
}

impl Receivers {
    pub fn build(&self) -> ReceiverSet {
        match *self {
            Receivers::Circle { center, radius, count } => make_receivers_circle(center, radius, count),
            Receivers::Cube { center, width, per_axis } => make_receivers_cube(center, width, per_axis),
        }
    }
}

/// Regularization weights `(alpha, beta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub dim: Dim,
    pub k: f64,
    pub directions: Vec<Point>,
    pub scatterers: ScattererSpec,
    pub forward: Domain,
    pub sampling: Domain,
    pub receivers: Receivers,
    pub noise: f64,
    pub seed: u64,
    pub mu: f64,
    pub support: SupportMode,
    /// Mesh width of the inversion domain.
    pub inversion_h: f64,
    /// Weights used with exact data.
    pub weights_exact: Weights,
    /// Weights used with noisy data.
    pub weights_noisy: Weights,
    pub c: f64,
    pub max_iters: usize,
}

pub const BUILTIN: [&str; 4] = ["ex1a", "ex1b", "ring", "cubes3d"];

fn square(cx: f64, cy: f64, w: f64, value: f64) -> Primitive {
    Primitive::Box { center: [cx, cy, 0.0], widths: [w, w, 0.0], value }
}

fn cube(cx: f64, cy: f64, cz: f64, w: f64, value: f64) -> Primitive {
    Primitive::Box { center: [cx, cy, cz], widths: [w; 3], value }
}

fn plane_2d(name: &str, primitives: Vec<Primitive>, directions: Vec<Point>, box_width: f64, exact: Weights, noisy: Weights) -> Scenario {
    Scenario {
        name: name.to_string(),
        dim: Dim::Two,
        k: 2.0 * PI,
        directions,
        scatterers: ScattererSpec { primitives },
        forward: Domain { lo: [-1.0, -1.0, 0.0], hi: [1.0, 1.0, 0.0], h: 0.01 },
        sampling: Domain { lo: [-2.0, -2.0, 0.0], hi: [2.0, 2.0, 0.0], h: 0.02 },
        receivers: Receivers::Circle { center: [0.0; 3], radius: 5.0, count: 30 },
        noise: 0.0,
        seed: 20130101,
        mu: 0.6,
        support: SupportMode::Squares { width: box_width },
        inversion_h: 0.02,
        weights_exact: exact,
        weights_noisy: noisy,
        c: 50.0,
        max_iters: 50,
    }
}

impl Scenario {
    /// One of the built-in experiments, with exact data.
    pub fn builtin(name: &str) -> Option<Scenario> {
        let d1 = unit([1.0, 1.0, 0.0]);
        let w = |alpha, beta| Weights { alpha, beta };
        let s = match name {
            "ex1a" => plane_2d(
                name,
                vec![square(-0.8, -0.7, 0.2, 1.0), square(0.3, 0.9, 0.2, 1.0)],
                vec![d1],
                0.4,
                w(2.0e-6, 1.5e-9),
                w(3.0e-6, 2.0e-9),
            ),
            "ex1b" => plane_2d(
                name,
                vec![square(-0.25, 0.0, 0.3, 1.5), square(0.25, 0.0, 0.3, 1.0)],
                vec![d1],
                1.0,
                w(8.0e-6, 1.4e-8),
                w(8.5e-6, 9.0e-9),
            ),
            "ring" => plane_2d(
                name,
                vec![Primitive::RingBox { center: [0.0; 3], outer: 0.6, inner: 0.4, value: 1.0 }],
                vec![d1, unit([1.0, -1.0, 0.0])],
                0.8,
                w(7.0e-6, 1.0e-9),
                w(7.0e-6, 5.0e-9),
            ),
            "cubes3d" => Scenario {
                name: name.to_string(),
                dim: Dim::Three,
                k: 2.0 * PI,
                directions: vec![unit([1.0, 1.0, 1.0])],
                scatterers: ScattererSpec {
                    primitives: vec![cube(0.35, 0.15, 0.15, 0.1, 1.0), cube(-0.35, 0.15, 0.15, 0.1, 1.0)],
                },
                forward: Domain { lo: [-0.5, 0.0, 0.0], hi: [0.5, 0.3, 0.3], h: 0.01 },
                sampling: Domain { lo: [-1.0; 3], hi: [1.0; 3], h: 0.04 },
                receivers: Receivers::Cube { center: [0.0; 3], width: 5.0, per_axis: 10 },
                noise: 0.0,
                seed: 20130101,
                mu: 0.6,
                support: SupportMode::Squares { width: 0.36 },
                inversion_h: 0.04,
                weights_exact: w(2.5e-9, 4.0e-14),
                weights_noisy: w(2.5e-9, 5.0e-14),
                c: 50.0,
                max_iters: 50,
            },
            _ => return None,
        };
        Some(s)
    }

    /// The weights matching the scenario's noise level.
    pub fn weights(&self) -> Weights {
        if self.noise > 0.0 {
            self.weights_noisy
        } else {
            self.weights_exact
        }
    }

    pub fn waves(&self) -> scatter_core::Result<Vec<IncidentWave>> {
        self.directions.iter().map(|d| IncidentWave::new(self.k, *d)).collect()
    }

    pub fn inversion_grid(&self) -> scatter_core::Result<UniformGrid> {
        Domain { h: self.inversion_h, ..self.sampling }.grid(self.dim)
    }

    /// Checks the geometric consistency of the experiment.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Invalid(m));
        if self.directions.is_empty() {
            return bad("at least one incident direction is required".into());
        }
        let d = self.dim.as_usize();
        for p in &self.scatterers.primitives {
            let b = p.bounds();
            for a in 0..d {
                if b.lo[a] < self.sampling.lo[a] || b.hi[a] > self.sampling.hi[a] {
                    return bad(format!("scatterer {p:?} is not inside the sampling domain"));
                }
            }
        }
        let corners = (0..1usize << d).map(|m| {
            let mut c = [0.0; 3];
            for (a, x) in c.iter_mut().enumerate().take(d) {
                *x = if m >> a & 1 == 1 { self.sampling.hi[a] } else { self.sampling.lo[a] };
            }
            c
        });
        let encloses = match self.receivers {
            Receivers::Circle { center, radius, .. } => corners
                .map(|c| ((c[0] - center[0]).powi(2) + (c[1] - center[1]).powi(2)).sqrt())
                .all(|r| r < radius),
            Receivers::Cube { center, width, .. } => {
                corners.flat_map(|c| (0..3).map(move |a| (c[a] - center[a]).abs())).all(|r| r < width / 2.0)
            }
        };
        if !encloses {
            return bad("receivers must enclose the sampling domain".into());
        }
        if !(0.0 < self.mu && self.mu <= 1.0) {
            return bad(format!("mu must lie in (0, 1], got {}", self.mu));
        }
        if !(self.noise >= 0.0) {
            return bad(format!("noise must be non-negative, got {}", self.noise));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let v = |p: &Point, d: usize| p[..d].iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let d = self.dim.as_usize();
        let _ = writeln!(s, "scenario.name = {}", self.name);
        let _ = writeln!(s, "scenario.dim = {d}");
        let _ = writeln!(s, "physics.k = {:?}", self.k);
        let dirs: Vec<String> = self.directions.iter().map(|p| v(p, d)).collect();
        let _ = writeln!(s, "physics.directions = {}", dirs.join("; "));
        for p in &self.scatterers.primitives {
            match p {
                Primitive::Box { center, widths, value } => {
                    let _ = writeln!(s, "scatterer.box = {}; {}; {value:?}", v(center, d), v(widths, d));
                }
                Primitive::RingBox { center, outer, inner, value } => {
                    let _ = writeln!(s, "scatterer.ring = {}; {outer:?}; {inner:?}; {value:?}", v(center, d));
                }
            }
        }
        for (sec, dom) in [("forward", &self.forward), ("sampling", &self.sampling)] {
            let _ = writeln!(s, "{sec}.lo = {}", v(&dom.lo, d));
            let _ = writeln!(s, "{sec}.hi = {}", v(&dom.hi, d));
            let _ = writeln!(s, "{sec}.h = {:?}", dom.h);
        }
        match self.receivers {
            Receivers::Circle { center, radius, count } => {
                let _ = writeln!(s, "receivers.kind = circle");
                let _ = writeln!(s, "receivers.center = {}", v(&center, d));
                let _ = writeln!(s, "receivers.radius = {radius:?}");
                let _ = writeln!(s, "receivers.count = {count}");
            }
            Receivers::Cube { center, width, per_axis } => {
                let _ = writeln!(s, "receivers.kind = cube");
                let _ = writeln!(s, "receivers.center = {}", v(&center, d));
                let _ = writeln!(s, "receivers.width = {width:?}");
                let _ = writeln!(s, "receivers.per_axis = {per_axis}");
            }
        }
        let _ = writeln!(s, "noise.level = {:?}", self.noise);
        let _ = writeln!(s, "noise.seed = {}", self.seed);
        let _ = writeln!(s, "support.mu = {:?}", self.mu);
        match self.support {
            SupportMode::Threshold => {
                let _ = writeln!(s, "support.mode = threshold");
            }
            SupportMode::Boxes { min_width } => {
                let _ = writeln!(s, "support.mode = boxes");
                let _ = writeln!(s, "support.box_width = {min_width:?}");
            }
            SupportMode::Squares { width } => {
                let _ = writeln!(s, "support.mode = squares");
                let _ = writeln!(s, "support.box_width = {width:?}");
            }
        }
        let _ = writeln!(s, "inversion.h = {:?}", self.inversion_h);
        let (e, n) = (self.weights_exact, self.weights_noisy);
        let _ = writeln!(s, "inversion.weights_exact = {:?}, {:?}", e.alpha, e.beta);
        let _ = writeln!(s, "inversion.weights_noisy = {:?}, {:?}", n.alpha, n.beta);
        let _ = writeln!(s, "inversion.c = {:?}", self.c);
        let _ = writeln!(s, "inversion.max_iters = {}", self.max_iters);
        s
    }

    pub fn parse(text: &str) -> Result<Scenario> {
        let mut entries: Vec<(usize, String, String)> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::parse(n + 1, "expected `section.key = value`"))?;
            let key = key.trim();
            if !key.contains('.') {
                return Err(HarnessError::parse(n + 1, format!("key `{key}` has no section")));
            }
            entries.push((n + 1, key.to_string(), value.trim().to_string()));
        }
        let mut p = Parser { entries, used: Vec::new() };
        let dim_line = p.line_of("scenario.dim");
        let dim = match p.usize("scenario.dim")? {
            2 => Dim::Two,
            3 => Dim::Three,
            d => return Err(HarnessError::parse(dim_line, format!("dim must be 2 or 3, got {d}"))),
        };
        let d = dim.as_usize();
        let name = p.required("scenario.name")?.1;
        let k = p.f64("physics.k")?;
        let (dl, dirs) = p.required("physics.directions")?;
        let directions = dirs
            .split(';')
            .map(|t| parse_point(t, d).map_err(|m| HarnessError::parse(dl, m)))
            .collect::<Result<Vec<_>>>()?;
        let mut primitives = Vec::new();
        for (line, key, value) in p.entries.clone() {
            let fields: Vec<&str> = value.split(';').collect();
            let prim = match key.as_str() {
                "scatterer.box" => {
                    if fields.len() != 3 {
                        return Err(HarnessError::parse(line, "box needs `center; widths; value`"));
                    }
                    let center = parse_point(fields[0], d).map_err(|m| HarnessError::parse(line, m))?;
                    let widths = parse_point(fields[1], d).map_err(|m| HarnessError::parse(line, m))?;
                    let value = parse_f64(fields[2]).map_err(|m| HarnessError::parse(line, m))?;
                    Primitive::Box { center, widths, value }
                }
                "scatterer.ring" => {
                    if fields.len() != 4 {
                        return Err(HarnessError::parse(line, "ring needs `center; outer; inner; value`"));
                    }
                    let center = parse_point(fields[0], d).map_err(|m| HarnessError::parse(line, m))?;
                    let nums = fields[1..]
                        .iter()
                        .map(|f| parse_f64(f).map_err(|m| HarnessError::parse(line, m)))
                        .collect::<Result<Vec<_>>>()?;
                    Primitive::RingBox { center, outer: nums[0], inner: nums[1], value: nums[2] }
                }
                _ => continue,
            };
            p.used.push(line);
            primitives.push(prim);
        }
        let forward = p.domain("forward", d)?;
        let sampling = p.domain("sampling", d)?;
        let kind_line = p.line_of("receivers.kind");
        let receivers = match p.required("receivers.kind")?.1.as_str() {
            "circle" => Receivers::Circle {
                center: p.point("receivers.center", d)?,
                radius: p.f64("receivers.radius")?,
                count: p.usize("receivers.count")?,
            },
            "cube" => Receivers::Cube {
                center: p.point("receivers.center", d)?,
                width: p.f64("receivers.width")?,
                per_axis: p.usize("receivers.per_axis")?,
            },
            other => return Err(HarnessError::parse(kind_line, format!("unknown receiver kind `{other}`"))),
        };
        let noise = p.f64("noise.level")?;
        let seed = p.u64("noise.seed")?;
        let mu = p.f64("support.mu")?;
        let mode_line = p.line_of("support.mode");
        let support = match p.required("support.mode")?.1.as_str() {
            "threshold" => SupportMode::Threshold,
            "boxes" => SupportMode::Boxes { min_width: p.f64("support.box_width")? },
            "squares" => SupportMode::Squares { width: p.f64("support.box_width")? },
            other => return Err(HarnessError::parse(mode_line, format!("unknown support mode `{other}`"))),
        };
        let inversion_h = p.f64("inversion.h")?;
        let weights_exact = p.weights("inversion.weights_exact")?;
        let weights_noisy = p.weights("inversion.weights_noisy")?;
        let c = p.f64("inversion.c")?;
        let max_iters = p.usize("inversion.max_iters")?;
        if let Some((line, key, _)) = p.entries.iter().find(|(l, _, _)| !p.used.contains(l)) {
            return Err(HarnessError::parse(*line, format!("unknown key `{key}`")));
        }
        let s = Scenario {
            name,
            dim,
            k,
            directions,
            scatterers: ScattererSpec { primitives },
            forward,
            sampling,
            receivers,
            noise,
            seed,
            mu,
            support,
            inversion_h,
            weights_exact,
            weights_noisy,
            c,
            max_iters,
        };
        Ok(s)
    }
}

struct Parser {
    entries: Vec<(usize, String, String)>,
    used: Vec<usize>,
}

impl Parser {
    fn line_of(&self, key: &str) -> usize {
        self.entries.iter().find(|e| e.1 == key).map_or(0, |e| e.0)
    }

    fn required(&mut self, key: &str) -> Result<(usize, String)> {
        let mut hits = self.entries.iter().filter(|e| e.1 == key);
        let first = hits.next().ok_or_else(|| HarnessError::parse(0, format!("missing key `{key}`")))?;
        if let Some(dup) = hits.next() {
            return Err(HarnessError::parse(dup.0, format!("duplicate key `{key}`")));
        }
        self.used.push(first.0);
        Ok((first.0, first.2.clone()))
    }

    fn f64(&mut self, key: &str) -> Result<f64> {
        let (l, v) = self.required(key)?;
        parse_f64(&v).map_err(|m| HarnessError::parse(l, format!("{key}: {m}")))
    }

    fn u64(&mut self, key: &str) -> Result<u64> {
        let (l, v) = self.required(key)?;
        v.parse().map_err(|_| HarnessError::parse(l, format!("{key}: expected an integer, got `{v}`")))
    }

    fn usize(&mut self, key: &str) -> Result<usize> {
        let (l, v) = self.required(key)?;
        v.parse().map_err(|_| HarnessError::parse(l, format!("{key}: expected an integer, got `{v}`")))
    }

    fn point(&mut self, key: &str, d: usize) -> Result<Point> {
        let (l, v) = self.required(key)?;
        parse_point(&v, d).map_err(|m| HarnessError::parse(l, format!("{key}: {m}")))
    }

    fn domain(&mut self, sec: &str, d: usize) -> Result<Domain> {
        Ok(Domain {
            lo: self.point(&format!("{sec}.lo"), d)?,
            hi: self.point(&format!("{sec}.hi"), d)?,
            h: self.f64(&format!("{sec}.h"))?,
        })
    }

    fn weights(&mut self, key: &str) -> Result<Weights> {
        let (l, v) = self.required(key)?;
        let p = parse_list(&v).map_err(|m| HarnessError::parse(l, format!("{key}: {m}")))?;
        if p.len() != 2 {
            return Err(HarnessError::parse(l, format!("{key}: expected `alpha, beta`")));
        }
        Ok(Weights { alpha: p[0], beta: p[1] })
    }
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim();
    match t.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(format!("expected a finite number, got `{t}`")),
    }
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',').map(parse_f64).collect()
}

fn parse_point(s: &str, d: usize) -> std::result::Result<Point, String> {
    let v = parse_list(s)?;
    if v.len() != d {
        return Err(format!("expected {d} coordinates, got {}", v.len()));
    }
    let mut p = [0.0; 3];
    p[..d].copy_from_slice(&v);
    Ok(p)
}
