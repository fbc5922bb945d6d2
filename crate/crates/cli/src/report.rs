//! Reconstruction quality measures and the run summary.

use std::fmt::Write as _;

use scatter_core::io::fmt_f64;
use scatter_core::{Peak, RealField, SsnDiagnostics, SubdomainMask};

use crate::pipeline::{Inversion, SamplingOutput};
use crate::scenario::{Scenario, Weights};

/// Cells with `|eta| >= RELATIVE_LEVEL * max |eta|` form the reconstructed support.
pub const RELATIVE_LEVEL: f64 = 0.5;
/// Absolute level above which a background cell counts as spurious.
pub const BACKGROUND_LEVEL: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// Intersection over union of reconstructed and true supports.
    pub jaccard: f64,
    /// `|max eta - max eta_true| / max eta_true`.
    pub max_eta_error: f64,
    /// Relative L2 error over `D`.
    pub relative_l2: f64,
    /// Fraction of background cells of `D` with `|eta| > BACKGROUND_LEVEL`.
    pub background_impurity: f64,
    /// Face-connected components of the reconstructed support.
    pub components: usize,
}

/// Cells of `eta` at or above half its peak magnitude.
pub fn reconstructed_support(eta: &RealField) -> SubdomainMask {
    let max = eta.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mask = eta.values.iter().map(|v| max > 0.0 && v.abs() >= RELATIVE_LEVEL * max).collect();
    SubdomainMask::from_mask(eta.grid, mask).expect("mask sized to its grid")
}

impl Metrics {
    pub fn compute(truth: &RealField, eta: &RealField, d: &SubdomainMask) -> Metrics {
        assert_eq!(truth.grid, eta.grid, "truth and reconstruction grids differ");
        let rec = reconstructed_support(eta);
        let (mut inter, mut union) = (0usize, 0usize);
        for (r, t) in rec.mask().iter().zip(&truth.values) {
            let t = *t != 0.0;
            inter += usize::from(*r && t);
            union += usize::from(*r || t);
        }
        let jaccard = if union == 0 { 0.0 } else { inter as f64 / union as f64 };
        let true_max = truth.max();
        let max_eta_error = if true_max > 0.0 { (eta.max() - true_max).abs() / true_max } else { eta.max().abs() };
        let (mut num, mut den) = (0.0, 0.0);
        let (mut spurious, mut background) = (0usize, 0usize);
        for &c in d.cells() {
            let (e, t) = (eta.values[c], truth.values[c]);
            num += (e - t) * (e - t);
            den += t * t;
            if t == 0.0 {
                background += 1;
                spurious += usize::from(e.abs() > BACKGROUND_LEVEL);
            }
        }
        let relative_l2 = if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
        let background_impurity = if background == 0 { 0.0 } else { spurious as f64 / background as f64 };
        Metrics { jaccard, max_eta_error, relative_l2, background_impurity, components: rec.components().len() }
    }

    /// Larger is better; used to rank weights when none is acceptable.
    pub fn score(&self) -> f64 {
        self.jaccard - self.max_eta_error.min(1.0) - self.background_impurity
    }

    pub fn to_csv(&self) -> String {
        format!(
            "metric,value\njaccard,{}\nmax_eta_error,{}\nrelative_l2,{}\nbackground_impurity,{}\ncomponents,{}\n",
            fmt_f64(self.jaccard),
            fmt_f64(self.max_eta_error),
            fmt_f64(self.relative_l2),
            fmt_f64(self.background_impurity),
            self.components
        )
    }
}

/// Summary of one reconstruction. Wall-clock times are kept out so that
/// repeated runs produce identical files.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconReport {
    pub scenario: String,
    pub noise: f64,
    pub seed: u64,
    pub start: Weights,
    pub chosen: Weights,
    pub peaks: Vec<Peak>,
    pub d_cells: usize,
    /// Index-space bounding boxes `(lo, hi)` of the components of `D`.
    pub d_components: Vec<([f64; 3], [f64; 3])>,
    pub diagnostics: SsnDiagnostics,
    pub metrics: Metrics,
}

impl ReconReport {
    pub fn new(s: &Scenario, start: Weights, chosen: Weights, sampling: &SamplingOutput, inv: &Inversion) -> Self {
        let d = &sampling.support;
        let g = d.grid;
        let h = g.h();
        let d_components = d
            .components()
            .iter()
            .map(|comp| {
                let mut lo = [f64::INFINITY; 3];
                let mut hi = [f64::NEG_INFINITY; 3];
                for &c in comp {
                    let x = g.center(c);
                    for a in 0..g.dim().as_usize() {
                        lo[a] = lo[a].min(x[a] - h / 2.0);
                        hi[a] = hi[a].max(x[a] + h / 2.0);
                    }
                }
                for a in g.dim().as_usize()..3 {
                    lo[a] = 0.0;
                    hi[a] = 0.0;
                }
                (lo, hi)
            })
            .collect();
        ReconReport {
            scenario: s.name.clone(),
            noise: s.noise,
            seed: s.seed,
            start,
            chosen,
            peaks: sampling.peaks.clone(),
            d_cells: d.len(),
            d_components,
            diagnostics: inv.result.diagnostics.clone(),
            metrics: inv.metrics,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let m = &self.metrics;
        let _ = writeln!(s, "scenario {}", self.scenario);
        let _ = writeln!(s, "noise {} seed {}", self.noise, self.seed);
        let _ = writeln!(s, "weights start alpha={:e} beta={:e}", self.start.alpha, self.start.beta);
        let _ = writeln!(s, "weights used  alpha={:e} beta={:e}", self.chosen.alpha, self.chosen.beta);
        let _ = writeln!(s, "index peaks {}", self.peaks.len());
        for p in &self.peaks {
            let _ = writeln!(s, "  at ({:.4}, {:.4}, {:.4}) value {:.6}", p.location[0], p.location[1], p.location[2], p.value);
        }
        let _ = writeln!(s, "inversion domain {} cells in {} parts", self.d_cells, self.d_components.len());
        for (lo, hi) in &self.d_components {
            let _ = writeln!(
                s,
                "  [{:.4}, {:.4}] x [{:.4}, {:.4}] x [{:.4}, {:.4}]",
                lo[0], hi[0], lo[1], hi[1], lo[2], hi[2]
            );
        }
        let d = &self.diagnostics;
        let last = d.history.last();
        let _ = writeln!(
            s,
            "newton iterations {} converged {} complementarity {:e}",
            d.iterations,
            d.converged,
            last.map_or(0.0, |r| r.complementarity)
        );
        let _ = writeln!(s, "jaccard {:.6}", m.jaccard);
        let _ = writeln!(s, "max eta error {:.6}", m.max_eta_error);
        let _ = writeln!(s, "relative l2 {:.6}", m.relative_l2);
        let _ = writeln!(s, "background impurity {:.6}", m.background_impurity);
        let _ = writeln!(s, "support components {}", m.components);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use scatter_core::{Dim, UniformGrid};

    fn line(values: &[f64]) -> RealField {
        let g = UniformGrid::new(Dim::Two, [0.0; 3], 1.0, [values.len(), 1, 1]).unwrap();
        RealField::from_values(g, values.to_vec()).unwrap()
    }

    #[test]
    fn perfect_reconstruction() {
        let t = line(&[0.0, 1.0, 1.0, 0.0]);
        let d = SubdomainMask::full(t.grid);
        let m = Metrics::compute(&t, &t, &d);
        assert_eq!(m.jaccard, 1.0);
        assert_eq!(m.max_eta_error, 0.0);
        assert_eq!(m.relative_l2, 0.0);
        assert_eq!(m.background_impurity, 0.0);
        assert_eq!(m.components, 1);
    }

    #[test]
    fn partial_reconstruction() {
        let t = line(&[0.0, 1.0, 1.0, 0.0, 0.0]);
        let e = line(&[0.0, 0.8, 0.2, 0.0, 0.5]);
        let d = SubdomainMask::full(t.grid);
        let m = Metrics::compute(&t, &e, &d);
        // support {1, 4} vs {1, 2}
        assert!((m.jaccard - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.max_eta_error - 0.2).abs() < 1e-15);
        assert!((m.background_impurity - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.components, 2);
    }
}
