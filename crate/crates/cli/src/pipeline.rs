//! The two-stage reconstruction, stage by stage.

use std::time::{Duration, Instant};

use scatter_core::{
    add_noise, build_linearized, combine_indices, extract_support, find_peaks, index_phi, initial_guess,
    rasterize, simulate, ssn_solve, Complex64, IndexField, LaplacianOperator, LinearizedOperator,
    MeasurementSet, MixedRegConfig, Peak, RealField, SsnResult, SubdomainMask,
};

use crate::error::{Result, StageExt};
use crate::report::{Metrics, ReconReport};
use crate::scenario::{Scenario, Weights};

/// Minimum distance between reported peaks of the index.
pub const PEAK_SEPARATION: f64 = 0.5;

/// Multiplicative factors tried by [`grid_search`] on each weight.
pub const SEARCH_FACTORS: [f64; 7] = [0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0];

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardOutput {
    pub eta_true: RealField,
    pub data: MeasurementSet,
}

/// Rasterizes the scatterer and simulates (possibly noisy) data.
pub fn run_forward(s: &Scenario) -> Result<ForwardOutput> {
    let grid = s.forward.grid(s.dim).stage("forward grid")?;
    let eta_true = rasterize(&s.scatterers, &grid).stage("rasterize")?;
    let waves = s.waves().stage("incident waves")?;
    let exact = simulate(&eta_true, &waves, &s.receivers.build()).stage("forward solve")?;
    let data = if s.noise > 0.0 { add_noise(&exact, s.noise, s.seed).stage("noise")? } else { exact };
    Ok(ForwardOutput { eta_true, data })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingOutput {
    pub index: IndexField,
    /// Inversion domain on the inversion mesh.
    pub support: SubdomainMask,
    pub initial: RealField,
    pub peaks: Vec<Peak>,
}

/// Direct sampling, support extraction and the initial guess.
pub fn run_sampling(s: &Scenario, data: &MeasurementSet) -> Result<SamplingOutput> {
    let grid = s.sampling.grid(s.dim).stage("sampling grid")?;
    let per_wave = data
        .data
        .iter()
        .map(|d| index_phi(d, &data.receivers, &grid, data.k))
        .collect::<scatter_core::Result<Vec<_>>>()
        .stage("index")?;
    let index = combine_indices(&per_wave).stage("index")?;
    let on_index = extract_support(&index, s.mu, s.support).stage("support")?;
    let inv = s.inversion_grid().stage("inversion grid")?;
    let support = if inv == grid { on_index } else { on_index.resample(&inv).stage("support")? };
    let initial = initial_guess(&index, &support).stage("initial guess")?;
    let peaks = find_peaks(&index.phi, s.mu, PEAK_SEPARATION);
    Ok(SamplingOutput { index, support, initial, peaks })
}

/// The linearized problem on `D`, shared by every choice of weights.
pub struct Prepared {
    pub a: LinearizedOperator,
    pub y: Vec<Complex64>,
    pub lap: LaplacianOperator,
    pub support: SubdomainMask,
    /// True contrast sampled on the inversion mesh.
    pub truth: RealField,
}

pub fn prepare(s: &Scenario, data: &MeasurementSet, support: &SubdomainMask, initial: &RealField) -> Result<Prepared> {
    let (a, y) = build_linearized(initial, support, data).stage("linearization")?;
    let lap = LaplacianOperator::new(support);
    let truth = rasterize(&s.scatterers, &support.grid).stage("rasterize")?;
    Ok(Prepared { a, y, lap, support: support.clone(), truth })
}

/// Solver settings for the given weights. Both penalties are weighted by
/// the cell volume of the inversion mesh inside the solver.
pub fn solver_config(s: &Scenario, w: Weights) -> MixedRegConfig {
    MixedRegConfig { alpha: w.alpha, beta: w.beta, c: s.c, max_iters: s.max_iters, ..MixedRegConfig::default() }
}

pub struct Inversion {
    pub eta: RealField,
    pub result: SsnResult,
    pub metrics: Metrics,
}

/// Solves the mixed model for one pair of weights and scores it.
pub fn invert(s: &Scenario, p: &Prepared, w: Weights) -> Result<Inversion> {
    let cfg = solver_config(s, w);
    let result = ssn_solve(&p.a, &p.y, &p.lap, &cfg, None, None).stage("inversion")?;
    let mut eta = RealField::zeros(p.support.grid);
    for (&c, v) in p.support.cells().iter().zip(result.eta()) {
        eta.values[c] = *v;
    }
    let metrics = Metrics::compute(&p.truth, &eta, &p.support);
    Ok(Inversion { eta, result, metrics })
}

/// Criterion used by [`grid_search`] when none is given.
pub fn default_accept(m: &Metrics) -> bool {
    m.jaccard >= 0.4 && m.max_eta_error <= 0.3 && m.background_impurity <= 0.1
}

/// Tries `factors` on both weights, nearest to the starting pair first.
///
/// Returns the first pair whose solve converged and is accepted by
/// `accept`. When there is none, converged solves are preferred, then the
/// best score.
pub fn grid_search<F: Fn(&Metrics) -> bool>(
    s: &Scenario,
    p: &Prepared,
    start: Weights,
    accept: F,
) -> Result<(Weights, Inversion)> {
    let mut pairs: Vec<(f64, f64)> =
        SEARCH_FACTORS.iter().flat_map(|&a| SEARCH_FACTORS.iter().map(move |&b| (a, b))).collect();
    let dist = |(a, b): (f64, f64)| a.log10().abs() + b.log10().abs();
    pairs.sort_by(|x, y| dist(*x).total_cmp(&dist(*y)));
    let mut best: Option<(Weights, Inversion)> = None;
    for (fa, fb) in pairs {
        let w = Weights { alpha: start.alpha * fa, beta: start.beta * fb };
        let inv = invert(s, p, w)?;
        if inv.result.diagnostics.converged && accept(&inv.metrics) {
            return Ok((w, inv));
        }
        let key = |i: &Inversion| (i.result.diagnostics.converged, i.metrics.score());
        if best.as_ref().is_none_or(|(_, b)| key(&inv) > key(b)) {
            best = Some((w, inv));
        }
    }
    Ok(best.expect("search grid is not empty"))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Overrides of the scenario weights.
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    /// Search around the starting weights when the default criterion fails.
    pub search: bool,
}

/// Everything produced by one end-to-end run.
pub struct PipelineOutput {
    pub forward: Option<ForwardOutput>,
    pub sampling: SamplingOutput,
    pub inversion: Inversion,
    pub report: ReconReport,
    pub timings: Vec<(&'static str, Duration)>,
}

/// Inversion from a measurement set and a sampling result.
pub fn run_inversion(
    s: &Scenario,
    data: &MeasurementSet,
    sampling: SamplingOutput,
    opts: &RunOptions,
    timings: &mut Vec<(&'static str, Duration)>,
) -> Result<(SamplingOutput, Inversion, ReconReport)> {
    let t = Instant::now();
    let p = prepare(s, data, &sampling.support, &sampling.initial)?;
    timings.push(("linearization", t.elapsed()));
    let t = Instant::now();
    let table = s.weights();
    let start = Weights { alpha: opts.alpha.unwrap_or(table.alpha), beta: opts.beta.unwrap_or(table.beta) };
    let mut chosen = start;
    let mut inv = invert(s, &p, start)?;
    if opts.search && !(inv.result.diagnostics.converged && default_accept(&inv.metrics)) {
        (chosen, inv) = grid_search(s, &p, start, default_accept)?;
    }
    timings.push(("inversion", t.elapsed()));
    let report = ReconReport::new(s, start, chosen, &sampling, &inv);
    Ok((sampling, inv, report))
}

pub fn run_pipeline(s: &Scenario, opts: &RunOptions) -> Result<PipelineOutput> {
    s.validate()?;
    let mut timings = Vec::new();
    let t = Instant::now();
    let forward = run_forward(s)?;
    timings.push(("forward", t.elapsed()));
    let t = Instant::now();
    let sampling = run_sampling(s, &forward.data)?;
    timings.push(("sampling", t.elapsed()));
    let (sampling, inversion, report) = run_inversion(s, &forward.data, sampling, opts, &mut timings)?;
    Ok(PipelineOutput { forward: Some(forward), sampling, inversion, report, timings })
}
