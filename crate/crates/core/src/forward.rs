//! Forward scattering: the induced-current integral equation on the scatterer
//! support, scattered and total fields, and measurement noise.
//!
//! The integral equation `I = eta u_inc + eta * int G I` is discretized with
//! the mid-point rule on the cells of a uniform grid, giving
//!
//! ```text
//! I_p - eta_p sum_q G_pq I_q h^dim = eta_p u_inc(x_p)
//! ```
//!
//! where the diagonal `G_pp` is the cell average of the kernel from
//! [`green_diag`]. Only cells with nonzero `eta` enter the system.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{
    distance, ComplexField, IncidentWave, Point, RealField, ReceiverSet, SubdomainMask, UniformGrid,
};
use crate::linalg::{gmres, ComplexLu, GmresOptions};
use crate::special::{green_diag, green_radial, Dim};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Kernel values `G(x_p, x_q)` between cells of one grid, tabulated by the
/// absolute index offset. The zero offset holds the self-cell average.
#[derive(Debug, Clone)]
pub struct KernelTable {
    span: [usize; 3],
    values: Vec<Complex64>,
}

impl KernelTable {
    /// Table for all offsets up to `span[a]` cells along axis `a`.
    pub fn new(grid: &UniformGrid, k: f64, span: [usize; 3]) -> Result<Self> {
        let dim = grid.dim();
        let h = grid.h();
        let n = (span[0] + 1) * (span[1] + 1) * (span[2] + 1);
        let mut values: Vec<Complex64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let c = i % (span[2] + 1);
                let rest = i / (span[2] + 1);
                let (a, b) = (rest / (span[1] + 1), rest % (span[1] + 1));
                let r = h * ((a * a + b * b + c * c) as f64).sqrt();
                if r == 0.0 {
                    ZERO
                } else {
                    green_radial(k, r, dim)
                }
            })
            .collect();
        values[0] = green_diag(k, h, dim)?;
        Ok(Self { span, values })
    }

    /// Table large enough for any pair of cells in `cells`.
    pub fn for_cells(grid: &UniformGrid, k: f64, cells: &[usize]) -> Result<Self> {
        let mut lo = [usize::MAX; 3];
        let mut hi = [0usize; 3];
        for &c in cells {
            let mi = grid.multi_index(c);
            for a in 0..3 {
                lo[a] = lo[a].min(mi[a]);
                hi[a] = hi[a].max(mi[a]);
            }
        }
        let span = if cells.is_empty() {
            [0; 3]
        } else {
            [hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]]
        };
        Self::new(grid, k, span)
    }

    #[inline]
    pub fn get(&self, p: [usize; 3], q: [usize; 3]) -> Complex64 {
        let a = p[0].abs_diff(q[0]);
        let b = p[1].abs_diff(q[1]);
        let c = p[2].abs_diff(q[2]);
        debug_assert!(a <= self.span[0] && b <= self.span[1] && c <= self.span[2]);
        self.values[(a * (self.span[1] + 1) + b) * (self.span[2] + 1) + c]
    }

    pub fn self_term(&self) -> Complex64 {
        self.values[0]
    }
}

/// Choice of linear solver for the discretized integral equation.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Largest support solved by dense LU; larger systems use GMRES.
    pub direct_max: usize,
    pub gmres: GmresOptions,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { direct_max: 1500, gmres: GmresOptions::default() }
    }
}

/// Relative sup-norm residual required of every forward solve.
pub const FORWARD_RESIDUAL_TOL: f64 = 1e-10;

enum Factor {
    Direct(ComplexLu),
    Iterative,
}

/// The discretized integral equation restricted to the support of `eta`.
pub struct ForwardSystem {
    grid: UniformGrid,
    k: f64,
    support: Vec<usize>,
    eta: Vec<f64>,
    /// `M = I - diag(eta) G h^dim` on the support.
    matrix: DMatrix<Complex64>,
    factor: Factor,
    opts: SolverOptions,
}

impl ForwardSystem {
    pub fn new(eta: &RealField, k: f64) -> Result<Self> {
        Self::with_options(eta, k, SolverOptions::default())
    }

    pub fn with_options(eta: &RealField, k: f64, opts: SolverOptions) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::Domain { what: "wavenumber", value: k });
        }
        if eta.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("contrast must be finite".into()));
        }
        let grid = eta.grid;
        let support = eta.support();
        let n = support.len();
        let vol = grid.cell_volume();
        let table = KernelTable::for_cells(&grid, k, &support)?;
        let idx: Vec<[usize; 3]> = support.iter().map(|&c| grid.multi_index(c)).collect();
        let eta_s: Vec<f64> = support.iter().map(|&c| eta.values[c]).collect();
        let mut matrix = DMatrix::from_element(n, n, ZERO);
        // column-major storage: fill column by column
        matrix
            .as_mut_slice()
            .par_chunks_mut(n.max(1))
            .enumerate()
            .for_each(|(q, col)| {
                for (p, entry) in col.iter_mut().enumerate() {
                    let g = table.get(idx[p], idx[q]);
                    let delta = if p == q { 1.0 } else { 0.0 };
                    *entry = Complex64::new(delta, 0.0) - g * (eta_s[p] * vol);
                }
            });
        let factor = if n == 0 || n > opts.direct_max {
            Factor::Iterative
        } else {
            Factor::Direct(ComplexLu::new(matrix.clone())?)
        };
        Ok(Self { grid, k, support, eta: eta_s, matrix, factor, opts })
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Right-hand side `eta_p u_inc(x_p)` on the support.
    pub fn rhs(&self, wave: &IncidentWave) -> Vec<Complex64> {
        self.support
            .iter()
            .zip(&self.eta)
            .map(|(&c, &e)| wave.at(&self.grid.center(c)) * e)
            .collect()
    }

    fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        let n = self.support.len();
        out.iter_mut().for_each(|o| *o = ZERO);
        for (q, xq) in x.iter().enumerate() {
            let col = &self.matrix.as_slice()[q * n..(q + 1) * n];
            for (o, m) in out.iter_mut().zip(col) {
                *o += m * xq;
            }
        }
    }

    /// Solves for the current on the support, in support order.
    pub fn solve_support(&self, wave: &IncidentWave) -> Result<Vec<Complex64>> {
        if (wave.k() - self.k).abs() > 1e-12 * self.k {
            return Err(Error::InvalidArgument(format!(
                "wave number {} differs from the system's {}",
                wave.k(),
                self.k
            )));
        }
        let rhs = self.rhs(wave);
        let x = match &self.factor {
            Factor::Direct(lu) => lu.solve(&rhs)?,
            Factor::Iterative => gmres(|v, o| self.apply(v, o), &rhs, self.opts.gmres)?.0,
        };
        let mut r = vec![ZERO; x.len()];
        self.apply(&x, &mut r);
        let res = r.iter().zip(&rhs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let scale = rhs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if res > FORWARD_RESIDUAL_TOL * scale {
            return Err(Error::SolveTolerance { residual: res / scale });
        }
        Ok(x)
    }

    /// Solves for the induced current on the whole grid; zero off the support.
    pub fn solve(&self, wave: &IncidentWave) -> Result<ComplexField> {
        let x = self.solve_support(wave)?;
        let mut field = ComplexField::zeros(self.grid);
        for (&c, v) in self.support.iter().zip(x) {
            field.values[c] = v;
        }
        Ok(field)
    }
}

/// Induced current for one incident wave.
pub fn solve_induced_current(eta: &RealField, wave: &IncidentWave) -> Result<ComplexField> {
    ForwardSystem::new(eta, wave.k())?.solve(wave)
}

/// Scattered field `sum_j G(x_m, y_j) I_j h^dim` at each receiver.
pub fn scattered_field(current: &ComplexField, receivers: &ReceiverSet, k: f64) -> Result<Vec<Complex64>> {
    let grid = current.grid;
    let h = grid.h();
    let vol = grid.cell_volume();
    let sources: Vec<(Point, Complex64)> = current
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != ZERO)
        .map(|(i, v)| (grid.center(i), *v * vol))
        .collect();
    for (m, x) in receivers.points.iter().enumerate() {
        if let Some((y, _)) = sources.iter().find(|(y, _)| distance(x, y) <= h * (1.0 + 1e-9)) {
            return Err(Error::Geometry(format!(
                "receiver {m} at {x:?} lies within one cell of the source cell at {y:?}"
            )));
        }
    }
    Ok(receivers
        .points
        .par_iter()
        .map(|x| {
            sources
                .iter()
                .map(|(y, w)| green_radial(k, distance(x, y), grid.dim()) * w)
                .sum()
        })
        .collect())
}

/// Total field `u_inc + int G I` at the cells of `subdomain`.
///
/// When an evaluation point coincides with a source cell the self-cell
/// average of the kernel is used. The result lives on the subdomain's grid
/// and is zero outside the subdomain.
pub fn total_field_on(
    subdomain: &SubdomainMask,
    current: &ComplexField,
    wave: &IncidentWave,
) -> Result<ComplexField> {
    let k = wave.k();
    let src_grid = current.grid;
    let dst_grid = subdomain.grid;
    if src_grid.dim() != dst_grid.dim() {
        return Err(Error::GridMismatch("current and subdomain dimensions differ".into()));
    }
    let dim = src_grid.dim();
    let vol = src_grid.cell_volume();
    let src: Vec<usize> = current
        .values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| (*v != ZERO).then_some(i))
        .collect();
    let same_grid = src_grid == dst_grid;
    let values: Vec<Complex64> = if same_grid {
        let mut all: Vec<usize> = src.clone();
        all.extend_from_slice(subdomain.cells());
        let table = KernelTable::for_cells(&src_grid, k, &all)?;
        let src_idx: Vec<([usize; 3], Complex64)> = src
            .iter()
            .map(|&c| (src_grid.multi_index(c), current.values[c] * vol))
            .collect();
        subdomain
            .cells()
            .par_iter()
            .map(|&p| {
                let mp = dst_grid.multi_index(p);
                let scattered: Complex64 = src_idx.iter().map(|(mq, w)| table.get(mp, *mq) * w).sum();
                wave.at(&dst_grid.center(p)) + scattered
            })
            .collect()
    } else {
        let diag = green_diag(k, src_grid.h(), dim)?;
        let coincide = 1e-9 * src_grid.h();
        let src_pts: Vec<(Point, Complex64)> =
            src.iter().map(|&c| (src_grid.center(c), current.values[c] * vol)).collect();
        subdomain
            .cells()
            .par_iter()
            .map(|&p| {
                let x = dst_grid.center(p);
                let scattered: Complex64 = src_pts
                    .iter()
                    .map(|(y, w)| {
                        let r = distance(&x, y);
                        let g = if r < coincide { diag } else { green_radial(k, r, dim) };
                        g * w
                    })
                    .sum();
                wave.at(&x) + scattered
            })
            .collect()
    };
    let mut out = ComplexField::zeros(dst_grid);
    for (&c, v) in subdomain.cells().iter().zip(values) {
        out.values[c] = v;
    }
    Ok(out)
}

/// Scattered-field samples on the receivers, one vector per incident wave.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    pub dim: Dim,
    pub k: f64,
    pub directions: Vec<Point>,
    pub receivers: ReceiverSet,
    /// `data[wave][receiver]`.
    pub data: Vec<Vec<Complex64>>,
    /// Relative noise level already applied to `data`.
    pub noise: f64,
    /// Seed of the noise draw; `None` for exact data.
    pub seed: Option<u64>,
}

impl MeasurementSet {
    pub fn waves(&self) -> Result<Vec<IncidentWave>> {
        self.directions.iter().map(|d| IncidentWave::new(self.k, *d)).collect()
    }
}

/// Exact scattered data of `eta` for each wave.
pub fn simulate(eta: &RealField, waves: &[IncidentWave], receivers: &ReceiverSet) -> Result<MeasurementSet> {
    let k = waves
        .first()
        .ok_or_else(|| Error::InvalidArgument("at least one incident wave is required".into()))?
        .k();
    let system = ForwardSystem::new(eta, k)?;
    let mut data = Vec::with_capacity(waves.len());
    for w in waves {
        let current = system.solve(w)?;
        data.push(scattered_field(&current, receivers, k)?);
    }
    Ok(MeasurementSet {
        dim: eta.grid.dim(),
        k,
        directions: waves.iter().map(|w| w.direction()).collect(),
        receivers: receivers.clone(),
        data,
        noise: 0.0,
        seed: None,
    })
}

/// Adds `eps * zeta * max_m |u_s(x_m)|` to every sample.
///
/// `zeta` has independent standard normal real and imaginary parts drawn
/// from a ChaCha8 stream seeded with `seed`, in wave-major, then
/// receiver-major order, real part before imaginary part. The maximum is
/// taken per wave over the input data.
pub fn add_noise(data: &MeasurementSet, eps: f64, seed: u64) -> Result<MeasurementSet> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::Domain { what: "noise level", value: eps });
    }
    if eps == 0.0 {
        return Ok(data.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = data.clone();
    for wave in out.data.iter_mut() {
        let scale = eps * wave.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for v in wave.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *v += Complex64::new(re, im) * scale;
        }
    }
    out.noise = eps;
    out.seed = Some(seed);
    Ok(out)
}
