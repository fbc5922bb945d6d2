//! Uniform meshes, fields on them, scatterer rasterization and receiver layouts.
//!
//! Cells are stored in row-major order over the multi-index `(i, j[, k])`,
//! i.e. the last axis varies fastest. Two-dimensional grids carry a unit
//! third axis and points with a zero third coordinate.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special::Dim;

/// A point in space; the third coordinate is zero for planar problems.
pub type Point = [f64; 3];

#[inline]
pub fn distance(a: &Point, b: &Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

#[inline]
pub fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Axis-aligned mesh of cubic cells of width `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    dim: Dim,
    origin: Point,
    h: f64,
    counts: [usize; 3],
}

impl UniformGrid {
    /// Grid with lower corner `origin` and `counts[a]` cells along axis `a`.
    ///
    /// For two-dimensional grids only the first two entries of `origin` and
    /// `counts` are used.
    pub fn new(dim: Dim, origin: Point, h: f64, counts: [usize; 3]) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidArgument(format!("cell width must be positive, got {h}")));
        }
        let mut counts = counts;
        let mut origin = origin;
        if dim == Dim::Two {
            counts[2] = 1;
            origin[2] = 0.0;
        }
        if counts.contains(&0) {
            return Err(Error::InvalidArgument("grid counts must be at least 1".into()));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidArgument("grid origin must be finite".into()));
        }
        Ok(Self { dim, origin, h, counts })
    }

    /// Grid covering the box `[lo, hi]` with cells of width `h`.
    ///
    /// The per-axis count is `round((hi - lo) / h)`; the box must be an
    /// integer number of cells wide up to rounding.
    pub fn covering(dim: Dim, lo: Point, hi: Point, h: f64) -> Result<Self> {
        let mut counts = [1usize; 3];
        for a in 0..dim.as_usize() {
            let n = (hi[a] - lo[a]) / h;
            if !(n > 0.0) || (n - n.round()).abs() > 1e-6 {
                return Err(Error::InvalidArgument(format!(
                    "extent {} along axis {a} is not a multiple of h = {h}",
                    hi[a] - lo[a]
                )));
            }
            counts[a] = n.round() as usize;
        }
        Self::new(dim, lo, h, counts)
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn counts(&self) -> [usize; 3] {
        self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `h^dim`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim.as_usize() as i32)
    }

    /// Upper corner of the grid.
    pub fn upper(&self) -> Point {
        let mut p = self.origin;
        for (a, c) in p.iter_mut().enumerate().take(self.dim.as_usize()) {
            *c += self.counts[a] as f64 * self.h;
        }
        p
    }

    #[inline]
    pub fn multi_index(&self, idx: usize) -> [usize; 3] {
        let k = idx % self.counts[2];
        let rest = idx / self.counts[2];
        [rest / self.counts[1], rest % self.counts[1], k]
    }

    #[inline]
    pub fn linear_index(&self, mi: [usize; 3]) -> usize {
        (mi[0] * self.counts[1] + mi[1]) * self.counts[2] + mi[2]
    }

    /// Center of the cell with multi-index `mi`: `origin + (mi + 1/2) h`.
    #[inline]
    pub fn center_of(&self, mi: [usize; 3]) -> Point {
        let mut p = [0.0; 3];
        for a in 0..self.dim.as_usize() {
            p[a] = self.origin[a] + (mi[a] as f64 + 0.5) * self.h;
        }
        p
    }

    #[inline]
    pub fn center(&self, idx: usize) -> Point {
        self.center_of(self.multi_index(idx))
    }

    /// Multi-index of the cell containing `p`, if any.
    pub fn locate(&self, p: &Point) -> Option<[usize; 3]> {
        let mut mi = [0usize; 3];
        for a in 0..self.dim.as_usize() {
            let t = ((p[a] - self.origin[a]) / self.h).floor();
            if t < 0.0 || t >= self.counts[a] as f64 {
                return None;
            }
            mi[a] = t as usize;
        }
        Some(mi)
    }

    /// Linear indices of the face neighbours of cell `idx`.
    pub fn face_neighbors(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let mi = self.multi_index(idx);
        let d = self.dim.as_usize();
        (0..d).flat_map(move |a| {
            let lower = (mi[a] > 0).then(|| {
                let mut m = mi;
                m[a] -= 1;
                self.linear_index(m)
            });
            let upper = (mi[a] + 1 < self.counts[a]).then(|| {
                let mut m = mi;
                m[a] += 1;
                self.linear_index(m)
            });
            lower.into_iter().chain(upper)
        })
    }

    /// Whether the closed box `[lo, hi]` lies inside the grid's extent.
    pub fn contains_box(&self, lo: &Point, hi: &Point) -> bool {
        let up = self.upper();
        let tol = 1e-9 * self.h;
        (0..self.dim.as_usize())
            .all(|a| lo[a] >= self.origin[a] - tol && hi[a] <= up[a] + tol)
    }
}

/// One real value per grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    pub grid: UniformGrid,
    pub values: Vec<f64>,
}

impl RealField {
    pub fn zeros(grid: UniformGrid) -> Self {
        Self { values: vec![0.0; grid.len()], grid }
    }

    pub fn from_values(grid: UniformGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} cells",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("field values must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    /// Indices of cells with a nonzero value.
    pub fn support(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| (*v != 0.0).then_some(i))
            .collect()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// One complex value per grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub grid: UniformGrid,
    pub values: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: UniformGrid) -> Self {
        Self { values: vec![Complex64::new(0.0, 0.0); grid.len()], grid }
    }
}

/// Subset of grid cells.
#[derive(Debug, Clone, PartialEq)]
pub struct SubdomainMask {
    pub grid: UniformGrid,
    mask: Vec<bool>,
    cells: Vec<usize>,
}

impl SubdomainMask {
    pub fn from_mask(grid: UniformGrid, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "mask of {} cells for a grid of {} cells",
                mask.len(),
                grid.len()
            )));
        }
        let cells = mask
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect();
        Ok(Self { grid, mask, cells })
    }

    pub fn from_cells(grid: UniformGrid, cells: &[usize]) -> Result<Self> {
        let mut mask = vec![false; grid.len()];
        for &c in cells {
            *mask.get_mut(c).ok_or_else(|| {
                Error::InvalidArgument(format!("cell {c} outside grid of {} cells", grid.len()))
            })? = true;
        }
        Self::from_mask(grid, mask)
    }

    pub fn full(grid: UniformGrid) -> Self {
        Self::from_mask(grid, vec![true; grid.len()]).expect("sizes match")
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Included cell indices in increasing order.
    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.mask[idx]
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Position of each grid cell within `cells()`, if included.
    pub fn local_index(&self) -> Vec<Option<usize>> {
        let mut local = vec![None; self.grid.len()];
        for (l, &c) in self.cells.iter().enumerate() {
            local[c] = Some(l);
        }
        local
    }

    /// Transfers the mask to `target` by nearest-cell lookup of each target center.
    pub fn resample(&self, target: &UniformGrid) -> Result<Self> {
        check_same_dim(&self.grid, target)?;
        let mask = (0..target.len())
            .map(|i| {
                self.grid
                    .locate(&target.center(i))
                    .is_some_and(|mi| self.mask[self.grid.linear_index(mi)])
            })
            .collect();
        Self::from_mask(*target, mask)
    }

    /// Face-connected components, each as a sorted list of cell indices.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut label = vec![usize::MAX; self.grid.len()];
        let mut out = Vec::new();
        for &start in &self.cells {
            if label[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut comp = vec![start];
            label[start] = id;
            let mut stack = vec![start];
            while let Some(c) = stack.pop() {
                for n in self.grid.face_neighbors(c) {
                    if self.mask[n] && label[n] == usize::MAX {
                        label[n] = id;
                        comp.push(n);
                        stack.push(n);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

pub(crate) fn check_same_dim(a: &UniformGrid, b: &UniformGrid) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::GridMismatch(format!(
            "dimension {} vs {}",
            a.dim().as_usize(),
            b.dim().as_usize()
        )));
    }
    Ok(())
}

/// Closed axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub lo: Point,
    pub hi: Point,
}

impl Aabb {
    /// Strict interior test on the first `dim` axes.
    pub fn contains(&self, p: &Point, dim: Dim) -> bool {
        (0..dim.as_usize()).all(|a| p[a] > self.lo[a] && p[a] < self.hi[a])
    }

    pub fn center(&self) -> Point {
        [
            0.5 * (self.lo[0] + self.hi[0]),
            0.5 * (self.lo[1] + self.hi[1]),
            0.5 * (self.lo[2] + self.hi[2]),
        ]
    }

    /// Mask of the cells of `grid` whose centers lie inside any of `boxes`.
    pub fn rasterize_union(boxes: &[Aabb], grid: &UniformGrid) -> SubdomainMask {
        let mask = (0..grid.len())
            .map(|i| {
                let c = grid.center(i);
                boxes.iter().any(|b| b.contains(&c, grid.dim()))
            })
            .collect();
        SubdomainMask::from_mask(*grid, mask).expect("sizes match")
    }
}

/// A piecewise-constant scatterer primitive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Primitive {
    /// Axis-aligned box with the given per-axis widths.
    Box { center: Point, widths: Point, value: f64 },
    /// Square (or cubic) shell: the outer box minus the concentric inner box.
    RingBox { center: Point, outer: f64, inner: f64, value: f64 },
}

impl Primitive {
    fn validate(&self, dim: Dim) -> Result<()> {
        match *self {
            Primitive::Box { widths, value, .. } => {
                if widths.iter().take(dim.as_usize()).any(|w| !(*w > 0.0)) {
                    return Err(Error::InvalidArgument("box widths must be positive".into()));
                }
                if !value.is_finite() {
                    return Err(Error::InvalidArgument("primitive value must be finite".into()));
                }
            }
            Primitive::RingBox { outer, inner, value, .. } => {
                if !(inner > 0.0 && inner < outer) {
                    return Err(Error::InvalidArgument(format!(
                        "ring needs 0 < inner < outer, got inner {inner}, outer {outer}"
                    )));
                }
                if !value.is_finite() {
                    return Err(Error::InvalidArgument("primitive value must be finite".into()));
                }
            }
        }
        Ok(())
    }

    pub fn bounds(&self) -> Aabb {
        let (center, half) = match *self {
            Primitive::Box { center, widths, .. } => {
                (center, [0.5 * widths[0], 0.5 * widths[1], 0.5 * widths[2]])
            }
            Primitive::RingBox { center, outer, .. } => (center, [0.5 * outer; 3]),
        };
        Aabb {
            lo: [center[0] - half[0], center[1] - half[1], center[2] - half[2]],
            hi: [center[0] + half[0], center[1] + half[1], center[2] + half[2]],
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Primitive::Box { value, .. } | Primitive::RingBox { value, .. } => value,
        }
    }

    /// Whether `p` lies inside the primitive (cell-center membership).
    pub fn contains(&self, p: &Point, dim: Dim) -> bool {
        let d = dim.as_usize();
        match *self {
            Primitive::Box { center, widths, .. } => {
                (0..d).all(|a| (p[a] - center[a]).abs() < 0.5 * widths[a])
            }
            Primitive::RingBox { center, outer, inner, .. } => {
                let inf = (0..d).map(|a| (p[a] - center[a]).abs()).fold(0.0, f64::max);
                inf < 0.5 * outer && inf >= 0.5 * inner
            }
        }
    }

    /// Exact measure of the primitive.
    pub fn volume(&self, dim: Dim) -> f64 {
        let d = dim.as_usize() as i32;
        match *self {
            Primitive::Box { widths, .. } => widths.iter().take(d as usize).product(),
            Primitive::RingBox { outer, inner, .. } => outer.powi(d) - inner.powi(d),
        }
    }
}

/// Scatterer built from primitives; later primitives overwrite earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScattererSpec {
    pub primitives: Vec<Primitive>,
}

/// Samples the scatterer at every cell center of `grid`.
pub fn rasterize(spec: &ScattererSpec, grid: &UniformGrid) -> Result<RealField> {
    for p in &spec.primitives {
        p.validate(grid.dim())?;
        let b = p.bounds();
        if !grid.contains_box(&b.lo, &b.hi) {
            return Err(Error::Geometry(format!("primitive {p:?} extends outside the grid")));
        }
    }
    let mut field = RealField::zeros(*grid);
    for p in &spec.primitives {
        let b = p.bounds();
        let lo = grid.locate(&clamp_into(grid, &b.lo)).expect("clamped point lies in grid");
        let hi = grid.locate(&clamp_into(grid, &b.hi)).expect("clamped point lies in grid");
        for i in lo[0]..=hi[0] {
            for j in lo[1]..=hi[1] {
                for k in lo[2]..=hi[2] {
                    let mi = [i, j, k];
                    if p.contains(&grid.center_of(mi), grid.dim()) {
                        field.values[grid.linear_index(mi)] = p.value();
                    }
                }
            }
        }
    }
    Ok(field)
}

fn clamp_into(grid: &UniformGrid, p: &Point) -> Point {
    let up = grid.upper();
    let o = grid.origin();
    let mut q = *p;
    for a in 0..grid.dim().as_usize() {
        let eps = 1e-9 * grid.h();
        q[a] = q[a].clamp(o[a] + eps, up[a] - eps);
    }
    q
}

/// How a receiver set was laid out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReceiverGeometry {
    Circle { center: Point, radius: f64, count: usize },
    CubeSurface { center: Point, width: f64, per_axis: usize },
    /// Receivers read from a file without a generating description.
    Explicit,
}

/// Measurement points on the closed curve or surface enclosing the scatterers.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverSet {
    pub points: Vec<Point>,
    pub geometry: ReceiverGeometry,
}

impl ReceiverSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `count` equiangular points on a circle, starting at angle zero.
pub fn make_receivers_circle(center: Point, radius: f64, count: usize) -> ReceiverSet {
    let points = (0..count)
        .map(|m| {
            let t = 2.0 * PI * m as f64 / count as f64;
            [center[0] + radius * t.cos(), center[1] + radius * t.sin(), 0.0]
        })
        .collect();
    ReceiverSet { points, geometry: ReceiverGeometry::Circle { center, radius, count } }
}

/// `per_axis x per_axis` face-interior lattice on each of the six faces of a cube.
///
/// Lattice points sit half a lattice step away from the face edges, so the
/// faces share no points and the set has exactly `6 per_axis^2` members.
pub fn make_receivers_cube(center: Point, width: f64, per_axis: usize) -> ReceiverSet {
    let half = 0.5 * width;
    let step = width / per_axis as f64;
    let offs: Vec<f64> = (0..per_axis).map(|i| -half + (i as f64 + 0.5) * step).collect();
    let mut points = Vec::with_capacity(6 * per_axis * per_axis);
    for axis in 0..3 {
        for side in [-half, half] {
            let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
            for &a in &offs {
                for &b in &offs {
                    let mut p = center;
                    p[axis] += side;
                    p[u] += a;
                    p[v] += b;
                    points.push(p);
                }
            }
        }
    }
    ReceiverSet { points, geometry: ReceiverGeometry::CubeSurface { center, width, per_axis } }
}

/// Plane wave `exp(i k x . d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidentWave {
    k: f64,
    direction: Point,
}

impl IncidentWave {
    pub fn new(k: f64, direction: Point) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::Domain { what: "wavenumber", value: k });
        }
        let norm = dot(&direction, &direction).sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "incident direction must be a unit vector, |d| = {norm}"
            )));
        }
        Ok(Self { k, direction })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn direction(&self) -> Point {
        self.direction
    }

    #[inline]
    pub fn at(&self, x: &Point) -> Complex64 {
        let (s, c) = (self.k * dot(x, &self.direction)).sin_cos();
        Complex64::new(c, s)
    }
}

/// Incident field at each of `points`.
pub fn incident_field(wave: &IncidentWave, points: &[Point]) -> Vec<Complex64> {
    points.iter().map(|p| wave.at(p)).collect()
}

/// Normalizes `v` to unit length.
pub fn unit(v: Point) -> Point {
    let n = dot(&v, &v).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid2(h: f64) -> UniformGrid {
        UniformGrid::covering(Dim::Two, [-2.0, -2.0, 0.0], [2.0, 2.0, 0.0], h).unwrap()
    }

    #[test]
    fn index_round_trip_and_centers() {
        let g = UniformGrid::new(Dim::Three, [-1.0, 0.0, 2.0], 0.5, [3, 4, 5]).unwrap();
        assert_eq!(g.len(), 60);
        for i in 0..g.len() {
            assert_eq!(g.linear_index(g.multi_index(i)), i);
        }
        assert_eq!(g.multi_index(1), [0, 0, 1]);
        assert_eq!(g.center_of([1, 2, 3]), [-0.25, 1.25, 3.75]);
        assert_eq!(g.locate(&[-0.3, 1.2, 3.9]), Some([1, 2, 3]));
        assert_eq!(g.locate(&[-1.1, 1.2, 3.9]), None);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(UniformGrid::new(Dim::Two, [0.0; 3], 0.0, [1, 1, 1]).is_err());
        assert!(UniformGrid::new(Dim::Two, [0.0; 3], 0.1, [0, 1, 1]).is_err());
        assert!(UniformGrid::covering(Dim::Two, [0.0; 3], [1.0, 1.05, 0.0], 0.1).is_err());
    }

    #[test]
    fn empty_spec_rasterizes_to_zero() {
        let f = rasterize(&ScattererSpec::default(), &grid2(0.1)).unwrap();
        assert!(f.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn aligned_box_cell_count() {
        let spec = ScattererSpec {
            primitives: vec![Primitive::Box {
                center: [-0.8, -0.7, 0.0],
                widths: [0.2, 0.2, 0.0],
                value: 1.0,
            }],
        };
        let f = rasterize(&spec, &grid2(0.01)).unwrap();
        assert_eq!(f.values.iter().filter(|&&v| v == 1.0).count(), 400);
    }

    #[test]
    fn ring_cell_count() {
        let spec = ScattererSpec {
            primitives: vec![Primitive::RingBox {
                center: [0.0; 3],
                outer: 0.6,
                inner: 0.4,
                value: 1.0,
            }],
        };
        let f = rasterize(&spec, &grid2(0.01)).unwrap();
        assert_eq!(f.support().len(), 60 * 60 - 40 * 40);
        let center = f.grid.locate(&[0.001, 0.001, 0.0]).unwrap();
        assert_eq!(f.values[f.grid.linear_index(center)], 0.0);
    }

    #[test]
    fn last_primitive_wins() {
        let spec = ScattererSpec {
            primitives: vec![
                Primitive::Box { center: [0.0; 3], widths: [0.4, 0.4, 0.0], value: 1.0 },
                Primitive::Box { center: [0.0; 3], widths: [0.2, 0.2, 0.0], value: 2.0 },
            ],
        };
        let f = rasterize(&spec, &grid2(0.02)).unwrap();
        assert_eq!(f.values.iter().filter(|&&v| v == 2.0).count(), 100);
        assert_eq!(f.values.iter().filter(|&&v| v == 1.0).count(), 300);
    }

    #[test]
    fn primitive_outside_grid_is_rejected() {
        let spec = ScattererSpec {
            primitives: vec![Primitive::Box {
                center: [1.95, 0.0, 0.0],
                widths: [0.2, 0.2, 0.0],
                value: 1.0,
            }],
        };
        assert!(matches!(rasterize(&spec, &grid2(0.1)), Err(Error::Geometry(_))));
        let ring = ScattererSpec {
            primitives: vec![Primitive::RingBox {
                center: [0.0; 3],
                outer: 0.4,
                inner: 0.4,
                value: 1.0,
            }],
        };
        assert!(rasterize(&ring, &grid2(0.1)).is_err());
    }

    #[test]
    fn circle_receivers() {
        let r = make_receivers_circle([0.0; 3], 5.0, 4);
        let expect = [[5.0, 0.0], [0.0, 5.0], [-5.0, 0.0], [0.0, -5.0]];
        for (p, e) in r.points.iter().zip(expect) {
            assert!((p[0] - e[0]).abs() < 1e-14 && (p[1] - e[1]).abs() < 1e-14);
        }
        let r = make_receivers_circle([0.0; 3], 5.0, 30);
        let mut min = f64::INFINITY;
        for i in 0..30 {
            for j in 0..i {
                min = min.min(distance(&r.points[i], &r.points[j]));
            }
        }
        assert!((min - 10.0 * (PI / 30.0).sin()).abs() < 1e-12);
    }

    #[test]
    fn cube_receivers_are_distinct() {
        let r = make_receivers_cube([0.0; 3], 5.0, 10);
        assert_eq!(r.len(), 600);
        for i in 0..r.len() {
            for j in 0..i {
                assert!(distance(&r.points[i], &r.points[j]) > 0.1);
            }
            let inf = r.points[i].iter().map(|c| c.abs()).fold(0.0, f64::max);
            assert!((inf - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn incident_field_values() {
        let w = IncidentWave::new(2.0 * PI, [1.0, 0.0, 0.0]).unwrap();
        let v = incident_field(&w, &[[0.0, 3.0, 0.0], [0.25, 0.0, 0.0]]);
        assert_eq!(v[0], Complex64::new(1.0, 0.0));
        assert!((v[1] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(IncidentWave::new(1.0, [1.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn components_face_connectivity() {
        let g = UniformGrid::new(Dim::Two, [0.0; 3], 1.0, [4, 4, 1]).unwrap();
        // diagonal neighbours are separate components
        let m = SubdomainMask::from_cells(g, &[0, 5, 6, 15]).unwrap();
        let comps = m.components();
        assert_eq!(comps.len(), 3);
        assert!(comps.contains(&vec![5, 6]));
    }

    proptest! {
        #[test]
        fn rasterized_area_within_one_cell_layer(
            cx in -1.0f64..1.0, cy in -1.0f64..1.0,
            wx in 0.05f64..0.8, wy in 0.05f64..0.8,
        ) {
            let g = grid2(0.01);
            let spec = ScattererSpec { primitives: vec![Primitive::Box {
                center: [cx, cy, 0.0], widths: [wx, wy, 0.0], value: 1.0 }] };
            let f = rasterize(&spec, &g).unwrap();
            let area = f.support().len() as f64 * g.cell_volume();
            let perimeter = 2.0 * (wx + wy);
            prop_assert!((area - wx * wy).abs() <= perimeter * g.h() * 1.01);
        }

        #[test]
        fn incident_field_has_unit_modulus(x in -10.0f64..10.0, y in -10.0f64..10.0, t in 0.0f64..6.3) {
            let w = IncidentWave::new(2.0 * PI, unit([t.cos(), t.sin(), 0.0])).unwrap();
            prop_assert!((w.at(&[x, y, 0.0]).norm() - 1.0).abs() < 1e-14);
        }
    }
}
