//! Core geometric types: ellipsoids, polytopes, quadratically constrained
//! sets, and Voronoi partitions, with exact desk-scale primitives.
//!
//! Conventions: an ellipsoid is `{x : ||Ax + b||^2 <= 1}` with `A`
//! symmetric positive definite; its volume metric is `1/det(A)` and its
//! radius is `volume^(1/K)`. A polytope is `{x : Sx <= t}`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use nalgebra::{DMatrix, DVector};

use crate::fp;
use crate::linalg;

/// Feasibility slack for vertex checks.
pub const FEAS_TOL: f64 = 1e-9;
/// Vertex dedup tolerance (infinity norm).
pub const DEDUP_TOL: f64 = 1e-8;
/// Hard cap on row-subset enumeration work.
const MAX_SUBSETS: u128 = 20_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum GeometryError {
    DimensionMismatch { expected: usize, got: usize },
    NotSymmetric,
    NotPositiveDefinite,
    Unbounded,
    Degenerate(String),
    SeedOutsideParent(usize),
    DuplicateSeeds(usize, usize),
    WitnessOutside,
    DeskScaleExceeded { subsets: u128 },
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            GeometryError::NotSymmetric => write!(f, "matrix is not symmetric"),
            GeometryError::NotPositiveDefinite => write!(f, "matrix is not positive definite"),
            GeometryError::Unbounded => write!(f, "polytope is unbounded"),
            GeometryError::Degenerate(s) => write!(f, "degenerate input: {s}"),
            GeometryError::SeedOutsideParent(i) => write!(f, "seed {i} lies outside the parent"),
            GeometryError::DuplicateSeeds(i, j) => write!(f, "seeds {i} and {j} coincide"),
            GeometryError::WitnessOutside => write!(f, "witness point violates the set"),
            GeometryError::DeskScaleExceeded { subsets } => {
                write!(f, "vertex enumeration needs {subsets} row subsets, over the desk-scale cap")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for GeometryError {}

/// Ellipsoid `{x : ||Ax + b||^2 <= 1}`, `A` symmetric positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    a: DMatrix<f64>,
    b: DVector<f64>,
}

impl Ellipsoid {
    /// Validates symmetry (1e-12 elementwise) and positive definiteness.
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self, GeometryError> {
        let k = a.nrows();
        if a.ncols() != k {
            return Err(GeometryError::DimensionMismatch { expected: k, got: a.ncols() });
        }
        if b.len() != k {
            return Err(GeometryError::DimensionMismatch { expected: k, got: b.len() });
        }
        for i in 0..k {
            for j in (i + 1)..k {
                if fp::abs(a[(i, j)] - a[(j, i)]) > 1e-12 {
                    return Err(GeometryError::NotSymmetric);
                }
            }
        }
        let mut a = a;
        linalg::symmetrize(&mut a);
        if !linalg::is_pd(&a) {
            return Err(GeometryError::NotPositiveDefinite);
        }
        Ok(Ellipsoid { a, b })
    }

    /// Ball of radius `r` around `center`.
    pub fn ball(center: &DVector<f64>, r: f64) -> Result<Self, GeometryError> {
        if !(r > 0.0) {
            return Err(GeometryError::NotPositiveDefinite);
        }
        let k = center.len();
        let a = DMatrix::identity(k, k) / r;
        let b = -&a * center;
        Ellipsoid::new(a, b)
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    /// Volume metric `1/det(A)` (proportionality constant dropped).
    pub fn volume(&self) -> f64 {
        let ld = linalg::logdet_pd(&self.a).expect("ellipsoid invariant: A is PD");
        fp::exp(-ld)
    }

    /// Dimension-normalized volume `volume^(1/K)`.
    pub fn radius(&self) -> f64 {
        fp::powf(self.volume(), 1.0 / self.dim() as f64)
    }

    pub fn center(&self) -> DVector<f64> {
        -linalg::inv_pd(&self.a).expect("ellipsoid invariant: A is PD") * &self.b
    }

    /// `||Ax + b||^2 <= 1 + tol`.
    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> Result<bool, GeometryError> {
        if x.len() != self.dim() {
            return Err(GeometryError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(self.gauge(x) <= 1.0 + tol)
    }

    /// `||Ax + b||^2` without the containment threshold.
    pub fn gauge(&self, x: &DVector<f64>) -> f64 {
        (&self.a * x + &self.b).norm_squared()
    }

    /// Image of a unit-sphere point: `A^{-1}(u - b)`; boundary for |u| = 1.
    pub fn point_from_unit(&self, u: &DVector<f64>) -> DVector<f64> {
        self.a.clone().cholesky().expect("ellipsoid invariant").solve(&(u - &self.b))
    }

    /// Same center, radius scaled by `factor` (shape matrix divided by it).
    pub fn scale_radius(&self, factor: f64) -> Result<Self, GeometryError> {
        if !(factor > 0.0) {
            return Err(GeometryError::NotPositiveDefinite);
        }
        let a = &self.a / factor;
        let b = &self.b / factor;
        Ellipsoid::new(a, b)
    }
}

/// Polytope `{x : Sx <= t}` with an optional cached vertex list.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    s: DMatrix<f64>,
    t: DVector<f64>,
    vertices: Option<Vec<DVector<f64>>>,
}

impl Polytope {
    pub fn new(s: DMatrix<f64>, t: DVector<f64>) -> Result<Self, GeometryError> {
        if s.nrows() != t.len() {
            return Err(GeometryError::DimensionMismatch { expected: s.nrows(), got: t.len() });
        }
        Ok(Polytope { s, t, vertices: None })
    }

    /// Axis-aligned box `lo <= x <= hi`.
    pub fn box_volume(lo: &DVector<f64>, hi: &DVector<f64>) -> Result<Self, GeometryError> {
        if lo.len() != hi.len() {
            return Err(GeometryError::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        let k = lo.len();
        let mut s = DMatrix::zeros(2 * k, k);
        let mut t = DVector::zeros(2 * k);
        for i in 0..k {
            s[(i, i)] = 1.0;
            t[i] = hi[i];
            s[(k + i, i)] = -1.0;
            t[k + i] = -lo[i];
        }
        Polytope::new(s, t)
    }

    pub fn dim(&self) -> usize {
        self.s.ncols()
    }

    pub fn rows(&self) -> usize {
        self.s.nrows()
    }

    pub fn s(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn t(&self) -> &DVector<f64> {
        &self.t
    }

    pub fn vertices(&self) -> Option<&[DVector<f64>]> {
        self.vertices.as_deref()
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> Result<bool, GeometryError> {
        if x.len() != self.dim() {
            return Err(GeometryError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        let r = &self.s * x - &self.t;
        Ok(r.iter().all(|&v| v <= tol))
    }

    /// Enumerate all vertices and cache them; validates boundedness and full
    /// dimensionality on the way.
    pub fn with_vertices(mut self) -> Result<Self, GeometryError> {
        let vs = enumerate_vertices(&self)?;
        self.vertices = Some(vs);
        Ok(self)
    }

    /// Arithmetic mean of the cached vertices: strictly interior for a
    /// bounded full-dimensional polytope.
    pub fn interior_point(&self) -> Option<DVector<f64>> {
        let vs = self.vertices.as_ref()?;
        let k = self.dim();
        let mut c = DVector::zeros(k);
        for v in vs {
            c += v;
        }
        Some(c / vs.len() as f64)
    }

    /// Append rows of `other` (same dimension).
    pub fn intersect(&self, other: &Polytope) -> Result<Polytope, GeometryError> {
        if other.dim() != self.dim() {
            return Err(GeometryError::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        let j = self.rows() + other.rows();
        let mut s = DMatrix::zeros(j, self.dim());
        let mut t = DVector::zeros(j);
        s.rows_mut(0, self.rows()).copy_from(&self.s);
        s.rows_mut(self.rows(), other.rows()).copy_from(&other.s);
        t.rows_mut(0, self.rows()).copy_from(&self.t);
        t.rows_mut(self.rows(), other.rows()).copy_from(&other.t);
        Polytope::new(s, t)
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut num: u128 = 1;
    for i in 0..k {
        num = num.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    num
}

/// All vertices of a bounded full-dimensional polytope, deduplicated within
/// 1e-8: brute force over K-row subsets with rank and feasibility filters.
pub fn enumerate_vertices(p: &Polytope) -> Result<Vec<DVector<f64>>, GeometryError> {
    let (j, k) = (p.rows(), p.dim());
    if k == 0 {
        return Err(GeometryError::Degenerate(String::from("zero-dimensional polytope")));
    }
    if j < k {
        return Err(GeometryError::Unbounded);
    }
    let work = binomial(j, k);
    if work > MAX_SUBSETS {
        return Err(GeometryError::DeskScaleExceeded { subsets: work });
    }
    assert_bounded(p)?;

    let mut verts: Vec<DVector<f64>> = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    let mut sub = DMatrix::<f64>::zeros(k, k);
    let mut rhs = DVector::<f64>::zeros(k);
    loop {
        for (r, &row) in idx.iter().enumerate() {
            for c in 0..k {
                sub[(r, c)] = p.s[(row, c)];
            }
            rhs[r] = p.t[row];
        }
        if let Some(lu) = solve_full_rank(&sub, &rhs) {
            let resid = &p.s * &lu - &p.t;
            if resid.iter().all(|&v| v <= FEAS_TOL) {
                let dup = verts.iter().any(|w| (w - &lu).amax() <= DEDUP_TOL);
                if !dup {
                    verts.push(lu);
                }
            }
        }
        if !next_combination(&mut idx, j) {
            break;
        }
    }

    if verts.len() < k + 1 || affine_rank(&verts) < k {
        return Err(GeometryError::Degenerate(format!(
            "found {} vertices with affine rank {} in dimension {}",
            verts.len(),
            affine_rank(&verts),
            k
        )));
    }
    // deterministic ordering
    verts.sort_by(|a, b| {
        for i in 0..k {
            match a[i].partial_cmp(&b[i]).unwrap() {
                core::cmp::Ordering::Equal => continue,
                o => return o,
            }
        }
        core::cmp::Ordering::Equal
    });
    Ok(verts)
}

/// Reject polytopes with a nontrivial recession direction. For every
/// coordinate the LP `max +-d_i` over the box-capped recession cone
/// `{d : Sd <= 0, -e <= d <= e}` is solved; a nonzero ray scaled onto the
/// box boundary puts some coordinate at 1, so a max of ~1 in any of the
/// 2K runs witnesses unboundedness.
fn assert_bounded(p: &Polytope) -> Result<(), GeometryError> {
    use crate::sdp::{self, AffineExpr, Settings};
    let k = p.dim();
    let j = p.rows();
    let mut settings = Settings::default();
    settings.mu_min = 1e-6;
    settings.max_newton = 300;
    for i in 0..k {
        for sign in [1.0, -1.0] {
            let mut lp = sdp::SdpProblem::new();
            let d = lp.vector_var("d", k);
            lp.add_cost(&lp.expr_vec(d, i).scaled(-sign));
            for row in 0..j {
                let mut e = AffineExpr::constant(0.0);
                for c in 0..k {
                    if p.s[(row, c)] != 0.0 {
                        e = e.plus(&lp.expr_vec(d, c).scaled(-p.s[(row, c)]));
                    }
                }
                lp.add_ineq(e);
            }
            for c in 0..k {
                lp.add_ineq(lp.expr_vec(d, c).scaled(1.0).add_const(1.0));
                lp.add_ineq(lp.expr_vec(d, c).scaled(-1.0).add_const(1.0));
            }
            let sol = sdp::solve(&lp, &settings, None)
                .map_err(|_| GeometryError::Degenerate(String::from("recession LP failed")))?;
            if -sol.objective > 0.5 {
                return Err(GeometryError::Unbounded);
            }
        }
    }
    Ok(())
}

fn solve_full_rank(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let lu = m.clone().full_piv_lu();
    let k = m.nrows();
    let u_min = (0..k).map(|i| fp::abs(lu.u()[(i, i)])).fold(f64::INFINITY, f64::min);
    let scale = m.amax().max(1.0);
    if u_min <= 1e-10 * scale {
        return None;
    }
    lu.solve(rhs)
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] != i + n - k {
            idx[i] += 1;
            for jj in (i + 1)..k {
                idx[jj] = idx[jj - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn affine_rank(verts: &[DVector<f64>]) -> usize {
    if verts.len() < 2 {
        return 0;
    }
    let k = verts[0].len();
    let mut diff = DMatrix::zeros(verts.len() - 1, k);
    for (i, v) in verts.iter().skip(1).enumerate() {
        for c in 0..k {
            diff[(i, c)] = v[c] - verts[0][c];
        }
    }
    linalg::pivoted_qr(&diff.transpose(), 1e-9).rank
}

/// Polytope intersected with ellipsoidal constraints
/// `{x : Sx <= t, ||Q_i x + q_i||^2 <= 1}`, with a stored witness point.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadSet {
    base: Polytope,
    quads: Vec<(DMatrix<f64>, DVector<f64>)>,
    witness: DVector<f64>,
}

impl QuadSet {
    pub fn new(
        base: Polytope,
        quads: Vec<(DMatrix<f64>, DVector<f64>)>,
        witness: DVector<f64>,
    ) -> Result<Self, GeometryError> {
        let k = base.dim();
        for (q, qv) in &quads {
            if q.ncols() != k || q.nrows() != k {
                return Err(GeometryError::DimensionMismatch { expected: k, got: q.ncols() });
            }
            if qv.len() != k {
                return Err(GeometryError::DimensionMismatch { expected: k, got: qv.len() });
            }
        }
        let qs = QuadSet { base, quads, witness };
        if !qs.contains(&qs.witness.clone(), FEAS_TOL)? {
            return Err(GeometryError::WitnessOutside);
        }
        Ok(qs)
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn base(&self) -> &Polytope {
        &self.base
    }

    pub fn quads(&self) -> &[(DMatrix<f64>, DVector<f64>)] {
        &self.quads
    }

    pub fn witness(&self) -> &DVector<f64> {
        &self.witness
    }

    /// Conjunction of all rows and quadratic constraints.
    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> Result<bool, GeometryError> {
        if !self.base.contains(x, tol)? {
            return Ok(false);
        }
        for (q, qv) in &self.quads {
            if (q * x + qv).norm_squared() > 1.0 + tol {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Voronoi cells of a parent polytope induced by constructor points.
#[derive(Debug, Clone)]
pub struct PartitionFamily {
    parent: Polytope,
    seeds: Vec<DVector<f64>>,
    cells: Vec<Polytope>,
}

impl PartitionFamily {
    pub fn parent(&self) -> &Polytope {
        &self.parent
    }

    pub fn seeds(&self) -> &[DVector<f64>] {
        &self.seeds
    }

    pub fn cells(&self) -> &[Polytope] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Partition `p` into Voronoi cells of `seeds`. Cell j keeps all parent rows
/// plus the bisector rows `2(xi_i - xi_j)^T x <= xi_i^T xi_i - xi_j^T xi_j`
/// for every other seed i; redundant rows are kept. Every cell is vertex
/// enumerated, so degenerate cells are rejected here.
pub fn voronoi_partition(
    p: &Polytope,
    seeds: &[DVector<f64>],
) -> Result<PartitionFamily, GeometryError> {
    let k = p.dim();
    for (i, s) in seeds.iter().enumerate() {
        if s.len() != k {
            return Err(GeometryError::DimensionMismatch { expected: k, got: s.len() });
        }
        if !p.contains(s, FEAS_TOL)? {
            return Err(GeometryError::SeedOutsideParent(i));
        }
    }
    for i in 0..seeds.len() {
        for j in (i + 1)..seeds.len() {
            if (&seeds[i] - &seeds[j]).norm() <= 1e-8 {
                return Err(GeometryError::DuplicateSeeds(i, j));
            }
        }
    }
    let nj = seeds.len();
    let mut cells = Vec::with_capacity(nj);
    for j in 0..nj {
        let extra = nj - 1;
        let mut s = DMatrix::zeros(p.rows() + extra, k);
        let mut t = DVector::zeros(p.rows() + extra);
        s.rows_mut(0, p.rows()).copy_from(p.s());
        t.rows_mut(0, p.rows()).copy_from(p.t());
        let mut r = p.rows();
        for i in 0..nj {
            if i == j {
                continue;
            }
            let d = &seeds[i] - &seeds[j];
            for c in 0..k {
                s[(r, c)] = 2.0 * d[c];
            }
            t[r] = seeds[i].norm_squared() - seeds[j].norm_squared();
            r += 1;
        }
        let cell = Polytope::new(s, t)?
            .with_vertices()
            .map_err(|e| match e {
                GeometryError::Degenerate(msg) => {
                    GeometryError::Degenerate(format!("voronoi cell {j}: {msg}"))
                }
                other => other,
            })?;
        // the seed must lie in its own cell
        debug_assert!(cell.contains(&seeds[j], FEAS_TOL).unwrap());
        cells.push(cell);
    }
    Ok(PartitionFamily { parent: p.clone(), seeds: seeds.to_vec(), cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn unit_square() -> Polytope {
        Polytope::box_volume(&DVector::from_row_slice(&[0.0, 0.0]), &DVector::from_row_slice(&[1.0, 1.0]))
            .unwrap()
    }

    pub(crate) fn simplex2() -> Polytope {
        let s = DMatrix::from_row_slice(3, 2, &[-1.0, 0.0, 0.0, -1.0, 1.0, 1.0]);
        let t = DVector::from_row_slice(&[0.0, 0.0, 1.0]);
        Polytope::new(s, t).unwrap()
    }

    #[test]
    fn volume_examples() {
        let e = Ellipsoid::new(DMatrix::identity(2, 2), DVector::zeros(2)).unwrap();
        assert!((e.volume() - 1.0).abs() < 1e-15);
        let e = Ellipsoid::new(DMatrix::identity(2, 2) * 2.0, DVector::zeros(2)).unwrap();
        assert!((e.volume() - 0.25).abs() < 1e-15);
        let e = Ellipsoid::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 4.0]),
            DVector::from_row_slice(&[0.3, -2.0]),
        )
        .unwrap();
        assert!((e.volume() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn invalid_ellipsoids_rejected() {
        let res = Ellipsoid::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]), DVector::zeros(2));
        assert_eq!(res.unwrap_err(), GeometryError::NotPositiveDefinite);
        let res = Ellipsoid::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]), DVector::zeros(2));
        assert_eq!(res.unwrap_err(), GeometryError::NotSymmetric);
    }

    #[test]
    fn unit_ball_containment() {
        let e = Ellipsoid::new(DMatrix::identity(2, 2), DVector::zeros(2)).unwrap();
        assert!(e.contains(&DVector::zeros(2), 0.0).unwrap());
        assert!(!e.contains(&DVector::from_row_slice(&[1.1, 0.0]), 1e-9).unwrap());
        assert!(e.contains(&DVector::from_row_slice(&[1.0, 0.0]), 1e-9).unwrap());
        assert!(e.contains(&DVector::from_row_slice(&[3.0]), 0.0).is_err());
    }

    #[test]
    fn square_vertices() {
        let p = unit_square().with_vertices().unwrap();
        let vs = p.vertices().unwrap();
        assert_eq!(vs.len(), 4);
        for want in [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]] {
            assert!(vs.iter().any(|v| (v[0] - want[0]).abs() < 1e-12 && (v[1] - want[1]).abs() < 1e-12));
        }
    }

    #[test]
    fn simplex_vertices() {
        let p = simplex2().with_vertices().unwrap();
        assert_eq!(p.vertices().unwrap().len(), 3);
    }

    #[test]
    fn chipped_square_vertices() {
        // unit square cut by x1 + x2 <= sqrt(2): oracle below enumerates all
        // row pairs by hand and filters feasibles.
        let r2 = 2f64.sqrt();
        let s = DMatrix::from_row_slice(
            5,
            2,
            &[1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0, 1.0, 1.0],
        );
        let t = DVector::from_row_slice(&[1.0, 1.0, 0.0, 0.0, r2]);
        let p = Polytope::new(s.clone(), t.clone()).unwrap().with_vertices().unwrap();
        let vs = p.vertices().unwrap();

        // independent oracle: all pairs, 2x2 solve, feasibility filter
        let mut expect: Vec<DVector<f64>> = Vec::new();
        for i in 0..5 {
            for j in (i + 1)..5 {
                let m = DMatrix::from_row_slice(
                    2,
                    2,
                    &[s[(i, 0)], s[(i, 1)], s[(j, 0)], s[(j, 1)]],
                );
                let rhs = DVector::from_row_slice(&[t[i], t[j]]);
                if let Some(lu) = m.full_piv_lu().solve(&rhs) {
                    if lu.iter().all(|v| v.is_finite())
                        && (&s * &lu - &t).iter().all(|&v| v <= 1e-9)
                        && !expect.iter().any(|w| (w - &lu).amax() < 1e-8)
                    {
                        expect.push(lu);
                    }
                }
            }
        }
        assert_eq!(expect.len(), 5);
        assert_eq!(vs.len(), 5);
        for want in &expect {
            assert!(vs.iter().any(|v| (v - want).amax() < 1e-9));
        }
        assert!(vs
            .iter()
            .any(|v| (v[0] - 1.0).abs() < 1e-12 && (v[1] - (r2 - 1.0)).abs() < 1e-12));
    }

    #[test]
    fn unbounded_detected() {
        let s = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -1.0]);
        let t = DVector::zeros(2);
        let p = Polytope::new(s, t).unwrap();
        assert_eq!(enumerate_vertices(&p).unwrap_err(), GeometryError::Unbounded);
        // slab: bounded in x2 only
        let s = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, -1.0]);
        let t = DVector::from_row_slice(&[1.0, 0.0]);
        let p = Polytope::new(s, t).unwrap();
        assert_eq!(enumerate_vertices(&p).unwrap_err(), GeometryError::Unbounded);
    }

    #[test]
    fn membership_examples() {
        let p = unit_square();
        assert!(p.contains(&DVector::from_row_slice(&[0.5, 0.5]), 0.0).unwrap());
        assert!(!p.contains(&DVector::from_row_slice(&[1.5, 0.5]), 0.0).unwrap());
        let ball = (DMatrix::identity(2, 2), DVector::zeros(2));
        let qs = QuadSet::new(p, vec![ball], DVector::from_row_slice(&[0.5, 0.5])).unwrap();
        assert!(!qs.contains(&DVector::from_row_slice(&[0.9, 0.9]), 0.0).unwrap());
        assert!(qs.contains(&DVector::from_row_slice(&[0.5, 0.5]), 0.0).unwrap());
    }

    #[test]
    fn witness_validated() {
        let p = unit_square();
        let far_ball = (DMatrix::identity(2, 2) * 10.0, DVector::from_row_slice(&[-30.0, 0.0]));
        let res = QuadSet::new(p, vec![far_ball], DVector::from_row_slice(&[0.5, 0.5]));
        assert_eq!(res.unwrap_err(), GeometryError::WitnessOutside);
    }

    #[test]
    fn voronoi_bisector_split() {
        let p = unit_square();
        let seeds = vec![
            DVector::from_row_slice(&[0.25, 0.5]),
            DVector::from_row_slice(&[0.75, 0.5]),
        ];
        let fam = voronoi_partition(&p, &seeds).unwrap();
        assert_eq!(fam.len(), 2);
        // cell 0 is the left half x1 <= 0.5
        let c0 = &fam.cells()[0];
        assert!(c0.contains(&DVector::from_row_slice(&[0.4, 0.5]), 0.0).unwrap());
        assert!(!c0.contains(&DVector::from_row_slice(&[0.6, 0.5]), 0.0).unwrap());
        let vs = c0.vertices().unwrap();
        assert!(vs.iter().any(|v| (v[0] - 0.5).abs() < 1e-12));
    }

    #[test]
    fn voronoi_single_seed_is_parent() {
        let p = unit_square();
        let fam = voronoi_partition(&p, &[DVector::from_row_slice(&[0.3, 0.3])]).unwrap();
        assert_eq!(fam.len(), 1);
        assert_eq!(fam.cells()[0].rows(), p.rows());
    }

    #[test]
    fn voronoi_monte_carlo_cover() {
        let p = unit_square();
        let mut rng = crate::rng::Rng64::new(11);
        let seeds: Vec<DVector<f64>> = (0..4)
            .map(|_| DVector::from_row_slice(&[rng.uniform(), rng.uniform()]))
            .collect();
        let fam = voronoi_partition(&p, &seeds).unwrap();
        for _ in 0..10_000 {
            let x = DVector::from_row_slice(&[rng.uniform(), rng.uniform()]);
            assert!(fam.cells().iter().any(|c| c.contains(&x, 1e-9).unwrap()));
        }
    }

    #[test]
    fn voronoi_rejects_bad_seeds() {
        let p = unit_square();
        let outside = vec![DVector::from_row_slice(&[2.0, 0.5])];
        assert!(matches!(
            voronoi_partition(&p, &outside).unwrap_err(),
            GeometryError::SeedOutsideParent(0)
        ));
        let dup = vec![
            DVector::from_row_slice(&[0.5, 0.5]),
            DVector::from_row_slice(&[0.5, 0.5]),
        ];
        assert!(matches!(
            voronoi_partition(&p, &dup).unwrap_err(),
            GeometryError::DuplicateSeeds(0, 1)
        ));
    }

    #[test]
    fn voronoi_cells_essentially_disjoint() {
        let p = unit_square();
        let mut rng = crate::rng::Rng64::new(5);
        let seeds: Vec<DVector<f64>> = (0..3)
            .map(|_| DVector::from_row_slice(&[rng.uniform(), rng.uniform()]))
            .collect();
        let fam = voronoi_partition(&p, &seeds).unwrap();
        for (j, cell) in fam.cells().iter().enumerate() {
            // near-seed sample of cell j violates a bisector of every other cell
            let sj = &fam.seeds()[j];
            for (i, other) in fam.cells().iter().enumerate() {
                if i != j {
                    assert!(!other.contains(sj, 1e-9).unwrap());
                    let _ = cell;
                }
            }
        }
    }
}
