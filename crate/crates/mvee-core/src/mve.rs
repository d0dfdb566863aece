//! Minimum-volume circumscribing ellipsoids via the tractable restriction
//! of the generalized-copositive containment reformulation.
//!
//! The containment "E(A, b) contains P" is certified by a multiplier bundle
//! ([`Certificate`]): a nonnegative matrix N over products of polytope
//! rows, an auxiliary (F, g, h) linearizing [A b]^T [A b], and - when the
//! set carries quadratic constraints - S-procedure multipliers per
//! quadratic row plus SOC-RLT cross terms between linear and quadratic
//! rows. Minimizing -log det(A) over these certificates is a dense log-det
//! SDP handled by [`crate::sdp`].
//!
//! One lifted builder covers the whole family: plain polytopes, sets with
//! quadratic rows, coordinate projections, Minkowski sums under affine
//! maps, and unions (shared ellipsoid, one certificate per part).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use nalgebra::{DMatrix, DVector};

use crate::fp;
use crate::geometry::{enumerate_vertices, Ellipsoid, GeometryError, Polytope, QuadSet};
use crate::linalg;
use crate::sdp::{self, AffineExpr, SdpError, SdpProblem, Settings, Status, VarRef};

/// PSD slack tolerance on the certificate LMIs.
pub const LMI_TOL: f64 = 1e-7;
/// Elementwise tolerance on N and the SOC rows.
pub const MULT_TOL: f64 = 1e-9;
/// Tolerance for the vertex quadratic-form evaluation.
pub const VERTEX_FORM_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub enum MveError {
    Geometry(GeometryError),
    Sdp(SdpError),
    Solver(Status),
    /// (Lambda, rho) violates the inscribed-ellipsoid dual constraints.
    InfeasibleDual(String),
    Input(String),
}

impl fmt::Display for MveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MveError::Geometry(e) => write!(f, "geometry: {e}"),
            MveError::Sdp(e) => write!(f, "sdp: {e}"),
            MveError::Solver(s) => write!(f, "solver finished with status {s:?}"),
            MveError::InfeasibleDual(m) => write!(f, "infeasible dual pair: {m}"),
            MveError::Input(m) => write!(f, "{m}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for MveError {}

impl From<GeometryError> for MveError {
    fn from(e: GeometryError) -> Self {
        MveError::Geometry(e)
    }
}

impl From<SdpError> for MveError {
    fn from(e: SdpError) -> Self {
        MveError::Sdp(e)
    }
}

/// Containment certificate per the copositive restriction.
///
/// For a lifted set `{z : Sz <= t, ||Q_i z + q_i||^2 <= 1}` and output map
/// `x = M z`, the two LMIs are
///
/// ```text
///   [[F, g],[g^T, h-1]]  <=  -Scal^T N Scal + sum_i lambda_i J_i
///                            - sum_ij M_ij(alpha_ij, kappa_ij)
///   [[F, g, (AM)^T],[g^T, h, b^T],[AM, b, I]]  >=  0
/// ```
///
/// with `Scal = [-S t]`, `N >= 0`, `lambda_i >= 0`, `||alpha_ij|| <=
/// kappa_ij`. For plain polytopes the lambda/alpha/kappa parts are empty
/// and `M` is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub n: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub g: DVector<f64>,
    pub h: f64,
    pub lambda: Vec<f64>,
    /// alpha[i][j]: quadratic row i against polytope row j
    pub alpha: Vec<Vec<DVector<f64>>>,
    pub kappa: Vec<Vec<f64>>,
}

/// Lifted containment instance: the set lives in R^n, the ellipsoid covers
/// its image under `map` (identity when `None`).
#[derive(Debug, Clone)]
pub struct LiftedSet {
    pub s: DMatrix<f64>,
    pub t: DVector<f64>,
    pub quads: Vec<(DMatrix<f64>, DVector<f64>)>,
    pub map: Option<DMatrix<f64>>,
}

impl LiftedSet {
    fn lifted_dim(&self) -> usize {
        self.s.ncols()
    }

    fn out_dim(&self) -> usize {
        match &self.map {
            Some(m) => m.nrows(),
            None => self.lifted_dim(),
        }
    }

    fn from_polytope(p: &Polytope) -> Self {
        LiftedSet { s: p.s().clone(), t: p.t().clone(), quads: Vec::new(), map: None }
    }

    fn from_quadset(q: &QuadSet) -> Self {
        LiftedSet {
            s: q.base().s().clone(),
            t: q.base().t().clone(),
            quads: q.quads().to_vec(),
            map: None,
        }
    }
}

/// Knobs for the restriction builder.
#[derive(Debug, Clone)]
pub struct MveOptions {
    /// Include the SOC-RLT cross terms between linear and quadratic rows.
    /// Dropping them is the pure S-procedure + RLT ablation.
    pub cross_terms: bool,
    pub settings: Settings,
}

impl Default for MveOptions {
    fn default() -> Self {
        MveOptions { cross_terms: true, settings: Settings::default() }
    }
}

/// Ball known to cover the mapped set with slack; seeds the warm start.
#[derive(Debug, Clone)]
struct CoverBall {
    center: DVector<f64>,
    radius: f64,
}

fn cover_ball_of_points(points: &[DVector<f64>]) -> CoverBall {
    let k = points[0].len();
    let mut c = DVector::zeros(k);
    for p in points {
        c += p;
    }
    c /= points.len() as f64;
    let r = points.iter().map(|p| (p - &c).norm()).fold(0.0f64, f64::max);
    CoverBall { center: c, radius: (2.0 * r).max(1e-3) }
}

fn cover_ball_of_quad(q: &DMatrix<f64>, qv: &DVector<f64>) -> Option<CoverBall> {
    // {||Qx + q|| <= 1} sits inside the ball around -Q^{-1} q of radius
    // 1/min_eig(Q) when Q is PD
    let qs = 0.5 * (q + q.transpose());
    let eigs = linalg::eigvalsh(&qs);
    if eigs[0] <= 1e-12 {
        return None;
    }
    let center = -linalg::inv_pd(&qs)? * qv;
    Some(CoverBall { center, radius: 2.0 / eigs[0] })
}

struct BuiltProblem {
    problem: SdpProblem,
    warm: Vec<f64>,
    a: VarRef,
    b: VarRef,
    parts: Vec<PartVars>,
}

struct PartVars {
    f: VarRef,
    g: VarRef,
    h: VarRef,
    n: Option<VarRef>,
    lambda: Vec<VarRef>,
    alpha: Vec<Vec<VarRef>>,
    kappa: Vec<Vec<VarRef>>,
}

/// Rows of `[-S t]` as vectors in R^{n+1}.
fn scal_rows(s: &DMatrix<f64>, t: &DVector<f64>) -> Vec<DVector<f64>> {
    let (j, n) = (s.nrows(), s.ncols());
    (0..j)
        .map(|i| DVector::from_fn(n + 1, |c, _| if c < n { -s[(i, c)] } else { t[i] }))
        .collect()
}

fn build(
    parts: &[LiftedSet],
    covers: &[CoverBall],
    opts: &MveOptions,
) -> Result<BuiltProblem, MveError> {
    let k_out = parts[0].out_dim();
    for p in parts {
        if p.out_dim() != k_out {
            return Err(MveError::Input(String::from("parts map into different dimensions")));
        }
    }
    let mut prob = SdpProblem::new();
    let a = prob.sym_matrix_var("A", k_out);
    let b = prob.vector_var("b", k_out);
    prob.set_logdet_objective(a)?;

    let mut part_vars = Vec::with_capacity(parts.len());
    for (pi, set) in parts.iter().enumerate() {
        let n = set.lifted_dim();
        let j = set.s.nrows();
        let nq = set.quads.len();
        let idx = |name: &str| -> String {
            if parts.len() == 1 {
                String::from(name)
            } else {
                alloc::format!("{name}{pi}")
            }
        };
        let f = prob.sym_matrix_var(&idx("F"), n);
        let g = prob.vector_var(&idx("g"), n);
        let h = prob.scalar_var(&idx("h"));
        let nvar = if j > 0 { Some(prob.sym_matrix_var_nonneg(&idx("N"), j)) } else { None };
        let mut lambda = Vec::with_capacity(nq);
        let mut alpha: Vec<Vec<VarRef>> = Vec::with_capacity(nq);
        let mut kappa: Vec<Vec<VarRef>> = Vec::with_capacity(nq);
        for qi in 0..nq {
            lambda.push(prob.scalar_var_nonneg(&alloc::format!("{}{qi}", idx("lam"))));
            let mut arow = Vec::new();
            let mut krow = Vec::new();
            if opts.cross_terms {
                for jj in 0..j {
                    let m_i = parts[pi].quads[qi].0.nrows();
                    let av = prob.vector_var(&alloc::format!("{}_{qi}_{jj}", idx("alpha")), m_i);
                    let kv = prob.scalar_var(&alloc::format!("{}_{qi}_{jj}", idx("kappa")));
                    let u: Vec<AffineExpr> = (0..m_i).map(|r| prob.expr_vec(av, r)).collect();
                    let w = prob.expr_scalar(kv);
                    prob.add_soc(&u, &w);
                    arow.push(av);
                    krow.push(kv);
                }
            }
            alpha.push(arow);
            kappa.push(krow);
        }

        // first LMI, size n+1
        let b1 = prob.new_psd_block(n + 1);
        for p_ in 0..n {
            for q_ in p_..n {
                let slot = prob.slot_sym(f, p_, q_);
                prob.block_slot(b1, p_, q_, slot, -1.0);
            }
            let slot = prob.slot_vec(g, p_);
            prob.block_slot(b1, p_, n, slot, -1.0);
        }
        let hslot = prob.slot_scalar(h);
        prob.block_slot(b1, n, n, hslot, -1.0);
        prob.block_const(b1, n, n, 1.0);
        if let Some(nvar) = nvar {
            let rows = scal_rows(&set.s, &set.t);
            for i in 0..j {
                for jj in 0..=i {
                    let slot = prob.slot_sym(nvar, i, jj);
                    for p_ in 0..=n {
                        for q_ in p_..=n {
                            let c = if i == jj {
                                -rows[i][p_] * rows[i][q_]
                            } else {
                                -(rows[i][p_] * rows[jj][q_] + rows[jj][p_] * rows[i][q_])
                            };
                            if c != 0.0 {
                                prob.block_slot(b1, p_, q_, slot, c);
                            }
                        }
                    }
                }
            }
        }
        for (qi, (qm, qv)) in set.quads.iter().enumerate() {
            // + lambda_i J_i, J_i = [[Q^T Q, Q^T q],[q^T Q, q^T q - 1]]
            let qtq = qm.transpose() * qm;
            let qtqv = qm.transpose() * qv;
            let lam_slot = prob.slot_scalar(lambda[qi]);
            for p_ in 0..n {
                for q_ in p_..n {
                    if qtq[(p_, q_)] != 0.0 {
                        prob.block_slot(b1, p_, q_, lam_slot, qtq[(p_, q_)]);
                    }
                }
                if qtqv[p_] != 0.0 {
                    prob.block_slot(b1, p_, n, lam_slot, qtqv[p_]);
                }
            }
            prob.block_slot(b1, n, n, lam_slot, qv.norm_squared() - 1.0);
            if opts.cross_terms {
                for jj in 0..j {
                    let sj: DVector<f64> = set.s.row(jj).transpose();
                    let tj = set.t[jj];
                    let av = alpha[qi][jj];
                    let kv = kappa[qi][jj];
                    // the block gets -M_ij(alpha, kappa)
                    for r in 0..qm.nrows() {
                        let qr: DVector<f64> = qm.row(r).transpose();
                        let aslot = prob.slot_vec(av, r);
                        for p_ in 0..n {
                            for q_ in p_..n {
                                let c = 0.5 * (sj[p_] * qr[q_] + qr[p_] * sj[q_]);
                                if c != 0.0 {
                                    prob.block_slot(b1, p_, q_, aslot, c);
                                }
                            }
                            let c = -0.5 * (tj * qr[p_] - qv[r] * sj[p_]);
                            if c != 0.0 {
                                prob.block_slot(b1, p_, n, aslot, c);
                            }
                        }
                        if qv[r] * tj != 0.0 {
                            prob.block_slot(b1, n, n, aslot, -qv[r] * tj);
                        }
                    }
                    let kslot = prob.slot_scalar(kv);
                    for p_ in 0..n {
                        if sj[p_] != 0.0 {
                            prob.block_slot(b1, p_, n, kslot, 0.5 * sj[p_]);
                        }
                    }
                    if tj != 0.0 {
                        prob.block_slot(b1, n, n, kslot, -tj);
                    }
                }
            }
        }

        // second LMI, size n + 1 + k_out
        let b2 = prob.new_psd_block(n + 1 + k_out);
        for p_ in 0..n {
            for q_ in p_..n {
                let slot = prob.slot_sym(f, p_, q_);
                prob.block_slot(b2, p_, q_, slot, 1.0);
            }
            let slot = prob.slot_vec(g, p_);
            prob.block_slot(b2, p_, n, slot, 1.0);
        }
        prob.block_slot(b2, n, n, hslot, 1.0);
        for r in 0..k_out {
            let bslot = prob.slot_vec(b, r);
            prob.block_slot(b2, n, n + 1 + r, bslot, 1.0);
            prob.block_const(b2, n + 1 + r, n + 1 + r, 1.0);
        }
        for r in 0..k_out {
            for c in 0..n {
                for kk in 0..k_out {
                    let m_kc = match &set.map {
                        Some(m) => m[(kk, c)],
                        None => {
                            if kk == c {
                                1.0
                            } else {
                                0.0
                            }
                        }
                    };
                    if m_kc != 0.0 {
                        let slot = prob.slot_sym(a, r, kk);
                        prob.block_slot(b2, n + 1 + r, c, slot, m_kc);
                    }
                }
            }
        }

        part_vars.push(PartVars { f, g, h, n: nvar, lambda, alpha, kappa });
    }

    // warm start: ball covering the union of the mapped covers
    let k = k_out;
    let mut c = DVector::<f64>::zeros(k);
    for cb in covers {
        c += &cb.center;
    }
    c /= covers.len() as f64;
    let r = covers
        .iter()
        .map(|cb| (&cb.center - &c).norm() + cb.radius)
        .fold(0.0f64, f64::max)
        .max(1e-3);
    let a0 = DMatrix::<f64>::identity(k, k) / r;
    let b0 = -&a0 * &c;

    let mut warm = vec![0.0; prob.n_slots()];
    for i in 0..k {
        for jj in 0..=i {
            warm[prob.slot_sym(a, i, jj)] = a0[(i, jj)];
        }
        warm[prob.slot_vec(b, i)] = b0[i];
    }
    let sigma = 0.1 * (1.0 + 1.0 / (r * r));
    for (set, pv) in parts.iter().zip(&part_vars) {
        let n = set.lifted_dim();
        let abar = match &set.map {
            Some(m) => &a0 * m,
            None => a0.clone(),
        };
        let f0 = abar.transpose() * &abar + DMatrix::<f64>::identity(n, n) * sigma;
        let g0 = abar.transpose() * &b0;
        let h0 = b0.norm_squared() + sigma;
        for i in 0..n {
            for jj in 0..=i {
                warm[prob.slot_sym(pv.f, i, jj)] = f0[(i, jj)];
            }
            warm[prob.slot_vec(pv.g, i)] = g0[i];
        }
        warm[prob.slot_scalar(pv.h)] = h0;
        if let Some(nvar) = pv.n {
            let j = set.s.nrows();
            for i in 0..j {
                for jj in 0..=i {
                    warm[prob.slot_sym(nvar, i, jj)] = 1e-6;
                }
            }
        }
        for lam in &pv.lambda {
            warm[prob.slot_scalar(*lam)] = 1e-6;
        }
        for krow in &pv.kappa {
            for kv in krow {
                warm[prob.slot_scalar(*kv)] = 1e-6;
            }
        }
    }

    Ok(BuiltProblem { problem: prob, warm, a, b, parts: part_vars })
}

fn extract(
    built: &BuiltProblem,
    values: &[f64],
    parts: &[LiftedSet],
) -> Result<(Ellipsoid, Vec<Certificate>), MveError> {
    let p = &built.problem;
    let a = p.value_sym(values, built.a);
    let b = p.value_vec(values, built.b);
    let ell = Ellipsoid::new(a, b)?;
    let mut certs = Vec::with_capacity(parts.len());
    for (set, pv) in parts.iter().zip(&built.parts) {
        let j = set.s.nrows();
        let n = match pv.n {
            Some(nv) => p.value_sym(values, nv),
            None => DMatrix::zeros(j, j),
        };
        let lambda: Vec<f64> = pv.lambda.iter().map(|l| p.value_scalar(values, *l)).collect();
        let alpha: Vec<Vec<DVector<f64>>> = pv
            .alpha
            .iter()
            .map(|row| row.iter().map(|av| p.value_vec(values, *av)).collect())
            .collect();
        let kappa: Vec<Vec<f64>> = pv
            .kappa
            .iter()
            .map(|row| row.iter().map(|kv| p.value_scalar(values, *kv)).collect())
            .collect();
        certs.push(Certificate {
            n,
            f: p.value_sym(values, pv.f),
            g: p.value_vec(values, pv.g),
            h: p.value_scalar(values, pv.h),
            lambda,
            alpha,
            kappa,
        });
    }
    Ok((ell, certs))
}

fn solve_lifted(
    parts: &[LiftedSet],
    covers: &[CoverBall],
    opts: &MveOptions,
) -> Result<(Ellipsoid, Vec<Certificate>), MveError> {
    let built = build(parts, covers, opts)?;
    let sol = sdp::solve(&built.problem, &opts.settings, Some(&built.warm))?;
    if sol.status != Status::Optimal {
        return Err(MveError::Solver(sol.status));
    }
    extract(&built, &sol.values, parts)
}

/// Solve one lifted containment instance directly; `cover_center` and
/// `cover_radius` describe a ball known to contain the mapped set (warm
/// start only, correctness does not depend on it).
pub fn solve_lifted_set_mve(
    set: &LiftedSet,
    cover_center: &DVector<f64>,
    cover_radius: f64,
    opts: &MveOptions,
) -> Result<(Ellipsoid, Certificate), MveError> {
    let cover = CoverBall { center: cover_center.clone(), radius: cover_radius.max(1e-3) };
    let (e, mut certs) = solve_lifted(core::slice::from_ref(set), &[cover], opts)?;
    Ok((e, certs.remove(0)))
}

/// Minimum-volume circumscribing ellipsoid of a polytope via the
/// copositive restriction. Enumerates the vertices when absent
/// (Assumption-1 validation at desk scale).
pub fn solve_polytope_mve(p: &Polytope) -> Result<(Ellipsoid, Certificate), MveError> {
    solve_polytope_mve_with(p, &MveOptions::default())
}

pub fn solve_polytope_mve_with(
    p: &Polytope,
    opts: &MveOptions,
) -> Result<(Ellipsoid, Certificate), MveError> {
    let verts: Vec<DVector<f64>> = match p.vertices() {
        Some(v) => v.to_vec(),
        None => enumerate_vertices(p)?,
    };
    let set = LiftedSet::from_polytope(p);
    let cover = cover_ball_of_points(&verts);
    let (e, mut certs) = solve_lifted(&[set], &[cover], opts)?;
    Ok((e, certs.remove(0)))
}

/// Ellipsoid covering a polytope intersected with quadratic constraints
/// (S-procedure multipliers plus SOC-RLT cross terms).
pub fn solve_quadset_mve(q: &QuadSet) -> Result<(Ellipsoid, Certificate), MveError> {
    solve_quadset_mve_with(q, &MveOptions::default())
}

pub fn solve_quadset_mve_with(
    q: &QuadSet,
    opts: &MveOptions,
) -> Result<(Ellipsoid, Certificate), MveError> {
    let set = LiftedSet::from_quadset(q);
    let cover = quadset_cover(q)?;
    let (e, mut certs) = solve_lifted(&[set], &[cover], opts)?;
    Ok((e, certs.remove(0)))
}

fn quadset_cover(q: &QuadSet) -> Result<CoverBall, MveError> {
    if q.base().rows() > 0 {
        if let Ok(verts) = enumerate_vertices(q.base()) {
            return Ok(cover_ball_of_points(&verts));
        }
    }
    for (qm, qv) in q.quads() {
        if let Some(cb) = cover_ball_of_quad(qm, qv) {
            return Ok(cb);
        }
    }
    Err(MveError::Input(String::from(
        "cannot bound the quad set: no bounded polytope part and no definite quadratic row",
    )))
}

/// Ellipsoid covering the Minkowski sum `sum_l W_l x_l` over `x_l` in
/// polytope `summands[l]`; the certificate runs over the stacked rows with
/// a full cross-summand multiplier matrix.
pub fn solve_minkowski_mve(
    summands: &[Polytope],
    maps: &[DMatrix<f64>],
) -> Result<(Ellipsoid, Certificate), MveError> {
    solve_minkowski_mve_with(summands, maps, &MveOptions::default())
}

pub fn solve_minkowski_mve_with(
    summands: &[Polytope],
    maps: &[DMatrix<f64>],
    opts: &MveOptions,
) -> Result<(Ellipsoid, Certificate), MveError> {
    if summands.is_empty() || summands.len() != maps.len() {
        return Err(MveError::Input(String::from("need one map per summand")));
    }
    let k_out = maps[0].nrows();
    let mut n_tot = 0usize;
    let mut j_tot = 0usize;
    for (p, m) in summands.iter().zip(maps) {
        if m.nrows() != k_out || m.ncols() != p.dim() {
            return Err(MveError::Input(String::from("map dimensions do not match summand")));
        }
        n_tot += p.dim();
        j_tot += p.rows();
    }
    let mut s = DMatrix::zeros(j_tot, n_tot);
    let mut t = DVector::zeros(j_tot);
    let mut map = DMatrix::zeros(k_out, n_tot);
    let mut row0 = 0usize;
    let mut col0 = 0usize;
    let mut center = DVector::<f64>::zeros(k_out);
    let mut radius = 0.0f64;
    for (p, m) in summands.iter().zip(maps) {
        s.view_mut((row0, col0), (p.rows(), p.dim())).copy_from(p.s());
        t.rows_mut(row0, p.rows()).copy_from(p.t());
        map.view_mut((0, col0), (k_out, p.dim())).copy_from(m);
        let verts: Vec<DVector<f64>> = match p.vertices() {
            Some(v) => v.to_vec(),
            None => enumerate_vertices(p)?,
        };
        let mapped: Vec<DVector<f64>> = verts.iter().map(|v| m * v).collect();
        let cb = cover_ball_of_points(&mapped);
        center += &cb.center;
        radius += cb.radius;
        row0 += p.rows();
        col0 += p.dim();
    }
    let set = LiftedSet { s, t, quads: Vec::new(), map: Some(map) };
    let cover = CoverBall { center, radius };
    let (e, mut certs) = solve_lifted(&[set], &[cover], opts)?;
    Ok((e, certs.remove(0)))
}

/// One shared ellipsoid containing every part, one certificate per part.
pub fn solve_union_mve(parts: &[Polytope]) -> Result<(Ellipsoid, Vec<Certificate>), MveError> {
    solve_union_mve_with(parts, &MveOptions::default())
}

pub fn solve_union_mve_with(
    parts: &[Polytope],
    opts: &MveOptions,
) -> Result<(Ellipsoid, Vec<Certificate>), MveError> {
    if parts.is_empty() {
        return Err(MveError::Input(String::from("union of zero sets")));
    }
    let mut sets = Vec::with_capacity(parts.len());
    let mut covers = Vec::with_capacity(parts.len());
    for p in parts {
        let verts: Vec<DVector<f64>> = match p.vertices() {
            Some(v) => v.to_vec(),
            None => enumerate_vertices(p)?,
        };
        covers.push(cover_ball_of_points(&verts));
        sets.push(LiftedSet::from_polytope(p));
    }
    solve_lifted(&sets, &covers, opts)
}

/// Ellipsoid in R^{k1} covering the projection of `p` onto its first `k1`
/// coordinates; the second LMI carries `Abar = [A 0]`.
pub fn solve_projection_mve(p: &Polytope, k1: usize) -> Result<(Ellipsoid, Certificate), MveError> {
    solve_projection_mve_with(p, k1, &MveOptions::default())
}

pub fn solve_projection_mve_with(
    p: &Polytope,
    k1: usize,
    opts: &MveOptions,
) -> Result<(Ellipsoid, Certificate), MveError> {
    let k = p.dim();
    if k1 == 0 || k1 >= k {
        return Err(MveError::Input(String::from(
            "projection dimension must satisfy 1 <= K1 < K",
        )));
    }
    let verts: Vec<DVector<f64>> = match p.vertices() {
        Some(v) => v.to_vec(),
        None => enumerate_vertices(p)?,
    };
    let mut map = DMatrix::zeros(k1, k);
    for i in 0..k1 {
        map[(i, i)] = 1.0;
    }
    let projected: Vec<DVector<f64>> = verts.iter().map(|v| &map * v).collect();
    let cover = cover_ball_of_points(&projected);
    let set = LiftedSet { s: p.s().clone(), t: p.t().clone(), quads: Vec::new(), map: Some(map) };
    let (e, mut certs) = solve_lifted(&[set], &[cover], opts)?;
    Ok((e, certs.remove(0)))
}

/// Outcome of checking one certificate against one set and ellipsoid.
#[derive(Debug, Clone)]
pub struct CertReport {
    pub lmi1_min_eig: f64,
    pub lmi2_min_eig: f64,
    pub n_min: f64,
    /// min over (i, j) of kappa_ij - ||alpha_ij||
    pub soc_slack_min: f64,
    /// max over vertices v of the first-LMI quadratic form at [v; 1]
    /// (NaN when no vertices were supplied)
    pub vertex_form_max: f64,
    pub pass: bool,
}

/// Check a certificate for a lifted set against the mapped ellipsoid.
/// `vertices` are lifted-space points used as direct copositivity evidence
/// on the cone generators.
pub fn verify_lifted(
    set: &LiftedSet,
    e: &Ellipsoid,
    cert: &Certificate,
    vertices: Option<&[DVector<f64>]>,
) -> CertReport {
    let n = set.lifted_dim();
    let k = set.out_dim();
    let j = set.s.nrows();

    // RHS - LHS of the first LMI
    let mut m1 = DMatrix::<f64>::zeros(n + 1, n + 1);
    for p_ in 0..n {
        for q_ in 0..n {
            m1[(p_, q_)] = -cert.f[(p_, q_)];
        }
        m1[(p_, n)] = -cert.g[p_];
        m1[(n, p_)] = -cert.g[p_];
    }
    m1[(n, n)] = 1.0 - cert.h;
    if j > 0 {
        let rows = scal_rows(&set.s, &set.t);
        for i in 0..j {
            for jj in 0..j {
                let nij = cert.n[(i, jj)];
                if nij != 0.0 {
                    for p_ in 0..=n {
                        for q_ in 0..=n {
                            m1[(p_, q_)] -= nij * rows[i][p_] * rows[jj][q_];
                        }
                    }
                }
            }
        }
    }
    let mut soc_slack_min = f64::INFINITY;
    for (qi, (qm, qv)) in set.quads.iter().enumerate() {
        let lam = cert.lambda.get(qi).copied().unwrap_or(0.0);
        let qtq = qm.transpose() * qm;
        let qtqv = qm.transpose() * qv;
        for p_ in 0..n {
            for q_ in 0..n {
                m1[(p_, q_)] += lam * qtq[(p_, q_)];
            }
            m1[(p_, n)] += lam * qtqv[p_];
            m1[(n, p_)] += lam * qtqv[p_];
        }
        m1[(n, n)] += lam * (qv.norm_squared() - 1.0);
        if let (Some(arow), Some(krow)) = (cert.alpha.get(qi), cert.kappa.get(qi)) {
            for jj in 0..arow.len().min(j) {
                let al = &arow[jj];
                let ka = krow[jj];
                soc_slack_min = soc_slack_min.min(ka - al.norm());
                let sj: DVector<f64> = set.s.row(jj).transpose();
                let tj = set.t[jj];
                let qta = qm.transpose() * al;
                let aq = al.dot(qv) + ka;
                for p_ in 0..n {
                    for q_ in 0..n {
                        m1[(p_, q_)] += 0.5 * (sj[p_] * qta[q_] + qta[p_] * sj[q_]);
                    }
                    let v = -0.5 * (tj * qta[p_] - aq * sj[p_]);
                    m1[(p_, n)] += v;
                    m1[(n, p_)] += v;
                }
                m1[(n, n)] -= aq * tj;
            }
        }
    }
    linalg::symmetrize(&mut m1);
    let lmi1_min_eig = linalg::min_eig(&m1);

    // second LMI
    let abar = match &set.map {
        Some(m) => e.a() * m,
        None => e.a().clone(),
    };
    let mut m2 = DMatrix::<f64>::zeros(n + 1 + k, n + 1 + k);
    for p_ in 0..n {
        for q_ in 0..n {
            m2[(p_, q_)] = cert.f[(p_, q_)];
        }
        m2[(p_, n)] = cert.g[p_];
        m2[(n, p_)] = cert.g[p_];
    }
    m2[(n, n)] = cert.h;
    for r in 0..k {
        for c in 0..n {
            m2[(n + 1 + r, c)] = abar[(r, c)];
            m2[(c, n + 1 + r)] = abar[(r, c)];
        }
        m2[(n + 1 + r, n)] = e.b()[r];
        m2[(n, n + 1 + r)] = e.b()[r];
        m2[(n + 1 + r, n + 1 + r)] = 1.0;
    }
    let lmi2_min_eig = linalg::min_eig(&m2);

    let n_min = if j > 0 { cert.n.iter().copied().fold(f64::INFINITY, f64::min) } else { 0.0 };

    let vertex_form_max = match vertices {
        None => f64::NAN,
        Some(vs) => {
            let mut worst = f64::NEG_INFINITY;
            for v in vs {
                let fq = v.dot(&(&cert.f * v)) + 2.0 * cert.g.dot(v) + cert.h - 1.0;
                worst = worst.max(fq);
            }
            worst
        }
    };

    let pass = lmi1_min_eig >= -LMI_TOL
        && lmi2_min_eig >= -LMI_TOL
        && n_min >= -MULT_TOL
        && (soc_slack_min.is_infinite() || soc_slack_min >= -MULT_TOL)
        && (vertex_form_max.is_nan() || vertex_form_max <= VERTEX_FORM_TOL);
    CertReport { lmi1_min_eig, lmi2_min_eig, n_min, soc_slack_min, vertex_form_max, pass }
}

/// Verify a polytope containment certificate; vertex forms are evaluated
/// when the polytope has cached vertices (or they can be enumerated).
pub fn verify_certificate_polytope(p: &Polytope, e: &Ellipsoid, cert: &Certificate) -> CertReport {
    let set = LiftedSet::from_polytope(p);
    let owned;
    let verts: Option<&[DVector<f64>]> = match p.vertices() {
        Some(v) => Some(v),
        None => match enumerate_vertices(p) {
            Ok(v) => {
                owned = v;
                Some(&owned)
            }
            Err(_) => None,
        },
    };
    verify_lifted(&set, e, cert, verts)
}

/// Verify a quad-set containment certificate. Vertices of the base
/// polytope need not satisfy the quadratic rows, so the vertex-form
/// evidence only applies when the quad list is empty.
pub fn verify_certificate_quadset(q: &QuadSet, e: &Ellipsoid, cert: &Certificate) -> CertReport {
    let set = LiftedSet::from_quadset(q);
    let owned;
    let verts: Option<&[DVector<f64>]> = if q.quads().is_empty() {
        match q.base().vertices() {
            Some(v) => Some(v),
            None => match enumerate_vertices(q.base()) {
                Ok(v) => {
                    owned = v;
                    Some(&owned)
                }
                Err(_) => None,
            },
        }
    } else {
        None
    };
    verify_lifted(&set, e, cert, verts)
}

/// Objective of the scaled-inscribed-ellipsoid dual at (Lambda, rho):
/// `K rho^T t - K - log det(-(S^T Lambda + Lambda^T S)/2)`.
pub fn smvie_dual_objective(p: &Polytope, lam: &DMatrix<f64>, rho: &DVector<f64>) -> Option<f64> {
    let k = p.dim() as f64;
    let g = -0.5 * (p.s().transpose() * lam + lam.transpose() * p.s());
    let ld = linalg::logdet_pd(&g)?;
    Some(k * rho.dot(p.t()) - k - ld)
}

/// Constructive lift of a feasible inscribed-ellipsoid dual pair into a
/// containment certificate: with `Lambda^T S = U Sigma V^T` and
/// `kappa = exp(1 - rho^T t)`,
///
/// ```text
///   A = kappa V Sigma V^T,   b = -kappa V U^T Lambda^T t,
///   N = kappa^2 (rho rho^T - Lambda Lambda^T),
/// ```
///
/// and (F, g, h) are re-derived as the blocks of [A b]^T [A b]. The minus
/// sign on `b` makes `A b = -kappa^2 S^T Lambda Lambda^T t`, which is the
/// sign the N identity produces.
pub fn lift_smvie_certificate(
    p: &Polytope,
    lam: &DMatrix<f64>,
    rho: &DVector<f64>,
) -> Result<(Ellipsoid, Certificate), MveError> {
    let j = p.rows();
    let k = p.dim();
    if lam.nrows() != j || lam.ncols() != k {
        return Err(MveError::Input(String::from("Lambda must be J x K")));
    }
    if rho.len() != j {
        return Err(MveError::Input(String::from("rho must have length J")));
    }
    let srho = (p.s().transpose() * rho).amax();
    if srho > 1e-8 {
        return Err(MveError::InfeasibleDual(alloc::format!("S^T rho = {srho:.3e} != 0")));
    }
    for jj in 0..j {
        let rownorm = lam.row(jj).norm();
        if rownorm > rho[jj] + 1e-9 {
            return Err(MveError::InfeasibleDual(alloc::format!(
                "row {jj}: ||Lambda_j|| = {rownorm:.6} > rho_j = {:.6}",
                rho[jj]
            )));
        }
    }
    let kap = fp::exp(1.0 - rho.dot(p.t()));
    let m = lam.transpose() * p.s();
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd with u");
    let vt = svd.v_t.as_ref().expect("svd with v_t");
    let v = vt.transpose();
    let mut sig = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        sig[(i, i)] = svd.singular_values[i];
        if svd.singular_values[i] <= 1e-12 {
            return Err(MveError::InfeasibleDual(String::from(
                "Lambda^T S is singular; the dual objective is unbounded here",
            )));
        }
    }
    let mut a = kap * &v * &sig * v.transpose();
    linalg::symmetrize(&mut a);
    let b = -kap * &v * u.transpose() * lam.transpose() * p.t();
    let n = kap * kap * (rho * rho.transpose() - lam * lam.transpose());
    let f = &a * &a;
    let g = &a * &b;
    let h = b.norm_squared();
    let e = Ellipsoid::new(a, b)?;
    let cert =
        Certificate { n, f, g, h, lambda: Vec::new(), alpha: Vec::new(), kappa: Vec::new() };
    Ok((e, cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Polytope;

    fn unit_square() -> Polytope {
        Polytope::box_volume(
            &DVector::from_row_slice(&[0.0, 0.0]),
            &DVector::from_row_slice(&[1.0, 1.0]),
        )
        .unwrap()
    }

    fn simplex2() -> Polytope {
        let s = DMatrix::from_row_slice(3, 2, &[-1.0, 0.0, 0.0, -1.0, 1.0, 1.0]);
        let t = DVector::from_row_slice(&[0.0, 0.0, 1.0]);
        Polytope::new(s, t).unwrap()
    }

    #[test]
    fn simplex_steiner_circumellipse() {
        let p = simplex2().with_vertices().unwrap();
        let (e, cert) = solve_polytope_mve(&p).unwrap();
        let vol_expect = 2.0 / (3.0 * 3f64.sqrt());
        assert!(
            (e.volume() - vol_expect).abs() < 1e-4,
            "vol {} vs {}",
            e.volume(),
            vol_expect
        );
        let c = e.center();
        assert!((c[0] - 1.0 / 3.0).abs() < 1e-4 && (c[1] - 1.0 / 3.0).abs() < 1e-4);
        let rep = verify_certificate_polytope(&p, &e, &cert);
        assert!(rep.pass, "{rep:?}");
        for v in p.vertices().unwrap() {
            assert!(e.gauge(v) <= 1.0 + 1e-7);
        }
    }

    #[test]
    fn square_circumscribed_ball() {
        let p = unit_square().with_vertices().unwrap();
        let (e, cert) = solve_polytope_mve(&p).unwrap();
        assert!((e.volume() - 0.5).abs() < 1e-5, "vol {}", e.volume());
        let c = e.center();
        assert!((c[0] - 0.5).abs() < 1e-5 && (c[1] - 0.5).abs() < 1e-5);
        assert!(verify_certificate_polytope(&p, &e, &cert).pass);
    }

    #[test]
    fn perturbed_certificate_fails() {
        let p = simplex2().with_vertices().unwrap();
        let (e, mut cert) = solve_polytope_mve(&p).unwrap();
        cert.h -= 0.1;
        let rep = verify_certificate_polytope(&p, &e, &cert);
        assert!(!rep.pass);
        assert!(rep.lmi2_min_eig < -LMI_TOL || rep.vertex_form_max > VERTEX_FORM_TOL);
    }

    #[test]
    fn quadset_pure_ball_self_cover() {
        // empty polytope part, one unit-ball row: the ball itself is optimal
        let k = 2;
        let base = Polytope::new(DMatrix::zeros(0, k), DVector::zeros(0)).unwrap();
        let q = QuadSet::new(
            base,
            alloc::vec![(DMatrix::identity(k, k), DVector::zeros(k))],
            DVector::zeros(k),
        )
        .unwrap();
        let (e, cert) = solve_quadset_mve(&q).unwrap();
        assert!(e.volume() <= 1.0 + 1e-6, "vol {}", e.volume());
        let mut rng = crate::rng::Rng64::new(1);
        for _ in 0..200 {
            let d = rng.unit_sphere(k);
            let x = DVector::from_row_slice(&d);
            assert!(e.gauge(&x) <= 1.0 + 1e-5);
        }
        assert!(verify_certificate_quadset(&q, &e, &cert).pass);
    }

    #[test]
    fn quadset_redundant_ball_no_worse() {
        let p = unit_square().with_vertices().unwrap();
        let (e_base, _) = solve_polytope_mve(&p).unwrap();
        let center = DVector::from_row_slice(&[0.5, 0.5]);
        let ball = Ellipsoid::ball(&center, 1.0).unwrap();
        let q = QuadSet::new(
            p.clone(),
            alloc::vec![(ball.a().clone(), ball.b().clone())],
            center,
        )
        .unwrap();
        let (e, cert) = solve_quadset_mve(&q).unwrap();
        assert!(e.volume() <= e_base.volume() * (1.0 + 1e-6));
        assert!(verify_certificate_quadset(&q, &e, &cert).pass);
    }

    #[test]
    fn quadset_square_cap_ball_monte_carlo() {
        let p = unit_square().with_vertices().unwrap();
        let q = QuadSet::new(
            p,
            alloc::vec![(DMatrix::identity(2, 2), DVector::zeros(2))],
            DVector::from_row_slice(&[0.3, 0.3]),
        )
        .unwrap();
        let (e, _) = solve_quadset_mve(&q).unwrap();
        let mut rng = crate::rng::Rng64::new(9);
        let mut n_in = 0;
        for _ in 0..10_000 {
            let x = DVector::from_row_slice(&[rng.uniform(), rng.uniform()]);
            if q.contains(&x, 0.0).unwrap() {
                n_in += 1;
                assert!(e.gauge(&x) <= 1.0 + 1e-6);
            }
        }
        assert!(n_in > 1000);
    }

    #[test]
    fn minkowski_single_summand_matches_polytope() {
        let p = simplex2().with_vertices().unwrap();
        let (e_base, _) = solve_polytope_mve(&p).unwrap();
        let (e, cert) = solve_minkowski_mve(&[p.clone()], &[DMatrix::identity(2, 2)]).unwrap();
        assert!((e.volume() - e_base.volume()).abs() <= 1e-6 * e_base.volume().max(1.0));
        let set = LiftedSet {
            s: p.s().clone(),
            t: p.t().clone(),
            quads: Vec::new(),
            map: Some(DMatrix::identity(2, 2)),
        };
        assert!(verify_lifted(&set, &e, &cert, p.vertices()).pass);
    }

    #[test]
    fn minkowski_segments_make_square() {
        let seg = Polytope::new(
            DMatrix::from_row_slice(2, 1, &[1.0, -1.0]),
            DVector::from_row_slice(&[1.0, 0.0]),
        )
        .unwrap();
        let e1 = DMatrix::from_row_slice(2, 1, &[1.0, 0.0]);
        let e2 = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let (e, _) = solve_minkowski_mve(&[seg.clone(), seg], &[e1, e2]).unwrap();
        for x in [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]] {
            assert!(e.gauge(&DVector::from_row_slice(&x)) <= 1.0 + 1e-5);
        }
        assert!((e.volume() - 0.5).abs() < 1e-4, "vol {}", e.volume());
    }

    #[test]
    fn minkowski_square_plus_square_scales() {
        let sq = unit_square().with_vertices().unwrap();
        let (e_sum, _) = solve_minkowski_mve(
            &[sq.clone(), sq.clone()],
            &[DMatrix::identity(2, 2), DMatrix::identity(2, 2)],
        )
        .unwrap();
        let big = Polytope::box_volume(
            &DVector::from_row_slice(&[0.0, 0.0]),
            &DVector::from_row_slice(&[2.0, 2.0]),
        )
        .unwrap()
        .with_vertices()
        .unwrap();
        let (e_big, _) = solve_polytope_mve(&big).unwrap();
        assert!(
            (e_sum.volume() - e_big.volume()).abs() <= 1e-5 * e_big.volume(),
            "{} vs {}",
            e_sum.volume(),
            e_big.volume()
        );
    }

    #[test]
    fn union_single_part_matches() {
        let p = simplex2().with_vertices().unwrap();
        let (e_base, _) = solve_polytope_mve(&p).unwrap();
        let (e, certs) = solve_union_mve(&[p.clone()]).unwrap();
        assert_eq!(certs.len(), 1);
        assert!((e.volume() - e_base.volume()).abs() <= 1e-5 * e_base.volume());
    }

    #[test]
    fn union_two_squares_corners() {
        let a = unit_square();
        let b = Polytope::box_volume(
            &DVector::from_row_slice(&[2.0, 0.0]),
            &DVector::from_row_slice(&[3.0, 1.0]),
        )
        .unwrap();
        let (e, certs) = solve_union_mve(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(certs.len(), 2);
        for p in [&a, &b] {
            for v in enumerate_vertices(p).unwrap() {
                assert!(e.gauge(&v) <= 1.0 + 1e-6);
            }
        }
        assert!(verify_certificate_polytope(&a, &e, &certs[0]).pass);
        assert!(verify_certificate_polytope(&b, &e, &certs[1]).pass);
    }

    #[test]
    fn union_of_partition_matches_whole() {
        let p = unit_square().with_vertices().unwrap();
        let seeds = alloc::vec![
            DVector::from_row_slice(&[0.25, 0.5]),
            DVector::from_row_slice(&[0.75, 0.5]),
        ];
        let fam = crate::geometry::voronoi_partition(&p, &seeds).unwrap();
        let (e_union, _) = solve_union_mve(fam.cells()).unwrap();
        let (e_whole, _) = solve_polytope_mve(&p).unwrap();
        assert!(
            (e_union.volume() - e_whole.volume()).abs() <= 1e-5 * e_whole.volume(),
            "{} vs {}",
            e_union.volume(),
            e_whole.volume()
        );
    }

    #[test]
    fn projection_square_to_interval() {
        let p = unit_square().with_vertices().unwrap();
        let (e, _) = solve_projection_mve(&p, 1).unwrap();
        assert_eq!(e.dim(), 1);
        assert!((e.a()[(0, 0)] - 2.0).abs() < 1e-4, "A = {}", e.a()[(0, 0)]);
        assert!((e.b()[0] + 1.0).abs() < 1e-4, "b = {}", e.b()[0]);
    }

    #[test]
    fn projection_tall_box_ignores_y() {
        let p = Polytope::box_volume(
            &DVector::from_row_slice(&[0.0, 0.0]),
            &DVector::from_row_slice(&[1.0, 3.0]),
        )
        .unwrap();
        let (e, _) = solve_projection_mve(&p, 1).unwrap();
        assert!((e.a()[(0, 0)] - 2.0).abs() < 1e-4);
        assert!((e.b()[0] + 1.0).abs() < 1e-4);
    }

    #[test]
    fn projection_simplex3_matches_direct() {
        let s = DMatrix::from_row_slice(
            4,
            3,
            &[-1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0, 1.0, 1.0, 1.0],
        );
        let t = DVector::from_row_slice(&[0.0, 0.0, 0.0, 1.0]);
        let p3 = Polytope::new(s, t).unwrap();
        let (e_proj, _) = solve_projection_mve(&p3, 2).unwrap();
        let (e_direct, _) = solve_polytope_mve(&simplex2()).unwrap();
        assert!(
            (e_proj.volume() - e_direct.volume()).abs() <= 1e-4 * e_direct.volume(),
            "{} vs {}",
            e_proj.volume(),
            e_direct.volume()
        );
    }

    #[test]
    fn lift_rejects_bad_duals() {
        let p = unit_square().with_vertices().unwrap();
        // Lambda = 0 makes Lambda^T S singular: rejected
        let lam = DMatrix::zeros(4, 2);
        let mut rho = DVector::zeros(4);
        rho[0] = 1.0;
        rho[2] = 1.0;
        assert!(matches!(
            lift_smvie_certificate(&p, &lam, &rho),
            Err(MveError::InfeasibleDual(_))
        ));
        // ||Lambda_j|| > rho_j rejected
        let mut lam2 = DMatrix::zeros(4, 2);
        lam2[(0, 0)] = 1.0;
        assert!(matches!(
            lift_smvie_certificate(&p, &lam2, &DVector::zeros(4)),
            Err(MveError::InfeasibleDual(_))
        ));
    }
}
