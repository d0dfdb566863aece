//! Two-stage distributionally robust optimization with random recourse:
//! piecewise-linear decision rules over Voronoi partitions of the support,
//! tightened by per-cell circumscribing ellipsoids.
//!
//! The decision-rule SDP bounds the worst-case expected recourse cost over
//! the moment ambiguity set `{Q : E[xi] = mu, E[xi xi^T] <= Sigma}`
//! supported on a polytope. Each recourse constraint is certified on its
//! cell through S-procedure multipliers over the cell rows plus the cell's
//! bounding ellipsoid; the ellipsoid quality directly controls the bound.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use nalgebra::{DMatrix, DVector};

use crate::fp;
use crate::geometry::{voronoi_partition, Ellipsoid, GeometryError, PartitionFamily, Polytope};
use crate::mve::{solve_polytope_mve, MveError};
use crate::rng::Rng64;
use crate::sdp::{self, AffineExpr, SdpProblem, Settings, Status};

#[derive(Debug, Clone, PartialEq)]
pub enum DroError {
    Geometry(GeometryError),
    Mve(MveError),
    Sdp(sdp::SdpError),
    /// The decision-rule restriction is infeasible (says nothing about the
    /// underlying problem).
    RestrictionInfeasible,
    Solver(Status),
    Input(String),
}

impl fmt::Display for DroError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DroError::Geometry(e) => write!(f, "geometry: {e}"),
            DroError::Mve(e) => write!(f, "ellipsoid fit: {e}"),
            DroError::Sdp(e) => write!(f, "sdp: {e}"),
            DroError::RestrictionInfeasible => write!(f, "restriction infeasible"),
            DroError::Solver(s) => write!(f, "solver finished with status {s:?}"),
            DroError::Input(m) => write!(f, "{m}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for DroError {}

impl From<GeometryError> for DroError {
    fn from(e: GeometryError) -> Self {
        DroError::Geometry(e)
    }
}

impl From<MveError> for DroError {
    fn from(e: MveError) -> Self {
        DroError::Mve(e)
    }
}

impl From<sdp::SdpError> for DroError {
    fn from(e: sdp::SdpError) -> Self {
        DroError::Sdp(e)
    }
}

/// One recourse constraint `T_l(x)^T xi + h_l(x) <= (W_l xi + w_l)^T y`
/// with `T_l(x) = t_const + t_lin x` and `h_l(x) = h_const + h_lin^T x`.
#[derive(Debug, Clone)]
pub struct RecourseRow {
    pub t_const: DVector<f64>,
    pub t_lin: DMatrix<f64>,
    pub h_const: f64,
    pub h_lin: DVector<f64>,
    pub w: DMatrix<f64>,
    pub w_vec: DVector<f64>,
}

impl RecourseRow {
    /// Row without any first-stage coupling.
    pub fn constant(k: usize, n1: usize, n2: usize) -> Self {
        RecourseRow {
            t_const: DVector::zeros(k),
            t_lin: DMatrix::zeros(k, n1),
            h_const: 0.0,
            h_lin: DVector::zeros(n1),
            w: DMatrix::zeros(n2, k),
            w_vec: DVector::zeros(n2),
        }
    }
}

/// Two-stage instance with moment ambiguity.
#[derive(Debug, Clone)]
pub struct DroInstance {
    /// First-stage cost.
    pub c: DVector<f64>,
    /// First-stage feasible set rows `g^T x <= f`.
    pub x_rows: Vec<(DVector<f64>, f64)>,
    /// Second-stage cost `(D xi + d)^T y`.
    pub d_mat: DMatrix<f64>,
    pub d_vec: DVector<f64>,
    pub rows: Vec<RecourseRow>,
    /// Support polytope of the uncertainty.
    pub support: Polytope,
    pub mu: DVector<f64>,
    /// Second-moment upper bound.
    pub sigma: DMatrix<f64>,
}

impl DroInstance {
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.c.len(), self.d_mat.nrows(), self.support.dim())
    }

    pub fn validate(&self) -> Result<(), DroError> {
        let (n1, n2, k) = self.dims();
        if self.mu.len() != k || self.sigma.nrows() != k || self.sigma.ncols() != k {
            return Err(DroError::Input(String::from("moment dimensions do not match support")));
        }
        let slack = &self.sigma - &self.mu * self.mu.transpose();
        if crate::linalg::min_eig(&slack) < -1e-9 {
            return Err(DroError::Input(String::from(
                "Sigma - mu mu^T must be positive semidefinite",
            )));
        }
        for r in &self.rows {
            if r.t_const.len() != k
                || r.t_lin.nrows() != k
                || r.t_lin.ncols() != n1
                || r.h_lin.len() != n1
                || r.w.nrows() != n2
                || r.w.ncols() != k
                || r.w_vec.len() != n2
            {
                return Err(DroError::Input(String::from("recourse row dimensions inconsistent")));
            }
        }
        Ok(())
    }
}

/// Piecewise-linear policy `y(xi) = Y_j xi + y_j` on cell j, plus its bound.
#[derive(Debug, Clone)]
pub struct PldPolicy {
    pub x: DVector<f64>,
    pub pieces: Vec<(DMatrix<f64>, DVector<f64>)>,
    /// Optimal value of the decision-rule SDP (upper bound on the true
    /// problem).
    pub bound: f64,
}

/// Ablation switches mirroring the experiment variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AblationMode {
    /// Piecewise static rules: Y_j fixed to zero.
    PiecewiseStatic,
    /// Linear decision rule: one piece over the whole support with its own
    /// circumscribing ellipsoid.
    LinearSingle,
    /// Same partition, bounding ellipsoids with doubled radii.
    DoubledRadii,
}

/// Voronoi cells plus one circumscribing ellipsoid per cell. The per-cell
/// fits are independent; under `std` they run as a parallel map.
pub fn build_partitions(
    support: &Polytope,
    seeds: &[DVector<f64>],
) -> Result<(PartitionFamily, Vec<Ellipsoid>), DroError> {
    let fam = voronoi_partition(support, seeds)?;
    let fits = par_map(fam.cells(), |cell| solve_polytope_mve(cell).map(|(e, _)| e));
    let mut ells = Vec::with_capacity(fits.len());
    for f in fits {
        ells.push(f?);
    }
    Ok((fam, ells))
}

#[cfg(feature = "std")]
fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync) -> Vec<U> {
    use std::sync::Mutex;
    let results: Vec<Mutex<Option<U>>> = items.iter().map(|_| Mutex::new(None)).collect();
    let next = std::sync::atomic::AtomicUsize::new(0);
    let workers = std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1);
    let workers = workers.min(items.len()).max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let out = f(&items[i]);
                *results[i].lock().unwrap() = Some(out);
            });
        }
    });
    results.into_iter().map(|m| m.into_inner().unwrap().unwrap()).collect()
}

#[cfg(not(feature = "std"))]
fn par_map<T, U>(items: &[T], f: impl Fn(&T) -> U) -> Vec<U> {
    items.iter().map(f).collect()
}

/// Solve the piecewise-linear decision-rule SDP on the given partition and
/// bounding ellipsoids.
pub fn solve_pld(
    inst: &DroInstance,
    parts: &PartitionFamily,
    ells: &[Ellipsoid],
) -> Result<PldPolicy, DroError> {
    solve_pld_with(inst, parts, ells, true, &Settings::default())
}

/// Ablations of the decision-rule pipeline; see [`AblationMode`].
pub fn solve_ablation(
    inst: &DroInstance,
    parts: &PartitionFamily,
    ells: &[Ellipsoid],
    mode: AblationMode,
) -> Result<PldPolicy, DroError> {
    match mode {
        AblationMode::PiecewiseStatic => {
            solve_pld_with(inst, parts, ells, false, &Settings::default())
        }
        AblationMode::LinearSingle => {
            let owned;
            let support = if parts.parent().vertices().is_some() {
                parts.parent()
            } else {
                owned = parts.parent().clone().with_vertices()?;
                &owned
            };
            let seed = support
                .interior_point()
                .ok_or_else(|| DroError::Input(String::from("support has no vertices")))?;
            let single = voronoi_partition(support, &[seed])?;
            let (e, _) = solve_polytope_mve(&single.cells()[0])?;
            solve_pld_with(inst, &single, &[e], true, &Settings::default())
        }
        AblationMode::DoubledRadii => {
            let doubled: Vec<Ellipsoid> = ells
                .iter()
                .map(|e| e.scale_radius(2.0).expect("doubling keeps PD"))
                .collect();
            solve_pld_with(inst, parts, &doubled, true, &Settings::default())
        }
    }
}

pub fn solve_pld_with(
    inst: &DroInstance,
    parts: &PartitionFamily,
    ells: &[Ellipsoid],
    linear_term: bool,
    settings: &Settings,
) -> Result<PldPolicy, DroError> {
    inst.validate()?;
    let (n1, n2, k) = inst.dims();
    let nj = parts.len();
    if ells.len() != nj {
        return Err(DroError::Input(String::from("need one ellipsoid per cell")));
    }

    let mut prob = SdpProblem::new();
    let xv = if n1 > 0 { Some(prob.vector_var("x", n1)) } else { None };
    let alpha = prob.scalar_var("alpha");
    let beta = prob.vector_var("beta", k);
    let gamma_m = prob.sym_matrix_var("Gamma", k);
    // Gamma >= 0
    let gblk = prob.new_psd_block(k);
    for r in 0..k {
        for c in r..k {
            let slot = prob.slot_sym(gamma_m, r, c);
            prob.block_slot(gblk, r, c, slot, 1.0);
        }
    }

    struct CellVars {
        y_lin: Option<crate::sdp::VarRef>,
        y_aff: crate::sdp::VarRef,
    }
    let mut cells = Vec::with_capacity(nj);
    for j in 0..nj {
        let y_lin =
            if linear_term { Some(prob.vector_var(&alloc::format!("Y{j}"), n2 * k)) } else { None };
        let y_aff = prob.vector_var(&alloc::format!("y{j}"), n2);
        cells.push(CellVars { y_lin, y_aff });
    }

    // objective: c^T x + alpha + beta^T mu + tr(Gamma Sigma)
    let mut cost = AffineExpr::constant(0.0);
    if let Some(xv) = xv {
        for i in 0..n1 {
            if inst.c[i] != 0.0 {
                cost = cost.plus(&prob.expr_vec(xv, i).scaled(inst.c[i]));
            }
        }
    }
    cost = cost.plus(&prob.expr_scalar(alpha));
    for i in 0..k {
        if inst.mu[i] != 0.0 {
            cost = cost.plus(&prob.expr_vec(beta, i).scaled(inst.mu[i]));
        }
    }
    for r in 0..k {
        for c in 0..=r {
            let coef = if r == c { inst.sigma[(r, r)] } else { 2.0 * inst.sigma[(r, c)] };
            if coef != 0.0 {
                cost = cost.plus(&prob.expr_sym(gamma_m, r, c).scaled(coef));
            }
        }
    }
    prob.add_cost(&cost);

    // first-stage rows g^T x <= f
    if let Some(xv) = xv {
        for (g, f) in &inst.x_rows {
            let mut e = AffineExpr::constant(*f);
            for i in 0..n1 {
                if g[i] != 0.0 {
                    e = e.plus(&prob.expr_vec(xv, i).scaled(-g[i]));
                }
            }
            prob.add_ineq(e);
        }
    }

    // ellipsoid row matrices J_j (constant)
    let jmats: Vec<DMatrix<f64>> = ells
        .iter()
        .map(|e| {
            let a = e.a();
            let b = e.b();
            let mut m = DMatrix::<f64>::zeros(k + 1, k + 1);
            m.view_mut((0, 0), (k, k)).copy_from(&(a * a));
            let ab = a * b;
            for i in 0..k {
                m[(i, k)] = ab[i];
                m[(k, i)] = ab[i];
            }
            m[(k, k)] = b.norm_squared() - 1.0;
            m
        })
        .collect();

    // helper: entry expression of Y_j at (r, c)
    let y_entry = |prob: &SdpProblem, cv: &CellVars, r: usize, c: usize| -> Option<AffineExpr> {
        cv.y_lin.map(|yl| prob.expr_vec(yl, r * k + c))
    };

    for j in 0..nj {
        let cell = &parts.cells()[j];
        let lj = cell.rows();
        let gam_j = prob.vector_var_nonneg(&alloc::format!("gam{j}"), lj);
        let del_j = prob.scalar_var_nonneg(&alloc::format!("del{j}"));

        // grid of affine entries for the moment block
        let mut grid: Vec<Vec<AffineExpr>> =
            (0..=k).map(|_| (0..=k).map(|_| AffineExpr::constant(0.0)).collect()).collect();
        for r in 0..k {
            for c in r..k {
                grid[r][c] = prob.expr_sym(gamma_m, r, c);
            }
            grid[r][k] = prob.expr_vec(beta, r).scaled(0.5);
        }
        grid[k][k] = prob.expr_scalar(alpha);
        // - [[ (D^T Y + Y^T D)/2, (D^T y + Y^T d)/2 ], [ ., d^T y ]]
        let cv = &cells[j];
        for r in 0..k {
            for c in r..k {
                for row2 in 0..n2 {
                    if inst.d_mat[(row2, r)] != 0.0 {
                        if let Some(e) = y_entry(&prob, cv, row2, c) {
                            acc(&mut grid[r][c], &e, -0.5 * inst.d_mat[(row2, r)]);
                        }
                    }
                    if inst.d_mat[(row2, c)] != 0.0 {
                        if let Some(e) = y_entry(&prob, cv, row2, r) {
                            acc(&mut grid[r][c], &e, -0.5 * inst.d_mat[(row2, c)]);
                        }
                    }
                }
            }
            for row2 in 0..n2 {
                if inst.d_mat[(row2, r)] != 0.0 {
                    let e = prob.expr_vec(cv.y_aff, row2);
                    acc(&mut grid[r][k], &e, -0.5 * inst.d_mat[(row2, r)]);
                }
                if inst.d_vec[row2] != 0.0 {
                    if let Some(e) = y_entry(&prob, cv, row2, r) {
                        acc(&mut grid[r][k], &e, -0.5 * inst.d_vec[row2]);
                    }
                }
            }
        }
        for row2 in 0..n2 {
            if inst.d_vec[row2] != 0.0 {
                let e = prob.expr_vec(cv.y_aff, row2);
                acc(&mut grid[k][k], &e, -inst.d_vec[row2]);
            }
        }
        // + P_j(gamma) + delta J_j
        add_pj_and_quad(&mut grid, &prob, cell, gam_j, del_j, &jmats[j], k);
        emit_grid(&mut prob, grid, k);

        // recourse rows
        for (l, rr) in inst.rows.iter().enumerate() {
            let rho_jl = prob.vector_var_nonneg(&alloc::format!("rho{j}_{l}"), lj);
            let lam_jl = prob.scalar_var_nonneg(&alloc::format!("lam{j}_{l}"));
            let mut grid: Vec<Vec<AffineExpr>> =
                (0..=k).map(|_| (0..=k).map(|_| AffineExpr::constant(0.0)).collect()).collect();
            // [[ (W^T Y + Y^T W)/2, (W^T y + Y^T w)/2 ], [., w^T y]]
            for r in 0..k {
                for c in r..k {
                    for row2 in 0..n2 {
                        if rr.w[(row2, r)] != 0.0 {
                            if let Some(e) = y_entry(&prob, cv, row2, c) {
                                grid[r][c] = core::mem::take(&mut grid[r][c]).plus(&e.scaled(0.5 * rr.w[(row2, r)]));
                            }
                        }
                        if rr.w[(row2, c)] != 0.0 {
                            if let Some(e) = y_entry(&prob, cv, row2, r) {
                                grid[r][c] = core::mem::take(&mut grid[r][c]).plus(&e.scaled(0.5 * rr.w[(row2, c)]));
                            }
                        }
                    }
                }
                for row2 in 0..n2 {
                    if rr.w[(row2, r)] != 0.0 {
                        let e = prob.expr_vec(cv.y_aff, row2).scaled(0.5 * rr.w[(row2, r)]);
                        grid[r][k] = core::mem::take(&mut grid[r][k]).plus(&e);
                    }
                    if rr.w_vec[row2] != 0.0 {
                        if let Some(e) = y_entry(&prob, cv, row2, r) {
                            grid[r][k] = core::mem::take(&mut grid[r][k]).plus(&e.scaled(0.5 * rr.w_vec[row2]));
                        }
                    }
                }
            }
            for row2 in 0..n2 {
                if rr.w_vec[row2] != 0.0 {
                    let e = prob.expr_vec(cv.y_aff, row2).scaled(rr.w_vec[row2]);
                    grid[k][k] = core::mem::take(&mut grid[k][k]).plus(&e);
                }
            }
            // - M_l(x) = - [[0, T_l(x)/2],[., h_l(x)]]
            for r in 0..k {
                let mut te = AffineExpr::constant(rr.t_const[r]);
                if let Some(xv) = xv {
                    for i in 0..n1 {
                        if rr.t_lin[(r, i)] != 0.0 {
                            te = te.plus(&prob.expr_vec(xv, i).scaled(rr.t_lin[(r, i)]));
                        }
                    }
                }
                acc(&mut grid[r][k], &te, -0.5);
            }
            let mut he = AffineExpr::constant(rr.h_const);
            if let Some(xv) = xv {
                for i in 0..n1 {
                    if rr.h_lin[i] != 0.0 {
                        he = he.plus(&prob.expr_vec(xv, i).scaled(rr.h_lin[i]));
                    }
                }
            }
            acc(&mut grid[k][k], &he, -1.0);
            add_pj_and_quad(&mut grid, &prob, cell, rho_jl, lam_jl, &jmats[j], k);
            emit_grid(&mut prob, grid, k);
        }
    }

    let sol = sdp::solve(&prob, settings, None)?;
    match sol.status {
        Status::Optimal => {}
        Status::InfeasibleDetected => return Err(DroError::RestrictionInfeasible),
        other => return Err(DroError::Solver(other)),
    }
    let x = match xv {
        Some(xv) => prob.value_vec(&sol.values, xv),
        None => DVector::zeros(0),
    };
    let mut pieces = Vec::with_capacity(nj);
    for cv in &cells {
        let mut y_mat = DMatrix::<f64>::zeros(n2, k);
        if let Some(yl) = cv.y_lin {
            let flat = prob.value_vec(&sol.values, yl);
            for r in 0..n2 {
                for c in 0..k {
                    y_mat[(r, c)] = flat[r * k + c];
                }
            }
        }
        pieces.push((y_mat, prob.value_vec(&sol.values, cv.y_aff)));
    }
    Ok(PldPolicy { x, pieces, bound: sol.objective })
}


/// `e += scale * other` for grid entries.
fn acc(e: &mut AffineExpr, other: &AffineExpr, scale: f64) {
    *e = core::mem::take(e).plus(&other.clone().scaled(scale));
}

/// Add `P_j(rho) + lam * Jmat` into an affine entry grid.
fn add_pj_and_quad(
    grid: &mut [Vec<AffineExpr>],
    prob: &SdpProblem,
    cell: &Polytope,
    rho: crate::sdp::VarRef,
    lam: crate::sdp::VarRef,
    jmat: &DMatrix<f64>,
    k: usize,
) {
    let lj = cell.rows();
    for r in 0..k {
        for row in 0..lj {
            let v = 0.5 * cell.s()[(row, r)];
            if v != 0.0 {
                grid[r][k] = core::mem::take(&mut grid[r][k]).plus(&prob.expr_vec(rho, row).scaled(v));
            }
        }
    }
    for row in 0..lj {
        if cell.t()[row] != 0.0 {
            grid[k][k] =
                core::mem::take(&mut grid[k][k]).plus(&prob.expr_vec(rho, row).scaled(-cell.t()[row]));
        }
    }
    for r in 0..=k {
        for c in r..=k {
            if jmat[(r, c)] != 0.0 {
                grid[r][c] =
                    core::mem::take(&mut grid[r][c]).plus(&prob.expr_scalar(lam).scaled(jmat[(r, c)]));
            }
        }
    }
}

fn emit_grid(prob: &mut SdpProblem, grid: Vec<Vec<AffineExpr>>, k: usize) {
    let blk = prob.new_psd_block(k + 1);
    for (r, row) in grid.into_iter().enumerate() {
        for (c, e) in row.into_iter().enumerate() {
            if c < r {
                continue;
            }
            prob.block_affine(blk, r, c, &e);
        }
    }
}

/// Max recourse-constraint violation of a policy over sampled support
/// points (feasibility spot check).
pub fn policy_feasibility_violation(
    inst: &DroInstance,
    parts: &PartitionFamily,
    policy: &PldPolicy,
    samples_per_cell: usize,
    seed: u64,
) -> f64 {
    let mut rng = Rng64::new(seed).fork(0xfea5);
    let k = inst.support.dim();
    let mut worst = f64::NEG_INFINITY;
    for (j, cell) in parts.cells().iter().enumerate() {
        let verts = match cell.vertices() {
            Some(v) => v.to_vec(),
            None => match crate::geometry::enumerate_vertices(cell) {
                Ok(v) => v,
                Err(_) => continue,
            },
        };
        let mut lo = DVector::from_element(k, f64::INFINITY);
        let mut hi = DVector::from_element(k, f64::NEG_INFINITY);
        for v in &verts {
            for i in 0..k {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        let (y_mat, y_aff) = &policy.pieces[j];
        let mut accepted = 0usize;
        let mut attempts = 0usize;
        while accepted < samples_per_cell && attempts < samples_per_cell * 200 {
            attempts += 1;
            let xi = DVector::from_fn(k, |i, _| rng.uniform_in(lo[i], hi[i]));
            if !cell.contains(&xi, 0.0).unwrap_or(false) {
                continue;
            }
            accepted += 1;
            let y = y_mat * &xi + y_aff;
            for rr in &inst.rows {
                let lhs = (&rr.t_const + &rr.t_lin * &policy.x).dot(&xi)
                    + rr.h_const
                    + rr.h_lin.dot(&policy.x);
                let rhs = (&rr.w * &xi + &rr.w_vec).dot(&y);
                worst = worst.max(lhs - rhs);
            }
        }
    }
    worst
}

/// Risk-averse multi-product inventory instance: `n` products, uncertainty
/// `[demand; stockout cost]`, recourse `[cvar-slack; excess; shortfall]`,
/// worst-case CVaR objective at the 5% level. Demand means are drawn
/// uniform on [0, 2]; the second-moment bound uses a random correlation
/// built from a normalized Gram matrix.
pub fn generate_inventory_instance(n: usize, seed: u64) -> DroInstance {
    let k = 2 * n;
    let n1 = n + 1; // [x; kappa]
    let n2 = 2 * n + 1; // [tau; y1; y2]
    let eps = 0.05;
    let budget = 30.0;
    let holding = DVector::<f64>::from_element(n, 1.0);

    let mut rng = Rng64::new(seed).fork(0x1d7e);
    let mu_xi = DVector::from_fn(n, |_, _| rng.uniform_in(0.0, 2.0));
    let mu_s = DVector::<f64>::from_element(n, 10.0);
    let mut mu = DVector::<f64>::zeros(k);
    mu.rows_mut(0, n).copy_from(&mu_xi);
    mu.rows_mut(n, n).copy_from(&mu_s);
    let mut sigma_vec = DVector::<f64>::zeros(k);
    for i in 0..n {
        sigma_vec[i] = mu_xi[i] / 4.0;
        sigma_vec[n + i] = 0.5;
    }
    // random correlation: normalized Gram of a Gaussian matrix
    let gmat = DMatrix::<f64>::from_fn(k, k, |_, _| rng.normal());
    let gram = &gmat * gmat.transpose();
    let mut corr = DMatrix::<f64>::zeros(k, k);
    for r in 0..k {
        for c in 0..k {
            corr[(r, c)] = gram[(r, c)] / fp::sqrt(gram[(r, r)] * gram[(c, c)]);
        }
    }
    let mut sigma = DMatrix::<f64>::zeros(k, k);
    for r in 0..k {
        for c in 0..k {
            sigma[(r, c)] = sigma_vec[r] * corr[(r, c)] * sigma_vec[c] + mu[r] * mu[c];
        }
    }
    crate::linalg::symmetrize(&mut sigma);

    let mut lo = DVector::<f64>::zeros(k);
    let mut hi = DVector::<f64>::zeros(k);
    for i in 0..n {
        lo[i] = 0.0;
        hi[i] = 10.0;
        lo[n + i] = 8.0;
        hi[n + i] = 12.0;
    }
    let support = Polytope::box_volume(&lo, &hi).expect("box");

    let mut c = DVector::<f64>::zeros(n1);
    c[n] = 1.0; // kappa
    let mut x_rows = Vec::new();
    for i in 0..n {
        let mut g = DVector::<f64>::zeros(n1);
        g[i] = -1.0;
        x_rows.push((g, 0.0)); // x_i >= 0
    }
    let mut g = DVector::<f64>::zeros(n1);
    for i in 0..n {
        g[i] = 1.0;
    }
    x_rows.push((g, budget)); // e^T x <= B

    let d_mat = DMatrix::<f64>::zeros(n2, k);
    let mut d_vec = DVector::<f64>::zeros(n2);
    d_vec[0] = 1.0 / eps; // objective carries tau / eps

    let mut rows = Vec::new();
    // tau >= 0
    let mut r = RecourseRow::constant(k, n1, n2);
    r.w_vec[0] = 1.0;
    rows.push(r);
    // tau >= g^T y1 + s^T y2 - kappa: random stockout costs enter W
    let mut r = RecourseRow::constant(k, n1, n2);
    r.w_vec[0] = 1.0;
    for i in 0..n {
        r.w_vec[1 + i] = -holding[i];
        r.w[(1 + n + i, n + i)] = -1.0; // -s_i * y2_i
    }
    r.h_lin[n] = -1.0; // -kappa
    rows.push(r);
    for i in 0..n {
        // y1_i >= 0
        let mut r = RecourseRow::constant(k, n1, n2);
        r.w_vec[1 + i] = 1.0;
        rows.push(r);
    }
    for i in 0..n {
        // y2_i >= 0
        let mut r = RecourseRow::constant(k, n1, n2);
        r.w_vec[1 + n + i] = 1.0;
        rows.push(r);
    }
    for i in 0..n {
        // y1_i >= x_i - xi_i
        let mut r = RecourseRow::constant(k, n1, n2);
        r.t_const[i] = -1.0;
        r.h_lin[i] = 1.0;
        r.w_vec[1 + i] = 1.0;
        rows.push(r);
    }
    for i in 0..n {
        // y2_i >= xi_i - x_i
        let mut r = RecourseRow::constant(k, n1, n2);
        r.t_const[i] = 1.0;
        r.h_lin[i] = -1.0;
        r.w_vec[1 + n + i] = 1.0;
        rows.push(r);
    }

    DroInstance { c, x_rows, d_mat, d_vec, rows, support, mu, sigma }
}

/// Single-partition instance whose only feasible rule is `y(xi) = xi`; the
/// bound equals the squared-radius parameter of the bounding ball.
pub fn example_identity_rule(k: usize, r: f64) -> Result<(DroInstance, PartitionFamily, Vec<Ellipsoid>), DroError> {
    if r < 1.0 {
        return Err(DroError::Input(String::from("the ball must cover the unit ball: r >= 1")));
    }
    let half = 0.5 / fp::sqrt(k as f64);
    let support = Polytope::box_volume(
        &DVector::from_element(k, -half),
        &DVector::from_element(k, half),
    )?
    .with_vertices()?;
    let n1 = 1; // tau
    let n2 = k;
    let mut rows = Vec::new();
    // xi^T y <= tau
    let mut row = RecourseRow::constant(k, n1, n2);
    row.h_lin[0] = -1.0;
    for i in 0..k {
        row.w[(i, i)] = -1.0;
    }
    rows.push(row);
    for i in 0..k {
        // y_i >= xi_i
        let mut row = RecourseRow::constant(k, n1, n2);
        row.t_const[i] = 1.0;
        row.w_vec[i] = 1.0;
        rows.push(row);
        // y_i <= xi_i
        let mut row = RecourseRow::constant(k, n1, n2);
        row.t_const[i] = -1.0;
        row.w_vec[i] = -1.0;
        rows.push(row);
    }
    let mu = DVector::<f64>::zeros(k);
    let sigma = DMatrix::<f64>::identity(k, k) * 1e-6;
    let inst = DroInstance {
        c: DVector::from_element(1, 1.0),
        x_rows: Vec::new(),
        d_mat: DMatrix::zeros(n2, k),
        d_vec: DVector::zeros(n2),
        rows,
        support: support.clone(),
        mu,
        sigma,
    };
    let seed = DVector::<f64>::zeros(k);
    let parts = voronoi_partition(&support, &[seed])?;
    // bounding ball {xi^T xi <= r}
    let a = DMatrix::<f64>::identity(k, k) / fp::sqrt(r);
    let ell = Ellipsoid::new(a, DVector::zeros(k))?;
    Ok((inst, parts, alloc::vec![ell]))
}

/// Hypercube instance `1 <= (xi + e)^T y <= tau` whose bound follows the
/// three-branch curve in the inflation `s` of the bounding ellipsoid
/// `{||xi - e/2||^2 <= K(1+s)/4}`.
pub fn example_inflation(
    k: usize,
    s: f64,
) -> Result<(DroInstance, PartitionFamily, Vec<Ellipsoid>), DroError> {
    if s < 0.0 {
        return Err(DroError::Input(String::from("inflation must be nonnegative")));
    }
    let support = Polytope::box_volume(&DVector::zeros(k), &DVector::from_element(k, 1.0))?
        .with_vertices()?;
    let n1 = 1;
    let n2 = k;
    let mut rows = Vec::new();
    // (xi + e)^T y >= 1
    let mut row = RecourseRow::constant(k, n1, n2);
    row.h_const = 1.0;
    for i in 0..k {
        row.w[(i, i)] = 1.0;
        row.w_vec[i] = 1.0;
    }
    rows.push(row);
    // (xi + e)^T y <= tau
    let mut row = RecourseRow::constant(k, n1, n2);
    row.h_lin[0] = -1.0;
    for i in 0..k {
        row.w[(i, i)] = -1.0;
        row.w_vec[i] = -1.0;
    }
    rows.push(row);
    let mu = DVector::<f64>::from_element(k, 0.5);
    let sigma = &mu * mu.transpose() + DMatrix::<f64>::identity(k, k) * 1e-6;
    let inst = DroInstance {
        c: DVector::from_element(1, 1.0),
        x_rows: Vec::new(),
        d_mat: DMatrix::zeros(n2, k),
        d_vec: DVector::zeros(n2),
        rows,
        support: support.clone(),
        mu,
        sigma,
    };
    let seed = DVector::<f64>::from_element(k, 0.5);
    let parts = voronoi_partition(&support, &[seed])?;
    let radius = fp::sqrt(k as f64 * (1.0 + s) / 4.0);
    let a = DMatrix::<f64>::identity(k, k) / radius;
    let b = -&a * DVector::<f64>::from_element(k, 0.5);
    let ell = Ellipsoid::new(a, b)?;
    Ok((inst, parts, alloc::vec![ell]))
}

/// Closed-form bound of [`example_inflation`]: `9/(8-s)` on [0, 2],
/// `1 + s/4` on [2, 4], and 2 beyond.
pub fn example_inflation_curve(s: f64) -> f64 {
    if s <= 2.0 {
        9.0 / (8.0 - s)
    } else if s <= 4.0 {
        1.0 + s / 4.0
    } else {
        2.0
    }
}
