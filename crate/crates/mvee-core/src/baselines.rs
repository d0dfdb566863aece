//! Baseline methods for circumscribing ellipsoids: scaled inscribed
//! ellipsoid (primal and dual), S-procedure, the reduced KTT containment
//! conditions, point-set rounding, and exact constraint generation.

use alloc::string::String;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::fp;
use crate::geometry::{enumerate_vertices, Ellipsoid, Polytope, QuadSet};
use crate::linalg;
use crate::mve::MveError;
use crate::sdp::{self, AffineExpr, SdpProblem, Settings, Status};

/// Inscribed ellipsoid `{Bu + d : ||u|| <= 1}` with `B` symmetric PD.
#[derive(Debug, Clone, PartialEq)]
pub struct InscribedEllipsoid {
    pub b: DMatrix<f64>,
    pub d: DVector<f64>,
}

impl InscribedEllipsoid {
    /// Max violation of `||B S_j|| + S_j^T d <= t_j` over rows.
    pub fn max_row_violation(&self, p: &Polytope) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for j in 0..p.rows() {
            let sj: DVector<f64> = p.s().row(j).transpose();
            let v = (&self.b * &sj).norm() + sj.dot(&self.d) - p.t()[j];
            worst = worst.max(v);
        }
        worst
    }
}

/// Dual pair of the scaled-inscribed-ellipsoid program: `S^T rho = 0`,
/// `||Lambda_j|| <= rho_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmvieDual {
    pub lam: DMatrix<f64>,
    pub rho: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct SmvieSolution {
    /// The scaled (outer) ellipsoid in `(A, b)` form.
    pub outer: Ellipsoid,
    /// Shape matrix of the outer ellipsoid, `K * inscribed.b` by
    /// construction (bitwise).
    pub outer_shape: DMatrix<f64>,
    pub inscribed: InscribedEllipsoid,
    pub dual: SmvieDual,
    /// log Vol of the outer ellipsoid per the primal program.
    pub primal_objective: f64,
    /// Same quantity per the dual program.
    pub dual_objective: f64,
}

/// Maximum-volume inscribed ellipsoid scaled by the dimension about its
/// center. Solves the primal (SOC rows `||B S_j|| + K S_j^T d <= K t_j`)
/// and the Lagrange dual, and returns both solutions.
pub fn solve_smvie(p: &Polytope) -> Result<SmvieSolution, MveError> {
    solve_smvie_with(p, &Settings::default())
}

pub fn solve_smvie_with(p: &Polytope, settings: &Settings) -> Result<SmvieSolution, MveError> {
    let k = p.dim();
    let j = p.rows();
    let kf = k as f64;

    // primal: sup log det Bt  s.t.  ||Bt s_j|| <= K (t_j - s_j^T d)
    let mut prim = SdpProblem::new();
    let bt = prim.sym_matrix_var("B", k);
    let d = prim.vector_var("d", k);
    prim.set_logdet_objective(bt)?;
    for row in 0..j {
        let sj: DVector<f64> = p.s().row(row).transpose();
        let u: Vec<AffineExpr> = (0..k)
            .map(|r| {
                let mut e = AffineExpr::constant(0.0);
                for c in 0..k {
                    if sj[c] != 0.0 {
                        e = e.plus(&prim.expr_sym(bt, r, c).scaled(sj[c]));
                    }
                }
                e
            })
            .collect();
        let mut w = AffineExpr::constant(kf * p.t()[row]);
        for c in 0..k {
            if sj[c] != 0.0 {
                w = w.plus(&prim.expr_vec(d, c).scaled(-kf * sj[c]));
            }
        }
        prim.add_soc(&u, &w);
    }
    let verts: Vec<DVector<f64>> = match p.vertices() {
        Some(v) => v.to_vec(),
        None => enumerate_vertices(p)?,
    };
    let mut center = DVector::<f64>::zeros(k);
    for v in &verts {
        center += v;
    }
    center /= verts.len() as f64;
    let mut margin = f64::INFINITY;
    for row in 0..j {
        let sj: DVector<f64> = p.s().row(row).transpose();
        let m = kf * (p.t()[row] - sj.dot(&center)) / sj.norm().max(1e-12);
        margin = margin.min(m);
    }
    let eps0 = (0.5 * margin).max(1e-6);
    let mut warm = alloc::vec![0.0; prim.n_slots()];
    for i in 0..k {
        warm[prim.slot_sym(bt, i, i)] = eps0;
        warm[prim.slot_vec(d, i)] = center[i];
    }
    let psol = sdp::solve(&prim, settings, Some(&warm))?;
    if psol.status != Status::Optimal {
        return Err(MveError::Solver(psol.status));
    }
    let btv = prim.value_sym(&psol.values, bt);
    let dv = prim.value_vec(&psol.values, d);
    let b_ins = &btv / kf;
    let outer_shape = &b_ins * kf;
    let a = linalg::inv_pd(&outer_shape)
        .ok_or_else(|| MveError::Input(String::from("inscribed shape is singular")))?;
    let bvec = -&a * &dv;
    let outer = Ellipsoid::new(a, bvec)?;
    let primal_objective = linalg::logdet_pd(&outer_shape)
        .ok_or_else(|| MveError::Input(String::from("inscribed shape is singular")))?;

    // dual: inf K rho^T t - K - log det G,  G = -(S^T Lam + Lam^T S)/2,
    // S^T rho = 0, ||Lam_j|| <= rho_j
    let mut dual = SdpProblem::new();
    let g = dual.sym_matrix_var("G", k);
    let rho = dual.vector_var("rho", j);
    let mut lam_rows = Vec::with_capacity(j);
    for row in 0..j {
        lam_rows.push(dual.vector_var(&alloc::format!("lam{row}"), k));
    }
    dual.set_logdet_objective(g)?;
    let mut cost = AffineExpr::constant(-kf);
    for row in 0..j {
        cost = cost.plus(&dual.expr_vec(rho, row).scaled(kf * p.t()[row]));
    }
    dual.add_cost(&cost);
    // G == -(S^T Lam + Lam^T S)/2
    for r in 0..k {
        for c in r..k {
            let mut e = dual.expr_sym(g, r, c);
            for row in 0..j {
                let src = p.s()[(row, r)];
                let scc = p.s()[(row, c)];
                if scc != 0.0 {
                    e = e.plus(&dual.expr_vec(lam_rows[row], r).scaled(0.5 * scc));
                }
                if src != 0.0 {
                    e = e.plus(&dual.expr_vec(lam_rows[row], c).scaled(0.5 * src));
                }
            }
            dual.add_eq(e);
        }
    }
    // S^T rho == 0
    for c in 0..k {
        let mut e = AffineExpr::constant(0.0);
        for row in 0..j {
            if p.s()[(row, c)] != 0.0 {
                e = e.plus(&dual.expr_vec(rho, row).scaled(p.s()[(row, c)]));
            }
        }
        dual.add_eq(e);
    }
    for row in 0..j {
        let u: Vec<AffineExpr> = (0..k).map(|c| dual.expr_vec(lam_rows[row], c)).collect();
        let w = dual.expr_vec(rho, row);
        dual.add_soc(&u, &w);
    }
    let eps_l = 0.1;
    let mut dwarm = alloc::vec![0.0; dual.n_slots()];
    for row in 0..j {
        for c in 0..k {
            dwarm[dual.slot_vec(lam_rows[row], c)] = -eps_l * p.s()[(row, c)];
        }
        dwarm[dual.slot_vec(rho, row)] = 1.0;
    }
    let sts = p.s().transpose() * p.s();
    for r in 0..k {
        for c in 0..=r {
            dwarm[dual.slot_sym(g, r, c)] = eps_l * sts[(r, c)];
        }
    }
    let dsol = sdp::solve(&dual, settings, Some(&dwarm))?;
    if dsol.status != Status::Optimal {
        return Err(MveError::Solver(dsol.status));
    }
    let mut lam = DMatrix::<f64>::zeros(j, k);
    for row in 0..j {
        let lr = dual.value_vec(&dsol.values, lam_rows[row]);
        for c in 0..k {
            lam[(row, c)] = lr[c];
        }
    }
    let rhov = dual.value_vec(&dsol.values, rho);
    let gmat = dual.value_sym(&dsol.values, g);
    let dual_objective = kf * rhov.dot(p.t()) - kf
        - linalg::logdet_pd(&gmat)
            .ok_or_else(|| MveError::Input(String::from("dual G is singular")))?;

    Ok(SmvieSolution {
        outer,
        outer_shape,
        inscribed: InscribedEllipsoid { b: b_ins, d: dv },
        dual: SmvieDual { lam, rho: rhov },
        primal_objective,
        dual_objective,
    })
}

/// S-procedure circumscribing ellipsoid for a set with at least one
/// quadratic row.
pub fn solve_sproc(q: &QuadSet) -> Result<Ellipsoid, MveError> {
    solve_sproc_with(q, &Settings::default())
}

pub fn solve_sproc_with(q: &QuadSet, settings: &Settings) -> Result<Ellipsoid, MveError> {
    if q.quads().is_empty() {
        return Err(MveError::Input(String::from(
            "the S-procedure requires at least one quadratic row",
        )));
    }
    let k = q.dim();
    let j = q.base().rows();
    let ni = q.quads().len();
    let mut prob = SdpProblem::new();
    let a = prob.sym_matrix_var("A", k);
    let b = prob.vector_var("b", k);
    let mu = if j > 0 { Some(prob.vector_var_nonneg("mu", j)) } else { None };
    let lam = prob.vector_var_nonneg("lambda", ni);
    prob.set_logdet_objective(a)?;
    let blk = prob.new_psd_block(2 * k + 1);
    prob.block_const(blk, k, k, 1.0);
    if let Some(mu) = mu {
        for row in 0..j {
            let muslot = prob.slot_vec(mu, row);
            for c in 0..k {
                let v = 0.5 * q.base().s()[(row, c)];
                if v != 0.0 {
                    prob.block_slot(blk, c, k, muslot, v);
                }
            }
            prob.block_slot(blk, k, k, muslot, -q.base().t()[row]);
        }
    }
    for r in 0..k {
        for c in r..k {
            let slot = prob.slot_sym(a, r, c);
            prob.block_slot(blk, r, k + 1 + c, slot, 1.0);
            if r != c {
                prob.block_slot(blk, c, k + 1 + r, slot, 1.0);
            }
        }
        let bslot = prob.slot_vec(b, r);
        prob.block_slot(blk, k, k + 1 + r, bslot, 1.0);
        prob.block_const(blk, k + 1 + r, k + 1 + r, 1.0);
    }
    for (i, (qm, qv)) in q.quads().iter().enumerate() {
        let lslot = prob.slot_vec(lam, i);
        let q2 = qm.transpose() * qm;
        let qq = qm.transpose() * qv;
        for r in 0..k {
            for c in r..k {
                if q2[(r, c)] != 0.0 {
                    prob.block_slot(blk, r, c, lslot, q2[(r, c)]);
                }
            }
            if qq[r] != 0.0 {
                prob.block_slot(blk, r, k, lslot, qq[r]);
            }
        }
        prob.block_slot(blk, k, k, lslot, qv.norm_squared() - 1.0);
    }
    // warm start from the first PD quadratic row, shrunk toward its center
    let mut warm = alloc::vec![0.0; prob.n_slots()];
    let (q0, qv0) = &q.quads()[0];
    let q0s = 0.5 * (q0 + q0.transpose());
    let theta = 0.9;
    if linalg::is_pd(&q0s) {
        for r in 0..k {
            for c in 0..=r {
                warm[prob.slot_sym(a, r, c)] = theta * q0s[(r, c)];
            }
            warm[prob.slot_vec(b, r)] = theta * qv0[r];
        }
        warm[prob.slot_vec(lam, 0)] = theta;
    } else {
        for r in 0..k {
            warm[prob.slot_sym(a, r, r)] = 1e-3;
        }
    }
    let sol = sdp::solve(&prob, settings, Some(&warm))?;
    if sol.status != Status::Optimal {
        return Err(MveError::Solver(sol.status));
    }
    let av = prob.value_sym(&sol.values, a);
    let bv = prob.value_vec(&sol.values, b);
    Ok(Ellipsoid::new(av, bv)?)
}

/// Reduced KTT containment conditions: J PSD multiplier blocks of size
/// K+1, the identity-vs-sum LMI, and K matrix equalities coupling the
/// multipliers to the rows of A. The log-det objective runs through a
/// hypograph variable `T <= A` so the solve can start from A = 0.
pub fn solve_ktt(p: &Polytope) -> Result<Ellipsoid, MveError> {
    solve_ktt_with(p, &Settings::default())
}

pub fn solve_ktt_with(p: &Polytope, settings: &Settings) -> Result<Ellipsoid, MveError> {
    let k = p.dim();
    let j = p.rows();
    let mut prob = SdpProblem::new();
    let t_h = prob.sym_matrix_var("T", k);
    let a = prob.sym_matrix_var("A", k);
    let b = prob.vector_var("b", k);
    let mut cs = Vec::with_capacity(j);
    for row in 0..j {
        cs.push(prob.sym_matrix_var(&alloc::format!("C{row}"), k + 1));
    }
    prob.set_logdet_objective(t_h)?;
    // T <= A
    let hyp = prob.new_psd_block(k);
    for r in 0..k {
        for c in r..k {
            let sa = prob.slot_sym(a, r, c);
            let st = prob.slot_sym(t_h, r, c);
            prob.block_slot(hyp, r, c, sa, 1.0);
            prob.block_slot(hyp, r, c, st, -1.0);
        }
    }
    // C_j >= 0
    for row in 0..j {
        let blk = prob.new_psd_block(k + 1);
        for r in 0..=k {
            for c in r..=k {
                let slot = prob.slot_sym(cs[row], r, c);
                prob.block_slot(blk, r, c, slot, 1.0);
            }
        }
    }
    // [[I, b],[b^T, 1]] - sum_j t_j C_j >= 0
    let top = prob.new_psd_block(k + 1);
    for r in 0..k {
        prob.block_const(top, r, r, 1.0);
        let bslot = prob.slot_vec(b, r);
        prob.block_slot(top, r, k, bslot, 1.0);
    }
    prob.block_const(top, k, k, 1.0);
    for row in 0..j {
        let tj = p.t()[row];
        if tj != 0.0 {
            for r in 0..=k {
                for c in r..=k {
                    let slot = prob.slot_sym(cs[row], r, c);
                    prob.block_slot(top, r, c, slot, -tj);
                }
            }
        }
    }
    // for every k: [[0, A_k:],[A_k:^T, 0]] + sum_j S_jk C_j == 0
    for kk in 0..k {
        for r in 0..=k {
            for c in r..=k {
                let mut e = AffineExpr::constant(0.0);
                if r < k && c == k {
                    e = e.plus(&prob.expr_sym(a, kk, r));
                }
                for row in 0..j {
                    let sjk = p.s()[(row, kk)];
                    if sjk != 0.0 {
                        e = e.plus(&prob.expr_sym(cs[row], r, c).scaled(sjk));
                    }
                }
                prob.add_eq(e);
            }
        }
    }
    let mut warm = alloc::vec![0.0; prob.n_slots()];
    for r in 0..k {
        warm[prob.slot_sym(t_h, r, r)] = 0.5;
    }
    let sol = sdp::solve(&prob, settings, Some(&warm))?;
    if sol.status != Status::Optimal {
        return Err(MveError::Solver(sol.status));
    }
    let av = prob.value_sym(&sol.values, a);
    let bv = prob.value_vec(&sol.values, b);
    Ok(Ellipsoid::new(av, bv)?)
}

/// Result of the point-set rounding algorithm.
#[derive(Debug, Clone)]
pub struct PointsMve {
    pub ellipsoid: Ellipsoid,
    /// Internal optimality measure at termination (<= eps on success).
    pub measure: f64,
    pub iterations: usize,
}

/// (1+eps)-approximate minimum-volume enclosing ellipsoid of a point set:
/// Frank-Wolfe coordinate ascent on the dual D-optimal design problem with
/// Wolfe away steps, uniform-weight initialization.
pub fn mve_of_points(points: &[DVector<f64>], eps: f64) -> Result<Ellipsoid, MveError> {
    Ok(mve_of_points_detailed(points, eps)?.ellipsoid)
}

pub fn mve_of_points_detailed(points: &[DVector<f64>], eps: f64) -> Result<PointsMve, MveError> {
    let npts = points.len();
    if npts == 0 {
        return Err(MveError::Input(String::from("empty point set")));
    }
    let k = points[0].len();
    if npts < k + 1 {
        return Err(MveError::Input(String::from("need at least K+1 points")));
    }
    let d1 = k + 1;
    let lifted: Vec<DVector<f64>> = points
        .iter()
        .map(|pt| DVector::from_fn(d1, |i, _| if i < k { pt[i] } else { 1.0 }))
        .collect();
    let mut u = DVector::<f64>::from_element(npts, 1.0 / npts as f64);

    let design = |u: &DVector<f64>| -> DMatrix<f64> {
        let mut m = DMatrix::<f64>::zeros(d1, d1);
        for (i, q) in lifted.iter().enumerate() {
            if u[i] > 0.0 {
                m.syger(u[i], q, q, 1.0);
            }
        }
        linalg::mirror_lower(&mut m);
        m
    };

    let mut minv = match linalg::inv_pd(&design(&u)) {
        Some(m) => m,
        None => {
            return Err(MveError::Input(String::from(
                "rank-deficient point set: no full-dimensional ellipsoid exists",
            )))
        }
    };

    let max_iters = 500_000usize;
    let mut measure = f64::INFINITY;
    let mut iters = 0usize;
    for it in 0..max_iters {
        iters = it;
        if it % 512 == 0 && it > 0 {
            // refresh the inverse against rank-1 drift
            minv = match linalg::inv_pd(&design(&u)) {
                Some(m) => m,
                None => break,
            };
        }
        let mut w_max = f64::NEG_INFINITY;
        let mut i_max = 0usize;
        let mut w_min = f64::INFINITY;
        let mut i_min = 0usize;
        for (i, q) in lifted.iter().enumerate() {
            let w = q.dot(&(&minv * q));
            if w > w_max {
                w_max = w;
                i_max = i;
            }
            if u[i] > 1e-14 && w < w_min {
                w_min = w;
                i_min = i;
            }
        }
        let d1f = d1 as f64;
        let eps_plus = w_max / d1f - 1.0;
        let eps_minus = 1.0 - w_min / d1f;
        measure = eps_plus.max(eps_minus);
        if measure <= eps {
            break;
        }
        if eps_plus >= eps_minus {
            let beta = (w_max - d1f) / (d1f * (w_max - 1.0));
            let q = &lifted[i_max];
            // u <- (1 - beta) u + beta e_i; M <- (1-beta) M + beta q q^T
            u *= 1.0 - beta;
            u[i_max] += beta;
            let c = 1.0 - beta;
            let mq = &minv * q;
            let denom = c + beta * q.dot(&mq);
            let mut upd = minv.clone();
            upd.syger(-beta / (c * denom), &mq, &mq, 1.0 / c);
            linalg::mirror_lower(&mut upd);
            minv = upd;
        } else {
            let cap = u[i_min] / (1.0 - u[i_min]).max(1e-300);
            let beta = ((d1f - w_min) / (d1f * (w_min - 1.0))).min(cap);
            if !(beta > 0.0) {
                break;
            }
            let q = &lifted[i_min];
            // u <- (1 + beta) u - beta e_i; M <- (1+beta) M - beta q q^T
            u *= 1.0 + beta;
            u[i_min] -= beta;
            if u[i_min] < 0.0 {
                u[i_min] = 0.0;
            }
            let c = 1.0 + beta;
            let mq = &minv * q;
            let denom = c - beta * q.dot(&mq);
            if denom.abs() < 1e-300 {
                break;
            }
            let mut upd = minv.clone();
            upd.syger(beta / (c * denom), &mq, &mq, 1.0 / c);
            linalg::mirror_lower(&mut upd);
            minv = upd;
        }
    }

    // center and shape from the final weights; scale so every input point
    // is inside
    let mut center = DVector::<f64>::zeros(k);
    for (i, pt) in points.iter().enumerate() {
        center += pt * u[i];
    }
    let mut cov = DMatrix::<f64>::zeros(k, k);
    for (i, pt) in points.iter().enumerate() {
        if u[i] > 0.0 {
            cov.syger(u[i], pt, pt, 1.0);
        }
    }
    cov.syger(-1.0, &center, &center, 1.0);
    linalg::mirror_lower(&mut cov);
    let cov_inv = linalg::inv_pd(&cov).ok_or_else(|| {
        MveError::Input(String::from("rank-deficient point set: degenerate design covariance"))
    })?;
    let mut gamma = 0.0f64;
    for pt in points {
        let dv = pt - &center;
        gamma = gamma.max(dv.dot(&(&cov_inv * &dv)));
    }
    let shape = &cov_inv / gamma;
    let a = linalg::sym_sqrt(&shape);
    let b = -&a * &center;
    Ok(PointsMve { ellipsoid: Ellipsoid::new(a, b)?, measure, iterations: iters })
}

/// Exact separation at desk scale: the max of the convex gauge over the
/// polytope is attained at a vertex.
pub fn separation_oracle(p: &Polytope, e: &Ellipsoid) -> Result<(DVector<f64>, f64), MveError> {
    let owned;
    let verts: &[DVector<f64>] = match p.vertices() {
        Some(v) => v,
        None => {
            owned = enumerate_vertices(p)?;
            &owned
        }
    };
    let mut best = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    for (i, v) in verts.iter().enumerate() {
        let g = e.gauge(v);
        if g > best_v {
            best_v = g;
            best = i;
        }
    }
    Ok((verts[best].clone(), best_v))
}

/// Exact circumscribing ellipsoid by constraint generation: grow a point
/// set from a farthest-point seed, round it, and add the worst vertex
/// until the separation oracle reports violation <= 1 + tol.
pub fn solve_exact_constraint_generation(p: &Polytope, tol: f64) -> Result<Ellipsoid, MveError> {
    solve_exact_cg_detailed(p, tol, 1e-8).map(|(e, _)| e)
}

/// Returns the ellipsoid and the number of generation rounds.
pub fn solve_exact_cg_detailed(
    p: &Polytope,
    tol: f64,
    points_eps: f64,
) -> Result<(Ellipsoid, usize), MveError> {
    let owned;
    let verts: &[DVector<f64>] = match p.vertices() {
        Some(v) => v,
        None => {
            owned = enumerate_vertices(p)?;
            &owned
        }
    };
    let k = p.dim();
    // greedy farthest-point seed of K+1 vertices
    let mut chosen: Vec<usize> = Vec::with_capacity(k + 1);
    chosen.push(0);
    while chosen.len() < (k + 1).min(verts.len()) {
        let mut best = usize::MAX;
        let mut best_d = f64::NEG_INFINITY;
        for (i, v) in verts.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            let dmin = chosen
                .iter()
                .map(|&c| (v - &verts[c]).norm())
                .fold(f64::INFINITY, f64::min);
            if dmin > best_d {
                best_d = dmin;
                best = i;
            }
        }
        chosen.push(best);
    }
    let mut active: Vec<DVector<f64>> = chosen.iter().map(|&i| verts[i].clone()).collect();
    let cap = verts.len() + 1;
    for round in 0..cap {
        let e = match mve_of_points(&active, points_eps) {
            Ok(e) => e,
            Err(_) if active.len() < verts.len() => {
                // degenerate seed (coplanar choice); widen it
                for v in verts {
                    if !active.iter().any(|w| (w - v).amax() < 1e-12) {
                        active.push(v.clone());
                        break;
                    }
                }
                continue;
            }
            Err(err) => return Err(err),
        };
        let (worst, viol) = separation_oracle(p, &e)?;
        if viol <= 1.0 + tol {
            return Ok((e, round));
        }
        if active.iter().any(|w| (w - &worst).amax() < 1e-12) {
            // oracle returned a point we already cover: numerical floor
            return Ok((e, round));
        }
        active.push(worst);
    }
    Err(MveError::Input(String::from("constraint generation failed to terminate")))
}

/// Relative radius suboptimality of `e` against a reference (exact) one.
pub fn radius_suboptimality(e: &Ellipsoid, exact: &Ellipsoid) -> f64 {
    fp::powf(e.volume() / exact.volume(), 1.0 / e.dim() as f64) - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mve::solve_polytope_mve;

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
    fn smvie_unit_square() {
        let p = unit_square().with_vertices().unwrap();
        let s = solve_smvie(&p).unwrap();
        // inscribed disk radius 1/2, scaled disk radius 1, volume 1
        assert!((s.outer.volume() - 1.0).abs() < 1e-4, "vol {}", s.outer.volume());
        assert!((s.inscribed.b[(0, 0)] - 0.5).abs() < 1e-4);
        assert!(s.inscribed.max_row_violation(&p) <= 1e-8);
        assert!((s.primal_objective - s.dual_objective).abs() < 1e-5);
        // scale law is an identity of the construction
        assert_eq!(s.outer_shape, &s.inscribed.b * 2.0);
        // dual feasibility
        assert!((p.s().transpose() * &s.dual.rho).amax() < 1e-8);
        for j in 0..p.rows() {
            assert!(s.dual.lam.row(j).norm() <= s.dual.rho[j] + 1e-9);
        }
    }

    #[test]
    fn smvie_simplex_equals_exact() {
        let p = simplex2().with_vertices().unwrap();
        let s = solve_smvie(&p).unwrap();
        let expect = 2.0 / (3.0 * 3f64.sqrt());
        assert!(
            (s.outer.volume() - expect).abs() < 1e-4,
            "vol {} vs {}",
            s.outer.volume(),
            expect
        );
    }

    #[test]
    fn smvie_dual_lifts_to_certificate() {
        let p = unit_square().with_vertices().unwrap();
        let s = solve_smvie(&p).unwrap();
        let (e, cert) = crate::mve::lift_smvie_certificate(&p, &s.dual.lam, &s.dual.rho).unwrap();
        let rep = crate::mve::verify_certificate_polytope(&p, &e, &cert);
        assert!(rep.pass, "{rep:?}");
        assert!(e.volume() <= s.outer.volume() * (1.0 + 1e-6));
        // -log det A <= dual objective
        let neg_ld = -linalg::logdet_pd(e.a()).unwrap();
        assert!(neg_ld <= s.dual_objective + 1e-7);
    }

    #[test]
    fn sproc_fixed_point_on_redundant_row() {
        let p = unit_square().with_vertices().unwrap();
        let s = solve_smvie(&p).unwrap();
        let q = QuadSet::new(
            p.clone(),
            alloc::vec![(s.outer.a().clone(), s.outer.b().clone())],
            DVector::from_row_slice(&[0.5, 0.5]),
        )
        .unwrap();
        let e = solve_sproc(&q).unwrap();
        let da = (e.a() - s.outer.a()).norm();
        let db = (e.b() - s.outer.b()).norm();
        assert!(da + db < 1e-4, "drift {da} + {db}");
    }

    #[test]
    fn sproc_pure_ball_self_cover() {
        let base = Polytope::new(DMatrix::zeros(0, 2), DVector::zeros(0)).unwrap();
        let q = QuadSet::new(
            base,
            alloc::vec![(DMatrix::identity(2, 2), DVector::zeros(2))],
            DVector::zeros(2),
        )
        .unwrap();
        let e = solve_sproc(&q).unwrap();
        assert!((e.volume() - 1.0).abs() < 1e-6, "vol {}", e.volume());
        assert!(e.b().amax() < 1e-6);
    }

    #[test]
    fn sproc_requires_quadratic_row() {
        let q = QuadSet::new(
            unit_square(),
            alloc::vec![],
            DVector::from_row_slice(&[0.5, 0.5]),
        )
        .unwrap();
        assert!(matches!(solve_sproc(&q), Err(MveError::Input(_))));
    }

    #[test]
    fn sproc_two_balls_contains_intersection() {
        let base = Polytope::new(DMatrix::zeros(0, 2), DVector::zeros(0)).unwrap();
        let b1 = (DMatrix::identity(2, 2), DVector::zeros(2));
        let b2 = (DMatrix::identity(2, 2), DVector::from_row_slice(&[-1.0, 0.0]));
        let q = QuadSet::new(base, alloc::vec![b1, b2], DVector::from_row_slice(&[0.5, 0.0]))
            .unwrap();
        let e = solve_sproc(&q).unwrap();
        let mut rng = crate::rng::Rng64::new(77);
        let mut hits = 0;
        for _ in 0..10_000 {
            let x =
                DVector::from_row_slice(&[rng.uniform_in(-1.0, 2.0), rng.uniform_in(-1.5, 1.5)]);
            if q.contains(&x, 0.0).unwrap() {
                hits += 1;
                assert!(e.gauge(&x) <= 1.0 + 1e-6);
            }
        }
        assert!(hits > 500);
    }

    #[test]
    fn ktt_unit_square() {
        let p = unit_square().with_vertices().unwrap();
        let e = solve_ktt(&p).unwrap();
        assert!(e.volume() >= 0.5 - 1e-6 && e.volume() <= 0.55, "vol {}", e.volume());
        for v in p.vertices().unwrap() {
            assert!(e.gauge(v) <= 1.0 + 1e-6);
        }
    }

    #[test]
    fn ktt_simplex_near_exact() {
        let p = simplex2().with_vertices().unwrap();
        let e = solve_ktt(&p).unwrap();
        let exact = mve_of_points(p.vertices().unwrap(), 1e-8).unwrap();
        let sub = radius_suboptimality(&e, &exact);
        assert!((-1e-6..0.02).contains(&sub), "subopt {sub}");
    }

    #[test]
    fn points_mve_square_corners() {
        let pts: Vec<DVector<f64>> = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
            .iter()
            .map(|x| DVector::from_row_slice(x))
            .collect();
        let r = mve_of_points_detailed(&pts, 1e-6).unwrap();
        assert!(r.measure <= 1e-6);
        let e = &r.ellipsoid;
        assert!((e.volume() - 0.5).abs() < 1e-4, "vol {}", e.volume());
        let c = e.center();
        assert!((c[0] - 0.5).abs() < 1e-5 && (c[1] - 0.5).abs() < 1e-5);
        for p in &pts {
            assert!(e.gauge(p) <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn points_mve_simplex_steiner() {
        let pts: Vec<DVector<f64>> = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]
            .iter()
            .map(|x| DVector::from_row_slice(x))
            .collect();
        let e = mve_of_points(&pts, 1e-7).unwrap();
        let expect = 2.0 / (3.0 * 3f64.sqrt());
        assert!((e.volume() - expect).abs() < 1e-5, "vol {}", e.volume());
    }

    #[test]
    fn points_mve_hexagon_circumdisk() {
        let mut pts = Vec::new();
        for i in 0..6 {
            let th = core::f64::consts::PI / 3.0 * i as f64;
            pts.push(DVector::from_row_slice(&[2.0 * th.cos(), 2.0 * th.sin()]));
        }
        let e = mve_of_points(&pts, 1e-7).unwrap();
        assert!((e.volume() - 4.0).abs() < 1e-4, "vol {}", e.volume());
        assert!(e.center().amax() < 1e-5);
    }

    #[test]
    fn points_mve_rejects_flat_sets() {
        let pts: Vec<DVector<f64>> = [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]
            .iter()
            .map(|x| DVector::from_row_slice(x))
            .collect();
        assert!(mve_of_points(&pts, 1e-6).is_err());
    }

    #[test]
    fn separation_on_inscribed_disk() {
        let p = unit_square().with_vertices().unwrap();
        let e = Ellipsoid::ball(&DVector::from_row_slice(&[0.5, 0.5]), 0.5).unwrap();
        let (_, viol) = separation_oracle(&p, &e).unwrap();
        assert!((viol - 2.0).abs() < 1e-12);
        let exact =
            Ellipsoid::ball(&DVector::from_row_slice(&[0.5, 0.5]), 0.5f64.sqrt()).unwrap();
        let (_, viol) = separation_oracle(&p, &exact).unwrap();
        assert!((viol - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constraint_generation_simplex() {
        let p = simplex2().with_vertices().unwrap();
        let e = solve_exact_constraint_generation(&p, 1e-7).unwrap();
        let direct = mve_of_points(p.vertices().unwrap(), 1e-8).unwrap();
        assert!((e.volume() - direct.volume()).abs() <= 1e-5 * direct.volume());
    }

    #[test]
    fn constraint_generation_beats_approximations() {
        let p = unit_square().with_vertices().unwrap();
        let e_exact = solve_exact_constraint_generation(&p, 1e-7).unwrap();
        let (e_cop, _) = solve_polytope_mve(&p).unwrap();
        let s = solve_smvie(&p).unwrap();
        let e_ktt = solve_ktt(&p).unwrap();
        for other in [&e_cop, &s.outer, &e_ktt] {
            assert!(e_exact.volume() <= other.volume() * (1.0 + 1e-6));
        }
    }
}
