//! Path-following barrier solver for [`SdpProblem`].
//!
//! Minimizes `f(v) = -sum logdet X_v + c^T v` over the interior of the
//! constraint set by Newton-centering the composite
//! `f(v) + big_m * omega + mu * (barriers)` while `mu` shrinks
//! geometrically. `omega` is the phase-I shift: it pads every PSD block
//! and every linear slack, so the start point never needs to be feasible;
//! the big-M cost drives it to ~`mu / big_m` once the true interior is
//! reached. Linear equalities are eliminated up front by a null-space
//! basis, so the Newton system is unconstrained.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use super::{SdpError, SdpProblem, Settings, Solution, Status, VarKind, VarRef};
use crate::fp;
use crate::linalg;

/// Stage-level trace, enabled with `MVEE_SDP_TRACE=1` (std builds only).
#[cfg(feature = "std")]
fn trace(msg: impl FnOnce() -> alloc::string::String) {
    use std::sync::OnceLock;
    static ON: OnceLock<bool> = OnceLock::new();
    if *ON.get_or_init(|| std::env::var("MVEE_SDP_TRACE").ok().as_deref() == Some("1")) {
        std::eprintln!("[sdp] {}", msg());
    }
}

#[cfg(not(feature = "std"))]
fn trace(_msg: impl FnOnce() -> alloc::string::String) {}

struct Reduction {
    /// null-space basis of the equality system (None = no equalities)
    z: Option<DMatrix<f64>>,
    /// particular solution (start point projected onto the equalities)
    v0: DVector<f64>,
}

fn equality_system(p: &SdpProblem) -> (DMatrix<f64>, DVector<f64>) {
    let n = p.n_slots;
    let m = p.eqs.len();
    let mut e = DMatrix::zeros(m, n);
    let mut f = DVector::zeros(m);
    for (r, eq) in p.eqs.iter().enumerate() {
        for &(s, c) in &eq.terms {
            e[(r, s)] += c;
        }
        f[r] = -eq.constant;
    }
    (e, f)
}

fn reduce(p: &SdpProblem, warm: Option<&[f64]>) -> Result<Reduction, SdpError> {
    let n = p.n_slots;
    let mut v0 = match warm {
        Some(w) => {
            if w.len() != n {
                return Err(SdpError::WarmStartLength { expected: n, got: w.len() });
            }
            DVector::from_column_slice(w)
        }
        None => DVector::zeros(n),
    };
    let z = if p.eqs.is_empty() {
        None
    } else {
        let (e, f) = equality_system(p);
        let rhs = &f - &e * &v0;
        let corr = linalg::min_norm_solve(&e, &rhs, 1e-8)
            .ok_or(SdpError::EqualitiesInconsistent)?;
        v0 += corr;
        Some(linalg::null_space(&e, 1e-12))
    };
    Ok(Reduction { z, v0 })
}

/// Make sure every log-det variable is positive definite at the start,
/// patching free variables to the identity if the caller's start is not.
fn fix_logdet_start(p: &SdpProblem, red: &mut Reduction) -> Result<(), SdpError> {
    let mut patched = false;
    for &vid in &p.logdet {
        let vr = VarRef(vid);
        let x = p.value_sym(red.v0.as_slice(), vr);
        if linalg::logdet_pd(&x).is_none() {
            let dim = match p.vars[vid].kind {
                VarKind::SymMatrix { dim } => dim,
                _ => unreachable!(),
            };
            for i in 0..dim {
                for j in 0..=i {
                    red.v0[p.slot_sym(vr, i, j)] = if i == j { 1.0 } else { 0.0 };
                }
            }
            patched = true;
        }
    }
    if patched && !p.eqs.is_empty() {
        let (e, f) = equality_system(p);
        let rhs = &f - &e * &red.v0;
        let corr = linalg::min_norm_solve(&e, &rhs, 1e-8)
            .ok_or(SdpError::EqualitiesInconsistent)?;
        red.v0 += corr;
    }
    for &vid in &p.logdet {
        let x = p.value_sym(red.v0.as_slice(), VarRef(vid));
        if linalg::logdet_pd(&x).is_none() {
            return Err(SdpError::LogDetNotPositive(p.vars[vid].name.clone()));
        }
    }
    Ok(())
}

/// All inequality slacks: user inequalities then nonneg slots. Returned as
/// (terms, constant) pairs evaluated as `slack(v) = const + sum c*v_s`.
fn slack_list(p: &SdpProblem) -> Vec<(Vec<(usize, f64)>, f64)> {
    let mut out: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    for e in &p.ineqs {
        out.push((e.terms.clone(), e.constant));
    }
    for vd in &p.vars {
        if vd.nonneg {
            for s in vd.offset..vd.offset + vd.len {
                out.push((vec![(s, 1.0)], 0.0));
            }
        }
    }
    out
}

fn initial_omega(p: &SdpProblem, v: &DVector<f64>, slacks: &[(Vec<(usize, f64)>, f64)], pad: f64) -> f64 {
    let mut need = 0.0f64;
    for blk in &p.blocks {
        let m = blk.eval(v.as_slice(), 0.0);
        need = need.max(-linalg::min_eig(&m));
    }
    for (terms, c) in slacks {
        let s = c + terms.iter().map(|&(i, co)| co * v[i]).sum::<f64>();
        need = need.max(-s);
    }
    need + pad
}

/// Composite barrier value; `None` when (v, omega) is outside the domain.
fn phi(
    p: &SdpProblem,
    slacks: &[(Vec<(usize, f64)>, f64)],
    big_m: f64,
    mu: f64,
    v: &DVector<f64>,
    omega: f64,
) -> Option<f64> {
    if omega <= 0.0 {
        return None;
    }
    let mut val = p.cost_offset + big_m * omega;
    for &(s, c) in &p.cost {
        val += c * v[s];
    }
    for &vid in &p.logdet {
        let x = p.value_sym(v.as_slice(), VarRef(vid));
        val -= linalg::logdet_pd(&x)?;
    }
    for blk in &p.blocks {
        let b = blk.eval(v.as_slice(), omega);
        val -= mu * linalg::logdet_pd(&b)?;
    }
    for (terms, c) in slacks {
        let s = c + terms.iter().map(|&(i, co)| co * v[i]).sum::<f64>() + omega;
        if s <= 0.0 {
            return None;
        }
        val -= mu * fp::ln(s);
    }
    val -= mu * fp::ln(omega);
    Some(val)
}

/// Gradient and Hessian of the composite in the extended space
/// `[v; omega]` (index n = omega).
fn grad_hess(
    p: &SdpProblem,
    slacks: &[(Vec<(usize, f64)>, f64)],
    big_m: f64,
    mu: f64,
    v: &DVector<f64>,
    omega: f64,
) -> Option<(DVector<f64>, DMatrix<f64>)> {
    let n = p.n_slots;
    let mut g = DVector::<f64>::zeros(n + 1);
    let mut h = DMatrix::<f64>::zeros(n + 1, n + 1);

    for &(s, c) in &p.cost {
        g[s] += c;
    }
    g[n] += big_m;

    // log-det objective terms (weight 1)
    for &vid in &p.logdet {
        let vr = VarRef(vid);
        let dim = match p.vars[vid].kind {
            VarKind::SymMatrix { dim } => dim,
            _ => unreachable!(),
        };
        let x = p.value_sym(v.as_slice(), vr);
        let w = linalg::inv_pd(&x)?;
        for i in 0..dim {
            for j in 0..=i {
                let s = p.slot_sym(vr, i, j);
                g[s] -= if i == j { w[(i, i)] } else { 2.0 * w[(i, j)] };
            }
        }
        // Hessian within the variable
        for i in 0..dim {
            for j in 0..=i {
                let s1 = p.slot_sym(vr, i, j);
                for k in 0..dim {
                    for l in 0..=k {
                        let s2 = p.slot_sym(vr, k, l);
                        if s2 < s1 {
                            continue;
                        }
                        let val = if i == j && k == l {
                            w[(i, k)] * w[(i, k)]
                        } else if i == j {
                            2.0 * w[(i, k)] * w[(i, l)]
                        } else if k == l {
                            2.0 * w[(i, k)] * w[(j, k)]
                        } else {
                            2.0 * (w[(i, k)] * w[(j, l)] + w[(i, l)] * w[(j, k)])
                        };
                        h[(s1, s2)] += val;
                        if s1 != s2 {
                            h[(s2, s1)] += val;
                        }
                    }
                }
            }
        }
    }

    // PSD block barriers (weight mu), omega as a virtual variable with
    // identity coefficient
    for blk in &p.blocks {
        let b = blk.eval(v.as_slice(), omega);
        let w = linalg::inv_pd(&b)?;
        let m = blk.dim;
        let q = blk.coeffs.len();
        // gradient
        for (slot, c) in &blk.coeffs {
            let mut tr = 0.0;
            for a in 0..m {
                for bb in 0..m {
                    tr += w[(a, bb)] * c[(bb, a)];
                }
            }
            g[*slot] -= mu * tr;
        }
        g[n] -= mu * w.trace();
        // Hessian: D_s = W C_s W, pair with C_r and identity (omega)
        for si in 0..=q {
            let d = if si < q {
                let (_, c) = &blk.coeffs[si];
                &w * c * &w
            } else {
                &w * &w
            };
            let slot_i = if si < q { blk.coeffs[si].0 } else { n };
            for ri in si..=q {
                let tr = if ri < q {
                    let (_, c) = &blk.coeffs[ri];
                    let mut t = 0.0;
                    for a in 0..m {
                        for bb in 0..m {
                            t += d[(a, bb)] * c[(bb, a)];
                        }
                    }
                    t
                } else {
                    d.trace()
                };
                let slot_j = if ri < q { blk.coeffs[ri].0 } else { n };
                h[(slot_i, slot_j)] += mu * tr;
                if slot_i != slot_j {
                    h[(slot_j, slot_i)] += mu * tr;
                }
            }
        }
    }

    // scalar slacks
    for (terms, c) in slacks {
        let s = c + terms.iter().map(|&(i, co)| co * v[i]).sum::<f64>() + omega;
        if s <= 0.0 {
            return None;
        }
        let gs = -mu / s;
        let hs = mu / (s * s);
        for &(i, co) in terms {
            g[i] += gs * co;
        }
        g[n] += gs;
        for a in 0..=terms.len() {
            let (ia, ca) = if a < terms.len() { terms[a] } else { (n, 1.0) };
            for b in a..=terms.len() {
                let (ib, cb) = if b < terms.len() { terms[b] } else { (n, 1.0) };
                h[(ia, ib)] += hs * ca * cb;
                if ia != ib {
                    h[(ib, ia)] += hs * ca * cb;
                }
            }
        }
    }

    // omega's own barrier
    g[n] -= mu / omega;
    h[(n, n)] += mu / (omega * omega);
    Some((g, h))
}

/// Reduce the extended gradient/Hessian through the null-space basis.
fn reduce_system(
    red: &Reduction,
    g: &DVector<f64>,
    h: &DMatrix<f64>,
) -> (DVector<f64>, DMatrix<f64>) {
    match &red.z {
        None => (g.clone(), h.clone()),
        Some(z) => {
            let n = z.nrows();
            let m = z.ncols();
            let gv = g.rows(0, n);
            let mut gr = DVector::zeros(m + 1);
            gr.rows_mut(0, m).copy_from(&(z.transpose() * gv));
            gr[m] = g[n];
            let hvv = h.view((0, 0), (n, n));
            let hvo = h.view((0, n), (n, 1));
            let mut hr = DMatrix::zeros(m + 1, m + 1);
            hr.view_mut((0, 0), (m, m)).copy_from(&(z.transpose() * hvv * z));
            let cross = z.transpose() * hvo;
            hr.view_mut((0, m), (m, 1)).copy_from(&cross);
            hr.view_mut((m, 0), (1, m)).copy_from(&cross.transpose());
            hr[(m, m)] = h[(n, n)];
            (gr, hr)
        }
    }
}

fn expand_step(red: &Reduction, dw: &DVector<f64>, n: usize) -> (DVector<f64>, f64) {
    match &red.z {
        None => (dw.rows(0, n).into_owned(), dw[n]),
        Some(z) => {
            let m = z.ncols();
            (z * dw.rows(0, m), dw[m])
        }
    }
}

pub fn solve(
    p: &SdpProblem,
    settings: &Settings,
    warm: Option<&[f64]>,
) -> Result<Solution, SdpError> {
    // exact-penalty escalation: when the phase-I shift stalls above the
    // feasibility tolerance, the penalty weight was below the dual mass;
    // retry warm-started with a heavier weight before declaring
    // infeasibility
    let mut settings = settings.clone();
    let mut last = None;
    for round in 0..3 {
        let sol = solve_once(p, &settings, warm)?;
        if sol.status != Status::InfeasibleDetected || round == 2 {
            return Ok(sol);
        }
        trace(|| {
            alloc::format!(
                "omega stalled at {:.2e}; escalating penalty to {:.1e}",
                sol.omega,
                settings.big_m * 100.0
            )
        });
        settings.big_m *= 100.0;
        last = Some(sol);
    }
    Ok(last.expect("loop returns or records"))
}

fn solve_once(
    p: &SdpProblem,
    settings: &Settings,
    warm: Option<&[f64]>,
) -> Result<Solution, SdpError> {
    if !p.has_objective() {
        return Err(SdpError::ObjectiveUnset);
    }
    let n = p.n_slots;
    let mut red = reduce(p, warm)?;
    fix_logdet_start(p, &mut red)?;
    let slacks = slack_list(p);

    let mut v = red.v0.clone();
    let mut omega = initial_omega(p, &v, &slacks, settings.omega_pad);
    let mut mu = settings.mu0;
    let mut total_iters = 0usize;
    let mut degenerate = false;
    let mut budget_hit = false;
    let mut prev_stage_obj = f64::INFINITY;
    let mut last_delta = f64::INFINITY;
    let mut stall_streak = 0u32;
    let mut mu_final = mu;

    'stages: loop {
        let mut stage_iters = 0usize;
        loop {
            if total_iters >= settings.max_newton {
                budget_hit = true;
                break 'stages;
            }
            if stage_iters >= settings.max_newton_stage {
                break;
            }
            let Some((g, h)) = grad_hess(p, &slacks, settings.big_m, mu, &v, omega) else {
                degenerate = true;
                break 'stages;
            };
            let (gr, hr) = reduce_system(&red, &g, &h);
            // Jacobi-scaled, ridge-retried Cholesky: the barrier Hessian
            // spans many orders of magnitude near the boundary
            let nr = hr.nrows();
            let scale_d = DVector::from_fn(nr, |i, _| 1.0 / fp::sqrt(hr[(i, i)].max(1e-300)));
            let mut hs = hr.clone();
            for r in 0..nr {
                for c in 0..nr {
                    hs[(r, c)] *= scale_d[r] * scale_d[c];
                }
            }
            let gs = DVector::from_fn(nr, |i, _| gr[i] * scale_d[i]);
            let mut ridge = 0.0f64;
            let chol = loop {
                let mut trial = hs.clone();
                if ridge > 0.0 {
                    for i in 0..nr {
                        trial[(i, i)] += ridge;
                    }
                }
                match trial.cholesky() {
                    Some(c) => break Some(c),
                    None => {
                        ridge = if ridge == 0.0 { 1e-13 } else { ridge * 100.0 };
                        if ridge > 1e-1 {
                            break None;
                        }
                    }
                }
            };
            let Some(chol) = chol else {
                degenerate = true;
                break 'stages;
            };
            let dws = chol.solve(&(-&gs));
            let dw = DVector::from_fn(nr, |i, _| dws[i] * scale_d[i]);
            let decrement = -gr.dot(&dw);
            if !(decrement.is_finite()) {
                degenerate = true;
                break 'stages;
            }
            // the last stage polishes harder so the KKT residual report is
            // meaningful at the returned point
            let stage_tol = if mu <= settings.mu_min {
                settings.newton_tol.min(1e-12)
            } else {
                settings.newton_tol
            };
            if decrement * 0.5 <= stage_tol {
                break;
            }
            let (dv, domega) = expand_step(&red, &dw, n);
            let phi0 = phi(p, &slacks, settings.big_m, mu, &v, omega)
                .expect("current iterate must be interior");
            let mut alpha = 1.0f64;
            let mut stepped = false;
            while alpha >= 1e-13 {
                let vt = &v + &dv * alpha;
                let ot = omega + domega * alpha;
                if let Some(val) = phi(p, &slacks, settings.big_m, mu, &vt, ot) {
                    if val <= phi0 - 0.25 * alpha * decrement {
                        v = vt;
                        omega = ot;
                        stepped = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            total_iters += 1;
            stage_iters += 1;
            if !stepped {
                // cannot make progress at this mu; move on
                trace(|| {
                    alloc::format!("mu {mu:.1e}: line search stalled after {stage_iters} iters")
                });
                break;
            }
        }
        mu_final = mu;
        trace(|| {
            alloc::format!(
                "mu {:.1e}: {} iters, obj {:.9}, omega {:.2e}",
                mu,
                stage_iters,
                p.objective_at(v.as_slice()).unwrap_or(f64::NAN),
                omega
            )
        });
        let obj = p.objective_at(v.as_slice()).unwrap_or(f64::INFINITY);
        last_delta = fp::abs(obj - prev_stage_obj);
        if last_delta <= settings.stall_tol * (1.0 + fp::abs(obj)) && omega <= settings.feas_tol {
            stall_streak += 1;
            if stall_streak >= 2 {
                break;
            }
        } else {
            stall_streak = 0;
        }
        prev_stage_obj = obj;
        if mu <= settings.mu_min {
            break;
        }
        mu *= settings.mu_factor;
        if mu < settings.mu_min {
            mu = settings.mu_min;
        }
    }

    let residuals = p.residuals_with_mu(v.as_slice(), mu_final, omega);
    let objective = p.objective_at(v.as_slice()).unwrap_or(f64::NAN);
    let status = if degenerate {
        Status::NumericallyDegenerate
    } else if budget_hit {
        Status::MaxIterations
    } else if omega > settings.feas_tol {
        Status::InfeasibleDetected
    } else {
        Status::Optimal
    };
    Ok(Solution {
        status,
        objective,
        values: v.as_slice().to_vec(),
        residuals,
        newton_iters: total_iters,
        omega,
        last_stage_delta: last_delta,
    })
}

/// `||Z^T grad L||_inf` for the barrier-free Lagrangian with duals frozen
/// from the final barrier weight, cross-checked by central finite
/// differences along the first reduced directions.
pub(crate) fn stationarity_residual(p: &SdpProblem, values: &[f64], mu: f64, omega: f64) -> f64 {
    let n = p.n_slots;
    let v = DVector::from_column_slice(values);
    let slacks = slack_list(p);

    // duals
    let mut block_w: Vec<DMatrix<f64>> = Vec::with_capacity(p.blocks.len());
    for blk in &p.blocks {
        let b = blk.eval(values, omega);
        match linalg::inv_pd(&b) {
            Some(w) => block_w.push(w * mu),
            None => return f64::INFINITY,
        }
    }
    let mut slack_dual: Vec<f64> = Vec::with_capacity(slacks.len());
    for (terms, c) in &slacks {
        let s = c + terms.iter().map(|&(i, co)| co * v[i]).sum::<f64>() + omega;
        if s <= 0.0 {
            return f64::INFINITY;
        }
        slack_dual.push(mu / s);
    }

    // analytic grad of L(v) = f(v) - sum <W_k, B_k(v)> - sum d_i * slack_i(v)
    let lagrangian_grad = |vv: &DVector<f64>| -> Option<DVector<f64>> {
        let mut g = DVector::<f64>::zeros(n);
        for &(s, c) in &p.cost {
            g[s] += c;
        }
        for &vid in &p.logdet {
            let vr = VarRef(vid);
            let dim = match p.vars[vid].kind {
                VarKind::SymMatrix { dim } => dim,
                _ => unreachable!(),
            };
            let x = p.value_sym(vv.as_slice(), vr);
            let w = linalg::inv_pd(&x)?;
            for i in 0..dim {
                for j in 0..=i {
                    let s = p.slot_sym(vr, i, j);
                    g[s] -= if i == j { w[(i, i)] } else { 2.0 * w[(i, j)] };
                }
            }
        }
        for (blk, w) in p.blocks.iter().zip(&block_w) {
            for (slot, c) in &blk.coeffs {
                let mut tr = 0.0;
                for a in 0..blk.dim {
                    for bb in 0..blk.dim {
                        tr += w[(a, bb)] * c[(bb, a)];
                    }
                }
                g[*slot] -= tr;
            }
        }
        for ((terms, _), d) in slacks.iter().zip(&slack_dual) {
            for &(i, co) in terms {
                g[i] -= d * co;
            }
        }
        Some(g)
    };

    let Some(g) = lagrangian_grad(&v) else {
        return f64::INFINITY;
    };

    let z = if p.eqs.is_empty() {
        None
    } else {
        let (e, _) = equality_system(p);
        Some(linalg::null_space(&e, 1e-12))
    };
    let reduced: DVector<f64> = match &z {
        None => g.clone(),
        Some(zz) => zz.transpose() * &g,
    };

    // measure the reduced gradient in the Newton metric of the composite;
    // the raw infinity norm is meaningless next to the PSD boundary where
    // the barrier Hessian is steep
    let metric_norm = (|| {
        let (_, h) = grad_hess(p, &slack_list(p), 0.0, mu, &v, omega)?;
        let hv = h.view((0, 0), (n, n)).into_owned();
        let hred = match &z {
            None => hv,
            Some(zz) => zz.transpose() * hv * zz,
        };
        let mut hred = hred;
        let sc = hred.diagonal().amax().max(1e-30);
        for i in 0..hred.nrows() {
            hred[(i, i)] += 1e-13 * sc;
        }
        let chol = hred.cholesky()?;
        let d = chol.solve(&reduced);
        Some(fp::sqrt(reduced.dot(&d).max(0.0)))
    })();
    let mut worst = match metric_norm {
        Some(x) => x,
        None => reduced.amax(),
    };

    // finite-difference spot check of the same Lagrangian along a few
    // reduced directions (block and slack terms are affine, so only the
    // log-det part actually varies nonlinearly); disagreement with the
    // analytic gradient is added to the report
    let lagrangian_val = |vv: &DVector<f64>| -> Option<f64> {
        let mut val = p.cost_offset;
        for &(s, c) in &p.cost {
            val += c * vv[s];
        }
        for &vid in &p.logdet {
            let x = p.value_sym(vv.as_slice(), VarRef(vid));
            val -= linalg::logdet_pd(&x)?;
        }
        for (blk, w) in p.blocks.iter().zip(&block_w) {
            let b = blk.eval(vv.as_slice(), 0.0);
            let mut tr = 0.0;
            for a in 0..blk.dim {
                for bb in 0..blk.dim {
                    tr += w[(a, bb)] * b[(bb, a)];
                }
            }
            val -= tr;
        }
        for ((terms, c), d) in slacks.iter().zip(&slack_dual) {
            let s = c + terms.iter().map(|&(i, co)| co * vv[i]).sum::<f64>();
            val -= d * s;
        }
        Some(val)
    };

    let h = 1e-5;
    let ndirs = match &z {
        None => n.min(8),
        Some(zz) => zz.ncols().min(8),
    };
    for j in 0..ndirs {
        let dir: DVector<f64> = match &z {
            None => DVector::from_fn(n, |i, _| if i == j { 1.0 } else { 0.0 }),
            Some(zz) => zz.column(j).into_owned(),
        };
        let vp = &v + &dir * h;
        let vm = &v - &dir * h;
        if let (Some(fp_), Some(fm)) = (lagrangian_val(&vp), lagrangian_val(&vm)) {
            let fd = (fp_ - fm) / (2.0 * h);
            worst += fp::abs(fd - g.dot(&dir)) / ndirs as f64;
        }
    }
    worst
}
