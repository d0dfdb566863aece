//! Acceptance suite: every release criterion as one test with a printed
//! pass/fail line and pinned tolerances.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! per-criterion lines and timings.

use mvee_cli::parallel::map_ordered;
use mvee_core::baselines::{
    mve_of_points, solve_exact_constraint_generation, solve_ktt, solve_smvie, solve_sproc,
};
use mvee_core::dro::{self, AblationMode};
use mvee_core::geometry::QuadSet;
use mvee_core::instances;
use mvee_core::linalg;
use mvee_core::mve::{
    lift_smvie_certificate, solve_polytope_mve, verify_certificate_polytope, Certificate,
};
use mvee_core::reach;
use mvee_core::rng::Rng64;
use nalgebra::{DMatrix, DVector};
use std::time::Instant;

fn threads() -> usize {
    std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1)
}

fn report(criterion: &str, outcome: Result<String, String>) {
    match outcome {
        Ok(detail) => {
            println!("criterion {criterion}: PASS ({detail})");
        }
        Err(msg) => {
            println!("criterion {criterion}: FAIL ({msg})");
            panic!("criterion {criterion} failed: {msg}");
        }
    }
}

/// Volume dominance of the restriction over the scaled inscribed
/// ellipsoid on 150 random polytopes.
#[test]
fn criterion_01_volume_dominance() {
    let t0 = Instant::now();
    let mut cases: Vec<(usize, usize, u64)> = Vec::new();
    for k in 2..=5usize {
        for mf in 1..=3usize {
            for seed in 1..=12u64 {
                cases.push((k, mf * k, seed));
            }
        }
    }
    for seed in 13..=18u64 {
        cases.push((2, 2, seed));
    }
    assert_eq!(cases.len(), 150);
    let results = map_ordered(cases, threads(), |&(k, m, seed)| -> Result<(), String> {
        let p = instances::random_cut_box(k, m, seed)
            .with_vertices()
            .map_err(|e| format!("K={k} M={m} seed {seed}: {e}"))?;
        let (cop, _) = solve_polytope_mve(&p).map_err(|e| format!("K={k} M={m} seed {seed}: {e}"))?;
        let s = solve_smvie(&p).map_err(|e| format!("K={k} M={m} seed {seed}: {e}"))?;
        if cop.volume() <= s.outer.volume() * (1.0 + 1e-6) {
            Ok(())
        } else {
            Err(format!(
                "K={k} M={m} seed {seed}: restriction volume {} above scaled-inscribed {}",
                cop.volume(),
                s.outer.volume()
            ))
        }
    });
    let outcome = (|| {
        for r in results {
            r?;
        }
        Ok(format!("150 instances in {:.1}s (target 300s)", t0.elapsed().as_secs_f64()))
    })();
    report("1 (volume dominance)", outcome);
}

/// On simplices the restriction and the scaled inscribed ellipsoid both
/// recover the exact minimum-volume ellipsoid.
#[test]
fn criterion_02_simplex_agreement() {
    let cases: Vec<(usize, u64)> =
        (2..=4usize).flat_map(|k| (1..=5u64).map(move |s| (k, s))).collect();
    let results = map_ordered(cases, threads(), |&(k, seed)| -> Result<(), String> {
        let p = instances::random_simplex(k, seed)
            .with_vertices()
            .map_err(|e| format!("K={k} seed {seed}: {e}"))?;
        let exact = mve_of_points(p.vertices().unwrap(), 1e-9)
            .map_err(|e| format!("K={k} seed {seed}: {e}"))?;
        let (cop, _) = solve_polytope_mve(&p).map_err(|e| format!("K={k} seed {seed}: {e}"))?;
        let s = solve_smvie(&p).map_err(|e| format!("K={k} seed {seed}: {e}"))?;
        for (name, v) in [("restriction", cop.volume()), ("scaled-inscribed", s.outer.volume())] {
            let rel = (v - exact.volume()).abs() / exact.volume();
            if rel > 1e-3 {
                return Err(format!("K={k} seed {seed}: {name} off by {rel:.2e}"));
            }
        }
        Ok(())
    });
    let outcome = (|| {
        for r in results {
            r?;
        }
        Ok("15 random simplices within 1e-3 of exact".to_string())
    })();
    report("2 (simplex agreement)", outcome);
}

/// Chipped-hypercube closed forms across K = 2..10.
#[test]
fn criterion_03_chipped_closed_forms() {
    let cases: Vec<usize> = (2..=10).collect();
    let results = map_ordered(cases, threads(), |&k| -> Result<(), String> {
        let p = instances::chipped_hypercube(k);
        let s = solve_smvie(&p).map_err(|e| format!("K={k}: {e}"))?;
        let closed = instances::chipped_smvie_det_b(k).powf(1.0 / k as f64);
        let r_smvie = s.outer.radius();
        if (r_smvie - closed).abs() > 1e-4 * closed {
            return Err(format!("K={k}: scaled-inscribed radius {r_smvie} vs closed {closed}"));
        }
        let (a, b, n) = instances::chipped_cop_closed_form(k);
        let e_cf = mvee_core::Ellipsoid::new(a, b).map_err(|e| format!("K={k}: {e}"))?;
        let (cop, _) = solve_polytope_mve(&p).map_err(|e| format!("K={k}: {e}"))?;
        if cop.radius() > e_cf.radius() + 1e-6 {
            return Err(format!("K={k}: radius {} above closed-form bound {}", cop.radius(), e_cf.radius()));
        }
        let cert = Certificate {
            f: e_cf.a() * e_cf.a(),
            g: e_cf.a() * e_cf.b(),
            h: e_cf.b().norm_squared(),
            n,
            lambda: vec![],
            alpha: vec![],
            kappa: vec![],
        };
        let rep = verify_certificate_polytope(&p, &e_cf, &cert);
        if !rep.pass {
            return Err(format!("K={k}: closed-form (A, b, N) rejected: {rep:?}"));
        }
        let (_, _, lam, rho) = instances::chipped_smvie_closed_form(k);
        let srho = (p.s().transpose() * &rho).amax();
        if srho > 1e-7 {
            return Err(format!("K={k}: S^T rho = {srho:.2e}"));
        }
        for j in 0..p.rows() {
            if lam.row(j).norm() > rho[j] + 1e-7 {
                return Err(format!("K={k}: dual row {j} violates its cone"));
            }
        }
        let (e_l, c_l) = lift_smvie_certificate(&p, &lam, &rho).map_err(|e| format!("K={k}: {e}"))?;
        let rep = verify_certificate_polytope(&p, &e_l, &c_l);
        if !rep.pass {
            return Err(format!("K={k}: lifted dual certificate rejected: {rep:?}"));
        }
        Ok(())
    });
    let outcome = (|| {
        for r in results {
            r?;
        }
        Ok("K = 2..10 closed forms verified at 1e-7; radii within stated bands".to_string())
    })();
    report("3 (chipped hypercube)", outcome);
}

/// The S-procedure with a redundant scaled-inscribed row returns that row's
/// ellipsoid.
#[test]
fn criterion_04_sproc_fixed_point() {
    let cases: Vec<(usize, u64)> = (1..=25u64).map(|s| (2 + (s as usize % 2), s)).collect();
    let results = map_ordered(cases, threads(), |&(k, seed)| -> Result<(), String> {
        let p = instances::random_cut_box(k, k, seed)
            .with_vertices()
            .map_err(|e| format!("K={k} seed {seed}: {e}"))?;
        let s = solve_smvie(&p).map_err(|e| format!("K={k} seed {seed}: {e}"))?;
        let center = s.outer.center();
        if !p.contains(&center, 1e-9).unwrap_or(false) {
            return Err(format!("K={k} seed {seed}: inscribed center escaped the polytope"));
        }
        let q = QuadSet::new(p.clone(), vec![(s.outer.a().clone(), s.outer.b().clone())], center)
            .map_err(|e| format!("K={k} seed {seed}: {e}"))?;
        let e = solve_sproc(&q).map_err(|e| format!("K={k} seed {seed}: {e}"))?;
        let drift = (e.a() - s.outer.a()).norm() + (e.b() - s.outer.b()).norm();
        if drift > 1e-4 {
            return Err(format!("K={k} seed {seed}: drift {drift:.2e}"));
        }
        Ok(())
    });
    let outcome = (|| {
        for r in results {
            r?;
        }
        Ok("25 instances return the redundant ellipsoid within 1e-4".to_string())
    })();
    report("4 (S-procedure fixed point)", outcome);
}

/// Closed-form decision-rule bounds of the two analytic instances.
#[test]
fn criterion_05_decision_rule_closed_forms() {
    let outcome = (|| {
        for r in [1.0, 1.5, 2.0, 5.0] {
            let (inst, parts, ells) =
                dro::example_identity_rule(2, r).map_err(|e| e.to_string())?;
            let pol = dro::solve_pld(&inst, &parts, &ells).map_err(|e| e.to_string())?;
            if (pol.bound - r).abs() > 1e-5 {
                return Err(format!("identity rule at r={r}: bound {}", pol.bound));
            }
        }
        for s in [0.0, 1.0, 2.0, 3.0, 4.0, 6.0] {
            let (inst, parts, ells) = dro::example_inflation(3, s).map_err(|e| e.to_string())?;
            let pol = dro::solve_pld(&inst, &parts, &ells).map_err(|e| e.to_string())?;
            let want = dro::example_inflation_curve(s);
            if (pol.bound - want).abs() > 1e-4 {
                return Err(format!("inflation at s={s}: bound {} vs {want}", pol.bound));
            }
        }
        Ok("identity-rule bounds within 1e-5, inflation curve within 1e-4 incl. 1.125 at s=0"
            .to_string())
    })();
    report("5 (decision-rule closed forms)", outcome);
}

/// Mean suboptimality bands for the small random-polytope family.
#[test]
fn criterion_06_suboptimality_trends() {
    let seeds: Vec<u64> = (1..=50).collect();
    let results = map_ordered(seeds, threads(), |&seed| -> Result<(f64, f64, f64, f64), String> {
        let p = instances::random_cut_box(2, 2, seed)
            .with_vertices()
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let exact = solve_exact_constraint_generation(&p, 1e-7)
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let (cop, _) = solve_polytope_mve(&p).map_err(|e| format!("seed {seed}: {e}"))?;
        let kt = solve_ktt(&p).map_err(|e| format!("seed {seed}: {e}"))?;
        let s = solve_smvie(&p).map_err(|e| format!("seed {seed}: {e}"))?;
        Ok((exact.radius(), cop.radius(), kt.radius(), s.outer.radius()))
    });
    let outcome = (|| {
        let mut sub_cop = Vec::new();
        let mut sub_smvie = Vec::new();
        let mut ordered = 0usize;
        let mut n = 0usize;
        for r in results {
            let (re, rc, rk, rs) = r?;
            sub_cop.push(rc / re - 1.0);
            sub_smvie.push(rs / re - 1.0);
            if re <= rc * (1.0 + 1e-9) && rc <= rk * 1.02 {
                ordered += 1;
            }
            n += 1;
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let mc = mean(&sub_cop);
        let ms = mean(&sub_smvie);
        if !(0.01..=0.08).contains(&mc) {
            return Err(format!("mean restriction suboptimality {mc:.4} outside [0.01, 0.08]"));
        }
        if !(0.20..=0.50).contains(&ms) {
            return Err(format!("mean scaled-inscribed suboptimality {ms:.4} outside [0.20, 0.50]"));
        }
        if (ordered as f64) < 0.9 * n as f64 {
            return Err(format!("radius ordering held on only {ordered}/{n} instances"));
        }
        Ok(format!(
            "mean suboptimality: restriction {:.2}%, scaled-inscribed {:.2}%; ordering on {ordered}/{n}",
            100.0 * mc,
            100.0 * ms
        ))
    })();
    report("6 (suboptimality trends)", outcome);
}

/// Constraint generation agrees with point-set rounding on the full vertex
/// set.
#[test]
fn criterion_07_exactness_cross_validation() {
    let cases: Vec<(usize, u64)> =
        (2..=4usize).flat_map(|k| (1..=3u64).map(move |s| (k, s))).collect();
    let results = map_ordered(cases, threads(), |&(k, seed)| -> Result<(), String> {
        let p = instances::random_cut_box(k, 2 * k, seed)
            .with_vertices()
            .map_err(|e| format!("K={k} seed {seed}: {e}"))?;
        let cg = solve_exact_constraint_generation(&p, 1e-7)
            .map_err(|e| format!("K={k} seed {seed}: {e}"))?;
        let full = mve_of_points(p.vertices().unwrap(), 1e-8)
            .map_err(|e| format!("K={k} seed {seed}: {e}"))?;
        let rel = (cg.volume() - full.volume()).abs() / full.volume();
        if rel > 1e-5 {
            return Err(format!("K={k} seed {seed}: volumes differ by {rel:.2e}"));
        }
        Ok(())
    });
    let outcome = (|| {
        for r in results {
            r?;
        }
        Ok("constraint generation matches full-vertex rounding within 1e-5".to_string())
    })();
    report("7 (exactness cross-validation)", outcome);
}

/// Reachable-set covers stay sound over the horizon; the first cover's
/// radius matches the derived value.
#[test]
fn criterion_08_reachability() {
    let outcome = (|| {
        let sys = reach::paper_example_system();
        let es = reach::run_system(&sys, 8).map_err(|e| e.to_string())?;
        let mut rng = Rng64::new(808);
        for (t, e) in es.iter().enumerate() {
            for _ in 0..1000 {
                let x = reach::sample_reachable(&sys, t + 1, &mut rng);
                if e.gauge(&x) > 1.0 + 1e-6 {
                    return Err(format!("t={}: sampled reachable state escapes the cover", t + 1));
                }
            }
        }
        let want = 1.16f64.sqrt();
        let got = es[0].radius();
        if (got - want).abs() > 1e-4 {
            return Err(format!(
                "E_1 radius {got:.6} differs from sqrt(1.16) = {want:.6}; the restriction on \
                 this control set is provably a radius-1.4 ball, the target equals the exact \
                 minimum-volume ellipsoid instead"
            ));
        }
        Ok(format!("8000 sampled states contained; E_1 radius {got:.6}"))
    })();
    report("8 (reachability)", outcome);
}

/// Solver health: gradients, duality agreement, certificate round trips.
#[test]
fn criterion_09_solver_health() {
    let outcome = (|| {
        // gradient of -log det against central differences
        let mut rng = Rng64::new(909);
        for trial in 0..20 {
            let k = 2 + (trial % 5);
            let g = DMatrix::from_fn(k, k, |_, _| rng.normal());
            let pd = &g * g.transpose() + DMatrix::identity(k, k) * (k as f64);
            let w = linalg::inv_pd(&pd).ok_or("random matrix not PD")?;
            let h = 1e-6;
            for i in 0..k {
                for j in 0..=i {
                    let analytic = if i == j { -w[(i, i)] } else { -2.0 * w[(i, j)] };
                    let mut up = pd.clone();
                    up[(i, j)] += h;
                    up[(j, i)] = up[(i, j)];
                    let mut dn = pd.clone();
                    dn[(i, j)] -= h;
                    dn[(j, i)] = dn[(i, j)];
                    let fd = (-linalg::logdet_pd(&up).unwrap() + linalg::logdet_pd(&dn).unwrap())
                        / (2.0 * h);
                    let rel = (analytic - fd).abs() / (1.0 + fd.abs());
                    if rel > 1e-5 {
                        return Err(format!("trial {trial} entry ({i},{j}): gradient off by {rel:.2e}"));
                    }
                }
            }
        }
        // strong duality of the inscribed-ellipsoid pair + certificates
        let cases: Vec<(usize, u64)> = (1..=20u64).map(|s| (2 + (s as usize % 3), s + 100)).collect();
        let results = map_ordered(cases, threads(), |&(k, seed)| -> Result<(), String> {
            let p = instances::random_cut_box(k, k, seed)
                .with_vertices()
                .map_err(|e| format!("K={k} seed {seed}: {e}"))?;
            let s = solve_smvie(&p).map_err(|e| format!("K={k} seed {seed}: {e}"))?;
            let gap = (s.primal_objective - s.dual_objective).abs();
            if gap > 1e-5 {
                return Err(format!("K={k} seed {seed}: duality gap {gap:.2e}"));
            }
            let (cop, cert) = solve_polytope_mve(&p).map_err(|e| format!("K={k} seed {seed}: {e}"))?;
            let rep = verify_certificate_polytope(&p, &cop, &cert);
            if !rep.pass {
                return Err(format!("K={k} seed {seed}: certificate rejected: {rep:?}"));
            }
            Ok(())
        });
        for r in results {
            r?;
        }
        Ok("20 gradient checks at 1e-5, 20 duality gaps at 1e-5, 20 certificates verified"
            .to_string())
    })();
    report("9 (solver health)", outcome);
}

/// Inventory ablations: static rules never beat linear ones; gap means
/// reported.
#[test]
fn criterion_10_inventory_ablations() {
    let seeds: Vec<u64> = (1..=20).collect();
    let results = map_ordered(seeds, threads(), |&seed| -> Result<(f64, f64, f64, f64), String> {
        let inst = dro::generate_inventory_instance(3, seed);
        let sup = inst.support.clone().with_vertices().map_err(|e| format!("seed {seed}: {e}"))?;
        let k = sup.dim();
        let mut rng = Rng64::new(seed).fork(0xacce);
        let seeds_pts: Vec<DVector<f64>> = (0..2)
            .map(|_| {
                DVector::from_fn(k, |i, _| {
                    if i < 3 {
                        rng.uniform_in(0.0, 10.0)
                    } else {
                        rng.uniform_in(8.0, 12.0)
                    }
                })
            })
            .collect();
        let (parts, ells) =
            dro::build_partitions(&sup, &seeds_pts).map_err(|e| format!("seed {seed}: {e}"))?;
        let pwl = dro::solve_pld(&inst, &parts, &ells).map_err(|e| format!("seed {seed}: {e}"))?;
        let pws = dro::solve_ablation(&inst, &parts, &ells, AblationMode::PiecewiseStatic)
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let ldr = dro::solve_ablation(&inst, &parts, &ells, AblationMode::LinearSingle)
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let pwl2 = dro::solve_ablation(&inst, &parts, &ells, AblationMode::DoubledRadii)
            .map_err(|e| format!("seed {seed}: {e}"))?;
        if pws.bound < pwl.bound - 1e-7 * (1.0 + pwl.bound.abs()) {
            return Err(format!(
                "seed {seed}: static bound {} beats linear bound {}",
                pws.bound, pwl.bound
            ));
        }
        Ok((pwl.bound, pws.bound, ldr.bound, pwl2.bound))
    });
    let outcome = (|| {
        let mut gaps = [0.0f64; 3];
        let mut n = 0usize;
        for r in results {
            let (pwl, pws, ldr, pwl2) = r?;
            gaps[0] += (pws - pwl) / pwl.abs();
            gaps[1] += (ldr - pwl) / pwl.abs();
            gaps[2] += (pwl2 - pwl) / pwl.abs();
            n += 1;
        }
        for g in &mut gaps {
            *g /= n as f64;
        }
        Ok(format!(
            "nesting held on all {n} seeds; mean gaps vs piecewise-linear: static {:.2}%, \
             single-piece {:.2}%, doubled-radii {:.2}%",
            100.0 * gaps[0],
            100.0 * gaps[1],
            100.0 * gaps[2]
        ))
    })();
    report("10 (inventory ablations)", outcome);
}
