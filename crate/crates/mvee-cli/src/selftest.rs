//! `selftest`: the full invariant battery with one pass/fail line per
//! item. Golden files ship compiled in; `--goldens DIR` reads replacements
//! from disk so reference results can be pinned externally.

use mvee_core::baselines::{
    mve_of_points, solve_exact_constraint_generation, solve_ktt, solve_smvie, solve_sproc,
};
use mvee_core::dro;
use mvee_core::geometry::{enumerate_vertices, Polytope, QuadSet};
use mvee_core::instances;
use mvee_core::mve::{
    lift_smvie_certificate, solve_polytope_mve, verify_certificate_polytope, Certificate,
};
use mvee_core::reach;
use mvee_core::rng::Rng64;
use mvee_core::sdp;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::json::{SdpProblemJson, SetJson};

#[derive(Debug, Serialize, Deserialize)]
pub struct GoldenMve {
    pub name: String,
    pub input: SetJson,
    pub method: String,
    pub volume: f64,
    pub center: Vec<f64>,
    pub tol: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GoldenSdp {
    pub name: String,
    pub problem: SdpProblemJson,
    pub objective: f64,
    pub tol: f64,
}

const GOLDEN_MVE: &str = include_str!("../goldens/mve_reference.json");
const GOLDEN_SDP: &str = include_str!("../goldens/sdp_reference.json");

fn load_goldens(
    dir: Option<&std::path::Path>,
) -> Result<(Vec<GoldenMve>, Vec<GoldenSdp>), String> {
    let (mve_raw, sdp_raw) = match dir {
        None => (GOLDEN_MVE.to_string(), GOLDEN_SDP.to_string()),
        Some(d) => (
            std::fs::read_to_string(d.join("mve_reference.json"))
                .map_err(|e| format!("goldens: {e}"))?,
            std::fs::read_to_string(d.join("sdp_reference.json"))
                .map_err(|e| format!("goldens: {e}"))?,
        ),
    };
    let mves: Vec<GoldenMve> =
        serde_json::from_str(&mve_raw).map_err(|e| format!("mve_reference.json: {e}"))?;
    let sdps: Vec<GoldenSdp> =
        serde_json::from_str(&sdp_raw).map_err(|e| format!("sdp_reference.json: {e}"))?;
    Ok((mves, sdps))
}

fn simplex2() -> Polytope {
    let s = DMatrix::from_row_slice(3, 2, &[-1.0, 0.0, 0.0, -1.0, 1.0, 1.0]);
    Polytope::new(s, DVector::from_row_slice(&[0.0, 0.0, 1.0])).unwrap()
}

fn unit_square() -> Polytope {
    Polytope::box_volume(&DVector::zeros(2), &DVector::from_element(2, 1.0)).unwrap()
}

type Item = (&'static str, Box<dyn Fn(f64) -> Result<(), String>>);

pub fn run(tol_scale: f64, goldens_dir: Option<&std::path::Path>) -> bool {
    let goldens = load_goldens(goldens_dir);
    let mut items: Vec<Item> = Vec::new();

    items.push((
        "geometry-vertex-enumeration",
        Box::new(|_| {
            let sq = unit_square().with_vertices().map_err(|e| e.to_string())?;
            expect(sq.vertices().unwrap().len() == 4, "square has 4 vertices")?;
            let sx = simplex2().with_vertices().map_err(|e| e.to_string())?;
            expect(sx.vertices().unwrap().len() == 3, "simplex has 3 vertices")?;
            let ch = instances::chipped_hypercube(2);
            expect(enumerate_vertices(&ch).map_err(|e| e.to_string())?.len() == 5, "chipped square has 5 vertices")
        }),
    ));

    items.push((
        "solver-monotone-cap-toys",
        Box::new(|tol| {
            let run = |cap: &[f64], expect_obj: f64| -> Result<(), String> {
                let mut p = sdp::SdpProblem::new();
                let a = p.sym_matrix_var("A", 2);
                p.set_logdet_objective(a).map_err(|e| e.to_string())?;
                let blk = p.new_psd_block(2);
                for i in 0..2 {
                    for j in 0..=i {
                        p.block_affine(blk, i, j, &p.expr_sym(a, i, j).scaled(-1.0));
                    }
                    p.block_const(blk, i, i, cap[i]);
                }
                let sol = sdp::solve(&p, &sdp::Settings::default(), None).map_err(|e| e.to_string())?;
                expect(
                    (sol.objective - expect_obj).abs() <= 1e-6 * tol,
                    &format!("objective {} vs {expect_obj}", sol.objective),
                )
            };
            run(&[1.0, 1.0], 0.0)?;
            run(&[4.0, 9.0], -(36f64.ln()))
        }),
    ));

    items.push((
        "logdet-gradient-finite-differences",
        Box::new(|tol| {
            let mut rng = Rng64::new(99);
            for k in 2..=6usize {
                let g = DMatrix::from_fn(k, k, |_, _| rng.normal());
                let pd = &g * g.transpose() + DMatrix::identity(k, k) * k as f64;
                let w = mvee_core::linalg::inv_pd(&pd).unwrap();
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
                        let fd = (-mvee_core::linalg::logdet_pd(&up).unwrap()
                            + mvee_core::linalg::logdet_pd(&dn).unwrap())
                            / (2.0 * h);
                        if (analytic - fd).abs() > 1e-5 * tol * (1.0 + fd.abs()) {
                            return Err(format!("k={k} ({i},{j}): {analytic} vs fd {fd}"));
                        }
                    }
                }
            }
            Ok(())
        }),
    ));

    items.push((
        "simplex-methods-agree",
        Box::new(|tol| {
            for k in [2usize, 3] {
                let p = instances::random_simplex(k, 4).with_vertices().map_err(|e| e.to_string())?;
                let exact = mve_of_points(p.vertices().unwrap(), 1e-8).map_err(|e| e.to_string())?;
                let (cop, _) = solve_polytope_mve(&p).map_err(|e| e.to_string())?;
                let smvie = solve_smvie(&p).map_err(|e| e.to_string())?;
                let rel = |v: f64| (v - exact.volume()).abs() / exact.volume();
                expect(rel(cop.volume()) <= 1e-3 * tol, &format!("K={k} restriction off by {}", rel(cop.volume())))?;
                expect(rel(smvie.outer.volume()) <= 1e-3 * tol, &format!("K={k} scaled-inscribed off by {}", rel(smvie.outer.volume())))?;
            }
            Ok(())
        }),
    ));

    items.push((
        "square-closed-forms",
        Box::new(|tol| {
            let p = unit_square().with_vertices().map_err(|e| e.to_string())?;
            let (cop, cert) = solve_polytope_mve(&p).map_err(|e| e.to_string())?;
            expect((cop.volume() - 0.5).abs() <= 1e-4 * tol, &format!("restriction volume {}", cop.volume()))?;
            expect(verify_certificate_polytope(&p, &cop, &cert).pass, "certificate")?;
            let s = solve_smvie(&p).map_err(|e| e.to_string())?;
            expect((s.outer.volume() - 1.0).abs() <= 1e-4 * tol, &format!("scaled-inscribed volume {}", s.outer.volume()))?;
            let e = solve_exact_constraint_generation(&p, 1e-7).map_err(|e| e.to_string())?;
            expect((e.volume() - 0.5).abs() <= 1e-4 * tol, &format!("exact volume {}", e.volume()))?;
            let kt = solve_ktt(&p).map_err(|e| e.to_string())?;
            expect(kt.volume() >= 0.5 - 1e-6 && kt.volume() <= 0.55, &format!("containment-conditions volume {}", kt.volume()))
        }),
    ));

    items.push((
        "chipped-closed-forms",
        Box::new(|tol| {
            for k in 2..=4usize {
                let p = instances::chipped_hypercube(k).with_vertices().map_err(|e| e.to_string())?;
                let s = solve_smvie(&p).map_err(|e| e.to_string())?;
                let closed = instances::chipped_smvie_det_b(k).powf(1.0 / k as f64);
                let r = s.outer.radius();
                expect((r - closed).abs() <= 1e-4 * tol * closed, &format!("K={k} radius {r} vs {closed}"))?;
                let (a, b, n) = instances::chipped_cop_closed_form(k);
                let e = mvee_core::Ellipsoid::new(a, b).map_err(|e| e.to_string())?;
                let cert = Certificate {
                    f: e.a() * e.a(),
                    g: e.a() * e.b(),
                    h: e.b().norm_squared(),
                    n,
                    lambda: vec![],
                    alpha: vec![],
                    kappa: vec![],
                };
                expect(verify_certificate_polytope(&p, &e, &cert).pass, &format!("K={k} closed-form certificate"))?;
                let (cop, _) = solve_polytope_mve(&p).map_err(|e| e.to_string())?;
                expect(cop.radius() <= e.radius() + 1e-6 * tol, &format!("K={k} bound"))?;
                let (_, _, lam, rho) = instances::chipped_smvie_closed_form(k);
                let (el, cl) = lift_smvie_certificate(&p, &lam, &rho).map_err(|e| e.to_string())?;
                expect(verify_certificate_polytope(&p, &el, &cl).pass, &format!("K={k} lifted dual"))?;
            }
            Ok(())
        }),
    ));

    items.push((
        "volume-dominance-random",
        Box::new(|tol| {
            for k in [2usize, 3] {
                for seed in 1..=5u64 {
                    let p = instances::random_cut_box(k, k, seed)
                        .with_vertices()
                        .map_err(|e| e.to_string())?;
                    let (cop, cert) = solve_polytope_mve(&p).map_err(|e| e.to_string())?;
                    let s = solve_smvie(&p).map_err(|e| e.to_string())?;
                    expect(
                        cop.volume() <= s.outer.volume() * (1.0 + 1e-6 * tol),
                        &format!("K={k} seed {seed}: {} > {}", cop.volume(), s.outer.volume()),
                    )?;
                    expect(verify_certificate_polytope(&p, &cop, &cert).pass, "certificate")?;
                }
            }
            Ok(())
        }),
    ));

    items.push((
        "sproc-fixed-point",
        Box::new(|tol| {
            for seed in 1..=3u64 {
                let p = instances::random_cut_box(2, 2, seed).with_vertices().map_err(|e| e.to_string())?;
                let s = solve_smvie(&p).map_err(|e| e.to_string())?;
                let center = s.outer.center();
                let q = QuadSet::new(
                    p.clone(),
                    vec![(s.outer.a().clone(), s.outer.b().clone())],
                    center,
                )
                .map_err(|e| e.to_string())?;
                let e = solve_sproc(&q).map_err(|e| e.to_string())?;
                let drift = (e.a() - s.outer.a()).norm() + (e.b() - s.outer.b()).norm();
                expect(drift <= 1e-4 * tol, &format!("seed {seed}: drift {drift}"))?;
            }
            Ok(())
        }),
    ));

    items.push((
        "decision-rule-closed-forms",
        Box::new(|tol| {
            for r in [1.0, 2.0] {
                let (inst, parts, ells) = dro::example_identity_rule(2, r).map_err(|e| e.to_string())?;
                let pol = dro::solve_pld(&inst, &parts, &ells).map_err(|e| e.to_string())?;
                expect((pol.bound - r).abs() <= 1e-5 * tol, &format!("identity rule at {r}: {}", pol.bound))?;
            }
            for s in [0.0, 4.0] {
                let (inst, parts, ells) = dro::example_inflation(3, s).map_err(|e| e.to_string())?;
                let pol = dro::solve_pld(&inst, &parts, &ells).map_err(|e| e.to_string())?;
                let want = dro::example_inflation_curve(s);
                expect((pol.bound - want).abs() <= 1e-4 * tol, &format!("inflation at {s}: {} vs {want}", pol.bound))?;
            }
            Ok(())
        }),
    ));

    items.push((
        "policy-class-nesting",
        Box::new(|tol| {
            let (inst, parts, ells) = dro::example_inflation(3, 1.0).map_err(|e| e.to_string())?;
            let pwl = dro::solve_pld(&inst, &parts, &ells).map_err(|e| e.to_string())?;
            let pws = dro::solve_ablation(&inst, &parts, &ells, dro::AblationMode::PiecewiseStatic)
                .map_err(|e| e.to_string())?;
            expect(pws.bound >= pwl.bound - 1e-7 * tol, &format!("{} < {}", pws.bound, pwl.bound))
        }),
    ));

    items.push((
        "reachability-containment",
        Box::new(|tol| {
            let sys = reach::paper_example_system();
            let es = reach::run_system(&sys, 2).map_err(|e| e.to_string())?;
            let mut rng = Rng64::new(5);
            for (t, e) in es.iter().enumerate() {
                for _ in 0..300 {
                    let x = reach::sample_reachable(&sys, t + 1, &mut rng);
                    if e.gauge(&x) > 1.0 + 1e-6 * tol {
                        return Err(format!("t={}: sampled state escapes", t + 1));
                    }
                }
            }
            Ok(())
        }),
    ));

    items.push((
        "exactness-sandwich",
        Box::new(|tol| {
            let p = instances::random_cut_box(3, 6, 11).with_vertices().map_err(|e| e.to_string())?;
            let exact = solve_exact_constraint_generation(&p, 1e-7).map_err(|e| e.to_string())?;
            let (cop, _) = solve_polytope_mve(&p).map_err(|e| e.to_string())?;
            let kt = solve_ktt(&p).map_err(|e| e.to_string())?;
            let s = solve_smvie(&p).map_err(|e| e.to_string())?;
            for (name, other) in [("restriction", &cop), ("containment-conditions", &kt), ("scaled-inscribed", &s.outer)] {
                expect(
                    exact.volume() <= other.volume() * (1.0 + 1e-6 * tol),
                    &format!("exact above {name}"),
                )?;
            }
            Ok(())
        }),
    ));

    match goldens {
        Err(e) => {
            items.push(("golden-files", Box::new(move |_| Err(e.clone()))));
        }
        Ok((mves, sdps)) => {
            items.push((
                "golden-files",
                Box::new(move |tol| {
                    for g in &mves {
                        let p = g.input.to_polytope()?.with_vertices().map_err(|e| e.to_string())?;
                        let (vol, center) = match g.method.as_str() {
                            "cop" => {
                                let (e, _) = solve_polytope_mve(&p).map_err(|e| e.to_string())?;
                                (e.volume(), e.center())
                            }
                            "smvie" => {
                                let s = solve_smvie(&p).map_err(|e| e.to_string())?;
                                (s.outer.volume(), s.outer.center())
                            }
                            other => return Err(format!("golden {}: unknown method {other}", g.name)),
                        };
                        if (vol - g.volume).abs() > g.tol * tol {
                            return Err(format!(
                                "golden {}: volume {vol:.12} differs from reference {:.12} by {:.3e} (tol {:.1e})",
                                g.name, g.volume, (vol - g.volume).abs(), g.tol * tol
                            ));
                        }
                        for (i, c) in g.center.iter().enumerate() {
                            if (center[i] - c).abs() > g.tol * tol {
                                return Err(format!(
                                    "golden {}: center[{i}] {:.12} differs from reference {:.12}",
                                    g.name, center[i], c
                                ));
                            }
                        }
                    }
                    for g in &sdps {
                        let p = g.problem.to_problem()?;
                        let s1 = sdp::solve(&p, &sdp::Settings::default(), None).map_err(|e| e.to_string())?;
                        let s2 = sdp::solve(&p, &sdp::Settings::default(), None).map_err(|e| e.to_string())?;
                        if s1.objective != s2.objective {
                            return Err(format!("golden {}: non-deterministic objective", g.name));
                        }
                        if (s1.objective - g.objective).abs() > g.tol * tol {
                            return Err(format!(
                                "golden {}: objective {:.12} differs from reference {:.12}",
                                g.name, s1.objective, g.objective
                            ));
                        }
                    }
                    Ok(())
                }),
            ));
        }
    }

    let mut all_ok = true;
    for (name, f) in items {
        match f(tol_scale) {
            Ok(()) => println!("PASS {name}"),
            Err(msg) => {
                println!("FAIL {name}: {msg}");
                all_ok = false;
            }
        }
    }
    all_ok
}

fn expect(cond: bool, msg: &str) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.to_string())
    }
}
