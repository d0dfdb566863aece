//! Subcommand implementations. Each returns whether all of its built-in
//! assertions held, so the binary can exit nonzero on violations.

use std::time::Instant;

use mvee_core::baselines::{
    solve_exact_constraint_generation, solve_ktt, solve_smvie, solve_sproc,
};
use mvee_core::dro::{self, AblationMode};
use mvee_core::geometry::{Ellipsoid, Polytope};
use mvee_core::instances;
use mvee_core::mve::{
    lift_smvie_certificate, solve_polytope_mve, solve_quadset_mve, verify_certificate_polytope,
};
use mvee_core::reach;
use mvee_core::rng::Rng64;
use nalgebra::DVector;

use crate::csvfmt::{fmt_num, CsvWriter};
use crate::json::{CertificateJson, EllipsoidJson, MveResultJson, SetJson};

pub struct Ctx {
    pub threads: usize,
    /// Multiplier applied to every assertion tolerance.
    pub tol_scale: f64,
    pub out: Option<std::path::PathBuf>,
}

impl Ctx {
    fn write_out(&self, default_name: &str, content: &str) -> Result<(), String> {
        let path = match &self.out {
            Some(p) => p.clone(),
            None => std::path::PathBuf::from(default_name),
        };
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent).map_err(|e| e.to_string())?;
            }
        }
        std::fs::write(&path, content).map_err(|e| e.to_string())?;
        eprintln!("wrote {}", path.display());
        Ok(())
    }
}

/// `mve`: solve one JSON set with one method.
pub fn cmd_mve(ctx: &Ctx, input: &std::path::Path, method: &str) -> Result<bool, String> {
    let raw = std::fs::read_to_string(input).map_err(|e| format!("{}: {e}", input.display()))?;
    let set: SetJson = serde_json::from_str(&raw).map_err(|e| format!("parse: {e}"))?;
    let has_quads = !set.quads.is_empty();
    let t0 = Instant::now();
    let (ellipsoid, certificate): (Ellipsoid, Option<CertificateJson>) = match method {
        "cop" => {
            if has_quads {
                let q = set.to_quadset()?;
                let (e, c) = solve_quadset_mve(&q).map_err(|e| e.to_string())?;
                (e, Some(CertificateJson::from(&c)))
            } else {
                let p = set.to_polytope()?.with_vertices().map_err(|e| e.to_string())?;
                let (e, c) = solve_polytope_mve(&p).map_err(|e| e.to_string())?;
                (e, Some(CertificateJson::from(&c)))
            }
        }
        "smvie" => {
            if has_quads {
                return Err("method smvie needs a pure polytope input".to_string());
            }
            let p = set.to_polytope()?.with_vertices().map_err(|e| e.to_string())?;
            let s = solve_smvie(&p).map_err(|e| e.to_string())?;
            (s.outer, None)
        }
        "sproc" => {
            if !has_quads {
                return Err(
                    "method sproc needs at least one quadratic row (add a redundant ellipsoid)"
                        .to_string(),
                );
            }
            let q = set.to_quadset()?;
            (solve_sproc(&q).map_err(|e| e.to_string())?, None)
        }
        "ktt" => {
            if has_quads {
                return Err("method ktt needs a pure polytope input".to_string());
            }
            let p = set.to_polytope()?.with_vertices().map_err(|e| e.to_string())?;
            (solve_ktt(&p).map_err(|e| e.to_string())?, None)
        }
        "exact" => {
            if has_quads {
                return Err("method exact needs a pure polytope input".to_string());
            }
            let p = set.to_polytope()?.with_vertices().map_err(|e| e.to_string())?;
            (solve_exact_constraint_generation(&p, 1e-7).map_err(|e| e.to_string())?, None)
        }
        other => return Err(format!("unknown method {other:?} (cop|smvie|sproc|ktt|exact)")),
    };
    let wall = t0.elapsed().as_secs_f64() * 1e3;
    let result = MveResultJson {
        method: method.to_string(),
        // -log det(A) = log volume under the 1/det convention
        objective: ellipsoid.volume().ln(),
        volume: ellipsoid.volume(),
        radius: ellipsoid.radius(),
        ellipsoid: EllipsoidJson::from(&ellipsoid),
        certificate,
        wall_time_ms: wall,
    };
    let text = serde_json::to_string_pretty(&result).map_err(|e| e.to_string())?;
    println!("{text}");
    if ctx.out.is_some() {
        ctx.write_out("mve_result.json", &text)?;
    }
    Ok(true)
}

/// `random-polytopes`: radius comparison of the four methods over a seeded
/// instance stream; one row per instance, then mean/p10/p90 suboptimality
/// summary rows.
pub fn cmd_random_polytopes(
    ctx: &Ctx,
    k: usize,
    m: usize,
    count: usize,
    seed0: u64,
) -> Result<bool, String> {
    if k > 6 || m > 3 * k || count > 50 {
        return Err("desk scale: K <= 6, M <= 3K, count <= 50".to_string());
    }
    struct Row {
        seed: u64,
        r: [f64; 4],
    }
    let seeds: Vec<u64> = (0..count as u64).map(|i| seed0 + i).collect();
    let rows: Vec<Result<Row, String>> = crate::parallel::map_ordered(seeds, ctx.threads, |&seed| {
        let p = instances::random_cut_box(k, m, seed)
            .with_vertices()
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let e_exact =
            solve_exact_constraint_generation(&p, 1e-7).map_err(|e| format!("seed {seed}: {e}"))?;
        let (e_cop, _) = solve_polytope_mve(&p).map_err(|e| format!("seed {seed}: {e}"))?;
        let e_ktt = solve_ktt(&p).map_err(|e| format!("seed {seed}: {e}"))?;
        let s = solve_smvie(&p).map_err(|e| format!("seed {seed}: {e}"))?;
        Ok(Row {
            seed,
            r: [e_exact.radius(), e_cop.radius(), e_ktt.radius(), s.outer.radius()],
        })
    });
    let mut csv = CsvWriter::new(&[
        "row", "seed", "k", "m", "r_exact", "r_cop", "r_ktt", "r_smvie", "sub_cop", "sub_ktt",
        "sub_smvie",
    ]);
    let mut subs: Vec<[f64; 3]> = Vec::new();
    let mut ok = true;
    for r in rows {
        let r = r?;
        let sub = [r.r[1] / r.r[0] - 1.0, r.r[2] / r.r[0] - 1.0, r.r[3] / r.r[0] - 1.0];
        // dominance of the volume orderings, radius scale
        if r.r[1] > r.r[3] * (1.0 + 1e-6) || r.r[0] > r.r[1] * (1.0 + 1e-6) {
            eprintln!("ordering violated at seed {}", r.seed);
            ok = false;
        }
        subs.push(sub);
        csv.row(&[
            "instance".to_string(),
            r.seed.to_string(),
            k.to_string(),
            m.to_string(),
            fmt_num(r.r[0]),
            fmt_num(r.r[1]),
            fmt_num(r.r[2]),
            fmt_num(r.r[3]),
            fmt_num(sub[0]),
            fmt_num(sub[1]),
            fmt_num(sub[2]),
        ]);
    }
    for (name, pick) in [("mean", -1i32), ("p10", 10), ("p90", 90)] {
        let mut cells = vec![
            name.to_string(),
            String::new(),
            k.to_string(),
            m.to_string(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ];
        for mi in 0..3 {
            let mut vals: Vec<f64> = subs.iter().map(|s| s[mi]).collect();
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let v = if pick < 0 {
                vals.iter().sum::<f64>() / vals.len() as f64
            } else {
                percentile(&vals, pick as f64 / 100.0)
            };
            cells.push(fmt_num(v));
        }
        csv.row(&cells);
    }
    let text = csv.finish();
    print!("{text}");
    if ctx.out.is_some() {
        ctx.write_out("random_polytopes.csv", &text)?;
    }
    Ok(ok)
}

pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// `chipped`: radii along the chipped-hypercube family, against the
/// closed forms; checks the closed-form certificates along the way.
pub fn cmd_chipped(ctx: &Ctx, k_min: usize, k_max: usize) -> Result<bool, String> {
    if !(2..=10).contains(&k_min) || !(2..=10).contains(&k_max) || k_min > k_max {
        return Err("K range must sit inside 2..=10".to_string());
    }
    let mut csv = CsvWriter::new(&[
        "k",
        "r_exact",
        "r_cop",
        "r_smvie",
        "r_smvie_closed_form",
        "r_cop_upper_bound",
    ]);
    let mut ok = true;
    let tol_rel = 1e-4 * ctx.tol_scale;
    let mut ratios: Vec<f64> = Vec::new();
    for k in k_min..=k_max {
        let p = instances::chipped_hypercube(k);
        let p = if k <= 8 { p.with_vertices().map_err(|e| e.to_string())? } else { p };
        let r_exact = if k <= 5 {
            let e = solve_exact_constraint_generation(&p, 1e-7).map_err(|e| e.to_string())?;
            Some(e.radius())
        } else {
            None
        };
        let (e_cop, cert) = solve_polytope_mve(&p).map_err(|e| e.to_string())?;
        let s = solve_smvie(&p).map_err(|e| e.to_string())?;
        let r_cop = e_cop.radius();
        let r_smvie = s.outer.radius();
        let closed = instances::chipped_smvie_det_b(k).powf(1.0 / k as f64);
        let (a_cf, b_cf, n_cf) = instances::chipped_cop_closed_form(k);
        let e_cf = Ellipsoid::new(a_cf, b_cf).map_err(|e| e.to_string())?;
        let bound = e_cf.radius();
        if (r_smvie - closed).abs() > tol_rel * closed {
            eprintln!("K={k}: scaled-inscribed radius {r_smvie} differs from closed form {closed}");
            ok = false;
        }
        if r_cop > bound + 1e-6 * ctx.tol_scale {
            eprintln!("K={k}: restriction radius {r_cop} exceeds the closed-form bound {bound}");
            ok = false;
        }
        // closed-form certificate (A, b, N) with (F, g, h) = blocks of
        // [A b]^T [A b]
        let cert_cf = mvee_core::mve::Certificate {
            f: e_cf.a() * e_cf.a(),
            g: e_cf.a() * e_cf.b(),
            h: e_cf.b().norm_squared(),
            n: n_cf,
            lambda: vec![],
            alpha: vec![],
            kappa: vec![],
        };
        let rep = verify_certificate_polytope(&p, &e_cf, &cert_cf);
        if !rep.pass {
            eprintln!("K={k}: closed-form certificate rejected: {rep:?}");
            ok = false;
        }
        // closed-form dual pair and its lift
        let (_, _, lam, rho) = instances::chipped_smvie_closed_form(k);
        match lift_smvie_certificate(&p, &lam, &rho) {
            Ok((e_l, c_l)) => {
                let rep = verify_certificate_polytope(&p, &e_l, &c_l);
                if !rep.pass {
                    eprintln!("K={k}: lifted closed-form dual rejected: {rep:?}");
                    ok = false;
                }
            }
            Err(e) => {
                eprintln!("K={k}: closed-form dual infeasible: {e}");
                ok = false;
            }
        }
        // solver certificate must verify as well
        if !verify_certificate_polytope(&p, &e_cop, &cert).pass {
            eprintln!("K={k}: solver certificate rejected");
            ok = false;
        }
        ratios.push(r_smvie / r_cop);
        csv.row(&[
            k.to_string(),
            r_exact.map(fmt_num).unwrap_or_default(),
            fmt_num(r_cop),
            fmt_num(r_smvie),
            fmt_num(closed),
            fmt_num(bound),
        ]);
    }
    if k_max >= 4 {
        for w in ratios.windows(2).skip(k_min.saturating_sub(2).max(1)) {
            if w[1] <= w[0] {
                eprintln!("radius ratio failed to grow: {} -> {}", w[0], w[1]);
                ok = false;
            }
        }
    }
    let text = csv.finish();
    print!("{text}");
    if ctx.out.is_some() {
        ctx.write_out("chipped.csv", &text)?;
    }
    Ok(ok)
}

/// `dro examples`: bound curves of the two closed-form instances.
pub fn cmd_dro_examples(ctx: &Ctx) -> Result<bool, String> {
    let mut ok = true;
    let mut csv = CsvWriter::new(&["example", "parameter", "bound", "closed_form"]);
    for r in [1.0, 1.5, 2.0, 5.0] {
        let (inst, parts, ells) = dro::example_identity_rule(2, r).map_err(|e| e.to_string())?;
        let pol = dro::solve_pld(&inst, &parts, &ells).map_err(|e| e.to_string())?;
        if (pol.bound - r).abs() > 1e-5 * ctx.tol_scale {
            eprintln!("identity-rule bound {} differs from {r}", pol.bound);
            ok = false;
        }
        csv.row(&[
            "identity_rule".to_string(),
            fmt_num(r),
            fmt_num(pol.bound),
            fmt_num(r),
        ]);
    }
    for s in [0.0, 1.0, 2.0, 3.0, 4.0, 6.0] {
        let (inst, parts, ells) = dro::example_inflation(3, s).map_err(|e| e.to_string())?;
        let pol = dro::solve_pld(&inst, &parts, &ells).map_err(|e| e.to_string())?;
        let expect = dro::example_inflation_curve(s);
        if (pol.bound - expect).abs() > 1e-4 * ctx.tol_scale {
            eprintln!("inflation bound {} at s={s} differs from {expect}", pol.bound);
            ok = false;
        }
        csv.row(&[
            "inflation".to_string(),
            fmt_num(s),
            fmt_num(pol.bound),
            fmt_num(expect),
        ]);
    }
    let text = csv.finish();
    print!("{text}");
    if ctx.out.is_some() {
        ctx.write_out("dro_examples.csv", &text)?;
    }
    Ok(ok)
}

/// `dro inventory`: per-seed objectives of the four policy variants plus
/// relative gaps against the piecewise-linear pipeline.
pub fn cmd_dro_inventory(
    ctx: &Ctx,
    products: usize,
    cells: usize,
    n_seeds: usize,
    seed0: u64,
) -> Result<bool, String> {
    if products > 3 || cells > 2 {
        eprintln!(
            "warning: N={products}, J={cells} is beyond desk scale; expect a long runtime"
        );
    }
    struct Row {
        seed: u64,
        vals: [f64; 4],
    }
    let seeds: Vec<u64> = (0..n_seeds as u64).map(|i| seed0 + i).collect();
    let rows: Vec<Result<Row, String>> =
        crate::parallel::map_ordered(seeds, ctx.threads, |&seed| {
            let inst = dro::generate_inventory_instance(products, seed);
            let sup = inst.support.clone().with_vertices().map_err(|e| e.to_string())?;
            let k = sup.dim();
            let mut rng = Rng64::new(seed).fork(0x5eed);
            // constructor points uniform over the box support
            let mut seeds_pts = Vec::with_capacity(cells);
            let vs = sup.vertices().unwrap();
            let mut lo = vs[0].clone();
            let mut hi = vs[0].clone();
            for v in vs {
                for i in 0..k {
                    lo[i] = lo[i].min(v[i]);
                    hi[i] = hi[i].max(v[i]);
                }
            }
            for _ in 0..cells {
                seeds_pts.push(DVector::from_fn(k, |i, _| rng.uniform_in(lo[i], hi[i])));
            }
            let (parts, ells) =
                dro::build_partitions(&sup, &seeds_pts).map_err(|e| format!("seed {seed}: {e}"))?;
            let pwl = dro::solve_pld(&inst, &parts, &ells).map_err(|e| format!("seed {seed}: {e}"))?;
            let pws = dro::solve_ablation(&inst, &parts, &ells, AblationMode::PiecewiseStatic)
                .map_err(|e| format!("seed {seed}: {e}"))?;
            let ldr = dro::solve_ablation(&inst, &parts, &ells, AblationMode::LinearSingle)
                .map_err(|e| format!("seed {seed}: {e}"))?;
            let pwl2 = dro::solve_ablation(&inst, &parts, &ells, AblationMode::DoubledRadii)
                .map_err(|e| format!("seed {seed}: {e}"))?;
            Ok(Row { seed, vals: [pwl.bound, pws.bound, ldr.bound, pwl2.bound] })
        });
    let mut csv = CsvWriter::new(&[
        "row", "seed", "pwl", "pws", "ldr", "pwl2", "gap_pws", "gap_ldr", "gap_pwl2",
    ]);
    let mut ok = true;
    let mut gaps: Vec<[f64; 3]> = Vec::new();
    for r in rows {
        let r = r?;
        let [pwl, pws, ldr, pwl2] = r.vals;
        if pws < pwl - 1e-7 * ctx.tol_scale * (1.0 + pwl.abs()) {
            eprintln!("seed {}: static rules beat linear ones ({pws} < {pwl})", r.seed);
            ok = false;
        }
        let g = [(pws - pwl) / pwl.abs(), (ldr - pwl) / pwl.abs(), (pwl2 - pwl) / pwl.abs()];
        gaps.push(g);
        csv.row(&[
            "instance".to_string(),
            r.seed.to_string(),
            fmt_num(pwl),
            fmt_num(pws),
            fmt_num(ldr),
            fmt_num(pwl2),
            fmt_num(g[0]),
            fmt_num(g[1]),
            fmt_num(g[2]),
        ]);
    }
    let mean = |i: usize| gaps.iter().map(|g| g[i]).sum::<f64>() / gaps.len().max(1) as f64;
    csv.row(&[
        "mean".into(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        fmt_num(mean(0)),
        fmt_num(mean(1)),
        fmt_num(mean(2)),
    ]);
    let text = csv.finish();
    print!("{text}");
    if ctx.out.is_some() {
        ctx.write_out("inventory.csv", &text)?;
    }
    Ok(ok)
}

/// `reach`: covering ellipsoids for the experiment system over a horizon,
/// with per-step containment sampling, ellipsoid JSON, and a boundary
/// polyline CSV (256 angular samples).
pub fn cmd_reach(ctx: &Ctx, horizon: usize, samples: usize) -> Result<bool, String> {
    let sys = reach::paper_example_system();
    let es = reach::run_system(&sys, horizon).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut rng = Rng64::new(2024).fork(0x6ea);
    for (t, e) in es.iter().enumerate() {
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let x = reach::sample_reachable(&sys, t + 1, &mut rng);
            worst = worst.max(e.gauge(&x));
        }
        let pass = worst <= 1.0 + 1e-6 * ctx.tol_scale;
        println!(
            "t={}: radius {:.6}, worst sampled gauge {:.9} -> {}",
            t + 1,
            e.radius(),
            worst,
            if pass { "contained" } else { "violated" }
        );
        if !pass {
            ok = false;
        }
    }
    let ells: Vec<EllipsoidJson> = es.iter().map(EllipsoidJson::from).collect();
    let json = serde_json::to_string_pretty(&ells).map_err(|e| e.to_string())?;
    let mut csv = CsvWriter::new(&["t", "sample", "ellipse_x", "ellipse_y", "reach_x", "reach_y"]);
    for (t, e) in es.iter().enumerate() {
        let boundary =
            reach::reachable_boundary_2d(&sys, t + 1, 256).map_err(|er| er.to_string())?;
        for (i, bp) in boundary.iter().enumerate() {
            let th = 2.0 * std::f64::consts::PI * i as f64 / 256.0;
            let u = DVector::from_row_slice(&[th.cos(), th.sin()]);
            let ep = e.point_from_unit(&u);
            csv.row(&[
                (t + 1).to_string(),
                i.to_string(),
                fmt_num(ep[0]),
                fmt_num(ep[1]),
                fmt_num(bp[0]),
                fmt_num(bp[1]),
            ]);
        }
    }
    let text = csv.finish();
    if let Some(out) = &ctx.out {
        let dir = out.clone();
        std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
        std::fs::write(dir.join("reach_ellipsoids.json"), &json).map_err(|e| e.to_string())?;
        std::fs::write(dir.join("reach_boundary.csv"), &text).map_err(|e| e.to_string())?;
        eprintln!("wrote {}", dir.display());
    } else {
        println!("{json}");
        print!("{text}");
    }
    Ok(ok)
}

/// Shared helper for tables comparing methods on one polytope.
pub fn method_radius(p: &Polytope, method: &str) -> Result<f64, String> {
    match method {
        "cop" => Ok(solve_polytope_mve(p).map_err(|e| e.to_string())?.0.radius()),
        "smvie" => Ok(solve_smvie(p).map_err(|e| e.to_string())?.outer.radius()),
        "ktt" => Ok(solve_ktt(p).map_err(|e| e.to_string())?.radius()),
        "exact" => {
            Ok(solve_exact_constraint_generation(p, 1e-7).map_err(|e| e.to_string())?.radius())
        }
        other => Err(format!("unknown method {other}")),
    }
}
