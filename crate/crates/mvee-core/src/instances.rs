//! Instance generators for experiments and tests: random cut boxes,
//! random simplices, and the chipped hypercube with its closed forms.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::fp;
use crate::geometry::Polytope;
use crate::rng::Rng64;

/// Random polytope: the unit box `0 <= x <= e` plus `m` cutting rows. Each
/// cut has a direction uniform on the sphere and an offset uniform on
/// `[-||s||_1/2, ||s||_1/2]`; the sign choice keeps the box center
/// feasible and the cut non-redundant.
pub fn random_cut_box(k: usize, m: usize, seed: u64) -> Polytope {
    let mut rng = Rng64::new(seed).fork(0xb0c5);
    let j = 2 * k + m;
    let mut s = DMatrix::<f64>::zeros(j, k);
    let mut t = DVector::<f64>::zeros(j);
    for i in 0..k {
        s[(i, i)] = 1.0;
        t[i] = 1.0;
        s[(k + i, i)] = -1.0;
        t[k + i] = 0.0;
    }
    for row in 0..m {
        let dir = rng.unit_sphere(k);
        let l1: f64 = dir.iter().map(|x| fp::abs(*x)).sum();
        let r = rng.uniform_in(-l1 / 2.0, l1 / 2.0);
        // s^T (x - c) <= r for r > 0, else s^T (x - c) >= r
        let sign = if r > 0.0 { 1.0 } else { -1.0 };
        let mut st_c = 0.0;
        for c in 0..k {
            s[(2 * k + row, c)] = sign * dir[c];
            st_c += sign * dir[c] * 0.5;
        }
        t[2 * k + row] = sign * r + st_c;
    }
    Polytope::new(s, t).expect("generator dimensions are consistent")
}

/// Random full-dimensional simplex: K+1 standard-normal vertices, facets
/// oriented inward. Redraws on (near-)degenerate vertex sets.
pub fn random_simplex(k: usize, seed: u64) -> Polytope {
    let mut rng = Rng64::new(seed).fork(0x51e9);
    'draw: loop {
        let verts: Vec<DVector<f64>> =
            (0..=k).map(|_| DVector::from_fn(k, |_, _| rng.normal())).collect();
        let mut s = DMatrix::<f64>::zeros(k + 1, k);
        let mut t = DVector::<f64>::zeros(k + 1);
        for left_out in 0..=k {
            let face: Vec<&DVector<f64>> =
                (0..=k).filter(|&i| i != left_out).map(|i| &verts[i]).collect();
            let mut diffs = DMatrix::<f64>::zeros(k - 1, k);
            for (r, v) in face.iter().skip(1).enumerate() {
                for c in 0..k {
                    diffs[(r, c)] = (*v)[c] - face[0][c];
                }
            }
            let ns = crate::linalg::null_space(&diffs, 1e-9);
            if ns.ncols() != 1 {
                continue 'draw;
            }
            let mut normal = ns.column(0).into_owned();
            let mut offset = normal.dot(face[0]);
            if normal.dot(&verts[left_out]) > offset {
                normal = -normal;
                offset = -offset;
            }
            // inward margin check: reject needle simplices
            if offset - normal.dot(&verts[left_out]) < 1e-3 {
                continue 'draw;
            }
            for c in 0..k {
                s[(left_out, c)] = normal[c];
            }
            t[left_out] = offset;
        }
        return Polytope::new(s, t).expect("face count matches");
    }
}

/// The unit hypercube with one corner chipped off:
/// `{0 <= x <= e, e^T x <= sqrt(K)}` (rows ordered `[I; -I; e^T]`).
pub fn chipped_hypercube(k: usize) -> Polytope {
    let j = 2 * k + 1;
    let mut s = DMatrix::<f64>::zeros(j, k);
    let mut t = DVector::<f64>::zeros(j);
    for i in 0..k {
        s[(i, i)] = 1.0;
        t[i] = 1.0;
        s[(k + i, i)] = -1.0;
    }
    for c in 0..k {
        s[(2 * k, c)] = 1.0;
    }
    t[2 * k] = fp::sqrt(k as f64);
    Polytope::new(s, t).expect("fixed dimensions")
}

/// Closed-form feasible point of the copositive restriction on the chipped
/// hypercube: `A = k1 I + k2 ee^T`, `b = k3 e`, and the sparse multiplier
/// matrix over the row blocks `[x<=e; -x<=0; e^T x<=sqrt(K)]`.
pub fn chipped_cop_closed_form(k: usize) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let kf = k as f64;
    let k1 = fp::sqrt((kf * kf - 1.0) / ((fp::sqrt(kf) - 1.0) * kf * kf));
    let k2 = (1.0 + 1.0 / kf - k1) / kf;
    let k3 = -1.0 / fp::sqrt(kf);
    let k4 = k1 * k1 / 2.0;
    let k5 = k2 * (k1 + kf / 2.0 * k2);
    let mut a = DMatrix::<f64>::from_element(k, k, k2);
    for i in 0..k {
        a[(i, i)] += k1;
    }
    let b = DVector::from_element(k, k3);
    let j = 2 * k + 1;
    let mut n = DMatrix::<f64>::zeros(j, j);
    for i in 0..k {
        n[(i, k + i)] = k4;
        n[(k + i, i)] = k4;
        n[(k + i, 2 * k)] = k5;
        n[(2 * k, k + i)] = k5;
    }
    (a, b, n)
}

/// Closed-form primal/dual pair of the scaled-inscribed-ellipsoid program
/// on the chipped hypercube: `B = m1 I + m2 ee^T`, `d = m3 e`,
/// `rho = [0; e; 1]/sqrt(K)`, `Lambda = [0; m4 I + m5 ee^T; m6 e^T]`.
#[allow(clippy::type_complexity)]
pub fn chipped_smvie_closed_form(
    k: usize,
) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>, DVector<f64>) {
    let kf = k as f64;
    let m1 = kf / fp::sqrt(kf + 1.0);
    let m2 = 1.0 / (kf + 1.0) - 1.0 / fp::sqrt(kf + 1.0);
    let m3 = fp::sqrt(kf) / (kf + 1.0);
    let m4 = fp::sqrt(kf + 1.0) / kf;
    let m5 = (1.0 - fp::sqrt(kf + 1.0)) / (kf * kf);
    let m6 = -1.0 / kf;
    let mut b = DMatrix::<f64>::from_element(k, k, m2);
    for i in 0..k {
        b[(i, i)] += m1;
    }
    let d = DVector::from_element(k, m3);
    let j = 2 * k + 1;
    let mut rho = DVector::<f64>::zeros(j);
    for i in 0..k {
        rho[k + i] = 1.0 / fp::sqrt(kf);
    }
    rho[2 * k] = 1.0 / fp::sqrt(kf);
    let mut lam = DMatrix::<f64>::zeros(j, k);
    for r in 0..k {
        for c in 0..k {
            lam[(k + r, c)] = m5 + if r == c { m4 } else { 0.0 };
        }
    }
    for c in 0..k {
        lam[(2 * k, c)] = m6;
    }
    (b, d, lam, rho)
}

/// `det(B) = K^K / (K+1)^((K+1)/2)` for the chipped-hypercube inscribed
/// shape (scale K folded in).
pub fn chipped_smvie_det_b(k: usize) -> f64 {
    let kf = k as f64;
    fp::powf(kf, kf) / fp::powf(kf + 1.0, (kf + 1.0) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::enumerate_vertices;

    #[test]
    fn cut_box_center_feasible_and_bounded() {
        for seed in 1..=10u64 {
            let p = random_cut_box(3, 4, seed);
            let c = DVector::from_element(3, 0.5);
            assert!(p.contains(&c, 1e-12).unwrap(), "seed {seed}");
            let verts = enumerate_vertices(&p).unwrap();
            assert!(verts.len() >= 4);
        }
    }

    #[test]
    fn cut_rows_actually_cut() {
        // the offset rule keeps each cut inside the box's row sum, so some
        // box vertex must violate it
        for seed in 1..=10u64 {
            let p = random_cut_box(2, 2, seed);
            let bx = Polytope::box_volume(
                &DVector::from_row_slice(&[0.0, 0.0]),
                &DVector::from_row_slice(&[1.0, 1.0]),
            )
            .unwrap();
            let bverts = enumerate_vertices(&bx).unwrap();
            for row in 4..p.rows() {
                let sj: DVector<f64> = p.s().row(row).transpose();
                let worst = bverts.iter().map(|v| sj.dot(v) - p.t()[row]).fold(f64::MIN, f64::max);
                assert!(worst > -1e-9, "seed {seed} row {row} is redundant");
            }
        }
    }

    #[test]
    fn simplices_have_k_plus_one_vertices() {
        for seed in 1..=8u64 {
            for k in 2..=4usize {
                let p = random_simplex(k, seed);
                let verts = enumerate_vertices(&p).unwrap();
                assert_eq!(verts.len(), k + 1, "k {k} seed {seed}");
            }
        }
    }

    #[test]
    fn chipped_square_is_cut() {
        let p = chipped_hypercube(2);
        let verts = enumerate_vertices(&p).unwrap();
        assert_eq!(verts.len(), 5);
        let corner = DVector::from_element(2, 1.0);
        assert!(!p.contains(&corner, 1e-9).unwrap());
    }

    #[test]
    fn chipped_closed_forms_are_feasible() {
        for k in 2..=6usize {
            let p = chipped_hypercube(k);
            // cop form: checked exactly through the certificate machinery
            let (a, b, n) = chipped_cop_closed_form(k);
            assert!(n.iter().all(|&x| x >= 0.0));
            let e = crate::geometry::Ellipsoid::new(a, b).unwrap();
            for v in enumerate_vertices(&p).unwrap() {
                assert!(e.gauge(&v) <= 1.0 + 1e-9, "k {k}");
            }
            // smvie primal feasibility and objective identity
            let (bm, d, lam, rho) = chipped_smvie_closed_form(k);
            let ins = crate::baselines::InscribedEllipsoid { b: bm.clone() / k as f64, d };
            assert!(ins.max_row_violation(&p) <= 1e-9);
            assert!((p.s().transpose() * &rho).amax() <= 1e-12);
            for j in 0..p.rows() {
                assert!(lam.row(j).norm() <= rho[j] + 1e-9);
            }
            let det_b = crate::linalg::logdet_pd(&bm).unwrap();
            assert!((det_b.exp() - chipped_smvie_det_b(k)).abs() <= 1e-9 * chipped_smvie_det_b(k));
            let dual_obj = crate::mve::smvie_dual_objective(&p, &lam, &rho).unwrap();
            assert!((dual_obj - det_b).abs() <= 1e-9, "k {k}: {dual_obj} vs {det_b}");
        }
    }
}
