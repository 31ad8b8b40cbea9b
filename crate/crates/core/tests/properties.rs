use proptest::prelude::*;

use symconv::polycert::{cof_translator_matrix, translator_margin_2d, translator_margin_3d};
use symconv::quadform::{qa_eval, QuadForm};
use symconv::tensor::{cross, outer, Mat, SymMat};
use symconv::translate::{convex_envelope, Axis, EnvelopeOptions, GridFn};

fn entry() -> impl Strategy<Value = f64> {
    -3.0..3.0f64
}

fn mat3() -> impl Strategy<Value = Mat<3>> {
    prop::array::uniform3(prop::array::uniform3(entry())).prop_map(Mat)
}

fn mat2() -> impl Strategy<Value = Mat<2>> {
    prop::array::uniform2(prop::array::uniform2(entry())).prop_map(Mat)
}

fn sym3() -> impl Strategy<Value = SymMat<3>> {
    mat3().prop_map(|m| SymMat::symmetrize(&m))
}

fn vec3() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(entry())
}

fn psd3() -> impl Strategy<Value = SymMat<3>> {
    mat3().prop_map(|m| {
        SymMat::from_fn(|i, j| (0..3).map(|k| m.0[i][k] * m.0[j][k]).sum::<f64>() * 0.2)
    })
}

fn form(dim: usize) -> impl Strategy<Value = QuadForm> {
    let k = if dim == 2 { 3 } else { 6 };
    prop::collection::vec(entry(), k * (k + 1) / 2)
        .prop_map(move |upper| QuadForm::from_upper(dim, &upper, "random").unwrap())
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-10 * scale.max(1.0)
}

proptest! {
    #[test]
    fn embedding_is_isometric(s in sym3(), t in sym3()) {
        let (x, y) = (s.embed(), t.embed());
        let dot: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        prop_assert!(close(dot, s.to_mat().frob_dot(&t.to_mat()), s.norm() * t.norm()));
        let back = SymMat::<3>::from_embedded(&x);
        prop_assert!((back - s).norm() <= 1e-15 * s.norm().max(1.0));
    }

    #[test]
    fn det_splits_in_2d(f in mat2()) {
        let (s, a) = f.sym_split();
        prop_assert!(close(f.det(), s.det() + a.det(), f.norm().powi(2)));
    }

    #[test]
    fn cof_splits_in_3d(f in mat3()) {
        let (s, a) = f.sym_split();
        let lhs = s.cof().to_mat();
        let rhs = SymMat::symmetrize(&f.cof()).to_mat() - a.cof();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * f.norm().powi(2).max(1.0));
        let det = s.det() + a.cof().frob_dot(&s.to_mat());
        prop_assert!(close(f.det(), det, f.norm().powi(3)));
    }

    #[test]
    fn cramer_and_det_of_cof(f in mat3()) {
        let lhs = f.cof().matmul(&f.transpose());
        let rhs = Mat::<3>::identity() * f.det();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * f.norm().powi(3).max(1.0));
        prop_assert!(close(f.cof().det(), f.det().powi(2), f.norm().powi(6)));
    }

    #[test]
    fn cof_of_compatible_matrix(a in vec3(), b in vec3()) {
        let c = cross(&a, &b);
        let expected = outer(&c, &c) * -0.25;
        let got = SymMat::odot(&a, &b).cof().to_mat();
        prop_assert!((got - expected).norm() <= 1e-10 * (c[0].powi(2) + c[1].powi(2) + c[2].powi(2)).max(1.0));
    }

    #[test]
    fn polarization_recovers_forms(f in form(3), e in sym3()) {
        let g = QuadForm::from_sym_fn::<3, _>(|x| f.eval(x), "copy").unwrap();
        for (x, y) in f.coeffs().iter().zip(g.coeffs()) {
            prop_assert!((x - y).abs() <= 1e-9 * f.norm().max(1.0));
        }
        prop_assert!(close(g.eval(&e), f.eval(&e), f.norm() * e.norm().powi(2)));
    }

    #[test]
    fn qa_ignores_symmetric_part(a in sym3(), f in mat3(), s in sym3()) {
        let shifted = f + s.to_mat();
        let scale = a.norm() * f.norm().max(1.0).powi(2);
        prop_assert!(close(qa_eval(&a, &f), qa_eval(&a, &shifted), scale));
        let axial = f.axial();
        let direct: f64 = (0..3).map(|i| (0..3).map(|j| a.get(i, j) * axial[i] * axial[j]).sum::<f64>()).sum();
        prop_assert!(close(qa_eval(&a, &f), direct, scale));
    }

    #[test]
    fn cof_translator_matrix_matches_evaluation(a in sym3(), e in sym3()) {
        let q = QuadForm::from_matrix(3, cof_translator_matrix(&a), "C(A)").unwrap();
        let direct = a.to_mat().frob_dot(&e.cof().to_mat());
        prop_assert!(close(q.eval(&e), direct, a.norm() * e.norm().powi(2)));
    }

    #[test]
    fn translator_margin_is_concave(f in form(3), a in psd3(), b in psd3()) {
        let mid = (a + b) * 0.5;
        let lhs = translator_margin_3d(&f, &mid);
        let rhs = 0.5 * (translator_margin_3d(&f, &a) + translator_margin_3d(&f, &b));
        prop_assert!(lhs >= rhs - 1e-10 * (f.norm() + a.norm() + b.norm()));
    }

    #[test]
    fn margin_2d_is_concave(f in form(2), x in 0.0..5.0f64, y in 0.0..5.0f64) {
        let lhs = translator_margin_2d(&f, 0.5 * (x + y));
        let rhs = 0.5 * (translator_margin_2d(&f, x) + translator_margin_2d(&f, y));
        prop_assert!(lhs >= rhs - 1e-10 * (f.norm() + x + y));
    }

    #[test]
    fn envelope_is_a_convex_idempotent_minorant(
        values in prop::collection::vec(-2.0..2.0f64, 7 * 6),
    ) {
        let axes = vec![Axis::new(-1.0, 1.0, 7).unwrap(), Axis::new(0.0, 2.0, 6).unwrap()];
        let g = GridFn::new(axes, values).unwrap();
        // A fixed dual grid makes the operator exactly idempotent.
        let slope = 2.0 * g.max_slope(0).max(g.max_slope(1)).max(1e-3);
        let opts = EnvelopeOptions { padding_slope: Some(slope), dual_points: None };
        let env = convex_envelope(&g, &opts).unwrap();
        let scale = g.scale();
        for (e, v) in env.values().iter().zip(g.values()) {
            prop_assert!(*e <= *v + 1e-12);
        }
        let twice = convex_envelope(&env, &opts).unwrap();
        for (a, b) in twice.values().iter().zip(env.values()) {
            prop_assert!((a - b).abs() <= 1e-10 * scale);
        }
        // Midpoint convexity along axis-aligned and diagonal segments.
        let at = |i: usize, j: usize| env.values()[env.index(&[i, j])];
        for i in 0..7 {
            for j in 0..6 {
                for (di, dj) in [(1i64, 0i64), (0, 1), (1, 1), (1, -1)] {
                    let (i2, j2) = (i as i64 + 2 * di, j as i64 + 2 * dj);
                    if i2 < 0 || i2 >= 7 || j2 < 0 || j2 >= 6 {
                        continue;
                    }
                    let (im, jm) = ((i as i64 + di) as usize, (j as i64 + dj) as usize);
                    let mid = at(im, jm);
                    let avg = 0.5 * (at(i, j) + at(i2 as usize, j2 as usize));
                    prop_assert!(mid <= avg + 1e-8 * scale);
                }
            }
        }
    }

    #[test]
    fn envelope_of_convex_data_is_unchanged(
        c in prop::array::uniform3(0.1..2.0f64),
        l in prop::array::uniform2(-1.0..1.0f64),
    ) {
        let h = 0.25;
        let axes = vec![Axis::new(-1.0, 1.0, 9).unwrap(), Axis::new(-1.0, 1.0, 9).unwrap()];
        let cross = 0.5 * c[2].min(c[0]).min(c[1]);
        let g = GridFn::sample(axes, |p| {
            c[0] * p[0] * p[0] + c[1] * p[1] * p[1] + cross * p[0] * p[1] + l[0] * p[0] + l[1] * p[1]
        }).unwrap();
        // Every slope within λ_min h / 2 of the gradient supports the sampled
        // quadratic at a node, so a dual grid with spacing below
        // λ_min h / √2 reproduces it.
        let (a, b, o) = (2.0 * c[0], 2.0 * c[1], cross);
        let lmin = 0.5 * (a + b) - (0.25 * (a - b).powi(2) + o * o).sqrt();
        let slope = 2.0 * g.max_slope(0).max(g.max_slope(1));
        let spacing = 0.9 * lmin * h / 2f64.sqrt();
        let dual = (2.0 * slope / spacing).ceil() as usize + 1;
        let opts = EnvelopeOptions { padding_slope: Some(slope), dual_points: Some(dual) };
        let env = convex_envelope(&g, &opts).unwrap();
        for (e, v) in env.values().iter().zip(g.values()) {
            prop_assert!((e - v).abs() <= 1e-10);
        }
    }
}
