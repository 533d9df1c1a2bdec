use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rotpc_core::admm::WoodburyFactor;
use rotpc_core::{
    basis_size, coherence, multi_indices, relative_error_of, rotation_from_svd, MeasurementMatrix,
    Regularizer,
};

fn regularizer() -> impl Strategy<Value = Regularizer> {
    prop_oneof![
        Just(Regularizer::L1),
        Just(Regularizer::LHalf),
        (0.1f64..5.0).prop_map(|gamma| Regularizer::TransformedL1 { gamma }),
        Just(Regularizer::L1MinusL2),
        (0.2f64..3.0).prop_map(|sigma| Regularizer::Erf { sigma }),
    ]
}

proptest! {
    #[test]
    fn prox_beats_trivial_candidates(
        reg in regularizer(),
        y in prop::collection::vec(-10.0f64..10.0, 1..6),
        mu in 1e-3f64..5.0,
    ) {
        let t = reg.prox(&y, mu).unwrap();
        let got = reg.prox_objective(&t, &y, mu);
        prop_assert!(got <= reg.prox_objective(&y, &y, mu) + 1e-12);
        prop_assert!(got <= reg.prox_objective(&vec![0.0; y.len()], &y, mu) + 1e-12);
        prop_assert!(t.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn prox_is_odd(reg in regularizer(), y in -10.0f64..10.0, mu in 1e-3f64..5.0) {
        let a = reg.prox(&[y], mu).unwrap()[0];
        let b = reg.prox(&[-y], mu).unwrap()[0];
        prop_assert_eq!(a, -b);
    }

    #[test]
    fn separable_prox_never_expands(reg in regularizer(), y in -10.0f64..10.0, mu in 1e-3f64..5.0) {
        prop_assume!(reg.is_separable());
        let t = reg.prox(&[y], mu).unwrap()[0];
        prop_assert!(t.abs() <= y.abs() + 1e-12);
        prop_assert!(t == 0.0 || t.signum() == y.signum());
    }

    #[test]
    fn multi_indices_are_graded_and_unique(d in 1usize..7, p in 0usize..5) {
        let idx = multi_indices(d, p).unwrap();
        prop_assert_eq!(idx.len(), basis_size(d, p).unwrap());
        for w in idx.windows(2) {
            prop_assert!(w[0].total_degree() <= w[1].total_degree());
            prop_assert!(w[0] != w[1]);
        }
        let mut sorted: Vec<Vec<u32>> = idx.iter().map(|m| m.degrees().to_vec()).collect();
        sorted.sort();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), idx.len());
    }

    #[test]
    fn svd_rotation_is_orthogonal(
        d in 1usize..8,
        extra in 0usize..10,
        entries in prop::collection::vec(-3.0f64..3.0, 8 * 18),
    ) {
        let m = d + extra;
        let w = DMatrix::from_fn(d, m, |i, j| entries[i * 18 + j]);
        let r = rotation_from_svd(&w).unwrap();
        let a = &r.rotation;
        let err = (a * a.transpose() - DMatrix::identity(d, d)).amax();
        prop_assert!(err < 1e-10);
        for win in r.singular_values.as_slice().windows(2) {
            prop_assert!(win[0] >= win[1]);
        }
    }

    #[test]
    fn woodbury_solves_regularized_normal_equations(
        rows in 1usize..8,
        cols in 1usize..12,
        rho in 0.01f64..10.0,
        entries in prop::collection::vec(-2.0f64..2.0, 8 * 12 + 12),
    ) {
        let p = DMatrix::from_fn(rows, cols, |i, j| entries[i * 12 + j]);
        let r = DVector::from_fn(cols, |i, _| entries[96 + i]);
        let psi = MeasurementMatrix::new(p.clone()).unwrap();
        let y = WoodburyFactor::new(&psi, rho).unwrap().apply(&psi, &r);
        let lhs = (p.transpose() * &p) * &y + &y * rho;
        prop_assert!((lhs - r).amax() < 1e-8);
    }

    #[test]
    fn relative_error_is_scale_invariant(
        truth in prop::collection::vec(-5.0f64..5.0, 2..20),
        noise in prop::collection::vec(-0.1f64..0.1, 20),
        scale in 0.1f64..10.0,
    ) {
        prop_assume!(truth.iter().any(|v| v.abs() > 1e-3));
        let approx: Vec<f64> = truth.iter().zip(&noise).map(|(t, n)| t + n).collect();
        let a = relative_error_of(&approx, &truth).unwrap();
        let st: Vec<f64> = truth.iter().map(|v| v * scale).collect();
        let sa: Vec<f64> = approx.iter().map(|v| v * scale).collect();
        let b = relative_error_of(&sa, &st).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        prop_assert_eq!(relative_error_of(&truth, &truth).unwrap(), 0.0);
    }
}

proptest! {
    #[test]
    fn coherence_ignores_column_order_and_scale(
        entries in prop::collection::vec(-1.0f64..1.0, 8 * 6),
        scales in prop::collection::vec(0.1f64..10.0, 6),
        shift in 0usize..6,
    ) {
        let base = DMatrix::from_vec(8, 6, entries);
        prop_assume!(base.column_iter().all(|c| c.norm() > 1e-3));
        let changed = DMatrix::from_fn(8, 6, |i, j| {
            let src = (j + shift) % 6;
            base[(i, src)] * scales[j]
        });
        let a = coherence(&MeasurementMatrix::new(base).unwrap()).unwrap();
        let b = coherence(&MeasurementMatrix::new(changed).unwrap()).unwrap();
        prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }

    #[test]
    fn relative_error_ignores_point_order(
        pairs in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 2..40),
        shift in 0usize..40,
    ) {
        prop_assume!(pairs.iter().any(|p| p.1 != 0.0));
        let (approx, truth): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
        let k = shift % pairs.len();
        let mut ra = approx.clone();
        let mut rt = truth.clone();
        ra.rotate_left(k);
        rt.rotate_left(k);
        let a = relative_error_of(&approx, &truth).unwrap();
        let b = relative_error_of(&ra, &rt).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
    }
}
