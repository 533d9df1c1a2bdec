//! Analytic gradients against central finite differences.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotpc_core::{gradient_matrix, sample_inputs, BasisSet, PolynomialFamily, Surrogate};

const STEP: f64 = 1e-5;

fn relative(err: f64, scale: f64) -> f64 {
    err / scale.max(1e-12)
}

fn random_orthogonal(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    m.qr().q()
}

fn random_point(family: PolynomialFamily, d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..d)
        .map(|_| match family {
            PolynomialFamily::Legendre => rng.random_range(-0.9..0.9),
            PolynomialFamily::Hermite => rng.random_range(-2.0..2.0),
            PolynomialFamily::Laguerre => rng.random_range(0.1..3.0),
        })
        .collect()
}

#[test]
fn basis_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for config in 0..20 {
        let family = PolynomialFamily::ALL[config % 3];
        let d = rng.random_range(1..=12);
        let p = rng.random_range(1..=4);
        let basis = BasisSet::new(family, d, p).unwrap();
        let x = random_point(family, d, &mut rng);
        let grad = basis.eval_grad(&x).unwrap();
        let mut fd = DMatrix::zeros(d, basis.len());
        for k in 0..d {
            let (mut a, mut b) = (x.clone(), x.clone());
            a[k] += STEP;
            b[k] -= STEP;
            let diff = (basis.eval(&a).unwrap() - basis.eval(&b).unwrap()) / (2.0 * STEP);
            fd.row_mut(k).copy_from(&diff.transpose());
        }
        let err = relative((&grad - &fd).norm(), fd.norm());
        assert!(err < 1e-6, "{family} d={d} p={p}: {err}");
    }
}

#[test]
fn gradient_matrix_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for config in 0..20 {
        let family = PolynomialFamily::ALL[config % 3];
        let d = rng.random_range(1..=12);
        let p = rng.random_range(1..=4);
        let basis = BasisSet::new(family, d, p).unwrap();
        let coeffs = DVector::from_fn(basis.len(), |_, _| rng.random_range(-1.0..1.0));
        let rotation = random_orthogonal(d, &mut rng);
        let m = 7;
        let mut xi = DMatrix::zeros(m, d);
        for q in 0..m {
            let pt = random_point(family, d, &mut rng);
            for k in 0..d {
                xi[(q, k)] = pt[k];
            }
        }
        let w = gradient_matrix(&basis, &coeffs, &rotation, &xi).unwrap();
        assert_eq!(w.shape(), (d, m));
        let s = Surrogate::new(&basis, &coeffs, &rotation).unwrap();
        let mut fd = DMatrix::zeros(d, m);
        for q in 0..m {
            let x: Vec<f64> = xi.row(q).iter().copied().collect();
            for k in 0..d {
                let (mut a, mut b) = (x.clone(), x.clone());
                a[k] += STEP;
                b[k] -= STEP;
                fd[(k, q)] = (s.eval(&a).unwrap() - s.eval(&b).unwrap()) / (2.0 * STEP) / (m as f64).sqrt();
            }
        }
        let err = relative((&w - &fd).norm(), fd.norm());
        assert!(err < 1e-6, "{family} d={d} p={p}: {err}");
    }
}

#[test]
fn gradient_matrix_identity_rotation_is_surrogate_gradient() {
    let basis = BasisSet::new(PolynomialFamily::Hermite, 3, 2).unwrap();
    let mut coeffs = DVector::zeros(basis.len());
    // pick out the linear term in the second variable
    let j = basis
        .indices()
        .iter()
        .position(|m| m.degrees() == [0, 1, 0])
        .unwrap();
    coeffs[j] = 2.0;
    let xi = sample_inputs(PolynomialFamily::Hermite, 3, 4, 1).unwrap();
    let w = gradient_matrix(&basis, &coeffs, &DMatrix::identity(3, 3), &xi).unwrap();
    for q in 0..4 {
        assert!(w[(0, q)].abs() < 1e-15 && w[(2, q)].abs() < 1e-15);
        assert!((w[(1, q)] - 1.0).abs() < 1e-14);
    }
}
