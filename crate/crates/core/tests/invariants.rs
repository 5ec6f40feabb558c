use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

use twistlab_core::twist::evolve_train;
use twistlab_core::{
    evolve, qpd, PulseTrain, QpdGridSpec, QpdNormalization, SpinDensityMatrix, SpinMagnitude, TwistParameters,
};

fn params() -> impl Strategy<Value = TwistParameters> {
    (-1.5f64..1.5, 0.0f64..1.0).prop_map(|(mu, extra)| TwistParameters::from_mu(mu, mu.abs() + extra).unwrap())
}

fn state(max_two_s: u32) -> impl Strategy<Value = SpinDensityMatrix> {
    (1..=max_two_s, 0.0f64..=PI, -PI..PI).prop_map(|(two_s, theta, phi)| {
        SpinDensityMatrix::coherent(SpinMagnitude::from_twice(two_s).unwrap(), theta, phi).unwrap()
    })
}

fn min_eigenvalue(rho: &SpinDensityMatrix) -> f64 {
    let n = rho.dim();
    let m = DMatrix::from_fn(n, n, |i, j| rho.at(i, j));
    SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn diagonal_is_untouched(rho in state(80), p in params()) {
        let out = evolve(&rho, &p);
        prop_assert_eq!(out.diagonal(), rho.diagonal());
    }

    #[test]
    fn trace_and_hermiticity(rho in state(80), p in params()) {
        let out = evolve(&rho, &p);
        prop_assert!((out.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        prop_assert!(out.hermiticity_defect() < 1e-12);
        prop_assert!(out.check_invariants().is_ok());
    }

    #[test]
    fn casimir_identity(rho in state(80), p in params()) {
        let out = evolve(&rho, &p);
        let s = out.spin();
        let c = out.moments().casimir();
        prop_assert!((c - s.casimir()).abs() <= 1e-9 * s.casimir(), "{} vs {}", c, s.casimir());
    }

    #[test]
    fn train_composes(rho in state(60), pulses in prop::collection::vec(params(), 1..6)) {
        let train = PulseTrain::new(pulses).unwrap();
        let stepwise = evolve_train(&rho, &train);
        let once = evolve(&rho, &train.total());
        prop_assert!(stepwise.max_abs_diff(&once) < 1e-12);
    }

    #[test]
    fn qpd_is_normalized(rho in state(24), p in params()) {
        let out = evolve(&rho, &p);
        let two_s = out.spin().two_s() as usize;
        // phi grid resolves every coherence order exactly; Gauss-Legendre in
        // cos(theta) is exact for the remaining degree-2S polynomial
        let n_phi = 2 * two_s + 2;
        let (nodes, weights) = gauss_legendre(two_s / 2 + 2);
        let theta: Vec<f64> = nodes.iter().map(|x| x.acos()).collect();
        let phi: Vec<f64> = (0..n_phi).map(|j| -PI + 2.0 * PI * j as f64 / n_phi as f64).collect();
        let spec = QpdGridSpec::from_samples(theta, phi, QpdNormalization::Raw).unwrap();
        let grid = qpd(&out, &spec).unwrap();
        let mut integral = 0.0;
        for (i, w) in weights.iter().enumerate() {
            let row: f64 = (0..n_phi).map(|j| grid.value(i, j)).sum();
            integral += w * row * 2.0 * PI / n_phi as f64;
        }
        let normalized = integral * (two_s + 1) as f64 / (4.0 * PI);
        prop_assert!((normalized - 1.0).abs() < 1e-6, "{}", normalized);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn stays_positive(rho in state(199), p in params()) {
        let out = evolve(&rho, &p);
        prop_assert!(min_eigenvalue(&out) >= -1e-10);
    }
}

/// Nodes and weights on [-1, 1] by Newton iteration on `P_n`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for k in 0..n {
        let mut x = (PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

#[test]
fn gauss_legendre_integrates_polynomials() {
    let (x, w) = gauss_legendre(5);
    let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
    assert!((integral - 2.0 / 9.0).abs() < 1e-14);
}
