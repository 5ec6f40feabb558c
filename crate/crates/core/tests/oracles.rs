use twistlab_core::oracle::{coherent_branch_evolve, convergence_study, fock_evolve, is_monotone, FockStatus};
use twistlab_core::{SpinDensityMatrix, SpinMagnitude};

fn spin(s: f64) -> SpinMagnitude {
    SpinMagnitude::from_f64(s).unwrap()
}

#[test]
fn fock_lattice_matches_coherent_branches() {
    let f = fock_evolve(spin(1.0), 8.0, 32, 1e-2, 1e-2).unwrap();
    let c = coherent_branch_evolve(spin(1.0), 4.0, 1e-2, 1e-2).unwrap();
    assert!(f.rho.max_abs_diff(&c) <= 1e-6);
    assert_eq!(f.status, FockStatus::Ok);
    // stronger coupling, unequal passes, half-integer spin
    let f = fock_evolve(spin(1.5), 6.0, 36, 0.3, 0.1).unwrap();
    let c = coherent_branch_evolve(spin(1.5), 3.0, 0.3, 0.1).unwrap();
    assert!(f.rho.max_abs_diff(&c) <= 1e-6);
}

#[test]
fn reduced_map_is_the_weak_coupling_limit() {
    let points = convergence_study(spin(2.0), 0.1, &[1e-1, 1e-2, 1e-3]).unwrap();
    assert!(is_monotone(&points), "{points:?}");
    assert!(points[2].max_abs_deviation <= 1e-3);
    // second order in alpha t
    let ratio = points[0].max_abs_deviation / points[1].max_abs_deviation;
    assert!((ratio / 100.0 - 1.0).abs() < 0.05, "{ratio}");
}

#[test]
fn both_oracles_preserve_populations() {
    let css = SpinDensityMatrix::x_polarized(spin(0.5)).unwrap();
    let c = coherent_branch_evolve(spin(0.5), 20.0, 0.05, 0.07).unwrap();
    let f = fock_evolve(spin(0.5), 4.0, 40, 0.05, 0.07).unwrap();
    for (a, b) in c.diagonal().iter().zip(css.diagonal()) {
        assert!((a - b).abs() < 1e-15);
    }
    for (a, b) in f.rho.diagonal().iter().zip(css.diagonal()) {
        assert!((a - b * (1.0 - f.leakage)).abs() < 1e-12);
    }
}

#[test]
fn outputs_are_valid_states() {
    let c = coherent_branch_evolve(spin(3.0), 50.0, 0.02, 0.02).unwrap();
    assert!(c.check_invariants().is_ok());
    let f = fock_evolve(spin(2.0), 6.0, 40, 0.05, 0.05).unwrap();
    assert!(f.rho.normalized().check_invariants().is_ok());
}

#[test]
fn first_pass_broadens_y_monotonically() {
    let css_var = 1.5;
    let mut last = css_var;
    for j in [10.0, 100.0, 400.0, 1600.0] {
        let rho = coherent_branch_evolve(spin(3.0), j, 0.01, 0.0).unwrap();
        let v = rho.moments().variance(1);
        assert!(v > last, "J = {j}: {v} <= {last}");
        last = v;
    }
}
