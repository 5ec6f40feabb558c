use twistlab_core::asymptotics::{fit_scaling, log_spaced_spins, scaling_sweep, APPROX_MINIMUM_PREFACTORS};

#[test]
fn exponents_over_three_decades() {
    let spins = log_spaced_spins(1e2, 1e5, 13).unwrap();
    let rows = scaling_sweep(&spins).unwrap();
    let fit = fit_scaling(&rows).unwrap();
    assert!((fit.mu_half.slope + 1.0).abs() < 0.05, "{fit:?}");
    assert!((fit.mu_min.slope + 0.6).abs() < 0.05, "{fit:?}");
    assert!((fit.zeta_min.slope + 0.4).abs() < 0.05, "{fit:?}");
    assert!((fit.ideal_zeta_min.slope + 2.0 / 3.0).abs() < 0.05, "{fit:?}");
    for r in &rows {
        assert!(r.exact.mu_half < r.exact.mu_min);
        assert!(r.ideal_zeta_min < r.exact.zeta_min);
    }
}

#[test]
fn mu_min_prefactor_approaches_approx_minimum() {
    let spins = log_spaced_spins(1e6, 1e7, 2).unwrap();
    for row in scaling_sweep(&spins).unwrap() {
        let s = row.exact.spin.value();
        let c = row.exact.mu_min * s.powf(0.6);
        assert!(
            (c / APPROX_MINIMUM_PREFACTORS.mu_min - 1.0).abs() < 0.02,
            "S = {s}: {c}"
        );
    }
}
