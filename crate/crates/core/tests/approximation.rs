use twistlab_core::asymptotics::{approx_mean_x, approx_var_zprime};
use twistlab_core::{closed_form_report, SpinMagnitude, TwistParameters};

fn relative_error(s: f64, mu: f64) -> f64 {
    let spin = SpinMagnitude::from_f64(s).unwrap();
    let p = TwistParameters::symmetric(mu).unwrap();
    let exact = closed_form_report(spin, &p).unwrap().var_zprime;
    approx_var_zprime(spin, &p).var_zprime / exact - 1.0
}

fn band(s: f64, lo_factor: f64, points: usize) -> Vec<f64> {
    let (lo, hi) = (lo_factor / s, 1.0 / (3.0 * s.sqrt()));
    (0..points)
        .map(|i| lo * (hi / lo).powf(i as f64 / (points - 1) as f64))
        .collect()
}

#[test]
fn reference_point() {
    let e = relative_error(1000.0, 0.01);
    assert!(e.abs() <= 0.05, "{e}");
    assert!((e + 0.034).abs() < 0.001, "{e}");
}

#[test]
#[ignore = "the approximation exceeds 5% for mu below about 4.1/S (5.3% at mu = 3/S)"]
fn five_percent_over_full_band() {
    for s in [1e3, 1e4] {
        for mu in band(s, 3.0, 200) {
            let e = relative_error(s, mu);
            assert!(e.abs() <= 0.05, "S = {s}, mu = {mu}: {e}");
        }
    }
}

#[test]
fn measured_band_error() {
    for s in [1e3, 1e4] {
        let worst = band(s, 3.0, 200)
            .into_iter()
            .map(|mu| relative_error(s, mu).abs())
            .fold(0.0, f64::max);
        assert!(worst > 0.052 && worst < 0.0535, "S = {s}: {worst}");
        for mu in band(s, 4.2, 200) {
            let e = relative_error(s, mu);
            assert!(e.abs() <= 0.05, "S = {s}, mu = {mu}: {e}");
        }
    }
}

#[test]
fn mean_spin_approximation() {
    let spin = SpinMagnitude::from_f64(1e4).unwrap();
    let p = TwistParameters::symmetric(1e-3).unwrap();
    let exact = closed_form_report(spin, &p).unwrap().mean_x;
    assert!((approx_mean_x(spin, &p) / exact - 1.0).abs() < 1e-3);
}

#[test]
fn large_spin_prediction() {
    let spin = SpinMagnitude::from_f64(4e6).unwrap();
    let p = TwistParameters::symmetric(5.4e-6).unwrap();
    let approx = approx_var_zprime(spin, &p).normalized;
    let zeta = closed_form_report(spin, &p).unwrap().zeta;
    assert!((approx - 0.0848).abs() < 1e-3, "{approx}");
    assert!((zeta - 0.0864).abs() < 1e-3, "{zeta}");
}
