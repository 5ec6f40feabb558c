//! Large-S behaviour with equal pass durations (`mu = mu'`).
//!
//! The approximate minor-axis variance is
//!
//! ```text
//! <dS_z'^2> ~ (S/2) (g' / (g^2 + g') + (2/3) b^2),   g = S mu / 2, g' = S mu' / 2, b = S mu^2 / 4
//! ```
//!
//! and `<S_x> ~ S (1 - b)`. The exact values of `mu_half`, `mu_min` and the
//! minimal squeezing parameter come from the closed-form report, which stays
//! cheap up to `S ~ 1e7`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::observables::closed_form_report;
use crate::optimize::{brent_root, fit_power_law, log_scan_minimize};
use crate::spin::SpinMagnitude;
use crate::twist::TwistParameters;

/// Search interval for `mu_min` is `(MU_SEARCH_LO, pi/2]`.
pub const MU_SEARCH_LO: f64 = 1e-12;
const MU_SEARCH_HI: f64 = std::f64::consts::FRAC_PI_2;
const SCAN_POINTS: usize = 400;
/// Absolute tolerance on `mu` for both searches.
pub const MU_TOL: f64 = 1e-10;

/// Power-law prefactors `c` in `c * S^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prefactors {
    pub mu_half: f64,
    pub mu_min: f64,
    pub zeta_min: f64,
}

/// Asymptotic forms: `2 S^-1`, `2 (3/2)^(1/5) S^(-3/5)`, `(2/3)^(1/5) S^(-2/5)`.
pub const ASYMPTOTIC_PREFACTORS: Prefactors = Prefactors {
    mu_half: 2.0,
    mu_min: 2.168_943_542_395_397,
    zeta_min: 0.922_107_911_481_727_8,
};

/// Obtained by minimizing the approximate variance directly:
/// `mu_min = 12^(1/5) S^(-3/5)` and a normalized variance of
/// `(5/2) 12^(-1/5) S^(-2/5)` there.
pub const APPROX_MINIMUM_PREFACTORS: Prefactors = Prefactors {
    mu_half: 2.0,
    mu_min: 1.643_751_829_517_225_8,
    zeta_min: 1.520_910_854_733_014_4,
};

/// Noise-free one-axis twisting: `zeta_min ~ (1/3)^(1/3) S^(-2/3)`.
pub const IDEAL_ZETA_MIN_PREFACTOR: f64 = 0.693_361_274_350_634_7;
pub const IDEAL_ZETA_MIN_EXPONENT: f64 = -2.0 / 3.0;

/// Dimensionless combinations entering the approximate variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwistScaledParams {
    pub gamma: f64,
    pub gamma_prime: f64,
    pub beta: f64,
}

impl TwistScaledParams {
    pub fn new(spin: SpinMagnitude, params: &TwistParameters) -> Self {
        let s = spin.value();
        Self {
            gamma: s * params.mu() / 2.0,
            gamma_prime: s * params.mu_prime() / 2.0,
            beta: s * params.mu() * params.mu() / 4.0,
        }
    }
}

/// Approximate minor-axis variance with a validity flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxVariance {
    pub var_zprime: f64,
    /// `var_zprime / (S/2)`.
    pub normalized: f64,
    /// `S >= 100`, `3/S <= mu <= S^(-1/2)/3` and `|mu| <= mu' <= 3|mu|`.
    pub in_regime: bool,
}

pub fn approx_var_zprime(spin: SpinMagnitude, params: &TwistParameters) -> ApproxVariance {
    let s = spin.value();
    let TwistScaledParams {
        gamma,
        gamma_prime,
        beta,
    } = TwistScaledParams::new(spin, params);
    let denom = gamma * gamma + gamma_prime;
    let noise = if denom == 0.0 { 1.0 } else { gamma_prime / denom };
    let normalized = noise + 2.0 / 3.0 * beta * beta;

    let mu = params.mu().abs();
    let in_regime = s >= 100.0
        && mu >= 3.0 / s
        && mu <= 1.0 / (3.0 * s.sqrt())
        && params.mu_prime() >= mu
        && params.mu_prime() <= 3.0 * mu;
    ApproxVariance {
        var_zprime: s / 2.0 * normalized,
        normalized,
        in_regime,
    }
}

/// `S (1 - b)`.
pub fn approx_mean_x(spin: SpinMagnitude, params: &TwistParameters) -> f64 {
    spin.value() * (1.0 - TwistScaledParams::new(spin, params).beta)
}

fn var_zprime_at(spin: SpinMagnitude, params: TwistParameters) -> f64 {
    closed_form_report(spin, &params)
        .map(|r| r.var_zprime)
        .unwrap_or(f64::INFINITY)
}

fn require_twistable(spin: SpinMagnitude) -> Result<()> {
    if spin.two_s() < 2 {
        return Err(Error::InvalidSpin(format!("S = {spin} cannot be squeezed")));
    }
    Ok(())
}

/// `mu = mu'` minimizing the minor-axis variance, and the squeezing
/// parameter there. Returns `(mu_min, zeta)`.
pub fn find_mu_min(spin: SpinMagnitude) -> Result<(f64, f64)> {
    require_twistable(spin)?;
    let (mu, _) = log_scan_minimize(
        |mu| var_zprime_at(spin, TwistParameters::from_mu(mu, mu).expect("mu = mu' is physical")),
        MU_SEARCH_LO,
        MU_SEARCH_HI,
        SCAN_POINTS,
        MU_TOL,
    );
    let report = closed_form_report(spin, &TwistParameters::symmetric(mu)?)?;
    Ok((mu, report.zeta))
}

/// Same search with `mu' = 0`. Reference only.
pub fn find_mu_min_ideal(spin: SpinMagnitude) -> Result<(f64, f64)> {
    require_twistable(spin)?;
    let (mu, _) = log_scan_minimize(
        |mu| var_zprime_at(spin, TwistParameters::ideal(mu)),
        MU_SEARCH_LO,
        MU_SEARCH_HI,
        SCAN_POINTS,
        MU_TOL,
    );
    let report = closed_form_report(spin, &TwistParameters::ideal(mu))?;
    Ok((mu, report.zeta))
}

/// Smallest `mu = mu'` at which the minor-axis variance reaches `S/4`,
/// i.e. half the coherent-state value.
pub fn find_mu_half(spin: SpinMagnitude) -> Result<f64> {
    let (mu_min, _) = find_mu_min(spin)?;
    let target = spin.value() / 4.0;
    brent_root(
        |mu| var_zprime_at(spin, TwistParameters::from_mu(mu, mu).expect("mu = mu' is physical")) - target,
        0.0,
        mu_min,
        MU_TOL,
        200,
    )
}

/// Smallest `mu = mu'` at which the squeezing parameter reaches 1/2. Unlike
/// the variance criterion this includes the shrinking mean spin and has no
/// solution for small `S`.
pub fn find_mu_zeta_half(spin: SpinMagnitude) -> Result<f64> {
    let (mu_min, _) = find_mu_min(spin)?;
    let zeta = |mu: f64| {
        closed_form_report(spin, &TwistParameters::from_mu(mu, mu).expect("mu = mu' is physical"))
            .map(|r| r.zeta)
            .unwrap_or(f64::INFINITY)
    };
    brent_root(|mu| zeta(mu) - 0.5, 0.0, mu_min, MU_TOL, 200)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScalingSource {
    #[serde(rename = "exact-numeric")]
    ExactNumeric,
    #[serde(rename = "approx-formula")]
    ApproxFormula,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingPoint {
    #[serde(serialize_with = "serialize_spin")]
    pub spin: SpinMagnitude,
    pub mu_half: f64,
    pub mu_min: f64,
    pub zeta_min: f64,
    pub source: ScalingSource,
}

fn serialize_spin<S: serde::Serializer>(spin: &SpinMagnitude, ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.serialize_f64(spin.value())
}

/// Asymptotic forms evaluated at `spin`.
pub fn approx_scaling(spin: SpinMagnitude) -> ScalingPoint {
    let s = spin.value();
    let p = ASYMPTOTIC_PREFACTORS;
    ScalingPoint {
        spin,
        mu_half: p.mu_half / s,
        mu_min: p.mu_min * s.powf(-0.6),
        zeta_min: p.zeta_min * s.powf(-0.4),
        source: ScalingSource::ApproxFormula,
    }
}

/// Numerically exact counterpart of [`approx_scaling`].
pub fn exact_scaling(spin: SpinMagnitude) -> Result<ScalingPoint> {
    let (mu_min, zeta_min) = find_mu_min(spin)?;
    let mu_half = find_mu_half(spin)?;
    Ok(ScalingPoint {
        spin,
        mu_half,
        mu_min,
        zeta_min,
        source: ScalingSource::ExactNumeric,
    })
}

/// One spin of an S-sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRow {
    pub exact: ScalingPoint,
    pub approx: ScalingPoint,
    pub ideal_mu_min: f64,
    pub ideal_zeta_min: f64,
}

/// `n` spins log-spaced over `[lo, hi]`, rounded to multiples of 1/2.
pub fn log_spaced_spins(lo: f64, hi: f64, n: usize) -> Result<Vec<SpinMagnitude>> {
    if !(lo > 0.0 && hi >= lo) || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "bad spin range [{lo}, {hi}] with {n} points"
        )));
    }
    if n == 1 {
        return Ok(vec![SpinMagnitude::nearest(lo)?]);
    }
    let step = (hi / lo).ln() / (n - 1) as f64;
    (0..n)
        .map(|i| SpinMagnitude::nearest(lo * (step * i as f64).exp()))
        .collect()
}

/// Runs the exact, approximate and ideal-reference searches for every spin,
/// in parallel. Row order follows `spins`.
pub fn scaling_sweep(spins: &[SpinMagnitude]) -> Result<Vec<ScalingRow>> {
    spins
        .par_iter()
        .map(|&spin| {
            let exact = exact_scaling(spin)?;
            let (ideal_mu_min, ideal_zeta_min) = find_mu_min_ideal(spin)?;
            Ok(ScalingRow {
                exact,
                approx: approx_scaling(spin),
                ideal_mu_min,
                ideal_zeta_min,
            })
        })
        .collect()
}

/// Fitted `slope` and `prefactor` of `prefactor * S^slope`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLaw {
    pub slope: f64,
    pub prefactor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    pub mu_half: PowerLaw,
    pub mu_min: PowerLaw,
    pub zeta_min: PowerLaw,
    pub ideal_zeta_min: PowerLaw,
}

/// Least-squares power laws through the exact sweep results.
pub fn fit_scaling(rows: &[ScalingRow]) -> Result<ScalingFit> {
    if rows.len() < 2 {
        return Err(Error::InvalidParameter(
            "a power-law fit needs at least two spins".into(),
        ));
    }
    let s: Vec<f64> = rows.iter().map(|r| r.exact.spin.value()).collect();
    let fit = |ys: Vec<f64>| {
        let (slope, prefactor) = fit_power_law(&s, &ys);
        PowerLaw { slope, prefactor }
    };
    Ok(ScalingFit {
        mu_half: fit(rows.iter().map(|r| r.exact.mu_half).collect()),
        mu_min: fit(rows.iter().map(|r| r.exact.mu_min).collect()),
        zeta_min: fit(rows.iter().map(|r| r.exact.zeta_min).collect()),
        ideal_zeta_min: fit(rows.iter().map(|r| r.ideal_zeta_min).collect()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spin(s: f64) -> SpinMagnitude {
        SpinMagnitude::from_f64(s).unwrap()
    }

    #[test]
    fn scaled_params() {
        let p = TwistParameters::symmetric(5.4e-6).unwrap();
        let t = TwistScaledParams::new(spin(4e6), &p);
        assert!((t.gamma - 10.8).abs() < 1e-12);
        assert!((t.gamma_prime - 10.8).abs() < 1e-12);
        assert!((t.beta - 2.916e-5).abs() < 1e-15);
    }

    #[test]
    fn approx_variance_at_large_spin() {
        let a = approx_var_zprime(spin(4e6), &TwistParameters::symmetric(5.4e-6).unwrap());
        assert!((a.normalized - 10.8 / (10.8 * 10.8 + 10.8)).abs() < 1e-9);
        assert!((a.normalized - 0.085).abs() < 0.001);
        assert!(a.in_regime);
    }

    #[test]
    fn approx_variance_vanishing_twist() {
        let a = approx_var_zprime(spin(1000.0), &TwistParameters::from_mu(0.0, 0.01).unwrap());
        assert_eq!(a.normalized, 1.0);
        assert!(!a.in_regime);
        let b = approx_var_zprime(spin(1000.0), &TwistParameters::from_mu(0.0, 0.0).unwrap());
        assert_eq!(b.var_zprime, 500.0);
    }

    #[test]
    fn approx_mean() {
        let p = TwistParameters::symmetric(0.01).unwrap();
        assert!((approx_mean_x(spin(1000.0), &p) - 1000.0 * (1.0 - 0.025)).abs() < 1e-9);
    }

    #[test]
    fn anchors_at_spin_twenty() {
        let (mu_min, zeta) = find_mu_min(spin(20.0)).unwrap();
        let mu_half = find_mu_half(spin(20.0)).unwrap();
        assert!((mu_min - 0.236).abs() < 0.005, "{mu_min}");
        assert!((mu_half - 0.117).abs() < 0.002, "{mu_half}");
        assert!((zeta - 0.5697).abs() < 1e-4, "{zeta}");
        let r = closed_form_report(spin(20.0), &TwistParameters::symmetric(mu_half).unwrap()).unwrap();
        assert!((r.var_zprime / 10.0 - 0.5).abs() < 1e-9);
    }

    #[test]
    fn mu_min_is_a_local_minimum() {
        for s in [4.0, 20.0, 1e3, 1e5] {
            let (m, _) = find_mu_min(spin(s)).unwrap();
            let v = |mu: f64| var_zprime_at(spin(s), TwistParameters::symmetric(mu).unwrap());
            let eps = 1e-4 * m;
            assert!(v(m - eps) >= v(m) && v(m + eps) >= v(m), "S = {s}");
        }
    }

    #[test]
    fn half_point_precedes_minimum() {
        // the minimal normalized variance first drops below 1/2 between
        // S = 8.5 (0.5015) and S = 9 (0.4932)
        assert!(matches!(find_mu_half(spin(8.5)), Err(Error::RootNotBracketed { .. })));
        for s in [9.0, 20.0, 1e3, 1e5] {
            let half = find_mu_half(spin(s)).unwrap();
            assert!(half > 0.0 && half < find_mu_min(spin(s)).unwrap().0, "S = {s}");
        }
    }

    #[test]
    fn small_spin_has_no_half_point() {
        assert!(matches!(find_mu_half(spin(1.0)), Err(Error::RootNotBracketed { .. })));
        assert!(matches!(find_mu_min(spin(0.5)), Err(Error::InvalidSpin(_))));
        // the mean spin shrinks too fast for zeta to reach 1/2 at S = 20
        assert!(find_mu_zeta_half(spin(20.0)).is_err());
        assert!(find_mu_zeta_half(spin(1e3)).unwrap() > find_mu_half(spin(1e3)).unwrap());
    }

    #[test]
    fn approx_scaling_formulas() {
        let p = approx_scaling(spin(20.0));
        assert!((p.mu_half - 0.1).abs() < 1e-15);
        assert!((p.mu_min - 0.359).abs() < 5e-4);
        let q = approx_scaling(spin(1e6));
        assert!((q.zeta_min - 3.67e-3).abs() < 5e-6);
        assert_eq!(q.source, ScalingSource::ApproxFormula);
    }

    #[test]
    fn spin_grid() {
        let g = log_spaced_spins(100.0, 1e5, 13).unwrap();
        assert_eq!(g.len(), 13);
        assert_eq!(g[0].value(), 100.0);
        assert_eq!(g[12].value(), 1e5);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(log_spaced_spins(0.0, 1.0, 3).is_err());
    }
}
