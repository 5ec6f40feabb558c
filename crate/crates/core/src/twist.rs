//! Reduced spin dynamics of the double-pass scheme.
//!
//! After the first pass, the double lambda/8 retardation and the second
//! pass, the light is traced out and each Dicke-basis element picks up
//!
//! ```text
//! sigma(M, M') = exp(-mu' (M - M')^2 / 2) * exp(-i mu (M^2 - M'^2) / 2)
//! ```
//!
//! with `mu = (a t1)(a t2) J` and `mu' = ((a t1)^2 + (a t2)^2) J / 2`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spin::SpinDensityMatrix;

/// Where a parameter pair came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParameterSource {
    /// Built from the pass strengths and the photon half-number.
    Interaction { alpha_t1: f64, alpha_t2: f64, j_half: f64 },
    /// `mu` and `mu'` given directly.
    Direct,
    /// Sum of several pulses.
    Combined,
    /// Noise-free one-axis twisting (`mu' = 0`); not reachable with
    /// coherent light and only used as a reference.
    IdealReference,
}

/// Twisting strength `mu` and excess-noise strength `mu'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwistParameters {
    mu: f64,
    mu_prime: f64,
    source: ParameterSource,
}

impl TwistParameters {
    /// From the dimensionless pass strengths `alpha*t1`, `alpha*t2` and the
    /// photon half-number `J` (the pulse carries `2J` photons on average).
    pub fn from_interaction(alpha_t1: f64, alpha_t2: f64, j_half: f64) -> Result<Self> {
        if !(alpha_t1.is_finite() && alpha_t2.is_finite()) {
            return Err(Error::InvalidParameter("pass strengths must be finite".into()));
        }
        if !(j_half.is_finite() && j_half >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "photon half-number J = {j_half} must be >= 0"
            )));
        }
        Ok(Self {
            mu: alpha_t1 * alpha_t2 * j_half,
            mu_prime: (alpha_t1 * alpha_t1 + alpha_t2 * alpha_t2) * j_half / 2.0,
            source: ParameterSource::Interaction {
                alpha_t1,
                alpha_t2,
                j_half,
            },
        })
    }

    /// Both passes equally long, so `mu = mu'`.
    pub fn equal_passes(alpha_t: f64, j_half: f64) -> Result<Self> {
        Self::from_interaction(alpha_t, alpha_t, j_half)
    }

    /// Direct specification; requires `mu' >= |mu|`.
    pub fn from_mu(mu: f64, mu_prime: f64) -> Result<Self> {
        if !(mu.is_finite() && mu_prime.is_finite()) {
            return Err(Error::InvalidParameter("mu and mu' must be finite".into()));
        }
        if mu_prime < mu.abs() {
            return Err(Error::NonPhysicalParameters { mu, mu_prime });
        }
        Ok(Self {
            mu,
            mu_prime,
            source: ParameterSource::Direct,
        })
    }

    /// `mu = mu'`.
    pub fn symmetric(mu: f64) -> Result<Self> {
        Self::from_mu(mu, mu.abs())
    }

    /// Ideal one-axis twisting with no light noise. Skips the
    /// `mu' >= |mu|` check.
    pub fn ideal(mu: f64) -> Self {
        Self {
            mu,
            mu_prime: 0.0,
            source: ParameterSource::IdealReference,
        }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn mu_prime(&self) -> f64 {
        self.mu_prime
    }

    pub fn source(&self) -> ParameterSource {
        self.source
    }

    pub fn is_reference_only(&self) -> bool {
        matches!(self.source, ParameterSource::IdealReference) || self.mu_prime < self.mu.abs()
    }

    /// Componentwise sum; the map for the sum equals the composition of
    /// the two maps.
    pub fn combine(&self, other: &Self) -> Self {
        let both_ideal = matches!(
            (self.source, other.source),
            (ParameterSource::IdealReference, ParameterSource::IdealReference)
        );
        let source = if both_ideal {
            ParameterSource::IdealReference
        } else {
            ParameterSource::Combined
        };
        Self {
            mu: self.mu + other.mu,
            mu_prime: self.mu_prime + other.mu_prime,
            source,
        }
    }
}

/// Ordered sequence of pulses.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrain {
    pulses: Vec<TwistParameters>,
}

impl PulseTrain {
    pub fn new(pulses: Vec<TwistParameters>) -> Result<Self> {
        if pulses.is_empty() {
            return Err(Error::EmptyPulseTrain);
        }
        Ok(Self { pulses })
    }

    /// `n` identical pulses.
    pub fn repeated(pulse: TwistParameters, n: usize) -> Result<Self> {
        Self::new(vec![pulse; n])
    }

    pub fn pulses(&self) -> &[TwistParameters] {
        &self.pulses
    }

    /// Single pulse equivalent to the whole train.
    pub fn total(&self) -> TwistParameters {
        let mut it = self.pulses.iter();
        let first = *it.next().expect("non-empty by construction");
        it.fold(first, |acc, p| acc.combine(p))
    }
}

/// Elementwise factor `sigma(M, M')` for doubled quantum numbers.
#[inline]
pub fn sigma(two_m: i64, two_m_prime: i64, params: &TwistParameters) -> Complex64 {
    if two_m == two_m_prime {
        return Complex64::new(1.0, 0.0);
    }
    let dm = two_m - two_m_prime;
    // (M - M')^2 / 2 = dm^2 / 8, (M^2 - M'^2) / 2 = (two_m^2 - two_m'^2) / 8
    let damping = -params.mu_prime * (dm * dm) as f64 / 8.0;
    let phase = -params.mu * (two_m * two_m - two_m_prime * two_m_prime) as f64 / 8.0;
    Complex64::from_polar(damping.exp(), phase)
}

/// Applies the reduced double-pass map to `rho`.
pub fn evolve(rho: &SpinDensityMatrix, params: &TwistParameters) -> SpinDensityMatrix {
    let spin = rho.spin();
    let n = spin.dim();
    let mut out = rho.elements().to_vec();
    out.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let two_m = spin.two_m_at(i);
        for (j, z) in row.iter_mut().enumerate() {
            if i != j {
                *z *= sigma(two_m, spin.two_m_at(j), params);
            }
        }
    });
    SpinDensityMatrix::from_raw(spin, out)
}

/// Applies each pulse of the train in order.
pub fn evolve_train(rho: &SpinDensityMatrix, train: &PulseTrain) -> SpinDensityMatrix {
    let mut state = evolve(rho, &train.pulses[0]);
    for p in &train.pulses[1..] {
        state = evolve(&state, p);
    }
    state
}

/// Noise-free one-axis twisting `exp(-i mu Sz^2 / 2)`; reference only.
pub fn ideal_one_axis(rho: &SpinDensityMatrix, mu: f64) -> SpinDensityMatrix {
    evolve(rho, &TwistParameters::ideal(mu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::SpinMagnitude;

    fn css(s: f64) -> SpinDensityMatrix {
        SpinDensityMatrix::x_polarized(SpinMagnitude::from_f64(s).unwrap()).unwrap()
    }

    #[test]
    fn parameters_from_interaction() {
        let p = TwistParameters::from_interaction(0.01, 0.02, 100.0).unwrap();
        assert!((p.mu() - 0.02).abs() < 1e-15);
        assert!((p.mu_prime() - 0.025).abs() < 1e-15);
        let q = TwistParameters::equal_passes(0.01, 100.0).unwrap();
        assert_eq!(q.mu(), q.mu_prime());
        assert!(TwistParameters::from_interaction(0.1, 0.1, -1.0).is_err());
    }

    #[test]
    fn direct_parameters_enforce_physicality() {
        assert!(matches!(
            TwistParameters::from_mu(0.2, 0.1),
            Err(Error::NonPhysicalParameters { .. })
        ));
        assert!(matches!(
            TwistParameters::from_mu(-0.2, 0.1),
            Err(Error::NonPhysicalParameters { .. })
        ));
        assert!(TwistParameters::from_mu(0.2, 0.2).is_ok());
        assert!(TwistParameters::ideal(0.2).is_reference_only());
        assert!(!TwistParameters::symmetric(0.2).unwrap().is_reference_only());
    }

    #[test]
    fn sigma_values() {
        let p = TwistParameters::from_mu(0.2, 0.2).unwrap();
        assert_eq!(sigma(4, 4, &p), Complex64::new(1.0, 0.0));
        // M = 1, M' = 0: exp(-0.1) exp(-0.1 i)
        let s = sigma(2, 0, &p);
        assert!((s.re - 0.900_316_999_845_194).abs() < 1e-12, "{s}");
        assert!((s.im + 0.090_333_010_952_424_17).abs() < 1e-12, "{s}");

        let q = TwistParameters::from_mu(0.25, 0.3).unwrap();
        let s = sigma(1, -1, &q);
        assert!((s.re - (-0.15f64).exp()).abs() < 1e-15);
        assert_eq!(s.im, 0.0);
    }

    #[test]
    fn zero_parameters_are_identity() {
        let rho = css(7.5);
        let out = evolve(&rho, &TwistParameters::from_mu(0.0, 0.0).unwrap());
        assert!(out.max_abs_diff(&rho) <= 1e-15);
    }

    #[test]
    fn first_pass_only_broadens_y() {
        let rho = css(20.0);
        let out = evolve(&rho, &TwistParameters::from_mu(0.0, 0.1).unwrap());
        assert_eq!(out.diagonal(), rho.diagonal());
        let m = out.moments();
        assert!((m.variance(2) - 10.0).abs() < 1e-11);
        assert!(m.variance(1) > 10.0);
    }

    #[test]
    fn train_matches_single_pulse() {
        let rho = css(12.0);
        let p = TwistParameters::from_mu(0.02, 0.02).unwrap();
        let train = PulseTrain::repeated(p, 7).unwrap();
        let a = evolve_train(&rho, &train);
        let b = evolve(&rho, &TwistParameters::from_mu(0.14, 0.14).unwrap());
        assert!(a.max_abs_diff(&b) < 1e-12);
        assert!((train.total().mu() - 0.14).abs() < 1e-15);
    }

    #[test]
    fn empty_train_rejected() {
        assert_eq!(PulseTrain::new(vec![]), Err(Error::EmptyPulseTrain));
    }

    #[test]
    fn ideal_twist_period_at_spin_two() {
        let rho = css(2.0);
        assert!(ideal_one_axis(&rho, 0.0).max_abs_diff(&rho) == 0.0);
        // M^2 - M'^2 is an integer, so a phase of mu/2 * integer with
        // mu = 4 pi S = 8 pi returns every element to itself.
        let back = ideal_one_axis(&rho, std::f64::consts::PI * 4.0 * 2.0);
        assert!(back.max_abs_diff(&rho) < 1e-13);
        // brute-force: smallest positive mu on a fine scan that restores
        // the state is 4 pi
        let period = (1..=4000)
            .map(|k| k as f64 * std::f64::consts::PI / 1000.0)
            .find(|&mu| ideal_one_axis(&rho, mu).max_abs_diff(&rho) < 1e-12)
            .unwrap();
        assert!((period - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    }
}
