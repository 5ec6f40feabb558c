//! From laboratory parameters to `(mu, J)` and a list of validity checks.
//!
//! Conventions (two-level atom, far detuned, circular components):
//!
//! ```text
//! sigma0 = 3 lambda^2 / (2 pi)             d0 = 2 S sigma0 / (pi w^2)
//! I      = P / (pi w^2)                    I_sat = pi h c Gamma / (3 lambda^3)
//! Omega  = Gamma sqrt(I / (2 I_sat))
//! r      = (Gamma/2) (Omega^2/4) / (Delta^2 + Gamma^2/4 + Omega^2/4)
//! mu     = mu' = r T sigma0 / (2 pi w^2)   J = P T lambda / (2 h c)
//! ```
//!
//! `I` is the peak intensity carried by one circular component of the
//! linearly polarized pulse.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::closed_form_report;
use crate::spin::SpinMagnitude;
use crate::twist::TwistParameters;

/// Planck constant, J s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Flag thresholds.
pub const MIN_DETUNING_RATIO: f64 = 100.0;
pub const MAX_RABI_RATIO: f64 = 0.01;
pub const MAX_RT_S_MU: f64 = 0.1;
pub const MAX_INVERSE_S_MU: f64 = 0.1;
pub const MIN_PHOTON_HALF_NUMBER: f64 = 100.0;
pub const MIN_D0_RT: f64 = 8.0;
pub const MODE_MATCHING_RANGE: (f64, f64) = (0.3, 3.0);

/// Atoms, optics and detuning; everything except the pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Apparatus {
    /// Resonance wavelength, m.
    pub lambda0: f64,
    /// Natural linewidth, rad/s.
    pub gamma_natural: f64,
    /// Detuning, rad/s (sign ignored).
    pub detuning: f64,
    /// Beam waist, m.
    pub waist: f64,
    pub total_spin: f64,
    /// Sample length, m.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_length: Option<f64>,
}

/// Full description of one squeezing pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpticalSetup {
    pub lambda0: f64,
    pub gamma_natural: f64,
    pub detuning: f64,
    /// Square-pulse peak power, W.
    pub power: f64,
    /// Pulse duration, s.
    pub duration: f64,
    pub waist: f64,
    pub total_spin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_length: Option<f64>,
}

impl Apparatus {
    /// Yb-171 on the 399 nm line: 3 um waist, S = 4e6, L = 70 um.
    pub fn yb171() -> Self {
        Self {
            lambda0: 399e-9,
            gamma_natural: 2.0 * PI * 29e6,
            detuning: 2.0 * PI * 24e9,
            waist: 3e-6,
            total_spin: 4e6,
            sample_length: Some(70e-6),
        }
    }

    pub fn with_pulse(&self, power: f64, duration: f64) -> OpticalSetup {
        OpticalSetup {
            lambda0: self.lambda0,
            gamma_natural: self.gamma_natural,
            detuning: self.detuning,
            power,
            duration,
            waist: self.waist,
            total_spin: self.total_spin,
            sample_length: self.sample_length,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda0", self.lambda0),
            ("gamma_natural", self.gamma_natural),
            ("waist", self.waist),
            ("total_spin", self.total_spin),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidSetup(format!("{name} = {v} must be positive")));
            }
        }
        if !(self.detuning.is_finite() && self.detuning != 0.0) {
            return Err(Error::InvalidSetup(format!(
                "detuning = {} must be finite and nonzero",
                self.detuning
            )));
        }
        if let Some(l) = self.sample_length {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidSetup(format!("sample_length = {l} must be positive")));
            }
        }
        Ok(())
    }

    pub fn sigma0(&self) -> f64 {
        3.0 * self.lambda0 * self.lambda0 / (2.0 * PI)
    }

    pub fn optical_depth(&self) -> f64 {
        2.0 * self.total_spin * self.sigma0() / (PI * self.waist * self.waist)
    }

    pub fn saturation_intensity(&self) -> f64 {
        PI * PLANCK * SPEED_OF_LIGHT * self.gamma_natural / (3.0 * self.lambda0.powi(3))
    }

    /// Peak intensity per circular component at power `power`.
    pub fn intensity(&self, power: f64) -> f64 {
        power / (PI * self.waist * self.waist)
    }

    pub fn rabi(&self, power: f64) -> f64 {
        self.gamma_natural * (self.intensity(power) / (2.0 * self.saturation_intensity())).sqrt()
    }

    /// Scattering rate per atom at power `power`, 1/s.
    pub fn scatter_rate(&self, power: f64) -> f64 {
        let g = self.gamma_natural;
        let w2 = self.rabi(power).powi(2) / 4.0;
        g / 2.0 * w2 / (self.detuning * self.detuning + g * g / 4.0 + w2)
    }

    /// `mu` per unit `r T`.
    pub fn mu_per_rt(&self) -> f64 {
        self.sigma0() / (2.0 * PI * self.waist * self.waist)
    }

    /// `pi w^2 / (lambda L)`, if `L` is known.
    pub fn mode_matching(&self) -> Option<f64> {
        self.sample_length
            .map(|l| PI * self.waist * self.waist / (self.lambda0 * l))
    }

    pub fn spin(&self) -> Result<SpinMagnitude> {
        SpinMagnitude::nearest(self.total_spin)
    }
}

impl OpticalSetup {
    pub fn yb171() -> Self {
        Apparatus::yb171().with_pulse(17e-9, 0.24e-3)
    }

    pub fn apparatus(&self) -> Apparatus {
        Apparatus {
            lambda0: self.lambda0,
            gamma_natural: self.gamma_natural,
            detuning: self.detuning,
            waist: self.waist,
            total_spin: self.total_spin,
            sample_length: self.sample_length,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.apparatus().validate()?;
        for (name, v) in [("power", self.power), ("duration", self.duration)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidSetup(format!("{name} = {v} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Criterion {
    AtLeast { threshold: f64 },
    AtMost { threshold: f64 },
    Within { lo: f64, hi: f64 },
}

/// One named assumption check. `margin >= 1` exactly when it passes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Flag {
    pub name: &'static str,
    pub value: f64,
    pub criterion: Criterion,
    pub pass: bool,
    pub margin: f64,
}

impl Flag {
    fn new(name: &'static str, value: f64, criterion: Criterion) -> Self {
        let margin = match criterion {
            Criterion::AtLeast { threshold } => value / threshold,
            Criterion::AtMost { threshold } => threshold / value,
            Criterion::Within { lo, hi } => (value / lo).min(hi / value),
        };
        let margin = if margin.is_nan() { 0.0 } else { margin };
        Self {
            name,
            value,
            criterion,
            pass: margin >= 1.0,
            margin,
        }
    }
}

/// Flags that do not depend on how the pulse energy is split between
/// power and duration.
fn energy_flags(app: &Apparatus, rt: f64, mu: f64, j_half: f64) -> Vec<Flag> {
    let s_mu = app.total_spin * mu;
    let mut flags = vec![
        Flag::new(
            "detuning_over_linewidth",
            app.detuning.abs() / app.gamma_natural,
            Criterion::AtLeast {
                threshold: MIN_DETUNING_RATIO,
            },
        ),
        Flag::new("rt_times_s_mu", rt * s_mu, Criterion::AtMost { threshold: MAX_RT_S_MU }),
        Flag::new(
            "inverse_s_mu",
            1.0 / s_mu,
            Criterion::AtMost {
                threshold: MAX_INVERSE_S_MU,
            },
        ),
        Flag::new(
            "photon_half_number",
            j_half,
            Criterion::AtLeast {
                threshold: MIN_PHOTON_HALF_NUMBER,
            },
        ),
        Flag::new(
            "optical_depth_times_rt",
            app.optical_depth() * rt,
            Criterion::AtLeast { threshold: MIN_D0_RT },
        ),
    ];
    if let Some(m) = app.mode_matching() {
        let (lo, hi) = MODE_MATCHING_RANGE;
        flags.push(Flag::new("mode_matching", m, Criterion::Within { lo, hi }));
    }
    flags
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub sigma0: f64,
    pub d0: f64,
    pub intensity: f64,
    pub saturation_intensity: f64,
    /// rad/s.
    pub rabi: f64,
    /// 1/s.
    pub scatter_rate: f64,
    pub rt: f64,
    pub mu: f64,
    pub j_half: f64,
    /// `sqrt(S mu)`.
    pub kappa: f64,
    /// Spin used for the squeezing prediction (nearest multiple of 1/2).
    pub spin: f64,
    pub zeta_predicted: f64,
    pub flags: Vec<Flag>,
}

impl FeasibilityReport {
    pub fn all_pass(&self) -> bool {
        self.flags.iter().all(|f| f.pass)
    }

    pub fn flag(&self, name: &str) -> Option<&Flag> {
        self.flags.iter().find(|f| f.name == name)
    }
}

pub fn analyze(setup: &OpticalSetup) -> Result<FeasibilityReport> {
    setup.validate()?;
    let app = setup.apparatus();
    let p = setup.power;
    let rabi = app.rabi(p);
    let scatter_rate = app.scatter_rate(p);
    let rt = scatter_rate * setup.duration;
    let mu = rt * app.mu_per_rt();
    let j_half = p * setup.duration * setup.lambda0 / (2.0 * PLANCK * SPEED_OF_LIGHT);
    let spin = app.spin()?;
    let zeta_predicted = closed_form_report(spin, &TwistParameters::symmetric(mu)?)?.zeta;

    let mut flags = energy_flags(&app, rt, mu, j_half);
    flags.insert(
        1,
        Flag::new(
            "rabi_over_detuning",
            rabi / app.detuning.abs(),
            Criterion::AtMost {
                threshold: MAX_RABI_RATIO,
            },
        ),
    );

    Ok(FeasibilityReport {
        sigma0: app.sigma0(),
        d0: app.optical_depth(),
        intensity: app.intensity(p),
        saturation_intensity: app.saturation_intensity(),
        rabi,
        scatter_rate,
        rt,
        mu,
        j_half,
        kappa: (app.total_spin * mu).sqrt(),
        spin: spin.value(),
        zeta_predicted,
        flags,
    })
}

/// Pulses reaching a target `mu` on a given apparatus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PulsePlan {
    pub apparatus: Apparatus,
    pub target_mu: f64,
    pub rt: f64,
    /// `P T` in the unsaturated limit, J.
    pub energy: f64,
    /// `r / P` in the unsaturated limit, 1/(s W).
    pub scatter_rate_per_watt: f64,
    /// Largest power keeping `Omega / |Delta|` within its flag.
    pub max_power: f64,
    pub flags: Vec<Flag>,
}

impl PulsePlan {
    /// Duration giving exactly the target `r T` at power `power`,
    /// saturation included.
    pub fn duration_for_power(&self, power: f64) -> f64 {
        if self.rt == 0.0 {
            return 0.0;
        }
        self.rt / self.apparatus.scatter_rate(power)
    }

    pub fn setup_for_power(&self, power: f64) -> OpticalSetup {
        self.apparatus.with_pulse(power, self.duration_for_power(power))
    }
}

/// Inverse of [`analyze`]: the pulse energy needed for `target_mu`.
///
/// Fails with [`Error::Infeasible`] naming the first failing
/// energy-independent flag. `target_mu = 0` yields a zero-energy plan.
pub fn required_pulse(app: &Apparatus, target_mu: f64) -> Result<PulsePlan> {
    app.validate()?;
    if !(target_mu.is_finite() && target_mu >= 0.0) {
        return Err(Error::InvalidParameter(format!("target mu = {target_mu} must be >= 0")));
    }
    let g = app.gamma_natural;
    let rt = target_mu / app.mu_per_rt();
    // Omega^2 = k_omega P
    let k_omega = g * g / (2.0 * PI * app.waist * app.waist * app.saturation_intensity());
    let per_watt = g / 2.0 * (k_omega / 4.0) / (app.detuning * app.detuning + g * g / 4.0);
    let energy = rt / per_watt;
    let max_power = (MAX_RABI_RATIO * app.detuning).powi(2) / k_omega;
    let j_half = energy * app.lambda0 / (2.0 * PLANCK * SPEED_OF_LIGHT);

    let flags = if target_mu == 0.0 {
        Vec::new()
    } else {
        energy_flags(app, rt, target_mu, j_half)
    };
    if let Some(f) = flags.iter().find(|f| !f.pass) {
        return Err(Error::Infeasible {
            target_mu,
            flag: f.name.to_string(),
            detail: format!("value {:.4e}, margin {:.4e}", f.value, f.margin),
        });
    }
    Ok(PulsePlan {
        apparatus: *app,
        target_mu,
        rt,
        energy,
        scatter_rate_per_watt: per_watt,
        max_power,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a / b - 1.0).abs()
    }

    #[test]
    fn yb_example() {
        let r = analyze(&OpticalSetup::yb171()).unwrap();
        assert!(rel(r.mu, 5.4e-6) < 0.2, "mu {}", r.mu);
        assert!(rel(r.rt, 4.0e-3) < 0.2, "rT {}", r.rt);
        assert!(rel(r.rabi, 2.0 * PI * 21e6) < 0.2, "Omega {}", r.rabi);
        assert!(rel(r.j_half, 4.0e6) < 0.1, "J {}", r.j_half);
        assert!((r.zeta_predicted - 0.08).abs() < 0.02, "zeta {}", r.zeta_predicted);
        assert!(rel(1.0 / (r.spin * r.mu), 4.6e-2) < 0.2);
        assert!(r.all_pass(), "{:?}", r.flags);
        assert!(r.flag("mode_matching").unwrap().pass);
    }

    #[test]
    fn power_homogeneity() {
        let base = OpticalSetup::yb171();
        let doubled = OpticalSetup {
            power: 2.0 * base.power,
            ..base
        };
        let (a, b) = (analyze(&base).unwrap(), analyze(&doubled).unwrap());
        assert!(rel(b.rabi / a.rabi, 2f64.sqrt()) < 1e-12);
        assert!(rel(b.j_half / a.j_half, 2.0) < 1e-12);
        // saturation is negligible this far from resonance
        assert!(rel(b.mu / a.mu, 2.0) < 1e-6);
        assert!(rel(b.scatter_rate / a.scatter_rate, 2.0) < 1e-6);
    }

    #[test]
    fn half_condition_two_forms() {
        let r = analyze(&OpticalSetup::yb171()).unwrap();
        // d0 rT = 4 S mu = 4 kappa^2
        assert!(rel(r.d0 * r.rt, 4.0 * r.kappa * r.kappa) < 1e-12);
    }

    #[test]
    fn invalid_setup() {
        let bad = OpticalSetup {
            waist: -1.0,
            ..OpticalSetup::yb171()
        };
        assert!(matches!(analyze(&bad), Err(Error::InvalidSetup(_))));
        let bad = OpticalSetup {
            detuning: 0.0,
            ..OpticalSetup::yb171()
        };
        assert!(analyze(&bad).is_err());
    }

    #[test]
    fn plan_round_trip() {
        let plan = required_pulse(&Apparatus::yb171(), 5.4e-6).unwrap();
        assert!(rel(plan.energy, 17e-9 * 0.24e-3) < 0.2);
        for p in [1e-9, 17e-9, 1e-7] {
            let r = analyze(&plan.setup_for_power(p)).unwrap();
            assert!(rel(r.mu, 5.4e-6) < 1e-10);
        }
        assert!(plan.max_power > 17e-9);
    }

    #[test]
    fn zero_and_absurd_targets() {
        let plan = required_pulse(&Apparatus::yb171(), 0.0).unwrap();
        assert_eq!(plan.energy, 0.0);
        assert_eq!(plan.duration_for_power(1e-9), 0.0);
        match required_pulse(&Apparatus::yb171(), 1.0) {
            Err(Error::Infeasible { flag, .. }) => assert_eq!(flag, "rt_times_s_mu"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn apparatus_round_trip() {
        let s = OpticalSetup::yb171();
        assert_eq!(s.apparatus().with_pulse(s.power, s.duration), s);
        assert!(rel(s.apparatus().mode_matching().unwrap(), 1.01) < 0.01);
    }
}
