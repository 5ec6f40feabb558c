//! Squeezing diagnostics.
//!
//! Two independent routes produce a [`SqueezingReport`]: closed-form
//! expressions valid for the x-polarized coherent input evolved by the
//! double-pass map, and direct moment extraction from any density matrix.
//! The quasiprobability distribution `Q(theta, phi) = <theta,phi|rho|theta,phi>`
//! is evaluated on arbitrary sphere grids.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::signed_pow;
use crate::spin::{coherent_magnitudes, SpinDensityMatrix, SpinMagnitude};
use crate::twist::TwistParameters;

/// Transverse means above `CENTERING_TOL * S` invalidate the ellipse model.
pub const CENTERING_TOL: f64 = 1e-9;

/// Below `DEGENERACY_TOL * S` the transverse ellipse is treated as a circle
/// and its orientation is reported as zero.
pub const DEGENERACY_TOL: f64 = 1e-11;

/// Mean spin, variances and orientation of the transverse uncertainty
/// ellipse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingReport {
    pub mean_x: f64,
    pub var_x: f64,
    /// Major-axis variance (y').
    pub var_yprime: f64,
    /// Minor-axis variance (z').
    pub var_zprime: f64,
    /// Angle between z' and z, radians.
    pub delta: f64,
    /// `2 var_zprime / |mean_x|`.
    pub zeta: f64,
    pub a_term: f64,
    pub b_term: f64,
}

impl SqueezingReport {
    /// `(name, value)` pairs in a fixed order.
    pub fn fields(&self) -> [(&'static str, f64); 8] {
        [
            ("mean_x", self.mean_x),
            ("var_x", self.var_x),
            ("var_yprime", self.var_yprime),
            ("var_zprime", self.var_zprime),
            ("delta", self.delta),
            ("zeta", self.zeta),
            ("a_term", self.a_term),
            ("b_term", self.b_term),
        ]
    }
}

/// Per-field comparison of two reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldComparison {
    pub field: &'static str,
    pub left: f64,
    pub right: f64,
    /// `|left - right| / max(|left|, |right|, 1e-3 * scale)` where the scale
    /// is `S` for the mean, `S^2` for variances and 1 otherwise.
    pub relative: f64,
}

/// Compares every field of two reports for the same spin.
pub fn compare_reports(left: &SqueezingReport, right: &SqueezingReport, spin: SpinMagnitude) -> Vec<FieldComparison> {
    let s = spin.value();
    left.fields()
        .iter()
        .zip(right.fields().iter())
        .map(|(&(field, l), &(_, r))| {
            let scale = match field {
                "mean_x" => s,
                "var_x" | "var_yprime" | "var_zprime" => s * s.max(1.0),
                _ => 1.0,
            };
            let denom = l.abs().max(r.abs()).max(1e-3 * scale);
            FieldComparison {
                field,
                left: l,
                right: r,
                relative: (l - r).abs() / denom,
            }
        })
        .collect()
}

/// Largest relative deviation across all report fields.
pub fn max_relative_deviation(left: &SqueezingReport, right: &SqueezingReport, spin: SpinMagnitude) -> FieldComparison {
    compare_reports(left, right, spin)
        .into_iter()
        .max_by(|a, b| a.relative.total_cmp(&b.relative))
        .expect("reports have fields")
}

/// Closed-form report for the x-polarized coherent state after the
/// double-pass map with parameters `params`. Works for any `S` without
/// building a matrix.
pub fn closed_form_report(spin: SpinMagnitude, params: &TwistParameters) -> Result<SqueezingReport> {
    let mu = params.mu();
    let mu_prime = params.mu_prime();
    if !(mu.is_finite() && mu.abs() < PI) {
        return Err(Error::MuOutOfRange(mu));
    }
    let cos_mu = mu.cos();
    if cos_mu == 0.0 {
        return Err(Error::SingularCosine(mu));
    }

    let s = spin.value();
    let k = spin.two_s() as i64 - 2; // 2S - 2
    let (sin_half, cos_half) = (mu / 2.0).sin_cos();

    // A = 1 - exp(-2 mu') cos^(2S-2)(mu)
    let mut a = if cos_mu > 0.0 {
        -(-2.0 * mu_prime + k as f64 * cos_mu.ln()).exp_m1()
    } else {
        1.0 - (-2.0 * mu_prime).exp() * signed_pow(cos_mu, k)
    };
    let mut b = 4.0 * (-mu_prime / 2.0).exp() * sin_half * signed_pow(cos_half, k);
    let mean_x = s * (-mu_prime / 2.0).exp() * signed_pow(cos_half, k + 1);

    // both A and B enter only through S(S - 1/2); at S = 1/2 the transverse
    // distribution is isotropic and they carry no information
    let c = s * (s - 0.5) / 4.0;
    if c == 0.0 {
        a = 0.0;
        b = 0.0;
    }

    let root = a.hypot(b);
    let var_yprime = s / 2.0 + c * (a + root);
    let var_zprime = if a >= 0.0 && a + root > 0.0 {
        s / 2.0 - c * b * b / (a + root)
    } else {
        s / 2.0 + c * (a - root)
    };
    let var_x = s * s - mean_x * mean_x - s * (s - 0.5) * a / 2.0;
    let delta = if root == 0.0 { 0.0 } else { b.atan2(a) / 2.0 };

    Ok(SqueezingReport {
        mean_x,
        var_x,
        var_yprime,
        var_zprime,
        delta,
        zeta: 2.0 * var_zprime / mean_x.abs(),
        a_term: a,
        b_term: b,
    })
}

/// Report computed from the moments of `rho`.
///
/// The minor axis minimizes `Var(Sz cos psi + Sy sin psi)`; `delta` is the
/// angle of that axis from z, positive when it tilts away from +y.
/// `a_term` and `b_term` are recovered as `(V_yy - V_zz) / (2c)` and
/// `V_yz / c` with `c = S(S - 1/2)/4`.
pub fn matrix_report(rho: &SpinDensityMatrix) -> Result<SqueezingReport> {
    let spin = rho.spin();
    let s = spin.value();
    let m = rho.moments();
    if m.mean[1].abs() > CENTERING_TOL * s || m.mean[2].abs() > CENTERING_TOL * s {
        return Err(Error::EllipseModelInvalid {
            mean_y: m.mean[1],
            mean_z: m.mean[2],
        });
    }
    let cov = m.covariance();
    let (v_yy, v_zz, v_yz) = (cov[1][1], cov[2][2], cov[1][2]);

    let half = (v_yy + v_zz) / 2.0;
    let diff = (v_yy - v_zz) / 2.0;
    let radius = diff.hypot(v_yz);
    let c = s * (s - 0.5) / 4.0;

    let (delta, a_term, b_term) = if c == 0.0 || radius <= DEGENERACY_TOL * s {
        (0.0, 0.0, 0.0)
    } else {
        (v_yz.atan2(diff) / 2.0, diff / c, v_yz / c)
    };

    let mean_x = m.mean[0];
    let var_zprime = half - radius;
    Ok(SqueezingReport {
        mean_x,
        var_x: m.variance(0),
        var_yprime: half + radius,
        var_zprime,
        delta,
        zeta: 2.0 * var_zprime / mean_x.abs(),
        a_term,
        b_term,
    })
}

/// How sampled `Q` values are scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QpdNormalization {
    /// `Q` itself; 1 at the centre of a coherent state.
    Raw,
    /// Divided by the grid maximum.
    Max,
}

/// Sample points for a QPD evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct QpdGridSpec {
    theta: Vec<f64>,
    phi: Vec<f64>,
    normalization: QpdNormalization,
}

impl QpdGridSpec {
    /// `theta_i = i pi / (n_theta - 1)` (poles included) and
    /// `phi_j = -pi + 2 pi j / n_phi`.
    pub fn uniform(n_theta: usize, n_phi: usize, normalization: QpdNormalization) -> Result<Self> {
        if n_theta < 2 || n_phi < 2 {
            return Err(Error::InvalidGrid(format!("resolution {n_theta}x{n_phi} is below 2x2")));
        }
        let theta = (0..n_theta).map(|i| PI * i as f64 / (n_theta - 1) as f64).collect();
        let phi = (0..n_phi).map(|j| -PI + 2.0 * PI * j as f64 / n_phi as f64).collect();
        Ok(Self {
            theta,
            phi,
            normalization,
        })
    }

    pub fn from_samples(theta: Vec<f64>, phi: Vec<f64>, normalization: QpdNormalization) -> Result<Self> {
        if theta.len() < 2 || phi.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "resolution {}x{} is below 2x2",
                theta.len(),
                phi.len()
            )));
        }
        if let Some(t) = theta.iter().find(|t| !(0.0..=PI).contains(*t)) {
            return Err(Error::InvalidGrid(format!("theta sample {t} outside [0, pi]")));
        }
        if phi.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidGrid("non-finite phi sample".into()));
        }
        Ok(Self {
            theta,
            phi,
            normalization,
        })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn normalization(&self) -> QpdNormalization {
        self.normalization
    }
}

/// Sampled quasiprobability distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct QpdGrid {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    /// Row-major, `theta` outer.
    pub values: Vec<f64>,
    pub normalization: QpdNormalization,
    /// Largest raw `Q` on the grid.
    pub raw_max: f64,
}

impl QpdGrid {
    pub fn value(&self, i_theta: usize, j_phi: usize) -> f64 {
        self.values[i_theta * self.phi.len() + j_phi]
    }

    /// `(theta, phi, value)` at the grid maximum.
    pub fn argmax(&self) -> (f64, f64, f64) {
        let (idx, v) =
            self.values.iter().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
            );
        let n_phi = self.phi.len();
        (self.theta[idx / n_phi], self.phi[idx % n_phi], v)
    }

    /// Rows of `(theta, phi, value)` in storage order.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let n_phi = self.phi.len();
        self.values
            .iter()
            .enumerate()
            .map(move |(k, &v)| (self.theta[k / n_phi], self.phi[k % n_phi], v))
    }
}

/// Evaluates `Q(theta, phi)` on the grid.
///
/// With `c_M = a_M(theta) exp(-i M phi)` the coherent-state amplitudes,
/// `Q = sum_d exp(i d phi) D_d(theta)` where `D_d` sums `a_i a_j rho_ij`
/// along the `d`-th diagonal, so each theta row costs one pass over `rho`.
pub fn qpd(rho: &SpinDensityMatrix, spec: &QpdGridSpec) -> Result<QpdGrid> {
    let spin = rho.spin();
    let n = spin.dim();
    let n_phi = spec.phi.len();

    let rows: Vec<Vec<f64>> = spec
        .theta
        .par_iter()
        .map(|&theta| {
            let a = coherent_magnitudes(spin, theta);
            let diagonals: Vec<Complex64> = (0..n)
                .map(|d| (d..n).map(|i| rho.at(i, i - d) * (a[i] * a[i - d])).sum())
                .collect();
            spec.phi
                .iter()
                .map(|&phi| {
                    let mut q = diagonals[0].re;
                    for (d, dd) in diagonals.iter().enumerate().skip(1) {
                        q += 2.0 * (Complex64::from_polar(1.0, d as f64 * phi) * dd).re;
                    }
                    // rounding can leave tiny negatives; larger ones mean a
                    // non-positive input and are kept visible
                    if q < 0.0 && q > -1e-12 {
                        0.0
                    } else {
                        q
                    }
                })
                .collect()
        })
        .collect();

    let mut values = Vec::with_capacity(spec.theta.len() * n_phi);
    for row in rows {
        values.extend(row);
    }
    let raw_max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if spec.normalization == QpdNormalization::Max {
        if raw_max <= 0.0 {
            return Err(Error::InvalidGrid(
                "QPD maximum is not positive; cannot max-normalize".into(),
            ));
        }
        for v in &mut values {
            *v /= raw_max;
        }
    }
    Ok(QpdGrid {
        theta: spec.theta.clone(),
        phi: spec.phi.clone(),
        values,
        normalization: spec.normalization,
        raw_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twist::evolve;
    use std::f64::consts::FRAC_PI_2;

    fn spin(s: f64) -> SpinMagnitude {
        SpinMagnitude::from_f64(s).unwrap()
    }

    #[test]
    fn unevolved_closed_form_is_sql() {
        let r = closed_form_report(spin(20.0), &TwistParameters::from_mu(0.0, 0.0).unwrap()).unwrap();
        assert_eq!(r.mean_x, 20.0);
        assert_eq!(r.var_yprime, 10.0);
        assert_eq!(r.var_zprime, 10.0);
        assert_eq!(r.zeta, 1.0);
        assert_eq!(r.delta, 0.0);
        assert_eq!(r.var_x, 0.0);
    }

    #[test]
    fn first_pass_broadening_closed_form() {
        let r = closed_form_report(spin(20.0), &TwistParameters::from_mu(0.0, 0.1).unwrap()).unwrap();
        assert!((r.var_zprime - 10.0).abs() < 1e-12);
        let expected = 10.0 + 20.0 * 19.5 / 2.0 * (1.0 - (-0.2f64).exp());
        assert!((r.var_yprime - expected).abs() < 1e-12);
        assert_eq!(r.delta, 0.0);
        assert_eq!(r.b_term, 0.0);
    }

    #[test]
    fn reference_point_s20() {
        // frozen from a dense brute-force evaluation (Sx, Sy, Sz built as
        // explicit matrices, moments from traces)
        let r = closed_form_report(spin(20.0), &TwistParameters::symmetric(0.2).unwrap()).unwrap();
        assert!((r.a_term - 0.688_115_195_592_184_4).abs() < 1e-12);
        assert!((r.b_term - 0.298_711_973_816_998_6).abs() < 1e-12);
        assert!((r.delta - 0.204_777_269_475_226).abs() < 1e-12);
        assert!((r.var_zprime - 3.951_194_345_421_22).abs() < 1e-9);
        assert!((r.var_yprime - 150.231_268_795_054_75).abs() < 1e-9);
        assert!((r.mean_x - 14.885_780_140_019_74).abs() < 1e-9);
        assert!((r.zeta - 0.530_868_292_861_40).abs() < 1e-9);
    }

    #[test]
    fn closed_form_rejects_bad_mu() {
        let p = TwistParameters::ideal(PI);
        assert!(matches!(closed_form_report(spin(5.0), &p), Err(Error::MuOutOfRange(_))));
        let p = TwistParameters::from_mu(-3.5, 4.0).unwrap();
        assert!(matches!(closed_form_report(spin(5.0), &p), Err(Error::MuOutOfRange(_))));
        let p = TwistParameters::ideal(f64::NAN);
        assert!(closed_form_report(spin(5.0), &p).is_err());
    }

    #[test]
    fn closed_form_large_mu_branch() {
        // mu beyond pi/2 flips the sign of cos(mu); half-integer spin gives
        // an odd power there
        let p = TwistParameters::symmetric(2.0).unwrap();
        let cf = closed_form_report(spin(4.5), &p).unwrap();
        let mr = matrix_report(&evolve(&SpinDensityMatrix::x_polarized(spin(4.5)).unwrap(), &p)).unwrap();
        let worst = max_relative_deviation(&cf, &mr, spin(4.5));
        assert!(worst.relative < 1e-9, "{worst:?}");
    }

    #[test]
    fn matrix_report_css_matches_sql() {
        let rho = SpinDensityMatrix::x_polarized(spin(20.0)).unwrap();
        let r = matrix_report(&rho).unwrap();
        let cf = closed_form_report(spin(20.0), &TwistParameters::from_mu(0.0, 0.0).unwrap()).unwrap();
        for c in compare_reports(&r, &cf, spin(20.0)) {
            assert!(c.relative < 1e-10, "{c:?}");
        }
        assert_eq!(r.delta, 0.0);
    }

    #[test]
    fn matrix_report_spin_half() {
        let rho = SpinDensityMatrix::x_polarized(spin(0.5)).unwrap();
        let out = evolve(&rho, &TwistParameters::from_mu(0.0, 0.3).unwrap());
        let r = matrix_report(&out).unwrap();
        // 2x2 by hand: <Sx> = Re rho_{-+} * 1 = 0.5 e^{-0.15}
        assert!((r.mean_x - 0.430_353_988_212_529).abs() < 1e-12);
        assert!((r.var_zprime - 0.25).abs() < 1e-15);
        assert_eq!(r.delta, 0.0);
    }

    #[test]
    fn matrix_report_rejects_off_axis_state() {
        let rho = SpinDensityMatrix::coherent(spin(3.0), 1.0, 0.3).unwrap();
        assert!(matches!(matrix_report(&rho), Err(Error::EllipseModelInvalid { .. })));
    }

    #[test]
    fn qpd_of_css_peaks_on_its_axis() {
        let rho = SpinDensityMatrix::x_polarized(spin(20.0)).unwrap();
        let spec = QpdGridSpec::uniform(65, 128, QpdNormalization::Raw).unwrap();
        let grid = qpd(&rho, &spec).unwrap();
        let (t, p, v) = grid.argmax();
        assert!((t - FRAC_PI_2).abs() < 1e-12 && p.abs() < 1e-12);
        assert!((v - 1.0).abs() < 1e-12);
        assert!(grid.values.iter().all(|&q| q >= 0.0));
    }

    #[test]
    fn qpd_tracks_arbitrary_direction() {
        let (theta0, phi0) = (1.0, -0.7);
        let rho = SpinDensityMatrix::coherent(spin(6.0), theta0, phi0).unwrap();
        let spec = QpdGridSpec::from_samples(
            vec![0.5, theta0, 1.5],
            vec![-1.2, phi0, 0.0, 2.0],
            QpdNormalization::Max,
        )
        .unwrap();
        let grid = qpd(&rho, &spec).unwrap();
        let (t, p, v) = grid.argmax();
        assert_eq!((t, p), (theta0, phi0));
        assert!((v - 1.0).abs() < 1e-15);
        assert!((grid.raw_max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qpd_grid_validation() {
        assert!(QpdGridSpec::uniform(1, 4, QpdNormalization::Raw).is_err());
        assert!(QpdGridSpec::from_samples(vec![0.0, 4.0], vec![0.0, 1.0], QpdNormalization::Raw).is_err());
    }
}
