//! Collective spin states in the Dicke basis `|S, M>`.
//!
//! Quantum numbers are carried as doubled integers (`two_s = 2S`,
//! `two_m = 2M`) so half-integer spins are exact. Dense matrices are stored
//! row-major with `M` ascending from `-S`: index `i` corresponds to
//! `two_m = 2i - two_s`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::special::ln_binom;

/// Largest dense dimension `2S + 1` accepted by default.
pub const DEFAULT_MAX_DIM: usize = 4097;

const HERMITICITY_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;

/// Total spin `S`, stored as `2S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinMagnitude {
    two_s: u32,
}

impl SpinMagnitude {
    pub fn from_twice(two_s: u32) -> Result<Self> {
        if two_s == 0 {
            return Err(Error::InvalidSpin("S must be at least 1/2".into()));
        }
        Ok(Self { two_s })
    }

    /// Parses `S` given as a float; `2S` must be integral.
    pub fn from_f64(s: f64) -> Result<Self> {
        if !s.is_finite() || s <= 0.0 {
            return Err(Error::InvalidSpin(format!("S = {s} is not a positive number")));
        }
        let twice = 2.0 * s;
        let rounded = twice.round();
        if (twice - rounded).abs() > 1e-9 * twice.max(1.0) || rounded > u32::MAX as f64 {
            return Err(Error::InvalidSpin(format!("S = {s} is not a multiple of 1/2")));
        }
        Self::from_twice(rounded as u32)
    }

    /// Nearest representable spin to `s` (rounds `2S` to an integer).
    pub fn nearest(s: f64) -> Result<Self> {
        if !s.is_finite() || s < 0.25 {
            return Err(Error::InvalidSpin(format!("S = {s} rounds below 1/2")));
        }
        Self::from_f64((2.0 * s).round() / 2.0)
    }

    pub fn two_s(&self) -> u32 {
        self.two_s
    }

    pub fn value(&self) -> f64 {
        self.two_s as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.two_s as usize + 1
    }

    /// Doubled magnetic quantum numbers in ascending order.
    pub fn two_ms(&self) -> impl Iterator<Item = i64> + Clone {
        let two_s = self.two_s as i64;
        (0..=two_s).map(move |i| 2 * i - two_s)
    }

    pub fn two_m_at(&self, index: usize) -> i64 {
        2 * index as i64 - self.two_s as i64
    }

    pub fn index_of(&self, two_m: i64) -> Option<usize> {
        let two_s = self.two_s as i64;
        if two_m.abs() > two_s || (two_m + two_s) % 2 != 0 {
            return None;
        }
        Some(((two_m + two_s) / 2) as usize)
    }

    /// Casimir eigenvalue `S(S+1)`.
    pub fn casimir(&self) -> f64 {
        let s = self.value();
        s * (s + 1.0)
    }
}

impl fmt::Display for SpinMagnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.two_s.is_multiple_of(2) {
            write!(f, "{}", self.two_s / 2)
        } else {
            write!(f, "{}/2", self.two_s)
        }
    }
}

impl Serialize for SpinMagnitude {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for SpinMagnitude {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = f64::deserialize(deserializer)?;
        SpinMagnitude::from_f64(s).map_err(serde::de::Error::custom)
    }
}

/// Raising-operator matrix element `<M+1|S+|M> = sqrt((S-M)(S+M+1))`.
#[inline]
pub(crate) fn raising_coeff(two_s: i64, two_m: i64) -> f64 {
    // (S - M)(S + M + 1) = (2S - 2M)(2S + 2M + 2) / 4
    (((two_s - two_m) * (two_s + two_m + 2)) as f64 / 4.0).sqrt()
}

/// Coefficients `<S,M|theta,phi>` of the spin coherent state
/// `exp(-i phi Sz) exp(-i theta Sy) |S,S>`:
/// `C(2S, S+M)^(1/2) cos^(S+M)(theta/2) sin^(S-M)(theta/2) exp(-i M phi)`.
pub fn coherent_amplitudes(spin: SpinMagnitude, theta: f64, phi: f64) -> Vec<Complex64> {
    let magnitudes = coherent_magnitudes(spin, theta);
    spin.two_ms()
        .zip(magnitudes)
        .map(|(two_m, a)| Complex64::from_polar(a, -(two_m as f64) * phi / 2.0))
        .collect()
}

/// The real, `phi`-independent factor of [`coherent_amplitudes`].
pub fn coherent_magnitudes(spin: SpinMagnitude, theta: f64) -> Vec<f64> {
    let two_s = spin.two_s as u64;
    let (sin_half, cos_half) = (theta / 2.0).sin_cos();
    let ln_cos = cos_half.abs().ln();
    let ln_sin = sin_half.abs().ln();
    (0..=two_s)
        .map(|k| {
            // k = S + M, 2S - k = S - M
            let up = k;
            let down = two_s - k;
            if (up > 0 && cos_half == 0.0) || (down > 0 && sin_half == 0.0) {
                return 0.0;
            }
            let mut log_mag = 0.5 * ln_binom(two_s, k);
            if up > 0 {
                log_mag += up as f64 * ln_cos;
            }
            if down > 0 {
                log_mag += down as f64 * ln_sin;
            }
            log_mag.exp()
        })
        .collect()
}

/// Density matrix of a collective spin in the Dicke basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinDensityMatrix {
    spin: SpinMagnitude,
    elements: Vec<Complex64>,
}

impl SpinDensityMatrix {
    /// Spin coherent state pointing along `(theta, phi)`.
    pub fn coherent(spin: SpinMagnitude, theta: f64, phi: f64) -> Result<Self> {
        Self::coherent_with_limit(spin, theta, phi, DEFAULT_MAX_DIM)
    }

    pub fn coherent_with_limit(spin: SpinMagnitude, theta: f64, phi: f64, max_dim: usize) -> Result<Self> {
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(Error::InvalidAngle(theta));
        }
        check_dim(spin, max_dim)?;
        Ok(Self::pure(spin, &coherent_amplitudes(spin, theta, phi)))
    }

    /// Coherent state polarized along +x.
    pub fn x_polarized(spin: SpinMagnitude) -> Result<Self> {
        Self::coherent(spin, std::f64::consts::FRAC_PI_2, 0.0)
    }

    /// Stretched state `|S, S>`.
    pub fn stretched(spin: SpinMagnitude) -> Result<Self> {
        check_dim(spin, DEFAULT_MAX_DIM)?;
        let n = spin.dim();
        let mut elements = vec![Complex64::new(0.0, 0.0); n * n];
        elements[n * n - 1] = Complex64::new(1.0, 0.0);
        Ok(Self { spin, elements })
    }

    /// `|psi><psi|` for an amplitude vector ordered by ascending `M`.
    pub fn pure(spin: SpinMagnitude, psi: &[Complex64]) -> Self {
        let n = spin.dim();
        assert_eq!(psi.len(), n, "amplitude vector has wrong length");
        let mut elements = Vec::with_capacity(n * n);
        for a in psi {
            for b in psi {
                elements.push(a * b.conj());
            }
        }
        Self { spin, elements }
    }

    /// Wraps row-major elements after checking shape, Hermiticity and trace.
    pub fn from_elements(spin: SpinMagnitude, elements: Vec<Complex64>) -> Result<Self> {
        let n = spin.dim();
        if elements.len() != n * n {
            return Err(Error::ShapeMismatch {
                got: elements.len(),
                expected: n * n,
            });
        }
        let rho = Self { spin, elements };
        rho.check_invariants()?;
        Ok(rho)
    }

    pub(crate) fn from_raw(spin: SpinMagnitude, elements: Vec<Complex64>) -> Self {
        debug_assert_eq!(elements.len(), spin.dim() * spin.dim());
        Self { spin, elements }
    }

    pub fn spin(&self) -> SpinMagnitude {
        self.spin
    }

    pub fn dim(&self) -> usize {
        self.spin.dim()
    }

    /// Row-major elements, `M` ascending.
    pub fn elements(&self) -> &[Complex64] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<Complex64> {
        self.elements
    }

    /// Element by matrix index.
    #[inline]
    pub fn at(&self, row: usize, col: usize) -> Complex64 {
        self.elements[row * self.dim() + col]
    }

    /// Element `<S,M|rho|S,M'>` by doubled quantum numbers.
    pub fn element(&self, two_m: i64, two_m_prime: i64) -> Option<Complex64> {
        let i = self.spin.index_of(two_m)?;
        let j = self.spin.index_of(two_m_prime)?;
        Some(self.at(i, j))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.at(i, i).re).collect()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.at(i, i)).sum()
    }

    pub fn purity(&self) -> f64 {
        // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
        self.elements.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Largest `|rho_ij - conj(rho_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.at(i, j) - self.at(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Checks Hermiticity and unit trace (positivity needs an eigensolver
    /// and is left to callers).
    pub fn check_invariants(&self) -> Result<()> {
        let herm = self.hermiticity_defect();
        if herm > HERMITICITY_TOL {
            return Err(Error::InvariantViolation {
                invariant: "Hermiticity",
                deviation: herm,
            });
        }
        let tr = self.trace();
        let dev = (tr - Complex64::new(1.0, 0.0)).norm();
        if dev > TRACE_TOL {
            return Err(Error::InvariantViolation {
                invariant: "unit trace",
                deviation: dev,
            });
        }
        Ok(())
    }

    /// Returns `rho / Tr(rho)`.
    pub fn normalized(&self) -> Self {
        let tr = self.trace();
        Self {
            spin: self.spin,
            elements: self.elements.iter().map(|z| z / tr).collect(),
        }
    }

    /// Largest elementwise modulus difference from another state of the
    /// same spin.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.spin, other.spin, "spin mismatch");
        self.elements
            .iter()
            .zip(&other.elements)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn moments(&self) -> SpinMomentSet {
        moments(self)
    }
}

fn check_dim(spin: SpinMagnitude, max_dim: usize) -> Result<()> {
    if spin.dim() > max_dim {
        return Err(Error::DimensionOverflow {
            dim: spin.dim(),
            max: max_dim,
        });
    }
    Ok(())
}

/// Builds the coherent spin state along `(theta, phi)`.
pub fn make_css(spin: SpinMagnitude, theta: f64, phi: f64) -> Result<SpinDensityMatrix> {
    SpinDensityMatrix::coherent(spin, theta, phi)
}

/// First and symmetrized second moments of `(Sx, Sy, Sz)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinMomentSet {
    pub mean: [f64; 3],
    /// `<(Si Sj + Sj Si)/2>`.
    pub second_moments: [[f64; 3]; 3],
}

impl SpinMomentSet {
    /// Covariance `<(Si Sj + Sj Si)/2> - <Si><Sj>`.
    pub fn covariance(&self) -> [[f64; 3]; 3] {
        let mut c = self.second_moments;
        for (i, row) in c.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v -= self.mean[i] * self.mean[j];
            }
        }
        c
    }

    pub fn variance(&self, axis: usize) -> f64 {
        self.second_moments[axis][axis] - self.mean[axis] * self.mean[axis]
    }

    pub fn casimir(&self) -> f64 {
        self.second_moments[0][0] + self.second_moments[1][1] + self.second_moments[2][2]
    }
}

/// Moments from the diagonal and the first two off-diagonals of `rho`.
pub fn moments(rho: &SpinDensityMatrix) -> SpinMomentSet {
    let spin = rho.spin();
    let two_s = spin.two_s() as i64;
    let n = spin.dim();

    let mut mean_z = 0.0;
    let mut sz2 = 0.0;
    // <S+ S- + S- S+>
    let mut anticomm = 0.0;
    for (i, two_m) in spin.two_ms().enumerate() {
        let p = rho.at(i, i).re;
        let m = two_m as f64 / 2.0;
        mean_z += p * m;
        sz2 += p * m * m;
        let up = raising_coeff(two_s, two_m);
        let down = raising_coeff(two_s, -two_m);
        anticomm += p * (up * up + down * down);
    }

    // <S+> and <S+ Sz + Sz S+>
    let mut raise = Complex64::new(0.0, 0.0);
    let mut raise_z = Complex64::new(0.0, 0.0);
    for i in 0..n.saturating_sub(1) {
        let two_m = spin.two_m_at(i);
        let c = raising_coeff(two_s, two_m);
        let r = rho.at(i, i + 1);
        raise += r * c;
        raise_z += r * (c * (two_m + 1) as f64);
    }

    // <S+^2>
    let mut raise2 = Complex64::new(0.0, 0.0);
    for i in 0..n.saturating_sub(2) {
        let two_m = spin.two_m_at(i);
        let c = raising_coeff(two_s, two_m) * raising_coeff(two_s, two_m + 2);
        raise2 += rho.at(i, i + 2) * c;
    }

    let sx2 = 0.25 * (2.0 * raise2.re + anticomm);
    let sy2 = 0.25 * (-2.0 * raise2.re + anticomm);
    let sxy = 0.5 * raise2.im;
    let sxz = 0.5 * raise_z.re;
    let syz = 0.5 * raise_z.im;

    SpinMomentSet {
        mean: [raise.re, raise.im, mean_z],
        second_moments: [[sx2, sxy, sxz], [sxy, sy2, syz], [sxz, syz, sz2]],
    }
}
