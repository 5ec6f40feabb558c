//! Brute-force references for the reduced double-pass map.
//!
//! The joint atom-light state is propagated through the three steps of the
//! scheme with `H = alpha J_z S_z`, `J_z = (n_+ - n_-)/2`:
//!
//! 1. first pass: `exp(-i (alpha t1) J_z S_z)`,
//! 2. the double lambda/8 passage, `exp(-i (pi/2) J_x)`, a 50:50 mode mixer,
//! 3. second pass: `exp(-i (alpha t2) J_z S_z)`,
//!
//! after which the light is traced out. [`coherent_branch_evolve`] uses the
//! fact that every Dicke component keeps the light in a product of coherent
//! states; [`fock_evolve`] works on a truncated two-mode Fock lattice with no
//! such shortcut.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spin::{coherent_amplitudes, SpinDensityMatrix, SpinMagnitude};
use crate::twist::{evolve, TwistParameters};

/// Largest spin either oracle accepts.
pub const MAX_ORACLE_TWO_S: u32 = 8;
/// Largest Fock lattice, in complex amplitudes.
pub const MAX_LATTICE: usize = 1_000_000;
/// Truncation loss above which a Fock result carries a warning.
pub const LEAKAGE_WARNING: f64 = 1e-8;

// exp(-i (pi/2) sigma_x / 2) on (a_+, a_-)
const U11: Complex64 = Complex64::new(FRAC_1_SQRT_2, 0.0);
const U12: Complex64 = Complex64::new(0.0, -FRAC_1_SQRT_2);
const U21: Complex64 = Complex64::new(0.0, -FRAC_1_SQRT_2);
const U22: Complex64 = Complex64::new(FRAC_1_SQRT_2, 0.0);

fn check_scope(spin: SpinMagnitude) -> Result<()> {
    if spin.two_s() > MAX_ORACLE_TWO_S {
        return Err(Error::OracleScope(format!(
            "S = {spin} exceeds the oracle limit S <= 4"
        )));
    }
    Ok(())
}

fn check_strengths(alpha_t1: f64, alpha_t2: f64) -> Result<()> {
    if !(alpha_t1.is_finite() && alpha_t2.is_finite()) {
        return Err(Error::InvalidParameter("pass strengths must be finite".into()));
    }
    Ok(())
}

/// Light amplitudes `(beta_+, beta_-)` of the Dicke component `M` after all
/// three steps, for initial amplitude `beta0` in both modes.
fn branch_amplitudes(m: f64, beta0: f64, alpha_t1: f64, alpha_t2: f64) -> (Complex64, Complex64) {
    let r1 = Complex64::from_polar(1.0, -alpha_t1 * m / 2.0);
    let (p, q) = (beta0 * r1, beta0 * r1.conj());
    let (p, q) = (U11 * p + U12 * q, U21 * p + U22 * q);
    let r2 = Complex64::from_polar(1.0, -alpha_t2 * m / 2.0);
    (p * r2, q * r2.conj())
}

/// Reduced spin state for an x-polarized coherent spin state and a light
/// pulse with `J` = `j_half` photons per circular mode on average.
///
/// `rho_MM' = c_M c_M'^* <branch_M'|branch_M>` with the coherent-state
/// overlap `<b|a> = exp(-|a - b|^2/2 + i Im(b^* a))` per mode.
pub fn coherent_branch_evolve(
    spin: SpinMagnitude,
    j_half: f64,
    alpha_t1: f64,
    alpha_t2: f64,
) -> Result<SpinDensityMatrix> {
    check_scope(spin)?;
    check_strengths(alpha_t1, alpha_t2)?;
    if !(j_half.is_finite() && j_half >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "photon half-number J = {j_half} must be >= 0"
        )));
    }
    let n = spin.dim();
    let c = coherent_amplitudes(spin, std::f64::consts::FRAC_PI_2, 0.0);
    let beta0 = j_half.sqrt();
    let branches: Vec<(Complex64, Complex64)> = spin
        .two_ms()
        .map(|tm| branch_amplitudes(tm as f64 / 2.0, beta0, alpha_t1, alpha_t2))
        .collect();

    let mut elements = vec![Complex64::new(0.0, 0.0); n * n];
    elements.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let (ap, am) = branches[i];
        for (j, z) in row.iter_mut().enumerate() {
            let (bp, bm) = branches[j];
            let exponent = Complex64::new(
                -((ap - bp).norm_sqr() + (am - bm).norm_sqr()) / 2.0,
                (bp.conj() * ap).im + (bm.conj() * am).im,
            );
            *z = c[i] * c[j].conj() * exponent.exp();
        }
    });
    Ok(SpinDensityMatrix::from_raw(spin, elements))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FockStatus {
    Ok,
    /// Truncation leakage exceeded [`LEAKAGE_WARNING`].
    LeakageWarning,
}

/// Reduced state from the truncated Fock propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct FockResult {
    /// Not renormalized; its trace is `1 - leakage`.
    pub rho: SpinDensityMatrix,
    /// Probability lost to states with more than `n_cut` photons in total.
    pub leakage: f64,
    pub status: FockStatus,
}

/// Images `U|k, N-k>` of the two-mode Fock states under the mode mixer,
/// for every `N <= n_cut`. `images[N][k][p]` is the amplitude on
/// `|p, N-p>`.
fn mixer_images(n_cut: usize) -> Vec<Vec<Vec<Complex64>>> {
    let zero = Complex64::new(0.0, 0.0);
    // (A v)[p] for A = x a_+^dag + y a_-^dag acting on block N-1
    let raise = |v: &[Complex64], x: Complex64, y: Complex64| {
        let total = v.len(); // = N
        let mut out = vec![zero; total + 1];
        for (p, &a) in v.iter().enumerate() {
            out[p + 1] += x * ((p + 1) as f64).sqrt() * a;
            out[p] += y * ((total - p) as f64).sqrt() * a;
        }
        out
    };

    let mut images: Vec<Vec<Vec<Complex64>>> = vec![vec![vec![Complex64::new(1.0, 0.0)]]];
    for total in 1..=n_cut {
        let prev = &images[total - 1];
        let block: Vec<Vec<Complex64>> = (0..=total)
            .map(|k| {
                let (src, x, y, norm) = if k == 0 {
                    (&prev[0], U12, U22, total as f64)
                } else {
                    (&prev[k - 1], U11, U21, k as f64)
                };
                raise(src, x, y).into_iter().map(|z| z / norm.sqrt()).collect()
            })
            .collect();
        images.push(block);
    }
    images
}

/// Exact propagation on the lattice `n_+ + n_- <= n_cut` tensored with the
/// spin, starting from the x-polarized coherent spin state and a coherent
/// pulse with `mean_photons` in total (half per circular mode).
pub fn fock_evolve(
    spin: SpinMagnitude,
    mean_photons: f64,
    n_cut: usize,
    alpha_t1: f64,
    alpha_t2: f64,
) -> Result<FockResult> {
    check_scope(spin)?;
    check_strengths(alpha_t1, alpha_t2)?;
    if !(mean_photons.is_finite() && mean_photons >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "mean photon number {mean_photons} must be >= 0"
        )));
    }
    let dim = spin.dim();
    let side = n_cut + 1;
    let size = side.saturating_mul(side).saturating_mul(dim);
    if size > MAX_LATTICE {
        return Err(Error::LatticeTooLarge { size, max: MAX_LATTICE });
    }

    let c = coherent_amplitudes(spin, std::f64::consts::FRAC_PI_2, 0.0);
    let alpha = (mean_photons / 2.0).sqrt();
    let mut mode = vec![(-alpha * alpha / 2.0).exp(); side];
    for k in 1..side {
        mode[k] = mode[k - 1] * alpha / (k as f64).sqrt();
    }
    let two_ms: Vec<f64> = spin.two_ms().map(|tm| tm as f64).collect();

    // blocks[N][k * dim + i]: amplitude of |k, N-k> (x) |M_i>
    let mut blocks: Vec<Vec<Complex64>> = (0..side)
        .map(|total| {
            let mut b = Vec::with_capacity((total + 1) * dim);
            for k in 0..=total {
                let photons = mode[k] * mode[total - k];
                b.extend(c.iter().map(|&cm| cm * photons));
            }
            b
        })
        .collect();

    let pass = |blocks: &mut Vec<Vec<Complex64>>, alpha_t: f64| {
        blocks.par_iter_mut().enumerate().for_each(|(total, b)| {
            for k in 0..=total {
                let jz2 = 2.0 * k as f64 - total as f64; // n_+ - n_-
                for (i, &tm) in two_ms.iter().enumerate() {
                    b[k * dim + i] *= Complex64::from_polar(1.0, -alpha_t * tm * jz2 / 4.0);
                }
            }
        });
    };

    pass(&mut blocks, alpha_t1);
    let images = mixer_images(n_cut);
    blocks.par_iter_mut().enumerate().for_each(|(total, b)| {
        let mut mixed = vec![Complex64::new(0.0, 0.0); b.len()];
        for k in 0..=total {
            for (p, &u) in images[total][k].iter().enumerate() {
                for i in 0..dim {
                    mixed[p * dim + i] += u * b[k * dim + i];
                }
            }
        }
        *b = mixed;
    });
    pass(&mut blocks, alpha_t2);

    let mut elements = vec![Complex64::new(0.0, 0.0); dim * dim];
    for b in &blocks {
        for amp in b.chunks(dim) {
            for i in 0..dim {
                for j in 0..dim {
                    elements[i * dim + j] += amp[i] * amp[j].conj();
                }
            }
        }
    }
    let rho = SpinDensityMatrix::from_raw(spin, elements);
    let leakage = (1.0 - rho.trace().re).max(0.0);
    let status = if leakage > LEAKAGE_WARNING {
        FockStatus::LeakageWarning
    } else {
        FockStatus::Ok
    };
    Ok(FockResult { rho, leakage, status })
}

/// One step of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergencePoint {
    pub alpha_t: f64,
    pub j_half: f64,
    pub max_abs_deviation: f64,
}

/// Compares [`coherent_branch_evolve`] with equal passes `alpha_t` and
/// `J = mu / alpha_t^2` against the reduced map at `mu = mu' = mu`.
pub fn convergence_study(spin: SpinMagnitude, mu: f64, alpha_ts: &[f64]) -> Result<Vec<ConvergencePoint>> {
    let reduced = evolve(&SpinDensityMatrix::x_polarized(spin)?, &TwistParameters::symmetric(mu)?);
    alpha_ts
        .iter()
        .map(|&alpha_t| {
            if alpha_t.is_nan() || alpha_t <= 0.0 {
                return Err(Error::InvalidParameter(format!("alpha t = {alpha_t} must be positive")));
            }
            let j_half = mu / (alpha_t * alpha_t);
            let rho = coherent_branch_evolve(spin, j_half, alpha_t, alpha_t)?;
            Ok(ConvergencePoint {
                alpha_t,
                j_half,
                max_abs_deviation: rho.max_abs_diff(&reduced),
            })
        })
        .collect()
}

/// True when every deviation is strictly below the previous one.
pub fn is_monotone(points: &[ConvergencePoint]) -> bool {
    points
        .windows(2)
        .all(|w| w[1].max_abs_deviation < w[0].max_abs_deviation)
}
