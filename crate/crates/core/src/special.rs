//! Small special-function helpers shared by the state builders and the
//! closed-form diagnostics.

use statrs::function::factorial::ln_binomial;

/// `ln C(n, k)` through log-gamma; valid for `n` far beyond where the
/// factorials overflow.
pub fn ln_binom(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    ln_binomial(n, k)
}

/// `base^exponent` for an integer exponent, evaluated as
/// `sign * exp(exponent * ln|base|)`.
///
/// The sign is negative only for a negative base and an odd exponent.
/// `0^0 = 1`; `0^n = 0` for `n > 0`; `0^n` for `n < 0` is `+inf`.
pub fn signed_pow(base: f64, exponent: i64) -> f64 {
    if exponent == 0 {
        return 1.0;
    }
    if base == 0.0 {
        return if exponent > 0 { 0.0 } else { f64::INFINITY };
    }
    let magnitude = (exponent as f64 * base.abs().ln()).exp();
    if base < 0.0 && exponent % 2 != 0 {
        -magnitude
    } else {
        magnitude
    }
}
