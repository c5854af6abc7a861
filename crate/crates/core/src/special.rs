//! Complex scalar helpers: the principal square root `√⁺(−λ)` and the gamma
//! function.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// `e^{-iπ/4}`, the phase linking `√⁺(−is)` to `√s`.
pub const E_MINUS_I_PI_4: C64 = C64 {
    re: std::f64::consts::FRAC_1_SQRT_2,
    im: -std::f64::consts::FRAC_1_SQRT_2,
};

/// Returns `k = √⁺(−λ)`, the root of `k² = −λ` with `Re k ≥ 0`.
///
/// The branch cut lies along `λ > 0`. For `Im λ > 0` the result has
/// `Re k > 0` and `Im k < 0`, so `e^{-kx}` decays as `x → +∞`.
pub fn principal_sqrt_neg(lambda: C64) -> C64 {
    (-lambda).sqrt()
}

// Lanczos approximation, g = 7, nine terms.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn ln_gamma_right(z: C64) -> C64 {
    // valid for Re z >= 0.5
    let z = z - 1.0;
    let mut series = C64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + series.ln()
}

/// Γ(z) for complex `z`, using a nine-term Lanczos series on `Re z ≥ 1/2`
/// and the reflection formula elsewhere.
pub fn complex_gamma(z: C64) -> Result<C64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("gamma of non-finite argument {z}")));
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::Domain(format!(
            "gamma has a pole at the non-positive integer {}",
            z.re
        )));
    }
    if z.re >= 0.5 {
        Ok(ln_gamma_right(z).exp())
    } else {
        // Γ(z) Γ(1−z) = π / sin(πz)
        let s = (PI * z).sin();
        Ok(PI / (s * ln_gamma_right(1.0 - z).exp()))
    }
}
