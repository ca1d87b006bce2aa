//! Gamma function and measures of round spheres/balls in real dimension.
//!
//! Real (non-integer) dimensions appear through the exponent n-1+4k, so the
//! measures are computed from the Gamma-function formulas rather than tables.

use std::f64::consts::PI;

/// Lanczos coefficients, g = 7, 9 terms; relative error below 1e-13 on the
/// positive real axis.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma defined here for positive arguments only");
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1-x) = π / sin(πx).
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut a = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + a.ln()
}

/// Γ(x) for x > 0.
pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

/// |S^{d-1}| = 2 π^{d/2} / Γ(d/2), valid for real d ≥ 1.
pub fn sphere_measure(d: f64) -> f64 {
    assert!(d >= 1.0);
    2.0 * PI.powf(0.5 * d) / gamma(0.5 * d)
}

/// |B^d| = π^{d/2} / Γ(d/2 + 1), valid for real d ≥ 0.
pub fn ball_measure(d: f64) -> f64 {
    assert!(d >= 0.0);
    PI.powf(0.5 * d) / gamma(0.5 * d + 1.0)
}
