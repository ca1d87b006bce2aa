//! Adaptive Dormand–Prince 5(4) integrator.
//!
//! Used as the independent cross-check for closed-form Riccati/Jacobi
//! solutions along normal rays. Contract (matching the comparison module):
//! local error tolerance 1e-10 and max step 0.01·(1+t), so solutions that vary
//! on scale (1 + H t) stay resolved.

use crate::error::{Error, Result};

pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]);
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Hard cap on the step as a function of t: h ≤ step_scale·(1 + t).
    pub step_scale: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            step_scale: 0.01,
            max_steps: 2_000_000,
        }
    }
}

// Dormand–Prince RK5(4)7M tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// 5th-order solution weights (same as last A row), and the embedded 4th-order weights.
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate from (t0, y0) to t1 > t0, returning y(t1).
pub fn integrate_to<S: OdeSystem>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    t1: f64,
    opts: &OdeOptions,
) -> Result<Vec<f64>> {
    assert_eq!(y0.len(), sys.dim());
    if t1 <= t0 {
        return Ok(y0.to_vec());
    }
    let dim = sys.dim();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k = vec![vec![0.0; dim]; 7];
    let mut h = (opts.step_scale * (1.0 + t0)).min(t1 - t0);
    let mut ytmp = vec![0.0; dim];
    let mut y5 = vec![0.0; dim];
    let mut y4 = vec![0.0; dim];

    for _step in 0..opts.max_steps {
        if t >= t1 {
            return Ok(y);
        }
        h = h.min(t1 - t).min(opts.step_scale * (1.0 + t));
        sys.rhs(t, &y, &mut k[0]);
        for s in 0..6 {
            for i in 0..dim {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s + 1) {
                    acc += A[s][j] * kj[i];
                }
                ytmp[i] = y[i] + h * acc;
            }
            sys.rhs(t + C[s] * h, &ytmp, &mut k[s + 1]);
        }
        let mut err_ratio: f64 = 0.0;
        for i in 0..dim {
            let mut acc5 = 0.0;
            let mut acc4 = 0.0;
            for (j, kj) in k.iter().enumerate() {
                acc5 += B5[j] * kj[i];
                acc4 += B4[j] * kj[i];
            }
            y5[i] = y[i] + h * acc5;
            y4[i] = y[i] + h * acc4;
            let scale = opts.abs_tol + opts.rel_tol * y[i].abs().max(y5[i].abs());
            err_ratio = err_ratio.max((y5[i] - y4[i]).abs() / scale);
        }
        if err_ratio <= 1.0 {
            t += h;
            y.copy_from_slice(&y5);
        }
        // PI-free standard step update with safety factor.
        let factor = if err_ratio > 0.0 {
            (0.9 * err_ratio.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
        if h < 1e-14 * (1.0 + t) {
            return Err(Error::Numerical(format!(
                "ODE step underflow at t = {t:.6e} (last accepted state kept)"
            )));
        }
    }
    Err(Error::Numerical(format!(
        "ODE step budget exhausted at t = {t:.6e} before reaching {t1:.6e}"
    )))
}
