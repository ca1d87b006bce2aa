//! Normal exponential flow off a hypersurface: area elements, distance
//! Laplacians, comparison bounds, monotone quantities, and focal/cut
//! detection along each ray γ_p(t) = exp_p(t·ν).
//!
//! Area-element convention (recorded in every curve): A(0) = 1 per ray, and
//! A_f(r) = e^{−f(γ(r))}·A(r), so A_f(0) = e^{−f(p)}. No extra normalization
//! factor is applied anywhere downstream.
//!
//! In flat ambients the flow is the exact Riccati solution
//! κ_i(r) = κ_i/(1+κ_i r), A(r) = Π(1+κ_i r); in radial warped ambients the
//! level-set closed form A(t) = (h(r₀±t)/h(r₀))^{n−1}. Both are cross-checked
//! against an adaptive Runge–Kutta integration of the Riccati system on every
//! flow — a disagreement aborts rather than silently poisoning verdicts.

use nalgebra::DVector;

use crate::ambient::{MetricModel, WeightedAmbient};
use crate::error::{Error, Result};
use crate::hypersurface::{body_distance, surface_distance, Hypersurface, SurfaceKind, SurfaceNode};
use crate::ode::{integrate_to, OdeOptions, OdeSystem};

/// Convention string embedded in curve headers and reports.
pub const AREA_CONVENTION: &str =
    "A(0)=1 per ray; A_f(r)=exp(-f(gamma(r)))*A(r) so A_f(0)=exp(-f(p))";

/// Jacobian-vanishing threshold for focal detection (any 1+κᵢr below this).
const FOCAL_EPS: f64 = 1e-12;
/// Absolute slack in the nearest-point minimality test for cut detection.
const CUT_EPS: f64 = 1e-9;
/// Relative agreement demanded between closed-form and ODE area elements.
const ODE_AGREEMENT_TOL: f64 = 1e-8;
/// The ODE cross-check stops once the per-direction area factor drops below
/// this (the Riccati blow-up near focal time is outside the integrator's
/// step-size contract).
const ODE_CHECK_MIN_DENOM: f64 = 0.1;
/// The ODE cross-check covers r up to this; beyond it the closed forms stand
/// on the agreement already demonstrated.
const ODE_CHECK_MAX_R: f64 = 100.0;
/// Slack scale for θ monotonicity verdicts.
const THETA_MONO_TOL: f64 = 1e-8;
/// Hypothesis slack for ray-sampled weight bounds.
const HYP_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RayDirection {
    Outward,
    Inward,
}

/// One sample of a normal-ray flow.
#[derive(Debug, Clone)]
pub struct RaySample {
    pub r: f64,
    /// Unweighted relative area element, A(0) = 1.
    pub a: f64,
    /// e^{−f(γ(r))}·A(r).
    pub a_f: f64,
    /// Δr at γ(r) (Laplacian of the distance function).
    pub delta_r: f64,
    /// Δ_f r = Δr − ∂_r f.
    pub delta_f_r: f64,
    pub f: f64,
    pub df_dr: f64,
    pub past_focal: bool,
    pub past_cut: bool,
}

/// A flowed normal ray with foot-point data.
pub struct ComparisonCurve {
    pub n: usize,
    pub direction: RayDirection,
    /// Foot point in ambient coordinates (chart radius·direction if warped).
    pub foot: DVector<f64>,
    /// Ray direction in ambient coordinates (flat) or ±1 radial sign (warped,
    /// stored as the single signed entry convention below).
    pub ray_dir: DVector<f64>,
    /// Principal curvatures w.r.t. the ray direction as normal.
    pub kappa: Vec<f64>,
    /// H and H_f w.r.t. the ray direction (outward rays: the standard values).
    pub h0: f64,
    pub h_f0: f64,
    pub f0: f64,
    /// ∂f/∂r at the foot along the ray.
    pub df_dr0: f64,
    pub samples: Vec<RaySample>,
    pub focal_time: Option<f64>,
    pub convention: &'static str,
    /// Warped-chart bookkeeping: foot radius and ray sign (flat: None).
    warped_foot: Option<(f64, f64)>,
}

/// Weight evaluation along a ray: (f, ∂f/∂t).
fn weight_along(
    ambient: &WeightedAmbient,
    curve_foot: &DVector<f64>,
    dir: &DVector<f64>,
    warped_foot: Option<(f64, f64)>,
    t: f64,
) -> Result<(f64, f64)> {
    match warped_foot {
        None => {
            let x = curve_foot + dir * t;
            let f = ambient.weight_value_cartesian(&x)?;
            let grad = ambient.weight_gradient_cartesian(&x)?;
            Ok((f, grad.dot(dir)))
        }
        Some((r0, sign)) => {
            let s = r0 + sign * t;
            let (f, d1, _) = ambient.weight.radial_profile(s).ok_or_else(|| {
                Error::Unsupported("weight kind has no radial profile for this chart".into())
            })?;
            Ok((f, sign * d1))
        }
    }
}

struct RiccatiSystem<F: Fn(f64) -> f64> {
    na: usize,
    radial_sectional: F,
}

impl<F: Fn(f64) -> f64> OdeSystem for RiccatiSystem<F> {
    fn dim(&self) -> usize {
        self.na + 1
    }
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let k = (self.radial_sectional)(t);
        let mut trace = 0.0;
        for i in 0..self.na {
            dy[i] = -y[i] * y[i] - k;
            trace += y[i];
        }
        dy[self.na] = trace;
    }
}

/// Flow the normal ray from a quadrature node to `r_max` with `samples`
/// equispaced samples (plus the foot sample at r = 0).
pub fn flow_normal_ray(
    hyp: &Hypersurface,
    ambient: &WeightedAmbient,
    node: &SurfaceNode,
    direction: RayDirection,
    r_max: f64,
    samples: usize,
) -> Result<ComparisonCurve> {
    if !(r_max > 0.0) {
        return Err(Error::InvalidConfig(format!("r_max {r_max} must be positive")));
    }
    let n = ambient.n;
    let na = n - 1;
    let sign = match direction {
        RayDirection::Outward => 1.0,
        RayDirection::Inward => -1.0,
    };
    let (kappa, warped_foot, ray_dir, warp_profile) = match (&hyp.kind, &ambient.model) {
        (SurfaceKind::RadialGraph { .. }, MetricModel::Flat) => {
            let kappa: Vec<f64> = node.kappa.iter().map(|k| sign * k).collect();
            (kappa, None, &node.nu * sign, None)
        }
        (SurfaceKind::CoordinateSphere { r0 }, MetricModel::RadialWarped { profile, .. }) => {
            let k0 = sign * profile.dh(*r0) / profile.h(*r0);
            (vec![k0; na], Some((*r0, sign)), node.nu.clone(), Some(profile.clone()))
        }
        _ => {
            return Err(Error::Unsupported(
                "normal flow needs a flat radial graph or a warped coordinate sphere".into(),
            ))
        }
    };

    // Exact focal time: first vanishing of any 1+κᵢt (flat) or of h(r₀±t)
    // (warped); None if no vanishing before r_max.
    let focal_time = match warped_foot {
        None => kappa
            .iter()
            .filter(|k| **k < 0.0)
            .map(|k| -1.0 / k)
            .fold(f64::INFINITY, f64::min),
        Some((r0, s)) => {
            if s < 0.0 {
                r0 // linear warp closes at the apex h(0) = 0
            } else {
                f64::INFINITY
            }
        }
    };
    let focal = (focal_time <= r_max).then_some(focal_time);

    // Sample radii: 0 plus `samples` equispaced to r_max, truncated just
    // before focal time with one flagged terminal sample at the clamp.
    let mut radii = vec![0.0];
    for j in 1..=samples {
        radii.push(r_max * j as f64 / samples as f64);
    }
    let clamp = focal_time * (1.0 - 1e-9);
    let mut out = Vec::new();
    let mut terminal_added = false;
    for r in radii {
        let (r_eff, flagged) = if r >= clamp {
            if terminal_added {
                continue;
            }
            terminal_added = true;
            (clamp, true)
        } else {
            (r, false)
        };
        let (a, delta_r) = match (&warped_foot, &warp_profile) {
            (None, _) => {
                let mut a = 1.0;
                let mut tr = 0.0;
                for k in &kappa {
                    let denom = 1.0 + k * r_eff;
                    a *= denom;
                    tr += k / denom;
                }
                (a, tr)
            }
            (Some((r0, s)), Some(profile)) => {
                let sv = r0 + s * r_eff;
                let h0 = profile.h(*r0);
                let hv = profile.h(sv);
                (
                    (hv / h0).powi(na as i32),
                    (na as f64) * s * profile.dh(sv) / hv,
                )
            }
            _ => unreachable!(),
        };
        let (f, df_dr) = weight_along(ambient, &node.x, &ray_dir, warped_foot, r_eff)?;
        // Jacobian-vanishing detection: the clamp at the exact focal time, or
        // the area element (or any factor of it) degenerating numerically.
        let degenerate = a <= FOCAL_EPS
            || (warped_foot.is_none()
                && kappa.iter().any(|k| 1.0 + k * r_eff <= FOCAL_EPS));
        out.push(RaySample {
            r: r_eff,
            a,
            a_f: (-f).exp() * a,
            delta_r,
            delta_f_r: delta_r - df_dr,
            f,
            df_dr,
            past_focal: flagged || degenerate,
            past_cut: false,
        });
    }

    let curve = ComparisonCurve {
        n,
        direction,
        foot: node.x.clone(),
        ray_dir,
        kappa,
        h0: sign * node.mean_h,
        h_f0: sign * node.mean_h - out[0].df_dr,
        f0: out[0].f,
        df_dr0: out[0].df_dr,
        samples: out,
        focal_time: focal,
        convention: AREA_CONVENTION,
        warped_foot,
    };
    ode_cross_check(&curve, ambient)?;
    Ok(curve)
}

/// Integrate the Riccati system along the curve's samples and demand relative
/// agreement with the closed-form area element.
fn ode_cross_check(curve: &ComparisonCurve, ambient: &WeightedAmbient) -> Result<()> {
    let na = curve.n - 1;
    let radial_sectional: Box<dyn Fn(f64) -> f64> = match (curve.warped_foot, &ambient.model) {
        (None, _) => Box::new(|_| 0.0),
        (Some((r0, s)), MetricModel::RadialWarped { profile, .. }) => {
            let p = profile.clone();
            Box::new(move |t: f64| {
                let sv = r0 + s * t;
                -p.d2h(sv) / p.h(sv)
            })
        }
        _ => unreachable!(),
    };
    let sys = RiccatiSystem { na, radial_sectional: |t| radial_sectional(t) };
    // Tighter than the default so integrator drift stays well inside the
    // 1e-8 agreement gate over hundreds of steps.
    let opts = OdeOptions { rel_tol: 1e-12, abs_tol: 1e-14, ..Default::default() };
    let mut y: Vec<f64> = curve.kappa.clone();
    y.push(0.0); // ln A
    let mut t = 0.0;
    for s in &curve.samples {
        if s.past_focal || s.r > ODE_CHECK_MAX_R {
            break;
        }
        let min_denom = match curve.warped_foot {
            None => curve
                .kappa
                .iter()
                .map(|k| 1.0 + k * s.r)
                .fold(f64::INFINITY, f64::min),
            Some(_) => s.a.powf(1.0 / na as f64),
        };
        if min_denom < ODE_CHECK_MIN_DENOM {
            break;
        }
        if s.r > t {
            y = integrate_to(&sys, t, &y, s.r, &opts)?;
            t = s.r;
        }
        let a_ode = y[na].exp();
        let rel = (a_ode - s.a).abs() / s.a.max(1e-300);
        if s.a >= 1e-6 && rel > ODE_AGREEMENT_TOL {
            return Err(Error::Numerical(format!(
                "area-element cross-check failed at r = {}: closed form {} vs ODE {a_ode} (rel {rel:.3e})",
                s.r, s.a
            )));
        }
    }
    Ok(())
}

// ----- comparison bounds ----------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundVariant {
    /// Radial weight-derivative bound ∂_r f ≥ −a.
    A { a: f64 },
    /// Uniform weight bound |f| ≤ k.
    B { k: f64 },
    /// Synthetic dimension m ≥ n.
    M { m: f64 },
}

/// Model upper bound for Δ_f r at distance r from a foot with weighted mean
/// curvature `h_f`, in ambient dimension n.
pub fn lemma_bound(variant: BoundVariant, n: usize, h_f: f64, r: f64) -> Result<f64> {
    let nf = n as f64;
    match variant {
        BoundVariant::A { a } => {
            if h_f < 0.0 {
                return Err(Error::HypothesesUnmet {
                    check: "H_f >= 0".into(),
                    detail: format!("H_f = {h_f} at the foot point"),
                });
            }
            let d = nf - 1.0 + h_f * r;
            Ok((nf - 1.0) * h_f / d + a - (nf - 1.0).powi(2) * a / (d * d))
        }
        BoundVariant::B { k } => {
            if h_f < 0.0 {
                return Err(Error::HypothesesUnmet {
                    check: "H_f >= 0".into(),
                    detail: format!("H_f = {h_f} at the foot point"),
                });
            }
            let _ = k;
            Ok((nf - 1.0 + 4.0 * k) * h_f / (nf - 1.0 + h_f * r))
        }
        BoundVariant::M { m } => {
            let d = m - 1.0 + h_f * r;
            if d <= 0.0 {
                return Err(Error::Domain(format!(
                    "r = {r} at or past the blow-up (m-1)/(-H_f) of the model bound"
                )));
            }
            Ok((m - 1.0) * h_f / d)
        }
    }
}

// ----- theta series ---------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum ThetaVerdict {
    NonIncreasing,
    HypothesesUnmet(String),
    Violated { index: usize, jump: f64 },
}

pub struct ThetaSeries {
    pub variant: BoundVariant,
    /// (r, θ) at kept (pre-focal, pre-cut, in-domain) samples.
    pub values: Vec<(f64, f64)>,
    pub verdict: ThetaVerdict,
    pub max_forward_diff: f64,
}

/// θ_f series of a curve under a variant's normalizer, with the variant's
/// ray hypotheses verified on the ray samples (never silently assumed).
/// `ambient_failure` threads in a failed scene-level curvature check.
pub fn theta_series(
    curve: &ComparisonCurve,
    variant: BoundVariant,
    ambient_failure: Option<String>,
) -> ThetaSeries {
    let nf = curve.n as f64;
    let h_f = curve.h_f0;
    let kept: Vec<&RaySample> = curve
        .samples
        .iter()
        .filter(|s| !s.past_focal && !s.past_cut)
        .collect();

    let mut unmet: Option<String> = ambient_failure;
    if unmet.is_none() {
        unmet = match variant {
            BoundVariant::A { a } => {
                if h_f < 0.0 {
                    Some(format!("H_f = {h_f} < 0 at the foot"))
                } else {
                    kept.iter()
                        .find(|s| s.df_dr < -a - HYP_SLACK)
                        .map(|s| format!("df/dr = {} < -a at r = {}", s.df_dr, s.r))
                }
            }
            BoundVariant::B { k } => {
                if h_f < 0.0 {
                    Some(format!("H_f = {h_f} < 0 at the foot"))
                } else {
                    kept.iter()
                        .find(|s| s.f.abs() > k + HYP_SLACK)
                        .map(|s| format!("|f| = {} > k at r = {}", s.f.abs(), s.r))
                }
            }
            BoundVariant::M { m } => {
                if m < nf {
                    Some(format!("m = {m} below ambient dimension {nf}"))
                } else {
                    None
                }
            }
        };
    }

    let mut values = Vec::with_capacity(kept.len());
    for s in &kept {
        let theta = match variant {
            BoundVariant::A { a } => {
                let base = 1.0 + h_f * s.r / (nf - 1.0);
                s.a_f / ((a * s.r).exp() * base.powf(nf - 1.0))
            }
            BoundVariant::B { k } => {
                let base = 1.0 + h_f * s.r / (nf - 1.0);
                s.a_f / base.powf(nf - 1.0 + 4.0 * k)
            }
            BoundVariant::M { m } => {
                let base = 1.0 + h_f * s.r / (m - 1.0);
                if base <= 0.0 {
                    break; // past the model blow-up for H_f < 0
                }
                s.a_f / base.powf(m - 1.0)
            }
        };
        values.push((s.r, theta));
    }

    let scale = (-curve.f0).exp();
    let mut max_diff = f64::NEG_INFINITY;
    let mut worst = 0usize;
    for i in 1..values.len() {
        let d = values[i].1 - values[i - 1].1;
        if d > max_diff {
            max_diff = d;
            worst = i;
        }
    }
    if values.len() < 2 {
        max_diff = 0.0;
    }
    let verdict = if let Some(reason) = unmet {
        ThetaVerdict::HypothesesUnmet(reason)
    } else if max_diff <= THETA_MONO_TOL * scale {
        ThetaVerdict::NonIncreasing
    } else {
        ThetaVerdict::Violated { index: worst, jump: max_diff }
    };
    ThetaSeries { variant, values, verdict, max_forward_diff: max_diff.max(0.0) }
}

// ----- shrinker series ------------------------------------------------------

pub struct ShrinkerSeries {
    /// c = H·f(p) − (n−1)·∂_ν f(p) + (n−1)²/(4H).
    pub c: f64,
    /// (r, θ, K, voeup slack) with θ = A/(1+Hr/(n−1))^{n−1} on unweighted A.
    pub values: Vec<(f64, f64, f64, f64)>,
    pub max_forward_diff_k: f64,
    pub verdict: ThetaVerdict,
}

/// Monotone quantity K(r,p) = (n−1+Hr)·ln θ − c·r of the shrinker chapter,
/// with the exponential volume bound's slack. Callers gate on the shrinker
/// normalization check; this enforces only the pointwise H > 0 hypothesis.
pub fn shrinker_k_series(curve: &ComparisonCurve) -> Result<ShrinkerSeries> {
    let nf = curve.n as f64;
    let h = curve.h0;
    if h <= 0.0 {
        return Err(Error::HypothesesUnmet {
            check: "H > 0".into(),
            detail: format!("H = {h} at the foot point"),
        });
    }
    let c = h * curve.f0 - (nf - 1.0) * curve.df_dr0 + (nf - 1.0).powi(2) / (4.0 * h);
    let mut values = Vec::new();
    for s in &curve.samples {
        if s.past_focal || s.past_cut {
            break;
        }
        let base = 1.0 + h * s.r / (nf - 1.0);
        let theta = s.a / base.powf(nf - 1.0);
        let k = (nf - 1.0 + h * s.r) * theta.ln() - c * s.r;
        let slack = (c * s.r / (nf - 1.0 + h * s.r)).exp() * base.powf(nf - 1.0) - s.a;
        values.push((s.r, theta, k, slack));
    }
    let mut max_diff = f64::NEG_INFINITY;
    let mut worst = 0usize;
    for i in 1..values.len() {
        let d = values[i].2 - values[i - 1].2;
        if d > max_diff {
            max_diff = d;
            worst = i;
        }
    }
    if values.len() < 2 {
        max_diff = 0.0;
    }
    let verdict = if max_diff <= THETA_MONO_TOL {
        ThetaVerdict::NonIncreasing
    } else {
        ThetaVerdict::Violated { index: worst, jump: max_diff }
    };
    Ok(ShrinkerSeries { c, values, max_forward_diff_k: max_diff.max(0.0), verdict })
}

// ----- cut detection --------------------------------------------------------

/// Mark samples where the ray has stopped minimizing distance to the body
/// (outward) or to the hypersurface (inward). Warped coordinate-sphere scenes
/// are exempt: radial rays minimize up to focal time.
pub fn cut_clip(hyp: &Hypersurface, curve: &mut ComparisonCurve) -> Result<()> {
    if curve.warped_foot.is_some() {
        return Ok(());
    }
    let mut cut = false;
    for s in curve.samples.iter_mut() {
        if s.r == 0.0 {
            continue;
        }
        if !cut {
            let y = &curve.foot + &curve.ray_dir * s.r;
            let dist = match curve.direction {
                RayDirection::Outward => body_distance(hyp, &y)?,
                RayDirection::Inward => surface_distance(hyp, &y)?,
            };
            if dist < s.r - CUT_EPS {
                cut = true;
            }
        }
        if cut {
            s.past_cut = true;
        }
    }
    Ok(())
}

/// First time the outward normal ray from `node` stops minimizing, if any
/// occurs before `r_max` (bisected to near machine precision; the indicator
/// is monotone once true). `None` means minimizing on all of [0, r_max].
pub fn cut_time(
    hyp: &Hypersurface,
    node: &SurfaceNode,
    r_max: f64,
) -> Result<Option<f64>> {
    let not_minimizing = |r: f64| -> Result<bool> {
        let y = &node.x + &node.nu * r;
        Ok(body_distance(hyp, &y)? < r - CUT_EPS)
    };
    if !not_minimizing(r_max)? {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0_f64, r_max);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if not_minimizing(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-12 * (1.0 + hi) {
            break;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

// ----- CSV ------------------------------------------------------------------

/// Per-curve CSV with optional bound/θ/K columns aligned to the samples
/// (shorter series are padded with empty cells). Flags: "", "focal", "cut",
/// or "focal,cut".
pub fn curve_csv(
    curve: &ComparisonCurve,
    bound: Option<&[f64]>,
    theta: Option<&[f64]>,
    k: Option<&[f64]>,
) -> String {
    let mut out = String::from("r,A,A_f,delta_f_r,bound,theta,K,flags\n");
    for (i, s) in curve.samples.iter().enumerate() {
        let cell = |v: Option<&[f64]>| {
            v.and_then(|vs| vs.get(i))
                .map(|x| format!("{x:.17e}"))
                .unwrap_or_default()
        };
        let mut flags = Vec::new();
        if s.past_focal {
            flags.push("focal");
        }
        if s.past_cut {
            flags.push("cut");
        }
        out.push_str(&format!(
            "{:.17e},{:.17e},{:.17e},{:.17e},{},{},{},{}\n",
            s.r,
            s.a,
            s.a_f,
            s.delta_f_r,
            cell(bound),
            cell(theta),
            cell(k),
            flags.join(",")
        ));
    }
    out
}
