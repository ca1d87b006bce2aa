//! Weighted tube volumes and volume-ratio limits.
//!
//! Tube volumes Vol_f{x : d(x, Ω) < R} are assembled as |Ω|_f plus per-node
//! ray integrals ∫₀^{min(R, τ(p))} A_f(r,p) dr dσ(p) against the unweighted
//! boundary measure, with τ(p) the first cut/focal time. Ratio series divide
//! by one of the four normalizers (exponential-model m(R), or the power laws
//! |𝔹^{n+4k}|R^{n+4k}, |𝔹^m|R^m, |𝔹ⁿ|Rⁿ) and extrapolate the limit by a
//! first-order-tail fit L + c/R on the last three schedule points. Flat
//! scenes with exact nearest-point distance get a Monte-Carlo cross-check.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ambient::{MetricModel, WeightedAmbient};
use crate::comparison::cut_time;
use crate::error::{Error, Result};
use crate::hypersurface::{
    body_distance, weighted_enclosed_volume, Hypersurface, QuadratureGrid, SurfaceKind,
};
use crate::quad::{geometric_breaks, integrate_panels, pairwise_sum};
use crate::specfn::{ball_measure, sphere_measure};

/// Samples per deterministic Monte-Carlo chunk (one PRNG stream each).
pub const MC_CHUNK: usize = 65536;
/// Gauss–Legendre points per ray panel.
const RAY_QUAD_PTS: usize = 32;
/// First ray panel width and growth ratio (widths grow geometrically; wide
/// far panels are harmless where the integrand is polynomial or suppressed).
const RAY_PANEL_FIRST: f64 = 0.5;
const RAY_PANEL_RATIO: f64 = 1.5;
/// Relative slack above which a ratio increase is a no-convergence verdict.
const RATIO_MONOTONE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum NormalizerKind {
    /// m(R) = n|𝔹ⁿ|∫₀^R e^{at}t^{n−1}dt.
    ModelA { a: f64 },
    /// |𝔹^dim|·R^dim with real dim (n+4k, m, or n).
    PowerLaw { dim: f64 },
}

/// Normalizer value at radius r in ambient dimension n.
pub fn normalizer_value(kind: NormalizerKind, n: usize, r: f64) -> f64 {
    match kind {
        NormalizerKind::ModelA { a } => {
            if a == 0.0 {
                ball_measure(n as f64) * r.powi(n as i32)
            } else {
                let width = (8.0 / a.abs()).min(r);
                let breaks = geometric_breaks(0.0, r, width, 1.0);
                let nf = n as f64;
                nf * ball_measure(nf)
                    * integrate_panels(
                        |t| (a * t).exp() * t.powf(nf - 1.0),
                        &breaks,
                        RAY_QUAD_PTS,
                    )
            }
        }
        NormalizerKind::PowerLaw { dim } => ball_measure(dim) * r.powf(dim),
    }
}

/// Precomputed per-node data for tube-volume evaluation at many radii.
pub struct TubeEvaluator<'a> {
    hyp: &'a Hypersurface,
    ambient: &'a WeightedAmbient,
    grid: &'a QuadratureGrid,
    /// |Ω|_f.
    pub interior: f64,
    /// Per-node integration limit min(cut time, focal time); ∞ when neither
    /// occurs before the largest radius of interest.
    pub tau: Vec<f64>,
}

impl<'a> TubeEvaluator<'a> {
    /// Prepare for tube volumes up to `r_max` (cut times are certified to
    /// that radius). `radial_resolution` controls the |Ω|_f quadrature.
    pub fn new(
        hyp: &'a Hypersurface,
        ambient: &'a WeightedAmbient,
        grid: &'a QuadratureGrid,
        radial_resolution: usize,
        r_max: f64,
    ) -> Result<Self> {
        let interior = weighted_enclosed_volume(hyp, ambient, grid, radial_resolution)?;
        let tau: Vec<f64> = match &hyp.kind {
            // Radial rays of coordinate spheres minimize up to focal time,
            // and outward rays in an expanding warp never focalize.
            SurfaceKind::CoordinateSphere { .. } => vec![f64::INFINITY; grid.nodes.len()],
            SurfaceKind::RadialGraph { .. } => grid
                .nodes
                .par_iter()
                .map(|node| -> Result<f64> {
                    let focal = node
                        .kappa
                        .iter()
                        .filter(|k| **k < 0.0)
                        .map(|k| -1.0 / k)
                        .fold(f64::INFINITY, f64::min);
                    let cut = cut_time(hyp, node, r_max)?.unwrap_or(f64::INFINITY);
                    Ok(cut.min(focal))
                })
                .collect::<Result<Vec<f64>>>()?,
        };
        Ok(TubeEvaluator { hyp, ambient, grid, interior, tau })
    }

    /// Vol_f{x : d(x, Ω) < R}; exactly |Ω|_f at R = 0.
    pub fn tube_volume(&self, r: f64) -> Result<f64> {
        if r < 0.0 {
            return Err(Error::InvalidConfig(format!("tube radius {r} negative")));
        }
        if r == 0.0 {
            return Ok(self.interior);
        }
        let shell: Vec<f64> = self
            .grid
            .nodes
            .par_iter()
            .zip(&self.tau)
            .map(|(node, tau)| -> Result<f64> {
                let t = r.min(*tau);
                if t <= 0.0 {
                    return Ok(0.0);
                }
                let breaks = geometric_breaks(0.0, t, RAY_PANEL_FIRST.min(t), RAY_PANEL_RATIO);
                let integral = match (&self.hyp.kind, &self.ambient.model) {
                    (SurfaceKind::RadialGraph { .. }, MetricModel::Flat) => {
                        // Probe once so configuration errors surface as such;
                        // after that the weight is total on the ray.
                        self.ambient.weight_value_cartesian(&node.x)?;
                        integrate_panels(
                            |s| {
                                let x = &node.x + &node.nu * s;
                                let f = self
                                    .ambient
                                    .weight_value_cartesian(&x)
                                    .unwrap_or(f64::NAN);
                                let a: f64 =
                                    node.kappa.iter().map(|k| 1.0 + k * s).product();
                                (-f).exp() * a
                            },
                            &breaks,
                            RAY_QUAD_PTS,
                        )
                    }
                    (
                        SurfaceKind::CoordinateSphere { r0 },
                        MetricModel::RadialWarped { profile, .. },
                    ) => {
                        self.ambient.weight.radial_profile(*r0).ok_or_else(|| {
                            Error::Unsupported("weight has no radial profile".into())
                        })?;
                        let h0 = profile.h(*r0);
                        let na = (self.ambient.n - 1) as i32;
                        integrate_panels(
                            |s| {
                                let f = self
                                    .ambient
                                    .weight
                                    .radial_profile(r0 + s)
                                    .map(|(f, _, _)| f)
                                    .unwrap_or(f64::NAN);
                                (-f).exp() * (profile.h(r0 + s) / h0).powi(na)
                            },
                            &breaks,
                            RAY_QUAD_PTS,
                        )
                    }
                    _ => {
                        return Err(Error::Unsupported(
                            "tube volume needs a flat radial graph or warped coordinate sphere"
                                .into(),
                        ))
                    }
                };
                if !integral.is_finite() {
                    return Err(Error::Numerical(format!(
                        "non-finite ray integral at node {:?}",
                        node.phi
                    )));
                }
                Ok(node.dsigma() * integral)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(self.interior + pairwise_sum(&shell))
    }
}

// ----- ball volumes ---------------------------------------------------------

/// (Weighted) geodesic-ball volume about `center` (flat) or the apex
/// (warped), by closed form or radial quadrature.
pub fn ball_volume(
    ambient: &WeightedAmbient,
    center: &DVector<f64>,
    r: f64,
    weighted: bool,
) -> Result<f64> {
    if r < 0.0 {
        return Err(Error::InvalidConfig(format!("ball radius {r} negative")));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    let nf = ambient.n as f64;
    match &ambient.model {
        MetricModel::Flat => {
            if !weighted {
                return Ok(ball_measure(nf) * r.powf(nf));
            }
            if ambient.weight.is_constant() {
                let f0 = ambient.weight_value_cartesian(center)?;
                return Ok((-f0).exp() * ball_measure(nf) * r.powf(nf));
            }
            if center.norm() < 1e-12 {
                if ambient.weight.radial_profile(1.0).is_some() {
                    let breaks =
                        geometric_breaks(0.0, r, RAY_PANEL_FIRST.min(r), RAY_PANEL_RATIO);
                    let v = integrate_panels(
                        |t| {
                            let (f, _, _) = ambient.weight.radial_profile(t).unwrap();
                            (-f).exp() * t.powf(nf - 1.0)
                        },
                        &breaks,
                        RAY_QUAD_PTS,
                    );
                    return Ok(sphere_measure(nf) * v);
                }
            }
            Err(Error::Unsupported(
                "weighted ball volume needs a constant weight or a radial weight about the origin"
                    .into(),
            ))
        }
        MetricModel::RadialWarped { profile, .. } => {
            if weighted {
                ambient.weight.radial_profile(1.0).ok_or_else(|| {
                    Error::Unsupported("weight has no radial profile".into())
                })?;
            }
            let breaks = geometric_breaks(0.0, r, RAY_PANEL_FIRST.min(r), RAY_PANEL_RATIO);
            let v = integrate_panels(
                |t| {
                    let f = if weighted {
                        ambient
                            .weight
                            .radial_profile(t)
                            .map(|(f, _, _)| f)
                            .unwrap_or(f64::NAN)
                    } else {
                        0.0
                    };
                    (-f).exp() * profile.h(t).powf(nf - 1.0)
                },
                &breaks,
                RAY_QUAD_PTS,
            );
            if !v.is_finite() {
                return Err(Error::Numerical(format!("non-finite ball integrand to r = {r}")));
            }
            Ok(sphere_measure(nf) * v)
        }
        MetricModel::ProductCylinder { .. } => Err(Error::Unsupported(
            "ball volumes not defined for the cylinder model".into(),
        )),
    }
}

// ----- ratio series ---------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct VolumePoint {
    pub r: f64,
    pub volume: f64,
    pub normalizer: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SeriesVerdict {
    Converged,
    NoConvergence(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct VolumeSeries {
    pub kind: NormalizerKind,
    pub points: Vec<VolumePoint>,
    /// Extrapolated limit from the last two-point fit of L + c/R.
    pub limit: f64,
    /// |change in L| across the last two fits.
    pub fit_error: f64,
    pub verdict: SeriesVerdict,
}

/// Geometric radius schedule base·factor^j, j = 0..count.
pub fn geometric_schedule(base: f64, factor: f64, count: usize) -> Vec<f64> {
    (0..count).map(|j| base * factor.powi(j as i32)).collect()
}

/// Fit ratio(R) = L + c/R through two points, returning L.
fn tail_fit(p1: &VolumePoint, p2: &VolumePoint) -> f64 {
    let c = (p1.ratio - p2.ratio) / (1.0 / p1.r - 1.0 / p2.r);
    p2.ratio - c / p2.r
}

/// Evaluate volumes over the schedule, dividing by the normalizer, and
/// extrapolate the limit. The ratio-monotonicity expected of every
/// well-defined limit is verified, not assumed: an increase beyond tolerance
/// yields a no-convergence verdict (never a crash).
pub fn ratio_series_from<F>(
    kind: NormalizerKind,
    n: usize,
    schedule: &[f64],
    volume: F,
) -> Result<VolumeSeries>
where
    F: Fn(f64) -> Result<f64>,
{
    if schedule.len() < 6 {
        return Err(Error::InvalidConfig(format!(
            "ratio schedule has {} points; at least 6 required",
            schedule.len()
        )));
    }
    if schedule.windows(2).any(|w| w[1] <= w[0]) || schedule[0] <= 0.0 {
        return Err(Error::InvalidConfig(
            "ratio schedule must be positive and strictly increasing".into(),
        ));
    }
    let mut points = Vec::with_capacity(schedule.len());
    for &r in schedule {
        let v = volume(r)?;
        let norm = normalizer_value(kind, n, r);
        let ratio = v / norm;
        if !ratio.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite volume ratio {ratio} at R = {r}"
            )));
        }
        points.push(VolumePoint { r, volume: v, normalizer: norm, ratio });
    }
    let scale = points.iter().map(|p| p.ratio.abs()).fold(0.0, f64::max).max(1e-300);
    let mut verdict = SeriesVerdict::Converged;
    for w in points.windows(2) {
        if w[1].ratio - w[0].ratio > RATIO_MONOTONE_TOL * scale {
            verdict = SeriesVerdict::NoConvergence(format!(
                "ratio increases from {} at R = {} to {} at R = {}",
                w[0].ratio, w[0].r, w[1].ratio, w[1].r
            ));
            break;
        }
    }
    let l = points.len();
    let fit_prev = tail_fit(&points[l - 3], &points[l - 2]);
    let fit_last = tail_fit(&points[l - 2], &points[l - 1]);
    Ok(VolumeSeries {
        kind,
        points,
        limit: fit_last,
        fit_error: (fit_last - fit_prev).abs(),
        verdict,
    })
}

/// CSV with the contracted columns.
pub fn series_csv(series: &VolumeSeries) -> String {
    let mut out = String::from("R,tube_volume,normalizer,ratio\n");
    for p in &series.points {
        out.push_str(&format!(
            "{:.17e},{:.17e},{:.17e},{:.17e}\n",
            p.r, p.volume, p.normalizer, p.ratio
        ));
    }
    out
}

// ----- Monte-Carlo cross-check ----------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Monte-Carlo tube volume: uniform samples in the bounding box of half-width
/// ρ_max + R about the body center, weighted indicator average. Requires a
/// flat ambient and a profile with exact nearest-point distance (the
/// star-shaped bodies with closed-form or secular-equation feet). Chunked
/// per-stream PRNG makes the result independent of worker count.
pub fn mc_cross_check(
    hyp: &Hypersurface,
    ambient: &WeightedAmbient,
    r: f64,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    let (center, rho_min, rho_max) = match (&hyp.kind, &ambient.model) {
        (SurfaceKind::RadialGraph { center, profile }, MetricModel::Flat) => {
            match profile.radial_bounds() {
                Some((lo, hi)) => (center.clone(), lo, hi),
                None => {
                    return Err(Error::Unsupported(
                        "Monte-Carlo needs a profile with exact radial bounds and distance"
                            .into(),
                    ))
                }
            }
        }
        _ => {
            return Err(Error::Unsupported(
                "Monte-Carlo cross-check requires a flat radial-graph scene".into(),
            ))
        }
    };
    if samples == 0 {
        return Err(Error::InvalidConfig("Monte-Carlo sample count is zero".into()));
    }
    let n = ambient.n;
    let half = rho_max + r;
    let box_vol = (2.0 * half).powi(n as i32);
    let chunks = samples.div_ceil(MC_CHUNK as u64);

    let partials: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|chunk| -> Result<(f64, f64)> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let lo = chunk * MC_CHUNK as u64;
            let count = MC_CHUNK.min((samples - lo) as usize);
            let mut x = DVector::zeros(n);
            let (mut sum, mut sum2) = (0.0, 0.0);
            for _ in 0..count {
                for i in 0..n {
                    x[i] = center[i] + (2.0 * rng.gen::<f64>() - 1.0) * half;
                }
                let d2c = (&x - &center).norm();
                let inside_tube = if d2c <= rho_min + r {
                    true // a point of the body lies within r along the radius
                } else if d2c - rho_max > r {
                    false // even the farthest surface point is too far
                } else {
                    body_distance(hyp, &x)? <= r
                };
                if inside_tube {
                    let w = (-ambient.weight_value_cartesian(&x)?).exp();
                    sum += w;
                    sum2 += w * w;
                }
            }
            Ok((sum, sum2))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;

    let sums: Vec<f64> = partials.iter().map(|p| p.0).collect();
    let sums2: Vec<f64> = partials.iter().map(|p| p.1).collect();
    let total = pairwise_sum(&sums);
    let total2 = pairwise_sum(&sums2);
    let nf = samples as f64;
    let mean = total / nf;
    let var = (total2 / nf - mean * mean).max(0.0);
    Ok(McEstimate {
        value: box_vol * mean,
        std_error: box_vol * (var / nf).sqrt(),
        samples,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::{WarpProfile, WeightFunction, WeightKind};
    use crate::hypersurface::{build_quadrature, CosLobeProfile, EllipsoidProfile};
    use std::f64::consts::PI;

    fn flat(n: usize) -> WeightedAmbient {
        WeightedAmbient::flat(n, WeightFunction::new(WeightKind::Zero))
    }

    fn gaussian(n: usize) -> WeightedAmbient {
        WeightedAmbient::flat(n, WeightFunction::new(WeightKind::Gaussian { lambda: 0.25 }))
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn normalizer_examples() {
        // n = 2, a = 1, r = 1: 2π∫₀¹e^t t dt = 2π[e^t(t−1)]₀¹ = 2π.
        assert!(rel(
            normalizer_value(NormalizerKind::ModelA { a: 1.0 }, 2, 1.0),
            2.0 * PI
        ) < 1e-12);
        assert!(rel(
            normalizer_value(NormalizerKind::ModelA { a: 0.0 }, 3, 2.0),
            32.0 * PI / 3.0
        ) < 1e-14);
        assert!(rel(
            normalizer_value(NormalizerKind::PowerLaw { dim: 4.0 }, 3, 1.0),
            PI * PI / 2.0
        ) < 1e-13);
    }

    #[test]
    fn unit_ball_tube_volumes() {
        let amb = flat(3);
        let hyp = Hypersurface::sphere(DVector::zeros(3), 1.0);
        let grid = build_quadrature(&hyp, &amb, 16).unwrap();
        let eval = TubeEvaluator::new(&hyp, &amb, &grid, 64, 700.0).unwrap();
        assert!(rel(eval.tube_volume(0.0).unwrap(), 4.0 * PI / 3.0) < 1e-10);
        assert!(rel(eval.tube_volume(1.0).unwrap(), 32.0 * PI / 3.0) < 1e-8);
        // Monotone non-decreasing in R.
        let mut prev = 0.0;
        for r in [0.0, 0.25, 0.5, 1.0, 2.0, 10.0] {
            let v = eval.tube_volume(r).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn gaussian_ball_tube_exhausts_total_mass() {
        let amb = gaussian(3);
        let hyp = Hypersurface::sphere(DVector::zeros(3), 1.0);
        let grid = build_quadrature(&hyp, &amb, 16).unwrap();
        let eval = TubeEvaluator::new(&hyp, &amb, &grid, 64, 100.0).unwrap();
        let total = (4.0 * PI).powf(1.5);
        assert!((eval.tube_volume(8.0).unwrap() - total).abs() < 1e-5);
    }

    #[test]
    fn flat_ball_relative_volume_limit() {
        let amb = flat(3);
        let hyp = Hypersurface::sphere(DVector::zeros(3), 1.0);
        let grid = build_quadrature(&hyp, &amb, 16).unwrap();
        let schedule = geometric_schedule(10.0, 2.0, 7);
        let eval =
            TubeEvaluator::new(&hyp, &amb, &grid, 64, *schedule.last().unwrap()).unwrap();
        let series = ratio_series_from(NormalizerKind::ModelA { a: 0.0 }, 3, &schedule, |r| {
            eval.tube_volume(r)
        })
        .unwrap();
        assert!(series.verdict == SeriesVerdict::Converged);
        assert!((series.limit - 1.0).abs() < 1e-3, "limit {}", series.limit);
        assert!(series.fit_error < 1e-3);
        // Exact ratio is 1 + 3/R + 3/R² + 1/R³: strictly decreasing.
        for w in series.points.windows(2) {
            assert!(w[1].ratio < w[0].ratio);
        }
        // Tail-fit accuracy on the known closed form: L = 1 − 3/(R₅R₆) + O(R⁻³).
        assert!((series.limit - 1.0).abs() < 5e-5);
    }

    #[test]
    fn gaussian_ball_relative_volume_vanishes() {
        let amb = gaussian(3);
        let hyp = Hypersurface::sphere(DVector::zeros(3), 1.0);
        let grid = build_quadrature(&hyp, &amb, 12).unwrap();
        let schedule = geometric_schedule(1.875, 2.0, 6);
        let eval =
            TubeEvaluator::new(&hyp, &amb, &grid, 64, *schedule.last().unwrap()).unwrap();
        let series = ratio_series_from(NormalizerKind::ModelA { a: 0.0 }, 3, &schedule, |r| {
            eval.tube_volume(r)
        })
        .unwrap();
        assert!(series.verdict == SeriesVerdict::Converged);
        assert!(series.limit.abs() < 1e-3, "limit {}", series.limit);
    }

    #[test]
    fn flat_asymptotic_ratio_is_exactly_one() {
        let amb = flat(3);
        let schedule = geometric_schedule(10.0, 2.0, 7);
        for center in [DVector::zeros(3), DVector::from_column_slice(&[1.0, 0.5, 0.0])] {
            let series =
                ratio_series_from(NormalizerKind::PowerLaw { dim: 3.0 }, 3, &schedule, |r| {
                    ball_volume(&amb, &center, r, false)
                })
                .unwrap();
            assert!(series.verdict == SeriesVerdict::Converged);
            assert!((series.limit - 1.0).abs() < 1e-12);
            assert!(series.fit_error < 1e-12);
        }
    }

    #[test]
    fn synthetic_dimension_ratio_above_n_fits_zero() {
        // |B(R)| = |𝔹³|R³ against |𝔹⁴|R⁴: the ratio is exactly ∝ 1/R, so the
        // first-order tail fit recovers L = 0 to machine precision.
        let amb = flat(3);
        let schedule = geometric_schedule(10.0, 2.0, 7);
        let center = DVector::zeros(3);
        let series =
            ratio_series_from(NormalizerKind::PowerLaw { dim: 4.0 }, 3, &schedule, |r| {
                ball_volume(&amb, &center, r, true)
            })
            .unwrap();
        assert!(series.verdict == SeriesVerdict::Converged);
        assert!(series.limit.abs() < 1e-12, "limit {}", series.limit);
    }

    #[test]
    fn cone_asymptotic_ratio_is_slope_power() {
        let amb = WeightedAmbient {
            n: 3,
            model: MetricModel::RadialWarped {
                profile: WarpProfile::Linear { slope: 0.75 },
                r_min: 0.25,
            },
            weight: WeightFunction::new(WeightKind::Zero),
            m_synthetic: None,
        };
        let schedule = geometric_schedule(10.0, 2.0, 7);
        let center = DVector::zeros(3);
        let series =
            ratio_series_from(NormalizerKind::PowerLaw { dim: 3.0 }, 3, &schedule, |r| {
                ball_volume(&amb, &center, r, false)
            })
            .unwrap();
        assert!(series.verdict == SeriesVerdict::Converged);
        assert!(rel(series.limit, 0.75 * 0.75) < 1e-10, "limit {}", series.limit);
    }

    #[test]
    fn schedule_validation() {
        let amb = flat(3);
        let center = DVector::zeros(3);
        let vol = |r: f64| ball_volume(&amb, &center, r, false);
        assert!(matches!(
            ratio_series_from(NormalizerKind::PowerLaw { dim: 3.0 }, 3, &[1.0, 2.0], vol),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            ratio_series_from(
                NormalizerKind::PowerLaw { dim: 3.0 },
                3,
                &[1.0, 2.0, 4.0, 8.0, 8.0, 16.0],
                vol
            ),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn mc_unit_ball_matches_closed_form() {
        let amb = flat(3);
        let hyp = Hypersurface::sphere(DVector::zeros(3), 1.0);
        let est = mc_cross_check(&hyp, &amb, 1.0, 1_000_000, 42).unwrap();
        let exact = 32.0 * PI / 3.0;
        assert!(
            (est.value - exact).abs() <= 4.0 * est.std_error,
            "MC {} vs exact {exact} (4σ = {})",
            est.value,
            4.0 * est.std_error
        );
        assert!(est.std_error < 0.15);

        let est0 = mc_cross_check(&hyp, &amb, 0.0, 200_000, 42).unwrap();
        assert!((est0.value - 4.0 * PI / 3.0).abs() <= 4.0 * est0.std_error);
    }

    #[test]
    fn mc_matches_quadrature_on_ellipsoid() {
        let amb = flat(3);
        let hyp = Hypersurface {
            kind: SurfaceKind::RadialGraph {
                center: DVector::zeros(3),
                profile: Box::new(EllipsoidProfile { semi_axes: vec![2.0, 1.0, 1.0] }),
            },
        };
        let grid = build_quadrature(&hyp, &amb, 24).unwrap();
        let eval = TubeEvaluator::new(&hyp, &amb, &grid, 64, 1.0).unwrap();
        let quad = eval.tube_volume(0.5).unwrap();
        let est = mc_cross_check(&hyp, &amb, 0.5, 200_000, 7).unwrap();
        assert!(
            (est.value - quad).abs() <= 4.0 * est.std_error,
            "MC {} vs quadrature {quad} (4σ = {})",
            est.value,
            4.0 * est.std_error
        );
    }

    #[test]
    fn mc_bitwise_deterministic() {
        let amb = gaussian(3);
        let hyp = Hypersurface::sphere(DVector::zeros(3), 1.0);
        let a = mc_cross_check(&hyp, &amb, 2.0, 100_000, 9).unwrap();
        let b = mc_cross_check(&hyp, &amb, 2.0, 100_000, 9).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
        let c = mc_cross_check(&hyp, &amb, 2.0, 100_000, 10).unwrap();
        assert_ne!(a.value.to_bits(), c.value.to_bits());
    }

    #[test]
    fn mc_refuses_profiles_without_exact_distance() {
        let amb = flat(2);
        let hyp = Hypersurface {
            kind: SurfaceKind::RadialGraph {
                center: DVector::zeros(2),
                profile: Box::new(CosLobeProfile { base: 1.0, amp: 0.5, harmonic: 2 }),
            },
        };
        assert!(matches!(
            mc_cross_check(&hyp, &amb, 1.0, 1000, 1),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn lobe_tube_clips_at_cut_times() {
        let amb = flat(2);
        let hyp = Hypersurface {
            kind: SurfaceKind::RadialGraph {
                center: DVector::zeros(2),
                profile: Box::new(CosLobeProfile { base: 1.0, amp: 0.5, harmonic: 2 }),
            },
        };
        let grid = build_quadrature(&hyp, &amb, 32).unwrap();
        let eval = TubeEvaluator::new(&hyp, &amb, &grid, 64, 10.0).unwrap();
        // Some rays are clipped strictly before R = 10.
        assert!(eval.tau.iter().any(|t| *t < 10.0));
        // Exact two-sided sandwich: the body contains the disk of radius
        // ρ_min = 0.5 and sits inside the disk of radius ρ_max = 1.5, so the
        // R-offset area lies strictly between the two disk-offset areas.
        let r = 8.0;
        let v = eval.tube_volume(r).unwrap();
        let inner = PI * (0.5 + r) * (0.5 + r);
        let outer = PI * (1.5 + r) * (1.5 + r);
        assert!(v > inner, "tube {v} below inscribed-disk offset {inner}");
        assert!(v < outer, "tube {v} exceeds containing-disk offset {outer}");
        // Monotone in R despite clipping.
        let mut prev = 0.0;
        for rr in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let vv = eval.tube_volume(rr).unwrap();
            assert!(vv >= prev);
            prev = vv;
        }
    }

    #[test]
    fn series_csv_shape() {
        let amb = flat(3);
        let center = DVector::zeros(3);
        let schedule = geometric_schedule(10.0, 2.0, 6);
        let series =
            ratio_series_from(NormalizerKind::PowerLaw { dim: 3.0 }, 3, &schedule, |r| {
                ball_volume(&amb, &center, r, false)
            })
            .unwrap();
        let csv = series_csv(&series);
        assert!(csv.starts_with("R,tube_volume,normalizer,ratio\n"));
        assert_eq!(csv.lines().count(), 7);
    }
}
