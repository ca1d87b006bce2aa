//! Boundary functionals and end-to-end inequality verification.
//!
//! The functionals are curvature integrals over a hypersurface quadrature
//! grid: weighted Willmore integrands in three flavours (slope-bounded
//! weight, magnitude-bounded weight, synthetic dimension), the shrinker
//! Willmore integrand with its pointwise exponent, and the two
//! Heintze–Karcher pairings.  `verify` glues a functional (LHS) to its
//! asymptotic volume-ratio counterpart (RHS), runs every hypothesis check
//! first, and classifies the slack into holds / equality / violated /
//! hypotheses-unmet.  Hypothesis failures are reported, never silently
//! dropped, and a verdict of `violated` is only issued when the slack is
//! negative beyond both the equality tolerance and the extrapolation error
//! of the RHS.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::ambient::{CurvatureCondition, WeightFunction, WeightKind, WeightedAmbient};
use crate::error::{Error, Result};
use crate::hypersurface::{
    build_quadrature, weighted_area, weighted_enclosed_volume, Hypersurface, QuadratureGrid,
    SurfaceKind,
};
use crate::quad::pairwise_sum;
use crate::specfn::{ball_measure, sphere_measure};
use crate::volume::{
    geometric_schedule, ratio_series_from, NormalizerKind, SeriesVerdict, TubeEvaluator,
    VolumeSeries,
};

/// Relative equality-detection tolerance on the verified inequalities.
pub const DEFAULT_EQ_TOL: f64 = 1e-3;
/// Default quadrature-honesty scale; constant-H_f gating is 100× this.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
/// Isoperimetric theorems refuse when |criticality residual| exceeds this.
pub const CRITICALITY_TOL: f64 = 1e-6;
/// A boundary is not a constant-H_f candidate when its H_f spread exceeds
/// this factor times the working tolerance.
pub const CMC_SPREAD_FACTOR: f64 = 100.0;
/// Absolute slack granted to the pointwise ray hypotheses.
const HYP_SLACK: f64 = 1e-12;

// ----- boundary functionals -------------------------------------------------

/// Exponent flavour of the weighted Willmore functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WillmoreVariant {
    /// Exponent n−1 (slope-bounded weight hypothesis ∂_r f ≥ −a).
    A,
    /// Exponent n−1+4k (magnitude-bounded weight hypothesis |f| ≤ k).
    B { k: f64 },
}

fn check_h_f_sign(grid: &QuadratureGrid, strict: bool) -> Result<()> {
    let (idx, min) = worst_node(grid, |v| v);
    let bad = if strict { min <= 0.0 } else { min < -HYP_SLACK };
    if bad {
        let node = &grid.nodes[idx];
        return Err(Error::HypothesesUnmet {
            check: if strict { "H_f > 0" } else { "H_f >= 0" }.into(),
            detail: format!(
                "node {idx} at angles {:?}: H_f = {:.6}",
                node.phi, node.h_f
            ),
        });
    }
    Ok(())
}

/// Index and value of the minimal `value(H_f)` over the grid.
fn worst_node<F: Fn(f64) -> f64>(grid: &QuadratureGrid, value: F) -> (usize, f64) {
    let mut idx = 0;
    let mut min = f64::INFINITY;
    for (i, node) in grid.nodes.iter().enumerate() {
        let v = value(node.h_f);
        if v < min {
            min = v;
            idx = i;
        }
    }
    (idx, min)
}

/// ∫ (H_f/(n−1))^p e^{−f} dσ with p = n−1 (variant A) or n−1+4k (variant B).
/// Requires H_f ≥ 0 at every node; the first offending node is named.
pub fn willmore_f(grid: &QuadratureGrid, variant: WillmoreVariant) -> Result<f64> {
    let na = (grid.n - 1) as f64;
    let p = match variant {
        WillmoreVariant::A => na,
        WillmoreVariant::B { k } => {
            if !(k >= 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "magnitude bound k = {k} must be nonnegative"
                )));
            }
            na + 4.0 * k
        }
    };
    check_h_f_sign(grid, false)?;
    let terms: Vec<f64> = grid
        .nodes
        .iter()
        .map(|node| node.dsigma() * (-node.f).exp() * (node.h_f.max(0.0) / na).powf(p))
        .collect();
    Ok(pairwise_sum(&terms))
}

/// ∫ |H_f/(m−1)|^{m−1} e^{−f} dσ for a real synthetic dimension m > 1.
/// The absolute value makes the integrand sign-blind, so no H_f sign
/// hypothesis is imposed here.
pub fn willmore_m(grid: &QuadratureGrid, m: f64) -> Result<f64> {
    if !(m > 1.0) {
        return Err(Error::InvalidConfig(format!(
            "synthetic dimension m = {m} must exceed 1"
        )));
    }
    let terms: Vec<f64> = grid
        .nodes
        .iter()
        .map(|node| {
            node.dsigma() * (-node.f).exp() * (node.h_f / (m - 1.0)).abs().powf(m - 1.0)
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Shrinker Willmore integral together with the extremal-case diagnostic.
#[derive(Debug, Clone, Copy)]
pub struct ShrinkerWillmore {
    /// ∫ exp{(n−1)²/(4H²) + f − ((n−1)/H)∂_ν f}·(H/(n−1))^{n−1} dσ
    /// against the unweighted area element.
    pub value: f64,
    /// max over nodes of |(n−1)²/(4H²) + f − ((n−1)/H)∂_ν f|; vanishes
    /// identically on centered Gaussian-shrinker spheres.
    pub max_abs_exponent: f64,
}

/// Shrinker Willmore functional; requires unweighted mean curvature H > 0
/// at every node.
pub fn willmore_shrinker(grid: &QuadratureGrid) -> Result<ShrinkerWillmore> {
    let na = (grid.n - 1) as f64;
    for (i, node) in grid.nodes.iter().enumerate() {
        if node.mean_h <= 0.0 {
            return Err(Error::HypothesesUnmet {
                check: "H > 0".into(),
                detail: format!(
                    "node {i} at angles {:?}: H = {:.6}",
                    node.phi, node.mean_h
                ),
            });
        }
    }
    let mut max_abs_exponent: f64 = 0.0;
    let terms: Vec<f64> = grid
        .nodes
        .iter()
        .map(|node| {
            let h = node.mean_h;
            let exponent = na * na / (4.0 * h * h) + node.f - na / h * node.dnu_f;
            max_abs_exponent = max_abs_exponent.max(exponent.abs());
            node.dsigma() * exponent.exp() * (h / na).powf(na)
        })
        .collect();
    Ok(ShrinkerWillmore { value: pairwise_sum(&terms), max_abs_exponent })
}

/// Denominator dimension of the Heintze–Karcher comparison volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HkMode {
    /// RHS = |M|_f (no synthetic dimension; the weaker, always-valid form).
    F,
    /// RHS = (m/(m−1))·|M|_f for synthetic dimension m > 1.
    M(f64),
}

#[derive(Debug, Clone, Copy)]
pub struct HkReport {
    /// ∫ e^{−f}/H_f dσ.
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

/// Heintze–Karcher pairing over a boundary grid with enclosed weighted
/// volume |M|_f; requires H_f > 0 at every node.
pub fn heintze_karcher(
    grid: &QuadratureGrid,
    mode: HkMode,
    weighted_volume: f64,
) -> Result<HkReport> {
    check_h_f_sign(grid, true)?;
    let terms: Vec<f64> = grid
        .nodes
        .iter()
        .map(|node| node.dsigma() * (-node.f).exp() / node.h_f)
        .collect();
    let lhs = pairwise_sum(&terms);
    let rhs = match mode {
        HkMode::F => weighted_volume,
        HkMode::M(m) => {
            if !(m > 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "synthetic dimension m = {m} must exceed 1"
                )));
            }
            m / (m - 1.0) * weighted_volume
        }
    };
    Ok(HkReport { lhs, rhs, slack: lhs - rhs })
}

// ----- isoperimetric criticality --------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct CriticalityReport {
    /// Dimension parameter of the isoperimetric functional (n or m).
    pub d: f64,
    /// Area-weighted mean of H_f over the boundary.
    pub mean_h_f: f64,
    /// max H_f − min H_f over the grid.
    pub h_f_spread: f64,
    /// mean(H_f)/(d−1) − (1/d)·|∂Ω|_f/|Ω|_f; zero at a critical domain.
    pub residual: f64,
    pub area_f: f64,
    pub volume_f: f64,
}

/// First-variation residual of the weighted isoperimetric functional
/// |∂G|_f^d / |G|_f^{d−1}.  A boundary whose H_f spread exceeds
/// `CMC_SPREAD_FACTOR × tolerance` is refused as not a constant-H_f
/// candidate.
pub fn criticality_residual(
    grid: &QuadratureGrid,
    weighted_volume: f64,
    d: f64,
    tolerance: f64,
) -> Result<CriticalityReport> {
    if !(d > 1.0) {
        return Err(Error::InvalidConfig(format!(
            "isoperimetric dimension d = {d} must exceed 1"
        )));
    }
    if !(weighted_volume > 0.0) {
        return Err(Error::Domain(format!(
            "enclosed weighted volume {weighted_volume} must be positive"
        )));
    }
    let area_f = weighted_area(grid);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let terms: Vec<f64> = grid
        .nodes
        .iter()
        .map(|node| {
            lo = lo.min(node.h_f);
            hi = hi.max(node.h_f);
            node.dsigma() * (-node.f).exp() * node.h_f
        })
        .collect();
    let spread = hi - lo;
    if spread > CMC_SPREAD_FACTOR * tolerance {
        return Err(Error::HypothesesUnmet {
            check: "constant weighted mean curvature".into(),
            detail: format!(
                "H_f spread {spread:.3e} exceeds {CMC_SPREAD_FACTOR} × tolerance {tolerance:.1e}"
            ),
        });
    }
    let mean_h_f = pairwise_sum(&terms) / area_f;
    let residual = mean_h_f / (d - 1.0) - area_f / (d * weighted_volume);
    Ok(CriticalityReport { d, mean_h_f, h_f_spread: spread, residual, area_f, volume_f: weighted_volume })
}

/// Outcome of a bracketed search for a critical radius.
#[derive(Debug, Clone, Copy)]
pub enum BisectionOutcome {
    Root { radius: f64, residual: f64, iterations: usize },
    /// The residual has the same sign at both bracket ends; no critical
    /// radius is certified inside the bracket.
    NoSignChange { lo: f64, hi: f64, residual_lo: f64, residual_hi: f64 },
}

/// Bisect `residual` over [lo, hi] until |residual| < target.  A bracket
/// whose endpoint residuals share a sign is reported as `NoSignChange`
/// rather than forced to a root.
pub fn bisect_critical_radius<F>(
    mut residual: F,
    lo: f64,
    hi: f64,
    target: f64,
) -> Result<BisectionOutcome>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo < hi) || !(target > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "bisection needs lo < hi and a positive target (got [{lo}, {hi}], {target})"
        )));
    }
    let f_lo = residual(lo)?;
    let f_hi = residual(hi)?;
    if f_lo.abs() < target {
        return Ok(BisectionOutcome::Root { radius: lo, residual: f_lo, iterations: 0 });
    }
    if f_hi.abs() < target {
        return Ok(BisectionOutcome::Root { radius: hi, residual: f_hi, iterations: 0 });
    }
    if f_lo.signum() == f_hi.signum() {
        return Ok(BisectionOutcome::NoSignChange {
            lo,
            hi,
            residual_lo: f_lo,
            residual_hi: f_hi,
        });
    }
    let (mut a, mut fa, mut b) = (lo, f_lo, hi);
    for iter in 1..=200 {
        let mid = 0.5 * (a + b);
        let fm = residual(mid)?;
        if fm.abs() < target {
            return Ok(BisectionOutcome::Root { radius: mid, residual: fm, iterations: iter });
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
        if b - a < 1e-13 * hi.max(1.0) {
            return Err(Error::Numerical(format!(
                "bisection bracket collapsed at {mid:.12} with residual {fm:.3e} above target {target:.1e}"
            )));
        }
    }
    Err(Error::Numerical("bisection failed to converge in 200 iterations".into()))
}

// ----- verification ---------------------------------------------------------

/// Identifiers of the verified statements (stable CLI/report tokens).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TheoremId {
    /// Willmore bound, slope-bounded weight: LHS(variant A) ≥ RV_f·|𝕊^{n−1}|.
    #[serde(rename = "thm12a")]
    Thm12a,
    /// Willmore bound, magnitude-bounded weight: LHS(variant B) ≥ R̄V_f·|𝕊^{n−1+4k}|.
    #[serde(rename = "thm12b")]
    Thm12b,
    /// Synthetic-dimension Willmore bound: LHS(m) ≥ AVR_f^m·|𝕊^{m−1}|.
    #[serde(rename = "thm13")]
    Thm13,
    /// Shrinker Willmore bound: shrinker LHS ≥ AVR(g)·|𝕊^{n−1}|.
    #[serde(rename = "thm14")]
    Thm14,
    /// Heintze–Karcher, synthetic dimension: ∫1/H_f ≥ (m/(m−1))|M|_f.
    #[serde(rename = "prop25")]
    Prop25,
    /// Heintze–Karcher, weak form: ∫1/H_f ≥ |M|_f.
    #[serde(rename = "prop26")]
    Prop26,
    /// Isoperimetric bound at critical domains, slope-bounded weight.
    #[serde(rename = "thm61")]
    Thm61,
    /// Isoperimetric bound at critical domains, synthetic dimension.
    #[serde(rename = "thm62")]
    Thm62,
}

impl TheoremId {
    pub const ALL: [TheoremId; 8] = [
        TheoremId::Thm12a,
        TheoremId::Thm12b,
        TheoremId::Thm13,
        TheoremId::Thm14,
        TheoremId::Prop25,
        TheoremId::Prop26,
        TheoremId::Thm61,
        TheoremId::Thm62,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            TheoremId::Thm12a => "thm12a",
            TheoremId::Thm12b => "thm12b",
            TheoremId::Thm13 => "thm13",
            TheoremId::Thm14 => "thm14",
            TheoremId::Prop25 => "prop25",
            TheoremId::Prop26 => "prop26",
            TheoremId::Thm61 => "thm61",
            TheoremId::Thm62 => "thm62",
        }
    }

    pub fn parse(s: &str) -> Option<TheoremId> {
        TheoremId::ALL.iter().copied().find(|t| t.id() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "holds")]
    Holds,
    #[serde(rename = "equality")]
    Equality,
    #[serde(rename = "violated")]
    Violated,
    #[serde(rename = "hypotheses-unmet")]
    HypothesesUnmet,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridsInfo {
    pub n: usize,
    pub resolution: usize,
    pub radial_resolution: usize,
    pub curvature_points: usize,
    pub ray_samples: usize,
}

/// Full outcome of one verification run.  Serializes deterministically; the
/// raw volume series is carried for CSV export but not serialized.
#[derive(Debug, Clone, Serialize)]
pub struct FunctionalReport {
    pub theorem: String,
    pub verdict: Verdict,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub slack: Option<f64>,
    /// Absolute equality threshold used for the verdict.
    pub tolerance: f64,
    /// Extrapolation error estimate propagated into the RHS.
    pub rhs_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    pub hypothesis_checks: Vec<HypothesisCheck>,
    pub diagnostics: BTreeMap<String, f64>,
    pub grids: GridsInfo,
    pub volume_series_ref: Option<String>,
    #[serde(skip)]
    pub series: Option<VolumeSeries>,
}

impl FunctionalReport {
    pub fn all_hypotheses_passed(&self) -> bool {
        self.hypothesis_checks.iter().all(|c| c.passed)
    }
}

/// Everything `verify` needs beyond the theorem id.  The ray-hypothesis
/// constants come from `ambient.weight` (`bound_a`, `bound_k`) and the
/// synthetic dimension from `ambient.m_synthetic`.
pub struct VerifyInput<'a> {
    pub ambient: &'a WeightedAmbient,
    pub hyp: &'a Hypersurface,
    pub grid: &'a QuadratureGrid,
    /// Strictly increasing tube radii for the asymptotic volume ratio.
    pub schedule: Vec<f64>,
    pub radial_resolution: usize,
    /// Quadrature-honesty scale; constant-H_f gating is 100× this.
    pub tolerance: f64,
    /// Relative equality-detection tolerance.
    pub eq_tol: f64,
    /// Sample count per ray for the weight-bound hypotheses.
    pub ray_samples: usize,
    /// Lattice points per axis for the curvature-condition grid.
    pub curvature_per_axis: usize,
}

impl<'a> VerifyInput<'a> {
    pub fn new(
        ambient: &'a WeightedAmbient,
        hyp: &'a Hypersurface,
        grid: &'a QuadratureGrid,
    ) -> Self {
        VerifyInput {
            ambient,
            hyp,
            grid,
            schedule: geometric_schedule(10.0, 2.0, 7),
            radial_resolution: 48,
            tolerance: DEFAULT_TOLERANCE,
            eq_tol: DEFAULT_EQ_TOL,
            ray_samples: 96,
            curvature_per_axis: 4,
        }
    }
}

/// Pointwise weight checks along outward normal rays.
enum RayBound {
    /// ∂_r f ≥ −a.
    SlopeAtLeast(f64),
    /// |f| ≤ k.
    MagnitudeAtMost(f64),
}

fn ray_weight_check(
    ambient: &WeightedAmbient,
    hyp: &Hypersurface,
    grid: &QuadratureGrid,
    bound: &RayBound,
    r_far: f64,
    samples: usize,
) -> Result<(bool, String)> {
    let samples = samples.max(2);
    // Worst margin over all sampled points: nonnegative means satisfied.
    let mut margin = f64::INFINITY;
    if grid.warped {
        let r0 = match &hyp.kind {
            SurfaceKind::CoordinateSphere { r0 } => *r0,
            _ => {
                return Err(Error::Unsupported(
                    "warped grid without a coordinate-sphere hypersurface".into(),
                ))
            }
        };
        for j in 0..=samples {
            let r = r0 + r_far * j as f64 / samples as f64;
            let (f, d1, _) = ambient.weight.radial_profile(r).ok_or_else(|| {
                Error::Unsupported("weight kind has no radial profile in this model".into())
            })?;
            margin = margin.min(match bound {
                RayBound::SlopeAtLeast(neg_a) => d1 - neg_a,
                RayBound::MagnitudeAtMost(k) => k - f.abs(),
            });
        }
    } else {
        for node in &grid.nodes {
            for j in 0..=samples {
                let s = r_far * j as f64 / samples as f64;
                let x = &node.x + &node.nu * s;
                margin = margin.min(match bound {
                    RayBound::SlopeAtLeast(neg_a) => {
                        ambient.weight_gradient_cartesian(&x)?.dot(&node.nu) - neg_a
                    }
                    RayBound::MagnitudeAtMost(k) => {
                        k - ambient.weight_value_cartesian(&x)?.abs()
                    }
                });
            }
        }
    }
    let (name, passed) = match bound {
        RayBound::SlopeAtLeast(neg_a) => (
            format!("ray slope: min(∂_r f + {:.3}) = {margin:.3e}", -neg_a),
            margin >= -HYP_SLACK,
        ),
        RayBound::MagnitudeAtMost(k) => (
            format!("ray magnitude: min({k:.3} − |f|) = {margin:.3e}"),
            margin >= -HYP_SLACK,
        ),
    };
    Ok((passed, format!("{name} over rays to R = {r_far:.1}")))
}

fn iso_rhs(d: f64, limit: f64, volume_f: f64) -> f64 {
    let lc = limit.max(0.0);
    d * ball_measure(d).powf(1.0 / d)
        * lc.powf(1.0 / d)
        * volume_f.powf((d - 1.0) / d)
}

/// Verify one statement on one configured scene.  All hypothesis checks run
/// before any functional is evaluated; a failed check yields a
/// `hypotheses-unmet` report with no LHS/RHS values.
pub fn verify(input: &VerifyInput, theorem: TheoremId) -> Result<FunctionalReport> {
    let ambient = input.ambient;
    let grid = input.grid;
    let hyp = input.hyp;
    let n = ambient.n;
    let nf = n as f64;
    if grid.n != n {
        return Err(Error::InvalidConfig(format!(
            "grid dimension {} does not match ambient dimension {n}",
            grid.n
        )));
    }
    if input.schedule.is_empty() {
        return Err(Error::InvalidConfig("empty tube-radius schedule".into()));
    }
    let r_far = *input.schedule.last().unwrap();
    let needs_m = matches!(theorem, TheoremId::Thm13 | TheoremId::Thm62 | TheoremId::Prop25);
    let m = if needs_m { ambient.m_synthetic.unwrap_or(nf) } else { nf };
    if needs_m && !(m > 1.0) {
        return Err(Error::InvalidConfig(format!(
            "synthetic dimension m = {m} must exceed 1"
        )));
    }

    let mut checks: Vec<HypothesisCheck> = Vec::new();
    let mut diags: BTreeMap<String, f64> = BTreeMap::new();

    let area_f = weighted_area(grid);
    diags.insert("area_f".into(), area_f);
    let (idx_hf, min_hf) = worst_node(grid, |v| v);
    let min_h = grid.nodes.iter().map(|v| v.mean_h).fold(f64::INFINITY, f64::min);
    diags.insert("h_f_min".into(), min_hf);

    let body_r = match &hyp.kind {
        SurfaceKind::RadialGraph { center, .. } => grid
            .nodes
            .iter()
            .map(|node| (&node.x - center).norm() + center.norm())
            .fold(0.0_f64, f64::max),
        SurfaceKind::CoordinateSphere { r0 } => *r0,
    };

    // 1. Curvature condition over a deterministic ambient sample grid.  The
    // global statements need it on the whole tube domain; the compact
    // Heintze–Karcher forms only on the enclosed body.
    let condition = match theorem {
        TheoremId::Thm12a | TheoremId::Thm12b | TheoremId::Prop26 | TheoremId::Thm61 => {
            CurvatureCondition::RicfNonneg
        }
        TheoremId::Thm13 | TheoremId::Thm62 | TheoremId::Prop25 => {
            CurvatureCondition::RicfmNonneg { m }
        }
        TheoremId::Thm14 => CurvatureCondition::ShrinkerHalf,
    };
    let extent = match theorem {
        TheoremId::Prop25 | TheoremId::Prop26 => body_r,
        _ => body_r + r_far,
    };
    let points = ambient.sample_grid(extent, input.curvature_per_axis);
    let curvature_points = points.len();
    let cond_report = ambient.check_curvature_condition(&points, condition)?;
    diags.insert("curvature_min_eig".into(), cond_report.min_eigenvalue);
    let cond_detail = match (cond_report.max_ric_deviation, cond_report.max_aux_deviation) {
        (Some(ric), Some(aux)) => {
            diags.insert("shrinker_max_ric_deviation".into(), ric);
            diags.insert("shrinker_max_aux_deviation".into(), aux);
            format!(
                "{} points: max |Ric_f − g/2| = {ric:.3e}, max |R + |∇f|² − f| = {aux:.3e}",
                cond_report.points_checked
            )
        }
        _ => format!(
            "{} points: min eigenvalue {:.3e}",
            cond_report.points_checked, cond_report.min_eigenvalue
        ),
    };
    checks.push(HypothesisCheck {
        name: cond_report.condition.clone(),
        passed: cond_report.satisfied,
        detail: cond_detail,
    });

    // 2. Boundary curvature sign.
    match theorem {
        TheoremId::Thm12a | TheoremId::Thm12b | TheoremId::Thm61 => {
            checks.push(HypothesisCheck {
                name: "H_f >= 0".into(),
                passed: min_hf >= -HYP_SLACK,
                detail: format!(
                    "min H_f = {min_hf:.6} at node {idx_hf} (angles {:?})",
                    grid.nodes[idx_hf].phi
                ),
            });
        }
        TheoremId::Prop25 | TheoremId::Prop26 => {
            checks.push(HypothesisCheck {
                name: "H_f > 0".into(),
                passed: min_hf > 0.0,
                detail: format!(
                    "min H_f = {min_hf:.6} at node {idx_hf} (angles {:?})",
                    grid.nodes[idx_hf].phi
                ),
            });
        }
        TheoremId::Thm14 => {
            diags.insert("h_min".into(), min_h);
            checks.push(HypothesisCheck {
                name: "H > 0".into(),
                passed: min_h > 0.0,
                detail: format!("min H = {min_h:.6}"),
            });
        }
        TheoremId::Thm13 | TheoremId::Thm62 => {}
    }

    // 3. Weight bounds along outward rays.
    match theorem {
        TheoremId::Thm12a | TheoremId::Thm61 => {
            let a = ambient.weight.bound_a.unwrap_or(0.0);
            if !(a >= 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "slope bound a = {a} must be nonnegative"
                )));
            }
            diags.insert("bound_a".into(), a);
            let (passed, detail) = ray_weight_check(
                ambient,
                hyp,
                grid,
                &RayBound::SlopeAtLeast(-a),
                r_far,
                input.ray_samples,
            )?;
            checks.push(HypothesisCheck { name: "ray weight slope".into(), passed, detail });
        }
        TheoremId::Thm12b => {
            let k = ambient.weight.bound_k.ok_or_else(|| {
                Error::InvalidConfig(
                    "magnitude-bounded variant needs weight.bound_k".into(),
                )
            })?;
            if !(k >= 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "magnitude bound k = {k} must be nonnegative"
                )));
            }
            diags.insert("bound_k".into(), k);
            let (passed, detail) = ray_weight_check(
                ambient,
                hyp,
                grid,
                &RayBound::MagnitudeAtMost(k),
                r_far,
                input.ray_samples,
            )?;
            checks.push(HypothesisCheck { name: "ray weight magnitude".into(), passed, detail });
        }
        _ => {}
    }

    // 4. Enclosed weighted volume and isoperimetric criticality.
    let needs_volume = matches!(
        theorem,
        TheoremId::Prop25 | TheoremId::Prop26 | TheoremId::Thm61 | TheoremId::Thm62
    );
    let mut volume_f = f64::NAN;
    if needs_volume {
        volume_f = weighted_enclosed_volume(hyp, ambient, grid, input.radial_resolution)?;
        diags.insert("volume_f".into(), volume_f);
    }
    if matches!(theorem, TheoremId::Thm61 | TheoremId::Thm62) {
        let d = if theorem == TheoremId::Thm62 { m } else { nf };
        match criticality_residual(grid, volume_f, d, input.tolerance) {
            Ok(report) => {
                diags.insert("criticality_residual".into(), report.residual);
                diags.insert("mean_h_f".into(), report.mean_h_f);
                diags.insert("h_f_spread".into(), report.h_f_spread);
                checks.push(HypothesisCheck {
                    name: "constant weighted mean curvature".into(),
                    passed: true,
                    detail: format!("H_f spread {:.3e}", report.h_f_spread),
                });
                checks.push(HypothesisCheck {
                    name: "isoperimetric criticality".into(),
                    passed: report.residual.abs() <= CRITICALITY_TOL,
                    detail: format!(
                        "residual {:.3e} with d = {d} (tolerance {CRITICALITY_TOL:.1e})",
                        report.residual
                    ),
                });
            }
            Err(Error::HypothesesUnmet { check, detail }) => {
                checks.push(HypothesisCheck { name: check, passed: false, detail });
                checks.push(HypothesisCheck {
                    name: "isoperimetric criticality".into(),
                    passed: false,
                    detail: "not evaluated (H_f not constant)".into(),
                });
            }
            Err(e) => return Err(e),
        }
    }

    let grids_info = GridsInfo {
        n,
        resolution: grid.resolution,
        radial_resolution: input.radial_resolution,
        curvature_points,
        ray_samples: input.ray_samples,
    };

    if !checks.iter().all(|c| c.passed) {
        return Ok(FunctionalReport {
            theorem: theorem.id().into(),
            verdict: Verdict::HypothesesUnmet,
            lhs: None,
            rhs: None,
            slack: None,
            tolerance: input.eq_tol,
            rhs_error: 0.0,
            r0: None,
            hypothesis_checks: checks,
            diagnostics: diags,
            grids: grids_info,
            volume_series_ref: None,
            series: None,
        });
    }

    // 5. LHS functional.
    let lhs = match theorem {
        TheoremId::Thm12a => willmore_f(grid, WillmoreVariant::A)?,
        TheoremId::Thm12b => {
            let k = ambient.weight.bound_k.unwrap();
            willmore_f(grid, WillmoreVariant::B { k })?
        }
        TheoremId::Thm13 => willmore_m(grid, m)?,
        TheoremId::Thm14 => {
            let sw = willmore_shrinker(grid)?;
            diags.insert("shrinker_max_abs_exponent".into(), sw.max_abs_exponent);
            sw.value
        }
        TheoremId::Prop25 | TheoremId::Prop26 => {
            let mode = if theorem == TheoremId::Prop25 { HkMode::M(m) } else { HkMode::F };
            heintze_karcher(grid, mode, volume_f)?.lhs
        }
        TheoremId::Thm61 | TheoremId::Thm62 => area_f,
    };

    // 6. RHS: asymptotic volume ratio times the matching sphere measure, or
    // the enclosed weighted volume for the Heintze–Karcher forms.
    let mut series: Option<VolumeSeries> = None;
    let mut series_ref: Option<String> = None;
    let (rhs, rhs_error) = match theorem {
        TheoremId::Prop25 => (m / (m - 1.0) * volume_f, 0.0),
        TheoremId::Prop26 => (volume_f, 0.0),
        TheoremId::Thm14 => {
            // The RHS ratio is against the unweighted metric volume, so the
            // tube is re-evaluated with the zero weight.  Scene schedules are
            // capped only to keep the *weighted* integrand from underflowing;
            // no such cap binds here, so the unweighted ratio always runs to
            // the default far field, where the tail fit is accurate.
            let ambient0 = WeightedAmbient {
                n,
                model: ambient.model.clone(),
                weight: WeightFunction::new(WeightKind::Zero),
                m_synthetic: None,
            };
            let schedule0 = geometric_schedule(10.0, 2.0, 7);
            let r_far0 = *schedule0.last().unwrap();
            let grid0 = build_quadrature(hyp, &ambient0, grid.resolution)?;
            let eval =
                TubeEvaluator::new(hyp, &ambient0, &grid0, input.radial_resolution, r_far0)?;
            let s = ratio_series_from(
                NormalizerKind::PowerLaw { dim: nf },
                n,
                &schedule0,
                |r| eval.tube_volume(r),
            )?;
            let mult = sphere_measure(nf);
            let out = (s.limit.max(0.0) * mult, s.fit_error * mult);
            series_ref = Some("avr_g".into());
            series = Some(s);
            out
        }
        _ => {
            let (kind, refname, mult_dim) = match theorem {
                TheoremId::Thm12a | TheoremId::Thm61 => {
                    let a = ambient.weight.bound_a.unwrap_or(0.0);
                    (NormalizerKind::ModelA { a }, "rv_f", nf)
                }
                TheoremId::Thm12b => {
                    let k = ambient.weight.bound_k.unwrap();
                    (NormalizerKind::PowerLaw { dim: nf + 4.0 * k }, "rvbar_f", nf + 4.0 * k)
                }
                TheoremId::Thm13 | TheoremId::Thm62 => {
                    (NormalizerKind::PowerLaw { dim: m }, "avr_f_m", m)
                }
                _ => unreachable!(),
            };
            let eval = TubeEvaluator::new(hyp, ambient, grid, input.radial_resolution, r_far)?;
            let s = ratio_series_from(kind, n, &input.schedule, |r| eval.tube_volume(r))?;
            let out = match theorem {
                TheoremId::Thm61 | TheoremId::Thm62 => {
                    let d = if theorem == TheoremId::Thm62 { m } else { nf };
                    let rhs = iso_rhs(d, s.limit, volume_f);
                    let err = (iso_rhs(d, s.limit + s.fit_error, volume_f) - rhs)
                        .abs()
                        .max((iso_rhs(d, s.limit - s.fit_error, volume_f) - rhs).abs());
                    (rhs, err)
                }
                _ => {
                    let mult = sphere_measure(mult_dim);
                    (s.limit.max(0.0) * mult, s.fit_error * mult)
                }
            };
            series_ref = Some(refname.into());
            series = Some(s);
            out
        }
    };
    if let Some(s) = &series {
        diags.insert("series_limit".into(), s.limit);
        diags.insert("series_fit_error".into(), s.fit_error);
        let converged = matches!(s.verdict, SeriesVerdict::Converged);
        checks.push(HypothesisCheck {
            name: "volume ratio convergence".into(),
            passed: converged,
            detail: match &s.verdict {
                SeriesVerdict::Converged => {
                    format!("limit {:.6e} ± {:.1e}", s.limit, s.fit_error)
                }
                SeriesVerdict::NoConvergence(why) => why.clone(),
            },
        });
        if !converged {
            return Ok(FunctionalReport {
                theorem: theorem.id().into(),
                verdict: Verdict::HypothesesUnmet,
                lhs: Some(lhs),
                rhs: None,
                slack: None,
                tolerance: input.eq_tol,
                rhs_error: 0.0,
                r0: None,
                hypothesis_checks: checks,
                diagnostics: diags,
                grids: grids_info,
                volume_series_ref: series_ref,
                series,
            });
        }
    }

    // 7. Verdict.  `violated` needs the slack to clear both the equality
    // band and the RHS extrapolation error.
    let slack = lhs - rhs;
    let tol_abs = input.eq_tol * lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
    let verdict = if slack < -(tol_abs + rhs_error) {
        Verdict::Violated
    } else if slack.abs() <= tol_abs + rhs_error {
        Verdict::Equality
    } else {
        Verdict::Holds
    };

    // Model radius of the exterior warped product in the equality case.
    let r0 = if verdict == Verdict::Equality {
        let (limit, dim, power) = match theorem {
            TheoremId::Thm12a | TheoremId::Thm12b | TheoremId::Thm61 => {
                (series.as_ref().map(|s| s.limit), nf, nf - 1.0)
            }
            TheoremId::Thm13 | TheoremId::Thm62 => {
                (series.as_ref().map(|s| s.limit), m, m - 1.0)
            }
            _ => (None, nf, nf - 1.0),
        };
        limit.and_then(|l| {
            let denom = l.max(0.0) * sphere_measure(dim);
            (denom > 0.0).then(|| (area_f / denom).powf(1.0 / power))
        })
    } else {
        None
    };

    Ok(FunctionalReport {
        theorem: theorem.id().into(),
        verdict,
        lhs: Some(lhs),
        rhs: Some(rhs),
        slack: Some(slack),
        tolerance: tol_abs,
        rhs_error,
        r0,
        hypothesis_checks: checks,
        diagnostics: diags,
        grids: grids_info,
        volume_series_ref: series_ref,
        series,
    })
}

// ----- tests ----------------------------------------------------------------
