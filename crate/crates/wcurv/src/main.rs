//! Command-line interface: scene ingestion, command dispatch, report
//! emission.
//!
//! Exit codes: 0 when every verdict is `holds` or `equality`, 1 when any
//! verdict is `violated`, 2 on unmet hypotheses or configuration/schema
//! errors.  Reports are JSON on stdout (or `--out`), embed the fully
//! resolved scene, and are byte-identical across runs for a fixed scene and
//! seed.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use wcurv::ambient::{CurvatureCondition, Point, WeightKind, WeightedAmbient};
use wcurv::comparison::{
    curve_csv, cut_clip, flow_normal_ray, lemma_bound, shrinker_k_series, theta_series,
    BoundVariant, ComparisonCurve, RayDirection, ThetaVerdict,
};
use wcurv::error::{Error, Result};
use wcurv::functionals::{verify, TheoremId, Verdict, VerifyInput};
use wcurv::hypersurface::{build_quadrature, Hypersurface, QuadratureGrid, SurfaceKind};
use wcurv::reilly::{
    hk_chain_check, poisson_residual, reilly_residual, solve_radial_poisson, ChainReport,
    RadialSolution, ReillyTerms,
};
use wcurv::scene::{load_scene, Scene, SurfaceSpec, SCHEMA_VERSION};
use wcurv::volume::{
    mc_cross_check, ratio_series_from, series_csv, NormalizerKind, SeriesVerdict, TubeEvaluator,
    VolumeSeries,
};

#[derive(Parser)]
#[command(
    name = "wcurv",
    version,
    about = "Verify curvature inequalities of closed hypersurfaces in weighted model spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify one catalog inequality (or `all` the scene selects) on a scene.
    Verify {
        /// Theorem id (thm12a, thm12b, thm13, thm14, prop25, prop26, thm61,
        /// thm62) or `all` for the scene's selections.
        theorem: String,
        #[command(flatten)]
        common: Common,
    },
    /// Tube-volume series and normalized volume-ratio limits.
    TubeVolume {
        #[command(flatten)]
        common: Common,
    },
    /// Normal-ray area-element comparison: bounds and monotone quantities.
    Comparison {
        #[command(flatten)]
        common: Common,
    },
    /// Radial Dirichlet solve, integral-identity terms, derivation chain.
    Reilly {
        #[command(flatten)]
        common: Common,
    },
    /// Scene catalog utilities.
    Scene {
        #[command(subcommand)]
        action: SceneAction,
    },
}

#[derive(Subcommand)]
enum SceneAction {
    /// List the scenes shipped inside the binary.
    List,
    /// Validate a scene file and echo it with all defaults filled.
    Validate {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Scene file path or catalog scene name.
    #[arg(long)]
    scene: Option<String>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write per-series/per-ray CSV files into this directory.
    #[arg(long)]
    csv_dir: Option<PathBuf>,
    /// Worker threads (default: hardware parallelism).
    #[arg(long)]
    threads: Option<usize>,
    /// Override the scene's quadrature/ODE honesty tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Override the scene's Monte-Carlo seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Verify { theorem, common } => {
            init_threads(&common);
            cmd_verify(&theorem, &common)
        }
        Command::TubeVolume { common } => {
            init_threads(&common);
            cmd_tube_volume(&common)
        }
        Command::Comparison { common } => {
            init_threads(&common);
            cmd_comparison(&common)
        }
        Command::Reilly { common } => {
            init_threads(&common);
            cmd_reilly(&common)
        }
        Command::Scene { action } => match action {
            SceneAction::List => cmd_scene_list(),
            SceneAction::Validate { common } => cmd_scene_validate(&common),
        },
    }
}

fn init_threads(common: &Common) {
    if let Some(n) = common.threads {
        // Ignore the error when a global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn load_with_overrides(common: &Common) -> Result<Scene> {
    let arg = common.scene.as_deref().ok_or_else(|| {
        Error::InvalidConfig("--scene is required for this command".into())
    })?;
    let mut scene = load_scene(arg)?;
    if let Some(t) = common.tolerance {
        scene.numerics.tolerance = t;
    }
    if let Some(s) = common.seed {
        scene.numerics.seed = s;
    }
    // Overrides go through the same range validation as file contents.
    scene.validate()?;
    Ok(scene)
}

/// Report wrapper shared by all commands: version, command, resolved scene.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    scene: &'a Scene,
    #[serde(flatten)]
    body: T,
}

fn emit<T: Serialize>(common: &Common, command: &str, scene: &Scene, body: T) -> Result<()> {
    let envelope = Envelope { schema_version: SCHEMA_VERSION, command, scene, body };
    let mut text = serde_json::to_string_pretty(&envelope)?;
    text.push('\n');
    match &common.out {
        Some(path) => write_file(path, &text)?,
        None => write_stdout(&text)?,
    }
    Ok(())
}

/// Write to stdout, treating a closed pipe (e.g. `wcurv scene list | head`) as a
/// normal early exit rather than a panic or error.
fn write_stdout(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    let result = out.write_all(text.as_bytes()).and_then(|_| out.flush());
    match result {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => std::process::exit(0),
        Err(e) => Err(e.into()),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn exit_from_verdicts<I: IntoIterator<Item = Verdict>>(verdicts: I) -> u8 {
    let mut worst = 0u8;
    for v in verdicts {
        match v {
            Verdict::Violated => return 1,
            Verdict::HypothesesUnmet => worst = worst.max(2),
            Verdict::Holds | Verdict::Equality => {}
        }
    }
    worst
}

// ----- verify ---------------------------------------------------------------

#[derive(Serialize)]
struct VerifyBody<'a> {
    reports: &'a [wcurv::functionals::FunctionalReport],
}

fn cmd_verify(theorem: &str, common: &Common) -> Result<u8> {
    let scene = load_with_overrides(common)?;
    let theorems: Vec<TheoremId> = if theorem == "all" {
        scene.theorem_ids()
    } else {
        vec![TheoremId::parse(theorem).ok_or_else(|| {
            Error::InvalidConfig(format!(
                "unknown theorem id `{theorem}`; known ids: {} or `all`",
                TheoremId::ALL
                    .iter()
                    .map(|t| t.id())
                    .collect::<Vec<_>>()
                    .join(", ")
            ))
        })?]
    };
    let (ambient, hyp) = scene.resolve()?;
    let grid = build_quadrature(&hyp, &ambient, scene.numerics.grid_resolution)?;
    let mut input = VerifyInput::new(&ambient, &hyp, &grid);
    input.schedule = scene.numerics.schedule.radii();
    input.radial_resolution = scene.numerics.radial_resolution;
    input.tolerance = scene.numerics.tolerance;
    input.eq_tol = scene.numerics.eq_tol;
    input.ray_samples = scene.numerics.ray_samples;
    input.curvature_per_axis = scene.numerics.curvature_per_axis;

    let mut reports = Vec::new();
    for thm in &theorems {
        reports.push(verify(&input, *thm)?);
    }
    if let Some(dir) = &common.csv_dir {
        for report in &reports {
            if let (Some(series), Some(refid)) = (&report.series, &report.volume_series_ref) {
                let path = dir.join(format!("{}-{}-{}.csv", scene.name, report.theorem, refid));
                write_file(&path, &series_csv(series))?;
            }
        }
    }
    let code = exit_from_verdicts(reports.iter().map(|r| r.verdict));
    emit(common, "verify", &scene, VerifyBody { reports: &reports })?;
    Ok(code)
}

// ----- tube-volume ----------------------------------------------------------

#[derive(Serialize)]
struct SeriesEntry {
    id: String,
    series: VolumeSeries,
}

#[derive(Serialize)]
struct McBody {
    radius: f64,
    quadrature: f64,
    estimate: f64,
    std_error: f64,
    samples: u64,
    seed: u64,
    /// |quadrature − estimate| in standard errors.
    sigma_distance: f64,
}

#[derive(Serialize)]
struct TubeBody {
    interior_volume_f: f64,
    series: Vec<SeriesEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mc: Option<McBody>,
}

fn cmd_tube_volume(common: &Common) -> Result<u8> {
    let scene = load_with_overrides(common)?;
    let (ambient, hyp) = scene.resolve()?;
    let grid = build_quadrature(&hyp, &ambient, scene.numerics.grid_resolution)?;
    let schedule = scene.numerics.schedule.radii();
    let r_max = *schedule.last().unwrap();
    let evaluator =
        TubeEvaluator::new(&hyp, &ambient, &grid, scene.numerics.radial_resolution, r_max)?;

    let mut requested: Vec<(String, NormalizerKind)> = Vec::new();
    let a = scene.ambient.bound_a.unwrap_or(0.0);
    requested.push(("rv_f".into(), NormalizerKind::ModelA { a }));
    if let Some(k) = scene.ambient.bound_k {
        let dim = ambient.n as f64 + 4.0 * k;
        requested.push(("rvbar_f".into(), NormalizerKind::PowerLaw { dim }));
    }
    if let Some(m) = scene.ambient.m {
        requested.push(("avr_f_m".into(), NormalizerKind::PowerLaw { dim: m }));
    }
    let mut series = Vec::new();
    for (id, kind) in requested {
        let s = ratio_series_from(kind, ambient.n, &schedule, |r| evaluator.tube_volume(r))?;
        series.push(SeriesEntry { id, series: s });
    }
    if let Some(dir) = &common.csv_dir {
        for entry in &series {
            let path = dir.join(format!("{}-{}.csv", scene.name, entry.id));
            write_file(&path, &series_csv(&entry.series))?;
        }
    }
    let mc = match mc_cross_check(
        &hyp,
        &ambient,
        schedule[0],
        scene.numerics.mc_samples,
        scene.numerics.seed,
    ) {
        Ok(est) => {
            let quadrature = evaluator.tube_volume(schedule[0])?;
            let sigma_distance = (quadrature - est.value).abs() / est.std_error.max(f64::MIN_POSITIVE);
            Some(McBody {
                radius: schedule[0],
                quadrature,
                estimate: est.value,
                std_error: est.std_error,
                samples: est.samples,
                seed: est.seed,
                sigma_distance,
            })
        }
        Err(Error::Unsupported(_)) => None,
        Err(e) => return Err(e),
    };
    let all_converged = series
        .iter()
        .all(|e| e.series.verdict == SeriesVerdict::Converged);
    let body = TubeBody { interior_volume_f: evaluator.interior, series, mc };
    emit(common, "tube-volume", &scene, body)?;
    Ok(if all_converged { 0 } else { 2 })
}

// ----- comparison -----------------------------------------------------------

#[derive(Serialize)]
struct VariantReport {
    variant: String,
    parameter: f64,
    verdict: String,
    max_forward_diff: f64,
    samples_kept: usize,
    /// max over kept samples of Δ_f r − model bound (≤ tolerance when the
    /// comparison inequality holds).
    #[serde(skip_serializing_if = "Option::is_none")]
    max_bound_excess: Option<f64>,
}

#[derive(Serialize)]
struct ShrinkerRayReport {
    c: f64,
    max_forward_diff_k: f64,
    verdict: String,
    max_voeup_slack: f64,
}

#[derive(Serialize)]
struct RayReport {
    node_index: usize,
    foot: Vec<f64>,
    h_foot: f64,
    h_f_foot: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    focal_time: Option<f64>,
    variants: Vec<VariantReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    shrinker: Option<ShrinkerRayReport>,
}

#[derive(Serialize)]
struct ComparisonBody {
    rays: Vec<RayReport>,
}

fn theta_verdict_string(v: &ThetaVerdict) -> String {
    match v {
        ThetaVerdict::NonIncreasing => "non-increasing".into(),
        ThetaVerdict::HypothesesUnmet(s) => format!("hypotheses-unmet: {s}"),
        ThetaVerdict::Violated { index, jump } => {
            format!("violated: jump {jump:.3e} at sample {index}")
        }
    }
}

fn variant_tag(v: &BoundVariant) -> (&'static str, f64) {
    match v {
        BoundVariant::A { a } => ("a", *a),
        BoundVariant::B { k } => ("b", *k),
        BoundVariant::M { m } => ("m", *m),
    }
}

fn condition_failure(
    ambient: &WeightedAmbient,
    points: &[Point],
    condition: CurvatureCondition,
) -> Result<Option<String>> {
    let report = ambient.check_curvature_condition(points, condition)?;
    Ok(if report.satisfied {
        None
    } else {
        Some(format!(
            "{} fails: min eigenvalue {:.6e}",
            report.condition, report.min_eigenvalue
        ))
    })
}

fn body_extent(grid: &QuadratureGrid, hyp: &Hypersurface) -> f64 {
    match &hyp.kind {
        SurfaceKind::CoordinateSphere { r0 } => *r0,
        SurfaceKind::RadialGraph { .. } => grid
            .nodes
            .iter()
            .map(|n| n.x.norm())
            .fold(0.0, f64::max),
    }
}

fn cmd_comparison(common: &Common) -> Result<u8> {
    let scene = load_with_overrides(common)?;
    let (ambient, hyp) = scene.resolve()?;
    let grid = build_quadrature(&hyp, &ambient, scene.numerics.grid_resolution)?;
    let nu = &scene.numerics;

    let mut variants: Vec<BoundVariant> = Vec::new();
    variants.push(BoundVariant::A { a: scene.ambient.bound_a.unwrap_or(0.0) });
    if let Some(k) = scene.ambient.bound_k {
        variants.push(BoundVariant::B { k });
    }
    if let Some(m) = scene.ambient.m {
        variants.push(BoundVariant::M { m });
    } else if ambient.weight.is_constant() {
        variants.push(BoundVariant::M { m: ambient.n as f64 });
    }

    let extent = body_extent(&grid, &hyp) + nu.ray_extent;
    let points = ambient.sample_grid(extent, nu.curvature_per_axis);
    let ricf_failure = condition_failure(&ambient, &points, CurvatureCondition::RicfNonneg)?;
    let mut ricfm_failure = None;
    if let Some(m) = scene.ambient.m {
        ricfm_failure =
            condition_failure(&ambient, &points, CurvatureCondition::RicfmNonneg { m })?;
    }
    let shrinker_scene = matches!(
        (&ambient.weight.kind, &ambient.model),
        (WeightKind::Gaussian { lambda }, wcurv::ambient::MetricModel::Flat) if *lambda == 0.25
    );
    let shrinker_ok = shrinker_scene
        && condition_failure(&ambient, &points, CurvatureCondition::ShrinkerHalf)?.is_none();

    let count = nu.ray_count.min(grid.nodes.len());
    let mut rays = Vec::with_capacity(count);
    let mut any_violated = false;
    let mut any_unmet = false;
    for j in 0..count {
        let idx = j * grid.nodes.len() / count;
        let node = &grid.nodes[idx];
        let mut curve =
            flow_normal_ray(&hyp, &ambient, node, RayDirection::Outward, nu.ray_extent, nu.ray_steps)?;
        cut_clip(&hyp, &mut curve)?;

        let mut variant_reports = Vec::new();
        for variant in &variants {
            let failure = match variant {
                BoundVariant::M { .. } => ricfm_failure.clone().or_else(|| ricf_failure.clone()),
                _ => ricf_failure.clone(),
            };
            let theta = theta_series(&curve, *variant, failure);
            match &theta.verdict {
                ThetaVerdict::Violated { .. } => any_violated = true,
                ThetaVerdict::HypothesesUnmet(_) => any_unmet = true,
                ThetaVerdict::NonIncreasing => {}
            }
            let (tag, parameter) = variant_tag(variant);
            variant_reports.push(VariantReport {
                variant: tag.into(),
                parameter,
                verdict: theta_verdict_string(&theta.verdict),
                max_forward_diff: theta.max_forward_diff,
                samples_kept: theta.values.len(),
                max_bound_excess: bound_excess(&curve, *variant, ambient.n),
            });
        }
        let shrinker = if shrinker_ok {
            let series = shrinker_k_series(&curve)?;
            match &series.verdict {
                ThetaVerdict::Violated { .. } => any_violated = true,
                ThetaVerdict::HypothesesUnmet(_) => any_unmet = true,
                ThetaVerdict::NonIncreasing => {}
            }
            let max_voeup_slack = series
                .values
                .iter()
                .map(|(_, _, _, s)| *s)
                .fold(f64::NEG_INFINITY, f64::max);
            Some(ShrinkerRayReport {
                c: series.c,
                max_forward_diff_k: series.max_forward_diff_k,
                verdict: theta_verdict_string(&series.verdict),
                max_voeup_slack,
            })
        } else {
            None
        };
        if let Some(dir) = &common.csv_dir {
            let bounds: Vec<f64> = curve
                .samples
                .iter()
                .map(|s| {
                    lemma_bound(variants[0], ambient.n, curve.h_f0, s.r).unwrap_or(f64::NAN)
                })
                .collect();
            let path = dir.join(format!("{}-ray{idx}.csv", scene.name));
            write_file(&path, &curve_csv(&curve, Some(&bounds), None, None))?;
        }
        rays.push(RayReport {
            node_index: idx,
            foot: curve.foot.iter().copied().collect(),
            h_foot: curve.h0,
            h_f_foot: curve.h_f0,
            focal_time: curve.focal_time,
            variants: variant_reports,
            shrinker,
        });
    }
    let code = if any_violated {
        1
    } else if any_unmet {
        2
    } else {
        0
    };
    emit(common, "comparison", &scene, ComparisonBody { rays })?;
    Ok(code)
}

/// Max of Δ_f r − model bound over kept positive-radius samples; None when
/// the variant's foot hypotheses reject the bound outright.
fn bound_excess(curve: &ComparisonCurve, variant: BoundVariant, n: usize) -> Option<f64> {
    let mut worst = f64::NEG_INFINITY;
    let mut seen = false;
    for s in &curve.samples {
        if s.past_focal || s.past_cut || s.r == 0.0 {
            continue;
        }
        match lemma_bound(variant, n, curve.h_f0, s.r) {
            Ok(bound) => {
                worst = worst.max(s.delta_f_r - bound);
                seen = true;
            }
            Err(_) => return None,
        }
    }
    seen.then_some(worst)
}

// ----- reilly ---------------------------------------------------------------

#[derive(Serialize)]
struct ReillyBody {
    radius: f64,
    sample_intervals: usize,
    u_center: f64,
    u_normal_derivative: f64,
    poisson_residual: f64,
    terms: ReillyTerms,
    #[serde(skip_serializing_if = "Option::is_none")]
    chain: Option<ChainReport>,
    verdict: Verdict,
}

fn radial_csv(sol: &RadialSolution) -> String {
    let mut out = String::from("r,u,du\n");
    for i in 0..sol.r.len() {
        out.push_str(&format!(
            "{:.17e},{:.17e},{:.17e}\n",
            sol.r[i], sol.u[i], sol.du[i]
        ));
    }
    out
}

fn cmd_reilly(common: &Common) -> Result<u8> {
    let scene = load_with_overrides(common)?;
    let (ambient, _) = scene.resolve()?;
    let rho = match &scene.hypersurface {
        SurfaceSpec::Sphere { radius, center } => {
            let centered = center
                .as_ref()
                .map(|c| c.iter().all(|x| *x == 0.0))
                .unwrap_or(true);
            if !centered {
                return Err(Error::Unsupported(
                    "radial identity checks need an origin-centered sphere".into(),
                ));
            }
            *radius
        }
        SurfaceSpec::CoordinateSphere { r0 } => *r0,
        _ => {
            return Err(Error::Unsupported(
                "radial identity checks need a sphere or coordinate-sphere scene".into(),
            ))
        }
    };
    let nu = &scene.numerics;
    let sol = solve_radial_poisson(&ambient, rho, nu.ode_samples)?;
    let p_res = poisson_residual(&ambient, &sol)?;
    let terms = reilly_residual(&ambient, &sol, nu.boundary_resolution)?;
    let chain_m = scene
        .ambient
        .m
        .or_else(|| ambient.weight.is_constant().then_some(ambient.n as f64));
    let chain = match chain_m {
        Some(m) => Some(hk_chain_check(&ambient, &sol, m, nu.boundary_resolution)?),
        None => None,
    };
    let identity_ok = terms.residual.abs() <= 1e-6 * terms.laplacian_sq.abs().max(1.0);
    let poisson_ok = p_res <= sol.tolerance;
    let chain_ok = chain.as_ref().map_or(true, |c| {
        let tol = |rhs: f64| 1e-8 * rhs.abs().max(1.0);
        c.flux_bound.slack >= -tol(c.flux_bound.rhs)
            && c.cauchy_schwarz.slack >= -tol(c.cauchy_schwarz.rhs)
            && c.final_bound.slack >= -tol(c.final_bound.rhs)
    });
    let verdict = if identity_ok && poisson_ok && chain_ok {
        Verdict::Holds
    } else {
        Verdict::Violated
    };
    if let Some(dir) = &common.csv_dir {
        let path = dir.join(format!("{}-radial.csv", scene.name));
        write_file(&path, &radial_csv(&sol))?;
    }
    let body = ReillyBody {
        radius: rho,
        sample_intervals: nu.ode_samples,
        u_center: sol.u[0],
        u_normal_derivative: sol.u_nu(),
        poisson_residual: p_res,
        terms,
        chain,
        verdict,
    };
    let code = exit_from_verdicts([verdict]);
    emit(common, "reilly", &scene, body)?;
    Ok(code)
}

// ----- scene ----------------------------------------------------------------

fn cmd_scene_list() -> Result<u8> {
    for (name, text) in wcurv::scene::CATALOG {
        let scene = Scene::from_json(text)?;
        let description = scene.description.as_deref().unwrap_or("");
        write_stdout(&format!("{name}: {description}\n"))?;
    }
    Ok(0)
}

fn cmd_scene_validate(common: &Common) -> Result<u8> {
    let scene = load_with_overrides(common)?;
    // Echo the resolved scene with every default filled.
    let mut text = serde_json::to_string_pretty(&scene)?;
    text.push('\n');
    match &common.out {
        Some(path) => write_file(path, &text)?,
        None => write_stdout(&text)?,
    }
    Ok(0)
}
