//! Scene files: the JSON interface naming an ambient model, a hypersurface,
//! and the numeric parameters of a verification run.
//!
//! A scene is schema-versioned, validated with JSON field paths in every
//! error, and resolved into the runtime ambient/hypersurface pair.  The
//! crate ships a catalog of scenes embedded in the binary; `--scene` accepts
//! either a file path or a catalog name.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ambient::{MetricModel, WarpProfile, WeightFunction, WeightKind, WeightedAmbient};
use crate::error::{Error, Result};
use crate::functionals::TheoremId;
use crate::hypersurface::{CosLobeProfile, EllipsoidProfile, Hypersurface, SurfaceKind};
use crate::volume::geometric_schedule;

/// The one scene-file schema version this build reads.
pub const SCHEMA_VERSION: u32 = 1;

/// Ambient model chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Euclidean space in Cartesian coordinates.
    Flat,
    /// Radial warped product with h(r) = slope · r; slope < 1 is an
    /// angle-deficit cone.
    Cone {
        slope: f64,
        #[serde(default)]
        r_min: f64,
    },
    /// S^{n-1}(fiber_radius) × [0, length].
    Cylinder { fiber_radius: f64, length: f64 },
}

fn default_lambda() -> f64 {
    0.25
}

/// Weight function of the ambient measure e^{−f} dv.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightSpec {
    Zero,
    /// f = λ r²; λ defaults to 1/4, the shrinker normalization.
    Gaussian {
        #[serde(default = "default_lambda")]
        lambda: f64,
    },
    /// f(r) = Σ coeffs[j] r^j.
    RadialPoly { coeffs: Vec<f64> },
    /// f = ⟨coeffs, x⟩ in the flat chart.
    Linear { coeffs: Vec<f64> },
}

/// Ambient spec: chart, dimension, weight, and the declared hypothesis
/// constants (`bound_a` for ∂_r f ≥ −a, `bound_k` for |f| ≤ k, `m` for the
/// synthetic dimension of the m-Bakry-Émery branch).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbientSpec {
    pub model: ModelSpec,
    pub n: usize,
    pub weight: WeightSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
}

/// Closed hypersurface spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SurfaceSpec {
    /// Round sphere in the flat chart; center defaults to the origin.
    Sphere {
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    /// Origin-centered ellipsoid with the given semi-axes.
    Ellipsoid { semi_axes: Vec<f64> },
    /// Planar radial graph ρ(φ) = base + amp·cos(harmonic·φ).
    Lobe { base: f64, amp: f64, harmonic: usize },
    /// Level set {r = r0} of a warped chart.
    CoordinateSphere { r0: f64 },
}

/// Geometric tube-radius schedule base · factor^j, j = 0..count−1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub base: f64,
    pub factor: f64,
    pub count: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule { base: 10.0, factor: 2.0, count: 7 }
    }
}

impl Schedule {
    pub fn radii(&self) -> Vec<f64> {
        geometric_schedule(self.base, self.factor, self.count)
    }

    pub fn max_radius(&self) -> f64 {
        self.base * self.factor.powi(self.count as i32 - 1)
    }
}

macro_rules! default_fns {
    ($($name:ident: $ty:ty = $val:expr;)*) => {
        $(fn $name() -> $ty { $val })*
    };
}

default_fns! {
    d_grid_resolution: usize = 48;
    d_radial_resolution: usize = 48;
    d_tolerance: f64 = 1e-8;
    d_eq_tol: f64 = 1e-3;
    d_ray_samples: usize = 96;
    d_curvature_per_axis: usize = 4;
    d_mc_samples: u64 = 100_000;
    d_seed: u64 = 7;
    d_ode_samples: usize = 1024;
    d_boundary_resolution: usize = 12;
    d_ray_count: usize = 8;
    d_ray_extent: f64 = 100.0;
    d_ray_steps: usize = 400;
}

/// All numeric parameters, defaulted when absent and echoed in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    /// Angular quadrature resolution of the surface grid.
    #[serde(default = "d_grid_resolution")]
    pub grid_resolution: usize,
    /// Radial panels per ray in tube-volume quadrature.
    #[serde(default = "d_radial_resolution")]
    pub radial_resolution: usize,
    #[serde(default)]
    pub schedule: Schedule,
    /// Quadrature/ODE honesty scale.
    #[serde(default = "d_tolerance")]
    pub tolerance: f64,
    /// Relative equality-detection tolerance of verdicts.
    #[serde(default = "d_eq_tol")]
    pub eq_tol: f64,
    /// Samples per ray when checking weight bounds along normal rays.
    #[serde(default = "d_ray_samples")]
    pub ray_samples: usize,
    /// Lattice points per axis of the curvature-condition grid.
    #[serde(default = "d_curvature_per_axis")]
    pub curvature_per_axis: usize,
    /// Monte-Carlo sample count of the tube-volume cross-check.
    #[serde(default = "d_mc_samples")]
    pub mc_samples: u64,
    /// PRNG seed of the Monte-Carlo cross-check.
    #[serde(default = "d_seed")]
    pub seed: u64,
    /// Radial sample intervals of the Dirichlet-problem solver (even).
    #[serde(default = "d_ode_samples")]
    pub ode_samples: usize,
    /// Boundary-sphere quadrature resolution of the identity checks.
    #[serde(default = "d_boundary_resolution")]
    pub boundary_resolution: usize,
    /// Number of normal rays flowed by the comparison command.
    #[serde(default = "d_ray_count")]
    pub ray_count: usize,
    /// Distance each comparison ray is flowed.
    #[serde(default = "d_ray_extent")]
    pub ray_extent: f64,
    /// Samples per comparison ray.
    #[serde(default = "d_ray_steps")]
    pub ray_steps: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

/// A validated scene: everything a command needs to run, in one JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub ambient: AmbientSpec,
    pub hypersurface: SurfaceSpec,
    #[serde(default)]
    pub numerics: Numerics,
    /// Theorem ids the scene selects for `verify all` and the test suites.
    #[serde(default)]
    pub theorems: Vec<String>,
}

fn invalid(path: &str, message: impl Into<String>) -> Error {
    Error::InvalidScene { path: path.into(), message: message.into() }
}

fn range_check(path: &str, value: usize, lo: usize, hi: usize) -> Result<()> {
    if value < lo || value > hi {
        return Err(invalid(path, format!("{value} outside the supported range [{lo}, {hi}]")));
    }
    Ok(())
}

impl Scene {
    /// Parse and validate a scene from JSON text; parse errors carry the
    /// JSON field path of the offending token.
    pub fn from_json(text: &str) -> Result<Scene> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scene: Scene = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let message = e.inner().to_string();
            invalid(if path == "." { "(document)" } else { &path }, message)
        })?;
        scene.validate()?;
        Ok(scene)
    }

    /// Field-path validation of every documented range and cross-field rule.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!(
                    "unsupported version {}; this build reads version {SCHEMA_VERSION}",
                    self.schema_version
                ),
            ));
        }
        if self.name.is_empty() {
            return Err(invalid("name", "must be non-empty"));
        }
        let n = self.ambient.n;
        if !(2..=6).contains(&n) {
            return Err(invalid("ambient.n", "ambient dimension must lie in [2, 6]"));
        }
        match &self.ambient.model {
            ModelSpec::Flat => {}
            ModelSpec::Cone { slope, r_min } => {
                if !(*slope > 0.0) {
                    return Err(invalid("ambient.model.slope", "must be positive"));
                }
                if *r_min < 0.0 {
                    return Err(invalid("ambient.model.r_min", "must be nonnegative"));
                }
            }
            ModelSpec::Cylinder { fiber_radius, length } => {
                if !(*fiber_radius > 0.0) {
                    return Err(invalid("ambient.model.fiber_radius", "must be positive"));
                }
                if !(*length > 0.0) {
                    return Err(invalid("ambient.model.length", "must be positive"));
                }
            }
        }
        match &self.ambient.weight {
            WeightSpec::Zero => {}
            WeightSpec::Gaussian { lambda } => {
                if *lambda < 0.0 {
                    return Err(invalid("ambient.weight.lambda", "must be nonnegative"));
                }
            }
            WeightSpec::RadialPoly { coeffs } => {
                if coeffs.is_empty() {
                    return Err(invalid("ambient.weight.coeffs", "must be non-empty"));
                }
                if coeffs.len() > 9 {
                    return Err(invalid(
                        "ambient.weight.coeffs",
                        "at most 9 coefficients (degree 8) are supported",
                    ));
                }
            }
            WeightSpec::Linear { coeffs } => {
                if coeffs.len() != n {
                    return Err(invalid(
                        "ambient.weight.coeffs",
                        format!("needs exactly n = {n} components"),
                    ));
                }
                if self.ambient.model != ModelSpec::Flat {
                    return Err(invalid(
                        "ambient.weight",
                        "linear weights are defined in the flat chart only",
                    ));
                }
            }
        }
        if let Some(a) = self.ambient.bound_a {
            if a < 0.0 {
                return Err(invalid("ambient.bound_a", "must be nonnegative"));
            }
        }
        if let Some(k) = self.ambient.bound_k {
            if k < 0.0 {
                return Err(invalid("ambient.bound_k", "must be nonnegative"));
            }
        }
        if let Some(m) = self.ambient.m {
            if !(m >= n as f64) {
                return Err(invalid(
                    "ambient.m",
                    format!("synthetic dimension must be at least the ambient dimension {n}"),
                ));
            }
            if (m - n as f64).abs() < 1e-12 && !self.weight_is_constant() {
                return Err(invalid("ambient.m", "m = n requires a constant weight"));
            }
        }
        self.validate_surface()?;
        self.validate_numerics()?;
        self.validate_theorems()?;
        Ok(())
    }

    fn weight_is_constant(&self) -> bool {
        match &self.ambient.weight {
            WeightSpec::Zero => true,
            WeightSpec::Gaussian { lambda } => *lambda == 0.0,
            WeightSpec::RadialPoly { coeffs } => coeffs.iter().skip(1).all(|c| *c == 0.0),
            WeightSpec::Linear { coeffs } => coeffs.iter().all(|c| *c == 0.0),
        }
    }

    fn validate_surface(&self) -> Result<()> {
        let n = self.ambient.n;
        let flat = self.ambient.model == ModelSpec::Flat;
        match &self.hypersurface {
            SurfaceSpec::Sphere { radius, center } => {
                if !flat {
                    return Err(invalid(
                        "hypersurface",
                        "spheres live in the flat chart; use coordinate-sphere in warped models",
                    ));
                }
                if !(*radius > 0.0) {
                    return Err(invalid("hypersurface.radius", "must be positive"));
                }
                if let Some(c) = center {
                    if c.len() != n {
                        return Err(invalid(
                            "hypersurface.center",
                            format!("needs exactly n = {n} coordinates"),
                        ));
                    }
                }
            }
            SurfaceSpec::Ellipsoid { semi_axes } => {
                if !flat {
                    return Err(invalid("hypersurface", "ellipsoids live in the flat chart"));
                }
                if semi_axes.len() != n {
                    return Err(invalid(
                        "hypersurface.semi_axes",
                        format!("needs exactly n = {n} entries"),
                    ));
                }
                if semi_axes.iter().any(|s| !(*s > 0.0)) {
                    return Err(invalid("hypersurface.semi_axes", "all must be positive"));
                }
            }
            SurfaceSpec::Lobe { base, amp, harmonic } => {
                if !flat {
                    return Err(invalid("hypersurface", "lobe graphs live in the flat chart"));
                }
                if n != 2 {
                    return Err(invalid(
                        "hypersurface",
                        "lobe graphs are planar curves; ambient.n must be 2",
                    ));
                }
                if !(*base > 0.0) {
                    return Err(invalid("hypersurface.base", "must be positive"));
                }
                if *amp < 0.0 {
                    return Err(invalid("hypersurface.amp", "must be nonnegative"));
                }
                if amp >= base {
                    return Err(invalid(
                        "hypersurface.amp",
                        "must stay below base so the radial graph stays positive",
                    ));
                }
                if *harmonic == 0 {
                    return Err(invalid("hypersurface.harmonic", "must be at least 1"));
                }
            }
            SurfaceSpec::CoordinateSphere { r0 } => {
                let r_min = match &self.ambient.model {
                    ModelSpec::Cone { r_min, .. } => *r_min,
                    _ => {
                        return Err(invalid(
                            "hypersurface",
                            "coordinate-sphere needs the cone model",
                        ))
                    }
                };
                if !(*r0 > r_min) {
                    return Err(invalid(
                        "hypersurface.r0",
                        format!("must exceed the chart's inner radius {r_min}"),
                    ));
                }
            }
        }
        Ok(())
    }

    fn validate_numerics(&self) -> Result<()> {
        let nu = &self.numerics;
        range_check("numerics.grid_resolution", nu.grid_resolution, 8, 512)?;
        range_check("numerics.radial_resolution", nu.radial_resolution, 8, 4096)?;
        range_check("numerics.ray_samples", nu.ray_samples, 8, 8192)?;
        range_check("numerics.curvature_per_axis", nu.curvature_per_axis, 2, 16)?;
        range_check("numerics.ode_samples", nu.ode_samples, 8, 65536)?;
        if nu.ode_samples % 2 != 0 {
            return Err(invalid("numerics.ode_samples", "must be even"));
        }
        range_check("numerics.boundary_resolution", nu.boundary_resolution, 4, 64)?;
        range_check("numerics.ray_count", nu.ray_count, 1, 64)?;
        range_check("numerics.ray_steps", nu.ray_steps, 16, 100_000)?;
        if !(nu.ray_extent > 0.0) {
            return Err(invalid("numerics.ray_extent", "must be positive"));
        }
        if !(nu.tolerance > 0.0 && nu.tolerance <= 1e-2) {
            return Err(invalid("numerics.tolerance", "must lie in (0, 1e-2]"));
        }
        if !(nu.eq_tol > 0.0 && nu.eq_tol <= 0.1) {
            return Err(invalid("numerics.eq_tol", "must lie in (0, 0.1]"));
        }
        if !(1000..=100_000_000).contains(&nu.mc_samples) {
            return Err(invalid(
                "numerics.mc_samples",
                "must lie in [1000, 100000000]",
            ));
        }
        if !(nu.schedule.base > 0.0) {
            return Err(invalid("numerics.schedule.base", "must be positive"));
        }
        if !(nu.schedule.factor > 1.0) {
            return Err(invalid("numerics.schedule.factor", "must exceed 1"));
        }
        range_check("numerics.schedule.count", nu.schedule.count, 6, 32)?;
        let r_max = nu.schedule.max_radius();
        if let Some(a) = self.ambient.bound_a {
            if a * r_max > 300.0 {
                return Err(invalid(
                    "numerics.schedule",
                    format!(
                        "bound_a × max radius = {:.1} exceeds the exponential overflow guard 300",
                        a * r_max
                    ),
                ));
            }
        }
        if let WeightSpec::Gaussian { lambda } = &self.ambient.weight {
            if *lambda > 0.0 && r_max > 60.0 {
                return Err(invalid(
                    "numerics.schedule",
                    "Gaussian weights cap the schedule at max radius 60 (measure underflow)",
                ));
            }
        }
        Ok(())
    }

    fn validate_theorems(&self) -> Result<()> {
        let mut seen = Vec::new();
        for (i, t) in self.theorems.iter().enumerate() {
            let id = TheoremId::parse(t)
                .ok_or_else(|| invalid(&format!("theorems[{i}]"), format!("unknown theorem id `{t}`")))?;
            if seen.contains(&id) {
                return Err(invalid("theorems", format!("duplicate id `{t}`")));
            }
            seen.push(id);
            match id {
                TheoremId::Thm12a | TheoremId::Thm61 => {
                    if self.ambient.bound_a.is_none() {
                        return Err(invalid(
                            "ambient.bound_a",
                            format!("required by {t}: the ray hypothesis ∂_r f ≥ −a needs a"),
                        ));
                    }
                }
                TheoremId::Thm12b => {
                    if self.ambient.bound_k.is_none() {
                        return Err(invalid(
                            "ambient.bound_k",
                            "required by thm12b: the bounded-weight hypothesis |f| ≤ k needs k",
                        ));
                    }
                }
                TheoremId::Thm13 | TheoremId::Thm62 => {
                    if self.ambient.m.is_none() {
                        return Err(invalid(
                            "ambient.m",
                            format!("required by {t}: the synthetic dimension m must be declared"),
                        ));
                    }
                }
                TheoremId::Prop25 => {
                    if self.ambient.m.is_none() && !self.weight_is_constant() {
                        return Err(invalid(
                            "ambient.m",
                            "required by prop25 when the weight is nonconstant (m defaults to n)",
                        ));
                    }
                }
                TheoremId::Thm14 | TheoremId::Prop26 => {}
            }
        }
        Ok(())
    }

    /// Theorem ids selected by the scene, already validated.
    pub fn theorem_ids(&self) -> Vec<TheoremId> {
        self.theorems
            .iter()
            .filter_map(|t| TheoremId::parse(t))
            .collect()
    }

    /// Build the runtime ambient/hypersurface pair.
    pub fn resolve(&self) -> Result<(WeightedAmbient, Hypersurface)> {
        let n = self.ambient.n;
        let kind = match &self.ambient.weight {
            WeightSpec::Zero => WeightKind::Zero,
            WeightSpec::Gaussian { lambda } => WeightKind::Gaussian { lambda: *lambda },
            WeightSpec::RadialPoly { coeffs } => WeightKind::RadialPoly { coeffs: coeffs.clone() },
            WeightSpec::Linear { coeffs } => WeightKind::Linear { coeffs: coeffs.clone() },
        };
        let weight = WeightFunction {
            kind,
            bound_a: self.ambient.bound_a,
            bound_k: self.ambient.bound_k,
        };
        let model = match &self.ambient.model {
            ModelSpec::Flat => MetricModel::Flat,
            ModelSpec::Cone { slope, r_min } => MetricModel::RadialWarped {
                profile: WarpProfile::Linear { slope: *slope },
                r_min: *r_min,
            },
            ModelSpec::Cylinder { fiber_radius, length } => MetricModel::ProductCylinder {
                fiber_radius: *fiber_radius,
                length: *length,
            },
        };
        let ambient = WeightedAmbient { n, model, weight, m_synthetic: self.ambient.m };
        let hyp = match &self.hypersurface {
            SurfaceSpec::Sphere { radius, center } => {
                let c = match center {
                    Some(v) => nalgebra::DVector::from_vec(v.clone()),
                    None => nalgebra::DVector::zeros(n),
                };
                Hypersurface::sphere(c, *radius)
            }
            SurfaceSpec::Ellipsoid { semi_axes } => Hypersurface {
                kind: SurfaceKind::RadialGraph {
                    center: nalgebra::DVector::zeros(n),
                    profile: Box::new(EllipsoidProfile { semi_axes: semi_axes.clone() }),
                },
            },
            SurfaceSpec::Lobe { base, amp, harmonic } => Hypersurface {
                kind: SurfaceKind::RadialGraph {
                    center: nalgebra::DVector::zeros(n),
                    profile: Box::new(CosLobeProfile {
                        base: *base,
                        amp: *amp,
                        harmonic: *harmonic,
                    }),
                },
            },
            SurfaceSpec::CoordinateSphere { r0 } => {
                Hypersurface { kind: SurfaceKind::CoordinateSphere { r0: *r0 } }
            }
        };
        Ok((ambient, hyp))
    }
}

/// Load a scene from a file path, or from the embedded catalog when the
/// argument names a catalog scene (with or without the `.json` suffix).
pub fn load_scene(arg: &str) -> Result<Scene> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        return Scene::from_json(&text);
    }
    let stem = arg.strip_suffix(".json").unwrap_or(arg);
    if let Some(text) = catalog_text(stem) {
        return Scene::from_json(text);
    }
    Err(invalid(
        "(scene)",
        format!("`{arg}` is neither a readable file nor a catalog scene name"),
    ))
}

macro_rules! catalog {
    ($($name:literal),* $(,)?) => {
        /// Names of the scenes shipped inside the binary.
        pub const CATALOG: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../scenes/", $name, ".json")))),*
        ];
    };
}

catalog![
    "flat-unit-ball",
    "flat-ball-r2",
    "flat-disk",
    "flat-ball-m4",
    "ellipsoid-211",
    "gaussian-sphere-r1",
    "gaussian-sphere-r2",
    "gaussian-circle-r1",
    "gaussian-circle-r2",
    "gaussian-offcenter",
    "cone-unit",
    "cone-deficit",
    "nonconvex-lobe",
];

fn catalog_text(name: &str) -> Option<&'static str> {
    CATALOG.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Parse one catalog scene by name.
pub fn catalog_scene(name: &str) -> Result<Scene> {
    let text = catalog_text(name)
        .ok_or_else(|| invalid("(scene)", format!("`{name}` is not a catalog scene")))?;
    Scene::from_json(text)
}
