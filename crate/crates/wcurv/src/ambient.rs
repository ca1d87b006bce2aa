//! Ambient model spaces: flat space, radial warped products, and round-fiber
//! cylinders, each carrying a smooth weight.
//!
//! Curvature tensors are returned as matrices in an *adapted orthonormal
//! frame* at the evaluation point:
//! - flat chart: the standard Cartesian frame;
//! - radial warped chart at (r, θ): (∂_r, E_1, …, E_{n-1}) with E_i an
//!   orthonormal basis of the fiber sphere;
//! - cylinder chart at (t, θ): (∂_t, fiber frame).
//!
//! In these frames every shipped tensor is diagonal or a diagonal plus a
//! rank-one correction, and traces equal Laplacians.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Finite-difference step for third derivatives (Bochner residual).
const FD_STEP_THIRD: f64 = 1e-4;
/// Finite-difference step for the weight self-test.
const FD_STEP_SELF: f64 = 1e-5;
/// Eigenvalue slack treated as numerical zero in condition checks.
const COND_EIG_TOL: f64 = 1e-10;
/// Residual gate for the shrinker normalization identities.
const SHRINKER_TOL: f64 = 1e-10;

/// A point in one of the model charts.
#[derive(Debug, Clone)]
pub enum Point {
    /// Flat model, Cartesian coordinates.
    Cartesian(DVector<f64>),
    /// Radial warped chart: distance coordinate r and unit direction in R^n.
    Radial { r: f64, dir: DVector<f64> },
    /// Cylinder chart: axis coordinate t and unit fiber direction in R^n.
    Cylinder { t: f64, dir: DVector<f64> },
}

/// Warping profile h(r) of a radial warped product.
#[derive(Debug, Clone, PartialEq)]
pub enum WarpProfile {
    /// h(r) = slope · r. Slope 1 is the flat cone chart; slope < 1 an angle
    /// deficit cone (positive fiber curvature).
    Linear { slope: f64 },
}

impl WarpProfile {
    pub fn h(&self, r: f64) -> f64 {
        match self {
            WarpProfile::Linear { slope } => slope * r,
        }
    }
    pub fn dh(&self, r: f64) -> f64 {
        match self {
            WarpProfile::Linear { slope } => {
                let _ = r;
                *slope
            }
        }
    }
    pub fn d2h(&self, _r: f64) -> f64 {
        match self {
            WarpProfile::Linear { .. } => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricModel {
    Flat,
    RadialWarped { profile: WarpProfile, r_min: f64 },
    /// S^{n-1}(fiber_radius) × [0, length].
    ProductCylinder { fiber_radius: f64, length: f64 },
}

/// Weight function kinds. All radial kinds are centered at the chart origin.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    Zero,
    /// f = λ·r² (r = |x| in flat space, the radial/axis coordinate otherwise).
    Gaussian { lambda: f64 },
    /// f = ⟨coeffs, x⟩; flat Cartesian chart only.
    Linear { coeffs: Vec<f64> },
    /// f(r) = Σ coeffs[j]·r^j.
    RadialPoly { coeffs: Vec<f64> },
}

/// Weight together with the constants of the ray hypotheses it is declared
/// to satisfy: `bound_a` for ∂_r f ≥ −a, `bound_k` for |f| ≤ k.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFunction {
    pub kind: WeightKind,
    pub bound_a: Option<f64>,
    pub bound_k: Option<f64>,
}

impl WeightFunction {
    pub fn new(kind: WeightKind) -> Self {
        WeightFunction { kind, bound_a: None, bound_k: None }
    }

    pub fn is_constant(&self) -> bool {
        match &self.kind {
            WeightKind::Zero => true,
            WeightKind::Gaussian { lambda } => *lambda == 0.0,
            WeightKind::Linear { coeffs } => coeffs.iter().all(|c| *c == 0.0),
            WeightKind::RadialPoly { coeffs } => coeffs.iter().skip(1).all(|c| *c == 0.0),
        }
    }

    /// Closed-form radial profile (f, f', f'') when the weight is a function
    /// of the radial/axis coordinate alone.
    pub fn radial_profile(&self, r: f64) -> Option<(f64, f64, f64)> {
        match &self.kind {
            WeightKind::Zero => Some((0.0, 0.0, 0.0)),
            WeightKind::Gaussian { lambda } => {
                Some((lambda * r * r, 2.0 * lambda * r, 2.0 * lambda))
            }
            WeightKind::RadialPoly { coeffs } => {
                let mut v = 0.0;
                let mut d1 = 0.0;
                let mut d2 = 0.0;
                // Horner from the top for each of the three values.
                for (j, c) in coeffs.iter().enumerate().rev() {
                    let jf = j as f64;
                    v = v * r + c;
                    if j >= 1 {
                        d1 += jf * c * r.powi(j as i32 - 1);
                    }
                    if j >= 2 {
                        d2 += jf * (jf - 1.0) * c * r.powi(j as i32 - 2);
                    }
                }
                Some((v, d1, d2))
            }
            WeightKind::Linear { .. } => None,
        }
    }
}

/// The ambient weighted model space.
#[derive(Debug, Clone)]
pub struct WeightedAmbient {
    pub n: usize,
    pub model: MetricModel,
    pub weight: WeightFunction,
    /// Synthetic dimension for the m-Bakry-Émery tensor; m = n is only
    /// admissible with a constant weight.
    pub m_synthetic: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurvatureMode {
    Infinity,
    M(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurvatureCondition {
    RicfNonneg,
    RicfmNonneg { m: f64 },
    /// Shrinker normalization: Ric_f = g/2 together with R + |∇f|² = f.
    ShrinkerHalf,
}

/// Result of a grid-sampled curvature condition check (report, not a proof).
#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub condition: String,
    pub points_checked: usize,
    pub min_eigenvalue: f64,
    pub worst_point: usize,
    pub satisfied: bool,
    /// ShrinkerHalf only: max |Ric_f − g/2| entrywise over the grid.
    pub max_ric_deviation: Option<f64>,
    /// ShrinkerHalf only: max |R + |∇f|² − f| over the grid.
    pub max_aux_deviation: Option<f64>,
}

impl WeightedAmbient {
    pub fn flat(n: usize, weight: WeightFunction) -> Self {
        WeightedAmbient { n, model: MetricModel::Flat, weight, m_synthetic: None }
    }

    fn check_chart(&self, x: &Point) -> Result<()> {
        match (&self.model, x) {
            (MetricModel::Flat, Point::Cartesian(v)) => {
                if v.len() != self.n {
                    return Err(Error::Domain(format!(
                        "point dimension {} does not match ambient n = {}",
                        v.len(),
                        self.n
                    )));
                }
                Ok(())
            }
            (MetricModel::RadialWarped { r_min, .. }, Point::Radial { r, .. }) => {
                if *r < *r_min - 1e-12 {
                    return Err(Error::Domain(format!(
                        "radial coordinate {r} below chart minimum {r_min}"
                    )));
                }
                Ok(())
            }
            (MetricModel::ProductCylinder { length, .. }, Point::Cylinder { t, .. }) => {
                if *t < -1e-12 || *t > length + 1e-12 {
                    return Err(Error::Domain(format!(
                        "axis coordinate {t} outside [0, {length}]"
                    )));
                }
                Ok(())
            }
            _ => Err(Error::Domain(
                "point chart does not match the ambient metric model".into(),
            )),
        }
    }

    // ----- weight oracles ---------------------------------------------------

    /// f at a point (any chart).
    pub fn weight_value(&self, x: &Point) -> Result<f64> {
        self.check_chart(x)?;
        match x {
            Point::Cartesian(v) => self.weight_value_cartesian(v),
            Point::Radial { r, .. } | Point::Cylinder { t: r, .. } => self
                .weight
                .radial_profile(*r)
                .map(|(f, _, _)| f)
                .ok_or_else(|| {
                    Error::Unsupported(
                        "weight kind has no radial profile for this chart".into(),
                    )
                }),
        }
    }

    pub fn weight_value_cartesian(&self, x: &DVector<f64>) -> Result<f64> {
        match &self.weight.kind {
            WeightKind::Zero => Ok(0.0),
            WeightKind::Gaussian { lambda } => Ok(lambda * x.norm_squared()),
            WeightKind::Linear { coeffs } => {
                Ok(x.iter().zip(coeffs).map(|(a, b)| a * b).sum())
            }
            WeightKind::RadialPoly { .. } => {
                let (f, _, _) = self.weight.radial_profile(x.norm()).unwrap();
                Ok(f)
            }
        }
    }

    /// ∇f in Cartesian components; flat chart only.
    pub fn weight_gradient_cartesian(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        match &self.weight.kind {
            WeightKind::Zero => Ok(DVector::zeros(x.len())),
            WeightKind::Gaussian { lambda } => Ok(x * (2.0 * lambda)),
            WeightKind::Linear { coeffs } => Ok(DVector::from_column_slice(coeffs)),
            WeightKind::RadialPoly { .. } => {
                let rho = x.norm();
                if rho < 1e-14 {
                    // Smooth radial weights have vanishing gradient at the
                    // center; a linear term would make the origin singular.
                    let (_, d1, _) = self.weight.radial_profile(0.0).unwrap();
                    if d1.abs() > 0.0 {
                        return Err(Error::Numerical(
                            "radial-poly weight with linear term is singular at the origin"
                                .into(),
                        ));
                    }
                    return Ok(DVector::zeros(x.len()));
                }
                let (_, d1, _) = self.weight.radial_profile(rho).unwrap();
                Ok(x * (d1 / rho))
            }
        }
    }

    /// Hess f in Cartesian components; flat chart only.
    pub fn weight_hessian_cartesian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let n = x.len();
        match &self.weight.kind {
            WeightKind::Zero | WeightKind::Linear { .. } => Ok(DMatrix::zeros(n, n)),
            WeightKind::Gaussian { lambda } => {
                Ok(DMatrix::identity(n, n) * (2.0 * lambda))
            }
            WeightKind::RadialPoly { .. } => {
                let rho = x.norm();
                if rho < 1e-14 {
                    let (_, d1, d2) = self.weight.radial_profile(0.0).unwrap();
                    if d1.abs() > 0.0 {
                        return Err(Error::Numerical(
                            "radial-poly weight with linear term is singular at the origin"
                                .into(),
                        ));
                    }
                    return Ok(DMatrix::identity(n, n) * d2);
                }
                let (_, d1, d2) = self.weight.radial_profile(rho).unwrap();
                let xhat = x / rho;
                let proj = &xhat * xhat.transpose();
                Ok(&proj * d2 + (DMatrix::identity(n, n) - &proj) * (d1 / rho))
            }
        }
    }

    /// ∇f components in the adapted frame at `x`.
    pub fn weight_gradient_frame(&self, x: &Point) -> Result<DVector<f64>> {
        self.check_chart(x)?;
        match x {
            Point::Cartesian(v) => self.weight_gradient_cartesian(v),
            Point::Radial { r, .. } | Point::Cylinder { t: r, .. } => {
                let (_, d1, _) = self.weight.radial_profile(*r).ok_or_else(|| {
                    Error::Unsupported("weight kind has no radial profile for this chart".into())
                })?;
                let mut g = DVector::zeros(self.n);
                g[0] = d1;
                Ok(g)
            }
        }
    }

    /// Hess f in the adapted frame at `x`.
    pub fn weight_hessian_frame(&self, x: &Point) -> Result<DMatrix<f64>> {
        self.check_chart(x)?;
        match x {
            Point::Cartesian(v) => self.weight_hessian_cartesian(v),
            Point::Radial { r, .. } => {
                let (_, d1, d2) = self.weight.radial_profile(*r).ok_or_else(|| {
                    Error::Unsupported("weight kind has no radial profile for this chart".into())
                })?;
                let (h, dh) = match &self.model {
                    MetricModel::RadialWarped { profile, .. } => {
                        (profile.h(*r), profile.dh(*r))
                    }
                    _ => unreachable!("chart checked above"),
                };
                // Hess f = f'' dr² + f'·(h'/h)·g_fiber for radial f.
                let mut m = DMatrix::identity(self.n, self.n) * (d1 * dh / h);
                m[(0, 0)] = d2;
                Ok(m)
            }
            Point::Cylinder { t, .. } => {
                let (_, _, d2) = self.weight.radial_profile(*t).ok_or_else(|| {
                    Error::Unsupported("weight kind has no radial profile for this chart".into())
                })?;
                // Product metric: the axis factor is flat and the fiber does
                // not see t, so Hess f = f'' dt².
                let mut m = DMatrix::zeros(self.n, self.n);
                m[(0, 0)] = d2;
                Ok(m)
            }
        }
    }

    // ----- curvature oracles ------------------------------------------------

    /// Ricci tensor in the adapted frame.
    pub fn ricci_at(&self, x: &Point) -> Result<DMatrix<f64>> {
        self.check_chart(x)?;
        let n = self.n;
        match (&self.model, x) {
            (MetricModel::Flat, _) => Ok(DMatrix::zeros(n, n)),
            (MetricModel::RadialWarped { profile, .. }, Point::Radial { r, .. }) => {
                let h = profile.h(*r);
                let dh = profile.dh(*r);
                let d2h = profile.d2h(*r);
                let radial = -(n as f64 - 1.0) * d2h / h;
                let fiber = (-d2h * h + (n as f64 - 2.0) * (1.0 - dh * dh)) / (h * h);
                let mut m = DMatrix::identity(n, n) * fiber;
                m[(0, 0)] = radial;
                Ok(m)
            }
            (MetricModel::ProductCylinder { fiber_radius, .. }, Point::Cylinder { .. }) => {
                let fiber = (n as f64 - 2.0) / (fiber_radius * fiber_radius);
                let mut m = DMatrix::identity(n, n) * fiber;
                m[(0, 0)] = 0.0;
                Ok(m)
            }
            _ => unreachable!("chart checked above"),
        }
    }

    /// Scalar curvature (trace of Ricci in the orthonormal frame).
    pub fn scalar_curvature_at(&self, x: &Point) -> Result<f64> {
        Ok(self.ricci_at(x)?.trace())
    }

    /// Bakry-Émery Ricci tensor in the adapted frame:
    /// infinity mode Ric + Hess f; m mode subtracts df⊗df/(m−n).
    pub fn bakry_emery_at(&self, x: &Point, mode: CurvatureMode) -> Result<DMatrix<f64>> {
        let ric = self.ricci_at(x)?;
        let hess = self.weight_hessian_frame(x)?;
        match mode {
            CurvatureMode::Infinity => Ok(ric + hess),
            CurvatureMode::M(m) => {
                let nf = self.n as f64;
                if m < nf {
                    return Err(Error::InvalidConfig(format!(
                        "synthetic dimension m = {m} below ambient dimension n = {nf}"
                    )));
                }
                if (m - nf).abs() < 1e-14 {
                    if !self.weight.is_constant() {
                        return Err(Error::InvalidConfig(
                            "m = n requires a constant weight".into(),
                        ));
                    }
                    // Constant weight: Hess f = 0 and the df⊗df term vanishes.
                    return Ok(ric);
                }
                let grad = self.weight_gradient_frame(x)?;
                let correction = &grad * grad.transpose() / (m - nf);
                Ok(ric + hess - correction)
            }
        }
    }

    /// Grid-sampled curvature condition check; failures are reported, never
    /// raised (configuration problems still error).
    pub fn check_curvature_condition(
        &self,
        grid: &[Point],
        condition: CurvatureCondition,
    ) -> Result<ConditionReport> {
        assert!(!grid.is_empty(), "condition check needs at least one sample point");
        let mut min_eig = f64::INFINITY;
        let mut worst = 0usize;
        let mut max_ric_dev: f64 = 0.0;
        let mut max_aux_dev: f64 = 0.0;
        for (i, x) in grid.iter().enumerate() {
            let form = match condition {
                CurvatureCondition::RicfNonneg | CurvatureCondition::ShrinkerHalf => {
                    self.bakry_emery_at(x, CurvatureMode::Infinity)?
                }
                CurvatureCondition::RicfmNonneg { m } => {
                    self.bakry_emery_at(x, CurvatureMode::M(m))?
                }
            };
            let eigs = form.clone().symmetric_eigen().eigenvalues;
            let lo = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
            if lo < min_eig {
                min_eig = lo;
                worst = i;
            }
            if condition == CurvatureCondition::ShrinkerHalf {
                let dev = &form - DMatrix::identity(self.n, self.n) * 0.5;
                let ric_dev = dev.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
                let r_scal = self.scalar_curvature_at(x)?;
                let grad = self.weight_gradient_frame(x)?;
                let f_val = self.weight_value(x)?;
                let aux_dev = (r_scal + grad.norm_squared() - f_val).abs();
                max_ric_dev = max_ric_dev.max(ric_dev);
                max_aux_dev = max_aux_dev.max(aux_dev);
            }
        }
        let (name, satisfied) = match condition {
            CurvatureCondition::RicfNonneg => ("Ricf_nonneg", min_eig >= -COND_EIG_TOL),
            CurvatureCondition::RicfmNonneg { .. } => {
                ("Ricfm_nonneg", min_eig >= -COND_EIG_TOL)
            }
            CurvatureCondition::ShrinkerHalf => (
                "shrinker_half",
                max_ric_dev <= SHRINKER_TOL && max_aux_dev <= SHRINKER_TOL,
            ),
        };
        Ok(ConditionReport {
            condition: name.to_string(),
            points_checked: grid.len(),
            min_eigenvalue: min_eig,
            worst_point: worst,
            satisfied,
            max_ric_deviation: (condition == CurvatureCondition::ShrinkerHalf)
                .then_some(max_ric_dev),
            max_aux_deviation: (condition == CurvatureCondition::ShrinkerHalf)
                .then_some(max_aux_dev),
        })
    }

    /// Deterministic sample grid for condition checks: a Cartesian lattice in
    /// the flat model, and (radial/axis) × direction products otherwise.
    pub fn sample_grid(&self, extent: f64, per_axis: usize) -> Vec<Point> {
        assert!(per_axis >= 2);
        let n = self.n;
        match &self.model {
            MetricModel::Flat => {
                // Lattice over [-extent, extent]^n, capped to keep desk scale.
                let per_axis = if n >= 5 { per_axis.min(3) } else { per_axis };
                let mut points = Vec::new();
                let total = per_axis.pow(n as u32);
                for idx in 0..total {
                    let mut rem = idx;
                    let mut v = DVector::zeros(n);
                    for d in 0..n {
                        let i = rem % per_axis;
                        rem /= per_axis;
                        v[d] = -extent + 2.0 * extent * i as f64 / (per_axis - 1) as f64;
                    }
                    points.push(Point::Cartesian(v));
                }
                points
            }
            MetricModel::RadialWarped { r_min, .. } => {
                let dirs = axis_directions(n);
                let mut points = Vec::new();
                for i in 0..per_axis {
                    let r = r_min + 1e-6
                        + (extent - 1e-6) * i as f64 / (per_axis - 1) as f64;
                    for dir in &dirs {
                        points.push(Point::Radial { r, dir: dir.clone() });
                    }
                }
                points
            }
            MetricModel::ProductCylinder { length, .. } => {
                let dirs = axis_directions(n);
                let mut points = Vec::new();
                for i in 0..per_axis {
                    let t = length * i as f64 / (per_axis - 1) as f64;
                    for dir in &dirs {
                        points.push(Point::Cylinder { t, dir: dir.clone() });
                    }
                }
                points
            }
        }
    }

    /// Max relative deviation between analytic weight gradient/hessian and
    /// central finite differences of the value oracle over `points`.
    pub fn weight_self_test(&self, points: &[Point]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for p in points {
            match p {
                Point::Cartesian(x) => {
                    let grad = self.weight_gradient_cartesian(x)?;
                    let hess = self.weight_hessian_cartesian(x)?;
                    let scale = 1.0 + grad.norm().max(hess.norm());
                    for i in 0..x.len() {
                        let mut xp = x.clone();
                        let mut xm = x.clone();
                        xp[i] += FD_STEP_SELF;
                        xm[i] -= FD_STEP_SELF;
                        let fd_g = (self.weight_value_cartesian(&xp)?
                            - self.weight_value_cartesian(&xm)?)
                            / (2.0 * FD_STEP_SELF);
                        worst = worst.max((fd_g - grad[i]).abs() / scale);
                        let gp = self.weight_gradient_cartesian(&xp)?;
                        let gm = self.weight_gradient_cartesian(&xm)?;
                        for j in 0..x.len() {
                            let fd_h = (gp[j] - gm[j]) / (2.0 * FD_STEP_SELF);
                            worst = worst.max((fd_h - hess[(i, j)]).abs() / scale);
                        }
                    }
                }
                Point::Radial { r, .. } | Point::Cylinder { t: r, .. } => {
                    if let Some((_, d1, d2)) = self.weight.radial_profile(*r) {
                        let h = FD_STEP_SELF;
                        let fm = self.weight.radial_profile(r - h).unwrap().0;
                        let fp = self.weight.radial_profile(r + h).unwrap().0;
                        let f0 = self.weight.radial_profile(*r).unwrap().0;
                        let scale = 1.0 + d1.abs().max(d2.abs());
                        worst = worst.max(((fp - fm) / (2.0 * h) - d1).abs() / scale);
                        worst =
                            worst.max(((fp - 2.0 * f0 + fm) / (h * h) - d2).abs() / scale);
                    }
                }
            }
        }
        Ok(worst)
    }
}

/// ±e_i directions plus the normalized all-ones direction; deterministic
/// direction set for chart sampling.
fn axis_directions(n: usize) -> Vec<DVector<f64>> {
    let mut dirs = Vec::with_capacity(2 * n + 1);
    for i in 0..n {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        dirs.push(v.clone());
        dirs.push(-v);
    }
    let ones = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    dirs.push(ones);
    dirs
}

// ----- scalar field oracles -------------------------------------------------

/// A scalar field with exact derivatives in Cartesian coordinates.
pub trait CartesianField {
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64>;
}

/// A scalar field depending only on the radial/axis coordinate.
pub trait RadialField {
    fn value(&self, r: f64) -> f64;
    fn d1(&self, r: f64) -> f64;
    fn d2(&self, r: f64) -> f64;
}

/// Field oracle passed to the weighted operators.
pub enum FieldOracle<'a> {
    Cartesian(&'a dyn CartesianField),
    Radial(&'a dyn RadialField),
}

/// u = x_i.
pub struct CoordinateField(pub usize);
impl CartesianField for CoordinateField {
    fn value(&self, x: &DVector<f64>) -> f64 {
        x[self.0]
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(x.len());
        g[self.0] = 1.0;
        g
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::zeros(x.len(), x.len())
    }
}

/// u = scale·|x|².
pub struct NormSquaredField(pub f64);
impl CartesianField for NormSquaredField {
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.0 * x.norm_squared()
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        x * (2.0 * self.0)
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::identity(x.len(), x.len()) * (2.0 * self.0)
    }
}

/// u = ⟨coeffs, x⟩.
pub struct LinearField(pub Vec<f64>);
impl CartesianField for LinearField {
    fn value(&self, x: &DVector<f64>) -> f64 {
        x.iter().zip(&self.0).map(|(a, b)| a * b).sum()
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let _ = x;
        DVector::from_column_slice(&self.0)
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::zeros(x.len(), x.len())
    }
}

/// u(r) = Σ coeffs[j]·r^j as a radial field.
pub struct RadialPolyField(pub Vec<f64>);
impl RadialField for RadialPolyField {
    fn value(&self, r: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * r + c)
    }
    fn d1(&self, r: f64) -> f64 {
        self.0
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| j as f64 * c * r.powi(j as i32 - 1))
            .sum()
    }
    fn d2(&self, r: f64) -> f64 {
        self.0
            .iter()
            .enumerate()
            .skip(2)
            .map(|(j, c)| (j * (j - 1)) as f64 * c * r.powi(j as i32 - 2))
            .sum()
    }
}

/// u = r (the radial coordinate itself).
pub struct RadialCoordinateField;
impl RadialField for RadialCoordinateField {
    fn value(&self, r: f64) -> f64 {
        r
    }
    fn d1(&self, _r: f64) -> f64 {
        1.0
    }
    fn d2(&self, _r: f64) -> f64 {
        0.0
    }
}

impl WeightedAmbient {
    /// Δ_f u = Δu − ⟨∇f, ∇u⟩ at `x`.
    pub fn f_laplacian(&self, u: &FieldOracle, x: &Point) -> Result<f64> {
        self.check_chart(x)?;
        match (u, x) {
            (FieldOracle::Cartesian(field), Point::Cartesian(v)) => {
                let lap = field.hessian(v).trace();
                let grad_f = self.weight_gradient_cartesian(v)?;
                Ok(lap - grad_f.dot(&field.gradient(v)))
            }
            (FieldOracle::Radial(field), Point::Cartesian(v)) => {
                // Radial field through the flat chart: Δu = u'' + (n−1)u'/r.
                let r = v.norm();
                if r < 1e-12 {
                    return Err(Error::Domain(
                        "radial field Laplacian at the origin is chart-singular".into(),
                    ));
                }
                let lap = field.d2(r) + (self.n as f64 - 1.0) * field.d1(r) / r;
                let grad_f = self.weight_gradient_cartesian(v)?;
                let grad_u = v * (field.d1(r) / r);
                Ok(lap - grad_f.dot(&grad_u))
            }
            (FieldOracle::Radial(field), Point::Radial { r, .. }) => {
                let (profile, _) = match &self.model {
                    MetricModel::RadialWarped { profile, r_min } => (profile, r_min),
                    _ => unreachable!("chart checked above"),
                };
                let h = profile.h(*r);
                let dh = profile.dh(*r);
                let (_, f1, _) = self.weight.radial_profile(*r).ok_or_else(|| {
                    Error::Unsupported("weight kind has no radial profile for this chart".into())
                })?;
                Ok(field.d2(*r) + (self.n as f64 - 1.0) * dh / h * field.d1(*r)
                    - f1 * field.d1(*r))
            }
            _ => Err(Error::Unsupported(
                "field oracle kind not supported in this chart".into(),
            )),
        }
    }

    /// Residual of the generalized Bochner identity at `x`:
    /// (1/2)Δ_f|∇u|² − |Hess u|² − ⟨∇Δ_f u, ∇u⟩ − Ric_f(∇u, ∇u).
    ///
    /// Third derivatives come from central differences (step 1e-4) of exact
    /// second-derivative oracles, so the residual carries an O(h²) floor.
    pub fn bochner_residual(&self, u: &FieldOracle, x: &Point) -> Result<f64> {
        self.check_chart(x)?;
        let h = FD_STEP_THIRD;
        match (u, x) {
            (FieldOracle::Cartesian(field), Point::Cartesian(v)) => {
                let n = v.len();
                let grad_u = field.gradient(v);
                let hess_u = field.hessian(v);
                let grad_f = self.weight_gradient_cartesian(v)?;
                let hess_f = self.weight_hessian_cartesian(v)?;

                // ∇w for w = |∇u|² is 2·Hess u·∇u, exact at any point.
                let grad_w = |p: &DVector<f64>| {
                    let g = field.gradient(p);
                    field.hessian(p) * g * 2.0
                };
                let mut lap_w = 0.0;
                for i in 0..n {
                    let mut vp = v.clone();
                    let mut vm = v.clone();
                    vp[i] += h;
                    vm[i] -= h;
                    lap_w += (grad_w(&vp)[i] - grad_w(&vm)[i]) / (2.0 * h);
                }
                let t1 = 0.5 * (lap_w - grad_f.dot(&grad_w(v)));

                let t2 = hess_u.iter().map(|a| a * a).sum::<f64>();

                // s = Δ_f u, exact at shifted points; ∇s by central differences.
                let s_at = |p: &DVector<f64>| -> Result<f64> {
                    let lap = field.hessian(p).trace();
                    Ok(lap - self.weight_gradient_cartesian(p)?.dot(&field.gradient(p)))
                };
                let mut t3 = 0.0;
                for i in 0..n {
                    let mut vp = v.clone();
                    let mut vm = v.clone();
                    vp[i] += h;
                    vm[i] -= h;
                    t3 += (s_at(&vp)? - s_at(&vm)?) / (2.0 * h) * grad_u[i];
                }

                // Flat ambient: Ric_f = Hess f.
                let t4 = (&hess_f * &grad_u).dot(&grad_u);
                Ok(t1 - t2 - t3 - t4)
            }
            (FieldOracle::Radial(field), Point::Radial { r, .. }) => {
                let profile = match &self.model {
                    MetricModel::RadialWarped { profile, .. } => profile,
                    _ => unreachable!("chart checked above"),
                };
                let nf = self.n as f64;
                let (_, f1, f2) = self.weight.radial_profile(*r).ok_or_else(|| {
                    Error::Unsupported("weight kind has no radial profile for this chart".into())
                })?;
                let hr = profile.h(*r);
                let dh = profile.dh(*r);
                let d2h = profile.d2h(*r);
                let u1 = field.d1(*r);
                let u2 = field.d2(*r);

                // w = (u')²; w' exact, w'' by central differences of w'.
                let w1 = |s: f64| 2.0 * field.d1(s) * field.d2(s);
                let w2 = (w1(r + h) - w1(r - h)) / (2.0 * h);
                let t1 = 0.5 * (w2 + (nf - 1.0) * dh / hr * w1(*r) - f1 * w1(*r));

                let t2 = u2 * u2 + (nf - 1.0) * (dh / hr * u1).powi(2);

                let dfu = |s: f64| -> f64 {
                    let hh = profile.h(s);
                    let dhh = profile.dh(s);
                    let (_, g1, _) = self.weight.radial_profile(s).unwrap();
                    field.d2(s) + (nf - 1.0) * dhh / hh * field.d1(s) - g1 * field.d1(s)
                };
                let t3 = (dfu(r + h) - dfu(r - h)) / (2.0 * h) * u1;

                let ric_rad = -(nf - 1.0) * d2h / hr + f2;
                let t4 = ric_rad * u1 * u1;
                Ok(t1 - t2 - t3 - t4)
            }
            _ => Err(Error::Unsupported(
                "field oracle kind not supported in this chart".into(),
            )),
        }
    }
}
