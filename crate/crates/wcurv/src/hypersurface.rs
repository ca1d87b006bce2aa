//! Closed embedded hypersurfaces: radial graphs over a center point in flat
//! space and coordinate spheres in radial warped products.
//!
//! A radial graph is parametrized by hyperspherical angles φ through the unit
//! direction u(φ) as X(φ) = c + ρ(u(φ))·u(φ). Profiles supply ρ as a smooth
//! extension ρ̂: Rⁿ → R evaluated on unit vectors, so the chain rule with the
//! exact direction jet gives exact first and second angular derivatives.
//!
//! Conventions: ν is the outward unit normal (away from the enclosed region);
//! the second fundamental form is h_ij = −⟨ν, X_ij⟩, so a round sphere of
//! radius ρ has principal curvatures +1/ρ and H = (n−1)/ρ > 0. H is the trace
//! of the shape operator (sum of principal curvatures, not the mean).

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::ambient::{MetricModel, WeightedAmbient};
use crate::error::{Error, Result};
use crate::quad::{mapped_rule, pairwise_sum, MappedRule};

/// Finite-difference step for the normal-variation cross-check of H.
const H_CHECK_STEP: f64 = 1e-5;
/// Gate for the dual-path H agreement (analytic vs finite differences).
const H_CHECK_TOL: f64 = 1e-6;
/// Max allowed asymmetry of the frame shape operator.
const SHAPE_SYMMETRY_TOL: f64 = 1e-9;
/// Step for tangential finite-difference operators on the surface.
const SURFACE_FD_STEP: f64 = 1e-4;
/// Convergence tolerance for the ellipsoid nearest-point secular equation.
const SECULAR_TOL: f64 = 1e-15;

// ----- direction jets -------------------------------------------------------

/// Unit direction u(φ) of hyperspherical angles with exact first and second
/// derivatives. Angles: φ_0..φ_{n−3} polar in (0, π), φ_{n−2} azimuthal in
/// [0, 2π). Components: u_k = (Π_{j<k} sin φ_j)·cos φ_k for k < n−1 and
/// u_{n−1} = Π_j sin φ_j.
pub struct DirectionJet {
    pub u: DVector<f64>,
    /// du[i] = ∂u/∂φ_i.
    pub du: Vec<DVector<f64>>,
    /// d2u[i][j] = ∂²u/∂φ_i∂φ_j (full symmetric storage).
    pub d2u: Vec<Vec<DVector<f64>>>,
}

#[derive(Clone, Copy)]
enum Factor {
    Sin,
    Cos,
}

impl Factor {
    fn eval(self, t: f64) -> (f64, f64, f64) {
        match self {
            Factor::Sin => (t.sin(), t.cos(), -t.sin()),
            Factor::Cos => (t.cos(), -t.sin(), -t.cos()),
        }
    }
}

/// Factor table of component k: which trig factor each angle contributes.
fn component_factors(n: usize, k: usize) -> Vec<(usize, Factor)> {
    let mut factors = Vec::new();
    if k < n - 1 {
        for j in 0..k {
            factors.push((j, Factor::Sin));
        }
        factors.push((k, Factor::Cos));
    } else {
        for j in 0..n - 1 {
            factors.push((j, Factor::Sin));
        }
    }
    factors
}

pub fn direction_jet(n: usize, phi: &[f64]) -> DirectionJet {
    assert_eq!(phi.len(), n - 1, "need n−1 angles for S^{{n−1}}");
    let na = n - 1;
    let mut u = DVector::zeros(n);
    let mut du = vec![DVector::zeros(n); na];
    let mut d2u = vec![vec![DVector::zeros(n); na]; na];
    for k in 0..n {
        let factors = component_factors(n, k);
        let evals: Vec<(usize, (f64, f64, f64))> = factors
            .iter()
            .map(|(j, f)| (*j, f.eval(phi[*j])))
            .collect();
        let product = |d_first: Option<usize>, d_second: Option<usize>| -> f64 {
            let mut p = 1.0;
            for (j, (v, d1, d2)) in &evals {
                let order = [d_first, d_second]
                    .iter()
                    .filter(|d| **d == Some(*j))
                    .count();
                p *= match order {
                    0 => *v,
                    1 => *d1,
                    _ => *d2,
                };
            }
            p
        };
        u[k] = product(None, None);
        for i in 0..na {
            if evals.iter().any(|(j, _)| *j == i) {
                du[i][k] = product(Some(i), None);
                for j in i..na {
                    if evals.iter().any(|(jj, _)| *jj == j) {
                        d2u[i][j][k] = product(Some(i), Some(j));
                    }
                }
            }
        }
    }
    for i in 0..na {
        for j in 0..i {
            d2u[i][j] = d2u[j][i].clone();
        }
    }
    DirectionJet { u, du, d2u }
}

// ----- radial profiles ------------------------------------------------------

/// Radius function of a radial graph, given as a smooth extension evaluated
/// on unit directions.
pub trait RadialProfile: Send + Sync {
    fn value(&self, u: &DVector<f64>) -> f64;
    fn gradient(&self, u: &DVector<f64>) -> DVector<f64>;
    fn hessian(&self, u: &DVector<f64>) -> DMatrix<f64>;
    /// Nearest-surface distance from the center-relative point `d`, when the
    /// profile has a closed-form or Newton-grade method; `None` falls back to
    /// dense sampling with refinement.
    fn exact_surface_distance(&self, d: &DVector<f64>) -> Option<Result<f64>> {
        let _ = d;
        None
    }
    /// Exact (ρ_min, ρ_max) over all directions, when known in closed form.
    /// Used for Monte-Carlo box sizing and cheap accept/reject bounds.
    fn radial_bounds(&self) -> Option<(f64, f64)> {
        None
    }
}

/// Constant profile: a round sphere.
pub struct SphereProfile {
    pub radius: f64,
}

impl RadialProfile for SphereProfile {
    fn value(&self, _u: &DVector<f64>) -> f64 {
        self.radius
    }
    fn gradient(&self, u: &DVector<f64>) -> DVector<f64> {
        DVector::zeros(u.len())
    }
    fn hessian(&self, u: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::zeros(u.len(), u.len())
    }
    fn exact_surface_distance(&self, d: &DVector<f64>) -> Option<Result<f64>> {
        Some(Ok((d.norm() - self.radius).abs()))
    }
    fn radial_bounds(&self) -> Option<(f64, f64)> {
        Some((self.radius, self.radius))
    }
}

/// Ellipsoid Σ x_k²/a_k² = 1 as the radial graph ρ̂(x) = (Σ x_k²/a_k²)^{−1/2}.
pub struct EllipsoidProfile {
    pub semi_axes: Vec<f64>,
}

impl EllipsoidProfile {
    fn q(&self, u: &DVector<f64>) -> f64 {
        u.iter()
            .zip(&self.semi_axes)
            .map(|(x, a)| x * x / (a * a))
            .sum()
    }
    fn grad_q(&self, u: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            u.len(),
            u.iter().zip(&self.semi_axes).map(|(x, a)| 2.0 * x / (a * a)),
        )
    }
}

impl RadialProfile for EllipsoidProfile {
    fn value(&self, u: &DVector<f64>) -> f64 {
        self.q(u).powf(-0.5)
    }
    fn gradient(&self, u: &DVector<f64>) -> DVector<f64> {
        let q = self.q(u);
        self.grad_q(u) * (-0.5 * q.powf(-1.5))
    }
    fn hessian(&self, u: &DVector<f64>) -> DMatrix<f64> {
        let n = u.len();
        let q = self.q(u);
        let gq = self.grad_q(u);
        let mut hq = DMatrix::zeros(n, n);
        for (k, a) in self.semi_axes.iter().enumerate() {
            hq[(k, k)] = 2.0 / (a * a);
        }
        &gq * gq.transpose() * (0.75 * q.powf(-2.5)) - hq * (0.5 * q.powf(-1.5))
    }
    fn exact_surface_distance(&self, d: &DVector<f64>) -> Option<Result<f64>> {
        Some(ellipsoid_distance(&self.semi_axes, d))
    }
    fn radial_bounds(&self) -> Option<(f64, f64)> {
        let lo = self.semi_axes.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.semi_axes.iter().cloned().fold(0.0_f64, f64::max);
        Some((lo, hi))
    }
}

/// Cosine-lobe profile ρ̂(x) = base + amp·T_m(x_0) (Chebyshev T_m), which on
/// the unit sphere reads base + amp·cos(m·angle to the x_0 axis). With m = 2
/// and amp/base large enough this is the standard nonconvex two-lobe curve.
pub struct CosLobeProfile {
    pub base: f64,
    pub amp: f64,
    pub harmonic: usize,
}

/// T_m(t), T_m'(t), T_m''(t) by the differentiated three-term recurrence.
fn chebyshev_jet(m: usize, t: f64) -> (f64, f64, f64) {
    let (mut v0, mut d0, mut s0) = (1.0, 0.0, 0.0);
    if m == 0 {
        return (v0, d0, s0);
    }
    let (mut v1, mut d1, mut s1) = (t, 1.0, 0.0);
    for _ in 2..=m {
        let v2 = 2.0 * t * v1 - v0;
        let d2 = 2.0 * v1 + 2.0 * t * d1 - d0;
        let s2 = 4.0 * d1 + 2.0 * t * s1 - s0;
        (v0, d0, s0) = (v1, d1, s1);
        (v1, d1, s1) = (v2, d2, s2);
    }
    (v1, d1, s1)
}

impl RadialProfile for CosLobeProfile {
    fn value(&self, u: &DVector<f64>) -> f64 {
        self.base + self.amp * chebyshev_jet(self.harmonic, u[0]).0
    }
    fn gradient(&self, u: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(u.len());
        g[0] = self.amp * chebyshev_jet(self.harmonic, u[0]).1;
        g
    }
    fn hessian(&self, u: &DVector<f64>) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(u.len(), u.len());
        h[(0, 0)] = self.amp * chebyshev_jet(self.harmonic, u[0]).2;
        h
    }
}

// ----- hypersurface ---------------------------------------------------------

pub enum SurfaceKind {
    /// X(φ) = center + ρ(u(φ))·u(φ) in the flat model.
    RadialGraph {
        center: DVector<f64>,
        profile: Box<dyn RadialProfile>,
    },
    /// Level set {r = r0} in a radial warped model.
    CoordinateSphere { r0: f64 },
}

pub struct Hypersurface {
    pub kind: SurfaceKind,
}

impl Hypersurface {
    pub fn sphere(center: DVector<f64>, radius: f64) -> Self {
        Hypersurface {
            kind: SurfaceKind::RadialGraph {
                center,
                profile: Box::new(SphereProfile { radius }),
            },
        }
    }
}

/// Full pointwise geometry of the immersion at one parameter value.
pub struct NodeGeometry {
    pub phi: Vec<f64>,
    /// Ambient position: Cartesian in flat models, r0·u chart coordinates in
    /// warped models.
    pub x: DVector<f64>,
    /// Outward unit normal: Cartesian in flat models; in warped models the
    /// radial chart direction, reported as the direction vector u.
    pub nu: DVector<f64>,
    pub g: DMatrix<f64>,
    pub h: DMatrix<f64>,
    /// Area Jacobian √det g.
    pub jac: f64,
    /// Round-sphere Jacobian √det σ of the direction chart (radial volume
    /// integrals use it).
    pub sphere_jac: f64,
    /// Principal curvatures, ascending.
    pub kappa: Vec<f64>,
    pub mean_h: f64,
    pub f: f64,
    pub dnu_f: f64,
    pub h_f: f64,
}

/// One cached quadrature node (geometry plus its quadrature weight).
pub struct SurfaceNode {
    pub phi: Vec<f64>,
    pub x: DVector<f64>,
    pub nu: DVector<f64>,
    pub kappa: Vec<f64>,
    pub mean_h: f64,
    pub f: f64,
    pub dnu_f: f64,
    pub h_f: f64,
    pub jac: f64,
    pub sphere_jac: f64,
    /// Product of angular quadrature weights (multiply by `jac` for dσ).
    pub weight: f64,
}

impl SurfaceNode {
    /// Unweighted surface measure carried by this node.
    pub fn dsigma(&self) -> f64 {
        self.weight * self.jac
    }
}

pub struct QuadratureGrid {
    pub n: usize,
    pub resolution: usize,
    pub nodes: Vec<SurfaceNode>,
    pub warped: bool,
}

/// Angle quadrature rules: polar angles on (0, π), azimuth on (0, 2π).
pub fn angle_rules(n: usize, resolution: usize) -> Vec<MappedRule> {
    let mut rules = Vec::with_capacity(n - 1);
    for _ in 0..n.saturating_sub(2) {
        rules.push(mapped_rule(resolution, 0.0, std::f64::consts::PI));
    }
    rules.push(mapped_rule(resolution, 0.0, 2.0 * std::f64::consts::PI));
    rules
}

/// Pointwise geometry of `hyp` at angles `phi`.
pub fn geometry_at(
    hyp: &Hypersurface,
    ambient: &WeightedAmbient,
    phi: &[f64],
) -> Result<NodeGeometry> {
    let n = ambient.n;
    match &hyp.kind {
        SurfaceKind::RadialGraph { center, profile } => {
            if ambient.model != MetricModel::Flat {
                return Err(Error::Unsupported(
                    "radial graphs require the flat ambient model".into(),
                ));
            }
            radial_graph_geometry(center, profile.as_ref(), ambient, phi)
        }
        SurfaceKind::CoordinateSphere { r0 } => {
            let profile = match &ambient.model {
                MetricModel::RadialWarped { profile, r_min } => {
                    if *r0 < *r_min {
                        return Err(Error::Domain(format!(
                            "coordinate sphere r0 = {r0} below chart minimum {r_min}"
                        )));
                    }
                    profile
                }
                _ => {
                    return Err(Error::Unsupported(
                        "coordinate spheres require a radial warped ambient".into(),
                    ))
                }
            };
            let jet = direction_jet(n, phi);
            let na = n - 1;
            let mut sigma = DMatrix::zeros(na, na);
            for i in 0..na {
                for j in 0..na {
                    sigma[(i, j)] = jet.du[i].dot(&jet.du[j]);
                }
            }
            let det_sigma = sigma.determinant().max(0.0);
            let sphere_jac = det_sigma.sqrt();
            let h_warp = profile.h(*r0);
            let dh = profile.dh(*r0);
            let g = &sigma * (h_warp * h_warp);
            let hform = &sigma * (h_warp * dh);
            let kappa = vec![dh / h_warp; na];
            let mean_h = (n as f64 - 1.0) * dh / h_warp;
            let (f, f1, _) = ambient.weight.radial_profile(*r0).ok_or_else(|| {
                Error::Unsupported("weight kind has no radial profile for this chart".into())
            })?;
            Ok(NodeGeometry {
                phi: phi.to_vec(),
                x: &jet.u * *r0,
                nu: jet.u.clone(),
                g,
                h: hform,
                jac: h_warp.powi(na as i32) * sphere_jac,
                sphere_jac,
                kappa,
                mean_h,
                f,
                dnu_f: f1,
                h_f: mean_h - f1,
            })
        }
    }
}

fn radial_graph_geometry(
    center: &DVector<f64>,
    profile: &dyn RadialProfile,
    ambient: &WeightedAmbient,
    phi: &[f64],
) -> Result<NodeGeometry> {
    let n = ambient.n;
    let na = n - 1;
    let jet = direction_jet(n, phi);
    let rho = profile.value(&jet.u);
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::DegenerateImmersion {
            node: format!("{phi:?}"),
            detail: format!("radius {rho} not positive"),
        });
    }
    let grad = profile.gradient(&jet.u);
    let hess = profile.hessian(&jet.u);
    // Chain rule through the direction jet: exact angular derivatives of ρ.
    let rho_d: Vec<f64> = (0..na).map(|i| grad.dot(&jet.du[i])).collect();
    let mut rho_dd = DMatrix::zeros(na, na);
    for i in 0..na {
        for j in 0..na {
            rho_dd[(i, j)] = (jet.du[i].transpose() * &hess * &jet.du[j])[(0, 0)]
                + grad.dot(&jet.d2u[i][j]);
        }
    }

    let x = center + &jet.u * rho;
    let xi: Vec<DVector<f64>> = (0..na).map(|i| &jet.u * rho_d[i] + &jet.du[i] * rho).collect();

    let mut g = DMatrix::zeros(na, na);
    let mut sigma = DMatrix::zeros(na, na);
    for i in 0..na {
        for j in 0..na {
            g[(i, j)] = xi[i].dot(&xi[j]);
            sigma[(i, j)] = jet.du[i].dot(&jet.du[j]);
        }
    }
    let chol = g.clone().cholesky().ok_or_else(|| Error::DegenerateImmersion {
        node: format!("{phi:?}"),
        detail: "singular first fundamental form".into(),
    })?;
    let det_g: f64 = (0..na).map(|i| chol.l_dirty()[(i, i)].powi(2)).product();
    let sigma_chol = sigma.clone().cholesky().ok_or_else(|| Error::DegenerateImmersion {
        node: format!("{phi:?}"),
        detail: "singular direction chart".into(),
    })?;
    let det_sigma: f64 = (0..na).map(|i| sigma_chol.l_dirty()[(i, i)].powi(2)).product();

    // Outward normal ν ∝ u − (1/ρ)·∇^σρ, the classical radial-graph normal.
    let rho_d_vec = DVector::from_column_slice(&rho_d);
    let sigma_inv_rho = sigma_chol.solve(&rho_d_vec);
    let mut grad_sigma_rho = DVector::zeros(n);
    for i in 0..na {
        grad_sigma_rho += &jet.du[i] * sigma_inv_rho[i];
    }
    let nu_raw = &jet.u - &grad_sigma_rho * (1.0 / rho);
    let nu = &nu_raw / nu_raw.norm();

    let mut hform = DMatrix::zeros(na, na);
    for i in 0..na {
        for j in 0..na {
            let xij = &jet.u * rho_dd[(i, j)]
                + &jet.du[j] * rho_d[i]
                + &jet.du[i] * rho_d[j]
                + &jet.d2u[i][j] * rho;
            hform[(i, j)] = -nu.dot(&xij);
        }
    }

    // Shape operator in an orthonormal tangent frame: B = L⁻¹ h L⁻ᵀ.
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::DegenerateImmersion {
            node: format!("{phi:?}"),
            detail: "non-invertible metric factor".into(),
        })?;
    let b = &linv * &hform * linv.transpose();
    let asym = (&b - b.transpose()).iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if asym > SHAPE_SYMMETRY_TOL {
        return Err(Error::Numerical(format!(
            "shape operator asymmetry {asym:.3e} at node {phi:?}"
        )));
    }
    let sym = (&b + b.transpose()) * 0.5;
    let mut kappa: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().cloned().collect();
    kappa.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mean_h: f64 = kappa.iter().sum();

    let f = ambient.weight_value_cartesian(&x)?;
    let grad_f = ambient.weight_gradient_cartesian(&x)?;
    let dnu_f = grad_f.dot(&nu);
    Ok(NodeGeometry {
        phi: phi.to_vec(),
        x,
        nu,
        g,
        h: hform,
        jac: det_g.sqrt(),
        sphere_jac: det_sigma.sqrt(),
        kappa,
        mean_h,
        f,
        dnu_f,
        h_f: mean_h - dnu_f,
    })
}

/// Dual-path H: Σ g^{ij}⟨∂_iν, X_j⟩ with the normal differentiated by central
/// finite differences in the angles.
fn fd_mean_curvature(
    hyp: &Hypersurface,
    ambient: &WeightedAmbient,
    geo: &NodeGeometry,
) -> Result<f64> {
    let na = geo.phi.len();
    let mut dnu = Vec::with_capacity(na);
    for i in 0..na {
        let mut pp = geo.phi.clone();
        let mut pm = geo.phi.clone();
        pp[i] += H_CHECK_STEP;
        pm[i] -= H_CHECK_STEP;
        let gp = geometry_at(hyp, ambient, &pp)?;
        let gm = geometry_at(hyp, ambient, &pm)?;
        dnu.push((&gp.nu - &gm.nu) / (2.0 * H_CHECK_STEP));
    }
    // X_j from the radial-graph jet, reconstructed by finite differences of x
    // (keeps this path independent of the analytic tangent assembly).
    let mut xj = Vec::with_capacity(na);
    for j in 0..na {
        let mut pp = geo.phi.clone();
        let mut pm = geo.phi.clone();
        pp[j] += H_CHECK_STEP;
        pm[j] -= H_CHECK_STEP;
        let gp = geometry_at(hyp, ambient, &pp)?;
        let gm = geometry_at(hyp, ambient, &pm)?;
        xj.push((&gp.x - &gm.x) / (2.0 * H_CHECK_STEP));
    }
    let mut hmat = DMatrix::zeros(na, na);
    for i in 0..na {
        for j in 0..na {
            hmat[(i, j)] = dnu[i].dot(&xj[j]);
        }
    }
    let ginv = geo
        .g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("metric not invertible in H cross-check".into()))?;
    Ok((ginv * hmat).trace())
}

/// Build the tensor-product quadrature grid with cached per-node geometry.
///
/// Every radial-graph node passes the dual-path H cross-check; failures abort
/// the build (a sign or jet error would silently poison every functional).
pub fn build_quadrature(
    hyp: &Hypersurface,
    ambient: &WeightedAmbient,
    resolution: usize,
) -> Result<QuadratureGrid> {
    if resolution < 4 {
        return Err(Error::InvalidConfig(format!(
            "resolution {resolution} below minimum 4 nodes per angle"
        )));
    }
    if !(2..=6).contains(&ambient.n) {
        return Err(Error::InvalidConfig(format!(
            "surface dimension n = {} outside supported range [2, 6]",
            ambient.n
        )));
    }
    let n = ambient.n;
    let na = n - 1;
    let rules = angle_rules(n, resolution);
    let total: usize = rules.iter().map(|r| r.nodes.len()).product();
    let warped = matches!(hyp.kind, SurfaceKind::CoordinateSphere { .. });

    let nodes: Result<Vec<SurfaceNode>> = (0..total)
        .into_par_iter()
        .map(|flat_idx| {
            let mut rem = flat_idx;
            let mut phi = vec![0.0; na];
            let mut weight = 1.0;
            // Row-major multi-index: last angle varies fastest.
            for d in (0..na).rev() {
                let len = rules[d].nodes.len();
                let i = rem % len;
                rem /= len;
                phi[d] = rules[d].nodes[i];
                weight *= rules[d].weights[i];
            }
            let geo = geometry_at(hyp, ambient, &phi)?;
            if !warped {
                let h_fd = fd_mean_curvature(hyp, ambient, &geo)?;
                let gap = (geo.mean_h - h_fd).abs();
                if gap > H_CHECK_TOL * (1.0 + geo.mean_h.abs()) {
                    return Err(Error::Numerical(format!(
                        "H cross-check gap {gap:.3e} at node {phi:?} (analytic {}, fd {h_fd})",
                        geo.mean_h
                    )));
                }
            }
            Ok(SurfaceNode {
                phi: geo.phi,
                x: geo.x,
                nu: geo.nu,
                kappa: geo.kappa,
                mean_h: geo.mean_h,
                f: geo.f,
                dnu_f: geo.dnu_f,
                h_f: geo.h_f,
                jac: geo.jac,
                sphere_jac: geo.sphere_jac,
                weight,
            })
        })
        .collect();
    Ok(QuadratureGrid {
        n,
        resolution,
        nodes: nodes?,
        warped,
    })
}

/// |∂Ω|_f = Σ wᵢ Jᵢ e^{−fᵢ}.
pub fn weighted_area(grid: &QuadratureGrid) -> f64 {
    let terms: Vec<f64> = grid
        .nodes
        .iter()
        .map(|nd| nd.dsigma() * (-nd.f).exp())
        .collect();
    pairwise_sum(&terms)
}

/// Unweighted area Σ wᵢ Jᵢ.
pub fn area(grid: &QuadratureGrid) -> f64 {
    let terms: Vec<f64> = grid.nodes.iter().map(SurfaceNode::dsigma).collect();
    pairwise_sum(&terms)
}

/// |Ω|_f of the enclosed region by nested quadrature: angles from the grid,
/// radius by Gauss–Legendre with `radial_resolution` points per ray.
pub fn weighted_enclosed_volume(
    hyp: &Hypersurface,
    ambient: &WeightedAmbient,
    grid: &QuadratureGrid,
    radial_resolution: usize,
) -> Result<f64> {
    let n = ambient.n;
    match &hyp.kind {
        SurfaceKind::RadialGraph { center, profile } => {
            let terms: Result<Vec<f64>> = grid
                .nodes
                .par_iter()
                .map(|nd| {
                    let jet = direction_jet(n, &nd.phi);
                    let rho = profile.value(&jet.u);
                    let rule = mapped_rule(radial_resolution, 0.0, rho);
                    let mut vals = Vec::with_capacity(rule.nodes.len());
                    for (s, w) in rule.nodes.iter().zip(&rule.weights) {
                        let x = center + &jet.u * *s;
                        let f = ambient.weight_value_cartesian(&x)?;
                        vals.push(w * (-f).exp() * s.powi(n as i32 - 1));
                    }
                    Ok(nd.weight * nd.sphere_jac * pairwise_sum(&vals))
                })
                .collect();
            Ok(pairwise_sum(&terms?))
        }
        SurfaceKind::CoordinateSphere { r0 } => {
            let profile = match &ambient.model {
                MetricModel::RadialWarped { profile, .. } => profile,
                _ => {
                    return Err(Error::Unsupported(
                        "coordinate spheres require a radial warped ambient".into(),
                    ))
                }
            };
            // Warped volume element h(s)^{n−1} ds dσ; the apex is integrable.
            let rule = mapped_rule(radial_resolution.max(64), 0.0, *r0);
            let mut vals = Vec::with_capacity(rule.nodes.len());
            for (s, w) in rule.nodes.iter().zip(&rule.weights) {
                let (f, _, _) = ambient.weight.radial_profile(*s).ok_or_else(|| {
                    Error::Unsupported("weight kind has no radial profile for this chart".into())
                })?;
                vals.push(w * (-f).exp() * profile.h(*s).powi(n as i32 - 1));
            }
            Ok(crate::specfn::sphere_measure(n as f64) * pairwise_sum(&vals))
        }
    }
}

// ----- tangential operators -------------------------------------------------

/// Tangential data of a boundary scalar z at angles `phi`: (|∇_Σ z|²_g,
/// h(∇_Σ z, ∇_Σ z)), by central finite differences of z over the angles.
pub fn surface_gradient_forms(
    hyp: &Hypersurface,
    ambient: &WeightedAmbient,
    phi: &[f64],
    z: &dyn Fn(&[f64]) -> f64,
) -> Result<(f64, f64)> {
    let geo = geometry_at(hyp, ambient, phi)?;
    let na = phi.len();
    let mut dz = DVector::zeros(na);
    for i in 0..na {
        let mut pp = phi.to_vec();
        let mut pm = phi.to_vec();
        pp[i] += SURFACE_FD_STEP;
        pm[i] -= SURFACE_FD_STEP;
        dz[i] = (z(&pp) - z(&pm)) / (2.0 * SURFACE_FD_STEP);
    }
    let ginv = geo
        .g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("metric not invertible for tangential forms".into()))?;
    let v = &ginv * &dz; // contravariant gradient components
    let grad_sq = dz.dot(&v);
    let h_vv = (v.transpose() * &geo.h * &v)[(0, 0)];
    Ok((grad_sq, h_vv))
}

/// Weighted surface Laplacian Δ_{f,Σ} z = e^{f}/√g · ∂_i(e^{−f}√g g^{ij} ∂_j z)
/// at angles `phi`, by nested central finite differences.
pub fn surface_f_laplacian(
    hyp: &Hypersurface,
    ambient: &WeightedAmbient,
    phi: &[f64],
    z: &dyn Fn(&[f64]) -> f64,
) -> Result<f64> {
    let na = phi.len();
    let flux = |p: &[f64]| -> Result<DVector<f64>> {
        let geo = geometry_at(hyp, ambient, p)?;
        let mut dz = DVector::zeros(na);
        for j in 0..na {
            let mut pp = p.to_vec();
            let mut pm = p.to_vec();
            pp[j] += SURFACE_FD_STEP;
            pm[j] -= SURFACE_FD_STEP;
            dz[j] = (z(&pp) - z(&pm)) / (2.0 * SURFACE_FD_STEP);
        }
        let ginv = geo
            .g
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("metric not invertible for surface flux".into()))?;
        Ok(ginv * dz * ((-geo.f).exp() * geo.jac))
    };
    let mut div = 0.0;
    for i in 0..na {
        let mut pp = phi.to_vec();
        let mut pm = phi.to_vec();
        pp[i] += SURFACE_FD_STEP;
        pm[i] -= SURFACE_FD_STEP;
        div += (flux(&pp)?[i] - flux(&pm)?[i]) / (2.0 * SURFACE_FD_STEP);
    }
    let geo = geometry_at(hyp, ambient, phi)?;
    Ok(div * geo.f.exp() / geo.jac)
}

// ----- distance oracles -----------------------------------------------------

/// Exact (or refined-to-machine) distance from `y` to the closed body Ω̄
/// bounded by `hyp`: zero inside, nearest-surface distance outside.
pub fn body_distance(hyp: &Hypersurface, y: &DVector<f64>) -> Result<f64> {
    match &hyp.kind {
        SurfaceKind::RadialGraph { center, profile } => {
            let d = y - center;
            let r = d.norm();
            if r < 1e-300 {
                return Ok(0.0);
            }
            let dir = &d / r;
            let rho = profile.value(&dir);
            if r <= rho {
                return Ok(0.0);
            }
            surface_distance(hyp, y)
        }
        SurfaceKind::CoordinateSphere { .. } => Err(Error::Unsupported(
            "body distance is a flat-chart oracle".into(),
        )),
    }
}

/// Distance from `y` to the hypersurface itself (both sides).
pub fn surface_distance(hyp: &Hypersurface, y: &DVector<f64>) -> Result<f64> {
    match &hyp.kind {
        SurfaceKind::RadialGraph { center, profile } => {
            let d = y - center;
            match profile.exact_surface_distance(&d) {
                Some(result) => result,
                None => dense_profile_distance(profile.as_ref(), &d),
            }
        }
        SurfaceKind::CoordinateSphere { .. } => Err(Error::Unsupported(
            "surface distance is a flat-chart oracle".into(),
        )),
    }
}

/// Nearest-point distance to the ellipsoid Σ x_i²/a_i² = 1 via the secular
/// equation Σ (a_i y_i/(a_i²+t))² = 1; the largest root gives the foot point
/// x_i = a_i² y_i/(a_i²+t).
fn ellipsoid_distance(semi_axes: &[f64], y: &DVector<f64>) -> Result<f64> {
    let f = |t: f64| -> f64 {
        y.iter()
            .zip(semi_axes)
            .map(|(yi, ai)| {
                let s = ai * yi / (ai * ai + t);
                s * s
            })
            .sum::<f64>()
            - 1.0
    };
    let min_a2 = semi_axes.iter().map(|a| a * a).fold(f64::INFINITY, f64::min);
    let mut lo = -min_a2 + 1e-12 * (1.0 + min_a2);
    if f(lo) < 0.0 {
        // y essentially at the center: distance is min semi-axis.
        return Ok(semi_axes.iter().cloned().fold(f64::INFINITY, f64::min));
    }
    let mut hi = 1.0_f64.max(min_a2);
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e30 {
            return Err(Error::Numerical("ellipsoid secular bracket failed".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() <= SECULAR_TOL * (1.0 + hi.abs()) {
            break;
        }
    }
    let t = 0.5 * (lo + hi);
    let dist_sq: f64 = y
        .iter()
        .zip(semi_axes)
        .map(|(yi, ai)| {
            let s = t * yi / (ai * ai + t);
            s * s
        })
        .sum();
    Ok(dist_sq.sqrt())
}

/// Dense angular sampling plus golden-section refinement around every local
/// minimum; exact up to solver tolerance for smooth profiles in the plane,
/// dense-sampling accurate otherwise.
fn dense_profile_distance(profile: &dyn RadialProfile, y: &DVector<f64>) -> Result<f64> {
    let n = y.len();
    if n != 2 {
        return Err(Error::Unsupported(
            "dense nearest-point refinement is implemented for plane curves".into(),
        ));
    }
    let coarse = 4096usize;
    let dist_at = |t: f64| -> f64 {
        let u = DVector::from_column_slice(&[t.cos(), t.sin()]);
        let rho = profile.value(&u);
        (y - u * rho).norm()
    };
    let step = 2.0 * std::f64::consts::PI / coarse as f64;
    let d: Vec<f64> = (0..coarse).map(|i| dist_at(i as f64 * step)).collect();
    let mut best = f64::INFINITY;
    for i in 0..coarse {
        let prev = d[(i + coarse - 1) % coarse];
        let next = d[(i + 1) % coarse];
        if d[i] <= prev && d[i] <= next {
            // Golden-section refinement on the bracketing interval.
            let (mut a, mut b) = ((i as f64 - 1.0) * step, (i as f64 + 1.0) * step);
            let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
            let mut c = b - inv_phi * (b - a);
            let mut e = a + inv_phi * (b - a);
            let (mut fc, mut fe) = (dist_at(c), dist_at(e));
            for _ in 0..80 {
                if fc < fe {
                    b = e;
                    e = c;
                    fe = fc;
                    c = b - inv_phi * (b - a);
                    fc = dist_at(c);
                } else {
                    a = c;
                    c = e;
                    fc = fe;
                    e = a + inv_phi * (b - a);
                    fe = dist_at(e);
                }
            }
            best = best.min(fc.min(fe));
        }
    }
    Ok(best)
}

/// Maximum radius of the graph over the quadrature nodes (bounding-box aid).
pub fn max_radius(grid: &QuadratureGrid, center: &DVector<f64>) -> f64 {
    grid.nodes
        .iter()
        .map(|nd| (&nd.x - center).norm())
        .fold(0.0, f64::max)
}

// ----- CSV export -----------------------------------------------------------

/// Grid CSV: theta..., x..., H, H_f, f, dsigma.
pub fn grid_csv(grid: &QuadratureGrid) -> String {
    let mut out = String::new();
    let na = grid.n - 1;
    for i in 0..na {
        out.push_str(&format!("theta{},", i + 1));
    }
    for i in 0..grid.n {
        out.push_str(&format!("x{},", i + 1));
    }
    out.push_str("H,H_f,f,dsigma\n");
    for nd in &grid.nodes {
        for v in &nd.phi {
            out.push_str(&format!("{v:.17e},"));
        }
        for v in nd.x.iter() {
            out.push_str(&format!("{v:.17e},"));
        }
        out.push_str(&format!(
            "{:.17e},{:.17e},{:.17e},{:.17e}\n",
            nd.mean_h,
            nd.h_f,
            nd.f,
            nd.dsigma()
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::{WarpProfile, WeightFunction, WeightKind};
    use std::f64::consts::PI;

    fn flat(n: usize) -> WeightedAmbient {
        WeightedAmbient::flat(n, WeightFunction::new(WeightKind::Zero))
    }

    fn gaussian(n: usize) -> WeightedAmbient {
        WeightedAmbient::flat(n, WeightFunction::new(WeightKind::Gaussian { lambda: 0.25 }))
    }

    #[test]
    fn direction_jet_is_unit_with_exact_derivatives() {
        for (n, phi) in [
            (2, vec![0.7]),
            (3, vec![1.1, 2.3]),
            (4, vec![0.9, 1.7, 4.0]),
            (6, vec![0.5, 1.2, 2.0, 1.0, 3.3]),
        ] {
            let jet = direction_jet(n, &phi);
            assert!((jet.u.norm() - 1.0).abs() < 1e-14);
            let h = 1e-6;
            for i in 0..n - 1 {
                let mut pp = phi.clone();
                let mut pm = phi.clone();
                pp[i] += h;
                pm[i] -= h;
                let up = direction_jet(n, &pp).u;
                let um = direction_jet(n, &pm).u;
                let fd = (&up - &um) / (2.0 * h);
                assert!((fd - &jet.du[i]).norm() < 1e-9);
                for j in 0..n - 1 {
                    let fd2 = (&direction_jet(n, &pp).du[j] - &direction_jet(n, &pm).du[j])
                        / (2.0 * h);
                    assert!((fd2 - &jet.d2u[i][j]).norm() < 1e-9, "n={n} i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn unit_sphere_geometry() {
        let amb = flat(3);
        let hyp = Hypersurface::sphere(DVector::zeros(3), 1.0);
        let geo = geometry_at(&hyp, &amb, &[1.0, 2.0]).unwrap();
        assert!((geo.mean_h - 2.0).abs() < 1e-12);
        assert!((geo.h_f - 2.0).abs() < 1e-12);
        assert!((geo.nu - &geo.x).norm() < 1e-12);
        for k in &geo.kappa {
            assert!((k - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_sphere_weighted_curvature() {
        for (n, rho) in [(3usize, 1.0f64), (3, 2.0), (2, 1.0), (5, 1.5)] {
            let amb = gaussian(n);
            let hyp = Hypersurface::sphere(DVector::zeros(n), rho);
            let phi: Vec<f64> = (0..n - 1).map(|i| 0.8 + 0.3 * i as f64).collect();
            let geo = geometry_at(&hyp, &amb, &phi).unwrap();
            let nf = n as f64;
            assert!((geo.mean_h - (nf - 1.0) / rho).abs() < 1e-11);
            assert!((geo.dnu_f - rho / 2.0).abs() < 1e-12);
            assert!((geo.h_f - ((nf - 1.0) / rho - rho / 2.0)).abs() < 1e-11);
        }
    }

    #[test]
    fn ellipsoid_dual_path_curvature() {
        let amb = flat(3);
        // Long axis along x2 (interior chart point): tip (0, 2, 0) has both
        // principal curvatures a/b² = 2; flank point (0, 0, 1) mixes 1/4, ...
        let hyp = Hypersurface {
            kind: SurfaceKind::RadialGraph {
                center: DVector::zeros(3),
                profile: Box::new(EllipsoidProfile { semi_axes: vec![1.0, 2.0, 1.0] }),
            },
        };
        let tip = geometry_at(&hyp, &amb, &[PI / 2.0, 0.0]).unwrap();
        assert!((tip.x[1] - 2.0).abs() < 1e-12);
        assert!((tip.mean_h - 4.0).abs() < 1e-10, "H = {}", tip.mean_h);
        let fd = fd_mean_curvature(&hyp, &amb, &tip).unwrap();
        assert!((tip.mean_h - fd).abs() < 1e-6);

        // Flank (0, 0, 1): sections curve at 1 (unit circle) and 1/4.
        let flank = geometry_at(&hyp, &amb, &[PI / 2.0, PI / 2.0]).unwrap();
        assert!((flank.x[2] - 1.0).abs() < 1e-12);
        assert!((flank.mean_h - 1.25).abs() < 1e-10);
        let fd = fd_mean_curvature(&hyp, &amb, &flank).unwrap();
        assert!((flank.mean_h - fd).abs() < 1e-6);
    }

    #[test]
    fn sphere_area_spectral_accuracy() {
        let amb = flat(3);
        let hyp = Hypersurface::sphere(DVector::zeros(3), 1.0);
        let grid = build_quadrature(&hyp, &amb, 32).unwrap();
        let a = area(&grid);
        assert!((a - 4.0 * PI).abs() < 4.0 * PI * 1e-10, "area {a}");

        let amb2 = flat(2);
        let circle = Hypersurface::sphere(DVector::zeros(2), 1.0);
        let grid2 = build_quadrature(&circle, &amb2, 64).unwrap();
        assert!((area(&grid2) - 2.0 * PI).abs() < 2.0 * PI * 1e-12);

        let circle2 = Hypersurface::sphere(DVector::zeros(2), 2.0);
        let grid2b = build_quadrature(&circle2, &amb2, 64).unwrap();
        assert!((area(&grid2b) - 4.0 * PI).abs() < 4.0 * PI * 1e-12);
    }

    #[test]
    fn ellipsoid_area_converges_under_refinement() {
        let amb = flat(3);
        let hyp = Hypersurface {
            kind: SurfaceKind::RadialGraph {
                center: DVector::zeros(3),
                profile: Box::new(EllipsoidProfile { semi_axes: vec![2.0, 1.0, 1.0] }),
            },
        };
        let a16 = area(&build_quadrature(&hyp, &amb, 16).unwrap());
        let a32 = area(&build_quadrature(&hyp, &amb, 32).unwrap());
        let a64 = area(&build_quadrature(&hyp, &amb, 64).unwrap());
        let d1 = (a16 - a32).abs();
        let d2 = (a32 - a64).abs().max(1e-16);
        assert!(d1 / d2 >= 10.0, "differences {d1:.3e} vs {d2:.3e}");
    }

    #[test]
    fn weighted_area_examples() {
        let amb = gaussian(3);
        let hyp = Hypersurface::sphere(DVector::zeros(3), 1.0);
        let grid = build_quadrature(&hyp, &amb, 24).unwrap();
        let expect = 4.0 * PI * (-0.25_f64).exp();
        assert!((weighted_area(&grid) - expect).abs() < expect * 1e-10);
    }

    #[test]
    fn enclosed_volume_examples() {
        let amb = flat(3);
        let hyp = Hypersurface::sphere(DVector::zeros(3), 1.0);
        let grid = build_quadrature(&hyp, &amb, 24).unwrap();
        let v = weighted_enclosed_volume(&hyp, &amb, &grid, 48).unwrap();
        let expect = 4.0 * PI / 3.0;
        assert!((v - expect).abs() < expect * 1e-10, "vol {v}");

        let amb2 = flat(2);
        let disk = Hypersurface::sphere(DVector::zeros(2), 1.0);
        let grid2 = build_quadrature(&disk, &amb2, 24).unwrap();
        let v2 = weighted_enclosed_volume(&disk, &amb2, &grid2, 48).unwrap();
        assert!((v2 - PI).abs() < PI * 1e-10);

        // Gaussian mass: ball radius 8 captures ∫ e^{−|x|²/4} = (4π)^{3/2}.
        let amb3 = gaussian(3);
        let big = Hypersurface::sphere(DVector::zeros(3), 8.0);
        let grid3 = build_quadrature(&big, &amb3, 16).unwrap();
        let v3 = weighted_enclosed_volume(&big, &amb3, &grid3, 96).unwrap();
        let expect3 = (4.0 * PI).powf(1.5);
        assert!((v3 - expect3).abs() < 1e-6 * expect3, "vol {v3} vs {expect3}");
    }

    #[test]
    fn coordinate_sphere_in_cone() {
        let amb = WeightedAmbient {
            n: 3,
            model: MetricModel::RadialWarped {
                profile: WarpProfile::Linear { slope: 1.0 },
                r_min: 0.25,
            },
            weight: WeightFunction::new(WeightKind::Zero),
            m_synthetic: None,
        };
        let hyp = Hypersurface { kind: SurfaceKind::CoordinateSphere { r0: 1.0 } };
        let grid = build_quadrature(&hyp, &amb, 24).unwrap();
        assert!((area(&grid) - 4.0 * PI).abs() < 4.0 * PI * 1e-10);
        let geo = geometry_at(&hyp, &amb, &[1.0, 1.0]).unwrap();
        assert!((geo.mean_h - 2.0).abs() < 1e-12);
        assert!((geo.h_f - 2.0).abs() < 1e-12);
        let v = weighted_enclosed_volume(&hyp, &amb, &grid, 64).unwrap();
        assert!((v - 4.0 * PI / 3.0).abs() < 1e-10 * v);

        // Deficit cone: area and volume scale by slope^{n-1}.
        let amb2 = WeightedAmbient {
            n: 3,
            model: MetricModel::RadialWarped {
                profile: WarpProfile::Linear { slope: 0.75 },
                r_min: 0.25,
            },
            weight: WeightFunction::new(WeightKind::Zero),
            m_synthetic: None,
        };
        let grid2 = build_quadrature(&hyp, &amb2, 24).unwrap();
        let scale = 0.75f64.powi(2);
        assert!((area(&grid2) - 4.0 * PI * scale).abs() < 1e-10 * area(&grid2));
        let v2 = weighted_enclosed_volume(&hyp, &amb2, &grid2, 64).unwrap();
        assert!((v2 - 4.0 * PI / 3.0 * scale).abs() < 1e-10 * v2);
    }

    #[test]
    fn convex_bodies_have_positive_h() {
        let amb = flat(3);
        for hyp in [
            Hypersurface::sphere(DVector::zeros(3), 2.0),
            Hypersurface {
                kind: SurfaceKind::RadialGraph {
                    center: DVector::zeros(3),
                    profile: Box::new(EllipsoidProfile { semi_axes: vec![2.0, 1.0, 1.0] }),
                },
            },
        ] {
            let grid = build_quadrature(&hyp, &amb, 16).unwrap();
            let min_h = grid.nodes.iter().map(|n| n.mean_h).fold(f64::INFINITY, f64::min);
            assert!(min_h > 0.0);
        }
    }

    #[test]
    fn two_lobe_curve_has_negative_weighted_curvature_nodes() {
        let amb = flat(2);
        let hyp = Hypersurface {
            kind: SurfaceKind::RadialGraph {
                center: DVector::zeros(2),
                profile: Box::new(CosLobeProfile { base: 1.0, amp: 0.5, harmonic: 2 }),
            },
        };
        let grid = build_quadrature(&hyp, &amb, 64).unwrap();
        let min_hf = grid.nodes.iter().map(|n| n.h_f).fold(f64::INFINITY, f64::min);
        assert!(min_hf < 0.0, "min H_f = {min_hf}");
        // ρ(θ) = 1 + 0.5·cos 2θ at θ = 0 gives the lobe tip radius 1.5.
        let geo = geometry_at(&hyp, &amb, &[0.0]).unwrap();
        assert!((geo.x.norm() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn distance_oracles() {
        // Sphere: exact closed form.
        let hyp = Hypersurface::sphere(DVector::zeros(3), 1.0);
        let y = DVector::from_column_slice(&[0.0, 0.0, 2.5]);
        assert!((body_distance(&hyp, &y).unwrap() - 1.5).abs() < 1e-14);
        let inside = DVector::from_column_slice(&[0.1, 0.2, 0.3]);
        assert_eq!(body_distance(&hyp, &inside).unwrap(), 0.0);
        assert!((surface_distance(&hyp, &inside).unwrap() - (1.0 - inside.norm())).abs() < 1e-14);

        // Ellipsoid secular equation vs known feet.
        let ell = Hypersurface {
            kind: SurfaceKind::RadialGraph {
                center: DVector::zeros(3),
                profile: Box::new(EllipsoidProfile { semi_axes: vec![2.0, 1.0, 1.0] }),
            },
        };
        let y = DVector::from_column_slice(&[3.0, 0.0, 0.0]);
        assert!((surface_distance(&ell, &y).unwrap() - 1.0).abs() < 1e-10);
        let y = DVector::from_column_slice(&[0.0, 2.0, 0.0]);
        assert!((surface_distance(&ell, &y).unwrap() - 1.0).abs() < 1e-10);
        // Generic exterior point: verify against dense sampling of the surface.
        let y = DVector::from_column_slice(&[1.5, 1.0, -0.7]);
        let exact = surface_distance(&ell, &y).unwrap();
        let amb = flat(3);
        let grid = build_quadrature(&ell, &amb, 64).unwrap();
        let sampled = grid
            .nodes
            .iter()
            .map(|nd| (&y - &nd.x).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(sampled >= exact - 1e-12);
        assert!(sampled - exact < 1e-2);

        // Plane curve: golden-section refined distance agrees with a sphere
        // special case when the lobe degenerates to a circle.
        let circle_as_lobe = Hypersurface {
            kind: SurfaceKind::RadialGraph {
                center: DVector::zeros(2),
                profile: Box::new(CosLobeProfile { base: 1.0, amp: 0.0, harmonic: 2 }),
            },
        };
        let y = DVector::from_column_slice(&[2.0, 0.5]);
        let d = surface_distance(&circle_as_lobe, &y).unwrap();
        assert!((d - (y.norm() - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn cached_grid_matches_reevaluation() {
        let amb = gaussian(3);
        let hyp = Hypersurface::sphere(DVector::from_column_slice(&[1.0, 0.0, 0.0]), 0.5);
        let grid = build_quadrature(&hyp, &amb, 8).unwrap();
        let nd = &grid.nodes[17];
        let geo = geometry_at(&hyp, &amb, &nd.phi).unwrap();
        assert!((&geo.x - &nd.x).norm() < 1e-14);
        assert!((geo.mean_h - nd.mean_h).abs() < 1e-14);
        assert!((geo.h_f - nd.h_f).abs() < 1e-14);
        assert!((geo.jac - nd.jac).abs() < 1e-14);
    }

    #[test]
    fn tangential_operators_vanish_for_zero_trace() {
        let amb = gaussian(3);
        let hyp = Hypersurface::sphere(DVector::zeros(3), 1.0);
        let zero = |_: &[f64]| 0.0;
        let (gsq, hvv) = surface_gradient_forms(&hyp, &amb, &[1.0, 2.0], &zero).unwrap();
        assert_eq!(gsq, 0.0);
        assert_eq!(hvv, 0.0);
        let lap = surface_f_laplacian(&hyp, &amb, &[1.0, 2.0], &zero).unwrap();
        assert_eq!(lap, 0.0);
    }

    #[test]
    fn surface_laplacian_on_sphere_eigenfunction() {
        // On the unit sphere, z = x_3 restricted is a spherical harmonic with
        // Δ_Σ z = −2z; f radial ⇒ ∇_Σ f = 0 so Δ_{f,Σ} = Δ_Σ.
        let amb = gaussian(3);
        let hyp = Hypersurface::sphere(DVector::zeros(3), 1.0);
        let z = |phi: &[f64]| direction_jet(3, phi).u[2];
        let phi = [1.1, 0.7];
        let lap = surface_f_laplacian(&hyp, &amb, &phi, &z).unwrap();
        let zval = z(&phi);
        assert!((lap + 2.0 * zval).abs() < 1e-6, "lap {lap} vs {}", -2.0 * zval);
    }
}
