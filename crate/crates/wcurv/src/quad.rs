//! One-dimensional Gauss–Legendre rules, composite panel integration, and
//! deterministic summation.
//!
//! All reductions in this crate go through [`pairwise_sum`] so that results are
//! independent of thread count and run order.

/// Convergence guard for the Newton iteration on Legendre roots.
const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 32;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1],
/// nodes in ascending order.
///
/// Roots of P_n by Newton iteration from the Chebyshev-based initial guess;
/// converges to machine precision for all practical n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // i-th root counted from the right; standard asymptotic initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..NEWTON_MAX_ITER {
            let (p, d) = legendre_with_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() <= NEWTON_TOL {
                break;
            }
        }
        // One clean-up evaluation so the weight uses the converged abscissa.
        let (_, dp) = legendre_with_derivative(n, x);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A Gauss–Legendre rule mapped to a concrete interval.
#[derive(Debug, Clone)]
pub struct MappedRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// The `n`-point rule on [a, b].
pub fn mapped_rule(n: usize, a: f64, b: f64) -> MappedRule {
    let (xs, ws) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    MappedRule {
        nodes: xs.iter().map(|x| mid + half * x).collect(),
        weights: ws.iter().map(|w| w * half).collect(),
    }
}

/// ∫_a^b f with a single `pts`-point rule.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, pts: usize) -> f64 {
    let rule = mapped_rule(pts, a, b);
    let terms: Vec<f64> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(x, w)| w * f(*x))
        .collect();
    pairwise_sum(&terms)
}

/// ∫ over consecutive panels given by `breaks` (ascending), `pts` points each.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: F, breaks: &[f64], pts: usize) -> f64 {
    let per_panel: Vec<f64> = breaks
        .windows(2)
        .map(|ab| integrate(&f, ab[0], ab[1], pts))
        .collect();
    pairwise_sum(&per_panel)
}

/// Cumulative ∫_{grid[0]}^{grid[i]} f for every i, sharing panel work:
/// result[0] = 0, result[i] = result[i-1] + ∫ over panel i.
pub fn cumulative_integral<F: Fn(f64) -> f64>(f: F, grid: &[f64], pts: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    out.push(0.0);
    for ab in grid.windows(2) {
        acc += integrate(&f, ab[0], ab[1], pts);
        out.push(acc);
    }
    out
}

/// Panel boundaries from `a` to `b`: first panel width `first`, widths growing
/// geometrically by `ratio`, last break clamped to `b`. Always contains both
/// endpoints; degenerate ranges give `[a, b]`.
pub fn geometric_breaks(a: f64, b: f64, first: f64, ratio: f64) -> Vec<f64> {
    assert!(b >= a && first > 0.0 && ratio >= 1.0);
    let mut breaks = vec![a];
    let mut w = first;
    let mut x = a;
    while x + w < b {
        x += w;
        breaks.push(x);
        w *= ratio;
    }
    if *breaks.last().unwrap() < b {
        breaks.push(b);
    }
    if breaks.len() == 1 {
        breaks.push(b);
    }
    breaks
}

/// Deterministic pairwise (cascade) summation. Fixed reduction tree given the
/// slice order, so totals are identical run to run and thread count plays no
/// part in rounding.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}
