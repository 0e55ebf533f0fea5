//! Gauss-Legendre rules, adaptive panel integration and integration of
//! tabulated samples.

use crate::error::{KgError, Result};
use crate::model::{RadialGrid, Spacing};

/// An `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integral of `f` over `[a, b]`.
    pub fn integrate(&self, f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
    }
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Adaptive bisection of a panel until the rule agrees with the sum over
/// its halves to within `tol` (absolute). Panels whose change is at the
/// rounding level of the whole integral are accepted as converged.
pub fn adaptive(rule: &GaussLegendre, f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        rule: &GaussLegendre,
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        floor: f64,
        depth: u32,
    ) -> Result<f64> {
        let mid = 0.5 * (a + b);
        let left = rule.integrate(f, a, mid);
        let right = rule.integrate(f, mid, b);
        let split = left + right;
        if !split.is_finite() {
            return Err(KgError::QuadratureFailure(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        if (split - whole).abs() <= tol.max(floor) {
            return Ok(split);
        }
        if depth == 0 {
            return Err(KgError::QuadratureFailure(format!(
                "panel [{a}, {b}] did not converge (estimate change {:e})",
                (split - whole).abs()
            )));
        }
        Ok(recurse(rule, f, a, mid, left, 0.5 * tol, floor, depth - 1)?
            + recurse(rule, f, mid, b, right, 0.5 * tol, floor, depth - 1)?)
    }
    let whole = rule.integrate(f, a, b);
    let floor = 4.0 * f64::EPSILON * whole.abs();
    recurse(rule, f, a, b, whole, tol, floor, 30)
}

/// Integral of tabulated `values` over the grid, from `0` to `r_max`.
///
/// The interior is integrated with composite Simpson in `r` (uniform grids)
/// or in `ln r` (log grids); an odd interval count falls back to the
/// 3/8 rule on the last three intervals. The gap `[0, r_1]` is added
/// assuming a local power law `f ~ r^a` fitted to the first two samples.
pub fn integrate_samples(grid: &RadialGrid, values: &[f64]) -> f64 {
    let r = grid.points();
    assert_eq!(r.len(), values.len(), "sample count must match grid");
    let (step, integrand): (f64, Vec<f64>) = match grid.spacing() {
        Spacing::Uniform => (r[1] - r[0], values.to_vec()),
        Spacing::LogUniform => (
            (r[r.len() - 1] / r[0]).ln() / (r.len() - 1) as f64,
            values.iter().zip(r).map(|(f, r)| f * r).collect(),
        ),
    };
    if grid.spacing() == Spacing::Uniform && starts_at_first_step(r) && vanishes_at_origin(r, values) {
        let mut with_origin = Vec::with_capacity(integrand.len() + 1);
        with_origin.push(0.0);
        with_origin.extend_from_slice(&integrand);
        return simpson(&with_origin, step);
    }
    simpson(&integrand, step) + origin_piece(r, values)
}

fn starts_at_first_step(r: &[f64]) -> bool {
    ((r[1] - r[0]) - r[0]).abs() <= 1e-9 * r[0]
}

/// True when the first two samples follow a power law with positive exponent.
fn vanishes_at_origin(r: &[f64], f: &[f64]) -> bool {
    let (f1, f2) = (f[0], f[1]);
    if f1 == 0.0 {
        return true;
    }
    if f2 == 0.0 || (f1 > 0.0) != (f2 > 0.0) {
        return false;
    }
    (f2 / f1).ln() / (r[1] / r[0]).ln() > 0.0
}

fn origin_piece(r: &[f64], f: &[f64]) -> f64 {
    let (r1, r2, f1, f2) = (r[0], r[1], f[0], f[1]);
    if f1 == 0.0 {
        return 0.0;
    }
    if f2 == 0.0 || (f1 > 0.0) != (f2 > 0.0) {
        // No power law to fit; trapezoid from the origin.
        return 0.5 * r1 * f1;
    }
    let a = (f2 / f1).ln() / (r2 / r1).ln();
    if a <= -1.0 {
        return 0.5 * r1 * f1;
    }
    r1 * f1 / (a + 1.0)
}

fn simpson(f: &[f64], h: f64) -> f64 {
    let n = f.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (f[0] + f[1]),
        3 => h / 3.0 * (f[0] + 4.0 * f[1] + f[2]),
        _ => {
            let intervals = n - 1;
            let (simpson_end, tail) = if intervals.is_multiple_of(2) {
                (n - 1, 0.0)
            } else {
                let k = n - 4;
                (k, 3.0 * h / 8.0 * (f[k] + 3.0 * f[k + 1] + 3.0 * f[k + 2] + f[k + 3]))
            };
            let mut s = f[0] + f[simpson_end];
            for (i, v) in f.iter().enumerate().take(simpson_end).skip(1) {
                s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            h / 3.0 * s + tail
        }
    }
}
