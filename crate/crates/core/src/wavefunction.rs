//! Normalized Coulomb wavefunctions, spherical harmonics, probability
//! currents and diagnostic residuals.
//!
//! The radial function of state `(n, l)` is
//!
//! ```text
//! R(r) = N e^{-rho/2} rho^{l - sigma_l} L(rho),    rho = 2 Z r / ((n - sigma_l) a0)
//! ```
//!
//! with `L` the relativistic Laguerre polynomial and `a0 = hbar^2 / (m e_s^2)`
//! evaluated at the system mass `m` of the state. The sign is chosen so that
//! `R > 0` just outside the origin.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::coulomb::energy_level;
use crate::error::{KgError, Result};
use crate::model::{validate_params, PhysicalParams, QuantumNumbers, RadialGrid};
use crate::quadrature::{adaptive, integrate_samples, GaussLegendre};
use crate::special::{laguerre_rel, LaguerreRel};

/// Upper limit of the normalization integral in units of `rho`, per `n^2`.
const RHO_MAX_PER_N2: f64 = 80.0;

/// A normalized radial Coulomb wavefunction.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialWavefunction {
    pub qn: QuantumNumbers,
    /// `rho / r`.
    pub rho_scale: f64,
    /// `N`, including the sign that makes `R(0+) > 0`.
    pub normalization: f64,
    pub poly: LaguerreRel,
    /// Power `l - sigma_l` of the `rho` prefactor.
    pub exponent: f64,
    pub e_prime: f64,
    pub system_mass: f64,
}

/// Builds the normalized radial function of `(n, l)` for the Coulomb vector potential.
pub fn build_radial(p: &PhysicalParams, n: u32, l: u32) -> Result<RadialWavefunction> {
    let qn = QuantumNumbers::radial(n, l)?;
    validate_params(*p, qn)?;
    let level = energy_level(p, n, l)?;
    let poly = laguerre_rel(p, n, l)?;
    let sigma = poly.sigma_l;
    let a0 = p.bohr_radius(level.system_mass);
    let rho_scale = 2.0 * p.z_number / ((n as f64 - sigma) * a0);
    let exponent = l as f64 - sigma;
    let raw = |rho: f64| (-0.5 * rho).exp() * rho.powf(exponent) * poly.eval(rho);
    // int R^2 r^2 dr = rho_scale^-3 int raw^2 rho^2 drho
    let rho_max = RHO_MAX_PER_N2 * (n * n) as f64;
    let integral = log_panel_integral(&|rho: f64| {
        let f = raw(rho);
        f * f * rho * rho
    }, rho_max)?;
    let sign = if poly.coefficients[0] < 0.0 { -1.0 } else { 1.0 };
    let normalization = sign * (rho_scale.powi(3) / integral).sqrt();
    Ok(RadialWavefunction {
        qn,
        rho_scale,
        normalization,
        poly,
        exponent,
        e_prime: level.e_prime,
        system_mass: level.system_mass,
    })
}

/// Integral over `[0, rho_max]` on panels whose widths double from `1e-6`.
fn log_panel_integral(f: &impl Fn(f64) -> f64, rho_max: f64) -> Result<f64> {
    let rule = GaussLegendre::new(20);
    let mut total = 0.0;
    let mut a = 0.0;
    let mut b = 1e-6_f64.min(rho_max);
    loop {
        total += adaptive(&rule, f, a, b, 1e-15)?;
        if b >= rho_max {
            break;
        }
        a = b;
        b = (2.0 * b).min(rho_max);
    }
    Ok(total)
}

impl RadialWavefunction {
    pub fn rho(&self, r: f64) -> f64 {
        self.rho_scale * r
    }

    /// `R(r)` for `r > 0`.
    pub fn eval(&self, r: f64) -> f64 {
        let rho = self.rho(r);
        self.normalization * (-0.5 * rho).exp() * rho.powf(self.exponent) * self.poly.eval(rho)
    }

    /// `u(r) = r R(r)`.
    pub fn u(&self, r: f64) -> f64 {
        r * self.eval(r)
    }

    /// Outer radius of the normalization integral.
    pub fn r_max(&self) -> f64 {
        RHO_MAX_PER_N2 * (self.qn.n() * self.qn.n()) as f64 / self.rho_scale
    }

    /// Sign changes of `R` on `(0, r_max)`.
    pub fn node_count(&self) -> usize {
        let rho_max = RHO_MAX_PER_N2 * (self.qn.n() * self.qn.n()) as f64;
        let samples: Vec<f64> = (1..=20_000)
            .map(|i| self.poly.eval(rho_max * i as f64 / 20_000.0))
            .collect();
        samples.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count()
    }

    /// `R` sampled on `grid`.
    pub fn sample(&self, grid: &RadialGrid) -> Vec<f64> {
        grid.points().iter().map(|&r| self.eval(r)).collect()
    }
}

/// Tail-to-peak ratio above which samples are considered truncated.
pub const TAIL_RATIO_LIMIT: f64 = 1e-12;

/// Normalization constant `N` with `int (N R)^2 r^2 dr = 1` for raw samples
/// `R` on `grid`.
pub fn normalize(grid: &RadialGrid, samples: &[f64]) -> Result<f64> {
    if samples.len() != grid.len() {
        return Err(KgError::InvalidGrid(format!(
            "{} samples for a grid of {} points",
            samples.len(),
            grid.len()
        )));
    }
    let peak = samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if peak == 0.0 || !peak.is_finite() {
        return Err(KgError::QuadratureFailure("samples are zero or non-finite".into()));
    }
    let ratio = samples[samples.len() - 1].abs() / peak;
    if ratio > TAIL_RATIO_LIMIT {
        return Err(KgError::TailNotConverged { ratio });
    }
    let weighted: Vec<f64> = samples.iter().zip(grid.points()).map(|(f, r)| f * f * r * r).collect();
    Ok(1.0 / integrate_samples(grid, &weighted).sqrt())
}

/// Points of the reference grid for [`radial_ode_residual`].
pub const REFERENCE_GRID_POINTS: usize = 20_000;

/// The reference grid of a state: log-uniform over `rho` in `[1e-3, 80 n^2]`
/// with [`REFERENCE_GRID_POINTS`] points.
pub fn reference_grid(wf: &RadialWavefunction) -> Result<RadialGrid> {
    RadialGrid::log_uniform(1e-3 / wf.rho_scale, wf.r_max(), REFERENCE_GRID_POINTS)
}

/// Maximum relative residual of the radial equation
///
/// ```text
/// R_xx + R_x + [(m0+m) E' r^2 / hbar^2 + 2 m Z e_s^2 r / hbar^2 + Z^2 alpha^2 - l(l+1)] R = 0,
/// ```
///
/// written in `x = ln r`, on a log-uniform grid with central differences.
/// Three points at each end are excluded. The residual is divided by the
/// largest magnitude of any single term over the grid.
pub fn radial_ode_residual(wf: &RadialWavefunction, p: &PhysicalParams, grid: &RadialGrid) -> Result<f64> {
    radial_ode_residual_at(wf, p, grid, wf.e_prime, wf.system_mass)
}

/// [`radial_ode_residual`] with the energy and mass of the equation given explicitly.
pub fn radial_ode_residual_at(
    wf: &RadialWavefunction,
    p: &PhysicalParams,
    grid: &RadialGrid,
    e_prime: f64,
    system_mass: f64,
) -> Result<f64> {
    let r = grid.points();
    if grid.spacing() != crate::model::Spacing::LogUniform || r.len() < 8 {
        return Err(KgError::InvalidGrid("the residual needs a log-uniform grid of at least 8 points".into()));
    }
    let h = (r[r.len() - 1] / r[0]).ln() / (r.len() - 1) as f64;
    let f: Vec<f64> = r.iter().map(|&x| wf.eval(x)).collect();
    let hbar2 = p.hbar * p.hbar;
    let za2 = p.z_alpha() * p.z_alpha();
    let l = wf.qn.l() as f64;
    let quad = (p.rest_mass + system_mass) * e_prime / hbar2;
    let lin = 2.0 * system_mass * p.z_number * p.charge_sq() / hbar2;
    let constant = za2 - l * (l + 1.0);
    let mut worst_residual = 0.0_f64;
    let mut worst_term = 0.0_f64;
    for i in 3..r.len() - 3 {
        let fxx = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h);
        let fx = (f[i + 1] - f[i - 1]) / (2.0 * h);
        let terms = [fxx, fx, quad * r[i] * r[i] * f[i], lin * r[i] * f[i], constant * f[i]];
        let residual: f64 = terms.iter().sum();
        worst_residual = worst_residual.max(residual.abs());
        worst_term = terms.iter().fold(worst_term, |m, t| m.max(t.abs()));
    }
    Ok(worst_residual / worst_term)
}

/// Orthonormal spherical harmonic `Y_lm(theta, phi)` with the Condon-Shortley phase.
pub fn spherical_harmonic(l: i64, m: i64, theta: f64, phi: f64) -> Result<Complex64> {
    if l < 0 || m.abs() > l {
        return Err(KgError::InvalidQuantumNumbers { n: l + 1, l, m });
    }
    let am = m.unsigned_abs() as u32;
    let p = normalized_legendre(l as u32, am, theta.cos());
    let y = Complex64::from_polar(p, am as f64 * phi);
    Ok(if m >= 0 {
        y
    } else {
        // Y_{l,-m} = (-1)^m conj(Y_{lm})
        let sign = if am.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * y.conj()
    })
}

/// `sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!) P_l^m(x)` for `m >= 0`, Condon-Shortley
/// phase included, by the stable upward recurrence in `l`.
fn normalized_legendre(l: u32, m: u32, x: f64) -> f64 {
    let s = (1.0 - x * x).max(0.0).sqrt();
    // P_m^m
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for k in 1..=m {
        let k = k as f64;
        pmm *= -((2.0 * k + 1.0) / (2.0 * k)).sqrt() * s;
    }
    if l == m {
        return pmm;
    }
    let mf = m as f64;
    let mut prev = pmm;
    let mut cur = (2.0 * mf + 3.0).sqrt() * x * pmm;
    for ll in (m + 2)..=l {
        let lf = ll as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
        let next = a * (x * cur - b * prev);
        prev = cur;
        cur = next;
    }
    cur
}

/// Product grid in spherical coordinates: log-uniform radii, Gauss-Legendre
/// nodes in `cos(theta)` and uniform `phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalGrid {
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
}

impl SphericalGrid {
    pub fn new(r_min: f64, r_max: f64, n_r: usize, n_theta: usize, n_phi: usize) -> Result<Self> {
        let radial = RadialGrid::log_uniform(r_min, r_max, n_r)?;
        if n_theta < POLAR_STENCIL || n_phi < 2 {
            return Err(KgError::InvalidGrid(format!(
                "need n_theta >= 5 and n_phi >= 2, got {n_theta} and {n_phi}"
            )));
        }
        let rule = GaussLegendre::new(n_theta);
        // Nodes in increasing theta.
        let theta = rule.nodes.iter().rev().map(|x| x.acos()).collect();
        let phi = (0..n_phi).map(|k| 2.0 * PI * k as f64 / n_phi as f64).collect();
        Ok(Self {
            r: radial.points().to_vec(),
            theta,
            phi,
        })
    }

    /// The default resolution: 200 radii, 64 polar and 64 azimuthal points.
    pub fn standard(r_min: f64, r_max: f64) -> Result<Self> {
        Self::new(r_min, r_max, 200, 64, 64)
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.r.len(), self.theta.len(), self.phi.len())
    }

    pub fn len(&self) -> usize {
        self.r.len() * self.theta.len() * self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of `(i_r, i_theta, i_phi)`.
    pub fn index(&self, ir: usize, it: usize, ip: usize) -> usize {
        (ir * self.theta.len() + it) * self.phi.len() + ip
    }
}

/// Complex samples of `psi` on a [`SphericalGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct PsiSamples {
    pub grid: SphericalGrid,
    pub values: Vec<Complex64>,
}

impl PsiSamples {
    /// `psi(r, theta, phi)` evaluated at every grid point.
    pub fn from_fn(grid: SphericalGrid, psi: impl Fn(f64, f64, f64) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for &r in &grid.r {
            for &t in &grid.theta {
                for &ph in &grid.phi {
                    values.push(psi(r, t, ph));
                }
            }
        }
        Self { grid, values }
    }

    /// `R_nl(r) Y_lm(theta, phi)` for the radial function `wf` and magnetic number `m`.
    pub fn from_state(wf: &RadialWavefunction, m: i64, grid: SphericalGrid) -> Result<Self> {
        let l = wf.qn.l() as i64;
        spherical_harmonic(l, m, 0.0, 0.0)?;
        Ok(Self::from_fn(grid, |r, t, ph| {
            wf.eval(r) * spherical_harmonic(l, m, t, ph).expect("checked above")
        }))
    }

    /// Multiplies every sample by `e^{i delta}`.
    pub fn with_global_phase(mut self, delta: f64) -> Self {
        let phase = Complex64::from_polar(1.0, delta);
        for v in &mut self.values {
            *v *= phase;
        }
        self
    }
}

/// Spherical components of a vector field sampled on a [`SphericalGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentField {
    pub grid: SphericalGrid,
    pub j_r: Vec<f64>,
    pub j_theta: Vec<f64>,
    pub j_phi: Vec<f64>,
}

impl CurrentField {
    /// Largest component magnitude.
    pub fn max_abs(&self) -> f64 {
        self.j_r
            .iter()
            .chain(&self.j_theta)
            .chain(&self.j_phi)
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Probability current `J = (i hbar / (m0 + m)) (psi grad psi* - psi* grad psi)`,
/// i.e. `(2 hbar / (m0 + m)) Im(psi* grad psi)`.
///
/// Radial and polar derivatives use three- and five-point differences on
/// the nonuniform nodes; the azimuthal derivative is spectral. Real and imaginary
/// parts are differentiated separately, so a real `psi` gives `J = 0` exactly.
pub fn probability_current(psi: &PsiSamples, p: &PhysicalParams, m_sys: f64) -> CurrentField {
    let g = &psi.grid;
    let (nr, nt, np) = g.shape();
    let coef = 2.0 * p.hbar / (p.rest_mass + m_sys);
    let re: Vec<f64> = psi.values.iter().map(|v| v.re).collect();
    let im: Vec<f64> = psi.values.iter().map(|v| v.im).collect();
    let j_of = |d_re: &[f64], d_im: &[f64], metric: &dyn Fn(usize) -> f64| -> Vec<f64> {
        (0..psi.values.len())
            .map(|k| coef * (re[k] * d_im[k] - im[k] * d_re[k]) * metric(k))
            .collect()
    };

    let radial_stencils = Stencils::new(&g.r, RADIAL_STENCIL);
    let polar_stencils = Stencils::new(&g.theta, POLAR_STENCIL);
    let d_r = |f: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        for it in 0..nt {
            for ip in 0..np {
                for ir in 0..nr {
                    out[g.index(ir, it, ip)] = radial_stencils.at(ir, |i| f[g.index(i, it, ip)]);
                }
            }
        }
        out
    };
    let d_theta = |f: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        for ir in 0..nr {
            for ip in 0..np {
                for it in 0..nt {
                    out[g.index(ir, it, ip)] = polar_stencils.at(it, |i| f[g.index(ir, i, ip)]);
                }
            }
        }
        out
    };
    let d_phi = |f: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        let mut deriv = SpectralDerivative::new(np);
        for ir in 0..nr {
            for it in 0..nt {
                let start = g.index(ir, it, 0);
                deriv.apply(&f[start..start + np], &mut out[start..start + np]);
            }
        }
        out
    };

    let radial = |_k: usize| 1.0;
    let polar = |k: usize| 1.0 / g.r[k / (nt * np)];
    let azimuthal = |k: usize| {
        let ir = k / (nt * np);
        let it = (k / np) % nt;
        1.0 / (g.r[ir] * g.theta[it].sin())
    };
    CurrentField {
        grid: g.clone(),
        j_r: j_of(&d_r(&re), &d_r(&im), &radial),
        j_theta: j_of(&d_theta(&re), &d_theta(&im), &polar),
        j_phi: j_of(&d_phi(&re), &d_phi(&im), &azimuthal),
    }
}

/// Stencil width of the radial derivative.
const RADIAL_STENCIL: usize = 3;
/// Stencil width of the polar derivative. The metric term `cot(theta) J_theta`
/// multiplies the polar truncation error by `1 / theta` near the poles, which
/// costs one order; five points keep the divergence better than second order.
const POLAR_STENCIL: usize = 5;

/// Derivative weights of the interpolating polynomial through `width` nodes,
/// centred where possible and shifted inward at the ends.
struct Stencils {
    width: usize,
    starts: Vec<usize>,
    weights: Vec<f64>,
}

impl Stencils {
    fn new(x: &[f64], width: usize) -> Self {
        let n = x.len();
        let mut starts = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n * width);
        for (i, &t) in x.iter().enumerate() {
            let start = i.saturating_sub(width / 2).min(n - width);
            let nodes = &x[start..start + width];
            starts.push(start);
            for j in 0..width {
                let mut w = 0.0;
                for k in (0..width).filter(|&k| k != j) {
                    let mut term = 1.0 / (nodes[j] - nodes[k]);
                    for m in (0..width).filter(|&m| m != j && m != k) {
                        term *= (t - nodes[m]) / (nodes[j] - nodes[m]);
                    }
                    w += term;
                }
                weights.push(w);
            }
        }
        Self { width, starts, weights }
    }

    /// Derivative at node `i` of the values `f(j)`.
    fn at(&self, i: usize, f: impl Fn(usize) -> f64) -> f64 {
        let w = &self.weights[i * self.width..(i + 1) * self.width];
        w.iter().enumerate().map(|(j, w)| w * f(self.starts[i] + j)).sum()
    }
}

struct SpectralDerivative {
    n: usize,
    forward: std::sync::Arc<dyn rustfft::Fft<f64>>,
    inverse: std::sync::Arc<dyn rustfft::Fft<f64>>,
    buffer: Vec<Complex64>,
}

impl SpectralDerivative {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            buffer: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Derivative of the real periodic samples `f` over `[0, 2 pi)`.
    fn apply(&mut self, f: &[f64], out: &mut [f64]) {
        let n = self.n;
        for (b, &v) in self.buffer.iter_mut().zip(f) {
            *b = Complex64::new(v, 0.0);
        }
        self.forward.process(&mut self.buffer);
        for (k, b) in self.buffer.iter_mut().enumerate() {
            let wave = if k < n / 2 {
                k as f64
            } else if k == n / 2 && n.is_multiple_of(2) {
                // Nyquist mode has no odd-symmetric derivative.
                0.0
            } else {
                k as f64 - n as f64
            };
            *b *= Complex64::new(0.0, wave / n as f64);
        }
        self.inverse.process(&mut self.buffer);
        for (o, b) in out.iter_mut().zip(&self.buffer) {
            *o = b.re;
        }
    }
}

/// Result of a discrete divergence check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityReport {
    /// `max |div J|` over interior points.
    pub max_divergence: f64,
    /// `max |J| / min(dr)`, the natural size of a divergence on this grid.
    pub scale: f64,
}

impl ContinuityReport {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.max_divergence / self.scale
        }
    }
}

/// Discrete `div J` in spherical coordinates on interior points (the first
/// and last radius and polar node are skipped).
///
/// The metric factors are differentiated analytically,
/// `div J = d_r J_r + 2 J_r / r + (d_theta J_theta + cot(theta) J_theta) / r + d_phi J_phi / (r sin(theta))`,
/// so that the `1 / sin(theta)` near the poles does not amplify the
/// truncation error of the polar stencil.
pub fn continuity_check(current: &CurrentField) -> ContinuityReport {
    let g = &current.grid;
    let (nr, nt, np) = g.shape();
    let radial_stencils = Stencils::new(&g.r, RADIAL_STENCIL);
    let polar_stencils = Stencils::new(&g.theta, POLAR_STENCIL);
    let mut deriv = SpectralDerivative::new(np);
    let mut dphi = vec![0.0; np];
    let mut worst = 0.0_f64;
    for ir in 1..nr - 1 {
        for it in 1..nt - 1 {
            let start = g.index(ir, it, 0);
            deriv.apply(&current.j_phi[start..start + np], &mut dphi);
            let r = g.r[ir];
            let (s, c) = g.theta[it].sin_cos();
            for (ip, dp) in dphi.iter().enumerate() {
                let k = g.index(ir, it, ip);
                let jr = current.j_r[k];
                let jt = current.j_theta[k];
                let radial = radial_stencils.at(ir, |i| current.j_r[g.index(i, it, ip)]) + 2.0 * jr / r;
                let polar =
                    (polar_stencils.at(it, |i| current.j_theta[g.index(ir, i, ip)]) + c / s * jt) / r;
                let azimuthal = dp / (r * s);
                worst = worst.max((radial + polar + azimuthal).abs());
            }
        }
    }
    let dr_min = g.r.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    ContinuityReport {
        max_divergence: worst,
        scale: current.max_abs() / dr_min,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hydrogen_limit_ground_state() {
        let p = PhysicalParams::with_z_alpha(1e-6);
        let wf = build_radial(&p, 1, 0).unwrap();
        let a0 = p.bohr_radius(wf.system_mass);
        for r in [0.1 * a0, a0, 3.0 * a0] {
            let classical = 2.0 * a0.powf(-1.5) * (-r / a0).exp();
            assert_relative_eq!(wf.eval(r), classical, max_relative = 1e-5);
        }
    }

    /// Textbook hydrogen `R_nl` with the analytic normalization.
    fn textbook_radial(n: u32, l: u32, a0: f64, r: f64) -> f64 {
        let fact = |k: u32| -> f64 { (1..=k).map(f64::from).product() };
        let nf = n as f64;
        let norm = ((2.0 / (nf * a0)).powi(3) * fact(n - l - 1) / (2.0 * nf * fact(n + l).powi(3))).sqrt();
        let rho = 2.0 * r / (nf * a0);
        let c = crate::special::laguerre_classical(n, l).unwrap();
        -norm * (-0.5 * rho).exp() * rho.powi(l as i32) * crate::special::horner(&c, rho)
    }

    #[test]
    fn nonrelativistic_limit_matches_textbook_hydrogen() {
        let p = PhysicalParams::with_z_alpha(1e-6);
        for n in 1..=4 {
            for l in 0..n {
                let wf = build_radial(&p, n, l).unwrap();
                let a0 = p.bohr_radius(wf.system_mass);
                let (mut diff, mut peak) = (0.0_f64, 0.0_f64);
                for i in 1..=2000 {
                    let r = wf.r_max() * 0.25 * i as f64 / 2000.0;
                    let exact = textbook_radial(n, l, a0, r);
                    diff = diff.max((wf.eval(r) - exact).abs());
                    peak = peak.max(exact.abs());
                }
                assert!(diff / peak < 1e-5, "({n},{l}) {}", diff / peak);
            }
        }
    }

    #[test]
    fn normalization_matches_gamma_sum() {
        // int e^-rho rho^(2l+2-2 sigma) L^2 = sum c_i c_j Gamma(2l+3-2 sigma+i+j)
        let p = PhysicalParams::with_z_alpha(0.3);
        for (n, l) in [(1, 0), (3, 0), (3, 2), (5, 1)] {
            let wf = build_radial(&p, n, l).unwrap();
            let c = &wf.poly.coefficients;
            let base = 2.0 * l as f64 + 3.0 - 2.0 * wf.poly.sigma_l;
            let mut sum = 0.0;
            for (i, ci) in c.iter().enumerate() {
                for (j, cj) in c.iter().enumerate() {
                    sum += ci * cj * crate::special::gamma_fn(base + (i + j) as f64).unwrap();
                }
            }
            let expected = (wf.rho_scale.powi(3) / sum).sqrt();
            assert_relative_eq!(wf.normalization.abs(), expected, max_relative = 1e-10);
        }
    }

    #[test]
    fn node_counts_follow_radial_quantum_number() {
        for za in [0.05, 0.3] {
            let p = PhysicalParams::with_z_alpha(za);
            for n in 1..=6 {
                for l in 0..n {
                    assert_eq!(build_radial(&p, n, l).unwrap().node_count(), (n - l - 1) as usize);
                }
            }
        }
    }

    #[test]
    fn ode_residual_small_on_reference_grid() {
        let p = PhysicalParams::with_z_alpha(0.3);
        for (n, l) in [(1, 0), (4, 0), (6, 0), (6, 5)] {
            let wf = build_radial(&p, n, l).unwrap();
            let res = radial_ode_residual(&wf, &p, &reference_grid(&wf).unwrap()).unwrap();
            assert!(res < 1e-6, "({n},{l}) {res}");
        }
    }

    #[test]
    fn hydrogen_exponent_and_nodes() {
        let p = PhysicalParams::natural(1.0);
        let wf = build_radial(&p, 1, 0).unwrap();
        assert_relative_eq!(wf.exponent, -5.325_419_052_947_826e-5, max_relative = 1e-12);
        assert_eq!(build_radial(&p, 3, 0).unwrap().node_count(), 2);
        assert!(wf.eval(1e-3 * wf.r_max()) > 0.0);
    }

    #[test]
    fn normalize_recovers_analytic_constant_and_is_linear() {
        let a0 = 1.0;
        let grid = RadialGrid::log_uniform(1e-6, 60.0, 4001).unwrap();
        let raw: Vec<f64> = grid.points().iter().map(|&r| (-r / a0).exp()).collect();
        let n = normalize(&grid, &raw).unwrap();
        assert_relative_eq!(n, 2.0, max_relative = 1e-8);
        let doubled: Vec<f64> = raw.iter().map(|v| 2.0 * v).collect();
        assert_relative_eq!(normalize(&grid, &doubled).unwrap(), 1.0, max_relative = 1e-8);
        let short = RadialGrid::log_uniform(1e-6, 10.0, 101).unwrap();
        let cut: Vec<f64> = short.points().iter().map(|&r| (-r).exp()).collect();
        assert!(matches!(normalize(&short, &cut), Err(KgError::TailNotConverged { .. })));
    }

    #[test]
    fn normalization_stable_under_grid_doubling() {
        let p = PhysicalParams::with_z_alpha(0.1);
        let wf = build_radial(&p, 2, 1).unwrap();
        let norm = |points| {
            let grid = RadialGrid::log_uniform(1e-6 / wf.rho_scale, wf.r_max(), points).unwrap();
            normalize(&grid, &wf.sample(&grid)).unwrap()
        };
        let (coarse, fine) = (norm(2000), norm(4000));
        assert!((coarse - fine).abs() / fine < 1e-9, "{coarse} {fine}");
        assert!((fine - 1.0).abs() < 1e-8);
    }

    #[test]
    fn spherical_harmonic_values() {
        let y00 = spherical_harmonic(0, 0, 0.3, 1.1).unwrap();
        assert_relative_eq!(y00.re, (1.0 / (4.0 * PI)).sqrt(), max_relative = 1e-15);
        let t = 0.7;
        let y10 = spherical_harmonic(1, 0, t, 0.0).unwrap();
        assert_relative_eq!(y10.re, (3.0 / (4.0 * PI)).sqrt() * t.cos(), max_relative = 1e-14);
        let y11 = spherical_harmonic(1, 1, t, 0.4).unwrap();
        let expect = -(3.0 / (8.0 * PI)).sqrt() * t.sin() * Complex64::from_polar(1.0, 0.4);
        assert_relative_eq!(y11.re, expect.re, max_relative = 1e-14);
        assert_relative_eq!(y11.im, expect.im, max_relative = 1e-14);
        assert!(spherical_harmonic(1, 2, 0.0, 0.0).is_err());
    }

    #[test]
    fn spherical_harmonics_are_orthonormal() {
        let rule = GaussLegendre::new(40);
        let nphi = 32;
        let inner = |l1, m1, l2, m2| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let t = x.acos();
                for k in 0..nphi {
                    let ph = 2.0 * PI * k as f64 / nphi as f64;
                    let a = spherical_harmonic(l1, m1, t, ph).unwrap();
                    let b = spherical_harmonic(l2, m2, t, ph).unwrap();
                    acc += a.conj() * b * w * (2.0 * PI / nphi as f64);
                }
            }
            acc
        };
        assert!((inner(2, 1, 2, 1).re - 1.0).abs() < 1e-10);
        assert!((inner(5, -3, 5, -3).re - 1.0).abs() < 1e-10);
        assert!(inner(2, 1, 3, 1).norm() < 1e-12);
        assert!(inner(2, 1, 2, -1).norm() < 1e-12);
    }

    #[test]
    fn ode_residual_detects_wrong_energy() {
        let p = PhysicalParams::with_z_alpha(0.1);
        let wf = build_radial(&p, 2, 0).unwrap();
        let grid = reference_grid(&wf).unwrap();
        let good = radial_ode_residual(&wf, &p, &grid).unwrap();
        let bad = radial_ode_residual_at(&wf, &p, &grid, 1.01 * wf.e_prime, wf.system_mass).unwrap();
        assert!(bad > 10.0 * good, "{good} {bad}");
    }

    #[test]
    fn m_zero_current_vanishes_exactly() {
        let p = PhysicalParams::with_z_alpha(0.1);
        let wf = build_radial(&p, 2, 1).unwrap();
        let grid = SphericalGrid::new(1e-3 / wf.rho_scale, 40.0 / wf.rho_scale, 40, 16, 16).unwrap();
        let psi = PsiSamples::from_state(&wf, 0, grid).unwrap();
        let j = probability_current(&psi, &p, wf.system_mass);
        assert_eq!(j.max_abs(), 0.0);
        assert_eq!(continuity_check(&j).max_divergence, 0.0);
    }

    #[test]
    fn azimuthal_current_matches_analytic_form_and_ignores_global_phase() {
        let p = PhysicalParams::with_z_alpha(0.1);
        let wf = build_radial(&p, 2, 1).unwrap();
        let grid = SphericalGrid::new(1e-3 / wf.rho_scale, 40.0 / wf.rho_scale, 40, 16, 16).unwrap();
        let psi = PsiSamples::from_state(&wf, 1, grid).unwrap();
        let j = probability_current(&psi, &p, wf.system_mass);
        let g = &j.grid;
        let coef = 2.0 * p.hbar / (p.rest_mass + wf.system_mass);
        let peak = j.max_abs();
        for (k, v) in psi.values.iter().enumerate() {
            let ir = k / (g.theta.len() * g.phi.len());
            let it = (k / g.phi.len()) % g.theta.len();
            let analytic = coef * v.norm_sqr() / (g.r[ir] * g.theta[it].sin());
            assert!((j.j_phi[k] - analytic).abs() <= 1e-8 * peak);
            assert!(j.j_r[k].abs() <= 1e-12 * peak && j.j_theta[k].abs() <= 1e-12 * peak);
        }
        let rotated = probability_current(&psi.clone().with_global_phase(0.83), &p, wf.system_mass);
        for (a, b) in rotated.j_phi.iter().zip(&j.j_phi) {
            assert!((a - b).abs() <= 1e-12 * peak);
        }
    }

    /// `R_21(r) Y_11` in a frame rotated away from the grid axes, so that all
    /// current components are nonzero.
    fn tilted_p_state(wf: &RadialWavefunction) -> impl Fn(f64, f64, f64) -> Complex64 + '_ {
        let (a, b) = (0.37_f64, 0.61_f64);
        move |r, t, ph| {
            let (x, y, z) = (t.sin() * ph.cos(), t.sin() * ph.sin(), t.cos());
            let x1 = a.cos() * x - a.sin() * z;
            let (x2, y2) = (b.cos() * x1 - b.sin() * y, b.sin() * x1 + b.cos() * y);
            wf.eval(r) * -(3.0 / (8.0 * PI)).sqrt() * Complex64::new(x2, y2)
        }
    }

    #[test]
    fn divergence_converges_under_refinement() {
        let p = PhysicalParams::with_z_alpha(0.1);
        let wf = build_radial(&p, 2, 1).unwrap();
        let div = |k: usize| {
            let grid = SphericalGrid::new(1e-3 / wf.rho_scale, 40.0 / wf.rho_scale, 25 * k, 8 * k, 16).unwrap();
            let psi = PsiSamples::from_fn(grid, tilted_p_state(&wf));
            continuity_check(&probability_current(&psi, &p, wf.system_mass)).max_divergence
        };
        let (coarse, mid, fine) = (div(2), div(4), div(8));
        assert!((coarse / mid).log2() > 1.8 && (mid / fine).log2() > 1.8, "{coarse} {mid} {fine}");
    }

    #[test]
    fn broken_phase_gives_nonzero_divergence() {
        let p = PhysicalParams::with_z_alpha(0.1);
        let wf = build_radial(&p, 2, 1).unwrap();
        let grid = SphericalGrid::new(1e-3 / wf.rho_scale, 40.0 / wf.rho_scale, 50, 16, 64).unwrap();
        let psi = PsiSamples::from_fn(grid, |r, t, ph| {
            wf.eval(r) * t.sin() * Complex64::from_polar(1.0, ph * ph)
        });
        let report = continuity_check(&probability_current(&psi, &p, wf.system_mass));
        assert!(report.relative() > 1e-4, "{}", report.relative());
    }
}
