//! Gamma function and the relativistic associated Laguerre polynomials.
//!
//! The relativistic polynomial of the Coulomb problem is the finite series
//!
//! ```text
//! L(rho) = sum_{nu=0}^{n-l-1} (-1)^{nu+1} [(n+l)!]^2 rho^nu
//!          / ((n-l-1-nu)! Gamma(2l+nu+2-sigma) Gamma(nu+1-sigma) eta(l,nu))
//! eta(l,nu) = prod_{k=1}^{nu} (1 + Z^2 alpha^2 / ((k-sigma)(2l+1+k-sigma)))
//! ```
//!
//! which reduces to the classical associated Laguerre polynomial
//! `L^{2l+1}_{n+l}` (old quantum-mechanics convention, leading sign `-1`)
//! when `Z alpha -> 0`.

use std::f64::consts::PI;

use crate::coulomb::defect;
use crate::error::{KgError, Result};
use crate::model::{check_subcritical, PhysicalParams, QuantumNumbers};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function by the Lanczos approximation (g = 7), with reflection below 1/2.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if x <= 0.0 && x == x.floor() {
        return Err(KgError::PoleError { x });
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_unchecked(1.0 - x));
    }
    // Exact factorials for small positive integers.
    if x == x.floor() && x <= 23.0 {
        return (1..x as u32).map(f64::from).product();
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    // Split the power to keep t^(x+1/2) finite near the top of the range.
    let half = t.powf(0.5 * (x + 0.5));
    (2.0 * PI).sqrt() * half * (half * (-t).exp()) * acc
}

/// Correction product `eta(l, nu)`; the empty product (`nu = 0`) is 1.
pub fn eta_product(l: u32, nu: u32, z_alpha: f64, sigma_l: f64) -> f64 {
    let x = z_alpha * z_alpha;
    let two_l1 = 2.0 * l as f64 + 1.0;
    (1..=nu)
        .map(|k| {
            let k = k as f64;
            1.0 + x / ((k - sigma_l) * (two_l1 + k - sigma_l))
        })
        .product()
}

/// Ratio `b_{nu+1} / b_nu = (s + nu - beta) / ((s+nu)(s+nu+1) - l(l+1) + Z^2 alpha^2)`
/// of consecutive Frobenius series coefficients.
pub fn series_coefficient_ratio(s: f64, nu: u32, beta: f64, l: u32, z_alpha: f64) -> Result<f64> {
    let sn = s + nu as f64;
    let lf = l as f64;
    let denom = sn * (sn + 1.0) - lf * (lf + 1.0) + z_alpha * z_alpha;
    if denom == 0.0 || !denom.is_finite() {
        return Err(KgError::DegenerateRecurrence { s, nu, l, z_alpha });
    }
    let numer = (s - beta) + nu as f64;
    // Cancellation residue of a terminating series is snapped to zero.
    let noise = 8.0 * f64::EPSILON * (sn.abs() + beta.abs());
    if numer.abs() <= noise {
        return Ok(0.0);
    }
    Ok(numer / denom)
}

/// Coefficients of the relativistic associated Laguerre polynomial in powers of `rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaguerreRel {
    pub n: u32,
    pub l: u32,
    pub sigma_l: f64,
    pub z_alpha: f64,
    /// Coefficient of `rho^nu` for `nu = 0 ..= n-l-1`.
    pub coefficients: Vec<f64>,
}

impl LaguerreRel {
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Horner evaluation.
    pub fn eval(&self, rho: f64) -> f64 {
        horner(&self.coefficients, rho)
    }
}

pub(crate) fn horner(coefficients: &[f64], x: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Relativistic associated Laguerre polynomial for the state `(n, l)`.
pub fn laguerre_rel(p: &PhysicalParams, n: u32, l: u32) -> Result<LaguerreRel> {
    QuantumNumbers::radial(n, l)?;
    p.check()?;
    check_subcritical(p, l)?;
    let z_alpha = p.z_alpha();
    let sigma_l = defect(z_alpha, l);
    Ok(build_laguerre(n, l, z_alpha, sigma_l))
}

fn build_laguerre(n: u32, l: u32, z_alpha: f64, sigma_l: f64) -> LaguerreRel {
    let top = gamma_unchecked((n + l + 1) as f64);
    let top_sq = top * top;
    let two_l = 2.0 * l as f64;
    let coefficients = (0..n - l)
        .map(|nu| {
            let nuf = nu as f64;
            let sign = if nu % 2 == 0 { -1.0 } else { 1.0 };
            let denom = gamma_unchecked((n - l - nu) as f64)
                * gamma_unchecked(two_l + nuf + 2.0 - sigma_l)
                * gamma_unchecked(nuf + 1.0 - sigma_l)
                * eta_product(l, nu, z_alpha, sigma_l);
            sign * top_sq / denom
        })
        .collect();
    LaguerreRel {
        n,
        l,
        sigma_l,
        z_alpha,
        coefficients,
    }
}

/// Classical associated Laguerre coefficients
/// `(-1)^{nu+1} [(n+l)!]^2 / ((n-l-1-nu)! (2l+1+nu)! nu!)`, from exact integer factorials.
pub fn laguerre_classical(n: u32, l: u32) -> Result<Vec<f64>> {
    QuantumNumbers::radial(n, l)?;
    let fact = |k: u32| -> f64 { (1..=k).map(f64::from).product() };
    let top = fact(n + l);
    Ok((0..n - l)
        .map(|nu| {
            let sign = if nu % 2 == 0 { -1.0 } else { 1.0 };
            sign * top * top / (fact(n - l - 1 - nu) * fact(2 * l + 1 + nu) * fact(nu))
        })
        .collect())
}
