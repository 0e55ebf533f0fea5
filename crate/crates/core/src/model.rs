//! Domain types shared by every solver: physical constants, quantum numbers,
//! potential descriptions, bound-state records and radial grids.
//!
//! The default unit system is natural units, `hbar = c = m0 = 1`, so every
//! energy is reported in units of the rest energy `m0 c^2` and lengths in
//! units of the reduced Compton wavelength `hbar / (m0 c)`.

use crate::error::{KgError, Result};

/// CODATA 2018 fine-structure constant.
pub const FINE_STRUCTURE: f64 = 7.297_352_569_3e-3;

/// Physical constants that parameterize a computation.
///
/// The coupling constant of the Coulomb field is `e_s^2 = alpha * hbar * c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub rest_mass: f64,
    /// Atomic number. Real-valued so that it can be swept continuously.
    pub z_number: f64,
    pub alpha: f64,
    pub c: f64,
    pub hbar: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self::natural(1.0)
    }
}

impl PhysicalParams {
    /// Natural units with the physical fine-structure constant.
    pub fn natural(z_number: f64) -> Self {
        Self {
            rest_mass: 1.0,
            z_number,
            alpha: FINE_STRUCTURE,
            c: 1.0,
            hbar: 1.0,
        }
    }

    /// Natural units with `Z = 1` and `alpha` chosen so that `Z * alpha` equals `z_alpha`.
    pub fn with_z_alpha(z_alpha: f64) -> Self {
        Self {
            alpha: z_alpha,
            ..Self::natural(1.0)
        }
    }

    pub fn new(rest_mass: f64, z_number: f64, alpha: f64, c: f64, hbar: f64) -> Result<Self> {
        let p = Self {
            rest_mass,
            z_number,
            alpha,
            c,
            hbar,
        };
        p.check()?;
        Ok(p)
    }

    /// Checks that every field is finite and strictly positive.
    pub fn check(&self) -> Result<()> {
        let fields = [
            ("rest_mass", self.rest_mass),
            ("z_number", self.z_number),
            ("alpha", self.alpha),
            ("c", self.c),
            ("hbar", self.hbar),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(KgError::InvalidParams(format!(
                    "{name} must be finite and > 0, got {value}"
                )));
            }
        }
        Ok(())
    }

    pub fn is_natural(&self) -> bool {
        self.hbar == 1.0 && self.c == 1.0 && self.rest_mass == 1.0
    }

    pub fn z_alpha(&self) -> f64 {
        self.z_number * self.alpha
    }

    /// Rest energy `m0 c^2`.
    pub fn rest_energy(&self) -> f64 {
        self.rest_mass * self.c * self.c
    }

    /// Squared elementary charge in Gaussian form, `e_s^2 = alpha hbar c`.
    pub fn charge_sq(&self) -> f64 {
        self.alpha * self.hbar * self.c
    }

    /// Bohr radius `hbar^2 / (mass e_s^2)` for the given mass.
    pub fn bohr_radius(&self, mass: f64) -> f64 {
        self.hbar * self.hbar / (mass * self.charge_sq())
    }
}

/// Principal, angular and magnetic quantum numbers of a bound state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuantumNumbers {
    n: u32,
    l: u32,
    m: i32,
}

impl QuantumNumbers {
    pub fn new(n: i64, l: i64, m: i64) -> Result<Self> {
        let bad = || KgError::InvalidQuantumNumbers { n, l, m };
        if n < 1 || l < 0 || l > n - 1 || m.abs() > l || n > u32::MAX as i64 {
            return Err(bad());
        }
        Ok(Self {
            n: n as u32,
            l: l as u32,
            m: m as i32,
        })
    }

    /// `(n, l, 0)`, the label used by the radial solvers.
    pub fn radial(n: u32, l: u32) -> Result<Self> {
        Self::new(n as i64, l as i64, 0)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    /// Radial node count `n - l - 1`.
    pub fn radial_nodes(&self) -> usize {
        (self.n - self.l - 1) as usize
    }
}

/// Checks the reality condition `Z alpha < l + 1/2` for the square root in the
/// quantum defect. Returns the inputs unchanged when it holds.
pub fn validate_params(
    p: PhysicalParams,
    qn: QuantumNumbers,
) -> Result<(PhysicalParams, QuantumNumbers)> {
    p.check()?;
    check_subcritical(&p, qn.l())?;
    Ok((p, qn))
}

pub(crate) fn check_subcritical(p: &PhysicalParams, l: u32) -> Result<()> {
    let z_alpha = p.z_alpha();
    let limit = l as f64 + 0.5;
    if z_alpha >= limit {
        return Err(KgError::SupercriticalCoupling { z_alpha, l, limit });
    }
    Ok(())
}

/// Shape of one potential channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialKind {
    None,
    /// `-Z e_s^2 / r` with `Z` taken from [`PhysicalParams`].
    Coulomb,
    /// `-Z e_s^2 lambda e^{-lambda r} / (1 - e^{-lambda r})`.
    ///
    /// `lambda` is an inverse length in the units of [`PhysicalParams`]; use
    /// [`PotentialKind::hulthen`] to give it in units of the inverse Bohr radius.
    Hulthen { z_number: f64, lambda: f64 },
}

impl PotentialKind {
    /// Hulthen potential with screening `lambda_bohr / a0`, where
    /// `a0 = hbar^2 / (m0 e_s^2)` is the Bohr radius at the rest mass.
    pub fn hulthen(p: &PhysicalParams, z_number: f64, lambda_bohr: f64) -> Self {
        PotentialKind::Hulthen {
            z_number,
            lambda: lambda_bohr / p.bohr_radius(p.rest_mass),
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, PotentialKind::None)
    }

    /// Potential energy at radius `r`.
    pub fn value(&self, p: &PhysicalParams, r: f64) -> f64 {
        match *self {
            PotentialKind::None => 0.0,
            PotentialKind::Coulomb => -(p.z_number * p.charge_sq()) / r,
            PotentialKind::Hulthen { z_number, lambda } => {
                let strength = z_number * p.charge_sq() * lambda;
                // e^{-x} / (1 - e^{-x}) = 1 / expm1(x)
                -strength / (lambda * r).exp_m1()
            }
        }
    }

    /// Strength `g` of the Coulomb tail at the origin, `U(r) ~ -g / r`.
    pub fn origin_strength(&self, p: &PhysicalParams) -> f64 {
        match *self {
            PotentialKind::None => 0.0,
            PotentialKind::Coulomb => p.z_number * p.charge_sq(),
            PotentialKind::Hulthen { z_number, .. } => z_number * p.charge_sq(),
        }
    }

    /// Characteristic radius of the bound region, used to size default grids.
    pub fn length_scale(&self, p: &PhysicalParams) -> Option<f64> {
        match *self {
            PotentialKind::None => None,
            PotentialKind::Coulomb => Some(p.bohr_radius(p.rest_mass) / p.z_number),
            PotentialKind::Hulthen { z_number, lambda } => {
                Some((p.bohr_radius(p.rest_mass) / z_number).max(1.0 / lambda))
            }
        }
    }

    fn check(&self) -> Result<()> {
        if let PotentialKind::Hulthen { z_number, lambda } = *self {
            if !(lambda.is_finite() && lambda > 0.0) {
                return Err(KgError::InvalidParams(format!(
                    "Hulthen lambda must be > 0, got {lambda}"
                )));
            }
            if !(z_number.is_finite() && z_number > 0.0) {
                return Err(KgError::InvalidParams(format!(
                    "Hulthen z_number must be > 0, got {z_number}"
                )));
            }
        }
        Ok(())
    }
}

/// Vector (`U`) and scalar (`S`) potential channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSpec {
    pub vector_part: PotentialKind,
    pub scalar_part: PotentialKind,
}

impl PotentialSpec {
    pub fn new(vector_part: PotentialKind, scalar_part: PotentialKind) -> Result<Self> {
        vector_part.check()?;
        scalar_part.check()?;
        Ok(Self {
            vector_part,
            scalar_part,
        })
    }

    pub fn free() -> Self {
        Self {
            vector_part: PotentialKind::None,
            scalar_part: PotentialKind::None,
        }
    }

    pub fn vector(kind: PotentialKind) -> Self {
        Self {
            vector_part: kind,
            scalar_part: PotentialKind::None,
        }
    }

    /// Equal scalar and vector parts.
    pub fn equal(kind: PotentialKind) -> Self {
        Self {
            vector_part: kind,
            scalar_part: kind,
        }
    }

    pub fn is_free(&self) -> bool {
        self.vector_part.is_none() && self.scalar_part.is_none()
    }

    pub fn check(&self) -> Result<()> {
        self.vector_part.check()?;
        self.scalar_part.check()
    }
}

/// A converged (or closed-form) bound state.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundState {
    pub qn: QuantumNumbers,
    /// Energy without the rest energy, `E' = E - m0 c^2`.
    pub e_prime: f64,
    /// Total energy `E = E' + m0 c^2`.
    pub e_total: f64,
    /// System mass `m = m0 + E' / c^2`.
    pub system_mass: f64,
    pub node_count: usize,
    /// `(r, u(r))` pairs with `u = r R`; empty for closed-form levels.
    pub radial_samples: Vec<(f64, f64)>,
    pub iterations: usize,
    /// Final fixed-point residual `|dm| / m0`.
    pub residual: f64,
    /// Residual after every self-consistency iteration.
    pub residual_history: Vec<f64>,
}

impl BoundState {
    /// Builds the energy bookkeeping from `E'` so the mass and total energy
    /// follow from the same arithmetic everywhere.
    pub fn from_e_prime(qn: QuantumNumbers, e_prime: f64, p: &PhysicalParams) -> Self {
        Self {
            qn,
            e_prime,
            e_total: e_prime + p.rest_energy(),
            system_mass: p.rest_mass + e_prime / (p.c * p.c),
            node_count: qn.radial_nodes(),
            radial_samples: Vec::new(),
            iterations: 0,
            residual: 0.0,
            residual_history: Vec::new(),
        }
    }
}

/// Binding energy `|E'| = (m0 - m) c^2` of a bound state.
///
/// The mass defect times `c^2` equals `-E'` by construction of `system_mass`,
/// so `-E'` is returned directly.
pub fn binding_energy(b: &BoundState, _p: &PhysicalParams) -> Result<f64> {
    if b.e_prime >= 0.0 {
        return Err(KgError::NotBound { e_prime: b.e_prime });
    }
    Ok(-b.e_prime)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Uniform,
    LogUniform,
}

/// Strictly increasing positive radii.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    points: Vec<f64>,
    spacing: Spacing,
}

impl RadialGrid {
    /// `r_j = j * r_max / n` for `j = 1..=n`.
    pub fn uniform(r_max: f64, n: usize) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) || n < 2 {
            return Err(KgError::InvalidGrid(format!(
                "uniform grid needs r_max > 0 and n >= 2 (r_max={r_max}, n={n})"
            )));
        }
        let h = r_max / n as f64;
        let points = (1..=n).map(|j| j as f64 * h).collect();
        Ok(Self {
            points,
            spacing: Spacing::Uniform,
        })
    }

    /// `n` points equally spaced in `ln r` from `r_min` to `r_max` inclusive.
    pub fn log_uniform(r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) || n < 2 {
            return Err(KgError::InvalidGrid(format!(
                "log grid needs 0 < r_min < r_max and n >= 2 (r_min={r_min}, r_max={r_max}, n={n})"
            )));
        }
        let step = (r_max / r_min).ln() / (n - 1) as f64;
        let mut points: Vec<f64> = (0..n).map(|i| r_min * (i as f64 * step).exp()).collect();
        points[n - 1] = r_max;
        Ok(Self {
            points,
            spacing: Spacing::LogUniform,
        })
    }

    pub fn from_points(points: Vec<f64>, spacing: Spacing) -> Result<Self> {
        if points.len() < 2 {
            return Err(KgError::InvalidGrid("need at least two points".into()));
        }
        if points[0] <= 0.0 || !points.iter().all(|r| r.is_finite()) {
            return Err(KgError::InvalidGrid("points must be finite and > 0".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(KgError::InvalidGrid("points must be strictly increasing".into()));
        }
        Ok(Self { points, spacing })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.points.last().expect("grid is never empty")
    }

    /// Uniform step, if the grid is uniform.
    pub fn step(&self) -> Option<f64> {
        match self.spacing {
            Spacing::Uniform => Some(self.points[0]),
            Spacing::LogUniform => None,
        }
    }
}
