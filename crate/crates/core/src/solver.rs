//! Finite-difference radial eigensolver with a self-consistency loop on the
//! system mass.
//!
//! Every mode reduces to a one-dimensional problem in `u = r R`,
//!
//! ```text
//! E' u = -K u'' + V_eff(r) u,        u(0) = u(r_max) = 0,
//! ```
//!
//! where the kinetic coefficient `K` and the effective potential `V_eff`
//! depend on the mode and, for the Klein-Gordon modes, on the system mass
//! `m = m0 + E'/c^2`. The effective potential behaves like `K c2 / r^2` at the
//! origin, so `u ~ r^s` with `s (s - 1) = c2`. For Klein-Gordon s-states with a
//! Coulomb tail `0 < s < 1`, and the second solution `r^(1-s)` also vanishes
//! at the origin; the discretization in [`assemble`] is built to reject it.

use crate::error::{KgError, Result};
use crate::model::{BoundState, PhysicalParams, PotentialKind, PotentialSpec, QuantumNumbers, RadialGrid, Spacing};

/// Which radial equation to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    /// Non-relativistic, `K = hbar^2 / (2 m0)` and `V_eff = U`.
    Schrodinger,
    /// Klein-Gordon with a vector potential only.
    KGVector,
    /// Klein-Gordon with independent scalar and vector potentials.
    KGScalarVector,
    /// Klein-Gordon with equal scalar and vector potentials, `V_eff = 2U`.
    KGEqual,
}

impl SolveMode {
    pub fn is_relativistic(&self) -> bool {
        !matches!(self, SolveMode::Schrodinger)
    }
}

/// Default number of grid points.
pub const DEFAULT_GRID_POINTS: usize = 8000;
/// Default fixed-point tolerance on `|dm| / m0`.
pub const DEFAULT_SC_TOLERANCE: f64 = 1e-12;
/// Default iteration cap of the self-consistency loop.
pub const DEFAULT_MAX_SC_ITERS: usize = 200;

/// A request for one bound state.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveRequest {
    pub mode: SolveMode,
    pub potential: PotentialSpec,
    pub qn: QuantumNumbers,
    pub grid: RadialGrid,
    pub sc_tolerance: f64,
    pub max_sc_iters: usize,
}

impl SolveRequest {
    /// A request on the default grid with default tolerances.
    pub fn new(mode: SolveMode, potential: PotentialSpec, n: u32, l: u32, p: &PhysicalParams) -> Result<Self> {
        let qn = QuantumNumbers::radial(n, l)?;
        let grid = default_grid(&potential, p, n, DEFAULT_GRID_POINTS)?;
        let req = Self {
            mode,
            potential,
            qn,
            grid,
            sc_tolerance: DEFAULT_SC_TOLERANCE,
            max_sc_iters: DEFAULT_MAX_SC_ITERS,
        };
        req.check()?;
        Ok(req)
    }

    pub fn with_grid(mut self, grid: RadialGrid) -> Self {
        self.grid = grid;
        self
    }

    /// Same request with the default outer radius and `points` grid points.
    pub fn with_points(self, points: usize) -> Result<Self> {
        let r_max = self.grid.r_max();
        Ok(self.with_grid(RadialGrid::uniform(r_max, points)?))
    }

    pub fn with_tolerance(mut self, sc_tolerance: f64, max_sc_iters: usize) -> Self {
        self.sc_tolerance = sc_tolerance;
        self.max_sc_iters = max_sc_iters;
        self
    }

    pub fn check(&self) -> Result<()> {
        self.potential.check()?;
        check_mode(self.mode, &self.potential)?;
        if self.grid.spacing() != Spacing::Uniform {
            return Err(KgError::InvalidGrid("the radial solver needs a uniform grid".into()));
        }
        if self.grid.len() < 8 {
            return Err(KgError::InvalidGrid(format!(
                "need at least 8 grid points, got {}",
                self.grid.len()
            )));
        }
        if !(self.sc_tolerance.is_finite() && self.sc_tolerance > 0.0) {
            return Err(KgError::InvalidParams(format!(
                "sc_tolerance must be > 0, got {}",
                self.sc_tolerance
            )));
        }
        if self.max_sc_iters == 0 {
            return Err(KgError::InvalidParams("max_sc_iters must be >= 1".into()));
        }
        Ok(())
    }
}

/// Default uniform grid for state `n` of `potential`.
///
/// The outer radius is `60 n^2 a0 / Z` for a Coulomb tail. A Hulthen potential
/// caps it at `60 n / lambda` and then widens it to at least 40 decay lengths
/// of the s-wave estimate, so weakly bound states near threshold still fit.
pub fn default_grid(potential: &PotentialSpec, p: &PhysicalParams, n: u32, points: usize) -> Result<RadialGrid> {
    let a0 = p.bohr_radius(p.rest_mass);
    let nf = n as f64;
    let kind = if potential.vector_part.is_none() {
        potential.scalar_part
    } else {
        potential.vector_part
    };
    let r_max = match kind {
        PotentialKind::None | PotentialKind::Coulomb => 60.0 * nf * nf * a0 / p.z_number,
        PotentialKind::Hulthen { z_number, lambda } => {
            let coulomb_like = 60.0 * nf * nf * a0 / z_number;
            let screened = 60.0 * nf / lambda;
            let hbar = p.hbar;
            let b = 2.0 * p.rest_mass * z_number * p.charge_sq() / (hbar * hbar * lambda);
            let kappa = 0.5 * lambda * (b / nf - nf);
            let decay = if kappa > 0.0 { 40.0 / kappa } else { screened };
            coulomb_like.min(screened).max(decay)
        }
    };
    RadialGrid::uniform(r_max, points)
}

fn check_mode(mode: SolveMode, potential: &PotentialSpec) -> Result<()> {
    match mode {
        SolveMode::Schrodinger | SolveMode::KGVector if !potential.scalar_part.is_none() => {
            Err(KgError::UnsupportedCombination(format!(
                "{mode:?} ignores scalar potentials, but a scalar part was given"
            )))
        }
        SolveMode::KGEqual if potential.scalar_part != potential.vector_part => Err(KgError::UnsupportedCombination(
            "KGEqual needs identical scalar and vector parts".into(),
        )),
        _ => Ok(()),
    }
}

/// Coefficients of `E' u = -K u'' + V_eff(r) u` at a frozen system mass.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialEquation {
    pub mode: SolveMode,
    pub l: u32,
    /// Kinetic coefficient `K`.
    pub kinetic: f64,
    /// `m0 + m` in the Klein-Gordon modes, `2 m0` in Schrodinger mode.
    pub mass_parameter: f64,
    /// Coefficient `c2` of the `K / r^2` singularity of `V_eff`.
    pub barrier: f64,
    potential: PotentialSpec,
    params: PhysicalParams,
    system_mass: f64,
}

/// Builds the radial equation for `mode` at system mass `m_sys`.
pub fn effective_radial_equation(
    mode: SolveMode,
    potential: &PotentialSpec,
    p: &PhysicalParams,
    m_sys: f64,
    l: u32,
) -> Result<RadialEquation> {
    p.check()?;
    potential.check()?;
    check_mode(mode, potential)?;
    if !(m_sys.is_finite() && m_sys > 0.0) {
        return Err(KgError::InvalidParams(format!("system mass must be > 0, got {m_sys}")));
    }
    let hbar_c = p.hbar * p.c;
    let centrifugal = l as f64 * (l as f64 + 1.0);
    let (mass_parameter, barrier) = match mode {
        SolveMode::Schrodinger => (2.0 * p.rest_mass, centrifugal),
        SolveMode::KGEqual => (p.rest_mass + m_sys, centrifugal),
        SolveMode::KGVector | SolveMode::KGScalarVector => {
            let gu = potential.vector_part.origin_strength(p) / hbar_c;
            let gs = potential.scalar_part.origin_strength(p) / hbar_c;
            (p.rest_mass + m_sys, centrifugal - (gu * gu - gs * gs))
        }
    };
    if barrier <= -0.25 {
        let z_alpha = (centrifugal - barrier).sqrt();
        return Err(KgError::SupercriticalCoupling {
            z_alpha,
            l,
            limit: l as f64 + 0.5,
        });
    }
    Ok(RadialEquation {
        mode,
        l,
        kinetic: p.hbar * p.hbar / mass_parameter,
        mass_parameter,
        barrier,
        potential: *potential,
        params: *p,
        system_mass: m_sys,
    })
}

impl RadialEquation {
    /// Exponent `s > 1/2` of the regular solution `u ~ r^s` at the origin.
    pub fn origin_exponent(&self) -> f64 {
        0.5 + (0.25 + self.barrier).sqrt()
    }

    /// `V_eff(r)`, centrifugal term included.
    pub fn effective_potential(&self, r: f64) -> f64 {
        self.kinetic * self.barrier / (r * r) + self.regular_part(r)
    }

    /// `V_eff(r) - K c2 / r^2`, at most `1/r` singular.
    pub fn regular_part(&self, r: f64) -> f64 {
        let p = &self.params;
        let u = self.potential.vector_part.value(p, r);
        let c2 = p.c * p.c;
        let mp = self.mass_parameter;
        match self.mode {
            SolveMode::Schrodinger => u,
            SolveMode::KGEqual => 2.0 * u,
            SolveMode::KGVector | SolveMode::KGScalarVector => {
                let s = self.potential.scalar_part.value(p, r);
                let linear = (2.0 * self.system_mass * u + 2.0 * p.rest_mass * s) / mp;
                let squares =
                    (excess_square(&self.potential.scalar_part, p, r) - excess_square(&self.potential.vector_part, p, r)) / (mp * c2);
                linear + squares
            }
        }
    }
}

impl RadialEquation {
    /// `A` in `W(r) = -A / r + O(1)`, extrapolated from two radii well inside `h`.
    fn coulomb_coefficient(&self, h: f64) -> f64 {
        let (r1, r2) = (1e-4 * h, 2e-4 * h);
        let (f1, f2) = (-r1 * self.regular_part(r1), -r2 * self.regular_part(r2));
        2.0 * f1 - f2
    }
}

/// `U(r)^2 - (g / r)^2` for origin strength `g`; exactly zero for Coulomb.
fn excess_square(kind: &PotentialKind, p: &PhysicalParams, r: f64) -> f64 {
    match kind {
        PotentialKind::None | PotentialKind::Coulomb => 0.0,
        PotentialKind::Hulthen { .. } => {
            let u = kind.value(p, r);
            let g = kind.origin_strength(p) / r;
            (u - g) * (u + g)
        }
    }
}

/// Symmetric tridiagonal matrix for the interior grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedOperator {
    pub diag: Vec<f64>,
    /// `offdiag[j]` couples points `j` and `j + 1`.
    pub offdiag: Vec<f64>,
    pub mass_parameter: f64,
    /// Interior radii; `u` vanishes at the origin and at `r_max`.
    pub radii: Vec<f64>,
    pub r_max: f64,
    /// `u_j = scale_j * y_j` for an eigenvector `y` of the symmetric matrix.
    scale: Vec<f64>,
}

impl DiscretizedOperator {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below `x` (Sturm count).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for (j, d) in self.diag.iter().enumerate() {
            let e2 = if j == 0 { 0.0 } else { self.offdiag[j - 1] * self.offdiag[j - 1] };
            q = d - x - if j == 0 { 0.0 } else { e2 / q };
            if q == 0.0 {
                q = -f64::EPSILON * (d.abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in 0..n {
            let left = if j > 0 { self.offdiag[j - 1].abs() } else { 0.0 };
            let right = if j + 1 < n { self.offdiag[j].abs() } else { 0.0 };
            lo = lo.min(self.diag[j] - left - right);
            hi = hi.max(self.diag[j] + left + right);
        }
        (lo, hi)
    }
}

/// Finite-difference operator for `eq` on the uniform `grid`.
///
/// With `shift = l + 1 - s`, the equation is discretized for `v = r^shift u`,
///
/// ```text
/// -K v'' + (2 K shift / r) v' + [K (l(l+1) - 2 shift (l+1)) / r^2 + W] v = E' v,
/// ```
///
/// where `W` is the regular part of the potential. `v` is a power series in
/// `r` starting at `r^(l+1)`. For `l = 0` the rows are fitted to be exact on
/// `r`, `r^2` and `r^3`, which keeps the second solution `r^(2 shift)` (also
/// zero at the origin) from leaking into the discrete state. The resulting
/// matrix is symmetrized by a diagonal similarity.
pub fn assemble(eq: &RadialEquation, grid: &RadialGrid) -> Result<DiscretizedOperator> {
    let h = grid
        .step()
        .ok_or_else(|| KgError::InvalidGrid("the radial solver needs a uniform grid".into()))?;
    let radii: Vec<f64> = grid.points()[..grid.len() - 1].to_vec();
    let k = eq.kinetic;
    let kh2 = k / (h * h);
    let shift = eq.l as f64 + 1.0 - eq.origin_exponent();
    let n = radii.len();
    let mut diag = Vec::with_capacity(n);
    let mut offdiag = Vec::with_capacity(n.saturating_sub(1));
    let mut scale = Vec::with_capacity(n);
    if shift == 0.0 {
        for &r in &radii {
            diag.push(2.0 * kh2 + eq.effective_potential(r));
            scale.push(1.0);
        }
        offdiag.resize(n.saturating_sub(1), -kh2);
    } else {
        let l = eq.l as f64;
        let barrier = l * (l + 1.0) - 2.0 * shift * (l + 1.0);
        // Row j reads kh2 * (-lower_j v_{j-1} + centre_j v_j - upper_j v_{j+1}).
        // First row for l = 0: exact on r^3 and on the two leading terms
        // r + a1 r^2 of the regular solution, where a1 follows from the
        // Coulomb coefficient of W.
        let first = if eq.l == 0 {
            let coulomb = eq.coulomb_coefficient(h);
            let alpha = -coulomb / (2.0 * k * (1.0 - shift)) * h;
            let upper = (6.0 - 4.0 * shift + alpha * (4.0 - 2.0 * shift)) / (6.0 + 4.0 * alpha);
            (0.0, 8.0 * upper - 6.0 + 4.0 * shift, upper)
        } else {
            (0.0, 2.0 + barrier, 1.0 - shift)
        };
        let row = |j: f64| -> (f64, f64, f64) {
            if j == 1.0 {
                first
            } else if eq.l == 0 {
                (1.0 + shift / (j - 1.0), 2.0, 1.0 - shift / (j + 1.0))
            } else {
                (1.0 + shift / j, 2.0 + barrier / (j * j), 1.0 - shift / j)
            }
        };
        let mut t = 1.0_f64;
        for (idx, &r) in radii.iter().enumerate() {
            let j = (idx + 1) as f64;
            let (_, centre, upper) = row(j);
            diag.push(kh2 * centre + eq.regular_part(r));
            // u = r^{-shift} v = r^{-shift} y / t
            scale.push(r.powf(-shift) / t);
            if idx + 1 < n {
                let (lower_next, _, _) = row(j + 1.0);
                offdiag.push(-kh2 * (upper * lower_next).sqrt());
                t *= (upper / lower_next).sqrt();
            }
        }
    }
    Ok(DiscretizedOperator {
        diag,
        offdiag,
        mass_parameter: eq.mass_parameter,
        radii,
        r_max: grid.r_max(),
        scale,
    })
}

/// Eigenvalue and radial samples of one discrete state.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub e_prime: f64,
    /// `(r, u(r))` including the wall `u(r_max) = 0`, normalized so that
    /// `h * sum u^2 = 1` with the sign chosen to make `u` positive near the origin.
    pub samples: Vec<(f64, f64)>,
    pub node_count: usize,
}

/// Eigenpair whose eigenvector has exactly `node_target` sign changes.
///
/// The eigenvalue with index `node_target` is found by Sturm bisection to
/// full precision; the vector follows by inverse iteration.
pub fn inner_eigensolve(op: &DiscretizedOperator, node_target: usize) -> Result<Eigenpair> {
    if op.len() < 3 || node_target + 1 >= op.len() {
        return Err(KgError::StateNotFound { node_target });
    }
    if op.count_below(0.0) <= node_target {
        return Err(KgError::StateNotFound { node_target });
    }
    let e = bisect_eigenvalue(op, node_target);
    let y = inverse_iteration(op, e);
    let node_count = count_nodes(&y);
    if node_count != node_target {
        return Err(KgError::StateNotFound { node_target });
    }
    let h = op.radii[0];
    let mut u: Vec<f64> = y.iter().zip(&op.scale).map(|(y, s)| y * s).collect();
    let norm = (h * u.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let sign = if u.iter().find(|v| v.abs() > 0.0).copied().unwrap_or(1.0) < 0.0 {
        -1.0
    } else {
        1.0
    };
    for v in &mut u {
        *v *= sign / norm;
    }
    let mut samples: Vec<(f64, f64)> = op.radii.iter().copied().zip(u).collect();
    samples.push((op.r_max, 0.0));
    Ok(Eigenpair {
        e_prime: e,
        samples,
        node_count,
    })
}

fn bisect_eigenvalue(op: &DiscretizedOperator, index: usize) -> f64 {
    let (mut lo, _) = op.gershgorin();
    let mut hi = 0.0_f64;
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if op.count_below(mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn inverse_iteration(op: &DiscretizedOperator, e: f64) -> Vec<f64> {
    let n = op.len();
    // Shift just off the eigenvalue keeps the factorization nonsingular.
    let shift = e - 64.0 * f64::EPSILON * e.abs().max(f64::MIN_POSITIVE);
    let mut x: Vec<f64> = (0..n).map(|j| 1.0 + 0.5 * ((j * 7919) % 13) as f64 / 13.0).collect();
    for _ in 0..3 {
        x = solve_shifted(op, shift, &x);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in &mut x {
            *v /= norm;
        }
    }
    x
}

/// Solves `(A - shift) x = b` by the Thomas algorithm.
fn solve_shifted(op: &DiscretizedOperator, shift: f64, b: &[f64]) -> Vec<f64> {
    let n = op.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut piv = op.diag[0] - shift;
    if piv == 0.0 {
        piv = tiny;
    }
    c[0] = if n > 1 { op.offdiag[0] / piv } else { 0.0 };
    d[0] = b[0] / piv;
    for j in 1..n {
        let a = op.offdiag[j - 1];
        piv = op.diag[j] - shift - a * c[j - 1];
        if piv == 0.0 {
            piv = tiny;
        }
        c[j] = if j + 1 < n { op.offdiag[j] / piv } else { 0.0 };
        d[j] = (b[j] - a * d[j - 1]) / piv;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for j in (0..n - 1).rev() {
        x[j] = d[j] - c[j] * x[j + 1];
    }
    x
}

/// Sign changes of `values`, ignoring entries at the rounding level of the peak.
pub fn count_nodes(values: &[f64]) -> usize {
    let peak = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let floor = 1e-10 * peak;
    let mut last = 0.0_f64;
    let mut nodes = 0;
    for &v in values {
        if v.abs() <= floor {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            nodes += 1;
        }
        last = v;
    }
    nodes
}

/// Largest `|u|` in the outer 5% of the grid relative to the peak.
fn tail_ratio(samples: &[(f64, f64)]) -> f64 {
    let r_max = samples.last().map(|s| s.0).unwrap_or(0.0);
    let peak = samples.iter().fold(0.0_f64, |m, s| m.max(s.1.abs()));
    let tail = samples
        .iter()
        .filter(|s| s.0 >= 0.95 * r_max)
        .fold(0.0_f64, |m, s| m.max(s.1.abs()));
    tail / peak
}

/// Tail ratio above which a state is reported as not fitting its grid.
pub const TAIL_LIMIT: f64 = 1e-6;

/// Solves for the state `req.qn`, iterating `m_{k+1} = m0 + E'(m_k) / c^2`
/// in the Klein-Gordon modes.
///
/// The iteration starts at `m = m0`. If a step increases the residual, the
/// next update is damped by one half.
pub fn solve_self_consistent(req: &SolveRequest, p: &PhysicalParams) -> Result<BoundState> {
    p.check()?;
    req.check()?;
    let l = req.qn.l();
    let target = req.qn.radial_nodes();
    let c2 = p.c * p.c;
    let solve_at = |m: f64| -> Result<Eigenpair> {
        let eq = effective_radial_equation(req.mode, &req.potential, p, m, l)?;
        inner_eigensolve(&assemble(&eq, &req.grid)?, target)
    };

    let finish = |pair: Eigenpair, iterations: usize, history: Vec<f64>| -> Result<BoundState> {
        let ratio = tail_ratio(&pair.samples);
        if ratio > TAIL_LIMIT {
            return Err(KgError::TailNotConverged { ratio });
        }
        let mut state = BoundState::from_e_prime(req.qn, pair.e_prime, p);
        state.node_count = pair.node_count;
        state.radial_samples = pair.samples;
        state.iterations = iterations;
        state.residual = history.last().copied().unwrap_or(0.0);
        state.residual_history = history;
        Ok(state)
    };

    if !req.mode.is_relativistic() {
        let pair = solve_at(p.rest_mass)?;
        return finish(pair, 1, Vec::new());
    }

    let mut m = p.rest_mass;
    let mut history = Vec::new();
    let mut damping = 1.0;
    for iteration in 1..=req.max_sc_iters {
        let pair = solve_at(m)?;
        let target_mass = p.rest_mass + pair.e_prime / c2;
        let residual = (target_mass - m).abs() / p.rest_mass;
        if history.last().is_some_and(|&prev| residual > prev) {
            damping = 0.5;
        }
        history.push(residual);
        if residual < req.sc_tolerance {
            return finish(pair, iteration, history);
        }
        let next = m + damping * (target_mass - m);
        if iteration == req.max_sc_iters {
            return Err(KgError::NoConvergence {
                iterations: iteration,
                last: next,
                previous: m,
            });
        }
        m = next;
    }
    unreachable!("loop returns on its last iteration")
}

/// `(2^p f(h/2) - f(h)) / (2^p - 1)` generalized to a grid ratio `ratio = h_coarse / h_fine`.
pub fn richardson(coarse: f64, fine: f64, ratio: f64, order: f64) -> f64 {
    let w = ratio.powf(order);
    (w * fine - coarse) / (w - 1.0)
}

/// Self-consistent solves on two grids and their second-order extrapolation.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolatedState {
    pub coarse: BoundState,
    pub fine: BoundState,
    /// Extrapolated `E'`.
    pub e_prime: f64,
    /// Extrapolated total energy `E' + m0 c^2`.
    pub e_total: f64,
}

/// Solves `req` with `n_coarse` and `n_fine` points over the same outer radius
/// and extrapolates `E'` assuming second-order convergence.
pub fn solve_extrapolated(req: &SolveRequest, p: &PhysicalParams, n_coarse: usize, n_fine: usize) -> Result<ExtrapolatedState> {
    let coarse = solve_self_consistent(&req.clone().with_points(n_coarse)?, p)?;
    let fine = solve_self_consistent(&req.clone().with_points(n_fine)?, p)?;
    let e_prime = richardson(coarse.e_prime, fine.e_prime, n_fine as f64 / n_coarse as f64, 2.0);
    Ok(ExtrapolatedState {
        coarse,
        fine,
        e_prime,
        e_total: e_prime + p.rest_energy(),
    })
}

/// One row of a grid-refinement study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub points: usize,
    pub e_prime: f64,
    /// Second-order extrapolation from this and the previous grid.
    pub richardson: Option<f64>,
    /// Order observed from this and the two previous grids.
    pub observed_order: Option<f64>,
}

/// `E'` on each grid size (same outer radius), with Richardson estimates and
/// observed orders. Observed orders assume a constant refinement ratio.
pub fn convergence_study(req: &SolveRequest, p: &PhysicalParams, grid_sizes: &[usize]) -> Result<Vec<ConvergenceRow>> {
    if grid_sizes.len() < 3 {
        return Err(KgError::InvalidGrid(format!(
            "a convergence study needs at least 3 grid sizes, got {}",
            grid_sizes.len()
        )));
    }
    if grid_sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(KgError::InvalidGrid("grid sizes must be strictly increasing".into()));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(grid_sizes.len());
    for (i, &points) in grid_sizes.iter().enumerate() {
        let e_prime = solve_self_consistent(&req.clone().with_points(points)?, p)?.e_prime;
        let richardson_value = (i >= 1).then(|| {
            let prev = &rows[i - 1];
            richardson(prev.e_prime, e_prime, points as f64 / prev.points as f64, 2.0)
        });
        let observed_order = (i >= 2).then(|| {
            let d1 = rows[i - 1].e_prime - rows[i - 2].e_prime;
            let d2 = e_prime - rows[i - 1].e_prime;
            (d1 / d2).abs().ln() / (points as f64 / rows[i - 1].points as f64).ln()
        });
        rows.push(ConvergenceRow {
            points,
            e_prime,
            richardson: richardson_value,
            observed_order,
        });
    }
    Ok(rows)
}

/// Schrodinger counterpart of a [`SolveMode::KGEqual`] problem at system mass
/// `m_sys`: rest mass `(m0 + m) / 2` and the potential doubled.
///
/// Doubling is applied to the charge number, which is exact in floating point,
/// so both problems assemble to bit-identical operators.
pub fn equal_potential_counterpart(
    p: &PhysicalParams,
    potential: &PotentialSpec,
    m_sys: f64,
) -> Result<(PhysicalParams, PotentialSpec)> {
    check_mode(SolveMode::KGEqual, potential)?;
    let mut mapped = *p;
    mapped.rest_mass = 0.5 * (p.rest_mass + m_sys);
    let kind = match potential.vector_part {
        PotentialKind::None => PotentialKind::None,
        PotentialKind::Coulomb => {
            mapped.z_number = 2.0 * p.z_number;
            PotentialKind::Coulomb
        }
        PotentialKind::Hulthen { z_number, lambda } => PotentialKind::Hulthen {
            z_number: 2.0 * z_number,
            lambda,
        },
    };
    Ok((mapped, PotentialSpec::vector(kind)))
}

/// Closed-form s-wave level of the equal scalar-vector Hulthen problem.
///
/// At fixed system mass the problem is a Schrodinger problem with reduced mass
/// `mu = (m0 + m) / 2` in the potential `2U`, whose s-levels are
/// `E' = -(hbar^2 lambda^2 / (8 mu)) (b/n - n)^2` with
/// `b = 2 mu (2 Z e_s^2) / (hbar^2 lambda)`. The mass is then iterated to self-consistency.
pub fn hulthen_equal_s_level(p: &PhysicalParams, z_number: f64, lambda: f64, n: u32, tol: f64) -> Result<BoundState> {
    p.check()?;
    PotentialSpec::vector(PotentialKind::Hulthen { z_number, lambda }).check()?;
    let qn = QuantumNumbers::radial(n, 0)?;
    let nf = n as f64;
    let hbar2 = p.hbar * p.hbar;
    let level = |m: f64| -> Result<f64> {
        let mu = 0.5 * (p.rest_mass + m);
        let b = 2.0 * mu * 2.0 * z_number * p.charge_sq() / (hbar2 * lambda);
        if b <= nf * nf {
            return Err(KgError::StateNotFound { node_target: qn.radial_nodes() });
        }
        Ok(-(hbar2 * lambda * lambda / (8.0 * mu)) * (b / nf - nf).powi(2))
    };
    let mut m = p.rest_mass;
    let mut history = Vec::new();
    for iteration in 1..=DEFAULT_MAX_SC_ITERS {
        let e = level(m)?;
        let next = p.rest_mass + e / (p.c * p.c);
        let residual = (next - m).abs() / p.rest_mass;
        history.push(residual);
        if residual < tol {
            let mut state = BoundState::from_e_prime(qn, e, p);
            state.iterations = iteration;
            state.residual = residual;
            state.residual_history = history;
            return Ok(state);
        }
        m = next;
    }
    Err(KgError::NoConvergence {
        iterations: DEFAULT_MAX_SC_ITERS,
        last: m,
        previous: history.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coulomb::{energy_level, schrodinger_level};

    fn hydrogen() -> PhysicalParams {
        PhysicalParams::natural(1.0)
    }

    #[test]
    fn schrodinger_hydrogen_ground_and_first_excited() {
        let p = hydrogen();
        for (n, target) in [(1u32, 0usize), (2, 1)] {
            let req = SolveRequest::new(SolveMode::Schrodinger, PotentialSpec::vector(PotentialKind::Coulomb), n, 0, &p).unwrap();
            let ex = solve_extrapolated(&req, &p, 4000, 8000).unwrap();
            let exact = schrodinger_level(&p, n);
            assert_eq!(ex.fine.node_count, target);
            let tol = if n == 1 { 1e-8 } else { 1e-7 };
            assert!(((ex.e_prime - exact) / exact).abs() < tol, "n={n}: {} vs {exact}", ex.e_prime);
        }
    }

    #[test]
    fn free_operator_has_no_bound_state() {
        let p = hydrogen();
        let grid = RadialGrid::uniform(100.0, 500).unwrap();
        let eq = effective_radial_equation(SolveMode::KGEqual, &PotentialSpec::free(), &p, 1.0, 0).unwrap();
        let op = assemble(&eq, &grid).unwrap();
        assert!(op.diag.iter().all(|&d| d == op.diag[0]));
        assert!(matches!(inner_eigensolve(&op, 0), Err(KgError::StateNotFound { node_target: 0 })));
    }

    #[test]
    fn kg_coulomb_barrier_shift() {
        let p = PhysicalParams::with_z_alpha(0.3);
        let eq = effective_radial_equation(SolveMode::KGVector, &PotentialSpec::vector(PotentialKind::Coulomb), &p, 1.0, 0).unwrap();
        assert!((eq.barrier + 0.09).abs() < 1e-16);
        let sigma0 = crate::coulomb::sigma_closed(&p, 0).unwrap().sigma_l;
        assert!((eq.origin_exponent() - (1.0 - sigma0)).abs() < 1e-15);
    }

    #[test]
    fn scalar_part_rejected_where_ignored() {
        let p = hydrogen();
        let spec = PotentialSpec::equal(PotentialKind::Coulomb);
        for mode in [SolveMode::Schrodinger, SolveMode::KGVector] {
            assert!(matches!(
                effective_radial_equation(mode, &spec, &p, 1.0, 0),
                Err(KgError::UnsupportedCombination(_))
            ));
        }
        let unequal = PotentialSpec::new(PotentialKind::Coulomb, PotentialKind::None).unwrap();
        assert!(matches!(
            effective_radial_equation(SolveMode::KGEqual, &unequal, &p, 1.0, 0),
            Err(KgError::UnsupportedCombination(_))
        ));
    }

    #[test]
    fn operator_is_symmetric_with_negative_couplings() {
        let p = PhysicalParams::with_z_alpha(0.2);
        let eq = effective_radial_equation(SolveMode::KGVector, &PotentialSpec::vector(PotentialKind::Coulomb), &p, 0.99, 1).unwrap();
        let op = assemble(&eq, &RadialGrid::uniform(300.0, 400).unwrap()).unwrap();
        assert_eq!(op.offdiag.len(), op.diag.len() - 1);
        assert!(op.offdiag.iter().all(|&e| e < 0.0));
    }

    #[test]
    fn kg_vector_hydrogen_matches_closed_form() {
        let p = hydrogen();
        let req = SolveRequest::new(SolveMode::KGVector, PotentialSpec::vector(PotentialKind::Coulomb), 1, 0, &p).unwrap();
        let ex = solve_extrapolated(&req, &p, 4000, 8000).unwrap();
        let exact = energy_level(&p, 1, 0).unwrap();
        assert!(((ex.e_total - exact.e_total) / exact.e_total).abs() < 1e-6);
        assert!(((ex.e_prime - exact.e_prime) / exact.e_prime).abs() < 1e-6);
        assert!(ex.fine.iterations <= 30);
    }

    #[test]
    fn over_tight_tolerance_never_returns_a_wrong_value() {
        let p = PhysicalParams::with_z_alpha(0.2);
        let req = SolveRequest::new(SolveMode::KGVector, PotentialSpec::vector(PotentialKind::Coulomb), 1, 0, &p)
            .unwrap()
            .with_points(2000)
            .unwrap()
            .with_tolerance(1e-15, 200);
        match solve_self_consistent(&req, &p) {
            Ok(state) => assert!(state.residual < 1e-15),
            Err(e) => assert!(matches!(e, KgError::NoConvergence { .. })),
        }
        let capped = req.clone().with_tolerance(1e-15, 1);
        assert!(matches!(solve_self_consistent(&capped, &p), Err(KgError::NoConvergence { iterations: 1, .. })));
    }

    #[test]
    fn schrodinger_order_near_two() {
        let p = hydrogen();
        let req = SolveRequest::new(SolveMode::Schrodinger, PotentialSpec::vector(PotentialKind::Coulomb), 1, 0, &p).unwrap();
        let rows = convergence_study(&req, &p, &[1000, 2000, 4000]).unwrap();
        let order = rows[2].observed_order.unwrap();
        assert!((1.8..=2.2).contains(&order), "order {order}");
    }

    #[test]
    fn equal_potential_operator_is_bit_identical() {
        let p = PhysicalParams::natural(1.0);
        let grid = RadialGrid::uniform(60.0 / p.alpha, 3000).unwrap();
        for kind in [PotentialKind::Coulomb, PotentialKind::hulthen(&p, 1.0, 0.2)] {
            let spec = PotentialSpec::equal(kind);
            let m = 0.99993;
            for l in 0..3 {
                let kg = assemble(&effective_radial_equation(SolveMode::KGEqual, &spec, &p, m, l).unwrap(), &grid).unwrap();
                let (ps, ss) = equal_potential_counterpart(&p, &spec, m).unwrap();
                let sch = assemble(&effective_radial_equation(SolveMode::Schrodinger, &ss, &ps, ps.rest_mass, l).unwrap(), &grid).unwrap();
                assert_eq!(kg.diag, sch.diag);
                assert_eq!(kg.offdiag, sch.offdiag);
                assert_eq!(kg.mass_parameter, sch.mass_parameter);
            }
        }
    }

    #[test]
    fn hulthen_equal_ground_state_matches_closed_form() {
        let p = PhysicalParams::natural(1.0);
        let kind = PotentialKind::hulthen(&p, 1.0, 0.2);
        let PotentialKind::Hulthen { z_number, lambda } = kind else { unreachable!() };
        let req = SolveRequest::new(SolveMode::KGEqual, PotentialSpec::equal(kind), 1, 0, &p).unwrap();
        let ex = solve_extrapolated(&req, &p, 8000, 16000).unwrap();
        let exact = hulthen_equal_s_level(&p, z_number, lambda, 1, 1e-14).unwrap();
        assert!(((ex.e_prime - exact.e_prime) / exact.e_prime).abs() < 1e-8);
    }

    #[test]
    fn hulthen_closed_form_reduces_to_schrodinger_shape() {
        // Weak binding: mu -> m0, so E' -> -(lambda^2 / 8)(b - 1)^2 with b = 4 Z alpha / lambda.
        let p = PhysicalParams::natural(1.0);
        let lambda = 1e-3;
        let e = hulthen_equal_s_level(&p, 1.0, lambda, 1, 1e-15).unwrap().e_prime;
        let b = 4.0 * p.alpha / lambda;
        let nonrel = -(lambda * lambda / 8.0) * (b - 1.0).powi(2);
        assert!(((e - nonrel) / nonrel).abs() < 1e-4);
        assert!(matches!(hulthen_equal_s_level(&p, 1.0, 1.0, 1, 1e-12), Err(KgError::StateNotFound { .. })));
    }
}
