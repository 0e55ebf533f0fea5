//! Boosts along the x-axis of the characteristic quantities `(E, p, U)`.
//!
//! The kinetic part `E - U` and the momentum transform like the components
//! of a free four-momentum:
//!
//! ```text
//! p_x' = gamma p_x - gamma (v/c^2) (E - U)
//! E' - U' = gamma (E - U) - gamma v p_x
//! ```
//!
//! The potential `U'` in the target frame is supplied by the caller; no
//! transformation law for the potential field is assumed.

use crate::error::{KgError, Result};

/// Energy, momentum and local potential energy of a particle in one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacterState {
    /// Total energy including the rest energy.
    pub e_total: f64,
    pub p: [f64; 3],
    pub u_potential: f64,
}

impl CharacterState {
    pub fn new(e_total: f64, p: [f64; 3], u_potential: f64) -> Self {
        Self { e_total, p, u_potential }
    }

    /// A free particle of mass `m0` at rest.
    pub fn at_rest(m0: f64, c: f64) -> Self {
        Self::new(m0 * c * c, [0.0; 3], 0.0)
    }

    /// `E - U`.
    pub fn kinetic_energy(&self) -> f64 {
        self.e_total - self.u_potential
    }
}

/// A boost with speed `v` along `+x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostSpec {
    pub v: f64,
    pub c: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl BoostSpec {
    pub fn new(v: f64, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(KgError::InvalidParams(format!("speed of light must be positive, got {c}")));
        }
        if !v.is_finite() || v.abs() >= c {
            return Err(KgError::SuperluminalBoost { v, c });
        }
        let beta = v / c;
        // (1 - beta)(1 + beta) loses less precision than 1 - beta^2 near |beta| = 1.
        let gamma = 1.0 / ((1.0 - beta) * (1.0 + beta)).sqrt();
        Ok(Self { v, c, beta, gamma })
    }

    pub fn from_beta(beta: f64, c: f64) -> Result<Self> {
        Self::new(beta * c, c)
    }

    /// The boost with velocity `-v`.
    pub fn inverse(&self) -> Self {
        Self {
            v: -self.v,
            beta: -self.beta,
            ..*self
        }
    }

    /// The single boost equal to `self` followed by `next`, by relativistic
    /// velocity addition.
    pub fn then(&self, next: &BoostSpec) -> Result<Self> {
        let beta = (self.beta + next.beta) / (1.0 + self.beta * next.beta);
        Self::from_beta(beta, self.c)
    }
}

/// Transforms a state from frame `K` into the frame `K'` moving with `b`.
/// The potential in `K'` is `u_prime`.
pub fn boost_forward(s: &CharacterState, b: &BoostSpec, u_prime: f64) -> CharacterState {
    let w = s.kinetic_energy();
    let px = b.gamma * s.p[0] - b.gamma * (b.v / (b.c * b.c)) * w;
    let w_prime = b.gamma * w - b.gamma * b.v * s.p[0];
    CharacterState::new(w_prime + u_prime, [px, s.p[1], s.p[2]], u_prime)
}

/// Transforms a state from `K'` back into `K`, where the potential is `u`.
pub fn boost_backward(s: &CharacterState, b: &BoostSpec, u: f64) -> CharacterState {
    let w_prime = s.kinetic_energy();
    let px = b.gamma * s.p[0] + b.gamma * (b.v / (b.c * b.c)) * w_prime;
    let w = b.gamma * w_prime + b.gamma * b.v * s.p[0];
    CharacterState::new(w + u, [px, s.p[1], s.p[2]], u)
}

/// `(E - U)^2 - c^2 |p|^2`, equal to `m0^2 c^4` on shell.
pub fn invariant_mass_sq(s: &CharacterState, c: f64) -> f64 {
    let w = s.kinetic_energy();
    let p2: f64 = s.p.iter().map(|x| x * x).sum();
    w * w - c * c * p2
}

/// A spacetime event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub t: f64,
    pub r: [f64; 3],
}

/// Coordinates of `e` in the frame moving with `b`.
pub fn boost_event(e: &Event, b: &BoostSpec) -> Event {
    let t = b.gamma * (e.t - b.v * e.r[0] / (b.c * b.c));
    let x = b.gamma * (e.r[0] - b.v * e.t);
    Event { t, r: [x, e.r[1], e.r[2]] }
}

/// Plane-wave phase `E t - p.r` (in units of `hbar`).
pub fn plane_wave_phase(s: &CharacterState, e: &Event) -> f64 {
    s.e_total * e.t - s.p.iter().zip(&e.r).map(|(p, x)| p * x).sum::<f64>()
}
