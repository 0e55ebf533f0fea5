//! Closed-form spectrum of a spinless particle in a Coulomb vector potential
//! (pionic hydrogen, nuclear motion ignored).
//!
//! The quantum defect `sigma_l = l + 1/2 - sqrt((l + 1/2)^2 - Z^2 alpha^2)`
//! shifts the principal quantum number, and the level is
//! `E_n = m0 c^2 [1 + Z^2 alpha^2 / (n - sigma_l)^2]^{-1/2}`.

use crate::error::Result;
use crate::model::{check_subcritical, validate_params, BoundState, PhysicalParams, QuantumNumbers};

/// Quantum defect of angular momentum `l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefectValue {
    pub sigma_l: f64,
    pub l: u32,
}

/// Root of the quadratic for `|E'|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branch {
    #[default]
    Positive,
    Negative,
}

/// Closed form of the quantum defect.
///
/// Evaluated as `Z^2 alpha^2 / (l + 1/2 + sqrt((l + 1/2)^2 - Z^2 alpha^2))`,
/// which avoids the cancellation of the textbook form when `Z alpha` is small.
pub fn sigma_closed(p: &PhysicalParams, l: u32) -> Result<DefectValue> {
    p.check()?;
    check_subcritical(p, l)?;
    Ok(DefectValue {
        sigma_l: defect(p.z_alpha(), l),
        l,
    })
}

pub(crate) fn defect(z_alpha: f64, l: u32) -> f64 {
    let half = l as f64 + 0.5;
    let x = z_alpha * z_alpha;
    x / (half + ((half - z_alpha) * (half + z_alpha)).sqrt())
}

/// Partial sum of the power series of the quantum defect,
/// `sum_{k=1}^{k_max} 2^{k-1} (2k-3)!! / (k! (2l+1)^{2k-1}) (Z alpha)^{2k}`,
/// with `(-1)!! = 1`.
pub fn sigma_series(p: &PhysicalParams, l: u32, k_max: u32) -> Result<DefectValue> {
    p.check()?;
    check_subcritical(p, l)?;
    let x = p.z_alpha() * p.z_alpha();
    let two_l1 = 2.0 * l as f64 + 1.0;
    let ratio_base = x / (two_l1 * two_l1);
    // k = 1 term, then t_{k+1} = t_k * 2 (2k - 1) / (k + 1) * x / (2l+1)^2.
    let mut term = x / two_l1;
    let mut terms = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max {
        terms.push(term);
        let k = k as f64;
        term *= 2.0 * (2.0 * k - 1.0) / (k + 1.0) * ratio_base;
    }
    // Smallest terms first.
    let sigma_l = terms.iter().rev().sum();
    Ok(DefectValue { sigma_l, l })
}

fn check_state(p: &PhysicalParams, n: u32, l: u32) -> Result<QuantumNumbers> {
    let qn = QuantumNumbers::radial(n, l)?;
    validate_params(*p, qn)?;
    Ok(qn)
}

/// `x = Z^2 alpha^2 / (n - sigma_l)^2`.
fn coupling_ratio(p: &PhysicalParams, n: u32, l: u32) -> f64 {
    let za = p.z_alpha();
    let shifted = n as f64 - defect(za, l);
    let t = za / shifted;
    t * t
}

/// Energy level on the positive branch, as a [`BoundState`] without radial samples.
///
/// `e_prime` is computed in the cancellation-free form
/// `-m0 c^2 x / (sqrt(1+x) (1 + sqrt(1+x)))`.
pub fn energy_level(p: &PhysicalParams, n: u32, l: u32) -> Result<BoundState> {
    let qn = check_state(p, n, l)?;
    let x = coupling_ratio(p, n, l);
    let root = (1.0 + x).sqrt();
    let e_prime = -p.rest_energy() * x / (root * (1.0 + root));
    Ok(BoundState::from_e_prime(qn, e_prime, p))
}

/// Total energy `E_n` on either branch of `E_n = -+ (n - sigma_l) m0 c^2 / sqrt(Z^2 alpha^2 + (n - sigma_l)^2)`.
///
/// The negative branch has no bound-state interpretation here; it is exposed
/// only so the second root can be inspected.
pub fn level_energy(p: &PhysicalParams, n: u32, l: u32, branch: Branch) -> Result<f64> {
    check_state(p, n, l)?;
    let e = p.rest_energy() / (1.0 + coupling_ratio(p, n, l)).sqrt();
    Ok(match branch {
        Branch::Positive => e,
        Branch::Negative => -e,
    })
}

/// The `(Z alpha)^4` truncation of the level expansion,
/// `m0 c^2 [1 - Z^2 alpha^2 / (2 n^2) - Z^4 alpha^4 / (2 n^4) (n / (l + 1/2) - 3/4)]`.
pub fn energy_expansion(p: &PhysicalParams, n: u32, l: u32) -> Result<f64> {
    Ok(p.rest_energy() + energy_expansion_prime(p, n, l)?)
}

/// [`energy_expansion`] without the rest energy. Comparing `E'` values avoids
/// the rounding of `m0 c^2` that swamps the `(Z alpha)^6` remainder at small coupling.
pub fn energy_expansion_prime(p: &PhysicalParams, n: u32, l: u32) -> Result<f64> {
    QuantumNumbers::radial(n, l)?;
    p.check()?;
    let x = p.z_alpha() * p.z_alpha();
    let n2 = (n as f64).powi(2);
    let bracket = -x / (2.0 * n2) - x * x / (2.0 * n2 * n2) * (n as f64 / (l as f64 + 0.5) - 0.75);
    Ok(p.rest_energy() * bracket)
}

/// System mass `m = m0 [1 + Z^2 alpha^2 / (n - sigma_l)^2]^{-1/2}`.
pub fn system_mass(p: &PhysicalParams, n: u32, l: u32) -> Result<f64> {
    Ok(energy_level(p, n, l)?.system_mass)
}

/// Non-relativistic hydrogen-like level `-Z^2 alpha^2 m0 c^2 / (2 n^2)`.
pub fn schrodinger_level(p: &PhysicalParams, n: u32) -> f64 {
    let za = p.z_alpha();
    -za * za * p.rest_energy() / (2.0 * (n as f64).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::KgError;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    // Reference values below were computed with 40-digit mpmath.
    const SIGMA0_HYDROGEN: f64 = 5.325_419_052_947_826e-5;
    const SIGMA0_ZA01: f64 = 1.010_205_144_336_438e-2;
    const E1_HYDROGEN: f64 = 0.999_973_372_550_224_7;
    const E1_ZA01: f64 = 0.994_936_153_005_124_1;
    const M_N2_L0_ZA01: f64 = 0.998_739_662_799_116_4;

    #[test]
    fn sigma_vanishes_without_coupling() {
        let p = PhysicalParams::with_z_alpha(1e-300);
        for l in 0..4 {
            assert_eq!(sigma_closed(&p, l).unwrap().sigma_l, 0.0);
        }
    }

    #[test]
    fn sigma_reference_values() {
        let h = PhysicalParams::natural(1.0);
        assert_relative_eq!(sigma_closed(&h, 0).unwrap().sigma_l, SIGMA0_HYDROGEN, max_relative = 1e-14);
        let p = PhysicalParams::with_z_alpha(0.1);
        assert_relative_eq!(sigma_closed(&p, 0).unwrap().sigma_l, SIGMA0_ZA01, max_relative = 1e-14);
        assert_relative_eq!(0.5 - 0.24f64.sqrt(), SIGMA0_ZA01, max_relative = 1e-12);
    }

    #[test]
    fn series_first_terms() {
        let p = PhysicalParams::with_z_alpha(0.1);
        assert_relative_eq!(sigma_series(&p, 0, 1).unwrap().sigma_l, 0.01, max_relative = 1e-15);

        let h = PhysicalParams::natural(1.0);
        let a = h.alpha;
        let two = sigma_series(&h, 0, 2).unwrap().sigma_l;
        assert_relative_eq!(two, a * a + a.powi(4), max_relative = 1e-15);
        // The gap to the closed form is the k = 3 term, 2 alpha^6.
        let closed = sigma_closed(&h, 0).unwrap().sigma_l;
        assert_relative_eq!(closed - two, 2.0 * a.powi(6), max_relative = 1e-3);
    }

    #[test]
    fn series_matches_closed_for_p_wave() {
        let p = PhysicalParams::with_z_alpha(0.1);
        let s = sigma_series(&p, 1, 8).unwrap().sigma_l;
        let c = sigma_closed(&p, 1).unwrap().sigma_l;
        assert!((s - c).abs() < 1e-14, "{}", s - c);
    }

    #[test]
    fn supercritical_is_rejected() {
        let p = PhysicalParams::natural(70.0);
        assert!(matches!(sigma_closed(&p, 0), Err(KgError::SupercriticalCoupling { .. })));
        assert!(matches!(energy_level(&p, 1, 0), Err(KgError::SupercriticalCoupling { .. })));
        assert!(energy_level(&p, 2, 1).is_ok());
    }

    #[test]
    fn invalid_quantum_numbers() {
        let p = PhysicalParams::default();
        assert!(matches!(energy_level(&p, 1, 1), Err(KgError::InvalidQuantumNumbers { .. })));
        assert!(matches!(energy_expansion(&p, 0, 0), Err(KgError::InvalidQuantumNumbers { .. })));
    }

    #[test]
    fn reference_levels() {
        let h = PhysicalParams::natural(1.0);
        let e1 = energy_level(&h, 1, 0).unwrap();
        assert_relative_eq!(e1.e_total, E1_HYDROGEN, max_relative = 1e-15);
        assert_relative_eq!(-e1.e_prime, 2.662_744_977_527_99e-5, max_relative = 1e-12);
        assert_eq!(e1.system_mass, system_mass(&h, 1, 0).unwrap());

        let p = PhysicalParams::with_z_alpha(0.1);
        assert_relative_eq!(energy_level(&p, 1, 0).unwrap().e_total, E1_ZA01, max_relative = 1e-15);
        assert_relative_eq!(system_mass(&p, 2, 0).unwrap(), M_N2_L0_ZA01, max_relative = 1e-15);
    }

    #[test]
    fn free_limit() {
        let p = PhysicalParams::with_z_alpha(1e-12);
        let b = energy_level(&p, 3, 1).unwrap();
        assert_relative_eq!(b.e_total, 1.0, max_relative = 1e-15);
        assert_relative_eq!(b.system_mass, 1.0, max_relative = 1e-15);
        assert!(b.e_prime < 0.0);
    }

    #[test]
    fn expansion_values() {
        let p0 = PhysicalParams::with_z_alpha(1e-300);
        assert_eq!(energy_expansion(&p0, 2, 1).unwrap(), 1.0);
        let p = PhysicalParams::with_z_alpha(0.1);
        assert_relative_eq!(energy_expansion(&p, 1, 0).unwrap(), 0.994_937_5, max_relative = 1e-14);
        let n2l1 = 1.0 - 0.01 / 8.0 - (1e-4 / 32.0) * (4.0 / 3.0 - 0.75);
        assert_relative_eq!(energy_expansion(&p, 2, 1).unwrap(), n2l1, max_relative = 1e-14);
        assert_relative_eq!(n2l1, 0.998_748_177_083_333_3, max_relative = 1e-15);
    }

    #[test]
    fn negative_branch_mirrors_positive() {
        let p = PhysicalParams::with_z_alpha(0.1);
        let pos = level_energy(&p, 2, 0, Branch::Positive).unwrap();
        let neg = level_energy(&p, 2, 0, Branch::Negative).unwrap();
        assert_eq!(pos, -neg);
        assert_relative_eq!(pos, energy_level(&p, 2, 0).unwrap().e_total, max_relative = 1e-15);
    }

    #[test]
    fn non_natural_units_scale_with_rest_energy() {
        let p = PhysicalParams::new(139.57, 1.0, 0.1, 1.0, 1.0).unwrap();
        let q = PhysicalParams::with_z_alpha(0.1);
        let a = energy_level(&p, 2, 1).unwrap();
        let b = energy_level(&q, 2, 1).unwrap();
        assert_relative_eq!(a.e_prime / 139.57, b.e_prime, max_relative = 1e-14);
    }

    proptest! {
        #[test]
        fn mass_times_c2_is_total_energy(za in 1e-4f64..0.49, n in 1u32..7, dl in 0u32..6) {
            let l = dl.min(n - 1);
            let p = PhysicalParams::with_z_alpha(za);
            let b = energy_level(&p, n, l).unwrap();
            prop_assert!((system_mass(&p, n, l).unwrap() - b.e_total).abs() <= 1e-15 * b.e_total);
            prop_assert!(b.system_mass > 0.0 && b.system_mass < 1.0);
        }

        #[test]
        fn levels_increase_with_n_and_l(za in 1e-3f64..0.49, n in 1u32..6) {
            let p = PhysicalParams::with_z_alpha(za);
            for l in 0..n {
                let here = energy_level(&p, n, l).unwrap().e_total;
                let up = energy_level(&p, n + 1, l).unwrap().e_total;
                prop_assert!(up > here);
                if l + 1 < n {
                    prop_assert!(energy_level(&p, n, l + 1).unwrap().e_total > here);
                }
            }
        }
    }
}
