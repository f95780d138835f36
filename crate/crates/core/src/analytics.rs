//! Closed-form large-deviation and entanglement quantities.
//!
//! All positions `ζ` are in rescaled units `x = Nλ` and all densities are
//! for the square case `N = M` unless stated otherwise.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::density::{require_open_min_wall, DensityLaw};
use crate::error::{domain, invalid, Result};
use crate::params::{BarrierSpec, EnsembleParams, Regime, WallSide};

/// Rate function `Φ(ζ)` of `P ≈ exp(−βN²Φ)` for a wall.
///
/// * min wall: `−ln(1−ζ)/2`
/// * max wall, `1 ≤ ζ < 4/3`: `−ln(ζ−1)/2`
/// * max wall, `4/3 ≤ ζ ≤ 4`: `3/4 − 4(ζ−1)/ζ² − ln(ζ/4)/2`
///
/// A wall at `ζ = 1` returns `f64::INFINITY`.
pub fn rate_function(barrier: &BarrierSpec) -> Result<f64> {
    let z = barrier.zeta;
    match barrier.regime()? {
        Regime::Unconstrained => Err(invalid("rate function needs a wall")),
        Regime::MinWallI => Ok(neg_half_log(1.0 - z)),
        Regime::MaxWallII => Ok(neg_half_log(z - 1.0)),
        Regime::MaxWallIII => Ok(0.75 - 4.0 * (z - 1.0) / (z * z) - 0.5 * (z / 4.0).ln()),
    }
}

fn neg_half_log(gap: f64) -> f64 {
    if gap <= 0.0 {
        f64::INFINITY
    } else {
        -0.5 * gap.ln()
    }
}

/// Leading-order log-probability `−βN²Φ(ζ)` of the wall event.
pub fn tail_log_probability(params: &EnsembleParams, barrier: &BarrierSpec) -> Result<f64> {
    let phi = rate_function(barrier)?;
    let n = params.n as f64;
    if phi == 0.0 {
        return Ok(0.0);
    }
    Ok(-params.beta * n * n * phi)
}

/// Lagrange multipliers of the min-wall saddle point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    /// Normalization multiplier.
    pub mu0: f64,
    /// Unit-trace multiplier; also the constant value of the principal-value
    /// integral `P∫ρ(x′)/(x−x′)dx′` on the support.
    pub mu1: f64,
}

/// `μ₁ = 1/(2(1−ζ))` and `μ₀ = ln(1−ζ) + (ζ−2)/(2(1−ζ))`.
///
/// `μ₀` is the value of `∫ρ(x′) ln|x−x′| dx′ − μ₁x`, evaluated at `x = ζ`;
/// it is checked against quadrature of that potential in the tests.
pub fn lagrange_multipliers(zeta: f64) -> Result<Multipliers> {
    require_open_min_wall(zeta)?;
    let gap = 1.0 - zeta;
    Ok(Multipliers { mu0: gap.ln() + (zeta - 2.0) / (2.0 * gap), mu1: 1.0 / (2.0 * gap) })
}

/// Saddle-point energy `3/4 − ln(1−ζ)/2` of the min-wall Coulomb gas.
///
/// The constant is the energy of the unconstrained Marchenko–Pastur fluid
/// with the linear confinement term `½∫xρ` included (it equals ½ on the
/// unit-trace surface); see `empirics::energy_functional`.
pub fn saddle_energy(zeta: f64) -> Result<f64> {
    require_open_min_wall(zeta)?;
    Ok(0.75 - 0.5 * (1.0 - zeta).ln())
}

/// Average von Neumann entropy (nats) of an `N`-level subsystem under a wall.
///
/// Computed as `ln N − ∫ x ln x ρ(x) dx`. Region III uses the closed form
/// `ln(4N/ζ) + ζ/4 − 3/2`; regions I and II integrate the equilibrium
/// density numerically. No wall gives `ln N − 1/2`, a pinned wall `ln N`.
pub fn avg_entropy(barrier: &BarrierSpec, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(invalid(format!("entropy needs n >= 2, got {n}")));
    }
    let ln_n = (n as f64).ln();
    if barrier.is_pinned() {
        return Ok(ln_n);
    }
    let z = barrier.zeta;
    match barrier.regime()? {
        Regime::Unconstrained => Ok(ln_n - 0.5),
        Regime::MaxWallIII => Ok((4.0 * n as f64 / z).ln() + z / 4.0 - 1.5),
        Regime::MinWallI | Regime::MaxWallII => Ok(ln_n - x_log_x_moment(barrier)?),
    }
}

/// `∫ x ln x ρ(x) dx` for the equilibrium law, by quadrature.
pub fn x_log_x_moment(barrier: &BarrierSpec) -> Result<f64> {
    let law = DensityLaw::equilibrium(*barrier)?;
    Ok(law.expect(|x| if x > 0.0 { x * x.ln() } else { 0.0 })?.value)
}

/// Exact average entanglement entropy of a random pure state,
/// `Σ_{m=M+1}^{NM} 1/m − (N−1)/(2M)`.
pub fn page_entropy(params: &EnsembleParams) -> f64 {
    let (n, m) = (params.n, params.m);
    // sum small terms first
    let harmonic: f64 = (m + 1..=n * m).rev().map(|k| 1.0 / k as f64).sum();
    harmonic - (n as f64 - 1.0) / (2.0 * m as f64)
}

/// Average purity `(N+M)/(NM+1)` of an unconstrained random pure state.
pub fn avg_purity_unconstrained(params: &EnsembleParams) -> f64 {
    let (n, m) = (params.n as f64, params.m as f64);
    (n + m) / (n * m + 1.0)
}

/// Rescaled purity `P = N⟨tr ρ²⟩` under a wall.
///
/// `2 − 2ζ + ζ²` for the min wall and the max wall below 4/3,
/// `ζ(8−ζ)/8` for the max wall above, 2 without a wall.
pub fn rescaled_purity(barrier: &BarrierSpec) -> Result<f64> {
    let z = barrier.zeta;
    Ok(match barrier.regime()? {
        Regime::Unconstrained => 2.0,
        Regime::MinWallI | Regime::MaxWallII => 2.0 - 2.0 * z + z * z,
        Regime::MaxWallIII => -z * (z - 8.0) / 8.0,
    })
}

/// Rescaled semicircle radius `R̃ = 2√(P − 1)` of the shifted-GUE model.
pub fn model_radius(barrier: &BarrierSpec) -> Result<f64> {
    radius_from_purity(rescaled_purity(barrier)?)
}

/// `R̃ = 2√(P − 1)` for a rescaled purity `P ≥ 1`.
pub fn radius_from_purity(p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(domain(format!("rescaled purity {p} is below the maximally mixed value 1")));
    }
    Ok(2.0 * (p - 1.0).sqrt())
}

pub use crate::density::semicircle_density;

/// Log negativity (natural log) of the shifted-semicircle model:
/// `ln[(2/π) asin(1/R̃) + (2/(3πR̃)) √(1−1/R̃²) (1+2R̃²)]` for `R̃ > 1`, else 0.
pub fn model_log_negativity(radius: f64) -> f64 {
    if radius <= 1.0 {
        return 0.0;
    }
    let inv = 1.0 / radius;
    let norm = 2.0 / PI * inv.asin()
        + 2.0 / (3.0 * PI * radius) * (1.0 - inv * inv).sqrt() * (1.0 + 2.0 * radius * radius);
    norm.ln()
}

/// Max-wall position `ζ₂ ∈ (4−√6, 4]` with the same rescaled purity (hence the
/// same model negativity) as the min wall at `ζ₁ ∈ [0, 1/2)`:
/// `ζ₂ = 4 − 2√(2(2ζ₁ − ζ₁²))`.
pub fn matching_zeta(zeta1: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&zeta1) {
        return Err(domain(format!("matching needs 0 <= zeta1 < 1/2, got {zeta1}")));
    }
    Ok(4.0 - 2.0 * (2.0 * (2.0 * zeta1 - zeta1 * zeta1)).sqrt())
}

/// Wall positions where `R̃ = 1`: `(1/2, 4 − √6)` for the min and max wall.
pub fn transition_points() -> (f64, f64) {
    (0.5, 4.0 - 6.0_f64.sqrt())
}

/// Model log negativity for a wall (radius from the rescaled purity).
pub fn model_log_negativity_for(barrier: &BarrierSpec) -> Result<f64> {
    Ok(model_log_negativity(model_radius(barrier)?))
}

/// Convenience: the wall of the opposite side with the same radius.
pub fn matching_barrier(barrier: &BarrierSpec) -> Result<BarrierSpec> {
    match barrier.side {
        WallSide::Min => BarrierSpec::max_wall(matching_zeta(barrier.zeta)?),
        _ => Err(invalid("matching is defined from a min wall")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn min(z: f64) -> BarrierSpec {
        BarrierSpec::min_wall(z).unwrap()
    }
    fn max(z: f64) -> BarrierSpec {
        BarrierSpec::max_wall(z).unwrap()
    }

    #[test]
    fn rate_function_anchors() {
        assert_eq!(rate_function(&min(0.0)).unwrap(), 0.0);
        assert!(rate_function(&max(4.0)).unwrap().abs() < 1e-15);
        assert!((rate_function(&min(0.5)).unwrap() - 0.346_573_590_279_972_6).abs() < 1e-15);
        assert_eq!(rate_function(&min(1.0)).unwrap(), f64::INFINITY);
        assert_eq!(rate_function(&max(1.0)).unwrap(), f64::INFINITY);
        assert!(rate_function(&BarrierSpec::none()).is_err());
    }

    #[test]
    fn rate_function_continuous_at_four_thirds() {
        let c = 4.0 / 3.0;
        let phi2 = -0.5 * (c - 1.0_f64).ln();
        let phi3 = rate_function(&max(c)).unwrap();
        assert!((phi2 - phi3).abs() < 1e-12);
        let below = rate_function(&max(c - 1e-12)).unwrap();
        assert!((below - phi3).abs() < 1e-10);
    }

    #[test]
    fn tail_log_probability_examples() {
        let p = EnsembleParams::square(4, 2.0).unwrap();
        let v = tail_log_probability(&p, &min(0.2)).unwrap();
        assert!((v - 16.0 * 0.8_f64.ln()).abs() < 1e-12);
        assert!((v + 3.5703).abs() < 1e-4);
        assert_eq!(tail_log_probability(&p, &min(0.0)).unwrap(), 0.0);
        let p = EnsembleParams::square(100, 2.0).unwrap();
        let v = tail_log_probability(&p, &min(0.5)).unwrap();
        assert!((v + 2e4 * 0.346_573_590_279_972_6).abs() < 1e-8);
        assert_eq!(tail_log_probability(&p, &min(1.0)).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn multipliers() {
        let m = lagrange_multipliers(0.0).unwrap();
        assert_eq!(m.mu1, 0.5);
        assert_eq!(m.mu0, -1.0);
        let m = lagrange_multipliers(0.5).unwrap();
        assert_eq!(m.mu1, 1.0);
        assert!((m.mu0 - (0.5_f64.ln() - 1.5)).abs() < 1e-15);
        assert!(lagrange_multipliers(1.0 - 1e-12).unwrap().mu1 > 1e11);
        assert!(lagrange_multipliers(1.0).is_err());
    }

    #[test]
    fn saddle_energy_and_rate_agree() {
        assert_eq!(saddle_energy(0.0).unwrap(), 0.75);
        assert!((saddle_energy(0.5).unwrap() - 1.096_573_590_279_972_6).abs() < 1e-14);
        for z in [0.1, 0.3, 0.6, 0.9] {
            let d = saddle_energy(z).unwrap() - saddle_energy(0.0).unwrap();
            assert!((d - rate_function(&min(z)).unwrap()).abs() < 1e-14);
        }
        assert!(saddle_energy(1.0).is_err());
    }

    #[test]
    fn entropy_anchor_values() {
        let ln100 = 100.0_f64.ln();
        assert!((avg_entropy(&max(4.0), 100).unwrap() - (ln100 - 0.5)).abs() < 1e-12);
        assert!((avg_entropy(&max(1.0), 100).unwrap() - ln100).abs() < 1e-12);
        let four_thirds = avg_entropy(&max(4.0 / 3.0), 100).unwrap();
        assert!((four_thirds - (300.0_f64.ln() - 7.0 / 6.0)).abs() < 1e-12);
        assert!((four_thirds - 4.537_10).abs() < 2e-5);
        assert!((avg_entropy(&BarrierSpec::none(), 100).unwrap() - (ln100 - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn region_two_quadrature_meets_closed_form_at_four_thirds() {
        let below = avg_entropy(&max(4.0 / 3.0 - 1e-9), 100).unwrap();
        let at = avg_entropy(&max(4.0 / 3.0), 100).unwrap();
        assert!((below - at).abs() < 1e-8);
        let near_one = avg_entropy(&max(1.0 + 1e-9), 100).unwrap();
        assert!((near_one - 100.0_f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn min_wall_entropy_endpoints() {
        let ln100 = 100.0_f64.ln();
        assert!((avg_entropy(&min(0.0), 100).unwrap() - (ln100 - 0.5)).abs() < 1e-10);
        assert!((avg_entropy(&min(1.0 - 1e-9), 100).unwrap() - ln100).abs() < 1e-8);
        assert!(avg_entropy(&min(0.5), 1).is_err());
    }

    #[test]
    fn page_entropy_examples() {
        assert_eq!(page_entropy(&EnsembleParams::new(1, 1, 2.0).unwrap()), 0.0);
        let two = page_entropy(&EnsembleParams::square(2, 2.0).unwrap());
        assert!((two - 1.0 / 3.0).abs() < 1e-15);
        let hundred = page_entropy(&EnsembleParams::square(100, 2.0).unwrap());
        let asymptotic = 100.0_f64.ln() - 0.5;
        assert!((hundred - asymptotic).abs() / asymptotic < 0.01);
    }

    #[test]
    fn purity_examples() {
        assert_eq!(avg_purity_unconstrained(&EnsembleParams::new(1, 1, 2.0).unwrap()), 1.0);
        let p = avg_purity_unconstrained(&EnsembleParams::square(100, 2.0).unwrap());
        assert!((p - 200.0 / 10001.0).abs() < 1e-16);
        let big = avg_purity_unconstrained(&EnsembleParams::square(10_000, 2.0).unwrap());
        assert!((big * 10_000.0 - 2.0).abs() < 1e-6);

        assert_eq!(rescaled_purity(&min(0.0)).unwrap(), 2.0);
        assert_eq!(rescaled_purity(&min(1.0)).unwrap(), 1.0);
        assert_eq!(rescaled_purity(&max(4.0)).unwrap(), 2.0);
        assert_eq!(rescaled_purity(&BarrierSpec::none()).unwrap(), 2.0);
    }

    #[test]
    fn radius_examples() {
        assert!((model_radius(&min(0.5)).unwrap() - 1.0).abs() < 1e-15);
        assert!((model_radius(&max(4.0)).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(model_radius(&min(0.0)).unwrap(), 2.0);
        for z in [0.1, 0.4, 0.9] {
            assert!((model_radius(&min(z)).unwrap() - 2.0 * (1.0 - z)).abs() < 1e-14);
        }
        for z in [1.05, 1.2, 1.3] {
            assert!((model_radius(&max(z)).unwrap() - 2.0 * (z - 1.0)).abs() < 1e-14);
        }
        for z in [1.5, 2.5, 3.5] {
            let r = 2.0 * ((-z * z + 8.0 * z - 8.0) / 8.0_f64).sqrt();
            assert!((model_radius(&max(z)).unwrap() - r).abs() < 1e-14);
        }
        assert!(radius_from_purity(0.99).is_err());
    }

    #[test]
    fn model_negativity_values() {
        assert!((model_log_negativity(2.0) - 0.148_702).abs() < 5e-6);
        assert_eq!(model_log_negativity(1.0), 0.0);
        assert!(model_log_negativity(1.0 + 1e-12).abs() < 1e-12);
        assert!((model_log_negativity(1.75) - 0.0919).abs() < 5e-4);
        assert_eq!(model_log_negativity(0.4), 0.0);
    }

    #[test]
    fn matching_examples() {
        assert!((matching_zeta(1.0 / 8.0).unwrap() - 2.6307).abs() < 5e-4);
        assert_eq!(matching_zeta(0.0).unwrap(), 4.0);
        for z1 in [0.1, 0.2, 0.3] {
            let z2 = matching_zeta(z1).unwrap();
            let p1 = rescaled_purity(&min(z1)).unwrap();
            let p3 = rescaled_purity(&max(z2)).unwrap();
            assert!((p1 - p3).abs() < 1e-12);
            assert!(z2 > 4.0 - 6.0_f64.sqrt() && z2 <= 4.0);
        }
        assert!(matching_zeta(0.5).is_err());
        assert!(matching_zeta(-0.1).is_err());
        let b = matching_barrier(&min(0.125)).unwrap();
        assert_eq!(b.side, WallSide::Max);
    }

    #[test]
    fn transitions() {
        let (a, b) = transition_points();
        assert_eq!(a, 0.5);
        assert!((b - 1.550_510_257_216_822).abs() < 1e-14);
        assert!((model_radius(&min(a)).unwrap() - 1.0).abs() < 1e-14);
        assert!((model_radius(&max(b)).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(model_log_negativity_for(&min(a)).unwrap(), 0.0);
        assert!(model_log_negativity_for(&max(b)).unwrap().abs() < 1e-12);
    }
}
