//! Equilibrium eigenvalue densities in the rescaled variable `x = Nλ`.
//!
//! Every law here lives on a finite interval `[a, b]` and has at most
//! inverse-square-root endpoint behaviour. Integrals are taken in the angle
//! `θ` of `x = a + (b−a) sin²θ`, where each law has a bounded closed-form
//! weight `ρ(x(θ)) dx/dθ` (see [`DensityLaw::theta_weight`]).

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Error, Result};
use crate::params::{BarrierSpec, EnsembleParams, Regime};
use crate::quadrature::{self, Estimate};

/// Marchenko–Pastur density of `x = Nλ` for aspect ratio `Q = M/N ≥ 1`.
///
/// Normalized in `x`; the support is `[(1−1/√Q)², (1+1/√Q)²]`, i.e. `(0, 4]`
/// for `Q = 1`. Returns 0 outside the support.
pub fn mp_density(x: f64, params: &EnsembleParams) -> f64 {
    mp_density_q(x, params.q())
}

fn mp_edges(q: f64) -> (f64, f64) {
    let r = 1.0 / q.sqrt();
    ((1.0 - r).powi(2), (1.0 + r).powi(2))
}

fn mp_density_q(x: f64, q: f64) -> f64 {
    let (lo, hi) = mp_edges(q);
    if x <= lo.max(0.0) || x >= hi || x <= 0.0 {
        return 0.0;
    }
    q / (2.0 * PI) * ((hi - x) * (x - lo)).sqrt() / x
}

/// Support `[a, b]` of the equilibrium density for the given wall (`N = M`).
pub fn density_support(barrier: &BarrierSpec) -> Result<(f64, f64)> {
    let z = barrier.zeta;
    Ok(match barrier.regime()? {
        Regime::Unconstrained => (0.0, 4.0),
        Regime::MinWallI => (z, 4.0 - 3.0 * z),
        Regime::MaxWallII => (4.0 - 3.0 * z, z),
        Regime::MaxWallIII => (0.0, z),
    })
}

/// Equilibrium density of the rescaled Schmidt eigenvalues under a wall.
///
/// Min wall: `ρ = √((4−3ζ−x)/(x−ζ)) / (2π(1−ζ))` on `[ζ, 4−3ζ]`.
/// Max wall, `1 ≤ ζ < 4/3`: `ρ = √((3ζ−4+x)/(ζ−x)) / (2π(ζ−1))` on `[4−3ζ, ζ]`.
/// Max wall, `4/3 ≤ ζ ≤ 4`: `ρ = (2ζ² + 4(ζ−2)(ζ−2x)) / (2πζ²√(x(ζ−x)))` on `[0, ζ]`.
/// No wall: Marchenko–Pastur with `Q = 1`.
///
/// A wall at exactly `ζ = 1` collapses the law to a point mass at `x = 1`,
/// which has no pointwise density; 0 is returned there.
pub fn constrained_density(x: f64, barrier: &BarrierSpec) -> Result<f64> {
    let (a, b) = density_support(barrier)?;
    if barrier.is_pinned() || x <= a || x >= b {
        return Ok(0.0);
    }
    let z = barrier.zeta;
    Ok(match barrier.regime()? {
        Regime::Unconstrained => mp_density_q(x, 1.0),
        Regime::MinWallI => ((b - x) / (x - a)).sqrt() / (2.0 * PI * (1.0 - z)),
        Regime::MaxWallII => ((x - a) / (b - x)).sqrt() / (2.0 * PI * (z - 1.0)),
        Regime::MaxWallIII => {
            (2.0 * z * z + 4.0 * (z - 2.0) * (z - 2.0 * x)) / (2.0 * PI * z * z * (x * (z - x)).sqrt())
        }
    })
}

/// Wigner semicircle centred at 1 with rescaled radius `R̃`:
/// `(2/(πR̃²)) √(R̃² − (x−1)²)` on `[1−R̃, 1+R̃]`.
pub fn semicircle_density(x: f64, radius: f64) -> f64 {
    let d = x - 1.0;
    let r2 = radius * radius;
    if radius <= 0.0 || d * d >= r2 {
        return 0.0;
    }
    2.0 / (PI * r2) * (r2 - d * d).sqrt()
}

/// CDF of [`semicircle_density`].
pub fn semicircle_cdf(x: f64, radius: f64) -> f64 {
    if radius <= 0.0 {
        return if x >= 1.0 { 1.0 } else { 0.0 };
    }
    let u = ((x - 1.0) / radius).clamp(-1.0, 1.0);
    0.5 + (u * (1.0 - u * u).sqrt() + u.asin()) / PI
}

/// An analytic density on a finite support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DensityLaw {
    /// Equilibrium law for a wall (square case).
    Equilibrium(BarrierSpec),
    MarchenkoPastur { q: f64 },
    Semicircle { radius: f64 },
    /// `base` with its θ-weight multiplied by `1 + Σₖ cₖ cos(2kθ)`,
    /// `k = 1, 2, …`. Keeps the support; used for variational checks.
    Modulated { base: Box<DensityLaw>, coeffs: Vec<f64> },
}

impl DensityLaw {
    pub fn equilibrium(barrier: BarrierSpec) -> Result<Self> {
        barrier.validate()?;
        Ok(Self::Equilibrium(barrier))
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Equilibrium(b) => density_support(b).expect("validated on construction"),
            Self::MarchenkoPastur { q } => mp_edges(*q),
            Self::Semicircle { radius } => (1.0 - radius, 1.0 + radius),
            Self::Modulated { base, .. } => base.support(),
        }
    }

    /// True for a zero-width support (point mass).
    pub fn is_point_mass(&self) -> bool {
        let (a, b) = self.support();
        a == b
    }

    pub fn density(&self, x: f64) -> f64 {
        match self {
            Self::Equilibrium(b) => constrained_density(x, b).unwrap_or(0.0),
            Self::MarchenkoPastur { q } => mp_density_q(x, *q),
            Self::Semicircle { radius } => semicircle_density(x, *radius),
            Self::Modulated { base, coeffs } => {
                let (a, b) = self.support();
                if x <= a || x >= b {
                    return 0.0;
                }
                let theta = ((x - a) / (b - a)).sqrt().asin();
                base.density(x) * modulation(coeffs, theta)
            }
        }
    }

    /// Map `θ ∈ [0, π/2] ↦ x = a + (b−a) sin²θ`.
    pub fn x_of_theta(&self, theta: f64) -> f64 {
        let (a, b) = self.support();
        let s = theta.sin();
        a + (b - a) * s * s
    }

    /// `ρ(x(θ)) · dx/dθ`, bounded on `[0, π/2]`; integrates to 1.
    pub fn theta_weight(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        let (s2, c2) = (s * s, c * c);
        match self {
            Self::Equilibrium(b) => {
                let z = b.zeta;
                match b.regime().expect("validated on construction") {
                    Regime::Unconstrained | Regime::MinWallI => 4.0 / PI * c2,
                    Regime::MaxWallII => 4.0 / PI * s2,
                    Regime::MaxWallIII => {
                        let x = z * s2;
                        (2.0 * z * z + 4.0 * (z - 2.0) * (z - 2.0 * x)) / (PI * z * z)
                    }
                }
            }
            Self::MarchenkoPastur { q } => {
                let (lo, hi) = mp_edges(*q);
                let w = hi - lo;
                let x = lo + w * s2;
                if x <= 0.0 {
                    // Q = 1: the 1/x pole cancels against s² with x = 4 s²
                    return 4.0 / PI * c2;
                }
                q / PI * w * w * s2 * c2 / x
            }
            Self::Semicircle { .. } => 16.0 / PI * s2 * c2,
            Self::Modulated { base, coeffs } => base.theta_weight(theta) * modulation(coeffs, theta),
        }
    }

    /// `∫ g(x) ρ(x) dx` over the support.
    pub fn expect<F: Fn(f64) -> f64>(&self, g: F) -> Result<Estimate> {
        let (a, b) = self.support();
        if a == b {
            return Ok(Estimate { value: g(a), error: 0.0 });
        }
        quadrature::adaptive(
            |t| g(self.x_of_theta(t)) * self.theta_weight(t),
            0.0,
            FRAC_PI_2,
            1e-13,
            1e-13,
            4000,
        )
    }

    /// Cumulative distribution function.
    pub fn cdf(&self, x: f64) -> f64 {
        let (a, b) = self.support();
        if x <= a {
            return if a == b && x == a { 1.0 } else { 0.0 };
        }
        if x >= b {
            return 1.0;
        }
        if let Self::Semicircle { radius } = self {
            return semicircle_cdf(x, *radius);
        }
        let t = ((x - a) / (b - a)).sqrt().asin();
        quadrature::adaptive(|u| self.theta_weight(u), 0.0, t, 1e-13, 1e-12, 2000)
            .map(|e| e.value.clamp(0.0, 1.0))
            .unwrap_or_else(|e| match e {
                Error::Quadrature { estimate, .. } => estimate.clamp(0.0, 1.0),
                _ => f64::NAN,
            })
    }
}

fn modulation(coeffs: &[f64], theta: f64) -> f64 {
    1.0 + coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c * ((2 * (k + 1)) as f64 * theta).cos())
        .sum::<f64>()
}

/// Density tabulated on a grid, optionally backed by an analytic law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub support: (f64, f64),
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub law: Option<DensityLaw>,
}

impl DensityCurve {
    /// Tabulate `law` on `n_points` abscissae strictly inside its support
    /// (cell midpoints, so singular endpoints are never evaluated).
    pub fn from_law(law: DensityLaw, n_points: usize) -> Result<Self> {
        if n_points == 0 {
            return Err(invalid("n_points must be positive"));
        }
        let (a, b) = law.support();
        let h = (b - a) / n_points as f64;
        let grid: Vec<f64> = (0..n_points).map(|i| a + (i as f64 + 0.5) * h).collect();
        let values = grid.iter().map(|&x| law.density(x)).collect();
        Ok(Self { support: (a, b), grid, values, law: Some(law) })
    }

    pub fn for_barrier(barrier: &BarrierSpec, n_points: usize) -> Result<Self> {
        Self::from_law(DensityLaw::equilibrium(*barrier)?, n_points)
    }

    /// Curve from raw ordinates; the grid must be strictly increasing and
    /// the values non-negative.
    pub fn tabulated(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(invalid("grid and values need equal length >= 2"));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("grid must be strictly increasing"));
        }
        if values.iter().any(|v| !(*v >= 0.0)) {
            return Err(invalid("density values must be non-negative"));
        }
        let support = (grid[0], grid[grid.len() - 1]);
        Ok(Self { support, grid, values, law: None })
    }

    pub fn density(&self, x: f64) -> f64 {
        if let Some(law) = &self.law {
            return law.density(x);
        }
        interpolate(&self.grid, &self.values, x)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if let Some(law) = &self.law {
            return law.cdf(x);
        }
        let total = trapezoid(&self.grid, &self.values, f64::INFINITY);
        trapezoid(&self.grid, &self.values, x) / total
    }

    /// `∫ g ρ` using the analytic law when present, else the trapezoid rule.
    pub fn expect<F: Fn(f64) -> f64>(&self, g: F) -> Result<f64> {
        if let Some(law) = &self.law {
            return law.expect(g).map(|e| e.value);
        }
        let weighted: Vec<f64> = self.grid.iter().zip(&self.values).map(|(&x, &v)| g(x) * v).collect();
        Ok(trapezoid(&self.grid, &weighted, f64::INFINITY))
    }

    /// Fail unless `∫ρ = 1` and `∫xρ = 1` within `tol`.
    pub fn check_feasible(&self, tol: f64) -> Result<()> {
        let mass = self.expect(|_| 1.0)?;
        let mean = self.expect(|x| x)?;
        let mut violated = Vec::new();
        if (mass - 1.0).abs() > tol {
            violated.push(format!("normalization {mass:.9}"));
        }
        if (mean - 1.0).abs() > tol {
            violated.push(format!("unit trace (first moment) {mean:.9}"));
        }
        if violated.is_empty() {
            Ok(())
        } else {
            Err(Error::Infeasible(violated.join(", ")))
        }
    }
}

fn interpolate(grid: &[f64], values: &[f64], x: f64) -> f64 {
    if x < grid[0] || x > grid[grid.len() - 1] {
        return 0.0;
    }
    let k = grid.partition_point(|&g| g <= x).clamp(1, grid.len() - 1);
    let (x0, x1) = (grid[k - 1], grid[k]);
    let t = (x - x0) / (x1 - x0);
    values[k - 1] * (1.0 - t) + values[k] * t
}

fn trapezoid(grid: &[f64], values: &[f64], upto: f64) -> f64 {
    let mut acc = 0.0;
    for k in 1..grid.len() {
        let (x0, x1) = (grid[k - 1], grid[k]);
        if x0 >= upto {
            break;
        }
        if x1 <= upto {
            acc += 0.5 * (values[k - 1] + values[k]) * (x1 - x0);
        } else {
            let v = interpolate(grid, values, upto);
            acc += 0.5 * (values[k - 1] + v) * (upto - x0);
        }
    }
    acc
}

/// Guard used by routines that need a non-degenerate min-wall position.
pub(crate) fn require_open_min_wall(zeta: f64) -> Result<()> {
    if !(0.0..1.0).contains(&zeta) {
        return Err(domain(format!("min-wall position must satisfy 0 <= zeta < 1, got {zeta}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: usize, m: usize) -> EnsembleParams {
        EnsembleParams::new(n, m, 2.0).unwrap()
    }

    #[test]
    fn mp_examples() {
        assert!((mp_density(2.0, &p(10, 10)) - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert_eq!(mp_density(4.0, &p(10, 10)), 0.0);
        let q4 = p(10, 40);
        let (lo, hi) = mp_edges(q4.q());
        assert!((lo - 0.25).abs() < 1e-15 && (hi - 2.25).abs() < 1e-15);
        assert_eq!(mp_density(0.25, &q4), 0.0);
        assert_eq!(mp_density(2.25, &q4), 0.0);
        assert_eq!(mp_density(-1.0, &q4), 0.0);
    }

    #[test]
    fn mp_normalized_for_rectangular_case() {
        let law = DensityLaw::MarchenkoPastur { q: 4.0 };
        assert!((law.expect(|_| 1.0).unwrap().value - 1.0).abs() < 1e-10);
        assert!((law.expect(|x| x).unwrap().value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn min_wall_half_matches_closed_special_case() {
        let b = BarrierSpec::min_wall(0.5).unwrap();
        assert!((constrained_density(1.5, &b).unwrap() - 1.0 / PI).abs() < 1e-15);
        for &x in &[0.6_f64, 1.0, 2.0, 2.4] {
            let special = ((5.0 - 2.0 * x) / (2.0 * x - 1.0)).sqrt() / PI;
            assert!((constrained_density(x, &b).unwrap() - special).abs() < 1e-14);
        }
    }

    #[test]
    fn min_wall_zero_is_mp() {
        let b = BarrierSpec::min_wall(0.0).unwrap();
        for i in 1..40 {
            let x = 0.1 * i as f64;
            let d = constrained_density(x, &b).unwrap() - mp_density(x, &p(5, 5));
            assert!(d.abs() < 1e-14, "x = {x}");
        }
    }

    #[test]
    fn max_wall_four_thirds_vanishes_at_origin() {
        let b = BarrierSpec::max_wall(4.0 / 3.0).unwrap();
        assert!(constrained_density(1e-10, &b).unwrap() < 1e-4);
        assert_eq!(constrained_density(0.0, &b).unwrap(), 0.0);
    }

    #[test]
    fn supports() {
        assert_eq!(density_support(&BarrierSpec::min_wall(0.5).unwrap()).unwrap(), (0.5, 2.5));
        assert_eq!(density_support(&BarrierSpec::min_wall(1.0).unwrap()).unwrap(), (1.0, 1.0));
        assert_eq!(density_support(&BarrierSpec::max_wall(2.0).unwrap()).unwrap(), (0.0, 2.0));
        let (a, b) = density_support(&BarrierSpec::max_wall(1.2).unwrap()).unwrap();
        assert!((a - 0.4).abs() < 1e-15 && b == 1.2);
        assert_eq!(density_support(&BarrierSpec::none()).unwrap(), (0.0, 4.0));
    }

    #[test]
    fn out_of_support_is_zero() {
        let b = BarrierSpec::min_wall(0.5).unwrap();
        assert_eq!(constrained_density(0.4, &b).unwrap(), 0.0);
        assert_eq!(constrained_density(2.6, &b).unwrap(), 0.0);
    }

    #[test]
    fn theta_weight_agrees_with_pointwise_density() {
        for law in [
            DensityLaw::Equilibrium(BarrierSpec::min_wall(0.3).unwrap()),
            DensityLaw::Equilibrium(BarrierSpec::max_wall(1.2).unwrap()),
            DensityLaw::Equilibrium(BarrierSpec::max_wall(2.5).unwrap()),
            DensityLaw::MarchenkoPastur { q: 2.0 },
            DensityLaw::Semicircle { radius: 1.3 },
        ] {
            let (a, b) = law.support();
            for &t in &[0.2, 0.7, 1.1, 1.4] {
                let x = law.x_of_theta(t);
                let jac = 2.0 * (b - a) * t.sin() * t.cos();
                let w = law.density(x) * jac;
                assert!((law.theta_weight(t) - w).abs() < 1e-10 * w.abs().max(1.0), "{law:?} θ = {t}");
            }
        }
    }

    #[test]
    fn semicircle_examples() {
        assert!((semicircle_density(1.0, 2.0) - 1.0 / PI).abs() < 1e-15);
        assert_eq!(semicircle_density(-1.0, 2.0), 0.0);
        for r in [0.3, 1.0, 2.0, 3.7] {
            let law = DensityLaw::Semicircle { radius: r };
            assert!((law.expect(|_| 1.0).unwrap().value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cdf_endpoints_and_midpoint() {
        let law = DensityLaw::Semicircle { radius: 2.0 };
        assert_eq!(law.cdf(-1.0), 0.0);
        assert_eq!(law.cdf(3.0), 1.0);
        assert!((law.cdf(1.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tabulated_curve_validation() {
        assert!(DensityCurve::tabulated(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(DensityCurve::tabulated(vec![1.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(DensityCurve::tabulated(vec![0.0, 1.0], vec![1.0, -1.0]).is_err());
        let c = DensityCurve::tabulated(vec![0.0, 1.0, 2.0], vec![0.5, 0.5, 0.5]).unwrap();
        assert!((c.cdf(1.0) - 0.5).abs() < 1e-15);
        assert!((c.expect(|x| x).unwrap() - 1.0).abs() < 1e-15);
        assert!(c.check_feasible(1e-9).is_ok());
    }

    #[test]
    fn open_min_wall_guard() {
        assert!(require_open_min_wall(0.0).is_ok());
        assert!(require_open_min_wall(1.0).is_err());
    }
}
