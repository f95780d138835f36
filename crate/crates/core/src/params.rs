//! Ensemble parameters and the wall (barrier) description.

use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Result};

/// Boundary between the two max-wall regimes.
pub const MAX_WALL_SPLIT: f64 = 4.0 / 3.0;

/// Dimensions of the bipartition `A ⊗ B` and the Dyson index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    /// Dimension of subsystem A (number of Schmidt eigenvalues).
    pub n: usize,
    /// Dimension of subsystem B.
    pub m: usize,
    pub beta: f64,
}

impl EnsembleParams {
    pub fn new(n: usize, m: usize, beta: f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n must be positive"));
        }
        if m < n {
            return Err(invalid(format!("m = {m} must be at least n = {n}")));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(invalid(format!("beta = {beta} must be positive")));
        }
        Ok(Self { n, m, beta })
    }

    /// Square case `N = M`, the only one with constrained closed forms.
    pub fn square(n: usize, beta: f64) -> Result<Self> {
        Self::new(n, n, beta)
    }

    /// Aspect ratio `Q = M / N`.
    pub fn q(&self) -> f64 {
        self.m as f64 / self.n as f64
    }

    /// Exponent of each `λᵢ` in the joint density, `β(M−N+1)/2 − 1`.
    pub fn eigenvalue_exponent(&self) -> f64 {
        0.5 * self.beta * (self.m - self.n + 1) as f64 - 1.0
    }
}

/// Which side of the wall the rescaled eigenvalues `x = Nλ` are confined to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WallSide {
    None,
    /// All `Nλᵢ ≥ ζ`, i.e. a constraint on `λ_min`.
    Min,
    /// All `Nλᵢ ≤ ζ`, i.e. a constraint on `λ_max`.
    Max,
}

/// Wall side plus position `ζ` in rescaled units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierSpec {
    pub side: WallSide,
    pub zeta: f64,
}

impl BarrierSpec {
    pub fn new(side: WallSide, zeta: f64) -> Result<Self> {
        let b = Self { side, zeta };
        b.validate()?;
        Ok(b)
    }

    pub fn none() -> Self {
        Self { side: WallSide::None, zeta: 0.0 }
    }

    pub fn min_wall(zeta: f64) -> Result<Self> {
        Self::new(WallSide::Min, zeta)
    }

    pub fn max_wall(zeta: f64) -> Result<Self> {
        Self::new(WallSide::Max, zeta)
    }

    pub fn validate(&self) -> Result<()> {
        let z = self.zeta;
        match self.side {
            WallSide::None => Ok(()),
            WallSide::Min if (0.0..=1.0).contains(&z) => Ok(()),
            WallSide::Max if (1.0..=4.0).contains(&z) => Ok(()),
            WallSide::Min => Err(domain(format!("min wall needs 0 <= zeta <= 1, got {z}"))),
            WallSide::Max => Err(domain(format!("max wall needs 1 <= zeta <= 4, got {z}"))),
        }
    }

    pub fn regime(&self) -> Result<Regime> {
        self.validate()?;
        Ok(match self.side {
            WallSide::None => Regime::Unconstrained,
            WallSide::Min => Regime::MinWallI,
            WallSide::Max if self.zeta < MAX_WALL_SPLIT => Regime::MaxWallII,
            WallSide::Max => Regime::MaxWallIII,
        })
    }

    /// A wall at `ζ = 1` pins every eigenvalue to `1/N`.
    pub fn is_pinned(&self) -> bool {
        self.side != WallSide::None && self.zeta == 1.0
    }

    /// Whether a rescaled eigenvalue `x = Nλ` respects the wall.
    #[inline]
    pub fn admits(&self, x: f64) -> bool {
        match self.side {
            WallSide::None => true,
            WallSide::Min => x >= self.zeta,
            WallSide::Max => x <= self.zeta,
        }
    }
}

/// Shape of the equilibrium density for a given wall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    Unconstrained,
    /// Min wall, `0 ≤ ζ ≤ 1`.
    MinWallI,
    /// Max wall, `1 ≤ ζ < 4/3`.
    MaxWallII,
    /// Max wall, `4/3 ≤ ζ ≤ 4`.
    MaxWallIII,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regimes() {
        assert_eq!(BarrierSpec::none().regime().unwrap(), Regime::Unconstrained);
        assert_eq!(BarrierSpec::min_wall(0.3).unwrap().regime().unwrap(), Regime::MinWallI);
        assert_eq!(BarrierSpec::max_wall(1.2).unwrap().regime().unwrap(), Regime::MaxWallII);
        assert_eq!(BarrierSpec::max_wall(4.0 / 3.0).unwrap().regime().unwrap(), Regime::MaxWallIII);
        assert_eq!(BarrierSpec::max_wall(1.0).unwrap().regime().unwrap(), Regime::MaxWallII);
    }

    #[test]
    fn rejects_out_of_range_walls() {
        assert!(BarrierSpec::min_wall(1.01).is_err());
        assert!(BarrierSpec::min_wall(-0.1).is_err());
        assert!(BarrierSpec::max_wall(0.9).is_err());
        assert!(BarrierSpec::max_wall(4.5).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(EnsembleParams::new(3, 2, 2.0).is_err());
        assert!(EnsembleParams::new(2, 2, 0.0).is_err());
        let p = EnsembleParams::new(4, 6, 2.0).unwrap();
        assert_eq!(p.eigenvalue_exponent(), 2.0);
        assert_eq!(p.q(), 1.5);
    }
}
