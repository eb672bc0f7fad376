use serde::{Deserialize, Serialize};

use super::power::power_weight;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

/// Power exponents of a synthetic system: `v = |x−c|^{−β}`, `wᵢ = |x−c|^{γᵢ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerDescriptor {
    pub beta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub center: [f64; 2],
}

/// Strictly positive weights `(v, w₁, w₂)` on a common grid.
#[derive(Clone, Debug)]
pub struct WeightSystem {
    pub v: GridFunction,
    pub w1: GridFunction,
    pub w2: GridFunction,
    synthetic: Option<PowerDescriptor>,
}

impl WeightSystem {
    pub fn new(v: GridFunction, w1: GridFunction, w2: GridFunction) -> Result<Self> {
        v.require_same_grid(&w1)?;
        v.require_same_grid(&w2)?;
        v.require_positive("v")?;
        w1.require_positive("w1")?;
        w2.require_positive("w2")?;
        Ok(WeightSystem { v, w1, w2, synthetic: None })
    }

    pub fn unit(grid: Grid) -> Self {
        let one = GridFunction::constant(grid, 1.0).expect("constant one is positive");
        WeightSystem { v: one.clone(), w1: one.clone(), w2: one, synthetic: None }
    }

    pub fn power(grid: Grid, d: PowerDescriptor) -> Result<Self> {
        let c = &d.center[..grid.dim()];
        let mut ws = WeightSystem::new(
            power_weight(-d.beta, c, grid)?,
            power_weight(d.gamma1, c, grid)?,
            power_weight(d.gamma2, c, grid)?,
        )?;
        ws.synthetic = Some(d);
        Ok(ws)
    }

    /// The one-weight system `v = w₁w₂`.
    pub fn product(w1: GridFunction, w2: GridFunction) -> Result<Self> {
        let v = w1.mul(&w2)?;
        WeightSystem::new(v, w1, w2)
    }

    pub fn grid(&self) -> &Grid {
        self.v.grid()
    }

    pub fn synthetic(&self) -> Option<&PowerDescriptor> {
        self.synthetic.as_ref()
    }

    /// Check that the synthetic descriptor still regenerates the stored data.
    pub fn verify_synthetic(&self) -> Result<()> {
        if let Some(d) = self.synthetic {
            let fresh = WeightSystem::power(*self.grid(), d)?;
            if fresh.v != self.v || fresh.w1 != self.w1 || fresh.w2 != self.w2 {
                return Err(Error::invalid("weight data differ from their power descriptor"));
            }
        }
        Ok(())
    }

    /// Multiply each weight by a positive constant.
    pub fn scaled(&self, cv: f64, c1: f64, c2: f64) -> Result<Self> {
        WeightSystem::new(self.v.scale(cv), self.w1.scale(c1), self.w2.scale(c2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_system_regenerates() {
        let g = Grid::unit(1, 4).unwrap();
        let d = PowerDescriptor { beta: 0.2, gamma1: 0.1, gamma2: -0.1, center: [0.0, 0.0] };
        let ws = WeightSystem::power(g, d).unwrap();
        ws.verify_synthetic().unwrap();
        assert_eq!(ws.synthetic(), Some(&d));
        let z = GridFunction::zeros(g);
        assert!(WeightSystem::new(z, ws.w1.clone(), ws.w2.clone()).is_err());
    }
}
