//! Fractional integrals, their truncated and dyadic models, and the
//! bilinear maximal operators, all sampled at cell midpoints.

mod fractional;
mod kernel;
mod maximal;

pub use fractional::{b_alpha, b_alpha_dyadic, b_truncated, dyadic_level_term, i_alpha, DyadicModel};
pub use kernel::{gauss_legendre, unit_weight_1d, KernelSpec, SingularRule, DEFAULT_RING_DEPTH};
pub use maximal::{m_alpha_bilinear, m_alpha_vector, m_tilde, m_triple_dyadic, sup_paint};

use crate::grid::{Grid, GridFunction};

/// Operator output on the cells of the input grid.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorField(GridFunction);

impl OperatorField {
    pub fn new(f: GridFunction) -> Self {
        OperatorField(f)
    }

    pub fn function(&self) -> &GridFunction {
        &self.0
    }

    pub fn into_function(self) -> GridFunction {
        self.0
    }

    pub fn grid(&self) -> &Grid {
        self.0.grid()
    }

    pub fn values(&self) -> &[f64] {
        self.0.values()
    }

    /// Value on the cell containing `x`, zero outside the root.
    pub fn value_at(&self, x: &[f64]) -> f64 {
        self.0.value_at(x)
    }
}
