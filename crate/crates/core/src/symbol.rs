use serde::{Deserialize, Serialize};

use crate::spectral::{FrequencyIndex, ShellKernel, SpectralModel};
use crate::error::Result;
use crate::test_function::TestFunction;

/// One smeared number operator `N_{T, omega, eps}(phi)` with rank-one
/// `T = |f><g|`. The amplitudes are referenced by name in a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumberSymbol {
    pub f: String,
    pub g: String,
    #[serde(rename = "omega_index", default)]
    pub omega: FrequencyIndex,
    pub phi: TestFunction,
}

impl NumberSymbol {
    pub fn new(f: impl Into<String>, g: impl Into<String>, omega: i64, phi: TestFunction) -> Self {
        Self {
            f: f.into(),
            g: g.into(),
            omega: FrequencyIndex(omega),
            phi,
        }
    }

    /// Checks that both amplitudes exist and the test function is valid.
    pub fn validate(&self, model: &SpectralModel) -> Result<()> {
        model.vector(&self.f)?;
        model.vector(&self.g)?;
        self.phi.validate()
    }

    pub fn kernel(&self, model: &SpectralModel) -> Result<ShellKernel> {
        model.rank_one(&self.f, &self.g)
    }

    pub fn with_phi(&self, phi: TestFunction) -> Self {
        Self {
            phi,
            ..self.clone()
        }
    }
}
