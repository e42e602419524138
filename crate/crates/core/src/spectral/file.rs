use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{make_model, DensityProfile, EnergyGrid, ShellAmplitude, SpectralModel};
use crate::error::{Error, Result};

/// Serialized form of a [`SpectralModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub grid: GridSpec,
    pub density: DensitySpec,
    #[serde(default)]
    pub vectors: BTreeMap<String, VectorSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub e_min: f64,
    pub e_max: f64,
    pub bins: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    Flat { value: f64 },
    Table { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum VectorSpec {
    /// `amplitude * exp(-(E - center)^2 / (2 width^2))`.
    GaussianShell {
        center: f64,
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `1` on `[lo, hi]`, `0` elsewhere, sampled at bin centers.
    Indicator { lo: f64, hi: f64 },
    Table { re: Vec<f64>, im: Vec<f64> },
}

fn one() -> f64 {
    1.0
}

impl VectorSpec {
    fn build(&self, name: &str, grid: &EnergyGrid) -> Result<ShellAmplitude> {
        match *self {
            VectorSpec::GaussianShell {
                center,
                width,
                amplitude,
            } => {
                if !(width > 0.0 && width.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "vector `{name}`: width must be positive, got {width}"
                    )));
                }
                ShellAmplitude::from_fn(name, grid, |e| {
                    let x = (e - center) / width;
                    Complex64::new(amplitude * (-0.5 * x * x).exp(), 0.0)
                })
            }
            VectorSpec::Indicator { lo, hi } => {
                if !(hi > lo) {
                    return Err(Error::InvalidParameter(format!(
                        "vector `{name}`: need hi > lo, got [{lo}, {hi}]"
                    )));
                }
                ShellAmplitude::from_fn(name, grid, |e| {
                    Complex64::new(if (lo..=hi).contains(&e) { 1.0 } else { 0.0 }, 0.0)
                })
            }
            VectorSpec::Table { ref re, ref im } => {
                if re.len() != im.len() {
                    return Err(Error::SizeMismatch {
                        what: format!("imaginary part of vector `{name}`"),
                        expected: re.len(),
                        got: im.len(),
                    });
                }
                ShellAmplitude::new(
                    name,
                    re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect(),
                )
            }
        }
    }
}

impl ModelSpec {
    pub fn build(&self) -> Result<SpectralModel> {
        let grid = EnergyGrid::new(self.grid.e_min, self.grid.e_max, self.grid.bins)?;
        let density = match &self.density {
            DensitySpec::Flat { value } => DensityProfile::flat(*value, grid.bins())?,
            DensitySpec::Table { values } => DensityProfile::new(values.clone())?,
        };
        let vectors = self
            .vectors
            .iter()
            .map(|(name, spec)| spec.build(name, &grid))
            .collect::<Result<Vec<_>>>()?;
        make_model(grid, density, vectors)
    }
}
