//! Low-density-limit correlation functions of boson number operators.
//!
//! * [`partitions`]: set partitions, Wick pair diagrams, Stirling/Bell/Touchard numbers.
//! * [`spectral`]: the discretized one-particle model, the limiting trace
//!   formula and the free white-noise number algebra.
//! * [`finite_eps`]: pairing-sum evaluation at finite scaling parameter.
//! * [`statistics`]: moment/cumulant transforms, Poisson statistics, independence.
//! * [`wn_symbolic`]: normal ordering of time-energy white-noise expressions.

pub mod error;
pub mod finite_eps;
pub mod partitions;
pub mod report;
pub mod spectral;
pub mod statistics;
pub mod symbol;
pub mod test_function;
pub mod wn_symbolic;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use partitions::{PairDiagram, SetPartition};
pub use report::{ConvergenceReport, ConvergenceRow};
pub use spectral::{
    DensityOfStates, DensityProfile, EnergyGrid, FrequencyIndex, ModelSpec, ShellAmplitude,
    ShellKernel, SpectralModel,
};
pub use statistics::{CorrelationFamily, CumulantTable};
pub use symbol::NumberSymbol;
pub use test_function::TestFunction;
