use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Non-fatal conditions attached to a computed value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// Bin width too coarse to resolve energy differences of order `eps / sigma`.
    Resolution { bin_width: f64, max_bin_width: f64 },
    /// The model was resampled onto fewer bins to bound the lattice cost.
    Coarsened { from: usize, to: usize },
    /// Test functions of different groups are closer than the required distance.
    Separation { distance: f64, required: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::Resolution {
                bin_width,
                max_bin_width,
            } => write!(f, "resolution: bin width {bin_width:.3e} exceeds {max_bin_width:.3e}"),
            Warning::Coarsened { from, to } => write!(f, "coarsened: {from} -> {to} bins"),
            Warning::Separation { distance, required } => {
                write!(f, "separation: {distance:.3e} below {required:.3e}")
            }
        }
    }
}

/// A labelled contribution to a row, e.g. one pair diagram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub label: String,
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    pub n: usize,
    pub value: Complex64,
    pub limit: Complex64,
    pub abs_err: f64,
    /// `abs_err / |limit|`, or `abs_err` itself where the limit vanishes.
    pub rel_err: f64,
    #[serde(default)]
    pub breakdown: Vec<Contribution>,
    #[serde(default)]
    pub warnings: Vec<Warning>,
}

impl ConvergenceRow {
    pub fn new(epsilon: f64, n: usize, value: Complex64, limit: Complex64) -> Self {
        let abs_err = (value - limit).norm();
        let scale = limit.norm();
        let rel_err = if scale > 0.0 { abs_err / scale } else { abs_err };
        Self {
            epsilon,
            n,
            value,
            limit,
            abs_err,
            rel_err,
            breakdown: Vec::new(),
            warnings: Vec::new(),
        }
    }

    /// Warnings joined into one field, for tabular output.
    pub fn warnings_text(&self) -> String {
        self.warnings
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// Finite-eps values against their limit, rows in decreasing `epsilon`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn abs_errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.abs_err).collect()
    }

    pub fn rel_errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.rel_err).collect()
    }

    pub fn has_warnings(&self) -> bool {
        self.rows.iter().any(|r| !r.warnings.is_empty())
    }
}

/// Checks that an epsilon list is positive, finite and strictly decreasing.
pub(crate) fn check_epsilons(epsilons: &[f64]) -> crate::Result<()> {
    if epsilons.is_empty() {
        return Err(crate::Error::InvalidParameter("empty epsilon list".into()));
    }
    if let Some(e) = epsilons.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
        return Err(crate::Error::InvalidParameter(format!(
            "epsilon must be positive, got {e}"
        )));
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(crate::Error::InvalidParameter(
            "epsilons must be strictly decreasing".into(),
        ));
    }
    Ok(())
}
