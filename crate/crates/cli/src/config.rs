use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ldl_core::finite_eps::MAX_SMEARED_ARITY;
use ldl_core::spectral::GridSpec;
use ldl_core::wn_symbolic::MAX_VACUUM_ARITY;
use ldl_core::{ModelSpec, NumberSymbol, SpectralModel, TestFunction};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const DEFAULT_EPSILONS: [f64; 3] = [0.2, 0.1, 0.05];

/// One experiment and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    Limit,
    Sweep,
    FreeCheck {
        /// Randomized configurations drawn when no symbols are given.
        #[serde(default = "default_trials")]
        trials: usize,
    },
    Poisson {
        lambda: f64,
        #[serde(default = "default_orders")]
        orders: usize,
        #[serde(default)]
        omega_index: i64,
        #[serde(default = "default_grid_bins")]
        grid_bins: usize,
        /// Defaults to `2 lambda`.
        #[serde(default)]
        e_max: Option<f64>,
    },
    Independence {
        separation: f64,
    },
    WnExpect {
        #[serde(default)]
        order: Option<usize>,
        #[serde(default)]
        show_steps: bool,
        #[serde(default)]
        connected_only: bool,
    },
    Diagrams {
        n: usize,
    },
    Bell {
        n: usize,
    },
    DeltaLemma {
        sigma_x: f64,
        sigma_t: f64,
    },
}

fn default_trials() -> usize {
    20
}

fn default_orders() -> usize {
    6
}

fn default_grid_bins() -> usize {
    64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

/// Experiment file. The model is given either inline or as a path relative
/// to the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub symbols: Vec<NumberSymbol>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub epsilons: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
    #[serde(default)]
    pub seed: u64,
}

/// Metadata written next to every report; `config` reruns the experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub version: String,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    pub symbol_digest: String,
    pub config: ExperimentConfig,
}

fn parse<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        anyhow::anyhow!("{}: field `{field}`: {}", path.display(), e.inner())
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Loads an experiment file, a sidecar, or a bare model file. Model paths
/// are resolved and inlined.
pub fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = read(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("{} is not valid JSON", path.display()))?;
    let mut config = if value.get("config").is_some() && value.get("symbol_digest").is_some() {
        parse::<Sidecar>(&text, path)?.config
    } else if value.get("grid").is_some() {
        ExperimentConfig {
            model: Some(parse(&text, path)?),
            ..ExperimentConfig::empty()
        }
    } else {
        parse::<ExperimentConfig>(&text, path)?
    };
    if let Some(file) = config.model_file.take() {
        if config.model.is_some() {
            bail!("{}: give either `model` or `model_file`, not both", path.display());
        }
        let full = path.parent().unwrap_or(Path::new(".")).join(&file);
        config.model = Some(parse(&read(&full)?, &full)?);
    }
    Ok(config)
}

impl ExperimentConfig {
    pub fn empty() -> Self {
        Self {
            model_file: None,
            model: None,
            symbols: Vec::new(),
            epsilons: Vec::new(),
            experiment: None,
            output: None,
            seed: 0,
        }
    }

    pub fn build_model(&self) -> Result<Option<SpectralModel>> {
        self.model.as_ref().map(|m| m.build().context("invalid model")).transpose()
    }

    pub fn require_model(&self) -> Result<SpectralModel> {
        self.build_model()?
            .context("this experiment needs a model (`model` or `model_file`)")
    }

    pub fn epsilons(&self) -> Vec<f64> {
        if self.epsilons.is_empty() {
            DEFAULT_EPSILONS.to_vec()
        } else {
            self.epsilons.clone()
        }
    }

    /// Structural checks that do not need a built model.
    pub fn validate(&self) -> Result<()> {
        let eps = self.epsilons();
        if let Some(i) = eps.iter().position(|&e| !(e.is_finite() && e > 0.0)) {
            bail!("field `epsilons[{i}]`: epsilon must be positive, got {}", eps[i]);
        }
        if eps.windows(2).any(|w| w[1] >= w[0]) {
            bail!("field `epsilons`: values must be strictly decreasing");
        }
        let n = self.symbols.len();
        match self.experiment {
            Some(Experiment::Sweep | Experiment::Independence { .. }) if n > MAX_SMEARED_ARITY => {
                bail!("field `symbols`: {n} symbols given, finite-epsilon sums support n <= {MAX_SMEARED_ARITY}")
            }
            Some(Experiment::WnExpect { .. }) if n > MAX_VACUUM_ARITY => {
                bail!("field `symbols`: {n} symbols given, vacuum expectations support k <= {MAX_VACUUM_ARITY}")
            }
            _ => {}
        }
        Ok(())
    }
}

/// Parses `f:g[:omega[:center:width]]`; the test function defaults to the
/// unit-integral Gaussian at 0 with width 1.
pub fn parse_symbol(spec: &str) -> Result<NumberSymbol> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |i: usize, what: &str| -> Result<f64> {
        parts[i]
            .parse()
            .with_context(|| format!("symbol `{spec}`: {what} `{}` is not a number", parts[i]))
    };
    let (omega, center, width) = match parts.len() {
        2 => (0, 0.0, 1.0),
        3 | 5 => {
            let omega = parts[2]
                .parse()
                .with_context(|| format!("symbol `{spec}`: omega_index `{}` is not an integer", parts[2]))?;
            if parts.len() == 5 {
                (omega, num(3, "center")?, num(4, "width")?)
            } else {
                (omega, 0.0, 1.0)
            }
        }
        _ => bail!("symbol `{spec}`: expected f:g[:omega[:center:width]]"),
    };
    Ok(NumberSymbol::new(parts[0], parts[1], omega, TestFunction::unit_gaussian(center, width)?))
}
