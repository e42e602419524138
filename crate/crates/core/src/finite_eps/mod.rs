//! Correlation functions at finite scaling parameter `eps` from the
//! Gaussian pairing expansion.
//!
//! The product `N_1(t_1) ... N_n(t_n)` expands into the string
//! `A+_1 A_1 ... A+_n A_n`; a pairing sends creator slot `l` to annihilator
//! slot `sigma(l)`. A pair with `l <= sigma(l)` is creator-first and
//! contributes `eps <g, n S_tau f>`, the others contribute
//! `<g, (1 + eps n) S_tau f>`.

mod sweep;


use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_arity, Error, Result};
use crate::partitions::{enumerate_pair_diagrams, PairDiagram};
use crate::report::Warning;
use crate::spectral::{ShellAmplitude, SpectralModel};
use crate::statistics::{truncated_from_full, CorrelationFamily};
use crate::symbol::NumberSymbol;

pub use sweep::{convergence_sweep, delta_lemma_check, delta_lemma_value};

/// Largest arity for fixed-time correlations.
pub const MAX_FIXED_TIME_ARITY: usize = 5;
/// Largest arity for smeared correlations (the bin lattice costs `M^n`).
pub const MAX_SMEARED_ARITY: usize = 4;
/// Bin cap applied to the model when evaluating four-point functions.
pub const MAX_BINS_AT_ARITY_FOUR: usize = 64;
/// Bins required across the energy width `eps / sigma` of a smeared factor.
pub const RESOLUTION_BINS: f64 = 8.0;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    /// Creator before annihilator: `<g, n S f>`, carries one power of `eps`.
    Density,
    /// Annihilator before creator: `<g, (1 + eps n) S f>`.
    Commutator,
}

impl PairKind {
    fn of(l: usize, j: usize) -> Self {
        if l <= j {
            PairKind::Density
        } else {
            PairKind::Commutator
        }
    }

    fn weight(self, n: f64, epsilon: f64) -> f64 {
        match self {
            PairKind::Density => n,
            PairKind::Commutator => 1.0 + epsilon * n,
        }
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    Ok(())
}

fn weighted_overlap<'a>(
    model: &'a SpectralModel,
    f: &'a ShellAmplitude,
    g: &'a ShellAmplitude,
    kind: PairKind,
    epsilon: f64,
) -> impl Iterator<Item = Complex64> + 'a {
    let de = model.grid().width();
    model
        .density()
        .iter()
        .zip(f.values().iter().zip(g.values()))
        .map(move |(&n, (vf, vg))| vg.conj() * vf * (kind.weight(n, epsilon) * de))
}

/// `<g, n S_tau f>` or `<g, (1 + eps n) S_tau f>` as a bin sum with phase
/// `e^{i tau E_a}`.
pub fn two_point(
    model: &SpectralModel,
    f: &str,
    g: &str,
    kind: PairKind,
    tau: f64,
    epsilon: f64,
) -> Result<Complex64> {
    check_epsilon(epsilon)?;
    let (f, g) = (model.vector(f)?, model.vector(g)?);
    Ok(weighted_overlap(model, f, g, kind, epsilon)
        .zip(model.grid().centers())
        .map(|(w, e)| w * Complex64::from_polar(1.0, tau * e))
        .sum())
}

/// Unsmeared correlation `W_eps(t_1, ..., t_n)` summed over all pairings.
pub fn correlation_fixed_times(
    model: &SpectralModel,
    symbols: &[NumberSymbol],
    times: &[f64],
    epsilon: f64,
) -> Result<Complex64> {
    check_arity("fixed-time correlation", symbols.len(), 1, MAX_FIXED_TIME_ARITY)?;
    check_epsilon(epsilon)?;
    if times.len() != symbols.len() {
        return Err(Error::InvalidParameter(format!(
            "{} symbols but {} times",
            symbols.len(),
            times.len()
        )));
    }
    for s in symbols {
        s.validate(model)?;
    }
    let n = symbols.len();
    let mut factor = vec![vec![ZERO; n]; n];
    for l in 0..n {
        for j in 0..n {
            let kind = PairKind::of(l, j);
            let tau = (times[l] - times[j]) / epsilon;
            let tp = two_point(model, &symbols[l].f, &symbols[j].g, kind, tau, epsilon)?;
            factor[l][j] = match kind {
                PairKind::Density => tp * epsilon,
                PairKind::Commutator => tp,
            };
        }
    }
    let total: Complex64 = enumerate_pair_diagrams(n)?
        .iter()
        .map(|d| (0..n).map(|l| factor[l][d.partner(l)]).product::<Complex64>())
        .sum();
    let phase: f64 = symbols
        .iter()
        .zip(times)
        .map(|(s, t)| s.omega.omega(model.grid()) * t)
        .sum::<f64>()
        / epsilon;
    Ok(total * Complex64::from_polar(epsilon.powi(-(n as i32)), -phase))
}

/// One pairing's contribution to a smeared correlation.
#[derive(Debug, Clone, PartialEq)]
pub struct PairingTerm {
    pub diagram: PairDiagram,
    pub epsilon: f64,
    pub value: Complex64,
    /// Number of creator-first pairs; the term scales like `eps^(k-1)`.
    pub k: usize,
    /// Type of each pair `(l, sigma(l))`.
    pub pair_kinds: Vec<PairKind>,
    pub warnings: Vec<Warning>,
}

/// Smeared correlations of a fixed symbol list at one `eps`.
///
/// Construction precomputes, per slot `m`, the Fourier factor
/// `phi~_m(((d - s_m) dE) / eps)` for every bin difference `d`, and per
/// ordered pair `(l, j)` the weighted shell products
/// `w(E_a) conj(v_{g_j}(E_a)) v_{f_l}(E_a) dE`. A pairing term is then a
/// sum over the `M^n` bin lattice of products of table entries.
#[derive(Debug, Clone)]
pub struct SmearedEvaluator {
    model: SpectralModel,
    symbols: Vec<NumberSymbol>,
    epsilon: f64,
    warnings: Vec<Warning>,
    phases: Vec<Vec<Complex64>>,
    weights: Vec<Vec<[Vec<Complex64>; 2]>>,
}

impl SmearedEvaluator {
    /// Validates the inputs, coarsens the model for four-point functions
    /// and records resolution warnings.
    pub fn new(model: &SpectralModel, symbols: &[NumberSymbol], epsilon: f64) -> Result<Self> {
        check_arity("smeared correlation", symbols.len(), 1, MAX_SMEARED_ARITY)?;
        check_epsilon(epsilon)?;
        for s in symbols {
            s.validate(model)?;
        }
        let mut warnings = Vec::new();
        let bins = model.grid().bins();
        let prepared = if symbols.len() == 4 && bins > MAX_BINS_AT_ARITY_FOUR {
            warnings.push(Warning::Coarsened {
                from: bins,
                to: MAX_BINS_AT_ARITY_FOUR,
            });
            model.resampled(MAX_BINS_AT_ARITY_FOUR)?
        } else {
            model.clone()
        };
        let sigma = symbols
            .iter()
            .map(|s| s.phi.time_width())
            .fold(0.0, f64::max);
        let max_bin_width = epsilon / (RESOLUTION_BINS * sigma);
        let bin_width = prepared.grid().width();
        if bin_width > max_bin_width {
            warnings.push(Warning::Resolution {
                bin_width,
                max_bin_width,
            });
        }
        Ok(Self::build(prepared, symbols.to_vec(), epsilon, warnings))
    }

    fn build(
        model: SpectralModel,
        symbols: Vec<NumberSymbol>,
        epsilon: f64,
        warnings: Vec<Warning>,
    ) -> Self {
        let grid = *model.grid();
        let m = grid.bins() as i64;
        let de = grid.width();
        let phases = symbols
            .iter()
            .map(|s| {
                (-(m - 1)..m)
                    .map(|d| s.phi.fourier((d - s.omega.0) as f64 * de / epsilon))
                    .collect()
            })
            .collect();
        let weights = symbols
            .iter()
            .map(|sl| {
                symbols
                    .iter()
                    .map(|sj| {
                        // Names were validated on construction.
                        let f = model.vector(&sl.f).expect("validated");
                        let g = model.vector(&sj.g).expect("validated");
                        [PairKind::Density, PairKind::Commutator].map(|kind| {
                            weighted_overlap(&model, f, g, kind, epsilon).collect()
                        })
                    })
                    .collect()
            })
            .collect();
        Self {
            model,
            symbols,
            epsilon,
            warnings,
            phases,
            weights,
        }
    }

    /// Evaluator for the sub-tuple `indices` (increasing), on the same
    /// prepared model.
    pub fn restricted(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() || indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("sub-tuple must be nonempty and increasing".into()));
        }
        if let Some(&i) = indices.iter().find(|&&i| i >= self.symbols.len()) {
            return Err(Error::InvalidParameter(format!("slot {i} out of range")));
        }
        let symbols = indices.iter().map(|&i| self.symbols[i].clone()).collect();
        let phases = indices.iter().map(|&i| self.phases[i].clone()).collect();
        let weights = indices
            .iter()
            .map(|&l| indices.iter().map(|&j| self.weights[l][j].clone()).collect())
            .collect();
        Ok(Self {
            model: self.model.clone(),
            symbols,
            epsilon: self.epsilon,
            warnings: self.warnings.clone(),
            phases,
            weights,
        })
    }

    /// The model actually used (possibly coarsened).
    pub fn model(&self) -> &SpectralModel {
        &self.model
    }

    pub fn symbols(&self) -> &[NumberSymbol] {
        &self.symbols
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn arity(&self) -> usize {
        self.symbols.len()
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    /// `eps^(k-n) sum_{a_1..a_n} prod_l w_l(a_l) prod_m phi~_m((E_{a_m} - E_{a_p(m)} - w_m) / eps)`
    /// with `p = sigma^{-1}`.
    pub fn pairing_term(&self, diagram: &PairDiagram) -> Result<PairingTerm> {
        let n = self.arity();
        if diagram.arity() != n {
            return Err(Error::InvalidParameter(format!(
                "diagram of arity {} for {n} symbols",
                diagram.arity()
            )));
        }
        let inv = diagram.inverse();
        let pair_kinds: Vec<PairKind> = (0..n).map(|l| PairKind::of(l, diagram.partner(l))).collect();
        let kernels: Vec<&[Complex64]> = (0..n)
            .map(|l| {
                let slot = match pair_kinds[l] {
                    PairKind::Density => 0,
                    PairKind::Commutator => 1,
                };
                self.weights[l][diagram.partner(l)][slot].as_slice()
            })
            .collect();
        // Each phase factor is applied as soon as both of its bins are fixed.
        let mut factors = vec![Vec::new(); n];
        for (m, &p) in inv.iter().enumerate() {
            factors[m.max(p)].push((m, p));
        }
        let plan = Plan {
            m: self.model.grid().bins(),
            kernels,
            factors,
            phases: &self.phases,
        };
        let partial: Vec<Complex64> = (0..plan.m)
            .into_par_iter()
            .map(|a0| {
                let mut idx = [0usize; MAX_SMEARED_ARITY];
                plan.descend_from(a0, &mut idx)
            })
            .collect();
        let sum: Complex64 = partial.into_iter().sum();
        let k = diagram.k();
        Ok(PairingTerm {
            diagram: diagram.clone(),
            epsilon: self.epsilon,
            value: sum * self.epsilon.powi(k as i32 - n as i32),
            k,
            pair_kinds,
            warnings: self.warnings.clone(),
        })
    }

    /// All pairing terms, in lexicographic diagram order.
    pub fn pairing_terms(&self) -> Result<Vec<PairingTerm>> {
        enumerate_pair_diagrams(self.arity())?
            .iter()
            .map(|d| self.pairing_term(d))
            .collect()
    }

    /// `W_eps(phi_1, ..., phi_n)`: sum over every pairing.
    pub fn correlation(&self) -> Result<Complex64> {
        Ok(self.pairing_terms()?.iter().map(|t| t.value).sum())
    }

    /// Cyclic pairing terms only.
    pub fn irreducible_terms(&self) -> Result<Vec<PairingTerm>> {
        enumerate_pair_diagrams(self.arity())?
            .iter()
            .filter(|d| d.cycles().len() == 1)
            .map(|d| self.pairing_term(d))
            .collect()
    }

    /// `W^T_eps` as the sum of the cyclic pairing terms.
    pub fn truncated(&self) -> Result<Complex64> {
        Ok(self.irreducible_terms()?.iter().map(|t| t.value).sum())
    }

    /// Full correlations of every increasing sub-tuple.
    pub fn full_family(&self) -> Result<CorrelationFamily<Complex64>> {
        let n = self.arity();
        CorrelationFamily::try_from_fn(n, |subset| self.restricted(subset)?.correlation())
    }

    /// `W^T_eps` by inverting the recursion that defines it in terms of the
    /// full correlations of all sub-tuples.
    pub fn truncated_by_recursion(&self) -> Result<Complex64> {
        let family = truncated_from_full(&self.full_family()?);
        Ok(*family.full())
    }
}

struct Plan<'a> {
    m: usize,
    kernels: Vec<&'a [Complex64]>,
    factors: Vec<Vec<(usize, usize)>>,
    phases: &'a [Vec<Complex64>],
}

impl Plan<'_> {
    fn descend_from(&self, a0: usize, idx: &mut [usize; MAX_SMEARED_ARITY]) -> Complex64 {
        let w = self.kernels[0][a0];
        if w == ZERO {
            return ZERO;
        }
        idx[0] = a0;
        let p = self.apply(0, w, idx);
        if self.kernels.len() == 1 {
            p
        } else {
            self.descend(1, p, idx)
        }
    }

    fn apply(&self, depth: usize, mut p: Complex64, idx: &[usize; MAX_SMEARED_ARITY]) -> Complex64 {
        for &(m, q) in &self.factors[depth] {
            p *= self.phases[m][idx[m] + self.m - 1 - idx[q]];
        }
        p
    }

    fn descend(&self, depth: usize, partial: Complex64, idx: &mut [usize; MAX_SMEARED_ARITY]) -> Complex64 {
        let last = depth + 1 == self.kernels.len();
        let mut acc = ZERO;
        for (a, &w) in self.kernels[depth].iter().enumerate() {
            if w == ZERO {
                continue;
            }
            idx[depth] = a;
            let p = self.apply(depth, partial * w, idx);
            acc += if last { p } else { self.descend(depth + 1, p, idx) };
        }
        acc
    }
}

pub fn pairing_term_smeared(
    model: &SpectralModel,
    symbols: &[NumberSymbol],
    diagram: &PairDiagram,
    epsilon: f64,
) -> Result<PairingTerm> {
    SmearedEvaluator::new(model, symbols, epsilon)?.pairing_term(diagram)
}

pub fn correlation_smeared(model: &SpectralModel, symbols: &[NumberSymbol], epsilon: f64) -> Result<Complex64> {
    SmearedEvaluator::new(model, symbols, epsilon)?.correlation()
}

pub fn truncated_smeared(model: &SpectralModel, symbols: &[NumberSymbol], epsilon: f64) -> Result<Complex64> {
    SmearedEvaluator::new(model, symbols, epsilon)?.truncated()
}
