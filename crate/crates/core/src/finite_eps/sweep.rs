use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use super::SmearedEvaluator;
use crate::error::Result;
use crate::report::{check_epsilons, Contribution, ConvergenceReport, ConvergenceRow};
use crate::spectral::{limit_truncated_smeared, SpectralModel};
use crate::symbol::NumberSymbol;
use crate::test_function::{integrate_piecewise, TestFunction};

/// Truncated smeared correlation against its limit over a decreasing list
/// of `eps`. Each row carries the cyclic pairing terms as its breakdown.
///
/// The limit is computed on the same (possibly coarsened) model as the
/// finite values so the rows isolate the `eps` dependence.
pub fn convergence_sweep(
    model: &SpectralModel,
    symbols: &[NumberSymbol],
    epsilons: &[f64],
) -> Result<ConvergenceReport> {
    check_epsilons(epsilons)?;
    let rows = epsilons
        .par_iter()
        .map(|&eps| {
            let ev = SmearedEvaluator::new(model, symbols, eps)?;
            let limit = limit_truncated_smeared(ev.model(), symbols)?;
            let terms = ev.irreducible_terms()?;
            let value = terms.iter().map(|t| t.value).sum();
            let mut row = ConvergenceRow::new(eps, symbols.len(), value, limit);
            row.breakdown = terms
                .iter()
                .map(|t| Contribution {
                    label: t.diagram.to_string(),
                    value: t.value,
                })
                .collect();
            row.warnings = ev.warnings().to_vec();
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport { rows })
}

/// `I(eps) = int dtau phi(eps tau) f~(tau)`, which tends to `2 pi phi(0) f(0)`.
pub fn delta_lemma_value(f: &TestFunction, phi: &TestFunction, epsilon: f64) -> Result<Complex64> {
    f.validate()?;
    phi.validate()?;
    let (lo, hi) = phi.support();
    let (mut lo, mut hi) = (lo / epsilon, hi / epsilon);
    if let Some(reach) = f.fourier_reach() {
        lo = lo.max(-reach);
        hi = hi.min(reach);
    }
    if hi <= lo {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut cuts = Vec::new();
    phi.breakpoints(&mut cuts);
    for c in &mut cuts {
        *c /= epsilon;
    }
    cuts.push(0.0);
    let re = integrate_piecewise(|t| phi.eval(epsilon * t) * f.fourier(t).re, lo, hi, &cuts);
    let im = integrate_piecewise(|t| phi.eval(epsilon * t) * f.fourier(t).im, lo, hi, &cuts);
    Ok(Complex64::new(re, im))
}

/// Tabulates [`delta_lemma_value`] against `2 pi phi(0) f(0)`.
pub fn delta_lemma_check(
    f: &TestFunction,
    phi: &TestFunction,
    epsilons: &[f64],
) -> Result<ConvergenceReport> {
    check_epsilons(epsilons)?;
    let target = Complex64::new(TAU * phi.eval(0.0) * f.eval(0.0), 0.0);
    let rows = epsilons
        .iter()
        .map(|&eps| Ok(ConvergenceRow::new(eps, 1, delta_lemma_value(f, phi, eps)?, target)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport { rows })
}
