//! Fixtures shared by the benchmarks.

use ldl_core::spectral::make_model;
use ldl_core::{Complex64, CorrelationFamily, DensityProfile, EnergyGrid, NumberSymbol, ShellAmplitude, SpectralModel, TestFunction};

/// Two Gaussian shells on [0, 4] with a mildly varying density.
pub fn model(bins: usize) -> SpectralModel {
    let grid = EnergyGrid::new(0.0, 4.0, bins).unwrap();
    let shell = |name: &str, c: f64, w: f64, p: f64| {
        ShellAmplitude::from_fn(name, &grid, |e| {
            Complex64::from_polar((-(e - c).powi(2) / (2.0 * w * w)).exp(), p * e)
        })
        .unwrap()
    };
    let density = (0..bins).map(|a| 0.8 + 0.4 * a as f64 / bins as f64).collect();
    make_model(
        grid,
        DensityProfile::new(density).unwrap(),
        [shell("f", 1.0, 0.5, 0.0), shell("g", 1.3, 0.4, 0.4)],
    )
    .unwrap()
}

/// `n` symbols alternating `f, g` with staggered unit-integral Gaussians.
pub fn symbols(n: usize) -> Vec<NumberSymbol> {
    (0..n)
        .map(|l| {
            let (f, g) = if l % 2 == 0 { ("f", "g") } else { ("g", "f") };
            NumberSymbol::new(f, g, 0, TestFunction::unit_gaussian(0.1 * l as f64, 1.0).unwrap())
        })
        .collect()
}

pub fn family(n: usize) -> CorrelationFamily<Complex64> {
    CorrelationFamily::from_fn(n, |s| Complex64::new(s.len() as f64, s.iter().sum::<usize>() as f64 * 0.1)).unwrap()
}
