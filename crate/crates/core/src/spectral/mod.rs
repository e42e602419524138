//! Discretized one-particle structure and the limiting trace formulas.
//!
//! The spectral projection `P_E` is realized by binning: an energy window
//! `[e_min, e_max]` is cut into `M` cells with centers `E_a`, a vector is
//! described by its shell amplitude `v(E_a)` (density of states already
//! absorbed, so `<g, P_E f> = conj(v_g(E)) v_f(E)`), and every energy
//! integral becomes `sum_a dE * (...)`.

mod file;

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbol::NumberSymbol;
use crate::test_function::product_integral;

pub use file::{DensitySpec, GridSpec, ModelSpec, VectorSpec};

/// Uniform binning of an energy window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyGrid {
    e_min: f64,
    e_max: f64,
    bins: usize,
}

impl EnergyGrid {
    pub fn new(e_min: f64, e_max: f64, bins: usize) -> Result<Self> {
        if !(e_min.is_finite() && e_max.is_finite()) {
            return Err(Error::InvalidGrid("non-finite bounds".into()));
        }
        if e_max <= e_min {
            return Err(Error::InvalidGrid(format!(
                "need e_max > e_min, got [{e_min}, {e_max}]"
            )));
        }
        if bins < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 bins, got {bins}")));
        }
        Ok(Self { e_min, e_max, bins })
    }

    pub fn e_min(&self) -> f64 {
        self.e_min
    }

    pub fn e_max(&self) -> f64 {
        self.e_max
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    /// Bin width `dE`.
    pub fn width(&self) -> f64 {
        (self.e_max - self.e_min) / self.bins as f64
    }

    pub fn center(&self, a: usize) -> f64 {
        self.e_min + (a as f64 + 0.5) * self.width()
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.bins).map(|a| self.center(a))
    }

    /// Index `j` such that `x = e_min + j dE`, if `x` sits on a bin edge.
    pub fn edge_index(&self, x: f64) -> Option<usize> {
        let j = (x - self.e_min) / self.width();
        let r = j.round();
        if r < 0.0 || r > self.bins as f64 || (j - r).abs() > 1e-9 {
            return None;
        }
        Some(r as usize)
    }
}

/// Density `n(E_a) >= 0` per bin. Diagonal in energy, so it commutes with
/// the free evolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile(Vec<f64>);

impl DensityProfile {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (bin, &value) in values.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::NegativeDensity { bin, value });
            }
        }
        Ok(Self(values))
    }

    pub fn flat(value: f64, bins: usize) -> Result<Self> {
        Self::new(vec![value; bins])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// How a radial amplitude is transported onto energy shells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityOfStates {
    /// `v(E) = radial(E)`.
    Flat,
    /// Free particle in three dimensions with `E = |k|^2`:
    /// `v(E) = sqrt(2 pi sqrt(E)) radial(sqrt(E))`.
    ThreeD,
}

/// Energy-shell amplitude `v(E_a)` of a one-particle vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellAmplitude {
    name: String,
    values: Vec<Complex64>,
}

impl ShellAmplitude {
    pub fn new(name: impl Into<String>, values: Vec<Complex64>) -> Result<Self> {
        let name = name.into();
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(format!("shell amplitude `{name}`")));
        }
        Ok(Self { name, values })
    }

    pub fn from_fn(
        name: impl Into<String>,
        grid: &EnergyGrid,
        f: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        Self::new(name, grid.centers().map(f).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Samples a radial profile onto the grid with the given density of states.
pub fn radial_to_shell(
    name: impl Into<String>,
    grid: &EnergyGrid,
    dos: DensityOfStates,
    radial: impl Fn(f64) -> f64,
) -> Result<ShellAmplitude> {
    let name = name.into();
    if dos == DensityOfStates::ThreeD && grid.e_min() < 0.0 {
        return Err(Error::InvalidGrid(
            "three-dimensional shells need a nonnegative energy window".into(),
        ));
    }
    let mut values = Vec::with_capacity(grid.bins());
    for e in grid.centers() {
        let v = match dos {
            DensityOfStates::Flat => radial(e),
            DensityOfStates::ThreeD => {
                let r = e.sqrt();
                let rad = radial(r);
                if rad == 0.0 {
                    0.0
                } else {
                    (TAU * r).sqrt() * rad
                }
            }
        };
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("radial profile `{name}` at E={e}")));
        }
        values.push(Complex64::new(v, 0.0));
    }
    ShellAmplitude::new(name, values)
}

/// Kernel `K(E_a, E_b)` of a trace-class one-particle operator on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellKernel {
    grid: EnergyGrid,
    values: Vec<Complex64>,
}

impl ShellKernel {
    pub fn zeros(grid: EnergyGrid) -> Self {
        let m = grid.bins();
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); m * m],
        }
    }

    pub fn from_fn(grid: EnergyGrid, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let m = grid.bins();
        let mut values = Vec::with_capacity(m * m);
        for a in 0..m {
            for b in 0..m {
                values.push(f(a, b));
            }
        }
        Self { grid, values }
    }

    /// `|f><g|`: `K(E_a, E_b) = v_f(E_a) conj(v_g(E_b))`.
    pub fn rank_one(grid: EnergyGrid, f: &ShellAmplitude, g: &ShellAmplitude) -> Result<Self> {
        for v in [f, g] {
            if v.len() != grid.bins() {
                return Err(Error::SizeMismatch {
                    what: format!("shell amplitude `{}`", v.name()),
                    expected: grid.bins(),
                    got: v.len(),
                });
            }
        }
        let (fv, gv) = (f.values(), g.values());
        Ok(Self::from_fn(grid, |a, b| fv[a] * gv[b].conj()))
    }

    pub fn grid(&self) -> &EnergyGrid {
        &self.grid
    }

    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.values[a * self.grid.bins() + b]
    }

    /// Value at shifted indices; zero outside the grid window.
    fn get_shifted(&self, a: i64, b: i64) -> Complex64 {
        let m = self.grid.bins() as i64;
        if a < 0 || b < 0 || a >= m || b >= m {
            Complex64::new(0.0, 0.0)
        } else {
            self.get(a as usize, b as usize)
        }
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.grid.bins()).map(|a| self.get(a, a)).collect()
    }

    fn check_grid(&self, other: &EnergyGrid) -> Result<()> {
        if self.grid != *other {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }
}

/// Signed lattice frequency: `omega = index * dE`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FrequencyIndex(pub i64);

impl FrequencyIndex {
    pub fn omega(self, grid: &EnergyGrid) -> f64 {
        self.0 as f64 * grid.width()
    }
}

/// Partial frequency sums `s~_l = s_l + ... + s_{n-1}`, with a trailing 0.
pub(crate) fn tail_sums(freqs: &[FrequencyIndex]) -> Vec<i64> {
    let mut out = vec![0i64; freqs.len() + 1];
    for l in (0..freqs.len()).rev() {
        out[l] = out[l + 1] + freqs[l].0;
    }
    out
}

/// Immutable discretized model: grid, density, and named shell amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    grid: EnergyGrid,
    density: DensityProfile,
    vectors: BTreeMap<String, ShellAmplitude>,
}

pub fn make_model(
    grid: EnergyGrid,
    density: DensityProfile,
    vectors: impl IntoIterator<Item = ShellAmplitude>,
) -> Result<SpectralModel> {
    if density.len() != grid.bins() {
        return Err(Error::SizeMismatch {
            what: "density".into(),
            expected: grid.bins(),
            got: density.len(),
        });
    }
    let mut map = BTreeMap::new();
    for v in vectors {
        if v.len() != grid.bins() {
            return Err(Error::SizeMismatch {
                what: format!("shell amplitude `{}`", v.name()),
                expected: grid.bins(),
                got: v.len(),
            });
        }
        map.insert(v.name().to_string(), v);
    }
    Ok(SpectralModel {
        grid,
        density,
        vectors: map,
    })
}

impl SpectralModel {
    pub fn grid(&self) -> &EnergyGrid {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        self.density.values()
    }

    pub fn vector(&self, name: &str) -> Result<&ShellAmplitude> {
        self.vectors
            .get(name)
            .ok_or_else(|| Error::UnknownVector(name.to_string()))
    }

    pub fn vector_names(&self) -> impl Iterator<Item = &str> {
        self.vectors.keys().map(String::as_str)
    }

    /// Kernel of `|f><g|`.
    pub fn rank_one(&self, f: &str, g: &str) -> Result<ShellKernel> {
        ShellKernel::rank_one(self.grid, self.vector(f)?, self.vector(g)?)
    }

    /// The same model sampled on `bins` cells of the same window. Density and
    /// amplitudes are linearly interpolated between the old bin centers and
    /// held constant beyond the outermost ones.
    pub fn resampled(&self, bins: usize) -> Result<SpectralModel> {
        let grid = EnergyGrid::new(self.grid.e_min, self.grid.e_max, bins)?;
        let old = self.grid;
        let locate = |e: f64| -> (usize, usize, f64) {
            let x = ((e - old.e_min) / old.width() - 0.5).clamp(0.0, (old.bins - 1) as f64);
            let i = (x.floor() as usize).min(old.bins - 2);
            (i, i + 1, x - i as f64)
        };
        let density = grid
            .centers()
            .map(|e| {
                let (i, j, t) = locate(e);
                let d = self.density();
                (1.0 - t) * d[i] + t * d[j]
            })
            .collect();
        let vectors = self
            .vectors
            .values()
            .map(|v| {
                ShellAmplitude::from_fn(v.name(), &grid, |e| {
                    let (i, j, t) = locate(e);
                    v.values()[i] * (1.0 - t) + v.values()[j] * t
                })
            })
            .collect::<Result<Vec<_>>>()?;
        make_model(grid, DensityProfile::new(density)?, vectors)
    }

    /// `Tr(n T) = sum_a n(E_a) K(E_a, E_a) dE`.
    pub fn state_expectation(&self, kernel: &ShellKernel) -> Result<Complex64> {
        kernel.check_grid(&self.grid)?;
        let de = self.grid.width();
        Ok(self
            .density()
            .iter()
            .enumerate()
            .map(|(a, &n)| kernel.get(a, a) * (n * de))
            .sum())
    }
}

/// `(T * U)(E_a, E_b) = 2 pi T(E_a, E_a) U(E_a, E_b)`.
pub fn star_product(t: &ShellKernel, u: &ShellKernel) -> Result<ShellKernel> {
    t.check_grid(&u.grid)?;
    let diag = t.diagonal();
    Ok(ShellKernel::from_fn(t.grid, |a, b| diag[a] * u.get(a, b) * TAU))
}

pub fn state_expectation(model: &SpectralModel, kernel: &ShellKernel) -> Result<Complex64> {
    model.state_expectation(kernel)
}

/// Scalar part of the limiting truncated correlation function together with
/// the order of the accompanying time-delta chain.
///
/// The full limit is `value * (2 pi)^delta_order * delta(t_2 - t_1) ... delta(t_n - t_{n-1})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitCoefficient {
    pub value: Complex64,
    pub delta_order: usize,
}

/// `sum_a dE n(E_a) T_1(E_a + w~_1, E_a + w~_2) ... T_n(E_a + w~_n, E_a)`
/// gated by the exact test `w~_1 == 0`.
pub fn limit_truncated_coefficient(
    model: &SpectralModel,
    kernels: &[ShellKernel],
    freqs: &[FrequencyIndex],
) -> Result<LimitCoefficient> {
    if kernels.is_empty() {
        return Err(Error::Arity {
            what: "limit coefficient",
            got: 0,
            min: 1,
            max: usize::MAX,
        });
    }
    if freqs.len() != kernels.len() {
        return Err(Error::InvalidParameter(format!(
            "{} kernels but {} frequencies",
            kernels.len(),
            freqs.len()
        )));
    }
    for k in kernels {
        k.check_grid(&model.grid)?;
    }
    let delta_order = kernels.len() - 1;
    let shifts = tail_sums(freqs);
    if shifts[0] != 0 {
        return Ok(LimitCoefficient {
            value: Complex64::new(0.0, 0.0),
            delta_order,
        });
    }
    let de = model.grid.width();
    let mut total = Complex64::new(0.0, 0.0);
    for (a, &n) in model.density().iter().enumerate() {
        if n == 0.0 {
            continue;
        }
        let a = a as i64;
        let mut prod = Complex64::new(n * de, 0.0);
        for (l, k) in kernels.iter().enumerate() {
            prod *= k.get_shifted(a + shifts[l], a + shifts[l + 1]);
            if prod == Complex64::new(0.0, 0.0) {
                break;
            }
        }
        total += prod;
    }
    Ok(LimitCoefficient {
        value: total,
        delta_order,
    })
}

fn symbol_kernels(model: &SpectralModel, symbols: &[NumberSymbol]) -> Result<Vec<ShellKernel>> {
    symbols.iter().map(|s| s.kernel(model)).collect()
}

/// Limiting truncated correlation smeared against the symbols' test
/// functions: `(2 pi)^{n-1} [int prod phi_l] C`.
pub fn limit_truncated_smeared(model: &SpectralModel, symbols: &[NumberSymbol]) -> Result<Complex64> {
    for s in symbols {
        s.validate(model)?;
    }
    let kernels = symbol_kernels(model, symbols)?;
    let freqs: Vec<_> = symbols.iter().map(|s| s.omega).collect();
    let c = limit_truncated_coefficient(model, &kernels, &freqs)?;
    if c.value == Complex64::new(0.0, 0.0) {
        return Ok(c.value);
    }
    let phis: Vec<_> = symbols.iter().map(|s| s.phi.clone()).collect();
    let time = product_integral(&phis).value;
    Ok(c.value * TAU.powi(c.delta_order as i32) * time)
}

/// Order in which an iterated star product is reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduction {
    LeftToRight,
    RightToLeft,
}

/// `T_1 * T_2 * ... * T_n` reduced in the requested order.
pub fn star_chain(kernels: &[ShellKernel], order: Reduction) -> Result<ShellKernel> {
    let (first, rest) = match order {
        Reduction::LeftToRight => kernels.split_first(),
        Reduction::RightToLeft => kernels.split_last(),
    }
    .ok_or_else(|| Error::InvalidParameter("empty star product".into()))?;
    let mut acc = first.clone();
    match order {
        Reduction::LeftToRight => {
            for k in rest {
                acc = star_product(&acc, k)?;
            }
        }
        Reduction::RightToLeft => {
            for k in rest.iter().rev() {
                acc = star_product(k, &acc)?;
            }
        }
    }
    Ok(acc)
}

/// Free white-noise moment `phi_n(N_{T_1}(t_1) ... N_{T_n}(t_n))` smeared
/// against the test functions. Only defined for zero frequencies.
pub fn free_moment(model: &SpectralModel, symbols: &[NumberSymbol]) -> Result<Complex64> {
    free_moment_with(model, symbols, Reduction::LeftToRight)
}

pub fn free_moment_with(
    model: &SpectralModel,
    symbols: &[NumberSymbol],
    order: Reduction,
) -> Result<Complex64> {
    if let Some(s) = symbols.iter().find(|s| s.omega.0 != 0) {
        return Err(Error::Unsupported(format!(
            "free moments need zero frequencies, symbol {}:{} has index {}",
            s.f, s.g, s.omega.0
        )));
    }
    for s in symbols {
        s.validate(model)?;
    }
    let kernels = symbol_kernels(model, symbols)?;
    let chain = star_chain(&kernels, order)?;
    let phis: Vec<_> = symbols.iter().map(|s| s.phi.clone()).collect();
    Ok(model.state_expectation(&chain)? * product_integral(&phis).value)
}
