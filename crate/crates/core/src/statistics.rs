//! Full/truncated and moment/cumulant transforms, limiting cumulants and
//! the Poisson element, and the asymptotic independence probe.
//!
//! Families are indexed by subsets of `{0..n}` encoded as bit masks; the
//! value for a subset is the functional evaluated on its elements in
//! increasing order.

use std::f64::consts::TAU;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{check_arity, Error, Result};
use crate::finite_eps::SmearedEvaluator;
use crate::partitions::MAX_PARTITION_ARITY;
use crate::report::{check_epsilons, ConvergenceReport, ConvergenceRow, Warning};
use crate::spectral::{
    make_model, radial_to_shell, DensityOfStates, DensityProfile, EnergyGrid, FrequencyIndex,
    ShellKernel, SpectralModel,
};
use crate::symbol::NumberSymbol;
use crate::test_function::{product_integral, TestFunction};

/// Values the transforms can run on: floats, complex numbers, rationals.
pub trait Scalar: Clone + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {}

impl<T> Scalar for T where T: Clone + Zero + One + Add<Output = T> + Sub<Output = T> + Mul<Output = T> {}

fn subset_of(mask: usize) -> Vec<usize> {
    (0..usize::BITS as usize).filter(|i| mask >> i & 1 == 1).collect()
}

fn mask_of(indices: &[usize]) -> usize {
    indices.iter().fold(0, |m, &i| m | 1 << i)
}

/// One value per nonempty subset of `{0..n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationFamily<T> {
    n: usize,
    values: Vec<T>,
}

impl<T> CorrelationFamily<T> {
    pub fn try_from_fn(n: usize, mut f: impl FnMut(&[usize]) -> Result<T>) -> Result<Self> {
        check_arity("correlation family", n, 1, MAX_PARTITION_ARITY)?;
        let values = (1..1usize << n)
            .map(|mask| f(&subset_of(mask)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, values })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(&[usize]) -> T) -> Result<Self> {
        Self::try_from_fn(n, |s| Ok(f(s)))
    }

    /// Builds a family from `(increasing subset, value)` pairs; every
    /// nonempty subset must be present.
    pub fn from_entries(n: usize, entries: impl IntoIterator<Item = (Vec<usize>, T)>) -> Result<Self> {
        check_arity("correlation family", n, 1, MAX_PARTITION_ARITY)?;
        let mut slots: Vec<Option<T>> = (1..1usize << n).map(|_| None).collect();
        for (subset, value) in entries {
            if subset.is_empty() || subset.windows(2).any(|w| w[0] >= w[1]) || subset.iter().any(|&i| i >= n) {
                return Err(Error::InvalidParameter(format!(
                    "{subset:?} is not a nonempty increasing subset of 0..{n}"
                )));
            }
            slots[mask_of(&subset) - 1] = Some(value);
        }
        let mut values = Vec::with_capacity(slots.len());
        for (i, v) in slots.into_iter().enumerate() {
            values.push(v.ok_or_else(|| Error::IncompleteFamily(subset_of(i + 1)))?);
        }
        Ok(Self { n, values })
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn get(&self, indices: &[usize]) -> Option<&T> {
        if indices.is_empty() || indices.iter().any(|&i| i >= self.n) {
            return None;
        }
        self.values.get(mask_of(indices) - 1)
    }

    fn at(&self, mask: usize) -> &T {
        &self.values[mask - 1]
    }

    /// Value on the whole index set.
    pub fn full(&self) -> &T {
        self.values.last().expect("families are nonempty")
    }

    /// `(subset, value)` pairs in increasing mask order.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, &T)> {
        self.values.iter().enumerate().map(|(i, v)| (subset_of(i + 1), v))
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> CorrelationFamily<U> {
        CorrelationFamily {
            n: self.n,
            values: self.values.iter().map(f).collect(),
        }
    }
}

/// Sum over blocks `B` of `S` containing `min S` of `block(B) * rest(S \ B)`,
/// with `rest(empty) = 1`.
fn block_sum<T: Scalar>(
    mask: usize,
    include_whole: bool,
    block: impl Fn(usize) -> T,
    rest: impl Fn(usize) -> T,
) -> T {
    let low = mask & mask.wrapping_neg();
    let others = mask ^ low;
    let mut acc = T::zero();
    let mut sub = others;
    loop {
        let b = low | sub;
        let r = mask ^ b;
        if r == 0 {
            if include_whole {
                acc = acc + block(b);
            }
        } else {
            acc = acc + block(b) * rest(r);
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & others;
    }
    acc
}

/// `W^T(S) = W(S) - sum over partitions of S into >= 2 blocks of prod W^T`.
pub fn truncated_from_full<T: Scalar>(fam: &CorrelationFamily<T>) -> CorrelationFamily<T> {
    let mut trunc: Vec<T> = Vec::with_capacity(fam.values.len());
    for mask in 1..1usize << fam.n {
        let lower = block_sum(mask, false, |b| trunc[b - 1].clone(), |r| fam.at(r).clone());
        trunc.push(fam.at(mask).clone() - lower);
    }
    CorrelationFamily {
        n: fam.n,
        values: trunc,
    }
}

/// `W(S) = sum over partitions of S of prod W^T(block)`.
pub fn full_from_truncated<T: Scalar>(trunc: &CorrelationFamily<T>) -> CorrelationFamily<T> {
    let mut full: Vec<T> = Vec::with_capacity(trunc.values.len());
    for mask in 1..1usize << trunc.n {
        let v = block_sum(mask, true, |b| trunc.at(b).clone(), |r| full[r - 1].clone());
        full.push(v);
    }
    CorrelationFamily {
        n: trunc.n,
        values: full,
    }
}

/// Cumulants `kappa(a_S)` for every subset `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulantTable<T>(CorrelationFamily<T>);

impl<T> CumulantTable<T> {
    pub fn new(family: CorrelationFamily<T>) -> Self {
        Self(family)
    }

    pub fn family(&self) -> &CorrelationFamily<T> {
        &self.0
    }

    pub fn get(&self, indices: &[usize]) -> Option<&T> {
        self.0.get(indices)
    }

    pub fn full(&self) -> &T {
        self.0.full()
    }
}

pub fn cumulants_from_moments<T: Scalar>(moments: &CorrelationFamily<T>) -> CumulantTable<T> {
    CumulantTable(truncated_from_full(moments))
}

pub fn moments_from_cumulants<T: Scalar>(table: &CumulantTable<T>) -> CorrelationFamily<T> {
    full_from_truncated(&table.0)
}

/// Limiting `l`-th cumulant of `N_{T, omega}(phi)`:
/// `delta_{omega,0} (2 pi)^{l-1} [int phi^l] sum_a dE n(E_a) K(E_a, E_a)^l`.
pub fn limit_cumulant(
    model: &SpectralModel,
    kernel: &ShellKernel,
    omega: FrequencyIndex,
    phi: &TestFunction,
    l: usize,
) -> Result<Complex64> {
    if l == 0 {
        return Err(Error::InvalidParameter("cumulant order must be at least 1".into()));
    }
    if kernel.grid() != model.grid() {
        return Err(Error::GridMismatch);
    }
    phi.validate()?;
    if omega.0 != 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let de = model.grid().width();
    let shell: Complex64 = model
        .density()
        .iter()
        .enumerate()
        .map(|(a, &n)| kernel.get(a, a).powu(l as u32) * (n * de))
        .sum();
    let time = product_integral(&vec![phi.clone(); l]).value;
    Ok(shell * TAU.powi(l as i32 - 1) * time)
}

/// Name of the shell amplitude in [`poisson_model`].
pub const POISSON_VECTOR: &str = "a_lambda";

/// Unit density with the amplitude `chi_[0, lambda]`, obtained from the
/// radial profile `(2 pi r)^{-1/2} chi(r <= sqrt(lambda))` with the
/// three-dimensional density of states.
pub fn poisson_model(lambda: f64, grid: EnergyGrid) -> Result<SpectralModel> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    if grid.e_min() != 0.0 {
        return Err(Error::InvalidGrid("the Poisson element needs e_min = 0".into()));
    }
    if grid.e_max() < lambda {
        return Err(Error::InvalidGrid(format!(
            "e_max = {} is below lambda = {lambda}",
            grid.e_max()
        )));
    }
    if grid.edge_index(lambda).is_none() {
        return Err(Error::Misaligned { value: lambda });
    }
    let root = lambda.sqrt();
    let v = radial_to_shell(POISSON_VECTOR, &grid, DensityOfStates::ThreeD, |r| {
        if r <= root {
            (TAU * r).powf(-0.5)
        } else {
            0.0
        }
    })?;
    make_model(grid, DensityProfile::flat(1.0, grid.bins())?, [v])
}

/// Limiting cumulants `kappa_1..kappa_{l_max}` of
/// `a_lambda = N_{T_lambda, omega}(phi_0)`.
pub fn poisson_cumulants(
    lambda: f64,
    l_max: usize,
    grid: EnergyGrid,
    omega: FrequencyIndex,
) -> Result<Vec<f64>> {
    if l_max == 0 {
        return Err(Error::InvalidParameter("need at least one cumulant".into()));
    }
    let model = poisson_model(lambda, grid)?;
    let kernel = model.rank_one(POISSON_VECTOR, POISSON_VECTOR)?;
    let phi = TestFunction::phi0();
    (1..=l_max)
        .map(|l| limit_cumulant(&model, &kernel, omega, &phi, l).map(|k| k.re))
        .collect()
}

/// Moments `m_1..m_{n_max}` of an element whose cumulants all equal `lambda`.
pub fn poisson_moments_of<T: Scalar>(lambda: T, n_max: usize) -> Result<Vec<T>> {
    check_arity("Poisson moments", n_max, 1, MAX_PARTITION_ARITY)?;
    let cumulants = CumulantTable(CorrelationFamily::from_fn(n_max, |_| lambda.clone())?);
    let moments = moments_from_cumulants(&cumulants);
    Ok((1..=n_max).map(|n| moments.at((1 << n) - 1).clone()).collect())
}

pub fn poisson_moments(lambda: f64, n_max: usize) -> Result<Vec<f64>> {
    poisson_moments_of(lambda, n_max)
}

/// Groups closer than this many combined widths trigger a warning.
pub const SEPARATION_WIDTHS: f64 = 10.0;

/// `omega(prod_i (a_i - omega(a_i)))` at each `eps`, where `a_i` is the
/// ordered product of group `i`'s symbols. The asymptotic value is zero for
/// groups with separated test functions.
///
/// Expectations of products are computed through the subset expansion
/// `sum_S prod_{i not in S} (-omega(a_i)) omega(prod_{i in S} a_i)`, all on
/// one prepared model.
pub fn independence_probe(
    model: &SpectralModel,
    groups: &[Vec<NumberSymbol>],
    epsilons: &[f64],
) -> Result<ConvergenceReport> {
    check_epsilons(epsilons)?;
    if groups.len() < 2 || groups.iter().any(Vec::is_empty) {
        return Err(Error::InvalidParameter(
            "need at least two nonempty groups".into(),
        ));
    }
    let separation = separation_warning(groups);
    let symbols: Vec<NumberSymbol> = groups.iter().flatten().cloned().collect();
    let mut slots = Vec::with_capacity(groups.len());
    let mut next = 0;
    for g in groups {
        slots.push((next..next + g.len()).collect::<Vec<_>>());
        next += g.len();
    }
    let rows = epsilons
        .par_iter()
        .map(|&eps| {
            let ev = SmearedEvaluator::new(model, &symbols, eps)?;
            let expect = |mask: usize| -> Result<Complex64> {
                let idx: Vec<usize> = subset_of(mask).iter().flat_map(|&i| slots[i].iter().copied()).collect();
                ev.restricted(&idx)?.correlation()
            };
            let means = (0..groups.len())
                .map(|i| expect(1 << i))
                .collect::<Result<Vec<_>>>()?;
            let mut value = Complex64::new(0.0, 0.0);
            for mask in 0..1usize << groups.len() {
                let mut term = if mask == 0 { Complex64::new(1.0, 0.0) } else { expect(mask)? };
                for (i, m) in means.iter().enumerate() {
                    if mask >> i & 1 == 0 {
                        term *= -m;
                    }
                }
                value += term;
            }
            let mut row = ConvergenceRow::new(eps, symbols.len(), value, Complex64::new(0.0, 0.0));
            row.warnings = ev.warnings().to_vec();
            row.warnings.extend(separation.clone());
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport { rows })
}

fn separation_warning(groups: &[Vec<NumberSymbol>]) -> Option<Warning> {
    let mut worst: Option<(f64, f64)> = None;
    for (i, gi) in groups.iter().enumerate() {
        for gj in &groups[i + 1..] {
            for a in gi {
                for b in gj {
                    let distance = (a.phi.center() - b.phi.center()).abs();
                    let required = SEPARATION_WIDTHS * (a.phi.time_width() + b.phi.time_width());
                    if distance < required && worst.map_or(true, |(d, r)| distance / required < d / r) {
                        worst = Some((distance, required));
                    }
                }
            }
        }
    }
    worst.map(|(distance, required)| Warning::Separation { distance, required })
}
