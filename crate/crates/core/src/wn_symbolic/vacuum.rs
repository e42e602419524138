use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::order::{reorder, vacuum_null, OrderKind, ReorderTrace};
use super::{Atom, EnergyVar, GeneratorKind, TimeVar, WnExpression, WnGenerator, WnTerm};
use crate::error::{check_arity, Error, Result};
use crate::partitions::SetPartition;
use crate::spectral::SpectralModel;
use crate::test_function::{product_integral, TestFunction};

pub const MAX_VACUUM_ARITY: usize = 5;

/// Whether each number operator carries its scalar part `<g, P_E n f>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarMode {
    /// `N_{f,g}(t) = int dE [N~_{f,g} + B-_{g,f} + B+_{f,g}] + int dE <g,P_E n f>`.
    Augmented,
    /// `N_{f,g}(t) = int dE [N~_{f,g} + B-_{g,f} + B+_{f,g}]`; only the
    /// fully connected contractions survive.
    Bare,
}

/// Number operator `N_{f,g}` in slot `l`, at time `t_l`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VacuumSymbol {
    pub f: String,
    pub g: String,
}

impl VacuumSymbol {
    pub fn new(f: impl Into<String>, g: impl Into<String>) -> Self {
        Self { f: f.into(), g: g.into() }
    }
}

/// Slot `l` uses energy variable `2l` for its generators, `2l + 1` for its
/// scalar part, and time variable `l`.
pub fn number_operator(sym: &VacuumSymbol, slot: u32, mode: ScalarMode) -> WnExpression {
    let (e, t) = (EnergyVar(2 * slot), TimeVar(slot));
    let mut terms = vec![
        WnTerm::generator(WnGenerator::new(GeneratorKind::Gauge, &sym.f, &sym.g, e, t)),
        WnTerm::generator(WnGenerator::new(GeneratorKind::Annihilate, &sym.g, &sym.f, e, t)),
        WnTerm::generator(WnGenerator::new(GeneratorKind::Create, &sym.f, &sym.g, e, t)),
    ];
    if mode == ScalarMode::Augmented {
        terms.push(WnTerm::atom(Atom::ipn(&sym.g, &sym.f, EnergyVar(2 * slot + 1))));
    }
    WnExpression::from_terms(terms)
}

/// Vacuum expectation `<Omega, N_1(t_1) ... N_k(t_k) Omega>` as a scalar
/// expression, grouped by the partition of the slots induced by its time
/// deltas.
#[derive(Debug, Clone, PartialEq)]
pub struct VacuumExpectation {
    pub k: usize,
    pub mode: ScalarMode,
    pub expression: WnExpression,
}

impl VacuumExpectation {
    fn time_partition(&self, t: &WnTerm) -> SetPartition {
        let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        let rep: BTreeMap<u32, u32> = t.coefficient.time_deltas.iter().map(|(r, m)| (m.0, r.0)).collect();
        for l in 0..self.k as u32 {
            groups.entry(*rep.get(&l).unwrap_or(&l)).or_default().push(l as usize);
        }
        SetPartition::new(self.k, groups.into_values().collect()).expect("slots cover 0..k")
    }

    /// Terms grouped by time partition, partitions in canonical order.
    pub fn by_partition(&self) -> Vec<(SetPartition, WnExpression)> {
        let mut map: BTreeMap<Vec<Vec<usize>>, (SetPartition, Vec<WnTerm>)> = BTreeMap::new();
        for t in self.expression.terms() {
            let p = self.time_partition(t);
            map.entry(p.blocks().to_vec())
                .or_insert_with(|| (p, Vec::new()))
                .1
                .push(t.clone());
        }
        map.into_values()
            .map(|(p, ts)| (p, WnExpression::from_terms(ts)))
            .collect()
    }

    /// Terms whose time deltas link all slots.
    pub fn connected(&self) -> WnExpression {
        WnExpression::from_terms(
            self.expression
                .terms()
                .iter()
                .filter(|t| self.time_partition(t).len() == 1)
                .cloned(),
        )
    }
}

pub fn vacuum_expectation(
    symbols: &[VacuumSymbol],
    mode: ScalarMode,
    trace: Option<&mut ReorderTrace>,
) -> Result<VacuumExpectation> {
    check_arity("vacuum expectation", symbols.len(), 1, MAX_VACUUM_ARITY)?;
    let mut product = WnExpression::one();
    for (l, s) in symbols.iter().enumerate() {
        product = &product * &number_operator(s, l as u32, mode);
        // Words with a creator or gauge in front stay vacuum-null after
        // multiplying further factors on the right.
        product = WnExpression::from_terms(product.terms().iter().filter(|t| {
            !matches!(t.word.first().map(|g| g.kind), Some(GeneratorKind::Create | GeneratorKind::Gauge))
        }).cloned());
    }
    let reduced = reorder(&product, OrderKind::Normal, true, trace)?;
    let expression = WnExpression::from_terms(
        reduced.terms().iter().filter(|t| t.is_scalar() && !vacuum_null(&t.word)).cloned(),
    );
    Ok(VacuumExpectation {
        k: symbols.len(),
        mode,
        expression,
    })
}

fn atom_value(model: &SpectralModel, atom: &Atom, a: usize) -> Result<Complex64> {
    Ok(match atom {
        Atom::Ip { left, right, .. } => {
            model.vector(left)?.values()[a].conj() * model.vector(right)?.values()[a]
        }
        Atom::Ipn { left, right, .. } => {
            model.vector(left)?.values()[a].conj() * model.vector(right)?.values()[a] * model.density()[a]
        }
    })
}

fn term_value(model: &SpectralModel, t: &WnTerm) -> Result<Complex64> {
    if !t.is_scalar() {
        return Err(Error::InvalidParameter(format!("term `{t}` still contains operators")));
    }
    if t.coefficient.singular > 0 {
        return Err(Error::Singular(t.to_string()));
    }
    let mut classes: BTreeMap<EnergyVar, Vec<&Atom>> = BTreeMap::new();
    for &(rep, _) in &t.coefficient.energy_deltas {
        classes.entry(rep).or_default();
    }
    for atom in &t.coefficient.atoms {
        classes.entry(atom.energy()).or_default().push(atom);
    }
    let de = model.grid().width();
    let mut value = Complex64::new(t.factor as f64 * TAU.powi(t.coefficient.two_pi as i32), 0.0);
    for (var, atoms) in classes {
        if atoms.is_empty() {
            return Err(Error::Singular(format!("integral over {var} has no shell factor")));
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for a in 0..model.grid().bins() {
            let mut p = Complex64::new(de, 0.0);
            for atom in &atoms {
                p *= atom_value(model, atom, a)?;
            }
            sum += p;
        }
        value *= sum;
    }
    Ok(value)
}

/// Numeric value of a scalar expression; every energy class becomes a bin sum.
pub fn evaluate_expression(expr: &WnExpression, model: &SpectralModel) -> Result<Complex64> {
    expr.terms().iter().map(|t| term_value(model, t)).sum()
}

/// Value of the terms with one time-delta pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionValue {
    pub partition: SetPartition,
    /// Number of time deltas, `k - blocks`.
    pub delta_order: usize,
    /// Includes the `(2 pi)^delta_order` factor.
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluatedExpectation {
    pub k: usize,
    pub entries: Vec<PartitionValue>,
}

impl EvaluatedExpectation {
    pub fn get(&self, partition: &SetPartition) -> Option<&PartitionValue> {
        self.entries.iter().find(|e| &e.partition == partition)
    }

    /// Connected coefficient with the `(2 pi)^{k-1}` stripped, comparable to
    /// the limit trace coefficient.
    pub fn connected(&self) -> Complex64 {
        self.entries
            .iter()
            .find(|e| e.partition.len() == 1)
            .map_or(Complex64::new(0.0, 0.0), |e| e.value / TAU.powi(e.delta_order as i32))
    }

    /// Value smeared against one test function per slot: each block's time
    /// deltas collapse to `int prod_{l in B} phi_l`.
    pub fn smeared(&self, phis: &[TestFunction]) -> Result<Complex64> {
        if phis.len() != self.k {
            return Err(Error::InvalidParameter(format!(
                "{} test functions for {} slots",
                phis.len(),
                self.k
            )));
        }
        let mut total = Complex64::new(0.0, 0.0);
        for e in &self.entries {
            let mut v = e.value;
            for b in e.partition.blocks() {
                let block: Vec<_> = b.iter().map(|&l| phis[l].clone()).collect();
                v *= product_integral(&block).value;
            }
            total += v;
        }
        Ok(total)
    }
}

pub fn evaluate_symbolic(result: &VacuumExpectation, model: &SpectralModel) -> Result<EvaluatedExpectation> {
    let entries = result
        .by_partition()
        .into_iter()
        .map(|(partition, expr)| {
            Ok(PartitionValue {
                delta_order: result.k - partition.len(),
                value: evaluate_expression(&expr, model)?,
                partition,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvaluatedExpectation { k: result.k, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{
        limit_truncated_coefficient, limit_truncated_smeared, make_model, DensityProfile, EnergyGrid,
        FrequencyIndex, ShellAmplitude,
    };
    use crate::statistics::{full_from_truncated, CorrelationFamily};
    use crate::symbol::NumberSymbol;

    fn syms(pairs: &[(&str, &str)]) -> Vec<VacuumSymbol> {
        pairs.iter().map(|(f, g)| VacuumSymbol::new(*f, *g)).collect()
    }

    fn model() -> SpectralModel {
        let grid = EnergyGrid::new(0.0, 4.0, 64).unwrap();
        let shell = |name: &str, c: f64, w: f64, phase: f64| {
            ShellAmplitude::from_fn(name, &grid, |e| {
                Complex64::from_polar((-(e - c).powi(2) / (2.0 * w * w)).exp(), phase * e)
            })
            .unwrap()
        };
        let density = (0..64).map(|a| 0.5 + (a as f64 / 20.0).cos().abs()).collect();
        make_model(
            grid,
            DensityProfile::new(density).unwrap(),
            [shell("f", 1.0, 0.4, 0.3), shell("g", 1.4, 0.5, -0.7), shell("h", 1.2, 0.3, 1.1)],
        )
        .unwrap()
    }

    #[test]
    fn single_operator_is_its_scalar() {
        let r = vacuum_expectation(&syms(&[("f", "g")]), ScalarMode::Augmented, None).unwrap();
        assert_eq!(r.expression.len(), 1);
        assert_eq!(r.expression.terms()[0].coefficient.atoms, vec![Atom::ipn("g", "f", EnergyVar(1))]);
        let m = model();
        let v = evaluate_symbolic(&r, &m).unwrap();
        let tr = m.state_expectation(&m.rank_one("f", "g").unwrap()).unwrap();
        assert!((v.connected() - tr).norm() <= 1e-12);
        let bare = vacuum_expectation(&syms(&[("f", "g")]), ScalarMode::Bare, None).unwrap();
        assert!(bare.expression.is_empty());
    }

    #[test]
    fn connected_structure() {
        let labels = [("f", "g"), ("g", "h"), ("h", "f"), ("f", "f"), ("g", "g")];
        for k in 2..=5 {
            let r = vacuum_expectation(&syms(&labels[..k]), ScalarMode::Bare, None).unwrap();
            let conn = r.connected();
            assert_eq!(conn.len(), 1, "k={k}");
            let t = &conn.terms()[0];
            assert_eq!(t.factor, 1);
            assert_eq!(t.coefficient.two_pi as usize, k - 1);
            assert_eq!(t.coefficient.time_deltas.len(), k - 1);
            assert_eq!(t.coefficient.atoms.len(), k);
        }
    }

    #[test]
    fn three_point_atom_pattern() {
        let r = vacuum_expectation(&syms(&[("f1", "g1"), ("f2", "g2"), ("f3", "g3")]), ScalarMode::Bare, None).unwrap();
        let conn = r.connected();
        let e0 = EnergyVar(0);
        assert_eq!(
            conn.terms()[0].coefficient.atoms,
            vec![Atom::ip("g1", "f2", e0), Atom::ip("g2", "f3", e0), Atom::ipn("g3", "f1", e0)]
        );
    }

    #[test]
    fn connected_matches_limit_coefficient() {
        let m = model();
        let labels = [("f", "g"), ("g", "h"), ("h", "f"), ("f", "h")];
        for k in 1..=4 {
            let s = syms(&labels[..k]);
            let r = vacuum_expectation(&s, ScalarMode::Augmented, None).unwrap();
            let v = evaluate_symbolic(&r, &m).unwrap();
            let kernels: Vec<_> = s.iter().map(|x| m.rank_one(&x.f, &x.g).unwrap()).collect();
            let c = limit_truncated_coefficient(&m, &kernels, &vec![FrequencyIndex(0); k]).unwrap();
            assert!((v.connected() - c.value).norm() <= 1e-10 * c.value.norm(), "k={k}");
        }
    }

    #[test]
    fn full_expectation_reconstructs_from_truncated_limits() {
        let m = model();
        let labels = [("f", "g"), ("g", "h"), ("h", "f"), ("f", "h")];
        let phis = [
            TestFunction::unit_gaussian(0.0, 0.5).unwrap(),
            TestFunction::unit_gaussian(0.3, 0.7).unwrap(),
            TestFunction::unit_gaussian(-0.2, 0.4).unwrap(),
            TestFunction::unit_gaussian(0.1, 0.6).unwrap(),
        ];
        for k in 1..=4 {
            let s = syms(&labels[..k]);
            let r = vacuum_expectation(&s, ScalarMode::Augmented, None).unwrap();
            let symbolic = evaluate_symbolic(&r, &m).unwrap().smeared(&phis[..k]).unwrap();
            let numbers: Vec<_> = (0..k)
                .map(|l| NumberSymbol::new(labels[l].0, labels[l].1, 0, phis[l].clone()))
                .collect();
            let trunc = CorrelationFamily::try_from_fn(k, |subset| {
                let sub: Vec<_> = subset.iter().map(|&i| numbers[i].clone()).collect();
                limit_truncated_smeared(&m, &sub)
            })
            .unwrap();
            let full = *full_from_truncated(&trunc).full();
            assert!((symbolic - full).norm() <= 1e-9 * full.norm(), "k={k}: {symbolic} vs {full}");
        }
    }

    #[test]
    fn pruned_reduction_matches_full_normal_order() {
        let s = syms(&[("f", "g"), ("g", "h"), ("h", "f")]);
        let mut product = WnExpression::one();
        for (l, x) in s.iter().enumerate() {
            product = &product * &number_operator(x, l as u32, ScalarMode::Augmented);
        }
        let no = super::super::normal_order(&product).unwrap();
        let scalars = WnExpression::from_terms(no.terms().iter().filter(|t| t.is_scalar()).cloned());
        let r = vacuum_expectation(&s, ScalarMode::Augmented, None).unwrap();
        assert_eq!(scalars, r.expression);
    }

    #[test]
    fn evaluation_edge_cases() {
        let m = model();
        assert_eq!(evaluate_expression(&WnExpression::zero(), &m).unwrap(), Complex64::new(0.0, 0.0));
        let op = WnExpression::generator(WnGenerator::create("f", "g", 0, 0));
        assert!(evaluate_expression(&op, &m).is_err());
        let unknown = WnExpression::from_terms([WnTerm::atom(Atom::ip("f", "zz", EnergyVar(0)))]);
        assert_eq!(evaluate_expression(&unknown, &m), Err(Error::UnknownVector("zz".into())));
        assert!(vacuum_expectation(&syms(&[("f", "g"); 6]), ScalarMode::Bare, None).is_err());
    }
}
