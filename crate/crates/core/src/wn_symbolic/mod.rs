//! Symbolic time-energy white noise.
//!
//! Expressions are formal sums of words in the generators `B+_{f,g}(E,t)`,
//! `B-_{f,g}(E,t)` and `N~_{f,g}(E,t)` with scalar coefficients built from
//! an integer, a power of `2 pi`, energy and time deltas, and shell inner
//! products `<f|P_E|g>`, `<f|P_E n|g>`. Energy variables are integrated;
//! time variables are free.
//!
//! Every term is kept in a canonical form: deltas are resolved by
//! substituting the smallest variable of each delta class, the remaining
//! deltas are stored as `(representative, member)` pairs, and like terms
//! are merged.

mod commutator;
mod order;
mod vacuum;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg};

use serde::{Deserialize, Serialize};

pub use commutator::{commutator, commutator_with};
pub use order::{anti_normal_order, normal_order, reorder, OrderKind, ReorderTrace, MAX_REWRITE_ROUNDS};
pub use vacuum::{
    evaluate_expression, evaluate_symbolic, number_operator, vacuum_expectation, EvaluatedExpectation,
    PartitionValue, ScalarMode, VacuumExpectation, VacuumSymbol, MAX_VACUUM_ARITY,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EnergyVar(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TimeVar(pub u32);

impl fmt::Display for EnergyVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E{}", self.0)
    }
}

impl fmt::Display for TimeVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Create,
    Gauge,
    Annihilate,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WnGenerator {
    pub kind: GeneratorKind,
    pub left: String,
    pub right: String,
    pub energy: EnergyVar,
    pub time: TimeVar,
}

impl WnGenerator {
    pub fn new(kind: GeneratorKind, left: &str, right: &str, energy: EnergyVar, time: TimeVar) -> Self {
        Self {
            kind,
            left: left.to_string(),
            right: right.to_string(),
            energy,
            time,
        }
    }

    pub fn create(left: &str, right: &str, energy: u32, time: u32) -> Self {
        Self::new(GeneratorKind::Create, left, right, EnergyVar(energy), TimeVar(time))
    }

    pub fn annihilate(left: &str, right: &str, energy: u32, time: u32) -> Self {
        Self::new(GeneratorKind::Annihilate, left, right, EnergyVar(energy), TimeVar(time))
    }

    pub fn gauge(left: &str, right: &str, energy: u32, time: u32) -> Self {
        Self::new(GeneratorKind::Gauge, left, right, EnergyVar(energy), TimeVar(time))
    }
}

impl fmt::Display for WnGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            GeneratorKind::Create => "B+",
            GeneratorKind::Gauge => "N~",
            GeneratorKind::Annihilate => "B-",
        };
        write!(f, "{name}[{},{}]({},{})", self.left, self.right, self.energy, self.time)
    }
}

/// Shell inner products at one energy.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Atom {
    /// `<left, P_E right>`.
    Ip { left: String, right: String, energy: EnergyVar },
    /// `<left, P_E n right>`.
    Ipn { left: String, right: String, energy: EnergyVar },
}

impl Atom {
    pub fn ip(left: &str, right: &str, energy: EnergyVar) -> Self {
        Atom::Ip {
            left: left.to_string(),
            right: right.to_string(),
            energy,
        }
    }

    pub fn ipn(left: &str, right: &str, energy: EnergyVar) -> Self {
        Atom::Ipn {
            left: left.to_string(),
            right: right.to_string(),
            energy,
        }
    }

    pub fn energy(&self) -> EnergyVar {
        match self {
            Atom::Ip { energy, .. } | Atom::Ipn { energy, .. } => *energy,
        }
    }

    fn energy_mut(&mut self) -> &mut EnergyVar {
        match self {
            Atom::Ip { energy, .. } | Atom::Ipn { energy, .. } => energy,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Ip { left, right, energy } => write!(f, "<{left}|P({energy})|{right}>"),
            Atom::Ipn { left, right, energy } => write!(f, "<{left}|P({energy})n|{right}>"),
        }
    }
}

/// Scalar part of a term apart from its integer factor.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Coefficient {
    pub two_pi: u32,
    /// `delta(0)` factors produced by closed delta loops.
    pub singular: u32,
    pub energy_deltas: Vec<(EnergyVar, EnergyVar)>,
    pub time_deltas: Vec<(TimeVar, TimeVar)>,
    pub atoms: Vec<Atom>,
}

impl Coefficient {
    fn mul(&self, other: &Coefficient) -> Coefficient {
        Coefficient {
            two_pi: self.two_pi + other.two_pi,
            singular: self.singular + other.singular,
            energy_deltas: [&self.energy_deltas[..], &other.energy_deltas[..]].concat(),
            time_deltas: [&self.time_deltas[..], &other.time_deltas[..]].concat(),
            atoms: [&self.atoms[..], &other.atoms[..]].concat(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WnTerm {
    pub factor: i64,
    pub coefficient: Coefficient,
    pub word: Vec<WnGenerator>,
}

impl WnTerm {
    pub fn scalar(factor: i64) -> Self {
        Self {
            factor,
            coefficient: Coefficient::default(),
            word: Vec::new(),
        }
    }

    pub fn generator(g: WnGenerator) -> Self {
        Self {
            factor: 1,
            coefficient: Coefficient::default(),
            word: vec![g],
        }
    }

    pub fn atom(a: Atom) -> Self {
        Self {
            factor: 1,
            coefficient: Coefficient {
                atoms: vec![a],
                ..Coefficient::default()
            },
            word: Vec::new(),
        }
    }

    pub fn is_scalar(&self) -> bool {
        self.word.is_empty()
    }

    fn mul(&self, other: &WnTerm) -> WnTerm {
        WnTerm {
            factor: self.factor * other.factor,
            coefficient: self.coefficient.mul(&other.coefficient),
            word: [&self.word[..], &other.word[..]].concat(),
        }
    }

    /// Resolves deltas by substitution and sorts the atoms.
    fn canonical(mut self) -> WnTerm {
        let mut loops = 0;
        let energy = resolve(&self.coefficient.energy_deltas, |v| v.0, EnergyVar, &mut loops);
        let time = resolve(&self.coefficient.time_deltas, |v| v.0, TimeVar, &mut loops);
        let e_rep = |v: EnergyVar| *energy.get(&v).unwrap_or(&v);
        let t_rep = |v: TimeVar| *time.get(&v).unwrap_or(&v);
        for a in &mut self.coefficient.atoms {
            let e = a.energy_mut();
            *e = e_rep(*e);
        }
        for g in &mut self.word {
            g.energy = e_rep(g.energy);
            g.time = t_rep(g.time);
        }
        self.coefficient.singular += loops;
        self.coefficient.energy_deltas = star_form(&energy);
        self.coefficient.time_deltas = star_form(&time);
        self.coefficient.atoms.sort();
        self
    }
}

/// Union-find over delta pairs; returns `member -> representative` with the
/// smallest id as representative, and counts pairs that close a loop.
fn resolve<V: Copy + Ord>(
    deltas: &[(V, V)],
    id: impl Fn(V) -> u32,
    make: impl Fn(u32) -> V,
    loops: &mut u32,
) -> BTreeMap<V, V> {
    let mut parent: BTreeMap<u32, u32> = BTreeMap::new();
    fn find(parent: &mut BTreeMap<u32, u32>, v: u32) -> u32 {
        let p = *parent.entry(v).or_insert(v);
        if p == v {
            return v;
        }
        let r = find(parent, p);
        parent.insert(v, r);
        r
    }
    for &(a, b) in deltas {
        let (ra, rb) = (find(&mut parent, id(a)), find(&mut parent, id(b)));
        if ra == rb {
            *loops += 1;
        } else {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            parent.insert(hi, lo);
        }
    }
    let keys: Vec<u32> = parent.keys().copied().collect();
    keys.into_iter()
        .map(|v| (make(v), make(find(&mut parent, v))))
        .collect()
}

fn star_form<V: Copy + Ord>(reps: &BTreeMap<V, V>) -> Vec<(V, V)> {
    let mut out: Vec<(V, V)> = reps
        .iter()
        .filter(|(v, r)| v != r)
        .map(|(&v, &r)| (r, v))
        .collect();
    out.sort();
    out
}

impl fmt::Display for WnTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.coefficient;
        write!(f, "{:+}", self.factor)?;
        if c.two_pi > 0 {
            write!(f, " (2pi)^{}", c.two_pi)?;
        }
        if c.singular > 0 {
            write!(f, " delta(0)^{}", c.singular)?;
        }
        for (a, b) in &c.time_deltas {
            write!(f, " d({b}-{a})")?;
        }
        for (a, b) in &c.energy_deltas {
            write!(f, " d({b}-{a})")?;
        }
        for a in &c.atoms {
            write!(f, " {a}")?;
        }
        for g in &self.word {
            write!(f, " {g}")?;
        }
        Ok(())
    }
}

/// Canonically ordered formal sum of terms with nonzero factors.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WnExpression {
    terms: Vec<WnTerm>,
}

impl WnExpression {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_terms([WnTerm::scalar(1)])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = WnTerm>) -> Self {
        let mut merged: BTreeMap<(Coefficient, Vec<WnGenerator>), i64> = BTreeMap::new();
        for t in terms {
            let t = t.canonical();
            *merged.entry((t.coefficient, t.word)).or_insert(0) += t.factor;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, f)| *f != 0)
            .map(|((coefficient, word), factor)| WnTerm {
                factor,
                coefficient,
                word,
            })
            .collect();
        Self { terms }
    }

    pub fn generator(g: WnGenerator) -> Self {
        Self::from_terms([WnTerm::generator(g)])
    }

    /// Product of generators in the given order.
    pub fn word(gens: impl IntoIterator<Item = WnGenerator>) -> Self {
        Self::from_terms([WnTerm {
            factor: 1,
            coefficient: Coefficient::default(),
            word: gens.into_iter().collect(),
        }])
    }

    pub fn terms(&self) -> &[WnTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest word length.
    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.word.len()).max().unwrap_or(0)
    }

    /// Distinct energy variables still carried by words or atoms.
    pub fn free_energies(&self) -> BTreeSet<EnergyVar> {
        self.terms
            .iter()
            .flat_map(|t| {
                t.coefficient
                    .atoms
                    .iter()
                    .map(Atom::energy)
                    .chain(t.word.iter().map(|g| g.energy))
            })
            .collect()
    }

    pub fn scale(&self, c: i64) -> Self {
        Self::from_terms(self.terms.iter().map(|t| WnTerm {
            factor: t.factor * c,
            ..t.clone()
        }))
    }
}

impl Add for &WnExpression {
    type Output = WnExpression;
    fn add(self, rhs: &WnExpression) -> WnExpression {
        WnExpression::from_terms(self.terms.iter().chain(&rhs.terms).cloned())
    }
}

impl Neg for &WnExpression {
    type Output = WnExpression;
    fn neg(self) -> WnExpression {
        self.scale(-1)
    }
}

impl Mul for &WnExpression {
    type Output = WnExpression;
    fn mul(self, rhs: &WnExpression) -> WnExpression {
        WnExpression::from_terms(
            self.terms
                .iter()
                .flat_map(|a| rhs.terms.iter().map(move |b| a.mul(b))),
        )
    }
}

impl fmt::Display for WnExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}
