//! Set partitions, pair diagrams of the Gaussian pairing expansion, and the
//! Stirling/Bell/Touchard numbers.
//!
//! Indices are zero-based throughout: a partition of an `n`-set covers
//! `0..n`, and a pair diagram is a permutation `sigma` of `0..n` where
//! `sigma[l] = j` pairs creator slot `l` with annihilator slot `j` in the
//! operator string `A+_0 A_0 A+_1 A_1 ... A+_{n-1} A_{n-1}`.

use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{check_arity, Error, Result};

pub const MAX_PARTITION_ARITY: usize = 12;
pub const MAX_DIAGRAM_ARITY: usize = 8;
pub const MAX_BELL_INDEX: usize = 20;
pub const MAX_STIRLING_INDEX: usize = 40;

/// A partition of `0..n` into nonempty blocks.
///
/// Blocks are stored in increasing order and sorted by their minimal
/// element, so two equal partitions compare equal structurally.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SetPartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    /// Builds a partition from arbitrary blocks, canonicalizing the order.
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::InvalidParameter("empty block in partition".into()));
            }
            for &i in b {
                if i >= n || seen[i] {
                    return Err(Error::InvalidParameter(format!(
                        "index {i} out of range or repeated in partition of {n}"
                    )));
                }
                seen[i] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidParameter(format!(
                "index {missing} not covered by partition"
            )));
        }
        blocks.sort_by_key(|b| b[0]);
        Ok(Self { n, blocks })
    }

    /// Partition from a restricted growth string (`labels[i]` is the block of `i`).
    fn from_labels(labels: &[usize]) -> Self {
        let count = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); count];
        for (i, &b) in labels.iter().enumerate() {
            blocks[b].push(i);
        }
        // Restricted growth strings already order blocks by minimum.
        Self {
            n: labels.len(),
            blocks,
        }
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Block bitmasks, handy for subset-indexed tables.
    pub fn block_masks(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks
            .iter()
            .map(|b| b.iter().fold(0usize, |m, &i| m | (1 << i)))
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inner = self
            .blocks
            .iter()
            .map(|b| format!("{{{}}}", b.iter().map(|i| i + 1).join(",")))
            .join("");
        write!(f, "{inner}")
    }
}

/// All set partitions of `0..n`, in restricted-growth-string order.
pub fn enumerate_set_partitions(n: usize) -> Result<Vec<SetPartition>> {
    check_arity("set partitions", n, 1, MAX_PARTITION_ARITY)?;
    let mut out = Vec::new();
    let mut labels = vec![0usize; n];
    grow(&mut labels, 1, 0, &mut out);
    Ok(out)
}

fn grow(labels: &mut [usize], pos: usize, max_label: usize, out: &mut Vec<SetPartition>) {
    if pos == labels.len() {
        out.push(SetPartition::from_labels(labels));
        return;
    }
    for b in 0..=max_label + 1 {
        labels[pos] = b;
        grow(labels, pos + 1, max_label.max(b), out);
    }
}

/// Stirling number of the second kind. Zero when `k > n`.
pub fn stirling2(n: usize, k: usize) -> Result<u128> {
    check_arity("stirling2", n, 0, MAX_STIRLING_INDEX)?;
    if k > n {
        return Ok(0);
    }
    // Row-by-row recurrence S(i, j) = j S(i-1, j) + S(i-1, j-1).
    let mut row = vec![0u128; n + 1];
    row[0] = 1;
    for i in 1..=n {
        for j in (1..=i).rev() {
            row[j] = (j as u128) * row[j] + row[j - 1];
        }
        row[0] = 0;
    }
    Ok(row[k])
}

/// Bell number via the Bell triangle.
pub fn bell(n: usize) -> Result<u128> {
    check_arity("bell", n, 0, MAX_BELL_INDEX)?;
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for &x in &row {
            let prev = *next.last().unwrap();
            next.push(prev + x);
        }
        row = next;
    }
    Ok(row[0])
}

/// Touchard polynomial `sum_k S(n, k) lambda^k`.
pub fn touchard(n: usize, lambda: f64) -> Result<f64> {
    check_arity("touchard", n, 1, MAX_STIRLING_INDEX)?;
    let mut acc = 0.0;
    for k in (1..=n).rev() {
        // Horner in lambda, lowest power is lambda^1.
        acc = (acc + stirling2(n, k)? as f64) * lambda;
    }
    Ok(acc)
}

/// A pairing of creator slots with annihilator slots, stored as a permutation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairDiagram {
    sigma: Vec<usize>,
}

impl PairDiagram {
    pub fn new(sigma: Vec<usize>) -> Result<Self> {
        let n = sigma.len();
        let mut hit = vec![false; n];
        for &j in &sigma {
            if j >= n || hit[j] {
                return Err(Error::InvalidParameter(format!(
                    "{sigma:?} is not a permutation"
                )));
            }
            hit[j] = true;
        }
        Ok(Self { sigma })
    }

    pub fn arity(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    /// Annihilator slot paired with creator `l`.
    pub fn partner(&self, l: usize) -> usize {
        self.sigma[l]
    }

    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.sigma.len()];
        for (l, &j) in self.sigma.iter().enumerate() {
            inv[j] = l;
        }
        inv
    }

    /// Number of creator-first pairs, `#{l : l <= sigma(l)}`.
    pub fn k(&self) -> usize {
        self.sigma
            .iter()
            .enumerate()
            .filter(|(l, &j)| *l <= j)
            .count()
    }

    /// Whether the pair `(l, sigma(l))` appears creator-first in the string.
    pub fn is_creator_first(&self, l: usize) -> bool {
        l <= self.sigma[l]
    }

    /// Cycles of `sigma`, each listed in increasing order, sorted by minimum.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.sigma.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut l = start;
            while !seen[l] {
                seen[l] = true;
                cycle.push(l);
                l = self.sigma[l];
            }
            cycle.sort_unstable();
            out.push(cycle);
        }
        out
    }

    /// Restriction of the diagram to a component (a union of cycles),
    /// relabelled onto `0..component.len()` preserving order.
    pub fn restrict(&self, component: &[usize]) -> Result<PairDiagram> {
        let pos = |x: usize| component.iter().position(|&c| c == x);
        let sigma = component
            .iter()
            .map(|&l| {
                pos(self.sigma[l]).ok_or_else(|| {
                    Error::InvalidParameter(format!("{component:?} is not closed under sigma"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PairDiagram::new(sigma)
    }
}

impl fmt::Display for PairDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let maps = self
            .sigma
            .iter()
            .enumerate()
            .map(|(l, j)| format!("{}->{}", l + 1, j + 1))
            .join(" ");
        write!(f, "[{maps}]")
    }
}

/// Reducibility classification of a diagram.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub irreducible: bool,
    pub components: Vec<Vec<usize>>,
}

/// All `n!` pair diagrams in lexicographic order of `sigma`.
pub fn enumerate_pair_diagrams(n: usize) -> Result<Vec<PairDiagram>> {
    check_arity("pair diagrams", n, 1, MAX_DIAGRAM_ARITY)?;
    Ok((0..n)
        .permutations(n)
        .map(|sigma| PairDiagram { sigma })
        .collect())
}

pub fn classify(d: &PairDiagram) -> Classification {
    let components = d.cycles();
    Classification {
        irreducible: components.len() == 1,
        components,
    }
}

/// Reducibility by the closure condition: a proper nonempty `I` with
/// `l in I <=> sigma(l) in I`. Exponential in `n`; used to cross-check
/// the cycle criterion.
pub fn has_closed_proper_subset(d: &PairDiagram) -> bool {
    let n = d.arity();
    let full = (1usize << n) - 1;
    (1..full).any(|mask| {
        (0..n).all(|l| ((mask >> l) & 1) == ((mask >> d.sigma[l]) & 1))
    })
}

/// The single irreducible diagram with one creator-first pair: creator 0
/// with annihilator `n-1`, and creator `l` with annihilator `l-1`.
pub fn surviving_diagram(n: usize) -> Result<PairDiagram> {
    check_arity("surviving diagram", n, 1, usize::MAX)?;
    let sigma = (0..n).map(|l| if l == 0 { n - 1 } else { l - 1 }).collect();
    Ok(PairDiagram { sigma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    /// Brute force: every map `0..n -> 0..n`, collapsed to its kernel partition.
    fn partitions_by_functions(n: usize) -> BTreeSet<SetPartition> {
        let mut out = BTreeSet::new();
        let total = n.pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let mut buckets = vec![Vec::new(); n];
            for i in 0..n {
                buckets[c % n].push(i);
                c /= n;
            }
            let blocks = buckets.into_iter().filter(|b| !b.is_empty()).collect();
            out.insert(SetPartition::new(n, blocks).unwrap());
        }
        out
    }

    #[test]
    fn partition_counts_match_brute_force() {
        assert_eq!(
            enumerate_set_partitions(1).unwrap(),
            vec![SetPartition::new(1, vec![vec![0]]).unwrap()]
        );
        for n in 1..=6 {
            let fast: BTreeSet<_> = enumerate_set_partitions(n).unwrap().into_iter().collect();
            let slow = partitions_by_functions(n);
            assert_eq!(fast, slow, "n={n}");
        }
        assert_eq!(enumerate_set_partitions(3).unwrap().len(), 5);
        assert_eq!(enumerate_set_partitions(4).unwrap().len(), 15);
    }

    #[test]
    fn partition_arity_bounds() {
        assert!(enumerate_set_partitions(0).is_err());
        assert!(enumerate_set_partitions(13).is_err());
        assert_eq!(enumerate_set_partitions(12).unwrap().len() as u128, bell(12).unwrap());
    }

    #[test]
    fn stirling_values() {
        for n in 0..=10 {
            assert_eq!(stirling2(n, n).unwrap(), 1);
        }
        assert_eq!(stirling2(4, 2).unwrap(), 7);
        assert_eq!(stirling2(3, 2).unwrap(), 3);
        assert_eq!(stirling2(3, 5).unwrap(), 0);
        assert!(stirling2(41, 2).is_err());
        for n in 1..=7 {
            let parts = enumerate_set_partitions(n).unwrap();
            for k in 0..=n {
                let count = parts.iter().filter(|p| p.len() == k).count() as u128;
                assert_eq!(stirling2(n, k).unwrap(), count, "S({n},{k})");
            }
        }
    }

    #[test]
    fn bell_values() {
        assert_eq!(bell(0).unwrap(), 1);
        assert_eq!(bell(1).unwrap(), 1);
        assert_eq!(bell(3).unwrap(), 5);
        assert_eq!(bell(6).unwrap(), 203);
        assert_eq!(bell(6).unwrap(), enumerate_set_partitions(6).unwrap().len() as u128);
        assert_eq!(bell(20).unwrap(), 51_724_158_235_372);
        assert!(bell(21).is_err());
        for n in 0..=12 {
            let sum: u128 = (0..=n).map(|k| stirling2(n, k).unwrap()).sum();
            assert_eq!(bell(n).unwrap(), sum);
        }
    }

    #[test]
    fn touchard_values() {
        assert_eq!(touchard(1, 0.37).unwrap(), 0.37);
        for n in 1..=10 {
            assert_eq!(touchard(n, 1.0).unwrap(), bell(n).unwrap() as f64);
        }
        assert_eq!(touchard(3, 2.0).unwrap(), 22.0);
        assert!(touchard(0, 1.0).is_err());
    }

    #[test]
    fn small_diagram_census() {
        let d1 = enumerate_pair_diagrams(1).unwrap();
        assert_eq!(d1.len(), 1);
        assert_eq!(d1[0].sigma(), &[0]);

        let d2 = enumerate_pair_diagrams(2).unwrap();
        let irreducible: Vec<_> = d2.iter().filter(|d| classify(d).irreducible).collect();
        assert_eq!(d2.len(), 2);
        assert_eq!(irreducible.len(), 1);
        assert_eq!(irreducible[0].sigma(), &[1, 0]);

        let d3 = enumerate_pair_diagrams(3).unwrap();
        assert_eq!(d3.len(), 6);
        assert_eq!(d3.iter().filter(|d| classify(d).irreducible).count(), 2);
        assert!(enumerate_pair_diagrams(9).is_err());
        assert!(enumerate_pair_diagrams(0).is_err());
    }

    #[test]
    fn classification_examples() {
        let id = PairDiagram::new(vec![0, 1]).unwrap();
        let c = classify(&id);
        assert!(!c.irreducible);
        assert_eq!(c.components, vec![vec![0], vec![1]]);

        let swap = PairDiagram::new(vec![1, 0]).unwrap();
        assert!(classify(&swap).irreducible);

        let two = PairDiagram::new(vec![1, 0, 3, 2]).unwrap();
        let c = classify(&two);
        assert!(!c.irreducible);
        assert_eq!(c.components, vec![vec![0, 1], vec![2, 3]]);
        assert!(has_closed_proper_subset(&two));
        // the closure witness {0, 1}
        assert!((0..4).all(|l| (l < 2) == (two.partner(l) < 2)));
    }

    #[test]
    fn cycle_and_closure_criteria_agree() {
        for n in 1..=6 {
            for d in enumerate_pair_diagrams(n).unwrap() {
                assert_eq!(classify(&d).irreducible, !has_closed_proper_subset(&d), "{d}");
            }
        }
    }

    #[test]
    fn irreducible_count_is_factorial() {
        for n in 1..=6 {
            let count = enumerate_pair_diagrams(n)
                .unwrap()
                .iter()
                .filter(|d| classify(d).irreducible)
                .count();
            let fact: usize = (1..n).product();
            assert_eq!(count, fact, "n={n}");
        }
    }

    #[test]
    fn reducible_components_are_irreducible() {
        for n in 2..=6 {
            for d in enumerate_pair_diagrams(n).unwrap() {
                let c = classify(&d);
                if c.irreducible {
                    continue;
                }
                for comp in &c.components {
                    let sub = d.restrict(comp).unwrap();
                    assert!(classify(&sub).irreducible);
                }
            }
        }
    }

    #[test]
    fn surviving_diagram_shape() {
        assert_eq!(surviving_diagram(1).unwrap().sigma(), &[0]);
        assert_eq!(surviving_diagram(1).unwrap().k(), 1);
        assert_eq!(surviving_diagram(2).unwrap().sigma(), &[1, 0]);
        let d3 = surviving_diagram(3).unwrap();
        assert_eq!(d3.sigma(), &[2, 0, 1]);
        assert_eq!(d3.k(), 1);
        for n in 1..=6 {
            let s = surviving_diagram(n).unwrap();
            let unique: Vec<_> = enumerate_pair_diagrams(n)
                .unwrap()
                .into_iter()
                .filter(|d| d.k() == 1 && classify(d).irreducible)
                .collect();
            assert_eq!(unique, vec![s]);
        }
    }

    #[test]
    fn rejects_non_permutations() {
        assert!(PairDiagram::new(vec![0, 0]).is_err());
        assert!(PairDiagram::new(vec![2, 0]).is_err());
        assert!(SetPartition::new(3, vec![vec![0, 1]]).is_err());
        assert!(SetPartition::new(2, vec![vec![0], vec![], vec![1]]).is_err());
    }
}
