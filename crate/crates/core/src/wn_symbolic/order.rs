use std::cmp::Ordering;

use super::commutator::commutator;
use super::{GeneratorKind, WnExpression, WnGenerator, WnTerm};
use crate::error::{Error, Result};

/// Guard on the number of rewrite rounds.
pub const MAX_REWRITE_ROUNDS: usize = 10_000;

/// Target order of a rewrite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderKind {
    /// Creators, then gauges, then annihilators.
    Normal,
    /// Annihilators, then gauges, then creators.
    AntiNormal,
}

impl OrderKind {
    fn rank(self, k: GeneratorKind) -> u8 {
        let r = match k {
            GeneratorKind::Create => 0,
            GeneratorKind::Gauge => 1,
            GeneratorKind::Annihilate => 2,
        };
        match self {
            OrderKind::Normal => r,
            OrderKind::AntiNormal => 2 - r,
        }
    }

    /// Total order on generators: kind rank first, then labels and variables.
    fn cmp(self, a: &WnGenerator, b: &WnGenerator) -> Ordering {
        self.rank(a.kind)
            .cmp(&self.rank(b.kind))
            .then_with(|| (&a.left, &a.right, a.energy, a.time).cmp(&(&b.left, &b.right, b.energy, b.time)))
    }
}

/// Snapshot of the expression after each rewrite round.
#[derive(Debug, Clone, Default)]
pub struct ReorderTrace {
    pub rounds: Vec<WnExpression>,
}

/// A word with a creator or gauge on the left, or an annihilator or gauge on
/// the right, has zero vacuum expectation.
pub(crate) fn vacuum_null(word: &[WnGenerator]) -> bool {
    match (word.first(), word.last()) {
        (Some(first), Some(last)) => {
            matches!(first.kind, GeneratorKind::Create | GeneratorKind::Gauge)
                || matches!(last.kind, GeneratorKind::Annihilate | GeneratorKind::Gauge)
        }
        _ => false,
    }
}

/// Rewrites every word into the target order using `xy = yx + [x, y]` on
/// the first inverted adjacent pair. Each step either lowers the number of
/// inversions or shortens the word, so the process terminates. With
/// `drop_vacuum_null`, terms with vanishing vacuum expectation are removed
/// as soon as they appear.
pub fn reorder(
    expr: &WnExpression,
    order: OrderKind,
    drop_vacuum_null: bool,
    mut trace: Option<&mut ReorderTrace>,
) -> Result<WnExpression> {
    let keep = |t: &WnTerm| !(drop_vacuum_null && vacuum_null(&t.word));
    let mut current = WnExpression::from_terms(expr.terms().iter().filter(|t| keep(t)).cloned());
    for _ in 0..MAX_REWRITE_ROUNDS {
        if let Some(tr) = trace.as_deref_mut() {
            tr.rounds.push(current.clone());
        }
        let mut changed = false;
        let mut next = Vec::with_capacity(current.len());
        for t in current.terms() {
            let pos = t
                .word
                .windows(2)
                .position(|w| order.cmp(&w[0], &w[1]) == Ordering::Greater);
            let Some(i) = pos else {
                next.push(t.clone());
                continue;
            };
            changed = true;
            let mut swapped = t.clone();
            swapped.word.swap(i, i + 1);
            next.push(swapped);
            for c in commutator(&t.word[i], &t.word[i + 1]).terms() {
                let mut word = t.word[..i].to_vec();
                word.extend(c.word.iter().cloned());
                word.extend(t.word[i + 2..].iter().cloned());
                next.push(WnTerm {
                    factor: t.factor * c.factor,
                    coefficient: t.coefficient.mul(&c.coefficient),
                    word,
                });
            }
        }
        if !changed {
            return Ok(current);
        }
        current = WnExpression::from_terms(next.into_iter().filter(|t| keep(t)));
    }
    Err(Error::NonTermination(MAX_REWRITE_ROUNDS))
}

pub fn normal_order(expr: &WnExpression) -> Result<WnExpression> {
    reorder(expr, OrderKind::Normal, false, None)
}

pub fn anti_normal_order(expr: &WnExpression) -> Result<WnExpression> {
    reorder(expr, OrderKind::AntiNormal, false, None)
}
