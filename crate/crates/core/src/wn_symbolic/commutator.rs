use super::{Atom, Coefficient, GeneratorKind, WnExpression, WnGenerator, WnTerm};

use GeneratorKind::{Annihilate, Create, Gauge};

/// `2 pi delta(t' - t) delta(E' - E)` times the given atoms and word.
fn contraction(a: &WnGenerator, b: &WnGenerator, factor: i64, atoms: Vec<Atom>, word: Vec<WnGenerator>) -> WnTerm {
    WnTerm {
        factor,
        coefficient: Coefficient {
            two_pi: 1,
            energy_deltas: vec![(a.energy, b.energy)],
            time_deltas: vec![(a.time, b.time)],
            atoms,
            ..Coefficient::default()
        },
        word,
    }
}

fn relabel(g: &WnGenerator, left: &str, right: &str) -> WnGenerator {
    WnGenerator::new(g.kind, left, right, g.energy, g.time)
}

/// `[a, b]`.
///
/// * `[B-_{f,g}(E,t), B+_{f',g'}(E',t')] = 2pi dd <f,P_E f'> <g',P_E n g>`
/// * `[B-_{f,g}(E,t), N~_{f',g'}(E',t')] = 2pi dd <f,P_E f'> B-_{g',g}(E,t)`
/// * `[N~_{a,b}(E',t'), B+_{f,g}(E,t)] = 2pi dd <b,P_E f> B+_{a,g}(E,t)`
/// * `[N~_{f,g}(E,t), N~_{f',g'}(E',t')] = 2pi dd (<g,P_E f'> N~_{f,g'}(E,t) - <g',P_E f> N~_{f',g}(E,t))`
///
/// with `dd = delta(t' - t) delta(E' - E)`; the remaining orders follow by
/// antisymmetry and like-kind `B` generators commute.
pub fn commutator(a: &WnGenerator, b: &WnGenerator) -> WnExpression {
    let terms = match (a.kind, b.kind) {
        (Annihilate, Create) => vec![contraction(
            a,
            b,
            1,
            vec![
                Atom::ip(&a.left, &b.left, a.energy),
                Atom::ipn(&b.right, &a.right, a.energy),
            ],
            vec![],
        )],
        (Annihilate, Gauge) => vec![contraction(
            a,
            b,
            1,
            vec![Atom::ip(&a.left, &b.left, a.energy)],
            vec![relabel(a, &b.right, &a.right)],
        )],
        (Gauge, Create) => vec![contraction(
            a,
            b,
            1,
            vec![Atom::ip(&a.right, &b.left, b.energy)],
            vec![relabel(b, &a.left, &b.right)],
        )],
        (Gauge, Gauge) => vec![
            contraction(
                a,
                b,
                1,
                vec![Atom::ip(&a.right, &b.left, a.energy)],
                vec![relabel(a, &a.left, &b.right)],
            ),
            contraction(
                a,
                b,
                -1,
                vec![Atom::ip(&b.right, &a.left, a.energy)],
                vec![relabel(a, &b.left, &a.right)],
            ),
        ],
        (Create, Annihilate) | (Gauge, Annihilate) | (Create, Gauge) => {
            return -&commutator(b, a);
        }
        (Create, Create) | (Annihilate, Annihilate) => vec![],
    };
    WnExpression::from_terms(terms)
}

/// `[x, b]` for an expression `x`, by the Leibniz rule on each word.
pub fn commutator_with(x: &WnExpression, b: &WnGenerator) -> WnExpression {
    let mut out = Vec::new();
    for t in x.terms() {
        for (i, g) in t.word.iter().enumerate() {
            for c in commutator(g, b).terms() {
                let mut word = t.word[..i].to_vec();
                word.extend(c.word.iter().cloned());
                word.extend(t.word[i + 1..].iter().cloned());
                out.push(WnTerm {
                    factor: t.factor * c.factor,
                    coefficient: t.coefficient.mul(&c.coefficient),
                    word,
                });
            }
        }
    }
    WnExpression::from_terms(out)
}
