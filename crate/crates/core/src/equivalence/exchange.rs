//! Interchange of disjoint steps, canonical representatives of exchange
//! classes, and expansion of derived rules.

use super::trace::{apply_move, Move, ProofTrace};
use crate::rewrite::{Derivation, Step};
use crate::sig::{Class, Presentation, RuleRef};

/// Given `s1` followed by `s2`, the pair `(s2', s1')` performing the same
/// rewrites in the other order. `None` when the redex of `s2` meets the output
/// of `s1`. An insertion directly at the point where `s1` erased everything is
/// also treated as overlapping.
pub fn exchange_steps(pres: &Presentation, s1: &Step, s2: &Step) -> Option<(Step, Step)> {
    let (a1, l1, r1) = (s1.pos(), pres.lhs(s1.rule).len(), pres.rhs(s1.rule).len());
    let (a2, l2, r2) = (s2.pos(), pres.lhs(s2.rule).len(), pres.rhs(s2.rule).len());
    let touching = r1 == 0 && l2 == 0 && a1 == a2;
    let before = if l2 == 0 { a2 <= a1 } else { a2 + l2 <= a1 };
    let after = a2 >= a1 + r1;
    let x = s1.source(pres);
    let (p2, p1) = if touching {
        return None;
    } else if before {
        (a2, a1 + r2 - l2)
    } else if after {
        (a2 + l1 - r1, a1)
    } else {
        return None;
    };
    let t1 = Step::at(pres, &x, p2, s2.rule)?;
    let t2 = Step::at(pres, &t1.target(pres), p1, s1.rule)?;
    Some((t1, t2))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("steps {index} and {} overlap", index + 1)]
pub struct NotDisjoint {
    pub index: usize,
}

pub fn exchange_adjacent(pres: &Presentation, d: &Derivation, index: usize) -> Result<Derivation, NotDisjoint> {
    apply_move(pres, d, &Move::Exchange { index }).map_err(|_| NotDisjoint { index })
}

type Key = (usize, RuleRef);

fn key(s: &Step) -> Key {
    (s.pos(), s.rule)
}

/// Moves step `j` down to index `i` by successive exchanges.
fn bubble(pres: &Presentation, steps: &[Step], j: usize, i: usize) -> Option<(Vec<Step>, Vec<Move>)> {
    let mut out = steps.to_vec();
    let mut moves = Vec::new();
    for k in (i..j).rev() {
        let (a, b) = exchange_steps(pres, &out[k], &out[k + 1])?;
        out[k] = a;
        out[k + 1] = b;
        moves.push(Move::Exchange { index: k });
    }
    Some((out, moves))
}

fn canon_from(pres: &Presentation, mut steps: Vec<Step>, start: usize, moves: &mut Vec<Move>) -> Vec<Step> {
    for i in start..steps.len() {
        let mut best: Vec<(Vec<Step>, Vec<Move>)> = Vec::new();
        let mut best_key: Option<Key> = None;
        for j in i..steps.len() {
            let Some((cand, mv)) = bubble(pres, &steps, j, i) else {
                continue;
            };
            let k = key(&cand[i]);
            match best_key {
                Some(b) if k > b => {}
                Some(b) if k == b => best.push((cand, mv)),
                _ => {
                    best_key = Some(k);
                    best = vec![(cand, mv)];
                }
            }
        }
        if best.len() == 1 {
            let (cand, mv) = best.pop().expect("one candidate");
            steps = cand;
            moves.extend(mv);
            continue;
        }
        // Equal front steps can leave different tails; keep the smallest.
        let mut chosen: Option<(Vec<Key>, Vec<Step>, Vec<Move>)> = None;
        for (cand, mut mv) in best {
            let rest = canon_from(pres, cand, i + 1, &mut mv);
            let keys: Vec<Key> = rest.iter().map(key).collect();
            if chosen.as_ref().is_none_or(|(k, _, _)| keys < *k) {
                chosen = Some((keys, rest, mv));
            }
        }
        let (_, rest, mv) = chosen.expect("at least one candidate");
        moves.extend(mv);
        return rest;
    }
    steps
}

/// The representative of the exchange class of `d` whose sequence of
/// `(position, rule)` keys is lexicographically least, with the exchanges
/// that reach it.
pub fn canonical_exchange_form(pres: &Presentation, d: &Derivation) -> (Derivation, ProofTrace) {
    let mut moves = Vec::new();
    let steps = canon_from(pres, d.steps.clone(), 0, &mut moves);
    (
        Derivation {
            source: d.source.clone(),
            steps,
        },
        ProofTrace::new(moves),
    )
}

/// Canonical form computed separately on each maximal run of steps of one
/// class, so a good prefix stays in front of a bad suffix.
pub fn canonical_by_class(pres: &Presentation, d: &Derivation) -> (Derivation, ProofTrace) {
    let mut steps = Vec::with_capacity(d.len());
    let mut trace = ProofTrace::default();
    let mut start = 0;
    while start < d.len() {
        let class: Class = d.steps[start].class(pres);
        let mut end = start;
        while end < d.len() && d.steps[end].class(pres) == class {
            end += 1;
        }
        let run = Derivation {
            source: d.string_at(pres, start),
            steps: d.steps[start..end].to_vec(),
        };
        let (c, t) = canonical_exchange_form(pres, &run);
        steps.extend(c.steps);
        trace = trace.then(t.shifted(start, 0));
        start = end;
    }
    (
        Derivation {
            source: d.source.clone(),
            steps,
        },
        trace,
    )
}

/// Replaces every derived step by its whiskered body, recursively.
pub fn expand_derived(pres: &Presentation, d: &Derivation) -> (Derivation, ProofTrace) {
    let mut cur = d.clone();
    let mut moves = Vec::new();
    while let Some(index) = cur.steps.iter().position(|s| matches!(s.rule, RuleRef::Derived(_))) {
        let m = Move::ExpandDerived {
            index,
            rule: cur.steps[index].rule,
        };
        cur = apply_move(pres, &cur, &m).expect("derived bodies are well-typed");
        moves.push(m);
    }
    (cur, ProofTrace::new(moves))
}
