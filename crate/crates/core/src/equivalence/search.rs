//! Bounded bidirectional search over equation instances modulo exchange.

use std::collections::HashMap;

use super::exchange::canonical_exchange_form;
use super::trace::{context_of, whisker, Move, ProofTrace};
use crate::rewrite::Derivation;
use crate::sig::Presentation;
use crate::Budget;

/// Every derivation one whiskered equation instance away from `d`.
pub fn equation_neighbours(pres: &Presentation, d: &Derivation) -> Vec<(Move, Derivation)> {
    let strings = d.strings(pres);
    let mut out = Vec::new();
    for (k, cur) in strings.iter().enumerate() {
        for (equation, eq) in pres.equations().iter().enumerate() {
            for forward in [true, false] {
                let (from, to) = if forward { (&eq.left, &eq.right) } else { (&eq.right, &eq.left) };
                if k + from.len() > d.len() || from.source.len() > cur.len() {
                    continue;
                }
                let offsets: Vec<usize> = match from.steps.first() {
                    // A nonempty side is anchored by its first step.
                    Some(f) => {
                        let s = &d.steps[k];
                        if s.rule != f.rule || s.pos() < f.pos() {
                            continue;
                        }
                        vec![s.pos() - f.pos()]
                    }
                    None => (0..=cur.len() - from.source.len()).collect(),
                };
                for left_len in offsets {
                    let Some((l, r)) = context_of(pres, cur, &from.source, left_len) else {
                        continue;
                    };
                    let Some(inst) = whisker(pres, from, &l, &r) else {
                        continue;
                    };
                    if inst.steps[..] != d.steps[k..k + from.len()] {
                        continue;
                    }
                    let Some(repl) = whisker(pres, to, &l, &r) else {
                        continue;
                    };
                    let mut steps = d.steps[..k].to_vec();
                    steps.extend(repl.steps);
                    steps.extend_from_slice(&d.steps[k + from.len()..]);
                    let m = Move::Equation {
                        equation,
                        forward,
                        index: k,
                        left_len,
                    };
                    out.push((
                        m,
                        Derivation {
                            source: d.source.clone(),
                            steps,
                        },
                    ));
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchResult {
    Found(ProofTrace),
    /// Both sides ran out of nodes within the bounds.
    Exhausted { nodes: usize, depth: usize },
    LimitReached { nodes: usize, depth: usize },
}

struct Side {
    seen: HashMap<Derivation, (Option<Derivation>, Vec<Move>)>,
    frontier: Vec<Derivation>,
    depth: usize,
}

impl Side {
    fn new(root: Derivation) -> Side {
        Side {
            seen: HashMap::from([(root.clone(), (None, Vec::new()))]),
            frontier: vec![root],
            depth: 0,
        }
    }

    fn path(&self, node: &Derivation) -> Vec<Move> {
        let mut edges = Vec::new();
        let mut at = node.clone();
        while let Some((Some(parent), moves)) = self.seen.get(&at) {
            edges.push(moves.clone());
            at = parent.clone();
        }
        edges.into_iter().rev().flatten().collect()
    }
}

/// Searches for a chain of equation instances and exchanges from `a` to `b`.
/// Intermediate derivations are kept in canonical exchange form and bounded
/// in step count and string length.
pub fn congruence_search(pres: &Presentation, a: &Derivation, b: &Derivation, budget: &Budget) -> SearchResult {
    let (ca, ta) = canonical_exchange_form(pres, a);
    let (cb, tb) = canonical_exchange_form(pres, b);
    let wrap = |mid: Vec<Move>| ta.clone().then(ProofTrace::new(mid)).then(tb.inverse());
    if ca == cb {
        return SearchResult::Found(wrap(Vec::new()));
    }
    let max_steps = a.len().max(b.len()) + budget.length_slack;
    let max_len = a.max_len(pres).max(b.max_len(pres)) + 2;
    let mut sides = [Side::new(ca), Side::new(cb)];
    let mut nodes = 2;
    let mut exhausted = true;
    loop {
        let live: Vec<usize> = (0..2)
            .filter(|&i| !sides[i].frontier.is_empty() && sides[i].depth < budget.equation_depth)
            .collect();
        let Some(&i) = live.iter().min_by_key(|&&i| sides[i].frontier.len()) else {
            let depth = sides[0].depth + sides[1].depth;
            if sides.iter().any(|s| !s.frontier.is_empty()) {
                exhausted = false;
            }
            return if exhausted {
                SearchResult::Exhausted { nodes, depth }
            } else {
                SearchResult::LimitReached { nodes, depth }
            };
        };
        let frontier = std::mem::take(&mut sides[i].frontier);
        let mut next = Vec::new();
        for node in frontier {
            for (m, nb) in equation_neighbours(pres, &node) {
                if nb.len() > max_steps || nb.max_len(pres) > max_len {
                    exhausted = false;
                    continue;
                }
                let (c, t) = canonical_exchange_form(pres, &nb);
                if sides[i].seen.contains_key(&c) {
                    continue;
                }
                let mut edge = vec![m];
                edge.extend(t.moves);
                sides[i].seen.insert(c.clone(), (Some(node.clone()), edge));
                nodes += 1;
                if sides[1 - i].seen.contains_key(&c) {
                    let mid = ProofTrace::new(sides[0].path(&c)).then(ProofTrace::new(sides[1].path(&c)).inverse());
                    return SearchResult::Found(wrap(mid.moves));
                }
                if nodes >= budget.node_limit {
                    return SearchResult::LimitReached {
                        nodes,
                        depth: sides[0].depth + sides[1].depth + 1,
                    };
                }
                next.push(c);
            }
        }
        sides[i].frontier = next;
        sides[i].depth += 1;
    }
}
