//! Elementary rewrites of derivations and replayable sequences of them.

use serde::Serialize;
use thiserror::Error;

use super::exchange::exchange_steps;
use crate::rewrite::{Derivation, Step};
use crate::sig::{Presentation, RuleRef, TypedString};

/// One rewrite of a derivation. Indices count steps; `left_len` is the length
/// of the left whisker around an equation instance.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "move", rename_all = "snake_case")]
pub enum Move {
    /// Swap the disjoint steps `index` and `index + 1`.
    Exchange { index: usize },
    /// Replace the instance of one side of an equation that starts at step
    /// `index` by the other side. `forward` rewrites left to right.
    Equation {
        equation: usize,
        forward: bool,
        index: usize,
        left_len: usize,
    },
    ExpandDerived { index: usize, rule: RuleRef },
    FoldDerived { index: usize, rule: RuleRef },
}

impl Move {
    pub fn inverse(&self) -> Move {
        match *self {
            Move::Exchange { index } => Move::Exchange { index },
            Move::Equation {
                equation,
                forward,
                index,
                left_len,
            } => Move::Equation {
                equation,
                forward: !forward,
                index,
                left_len,
            },
            Move::ExpandDerived { index, rule } => Move::FoldDerived { index, rule },
            Move::FoldDerived { index, rule } => Move::ExpandDerived { index, rule },
        }
    }

    /// The same move on a derivation with `steps` extra steps in front and
    /// `left` extra generators in every left whisker.
    pub fn shifted(&self, steps: usize, left: usize) -> Move {
        match *self {
            Move::Exchange { index } => Move::Exchange { index: index + steps },
            Move::Equation {
                equation,
                forward,
                index,
                left_len,
            } => Move::Equation {
                equation,
                forward,
                index: index + steps,
                left_len: left_len + left,
            },
            Move::ExpandDerived { index, rule } => Move::ExpandDerived {
                index: index + steps,
                rule,
            },
            Move::FoldDerived { index, rule } => Move::FoldDerived {
                index: index + steps,
                rule,
            },
        }
    }

    pub fn show(&self, pres: &Presentation) -> String {
        match *self {
            Move::Exchange { index } => format!("exchange steps {index},{}", index + 1),
            Move::Equation {
                equation,
                forward,
                index,
                left_len,
            } => {
                let dir = if forward { "->" } else { "<-" };
                format!(
                    "{} {dir} at step {index}, offset {left_len}",
                    pres.equations()[equation].name
                )
            }
            Move::ExpandDerived { index, rule } => format!("expand {} at step {index}", pres.rule_name(rule)),
            Move::FoldDerived { index, rule } => format!("fold {} at step {index}", pres.rule_name(rule)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("move {position} ({shown}) does not apply: {reason}")]
pub struct ReplayError {
    pub position: usize,
    pub shown: String,
    pub reason: String,
}

/// A sequence of moves taking one derivation to another.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ProofTrace {
    pub moves: Vec<Move>,
}

impl ProofTrace {
    pub fn new(moves: Vec<Move>) -> Self {
        ProofTrace { moves }
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn inverse(&self) -> ProofTrace {
        ProofTrace {
            moves: self.moves.iter().rev().map(Move::inverse).collect(),
        }
    }

    pub fn shifted(&self, steps: usize, left: usize) -> ProofTrace {
        ProofTrace {
            moves: self.moves.iter().map(|m| m.shifted(steps, left)).collect(),
        }
    }

    pub fn then(mut self, other: ProofTrace) -> ProofTrace {
        self.moves.extend(other.moves);
        self
    }

    pub fn replay(&self, pres: &Presentation, d: &Derivation) -> Result<Derivation, ReplayError> {
        let mut cur = d.clone();
        for (position, m) in self.moves.iter().enumerate() {
            cur = apply_move(pres, &cur, m).map_err(|reason| ReplayError {
                position,
                shown: m.show(pres),
                reason,
            })?;
        }
        Ok(cur)
    }

    pub fn show(&self, pres: &Presentation) -> Vec<String> {
        self.moves.iter().map(|m| m.show(pres)).collect()
    }
}

/// Whiskers every step of `d` by `left` and `right`.
pub fn whisker(pres: &Presentation, d: &Derivation, left: &TypedString, right: &TypedString) -> Option<Derivation> {
    let sig = pres.sig();
    let source = sig.concat(&sig.concat(left, &d.source).ok()?, right).ok()?;
    let steps = d
        .steps
        .iter()
        .map(|s| s.whiskered(sig, left, right))
        .collect::<Option<Vec<Step>>>()?;
    Some(Derivation { source, steps })
}

fn splice(d: &Derivation, at: usize, remove: usize, insert: Vec<Step>) -> Derivation {
    let mut steps = d.steps[..at].to_vec();
    steps.extend(insert);
    steps.extend_from_slice(&d.steps[at + remove..]);
    Derivation {
        source: d.source.clone(),
        steps,
    }
}

pub fn apply_move(pres: &Presentation, d: &Derivation, m: &Move) -> Result<Derivation, String> {
    match *m {
        Move::Exchange { index } => {
            if index + 1 >= d.len() {
                return Err(format!("no steps {index},{} in a derivation of length {}", index + 1, d.len()));
            }
            let (a, b) =
                exchange_steps(pres, &d.steps[index], &d.steps[index + 1]).ok_or("steps are not disjoint")?;
            Ok(splice(d, index, 2, vec![a, b]))
        }
        Move::Equation {
            equation,
            forward,
            index,
            left_len,
        } => {
            let eq = pres.equations().get(equation).ok_or("unknown equation")?;
            let (from, to) = if forward { (&eq.left, &eq.right) } else { (&eq.right, &eq.left) };
            if index > d.len() || index + from.len() > d.len() {
                return Err("instance runs past the end".into());
            }
            let cur = d.string_at(pres, index);
            let (left, right) = context_of(pres, &cur, &from.source, left_len).ok_or("side does not occur")?;
            let inst = whisker(pres, from, &left, &right).ok_or("contexts do not compose")?;
            if inst.steps[..] != d.steps[index..index + from.len()] {
                return Err("steps do not match the equation side".into());
            }
            let repl = whisker(pres, to, &left, &right).ok_or("contexts do not compose")?;
            Ok(splice(d, index, from.len(), repl.steps))
        }
        Move::ExpandDerived { index, rule } => {
            let step = d.steps.get(index).ok_or("no such step")?;
            let RuleRef::Derived(k) = rule else {
                return Err("not a derived rule".into());
            };
            if step.rule != rule {
                return Err("step uses a different rule".into());
            }
            let body = &pres.derived_rules()[k].body;
            let w = whisker(pres, body, &step.left, &step.right).ok_or("contexts do not compose")?;
            Ok(splice(d, index, 1, w.steps))
        }
        Move::FoldDerived { index, rule } => {
            let RuleRef::Derived(k) = rule else {
                return Err("not a derived rule".into());
            };
            let dr = &pres.derived_rules()[k];
            let first = dr.body.steps.first().ok_or("empty body cannot be located")?;
            let step = d.steps.get(index).ok_or("no such step")?;
            if index + dr.body.len() > d.len() || step.pos() < first.pos() {
                return Err("body does not fit".into());
            }
            let cur = d.string_at(pres, index);
            let (left, right) =
                context_of(pres, &cur, &dr.lhs, step.pos() - first.pos()).ok_or("lhs does not occur")?;
            let w = whisker(pres, &dr.body, &left, &right).ok_or("contexts do not compose")?;
            if w.steps[..] != d.steps[index..index + dr.body.len()] {
                return Err("steps do not match the body".into());
            }
            let folded = Step {
                left,
                rule,
                right,
            };
            Ok(splice(d, index, dr.body.len(), vec![folded]))
        }
    }
}

/// Left and right contexts of an occurrence of `pattern` at offset `at`.
pub(crate) fn context_of(
    pres: &Presentation,
    s: &TypedString,
    pattern: &TypedString,
    at: usize,
) -> Option<(TypedString, TypedString)> {
    let sig = pres.sig();
    let end = at + pattern.len();
    if end > s.len() {
        return None;
    }
    if pattern.is_empty() {
        if sig.boundary_cell(s, at) != pattern.dom() {
            return None;
        }
    } else if &s.gens()[at..end] != pattern.gens() {
        return None;
    }
    Some((sig.substring(s, 0, at), sig.substring(s, end, s.len())))
}
