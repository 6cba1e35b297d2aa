//! Equality of parallel derivations modulo exchange of disjoint steps,
//! whiskered equation instances and expansion of derived rules.

mod diagram;
mod exchange;
mod search;
mod trace;

use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

pub use diagram::{check_diagram, intro_diagram, Diagram, DiagramEdge, DiagramError, DiagramResult};
pub use exchange::{
    canonical_by_class, canonical_exchange_form, exchange_adjacent, exchange_steps, expand_derived, NotDisjoint,
};
pub use search::{congruence_search, equation_neighbours, SearchResult};
pub use trace::{apply_move, whisker, Move, ProofTrace, ReplayError};

use crate::confluence::{check_bad_elimination, check_good_confluence, ConfluenceReport, EliminationReport};
use crate::rewrite::{is_good_normal, normalize_good, Derivation, RewriteError, Step};
use crate::sig::{Class, Presentation};
use crate::Budget;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Diagnostics {
    pub reason: String,
    pub nodes: usize,
    pub depth: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// A replayable proof rewriting the first derivation into the second.
    Equal(ProofTrace),
    /// No proof within budget. Never a claim of inequality.
    Unknown(Diagnostics),
}

impl Verdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, Verdict::Equal(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquivError {
    #[error("derivations are not parallel: {0}")]
    NotParallel(String),
    #[error("invalid derivation: {0}")]
    Invalid(#[from] RewriteError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PushError {
    #[error("no certified absorption for {0}")]
    Uncertified(String),
    #[error("bad steps could not be moved past good ones within {0} moves")]
    Limit(usize),
}

/// Equivalence checking over one presentation. Confluence and absorption
/// certificates are computed on first use and reused.
pub struct Engine<'p> {
    pres: &'p Presentation,
    budget: Budget,
    confluence: OnceLock<ConfluenceReport>,
    elimination: OnceLock<EliminationReport>,
}

impl<'p> Engine<'p> {
    pub fn new(pres: &'p Presentation, budget: Budget) -> Self {
        Engine {
            pres,
            budget,
            confluence: OnceLock::new(),
            elimination: OnceLock::new(),
        }
    }

    pub fn pres(&self) -> &'p Presentation {
        self.pres
    }

    pub fn budget(&self) -> &Budget {
        &self.budget
    }

    pub fn good_confluence(&self) -> &ConfluenceReport {
        self.confluence.get_or_init(|| check_good_confluence(self))
    }

    pub fn bad_elimination(&self) -> &EliminationReport {
        self.elimination.get_or_init(|| check_bad_elimination(self))
    }

    fn check_parallel(&self, d1: &Derivation, d2: &Derivation) -> Result<(), EquivError> {
        let pres = self.pres;
        Derivation::new(pres, d1.source.clone(), d1.steps.clone())?;
        Derivation::new(pres, d2.source.clone(), d2.steps.clone())?;
        let sig = pres.sig();
        if d1.source != d2.source {
            return Err(EquivError::NotParallel(format!(
                "sources {} and {}",
                sig.show(&d1.source),
                sig.show(&d2.source)
            )));
        }
        let (t1, t2) = (d1.target(pres), d2.target(pres));
        if t1 != t2 {
            return Err(EquivError::NotParallel(format!("targets {} and {}", sig.show(&t1), sig.show(&t2))));
        }
        Ok(())
    }

    /// Full pipeline: expansion, bad-step pushing, canonical forms, the
    /// confluence-based coherence argument, then bounded search.
    pub fn equivalent(&self, d1: &Derivation, d2: &Derivation) -> Result<Verdict, EquivError> {
        self.check_parallel(d1, d2)?;
        let (n1, p1) = self.prepare(d1);
        let (n2, p2) = self.prepare(d2);
        let mid = if n1 == n2 {
            Ok(ProofTrace::default())
        } else if let Some(t) = self.coherence(&n1, &n2) {
            Ok(t)
        } else {
            self.search(&n1, &n2)
        };
        Ok(match mid {
            Ok(mid) => self.checked(d1, d2, p1.then(mid).then(p2.inverse())),
            Err(diag) => Verdict::Unknown(diag),
        })
    }

    /// Expansion, canonical forms and search only; the certificates themselves
    /// are built with this.
    pub fn search_equal(&self, d1: &Derivation, d2: &Derivation) -> Verdict {
        if let Err(e) = self.check_parallel(d1, d2) {
            return Verdict::Unknown(Diagnostics {
                reason: e.to_string(),
                ..Diagnostics::default()
            });
        }
        let (e1, x1) = expand_derived(self.pres, d1);
        let (e2, x2) = expand_derived(self.pres, d2);
        match self.search(&e1, &e2) {
            Ok(mid) => self.checked(d1, d2, x1.then(mid).then(x2.inverse())),
            Err(diag) => Verdict::Unknown(diag),
        }
    }

    fn prepare(&self, d: &Derivation) -> (Derivation, ProofTrace) {
        let (e, t1) = expand_derived(self.pres, d);
        let (p, t2) = self
            .push_bad_after_good(&e)
            .unwrap_or_else(|_| (e.clone(), ProofTrace::default()));
        let (c, t3) = canonical_by_class(self.pres, &p);
        (c, t1.then(t2).then(t3))
    }

    fn search(&self, a: &Derivation, b: &Derivation) -> Result<ProofTrace, Diagnostics> {
        match congruence_search(self.pres, a, b, &self.budget) {
            SearchResult::Found(t) => Ok(t),
            SearchResult::Exhausted { nodes, depth } => Err(Diagnostics {
                reason: "search space exhausted within the length bounds".into(),
                nodes,
                depth,
            }),
            SearchResult::LimitReached { nodes, depth } => Err(Diagnostics {
                reason: "budget exhausted".into(),
                nodes,
                depth,
            }),
        }
    }

    /// Replays the trace before reporting equality.
    fn checked(&self, d1: &Derivation, d2: &Derivation, trace: ProofTrace) -> Verdict {
        match trace.replay(self.pres, d1) {
            Ok(r) if &r == d2 => Verdict::Equal(trace),
            Ok(_) => Verdict::Unknown(Diagnostics {
                reason: "proof trace ends at a different derivation".into(),
                ..Diagnostics::default()
            }),
            Err(e) => Verdict::Unknown(Diagnostics {
                reason: format!("proof trace does not replay: {e}"),
                ..Diagnostics::default()
            }),
        }
    }

    /// Rewrites `d` so that no bad step is directly followed by a good one,
    /// exchanging disjoint neighbours and replacing overlapping ones by their
    /// certified absorptions. Never lengthens the derivation.
    pub fn push_bad_after_good(&self, d: &Derivation) -> Result<(Derivation, ProofTrace), PushError> {
        let pres = self.pres;
        let mut cur = d.clone();
        let mut trace = ProofTrace::default();
        let limit = self.budget.node_limit;
        let bad_good = |d: &Derivation| {
            (0..d.len().saturating_sub(1))
                .find(|&i| d.steps[i].class(pres) == Class::Bad && d.steps[i + 1].class(pres) == Class::Good)
        };
        while let Some(i) = bad_good(&cur) {
            if trace.len() >= limit {
                return Err(PushError::Limit(limit));
            }
            let m = Move::Exchange { index: i };
            if let Ok(next) = apply_move(pres, &cur, &m) {
                cur = next;
                trace.moves.push(m);
                continue;
            }
            let (b, g) = (&cur.steps[i], &cur.steps[i + 1]);
            let (lo, bu, gu) = absorption_window(pres, b, g);
            let cert = self.bad_elimination().absorption(&bu, &gu).ok_or_else(|| {
                PushError::Uncertified(format!("{} ; {}", bu.label(pres), gu.label(pres)))
            })?;
            for m in cert.trace.shifted(i, lo).moves {
                cur = apply_move(pres, &cur, &m).expect("whiskered certificate replays");
                trace.moves.push(m);
            }
        }
        Ok((cur, trace))
    }

    /// For two good derivations into the same good normal form, builds a
    /// proof by induction along the terminating order, closing each peak with
    /// a whiskered critical-pair certificate or an exchange.
    fn coherence(&self, a: &Derivation, b: &Derivation) -> Option<ProofTrace> {
        let pres = self.pres;
        let all_good = |d: &Derivation| d.steps.iter().all(|s| s.class(pres) == Class::Good);
        if !all_good(a) || !all_good(b) {
            return None;
        }
        let t = a.target(pres);
        if t != b.target(pres) || !is_good_normal(pres, &t) || !self.good_confluence().is_certified() {
            return None;
        }
        let mut calls = 0;
        self.cohere(a, b, &mut calls)
    }

    fn cohere(&self, a: &Derivation, b: &Derivation, calls: &mut usize) -> Option<ProofTrace> {
        let pres = self.pres;
        *calls += 1;
        if *calls > self.budget.node_limit {
            return None;
        }
        if a == b {
            return Some(ProofTrace::default());
        }
        let (s1, s2) = (a.steps.first()?, b.steps.first()?);
        let tail = |d: &Derivation| Derivation {
            source: d.steps[0].target(pres),
            steps: d.steps[1..].to_vec(),
        };
        let (ta, tb) = (tail(a), tail(b));
        if s1 == s2 {
            return Some(self.cohere(&ta, &tb, calls)?.shifted(1, 0));
        }
        let (j1, j2, peak) = self.local_join(s1, s2)?;
        let w = j1.target(pres);
        let (_, e) = normalize_good(pres, &w).ok()?;
        let (c1, c2) = (j1.then(&e), j2.then(&e));
        let p = self.cohere(&ta, &c1, calls)?;
        let q = self.cohere(&c2, &tb, calls)?;
        Some(p.shifted(1, 0).then(peak).then(q.shifted(1, 0)))
    }

    /// Completions `j1`, `j2` of the peak `s1 | s2` and a trace rewriting
    /// `s1 ; j1` into `s2 ; j2`.
    fn local_join(&self, s1: &Step, s2: &Step) -> Option<(Derivation, Derivation, ProofTrace)> {
        let pres = self.pres;
        let sig = pres.sig();
        let x = s1.source(pres);
        let (a1, e1) = s1.redex(pres);
        let (a2, e2) = s2.redex(pres);
        let r1 = pres.rhs(s1.rule).len();
        if e2 <= a1 || e1 <= a2 {
            let x1 = s1.target(pres);
            let p2 = if e2 <= a1 { a2 } else { a2 + r1 - (e1 - a1) };
            let s2p = Step::at(pres, &x1, p2, s2.rule)?;
            let (first, s1p) = exchange_steps(pres, s1, &s2p)?;
            if &first != s2 {
                return None;
            }
            return Some((
                Derivation::single(pres, s2p),
                Derivation::single(pres, s1p),
                ProofTrace::new(vec![Move::Exchange { index: 0 }]),
            ));
        }
        let (lo, hi) = (a1.min(a2), e1.max(e2));
        let unwhisker = |s: &Step| {
            let (p, e) = s.redex(pres);
            Step {
                left: sig.substring(&x, lo, p),
                rule: s.rule,
                right: sig.substring(&x, e, hi),
            }
        };
        let cert = self.good_confluence().join(&unwhisker(s1), &unwhisker(s2))?;
        let (l, r) = (sig.substring(&x, 0, lo), sig.substring(&x, hi, x.len()));
        Some((
            whisker(pres, &cert.left, &l, &r)?,
            whisker(pres, &cert.right, &l, &r)?,
            cert.trace.shifted(0, lo),
        ))
    }
}

/// The smallest context around a bad step `b` followed by an overlapping good
/// step `g`: its offset and both steps restricted to it.
fn absorption_window(pres: &Presentation, b: &Step, g: &Step) -> (usize, Step, Step) {
    let sig = pres.sig();
    let (x, y) = (b.source(pres), b.target(pres));
    let (p, lb, rb) = (b.pos(), pres.lhs(b.rule).len(), pres.rhs(b.rule).len());
    let (a, ea) = g.redex(pres);
    let lo = p.min(a);
    let hi_y = (p + rb).max(ea);
    let hi_x = hi_y + lb - rb;
    let bu = Step {
        left: sig.substring(&x, lo, p),
        rule: b.rule,
        right: sig.substring(&x, p + lb, hi_x),
    };
    let gu = Step {
        left: sig.substring(&y, lo, a),
        rule: g.rule,
        right: sig.substring(&y, ea, hi_y),
    };
    (lo, bu, gu)
}

/// Convenience wrapper building a fresh engine.
pub fn equivalent(
    pres: &Presentation,
    d1: &Derivation,
    d2: &Derivation,
    budget: &Budget,
) -> Result<Verdict, EquivError> {
    Engine::new(pres, *budget).equivalent(d1, d2)
}
