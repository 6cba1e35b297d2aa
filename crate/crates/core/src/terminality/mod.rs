//! Terminal-object checks in rewrite categories and law verification for
//! monads and adjunctions.

mod laws;
mod oracle;

use std::collections::{BTreeSet, HashSet, VecDeque};

use thiserror::Error;

pub use laws::{verify_adjunction_laws, verify_monad_laws, LawError, LawReport, LawResult};
pub use oracle::{count_hom_classes, HomCount, OracleBounds};

use crate::equivalence::{Engine, Verdict};
use crate::rewrite::{find_derivation, find_redexes, is_good_normal, normalize_good, search_derivation, Derivation};
use crate::sig::{Closure, Presentation, RuleRef, TypedString, Universe};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Existence {
    Found(Derivation),
    NotFound(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Uniqueness {
    Certified,
    Unknown(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StringResult {
    pub string: TypedString,
    pub existence: Existence,
    pub uniqueness: Uniqueness,
}

impl StringResult {
    pub fn is_certified(&self) -> bool {
        matches!(self.existence, Existence::Found(_)) && self.uniqueness == Uniqueness::Certified
    }

    pub fn witness(&self) -> Option<&Derivation> {
        match &self.existence {
            Existence::Found(d) => Some(d),
            Existence::NotFound(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TerminalVerdict {
    Terminal,
    NotCertified,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TerminalityReport {
    pub candidate: TypedString,
    pub universe: String,
    pub max_len: usize,
    pub rules: Vec<RuleRef>,
    pub results: Vec<StringResult>,
    pub verdict: TerminalVerdict,
    /// What the verdict rests on: the certificates used and the length bound
    /// of the exhaustive part.
    pub basis: Vec<String>,
    /// Set when the universe is not closed under the active rules and the
    /// induced subcategory was used instead.
    pub not_closed: Option<Closure>,
}

impl TerminalityReport {
    pub fn is_terminal(&self) -> bool {
        self.verdict == TerminalVerdict::Terminal
    }

    pub fn result(&self, s: &TypedString) -> Option<&StringResult> {
        self.results.iter().find(|r| &r.string == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TerminalityError {
    #[error("candidate {0} is not in the universe")]
    NotInUniverse(String),
    #[error("universe is not closed: {step} takes {string} outside it")]
    NotClosed { string: String, step: String },
}

fn finish(
    candidate: &TypedString,
    universe: &Universe,
    max_len: usize,
    rules: Vec<RuleRef>,
    results: Vec<StringResult>,
    mut basis: Vec<String>,
    not_closed: Option<Closure>,
) -> TerminalityReport {
    let all = results.iter().all(StringResult::is_certified);
    basis.push(format!("exhaustive over {} strings up to length {max_len}", results.len()));
    TerminalityReport {
        candidate: candidate.clone(),
        universe: universe.name.clone(),
        max_len,
        rules,
        results,
        verdict: if all {
            TerminalVerdict::Terminal
        } else {
            TerminalVerdict::NotCertified
        },
        basis,
        not_closed,
    }
}

fn certificate_basis(engine: &Engine) -> Vec<String> {
    let mut basis = Vec::new();
    let conf = engine.good_confluence();
    if conf.is_certified() {
        basis.push(format!("good confluence certified ({} critical pairs)", conf.pairs.len()));
    }
    let elim = engine.bad_elimination();
    if elim.is_certified() {
        basis.push(format!("bad elimination certified ({} critical pairs)", elim.pairs.len()));
    }
    basis
}

/// Every string of the universe up to `max_len` needs a derivation into
/// `candidate`, and that derivation must be unique up to equality.
pub fn check_terminal(
    engine: &Engine,
    candidate: &TypedString,
    universe: &Universe,
    max_len: usize,
) -> Result<TerminalityReport, TerminalityError> {
    let pres = engine.pres();
    let sig = pres.sig();
    if !universe.contains(candidate) {
        return Err(TerminalityError::NotInUniverse(sig.show(candidate)));
    }
    let rules = pres.base_rules();
    if let Closure::NotClosed { string, step } = universe.check_closed(pres, &rules) {
        return Err(TerminalityError::NotClosed {
            string: sig.show(&string),
            step: step.show(pres),
        });
    }
    let results = universe
        .enumerate(pres, max_len)
        .into_iter()
        .map(|x| {
            let existence = match find_derivation(pres, &x, candidate, engine.budget()).found() {
                Some(d) => Existence::Found(d),
                None => Existence::NotFound("no derivation within budget".into()),
            };
            let uniqueness = certify_unique(engine, &x, candidate);
            StringResult {
                string: x,
                existence,
                uniqueness,
            }
        })
        .collect();
    Ok(finish(candidate, universe, max_len, rules, results, certificate_basis(engine), None))
}

/// Uniqueness of `x => candidate` up to equality, argued from the
/// certificates: any derivation rearranges into good steps followed by bad
/// steps, the good part lands on the normal form of `x` and is unique by
/// confluence, and the bad completions from there are compared directly.
pub fn certify_unique(engine: &Engine, x: &TypedString, candidate: &TypedString) -> Uniqueness {
    let pres = engine.pres();
    let sig = pres.sig();
    if !engine.good_confluence().is_certified() {
        return Uniqueness::Unknown("good confluence not certified".into());
    }
    if !engine.bad_elimination().is_certified() {
        return Uniqueness::Unknown("bad elimination not certified".into());
    }
    if !is_good_normal(pres, candidate) {
        return Uniqueness::Unknown("candidate is not a good normal form".into());
    }
    let Ok((nf, _)) = normalize_good(pres, x) else {
        return Uniqueness::Unknown("normalization did not terminate".into());
    };
    let limit = engine.budget().node_limit;
    let Some(reach) = good_reachable(pres, x, limit) else {
        return Uniqueness::Unknown("too many good descendants".into());
    };
    let mut landing = Vec::new();
    for y in &reach {
        let Some(ds) = bad_completions(pres, y, candidate, limit) else {
            return Uniqueness::Unknown("too many bad completions".into());
        };
        if !ds.is_empty() {
            landing.push((y.clone(), ds));
        }
    }
    match landing.as_slice() {
        [] => Uniqueness::Unknown("no derivation into the candidate".into()),
        [(y, ds)] if *y == nf => {
            for d in &ds[1..] {
                match engine.equivalent(&ds[0], d) {
                    Ok(Verdict::Equal(_)) => {}
                    Ok(Verdict::Unknown(diag)) => {
                        return Uniqueness::Unknown(format!(
                            "bad completions {} and {} not shown equal: {}",
                            ds[0].show(pres),
                            d.show(pres),
                            diag.reason
                        ))
                    }
                    Err(e) => return Uniqueness::Unknown(e.to_string()),
                }
            }
            Uniqueness::Certified
        }
        _ => {
            let ys: Vec<String> = landing.iter().map(|(y, _)| sig.show_compact(y)).collect();
            Uniqueness::Unknown(format!(
                "bad-only completions start from {} rather than only the normal form {}",
                ys.join(", "),
                sig.show_compact(&nf)
            ))
        }
    }
}

/// Strings reachable from `x` by good steps, `x` included.
fn good_reachable(pres: &Presentation, x: &TypedString, limit: usize) -> Option<BTreeSet<TypedString>> {
    let good = pres.good_rules();
    let mut seen = BTreeSet::from([x.clone()]);
    let mut queue = VecDeque::from([x.clone()]);
    while let Some(s) = queue.pop_front() {
        for step in find_redexes(pres, &s, &good) {
            let t = step.target(pres);
            if seen.insert(t.clone()) {
                if seen.len() > limit {
                    return None;
                }
                queue.push_back(t);
            }
        }
    }
    Some(seen)
}

/// Every derivation `y => target` using bad steps only. Bad steps lengthen
/// the string, so the search is finite.
fn bad_completions(pres: &Presentation, y: &TypedString, target: &TypedString, limit: usize) -> Option<Vec<Derivation>> {
    let bad = pres.bad_rules();
    let mut out = Vec::new();
    let mut stack = vec![Derivation::identity(y.clone())];
    let mut nodes = 0;
    while let Some(d) = stack.pop() {
        nodes += 1;
        if nodes > limit {
            return None;
        }
        let cur = d.target(pres);
        if &cur == target {
            out.push(d);
            continue;
        }
        if cur.len() >= target.len() {
            continue;
        }
        for step in find_redexes(pres, &cur, &bad).into_iter().rev() {
            let mut next = d.clone();
            next.steps.push(step);
            stack.push(next);
        }
    }
    out.sort();
    Some(out)
}

/// Terminality in the subcategory on `universe` generated by `active`
/// (derived rules allowed). Existence uses only active steps that stay in the
/// universe; uniqueness is inherited from the ambient presentation, and the
/// active derivations up to two steps longer than the witness are compared
/// with it directly.
pub fn check_terminal_subcategory(
    engine: &Engine,
    candidate: &TypedString,
    universe: &Universe,
    active: &[RuleRef],
    max_len: usize,
) -> Result<TerminalityReport, TerminalityError> {
    let pres = engine.pres();
    if !universe.contains(candidate) {
        return Err(TerminalityError::NotInUniverse(pres.sig().show(candidate)));
    }
    let closure = universe.check_closed(pres, active);
    let not_closed = (closure != Closure::Closed).then_some(closure);
    let mut results = Vec::new();
    for x in universe.enumerate(pres, max_len) {
        let found = search_derivation(pres, &x, candidate, active, Some(universe), engine.budget()).found();
        let Some(w) = found else {
            results.push(StringResult {
                string: x,
                existence: Existence::NotFound("no active derivation within budget".into()),
                uniqueness: Uniqueness::Unknown("no witness".into()),
            });
            continue;
        };
        let mut uniqueness = certify_unique(engine, &x, candidate);
        if uniqueness == Uniqueness::Certified {
            uniqueness = compare_active(engine, &w, candidate, active, universe);
        }
        results.push(StringResult {
            string: x,
            existence: Existence::Found(w),
            uniqueness,
        });
    }
    let mut basis = certificate_basis(engine);
    basis.push("uniqueness inherited from the ambient presentation".into());
    Ok(finish(candidate, universe, max_len, active.to_vec(), results, basis, not_closed))
}

fn compare_active(
    engine: &Engine,
    witness: &Derivation,
    candidate: &TypedString,
    active: &[RuleRef],
    universe: &Universe,
) -> Uniqueness {
    let pres = engine.pres();
    let depth = witness.len() + 2;
    let limit = engine.budget().node_limit;
    let mut stack = vec![Derivation::identity(witness.source.clone())];
    let mut seen = HashSet::new();
    let mut nodes = 0;
    while let Some(d) = stack.pop() {
        nodes += 1;
        if nodes > limit {
            return Uniqueness::Unknown("too many active derivations to compare".into());
        }
        let cur = d.target(pres);
        if &cur == candidate && &d != witness && seen.insert(d.clone()) {
            match engine.equivalent(witness, &d) {
                Ok(Verdict::Equal(_)) => {}
                _ => return Uniqueness::Unknown(format!("{} not shown equal to the witness", d.show(pres))),
            }
        }
        if d.len() >= depth {
            continue;
        }
        for step in find_redexes(pres, &cur, active) {
            if !universe.contains(&step.target(pres)) {
                continue;
            }
            let mut next = d.clone();
            next.steps.push(step);
            stack.push(next);
        }
    }
    Uniqueness::Certified
}
