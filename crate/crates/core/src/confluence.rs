//! Critical pairs and their certification: good-rule confluence, and the
//! elimination of bad steps followed by overlapping good steps.

use std::collections::{BTreeSet, HashMap};

use crate::equivalence::{Diagnostics, Engine, ProofTrace, Verdict};
use crate::rewrite::{check_termination, find_derivation, normalize_good, Derivation, Step, Termination};
use crate::sig::{Class, GenId, Presentation, TypedString};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum CriticalPair {
    /// Two steps out of `peak` whose redexes overlap and together cover it.
    Divergence { peak: TypedString, first: Step, second: Step },
    /// A bad step followed by a good step whose redex meets the inserted
    /// material, on the smallest source that supports the overlap.
    Absorption { source: TypedString, bad: Step, good: Step },
}

impl CriticalPair {
    pub fn show(&self, pres: &Presentation) -> String {
        let sig = pres.sig();
        match self {
            CriticalPair::Divergence { peak, first, second } => format!(
                "divergence on {}: {} | {}",
                sig.show_compact(peak),
                first.label(pres),
                second.label(pres)
            ),
            CriticalPair::Absorption { source, bad, good } => format!(
                "absorption on {}: {} ; {}",
                sig.show_compact(source),
                bad.label(pres),
                good.label(pres)
            ),
        }
    }

    pub fn is_good(&self, pres: &Presentation) -> bool {
        matches!(self, CriticalPair::Divergence { first, second, .. }
            if first.class(pres) == Class::Good && second.class(pres) == Class::Good)
    }
}

/// Overlays `v` at offset `o` relative to `u` (which sits at 0). Returns the
/// covering word and the offsets of `u` and `v` in it.
fn overlay(u: &[GenId], v: &[GenId], o: isize) -> Option<(Vec<GenId>, usize, usize)> {
    let lo = o.min(0);
    let hi = (u.len() as isize).max(o + v.len() as isize);
    let mut word = Vec::with_capacity((hi - lo) as usize);
    for i in lo..hi {
        let from_u = (0..u.len() as isize).contains(&i).then(|| u[i as usize]);
        let from_v = (o..o + v.len() as isize).contains(&i).then(|| v[(i - o) as usize]);
        match (from_u, from_v) {
            (Some(a), Some(b)) if a != b => return None,
            (Some(a), _) | (None, Some(a)) => word.push(a),
            (None, None) => unreachable!("covering interval"),
        }
    }
    Some((word, (-lo) as usize, (o - lo) as usize))
}

/// All divergence and absorption pairs of the base rules, in a fixed order.
pub fn critical_pairs(pres: &Presentation) -> Vec<CriticalPair> {
    let sig = pres.sig();
    let rules = pres.base_rules();
    let mut divergences = BTreeSet::new();
    let mut absorptions = BTreeSet::new();
    for &r1 in &rules {
        for &r2 in &rules {
            let (u, v) = (pres.lhs(r1), pres.lhs(r2));
            if u.is_empty() {
                continue;
            }
            if v.is_empty() {
                // An insertion strictly inside a redex.
                for o in 1..u.len() {
                    if let (Some(a), Some(b)) = (Step::at(pres, u, 0, r1), Step::at(pres, u, o, r2)) {
                        let (first, second) = if a <= b { (a, b) } else { (b, a) };
                        divergences.insert(CriticalPair::Divergence {
                            peak: u.clone(),
                            first,
                            second,
                        });
                    }
                }
                continue;
            }
            for o in -(v.len() as isize - 1)..u.len() as isize {
                if r1 == r2 && o == 0 {
                    continue;
                }
                let Some((word, p1, p2)) = overlay(u.gens(), v.gens(), o) else {
                    continue;
                };
                let Ok(peak) = sig.string(word, None) else {
                    continue;
                };
                let (Some(a), Some(b)) = (Step::at(pres, &peak, p1, r1), Step::at(pres, &peak, p2, r2)) else {
                    continue;
                };
                let (first, second) = if a <= b { (a, b) } else { (b, a) };
                divergences.insert(CriticalPair::Divergence { peak, first, second });
            }
        }
    }
    for &b in &pres.bad_rules() {
        for &g in &pres.good_rules() {
            let (r, v) = (pres.rhs(b), pres.lhs(g));
            if v.is_empty() || r.is_empty() {
                continue;
            }
            for o in -(v.len() as isize - 1)..r.len() as isize {
                let Some((word, pb, pg)) = overlay(r.gens(), v.gens(), o) else {
                    continue;
                };
                let Ok(y) = sig.string(word, None) else {
                    continue;
                };
                let left = sig.substring(&y, 0, pb);
                let right = sig.substring(&y, pb + r.len(), y.len());
                let source = sig.join3(&left, pres.lhs(b), &right);
                let (Some(bs), Some(gs)) = (Step::at(pres, &source, pb, b), Step::at(pres, &y, pg, g)) else {
                    continue;
                };
                absorptions.insert(CriticalPair::Absorption {
                    source,
                    bad: bs,
                    good: gs,
                });
            }
        }
    }
    divergences.into_iter().chain(absorptions).collect()
}

/// Derivations completing `first` and `second` to a common string, with a
/// trace rewriting `first ; left` into `second ; right`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinCertificate {
    pub left: Derivation,
    pub right: Derivation,
    pub trace: ProofTrace,
}

/// A rewriting of `bad ; good` into `replacement`, which has no bad step
/// directly before a good one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbsorptionCertificate {
    pub replacement: Derivation,
    pub trace: ProofTrace,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PairStatus {
    Joined(JoinCertificate),
    Absorbed(AbsorptionCertificate),
    /// Completions exist but their equality could not be established.
    JoinedUnverified {
        left: Derivation,
        right: Derivation,
        diagnostics: Diagnostics,
    },
    Failed(String),
}

impl PairStatus {
    pub fn is_certified(&self) -> bool {
        matches!(self, PairStatus::Joined(_) | PairStatus::Absorbed(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairReport {
    pub pair: CriticalPair,
    pub status: PairStatus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Certified,
    NotCertified,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfluenceReport {
    pub status: Status,
    pub termination: Termination,
    pub pairs: Vec<PairReport>,
    joins: HashMap<(Step, Step), usize>,
}

impl ConfluenceReport {
    pub fn is_certified(&self) -> bool {
        self.status == Status::Certified
    }

    /// Completion of the unwhiskered peak `a | b`, oriented from `a`.
    pub(crate) fn join(&self, a: &Step, b: &Step) -> Option<JoinCertificate> {
        let get = |x: &Step, y: &Step| {
            let i = *self.joins.get(&(x.clone(), y.clone()))?;
            match &self.pairs[i].status {
                PairStatus::Joined(c) => Some(c.clone()),
                _ => None,
            }
        };
        if let Some(c) = get(a, b) {
            return Some(c);
        }
        let c = get(b, a)?;
        Some(JoinCertificate {
            left: c.right,
            right: c.left,
            trace: c.trace.inverse(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EliminationReport {
    pub status: Status,
    pub pairs: Vec<PairReport>,
    absorptions: HashMap<(Step, Step), usize>,
}

impl EliminationReport {
    pub fn is_certified(&self) -> bool {
        self.status == Status::Certified
    }

    pub(crate) fn absorption(&self, bad: &Step, good: &Step) -> Option<&AbsorptionCertificate> {
        let i = *self.absorptions.get(&(bad.clone(), good.clone()))?;
        match &self.pairs[i].status {
            PairStatus::Absorbed(c) => Some(c),
            _ => None,
        }
    }
}

/// Completes a divergence by normalizing both sides, inserting units when the
/// normal forms differ, and asks the engine whether the two paths agree.
pub fn certify_pair(engine: &Engine, pair: &CriticalPair) -> PairStatus {
    let pres = engine.pres();
    match pair {
        CriticalPair::Divergence { first, second, .. } => {
            let (x1, x2) = (first.target(pres), second.target(pres));
            let (Ok((n1, mut left)), Ok((n2, mut right))) = (normalize_good(pres, &x1), normalize_good(pres, &x2))
            else {
                return PairStatus::Failed("normalization did not terminate".into());
            };
            if n1 != n2 {
                if let Some(e) = find_derivation(pres, &n2, &n1, engine.budget()).found() {
                    right = right.then(&e);
                } else if let Some(e) = find_derivation(pres, &n1, &n2, engine.budget()).found() {
                    left = left.then(&e);
                } else {
                    let sig = pres.sig();
                    return PairStatus::Failed(format!(
                        "distinct normal forms {} and {}",
                        sig.show_compact(&n1),
                        sig.show_compact(&n2)
                    ));
                }
            }
            let a = Derivation::single(pres, first.clone()).then(&left);
            let b = Derivation::single(pres, second.clone()).then(&right);
            match engine.search_equal(&a, &b) {
                Verdict::Equal(trace) => PairStatus::Joined(JoinCertificate { left, right, trace }),
                Verdict::Unknown(diagnostics) => PairStatus::JoinedUnverified {
                    left,
                    right,
                    diagnostics,
                },
            }
        }
        CriticalPair::Absorption { source, bad, good } => {
            let d = Derivation {
                source: source.clone(),
                steps: vec![bad.clone(), good.clone()],
            };
            let target = d.target(pres);
            let mut last = None;
            for c in replacements(pres, source, &target) {
                match engine.search_equal(&d, &c) {
                    Verdict::Equal(trace) => {
                        return PairStatus::Absorbed(AbsorptionCertificate { replacement: c, trace })
                    }
                    Verdict::Unknown(diag) => last = Some((c, diag)),
                }
            }
            match last {
                Some((c, diagnostics)) => PairStatus::JoinedUnverified {
                    left: d,
                    right: c,
                    diagnostics,
                },
                None => PairStatus::Failed("no derivation of at most two steps avoids the pattern".into()),
            }
        }
    }
}

/// Candidate replacements `source => target` of at most two steps with no bad
/// step directly followed by a good one, shortest first.
fn replacements(pres: &Presentation, source: &TypedString, target: &TypedString) -> Vec<Derivation> {
    let rules = pres.base_rules();
    let mut out = Vec::new();
    if source == target {
        out.push(Derivation::identity(source.clone()));
    }
    let firsts = crate::rewrite::find_redexes(pres, source, &rules);
    for s in &firsts {
        if &s.target(pres) == target {
            out.push(Derivation::single(pres, s.clone()));
        }
    }
    for s in &firsts {
        let mid = s.target(pres);
        for t in crate::rewrite::find_redexes(pres, &mid, &rules) {
            if s.class(pres) == Class::Bad && t.class(pres) == Class::Good {
                continue;
            }
            if &t.target(pres) == target {
                out.push(Derivation {
                    source: source.clone(),
                    steps: vec![s.clone(), t],
                });
            }
        }
    }
    out
}

/// Termination of the good rules plus certification of every good-good
/// divergence.
pub fn check_good_confluence(engine: &Engine) -> ConfluenceReport {
    let pres = engine.pres();
    let termination = check_termination(pres);
    let mut pairs = Vec::new();
    let mut joins = HashMap::new();
    for pair in critical_pairs(pres).into_iter().filter(|p| p.is_good(pres)) {
        let status = certify_pair(engine, &pair);
        if let CriticalPair::Divergence { first, second, .. } = &pair {
            joins.insert((first.clone(), second.clone()), pairs.len());
        }
        pairs.push(PairReport { pair, status });
    }
    let ok = termination == Termination::Terminating && pairs.iter().all(|p| p.status.is_certified());
    ConfluenceReport {
        status: if ok { Status::Certified } else { Status::NotCertified },
        termination,
        pairs,
        joins,
    }
}

/// Certification of every absorption pair and of every divergence in which a
/// bad step takes part.
pub fn check_bad_elimination(engine: &Engine) -> EliminationReport {
    let pres = engine.pres();
    let mut pairs = Vec::new();
    let mut absorptions = HashMap::new();
    for pair in critical_pairs(pres).into_iter().filter(|p| !p.is_good(pres)) {
        let status = certify_pair(engine, &pair);
        if let CriticalPair::Absorption { bad, good, .. } = &pair {
            absorptions.insert((bad.clone(), good.clone()), pairs.len());
        }
        pairs.push(PairReport { pair, status });
    }
    let ok = pairs.iter().all(|p| p.status.is_certified());
    EliminationReport {
        status: if ok { Status::Certified } else { Status::NotCertified },
        pairs,
        absorptions,
    }
}
