//! Redexes, single steps, reduction strategies and termination.

use std::cmp::Ordering;
use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::sig::{Class, Presentation, RuleRef, Signature, TypedString, Universe};
use crate::Budget;

/// One rule application in a whisker context: `left · rule · right`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Step {
    pub left: TypedString,
    pub rule: RuleRef,
    pub right: TypedString,
}

impl Step {
    /// The step applying `rule` at offset `pos` of `source`, if its left-hand
    /// side occurs there. An empty left-hand side matches at boundary `pos`
    /// when the boundary cell agrees with the rule's cell.
    pub fn at(pres: &Presentation, source: &TypedString, pos: usize, rule: RuleRef) -> Option<Step> {
        let sig = pres.sig();
        let lhs = pres.lhs(rule);
        let end = pos + lhs.len();
        if end > source.len() {
            return None;
        }
        if lhs.is_empty() {
            if sig.boundary_cell(source, pos) != lhs.dom() {
                return None;
            }
        } else if &source.gens()[pos..end] != lhs.gens() {
            return None;
        }
        Some(Step {
            left: sig.substring(source, 0, pos),
            rule,
            right: sig.substring(source, end, source.len()),
        })
    }

    pub fn pos(&self) -> usize {
        self.left.len()
    }

    pub fn source(&self, pres: &Presentation) -> TypedString {
        pres.sig().join3(&self.left, pres.lhs(self.rule), &self.right)
    }

    pub fn target(&self, pres: &Presentation) -> TypedString {
        pres.sig().join3(&self.left, pres.rhs(self.rule), &self.right)
    }

    /// Half-open redex interval in the source.
    pub fn redex(&self, pres: &Presentation) -> (usize, usize) {
        (self.pos(), self.pos() + pres.lhs(self.rule).len())
    }

    /// Half-open interval the rule's right-hand side occupies in the target.
    pub fn output(&self, pres: &Presentation) -> (usize, usize) {
        (self.pos(), self.pos() + pres.rhs(self.rule).len())
    }

    pub fn class(&self, pres: &Presentation) -> Class {
        pres.class(self.rule)
    }

    /// Extends both contexts. Fails when the extension does not compose.
    pub fn whiskered(&self, sig: &Signature, left: &TypedString, right: &TypedString) -> Option<Step> {
        Some(Step {
            left: sig.concat(left, &self.left).ok()?,
            rule: self.rule,
            right: sig.concat(&self.right, right).ok()?,
        })
    }

    /// `(T) mu ()` style rendering.
    pub fn show(&self, pres: &Presentation) -> String {
        let sig = pres.sig();
        let ctx = |s: &TypedString| {
            if s.is_empty() {
                String::new()
            } else {
                sig.show(s)
            }
        };
        format!("({}) {} ({})", ctx(&self.left), pres.rule_name(self.rule), ctx(&self.right))
    }

    /// `T mu` style label as written in diagrams.
    pub fn label(&self, pres: &Presentation) -> String {
        let sig = pres.sig();
        let mut parts = Vec::new();
        if !self.left.is_empty() {
            parts.push(sig.show_compact(&self.left));
        }
        parts.push(pres.rule_name(self.rule).to_string());
        if !self.right.is_empty() {
            parts.push(sig.show_compact(&self.right));
        }
        parts.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("step {index} does not start at the previous target ({expected} vs {found})")]
    Discontinuous {
        index: usize,
        expected: String,
        found: String,
    },
    #[error("rewriting did not terminate within {0} steps")]
    StepLimit(usize),
}

/// A composable sequence of steps; the empty sequence is the identity 2-cell.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Derivation {
    pub source: TypedString,
    pub steps: Vec<Step>,
}

impl Derivation {
    pub fn identity(source: TypedString) -> Self {
        Derivation {
            source,
            steps: Vec::new(),
        }
    }

    pub fn new(pres: &Presentation, source: TypedString, steps: Vec<Step>) -> Result<Self, RewriteError> {
        let mut cur = source.clone();
        for (index, s) in steps.iter().enumerate() {
            let src = s.source(pres);
            if src != cur {
                return Err(RewriteError::Discontinuous {
                    index,
                    expected: pres.sig().show(&cur),
                    found: pres.sig().show(&src),
                });
            }
            cur = s.target(pres);
        }
        Ok(Derivation { source, steps })
    }

    pub fn single(pres: &Presentation, step: Step) -> Self {
        Derivation {
            source: step.source(pres),
            steps: vec![step],
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn target(&self, pres: &Presentation) -> TypedString {
        match self.steps.last() {
            Some(s) => s.target(pres),
            None => self.source.clone(),
        }
    }

    /// The string before each step, followed by the target.
    pub fn strings(&self, pres: &Presentation) -> Vec<TypedString> {
        let mut out = vec![self.source.clone()];
        out.extend(self.steps.iter().map(|s| s.target(pres)));
        out
    }

    /// The string before step `i` (or the target when `i == len`).
    pub fn string_at(&self, pres: &Presentation, i: usize) -> TypedString {
        if i == 0 {
            self.source.clone()
        } else {
            self.steps[i - 1].target(pres)
        }
    }

    /// Vertical composition `self` then `other`.
    pub fn then(&self, other: &Derivation) -> Derivation {
        let mut steps = self.steps.clone();
        steps.extend(other.steps.iter().cloned());
        Derivation {
            source: self.source.clone(),
            steps,
        }
    }

    pub fn max_len(&self, pres: &Presentation) -> usize {
        self.strings(pres).iter().map(TypedString::len).max().unwrap_or(0)
    }

    pub fn show(&self, pres: &Presentation) -> String {
        if self.steps.is_empty() {
            return format!("id({})", pres.sig().show(&self.source));
        }
        let steps: Vec<String> = self.steps.iter().map(|s| s.show(pres)).collect();
        format!("{{ {} }}", steps.join(" ; "))
    }
}

/// All steps out of `s` using `rules`, ordered by position and then by the
/// order rules are listed in the presentation.
pub fn find_redexes(pres: &Presentation, s: &TypedString, rules: &[RuleRef]) -> Vec<Step> {
    let mut out = Vec::new();
    for pos in 0..=s.len() {
        let mut here: Vec<RuleRef> = rules.to_vec();
        here.sort();
        here.dedup();
        for r in here {
            if let Some(step) = Step::at(pres, s, pos, r) {
                out.push(step);
            }
        }
    }
    out
}

pub fn apply_step(pres: &Presentation, step: &Step) -> TypedString {
    step.target(pres)
}

/// Ordering key of a string: length first, then lexicographic under the
/// generator precedence.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Measure {
    len: usize,
    word: Vec<usize>,
}

impl Measure {
    pub fn of(pres: &Presentation, s: &TypedString) -> Measure {
        Measure {
            len: s.len(),
            word: s.gens().iter().map(|g| pres.rank(*g)).collect(),
        }
    }
}

pub fn compare_strings(pres: &Presentation, a: &TypedString, b: &TypedString) -> Ordering {
    Measure::of(pres, a).cmp(&Measure::of(pres, b))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Termination {
    Terminating,
    /// A good rule that fails to decrease the measure, with a rewrite cycle
    /// through it when one exists within a small search.
    NotTerminating { rule: RuleRef, cycle: Option<Derivation> },
}

/// Every good rule must strictly decrease the measure; since length is
/// additive and lexicographic order on equal-length words is stable under
/// common contexts, this makes every good step decreasing.
pub fn check_termination(pres: &Presentation) -> Termination {
    for r in pres.good_rules() {
        if compare_strings(pres, pres.rhs(r), pres.lhs(r)) != Ordering::Less {
            let cycle = find_good_cycle(pres, pres.lhs(r), 8);
            return Termination::NotTerminating { rule: r, cycle };
        }
    }
    Termination::Terminating
}

fn find_good_cycle(pres: &Presentation, start: &TypedString, depth: usize) -> Option<Derivation> {
    let good = pres.good_rules();
    let mut queue = VecDeque::from([Derivation::identity(start.clone())]);
    while let Some(d) = queue.pop_front() {
        if d.len() >= depth {
            continue;
        }
        let cur = d.target(pres);
        for step in find_redexes(pres, &cur, &good) {
            let mut next = d.clone();
            let t = step.target(pres);
            next.steps.push(step);
            if &t == start {
                return Some(next);
            }
            if t.len() <= start.len() {
                queue.push_back(next);
            }
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Leftmost,
    Rightmost,
}

const NORMALIZE_LIMIT: usize = 1 << 16;

/// Good-rule normal form by the leftmost-first strategy.
pub fn normalize_good(pres: &Presentation, s: &TypedString) -> Result<(TypedString, Derivation), RewriteError> {
    normalize_with(pres, s, Strategy::Leftmost)
}

pub fn normalize_with(
    pres: &Presentation,
    s: &TypedString,
    strategy: Strategy,
) -> Result<(TypedString, Derivation), RewriteError> {
    let good = pres.good_rules();
    let mut d = Derivation::identity(s.clone());
    let mut cur = s.clone();
    loop {
        let redexes = find_redexes(pres, &cur, &good);
        let next = match strategy {
            Strategy::Leftmost => redexes.into_iter().next(),
            Strategy::Rightmost => redexes.into_iter().max_by_key(|st| st.pos()),
        };
        let Some(step) = next else {
            return Ok((cur, d));
        };
        if d.len() >= NORMALIZE_LIMIT {
            return Err(RewriteError::StepLimit(NORMALIZE_LIMIT));
        }
        cur = step.target(pres);
        d.steps.push(step);
    }
}

pub fn is_good_normal(pres: &Presentation, s: &TypedString) -> bool {
    find_redexes(pres, s, &pres.good_rules()).is_empty()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Search {
    Found(Derivation),
    /// Not a proof of nonexistence; records which bound was hit.
    NotFound { max_len: usize, depth: usize, exhausted: bool },
}

impl Search {
    pub fn found(self) -> Option<Derivation> {
        match self {
            Search::Found(d) => Some(d),
            Search::NotFound { .. } => None,
        }
    }
}

/// Finds a derivation `s => target`: good normalization followed by canonical
/// insertions when bad rules are single-generator units, otherwise bounded
/// breadth-first search over all base rules.
pub fn find_derivation(pres: &Presentation, s: &TypedString, target: &TypedString, budget: &Budget) -> Search {
    if s.dom() != target.dom() || s.cod() != target.cod() {
        return Search::NotFound {
            max_len: 0,
            depth: 0,
            exhausted: true,
        };
    }
    if let Ok((nf, d)) = normalize_good(pres, s) {
        if &nf == target {
            return Search::Found(d);
        }
        if let Some(ins) = insert_units(pres, &nf, target) {
            return Search::Found(d.then(&ins));
        }
    }
    search_derivation(pres, s, target, &pres.base_rules(), None, budget)
}

/// Inserts the generators of `target` missing from `s`, rightmost first, using
/// rules `I => g`. Requires `s` to embed in `target` as a subsequence.
fn insert_units(pres: &Presentation, s: &TypedString, target: &TypedString) -> Option<Derivation> {
    let (sg, tg) = (s.gens(), target.gens());
    let mut keep = Vec::with_capacity(sg.len());
    let mut j = 0;
    for (i, g) in tg.iter().enumerate() {
        if j < sg.len() && sg[j] == *g {
            keep.push(i);
            j += 1;
        }
    }
    if j != sg.len() {
        return None;
    }
    let missing: Vec<usize> = (0..tg.len()).filter(|i| !keep.contains(i)).collect();
    let mut d = Derivation::identity(s.clone());
    let mut cur = s.clone();
    // Inserting right to left keeps each target index equal to its final position
    // among the generators already present.
    let mut present: Vec<usize> = keep.clone();
    for &i in missing.iter().rev() {
        let pos = present.iter().filter(|&&k| k < i).count();
        let g = tg[i];
        let rule = pres.bad_rules().into_iter().find(|r| {
            pres.lhs(*r).is_empty() && pres.rhs(*r).gens() == [g]
        })?;
        let step = Step::at(pres, &cur, pos, rule)?;
        cur = step.target(pres);
        d.steps.push(step);
        present.push(i);
    }
    (&cur == target).then_some(d)
}

/// Breadth-first search for a shortest derivation using `rules`, with
/// intermediate strings bounded by `|s| + budget.length_slack` and optionally
/// restricted to a universe.
pub fn search_derivation(
    pres: &Presentation,
    s: &TypedString,
    target: &TypedString,
    rules: &[RuleRef],
    within: Option<&Universe>,
    budget: &Budget,
) -> Search {
    let max_len = s.len().max(target.len()) + budget.length_slack;
    if s == target {
        return Search::Found(Derivation::identity(s.clone()));
    }
    let mut parent: HashMap<TypedString, Option<(TypedString, Step)>> = HashMap::from([(s.clone(), None)]);
    let mut frontier = vec![s.clone()];
    let mut hit_len = false;
    for depth in 0..budget.max_depth {
        let mut next = Vec::new();
        for cur in &frontier {
            for step in find_redexes(pres, cur, rules) {
                let t = step.target(pres);
                if t.len() > max_len {
                    hit_len = true;
                    continue;
                }
                if within.is_some_and(|u| !u.contains(&t)) || parent.contains_key(&t) {
                    continue;
                }
                parent.insert(t.clone(), Some((cur.clone(), step)));
                if &t == target {
                    let mut steps = Vec::new();
                    let mut at = t;
                    while let Some(Some((p, st))) = parent.get(&at) {
                        steps.push(st.clone());
                        at = p.clone();
                    }
                    steps.reverse();
                    return Search::Found(Derivation {
                        source: s.clone(),
                        steps,
                    });
                }
                next.push(t);
            }
        }
        if next.is_empty() {
            return Search::NotFound {
                max_len,
                depth: depth + 1,
                exhausted: !hit_len,
            };
        }
        frontier = next;
    }
    Search::NotFound {
        max_len,
        depth: budget.max_depth,
        exhausted: false,
    }
}

pub fn enumerate_strings(pres: &Presentation, universe: &Universe, max_len: usize) -> Vec<TypedString> {
    universe.enumerate(pres, max_len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sig::{build_presentation, preset, RuleDecl, StrDecl};

    fn s(p: &Presentation, text: &str) -> TypedString {
        p.sig().parse_string(text).unwrap()
    }

    fn r(p: &Presentation, name: &str) -> RuleRef {
        p.rule_by_name(name).unwrap()
    }

    #[test]
    fn overlapping_mu_redexes_in_t_cubed() {
        let p = preset("monad").unwrap();
        let steps = find_redexes(&p, &s(&p, "T T T"), &[r(&p, "mu")]);
        let spans: Vec<_> = steps.iter().map(|st| st.redex(&p)).collect();
        assert_eq!(spans, [(0, 2), (1, 3)]);
    }

    #[test]
    fn unit_matches_at_every_boundary() {
        let p = preset("monad").unwrap();
        let steps = find_redexes(&p, &s(&p, "T"), &[r(&p, "eta")]);
        assert_eq!(steps.iter().map(Step::pos).collect::<Vec<_>>(), [0, 1]);
        let steps = find_redexes(&p, &s(&p, "T T T"), &[r(&p, "eta")]);
        assert_eq!(steps.len(), 4);
    }

    #[test]
    fn counit_only_matches_fg() {
        let p = preset("adjunction").unwrap();
        assert!(find_redexes(&p, &s(&p, "G F"), &[r(&p, "eps")]).is_empty());
        let steps = find_redexes(&p, &s(&p, "F G"), &[r(&p, "eps")]);
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].redex(&p), (0, 2));
        // eta only fits at C boundaries of F G F: after the first F and at the end.
        let steps = find_redexes(&p, &s(&p, "F G F"), &[r(&p, "eta")]);
        assert_eq!(steps.iter().map(Step::pos).collect::<Vec<_>>(), [1, 3]);
    }

    #[test]
    fn apply_step_examples() {
        let p = preset("monad").unwrap();
        let st = Step::at(&p, &s(&p, "T T T"), 0, r(&p, "mu")).unwrap();
        assert_eq!(apply_step(&p, &st), s(&p, "T T"));
        let st = Step::at(&p, &s(&p, "T T"), 1, r(&p, "eta")).unwrap();
        assert_eq!(apply_step(&p, &st), s(&p, "T T T"));

        let p = preset("composite-monad").unwrap();
        let st = Step::at(&p, &s(&p, "T P"), 0, r(&p, "theta")).unwrap();
        assert_eq!(apply_step(&p, &st), s(&p, "P T"));
    }

    #[test]
    fn classification_of_preset_rules() {
        let p = preset("composite-monad").unwrap();
        for (name, class) in [
            ("muP", Class::Good),
            ("muT", Class::Good),
            ("theta", Class::Good),
            ("etaP", Class::Bad),
            ("etaT", Class::Bad),
        ] {
            assert_eq!(p.class(r(&p, name)), class, "{name}");
        }
        let p = preset("monad").unwrap();
        assert_eq!(p.class(r(&p, "eta")), Class::Bad);
        assert_eq!(p.class(r(&p, "mu")), Class::Good);
        let p = preset("adjunction").unwrap();
        assert_eq!(p.class(r(&p, "eta")), Class::Bad);
        assert_eq!(p.class(r(&p, "eps")), Class::Good);
    }

    #[test]
    fn termination_checks() {
        assert_eq!(check_termination(&preset("monad").unwrap()), Termination::Terminating);
        assert_eq!(check_termination(&preset("composite-monad").unwrap()), Termination::Terminating);
        assert_eq!(check_termination(&preset("adjunction").unwrap()), Termination::Terminating);

        let mut decls = preset("composite-monad").unwrap().declarations();
        decls.rules.push(RuleDecl {
            name: "unswap".into(),
            lhs: StrDecl::gens(&["P", "T"]),
            rhs: StrDecl::gens(&["T", "P"]),
        });
        let p = build_presentation(&decls).unwrap();
        match check_termination(&p) {
            Termination::NotTerminating { rule, cycle } => {
                assert_eq!(p.rule_name(rule), "unswap");
                let cycle = cycle.expect("theta undoes unswap");
                assert_eq!(cycle.len(), 2);
                assert_eq!(cycle.target(&p), cycle.source);
            }
            Termination::Terminating => panic!("PT => TP must be flagged"),
        }
    }

    #[test]
    fn swapping_precedence_breaks_termination() {
        let mut decls = preset("composite-monad").unwrap().declarations();
        decls.precedence = Some(vec!["T".into(), "P".into()]);
        let p = build_presentation(&decls).unwrap();
        assert!(matches!(
            check_termination(&p),
            Termination::NotTerminating { rule, .. } if p.rule_name(rule) == "theta"
        ));
    }

    #[test]
    fn monad_powers_normalize_to_t() {
        let p = preset("monad").unwrap();
        for n in 1..=7 {
            let x = TypedString::identity(p.sig().cell_by_name("C").unwrap());
            let word = vec![p.sig().gen_by_name("T").unwrap(); n];
            let x = p.sig().string(word, Some(x.dom())).unwrap();
            let (nf, d) = normalize_good(&p, &x).unwrap();
            assert_eq!(nf, s(&p, "T"));
            assert_eq!(d.len(), n - 1);
        }
    }

    #[test]
    fn composite_normal_forms() {
        let p = preset("composite-monad").unwrap();
        let (nf, _) = normalize_good(&p, &s(&p, "T P T P")).unwrap();
        assert_eq!(nf, s(&p, "P T"));
        let (nf, d) = normalize_good(&p, &s(&p, "P T")).unwrap();
        assert_eq!(nf, s(&p, "P T"));
        assert!(d.is_empty());
    }

    #[test]
    fn strategies_agree_on_composite() {
        let p = preset("composite-monad").unwrap();
        let u = p.universe_by_name("PTstar").unwrap();
        for x in u.enumerate(&p, 6) {
            let (a, _) = normalize_with(&p, &x, Strategy::Leftmost).unwrap();
            let (b, _) = normalize_with(&p, &x, Strategy::Rightmost).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn find_derivation_examples() {
        let p = preset("composite-monad").unwrap();
        let b = Budget::default();
        let one = TypedString::identity(p.sig().cell_by_name("C").unwrap());
        let d = find_derivation(&p, &one, &s(&p, "P T"), &b).found().unwrap();
        let shown: Vec<_> = d.steps.iter().map(|st| st.show(&p)).collect();
        assert_eq!(shown, ["() etaT ()", "() etaP (T)"]);

        let d = find_derivation(&p, &s(&p, "P"), &s(&p, "P T"), &b).found().unwrap();
        assert_eq!(d.steps.iter().map(|st| st.show(&p)).collect::<Vec<_>>(), ["(P) etaT ()"]);

        let d = find_derivation(&p, &s(&p, "T"), &s(&p, "T"), &b).found().unwrap();
        assert!(d.is_empty());
    }

    #[test]
    fn bounded_search_reports_bounds() {
        let p = preset("adjunction").unwrap();
        let b = Budget::default();
        // F cannot reach F G F G F by eps alone, and the unit only ever helps.
        let rules = [r(&p, "eps")];
        match search_derivation(&p, &s(&p, "F"), &s(&p, "F G F"), &rules, None, &b) {
            Search::NotFound { exhausted, .. } => assert!(exhausted),
            Search::Found(_) => panic!("eps never lengthens"),
        }
        let d = search_derivation(&p, &s(&p, "F"), &s(&p, "F G F"), &p.base_rules(), None, &b)
            .found()
            .unwrap();
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn derivation_rejects_discontinuity() {
        let p = preset("monad").unwrap();
        let st = Step::at(&p, &s(&p, "T T"), 0, r(&p, "mu")).unwrap();
        let err = Derivation::new(&p, s(&p, "T T T"), vec![st]).unwrap_err();
        assert!(matches!(err, RewriteError::Discontinuous { index: 0, .. }));
    }
}
