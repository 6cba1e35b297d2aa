//! Brute-force count of derivation classes, used to cross-check the engines.
//! Shares no search code with them: derivations are enumerated outright and
//! merged under exchange squares and equation instances.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::rewrite::{find_redexes, Derivation, Step};
use crate::sig::{Presentation, RuleRef, TypedString};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleBounds {
    pub depth: usize,
    /// Intermediate strings may exceed the longer endpoint by this much.
    pub extra_len: usize,
    pub node_limit: usize,
}

impl Default for OracleBounds {
    fn default() -> Self {
        OracleBounds {
            depth: 8,
            extra_len: 1,
            node_limit: 200_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomCount {
    pub classes: usize,
    /// Least derivation of each class.
    pub representatives: Vec<Derivation>,
    pub derivations: usize,
    /// False when the node limit cut the enumeration short.
    pub complete: bool,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Counts derivations `x => target` with at most `bounds.depth` steps of
/// `rules`, up to exchange of disjoint steps and whiskered equations.
pub fn count_hom_classes(
    pres: &Presentation,
    x: &TypedString,
    target: &TypedString,
    rules: &[RuleRef],
    bounds: OracleBounds,
) -> HomCount {
    let max_len = x.len().max(target.len()) + bounds.extra_len;
    let dist = distances(pres, x, target, rules, max_len, bounds.depth);
    let mut all = Vec::new();
    let mut complete = true;
    let mut stack = vec![Derivation::identity(x.clone())];
    while let Some(d) = stack.pop() {
        let cur = d.target(pres);
        if &cur == target {
            all.push(d.clone());
            if all.len() >= bounds.node_limit {
                complete = false;
                break;
            }
        }
        let left = bounds.depth - d.len();
        if left == 0 {
            continue;
        }
        for step in find_redexes(pres, &cur, rules) {
            let t = step.target(pres);
            if dist.get(&t).is_some_and(|&k| k < left) {
                let mut next = d.clone();
                next.steps.push(step);
                stack.push(next);
            }
        }
    }
    all.sort();
    all.dedup();
    let index: HashMap<Derivation, usize> = all.iter().cloned().enumerate().map(|(i, d)| (d, i)).collect();
    let mut uf = UnionFind((0..all.len()).collect());
    for (i, d) in all.iter().enumerate() {
        let strings = d.strings(pres);
        for nb in exchanged(pres, d, &strings).into_iter().chain(equation_instances(pres, d, &strings)) {
            if let Some(&j) = index.get(&nb) {
                uf.union(i, j);
            }
        }
    }
    let mut reps: Vec<Derivation> = Vec::new();
    let mut roots = HashSet::new();
    for (i, d) in all.iter().enumerate() {
        if roots.insert(uf.find(i)) {
            reps.push(d.clone());
        }
    }
    HomCount {
        classes: reps.len(),
        representatives: reps,
        derivations: all.len(),
        complete,
    }
}

/// Steps needed from each reachable string to `target`, within the bounds.
fn distances(
    pres: &Presentation,
    x: &TypedString,
    target: &TypedString,
    rules: &[RuleRef],
    max_len: usize,
    depth: usize,
) -> HashMap<TypedString, usize> {
    let mut preds: HashMap<TypedString, Vec<TypedString>> = HashMap::new();
    let mut seen = HashSet::from([x.clone()]);
    let mut layer = vec![x.clone()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for s in &layer {
            for step in find_redexes(pres, s, rules) {
                let t = step.target(pres);
                if t.len() > max_len {
                    continue;
                }
                preds.entry(t.clone()).or_default().push(s.clone());
                if seen.insert(t.clone()) {
                    next.push(t);
                }
            }
        }
        layer = next;
    }
    let mut dist = HashMap::new();
    if !seen.contains(target) {
        return dist;
    }
    dist.insert(target.clone(), 0);
    let mut queue = VecDeque::from([target.clone()]);
    while let Some(s) = queue.pop_front() {
        let k = dist[&s];
        for p in preds.get(&s).into_iter().flatten() {
            if !dist.contains_key(p) {
                dist.insert(p.clone(), k + 1);
                queue.push_back(p.clone());
            }
        }
    }
    dist
}

/// Every derivation obtained by swapping one pair of adjacent independent
/// steps. Independence is read off by tagging each generator occurrence and
/// tracking which tags a step consumes and creates.
fn exchanged(pres: &Presentation, d: &Derivation, strings: &[TypedString]) -> Vec<Derivation> {
    let mut out = Vec::new();
    for i in 0..d.len().saturating_sub(1) {
        if let Some((t1, t2)) = swap(pres, &strings[i], &d.steps[i], &d.steps[i + 1]) {
            if t2.target(pres) != strings[i + 2] {
                continue;
            }
            let mut steps = d.steps.clone();
            steps[i] = t1;
            steps[i + 1] = t2;
            out.push(Derivation {
                source: d.source.clone(),
                steps,
            });
        }
    }
    out
}

fn index_of(tags: &[usize], tag: usize) -> usize {
    tags.iter().position(|&t| t == tag).expect("tag present")
}

fn swap(pres: &Presentation, x: &TypedString, s1: &Step, s2: &Step) -> Option<(Step, Step)> {
    let n = x.len();
    let xt: Vec<usize> = (0..n).collect();
    let (a1, l1, r1) = (s1.pos(), pres.lhs(s1.rule).len(), pres.rhs(s1.rule).len());
    let (a2, l2) = (s2.pos(), pres.lhs(s2.rule).len());
    let created: Vec<usize> = (n..n + r1).collect();
    let mut yt = xt[..a1].to_vec();
    yt.extend(&created);
    yt.extend(&xt[a1 + l1..]);
    let is_new = |t: usize| t >= n;

    // Where s2 applies in x, and whether it sits left of s1.
    let (p2, s2_left) = if l2 > 0 {
        let consumed = &yt[a2..a2 + l2];
        if consumed.iter().any(|&t| is_new(t)) {
            return None;
        }
        let first = consumed[0];
        if consumed.iter().enumerate().any(|(k, &t)| t != first + k) {
            return None;
        }
        (first, first < a1)
    } else {
        if (a2 > a1 && a2 < a1 + r1) || (r1 == 0 && a2 == a1) {
            return None;
        }
        if a2 <= a1 {
            (a2, true)
        } else {
            let left = yt[a2 - 1];
            (if is_new(left) { a1 + l1 } else { left + 1 }, false)
        }
    };
    let t1 = Step::at(pres, x, p2, s2.rule)?;
    let r2 = pres.rhs(s2.rule).len();
    let mut xt2 = xt[..p2].to_vec();
    xt2.extend(n + r1..n + r1 + r2);
    xt2.extend(&xt[p2 + l2..]);
    let p1 = if l1 > 0 {
        index_of(&xt2, a1)
    } else if s2_left {
        if a1 < n {
            index_of(&xt2, a1)
        } else {
            xt2.len()
        }
    } else if a1 == 0 {
        0
    } else {
        index_of(&xt2, a1 - 1) + 1
    };
    let t2 = Step::at(pres, &t1.target(pres), p1, s1.rule)?;
    Some((t1, t2))
}

/// Every derivation obtained by rewriting one whiskered instance of an
/// equation's left side into its right side. Each instance is seen from the
/// derivation holding the left side, so one direction suffices for the union.
fn equation_instances(pres: &Presentation, d: &Derivation, strings: &[TypedString]) -> Vec<Derivation> {
    let sig = pres.sig();
    let mut out = Vec::new();
    for (k, s) in strings.iter().enumerate() {
        for eq in pres.equations() {
            {
                let (from, to) = (&eq.left, &eq.right);
                let src = &from.source;
                if k + from.len() > d.len() || src.len() > s.len() {
                    continue;
                }
                if from.steps.first().is_some_and(|f| f.rule != d.steps[k].rule) {
                    continue;
                }
                for a in 0..=s.len() - src.len() {
                    if from.steps.first().is_some_and(|f| a + f.pos() != d.steps[k].pos()) {
                        continue;
                    }
                    let fits = if src.is_empty() {
                        sig.boundary_cell(s, a) == src.dom()
                    } else {
                        s.gens()[a..a + src.len()] == *src.gens()
                    };
                    if !fits {
                        continue;
                    }
                    let left = sig.substring(s, 0, a);
                    let right = sig.substring(s, a + src.len(), s.len());
                    let wrap = |st: &Step| Step {
                        left: sig.concat(&left, &st.left).expect("context composes"),
                        rule: st.rule,
                        right: sig.concat(&st.right, &right).expect("context composes"),
                    };
                    if from.steps.iter().map(wrap).ne(d.steps[k..k + from.len()].iter().cloned()) {
                        continue;
                    }
                    let mut steps = d.steps[..k].to_vec();
                    steps.extend(to.steps.iter().map(wrap));
                    steps.extend_from_slice(&d.steps[k + from.len()..]);
                    out.push(Derivation {
                        source: d.source.clone(),
                        steps,
                    });
                }
            }
        }
    }
    out
}
