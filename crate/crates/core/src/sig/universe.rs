//! Regular universes of strings.
//!
//! Patterns are regular expressions over generator names. They compile to a
//! DFA over generator ids; running it in lockstep with the typing automaton
//! (current boundary cell) gives a decision procedure for membership,
//! well-typedness and closure under finitely many word substitutions.

use std::collections::{BTreeSet, HashMap, VecDeque};

use super::{CellId, GenId, Presentation, RuleRef, Signature, TypedString};
use crate::rewrite::Step;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pattern {
    Empty,
    Gen(GenId),
    Concat(Vec<Pattern>),
    Alt(Vec<Pattern>),
    Star(Box<Pattern>),
    Plus(Box<Pattern>),
}

impl Pattern {
    fn concat(parts: Vec<Pattern>) -> Pattern {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Pattern::Concat(inner) => flat.extend(inner),
                Pattern::Empty => {}
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Pattern::Empty,
            1 => flat.pop().unwrap(),
            _ => Pattern::Concat(flat),
        }
    }

    fn alt(parts: Vec<Pattern>) -> Pattern {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Pattern::Alt(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            Pattern::Alt(flat)
        }
    }

    /// Generators occurring in the pattern, in index order.
    pub fn generators(&self) -> Vec<GenId> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(p) = stack.pop() {
            match p {
                Pattern::Empty => {}
                Pattern::Gen(g) => out.push(*g),
                Pattern::Concat(ps) | Pattern::Alt(ps) => stack.extend(ps.iter()),
                Pattern::Star(p) | Pattern::Plus(p) => stack.push(p),
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Parses `F (G F)*`, `(P|T)*`, `T+`, `1` (empty word). Adjacent names may
    /// be run together (`GF`) when they split uniquely into declared generators
    /// by longest match.
    pub fn parse(sig: &Signature, text: &str) -> Result<Pattern, String> {
        let tokens = tokenize(sig, text)?;
        let mut p = PatParser { tokens, pos: 0 };
        let pat = p.alt()?;
        if p.pos != p.tokens.len() {
            return Err(format!("unexpected `{}` in pattern", p.tokens[p.pos].show(sig)));
        }
        Ok(pat)
    }

    pub fn display(&self, sig: &Signature) -> String {
        self.show(sig, 0)
    }

    // prec: 0 = alternation context, 1 = concatenation, 2 = postfix operand
    fn show(&self, sig: &Signature, prec: u8) -> String {
        let wrap = |s: String, need: bool| if need { format!("({s})") } else { s };
        match self {
            Pattern::Empty => "1".to_string(),
            Pattern::Gen(g) => sig.gen(*g).name.clone(),
            Pattern::Concat(ps) => wrap(
                ps.iter().map(|p| p.show(sig, 1)).collect::<Vec<_>>().join(" "),
                prec >= 2,
            ),
            Pattern::Alt(ps) => wrap(
                ps.iter().map(|p| p.show(sig, 0)).collect::<Vec<_>>().join(" | "),
                prec >= 1,
            ),
            Pattern::Star(p) => format!("{}*", p.show(sig, 2)),
            Pattern::Plus(p) => format!("{}+", p.show(sig, 2)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Gen(GenId),
    One,
    LParen,
    RParen,
    Bar,
    Star,
    Plus,
}

impl Tok {
    fn show(&self, sig: &Signature) -> String {
        match self {
            Tok::Gen(g) => sig.gen(*g).name.clone(),
            Tok::One => "1".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::Bar => "|".into(),
            Tok::Star => "*".into(),
            Tok::Plus => "+".into(),
        }
    }
}

fn tokenize(sig: &Signature, text: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            '|' => {
                out.push(Tok::Bar);
                i += 1;
            }
            '*' => {
                out.push(Tok::Star);
                i += 1;
            }
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            c if c.is_alphanumeric() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                if word == "1" {
                    out.push(Tok::One);
                    continue;
                }
                split_word(sig, &word, &mut out)?;
            }
            other => return Err(format!("unexpected character `{other}` in pattern")),
        }
    }
    Ok(out)
}

fn split_word(sig: &Signature, word: &str, out: &mut Vec<Tok>) -> Result<(), String> {
    if let Some(g) = sig.gen_by_name(word) {
        out.push(Tok::Gen(g));
        return Ok(());
    }
    let mut rest = word;
    while !rest.is_empty() {
        let best = sig
            .gens()
            .iter()
            .enumerate()
            .filter(|(_, g)| rest.starts_with(g.name.as_str()))
            .max_by_key(|(_, g)| g.name.len());
        match best {
            Some((i, g)) => {
                out.push(Tok::Gen(GenId(i)));
                rest = &rest[g.name.len()..];
            }
            None => return Err(format!("unknown generator in `{word}`")),
        }
    }
    Ok(())
}

struct PatParser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl PatParser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn alt(&mut self) -> Result<Pattern, String> {
        let mut branches = vec![self.concat()?];
        while self.peek() == Some(&Tok::Bar) {
            self.pos += 1;
            branches.push(self.concat()?);
        }
        Ok(Pattern::alt(branches))
    }

    fn concat(&mut self) -> Result<Pattern, String> {
        let mut parts = Vec::new();
        while let Some(t) = self.peek() {
            if matches!(t, Tok::Bar | Tok::RParen) {
                break;
            }
            parts.push(self.postfix()?);
        }
        Ok(Pattern::concat(parts))
    }

    fn postfix(&mut self) -> Result<Pattern, String> {
        let mut p = self.atom()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => p = Pattern::Star(Box::new(p)),
                Some(Tok::Plus) => p = Pattern::Plus(Box::new(p)),
                _ => return Ok(p),
            }
            self.pos += 1;
        }
    }

    fn atom(&mut self) -> Result<Pattern, String> {
        let t = self.peek().cloned().ok_or("unexpected end of pattern")?;
        self.pos += 1;
        match t {
            Tok::Gen(g) => Ok(Pattern::Gen(g)),
            Tok::One => Ok(Pattern::Empty),
            Tok::LParen => {
                if self.peek() == Some(&Tok::RParen) {
                    self.pos += 1;
                    return Ok(Pattern::Empty);
                }
                let inner = self.alt()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err("missing `)` in pattern".into());
                }
                self.pos += 1;
                Ok(inner)
            }
            other => Err(format!("unexpected operator `{:?}` in pattern", other)),
        }
    }
}

// ---------------------------------------------------------------------------
// Automata

#[derive(Default)]
struct Nfa {
    eps: Vec<Vec<usize>>,
    trans: Vec<Vec<(GenId, usize)>>,
}

impl Nfa {
    fn state(&mut self) -> usize {
        self.eps.push(Vec::new());
        self.trans.push(Vec::new());
        self.eps.len() - 1
    }

    /// Thompson construction; returns (start, accept).
    fn build(&mut self, p: &Pattern) -> (usize, usize) {
        match p {
            Pattern::Empty => {
                let s = self.state();
                (s, s)
            }
            Pattern::Gen(g) => {
                let (s, t) = (self.state(), self.state());
                self.trans[s].push((*g, t));
                (s, t)
            }
            Pattern::Concat(ps) => {
                let (start, mut end) = self.build(&ps[0]);
                for q in &ps[1..] {
                    let (s, t) = self.build(q);
                    self.eps[end].push(s);
                    end = t;
                }
                (start, end)
            }
            Pattern::Alt(ps) => {
                let (s, t) = (self.state(), self.state());
                for q in ps {
                    let (a, b) = self.build(q);
                    self.eps[s].push(a);
                    self.eps[b].push(t);
                }
                (s, t)
            }
            Pattern::Star(q) => {
                let (s, t) = (self.state(), self.state());
                let (a, b) = self.build(q);
                self.eps[s].extend([a, t]);
                self.eps[b].extend([a, t]);
                (s, t)
            }
            Pattern::Plus(q) => {
                let (s, t) = (self.state(), self.state());
                let (a, b) = self.build(q);
                self.eps[s].push(a);
                self.eps[b].extend([a, t]);
                (s, t)
            }
        }
    }

    fn closure(&self, set: &mut BTreeSet<usize>) {
        let mut stack: Vec<usize> = set.iter().copied().collect();
        while let Some(s) = stack.pop() {
            for &t in &self.eps[s] {
                if set.insert(t) {
                    stack.push(t);
                }
            }
        }
    }
}

/// Complete DFA over generator ids. State 0 is the start state.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Dfa {
    trans: Vec<Vec<usize>>,
    accepting: Vec<bool>,
}

impl Dfa {
    fn from_pattern(p: &Pattern, alphabet: usize) -> Dfa {
        let mut nfa = Nfa::default();
        let (start, accept) = nfa.build(p);
        let mut init = BTreeSet::from([start]);
        nfa.closure(&mut init);
        let mut ids: HashMap<BTreeSet<usize>, usize> = HashMap::new();
        let mut sets = vec![init.clone()];
        ids.insert(init, 0);
        let mut trans = Vec::new();
        let mut i = 0;
        while i < sets.len() {
            let mut row = Vec::with_capacity(alphabet);
            for g in 0..alphabet {
                let mut next = BTreeSet::new();
                for &s in &sets[i] {
                    for &(h, t) in &nfa.trans[s] {
                        if h.0 == g {
                            next.insert(t);
                        }
                    }
                }
                nfa.closure(&mut next);
                let id = *ids.entry(next.clone()).or_insert_with(|| {
                    sets.push(next);
                    sets.len() - 1
                });
                row.push(id);
            }
            trans.push(row);
            i += 1;
        }
        let accepting = sets.iter().map(|s| s.contains(&accept)).collect();
        Dfa { trans, accepting }
    }

    fn run(&self, word: &[GenId]) -> usize {
        word.iter().fold(0, |s, g| self.trans[s][g.0])
    }

    /// States from which some accepting state is reachable.
    fn live(&self) -> Vec<bool> {
        let mut live = self.accepting.clone();
        loop {
            let mut changed = false;
            for s in 0..self.trans.len() {
                if !live[s] && self.trans[s].iter().any(|&t| live[t]) {
                    live[s] = true;
                    changed = true;
                }
            }
            if !changed {
                return live;
            }
        }
    }
}

/// Typed DFA state: DFA state plus the cell at the current right boundary
/// (`None` before any generator has been read). `Dead` absorbs ill-typed words.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum TState {
    Live(usize, Option<CellId>),
    Dead,
}

/// A named regular subset of the well-typed strings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Universe {
    pub name: String,
    pub pattern: Pattern,
    dfa: Dfa,
}

/// Result of a closure check; a counterexample is a member string and a step
/// whose target falls outside the universe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Closure {
    Closed,
    NotClosed { string: TypedString, step: Step },
}

impl Universe {
    pub fn new(sig: &Signature, name: &str, text: &str) -> Result<Universe, String> {
        let pattern = Pattern::parse(sig, text)?;
        Self::from_pattern(sig, name, pattern)
    }

    pub fn from_pattern(sig: &Signature, name: &str, pattern: Pattern) -> Result<Universe, String> {
        let dfa = Dfa::from_pattern(&pattern, sig.gens().len());
        let u = Universe {
            name: name.to_string(),
            pattern,
            dfa,
        };
        if let Some(bad) = u.ill_typed_member(sig) {
            return Err(format!("pattern admits the ill-typed word `{bad}`"));
        }
        Ok(u)
    }

    fn step(&self, sig: &Signature, st: TState, g: GenId) -> TState {
        match st {
            TState::Dead => TState::Dead,
            TState::Live(d, cell) => {
                let gen = sig.gen(g);
                if cell.is_some_and(|c| c != gen.cod) {
                    TState::Dead
                } else {
                    TState::Live(self.dfa.trans[d][g.0], Some(gen.dom))
                }
            }
        }
    }

    fn accepts(&self, st: TState) -> bool {
        matches!(st, TState::Live(d, _) if self.dfa.accepting[d])
    }

    fn ill_typed_member(&self, sig: &Signature) -> Option<String> {
        let live = self.dfa.live();
        let start = TState::Live(0, None);
        let mut prev: HashMap<TState, Option<(TState, GenId)>> = HashMap::from([(start, None)]);
        let mut queue = VecDeque::from([start]);
        while let Some(st) = queue.pop_front() {
            let TState::Live(d, _) = st else { continue };
            for g in 0..sig.gens().len() {
                let g = GenId(g);
                let next = self.step(sig, st, g);
                if next == TState::Dead {
                    if live[self.dfa.trans[d][g.0]] {
                        let mut word = vec![g];
                        let mut cur = st;
                        while let Some(Some((p, h))) = prev.get(&cur) {
                            word.push(*h);
                            cur = *p;
                        }
                        word.reverse();
                        return Some(word.iter().map(|g| sig.gen(*g).name.as_str()).collect::<Vec<_>>().join(" "));
                    }
                    continue;
                }
                if let std::collections::hash_map::Entry::Vacant(e) = prev.entry(next) {
                    e.insert(Some((st, g)));
                    queue.push_back(next);
                }
            }
        }
        None
    }

    pub fn contains(&self, s: &TypedString) -> bool {
        self.dfa.accepting[self.dfa.run(s.gens())]
    }

    pub fn contains_empty(&self) -> bool {
        self.dfa.accepting[0]
    }

    /// Cells at which the empty word is read as an identity: the codomains of
    /// generators that can start a member, or every cell if there are none.
    pub fn empty_cells(&self, sig: &Signature) -> Vec<CellId> {
        let live = self.dfa.live();
        let mut cells: Vec<CellId> = sig
            .gens()
            .iter()
            .enumerate()
            .filter(|(i, _)| live[self.dfa.trans[0][*i]])
            .map(|(_, g)| g.cod)
            .collect();
        if cells.is_empty() {
            cells = (0..sig.cells().len()).map(CellId).collect();
        }
        cells.sort();
        cells.dedup();
        cells
    }

    /// All members of length at most `max_len`, ordered by length and then
    /// lexicographically under the presentation's precedence.
    pub fn enumerate(&self, pres: &Presentation, max_len: usize) -> Vec<TypedString> {
        let sig = pres.sig();
        let live = self.dfa.live();
        let mut out = Vec::new();
        if self.contains_empty() {
            out.extend(self.empty_cells(sig).into_iter().map(TypedString::identity));
        }
        let mut order: Vec<GenId> = pres.precedence().to_vec();
        if order.is_empty() {
            order = (0..sig.gens().len()).map(GenId).collect();
        }
        let mut frontier: Vec<(Vec<GenId>, TState)> = vec![(Vec::new(), TState::Live(0, None))];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for (word, st) in &frontier {
                for &g in &order {
                    let nst = self.step(sig, *st, g);
                    let TState::Live(d, _) = nst else { continue };
                    if !live[d] {
                        continue;
                    }
                    let mut w = word.clone();
                    w.push(g);
                    if self.dfa.accepting[d] {
                        out.push(sig.string(w.clone(), None).expect("typed automaton yields typed words"));
                    }
                    next.push((w, nst));
                }
            }
            frontier = next;
        }
        out
    }

    /// Decides whether applying any of `rules` anywhere in a member yields a
    /// member. Derived rules count as single rewrites `lhs => rhs`.
    pub fn check_closed(&self, pres: &Presentation, rules: &[RuleRef]) -> Closure {
        let sig = pres.sig();
        let n = sig.gens().len();
        // Breadth-first access words for every reachable typed state.
        let start = TState::Live(0, None);
        let mut access: Vec<(TState, Vec<GenId>)> = vec![(start, Vec::new())];
        let mut seen: HashMap<TState, usize> = HashMap::from([(start, 0)]);
        let mut i = 0;
        while i < access.len() {
            let (st, word) = access[i].clone();
            for g in 0..n {
                let next = self.step(sig, st, GenId(g));
                if next != TState::Dead && !seen.contains_key(&next) {
                    seen.insert(next, access.len());
                    let mut w = word.clone();
                    w.push(GenId(g));
                    access.push((next, w));
                }
            }
            i += 1;
        }

        let mut best: Option<(usize, Vec<GenId>, RuleRef, Vec<GenId>)> = None;
        for (st, x) in &access {
            let TState::Live(_, cell) = *st else { continue };
            for &r in rules {
                let (lhs, rhs) = (pres.lhs(r), pres.rhs(r));
                let a = if lhs.is_empty() {
                    if cell.is_some_and(|c| c != lhs.dom()) {
                        continue;
                    }
                    match *st {
                        TState::Live(d, _) => TState::Live(d, Some(lhs.dom())),
                        TState::Dead => continue,
                    }
                } else {
                    lhs.gens().iter().fold(*st, |s, g| self.step(sig, s, *g))
                };
                if a == TState::Dead {
                    continue;
                }
                let b = if rhs.is_empty() {
                    match *st {
                        TState::Live(d, _) => TState::Live(d, Some(rhs.dom())),
                        TState::Dead => continue,
                    }
                } else {
                    rhs.gens().iter().fold(*st, |s, g| self.step(sig, s, *g))
                };
                if let Some(y) = self.separating_suffix(sig, a, b) {
                    let total = x.len() + lhs.len() + y.len();
                    if best.as_ref().is_none_or(|(t, ..)| total < *t) {
                        best = Some((total, x.clone(), r, y));
                    }
                }
            }
        }
        match best {
            None => Closure::Closed,
            Some((_, x, r, y)) => {
                let lhs = pres.lhs(r);
                let left = sig
                    .string(x.clone(), Some(lhs.cod()))
                    .expect("access word is typed");
                let right = sig.string(y, Some(lhs.dom())).expect("suffix is typed");
                let string = sig.join3(&left, lhs, &right);
                Closure::NotClosed {
                    string,
                    step: Step { left, rule: r, right },
                }
            }
        }
    }

    /// Shortest `y` with `a·y` accepted and `b·y` rejected.
    fn separating_suffix(&self, sig: &Signature, a: TState, b: TState) -> Option<Vec<GenId>> {
        type Back = Option<((TState, TState), GenId)>;
        let mut prev: HashMap<(TState, TState), Back> = HashMap::from([((a, b), None)]);
        let mut queue = VecDeque::from([(a, b)]);
        while let Some(pair) = queue.pop_front() {
            if self.accepts(pair.0) && !self.accepts(pair.1) {
                let mut y = Vec::new();
                let mut cur = pair;
                while let Some(Some((p, g))) = prev.get(&cur) {
                    y.push(*g);
                    cur = *p;
                }
                y.reverse();
                return Some(y);
            }
            if pair.0 == TState::Dead {
                continue;
            }
            for g in 0..sig.gens().len() {
                let next = (self.step(sig, pair.0, GenId(g)), self.step(sig, pair.1, GenId(g)));
                if let std::collections::hash_map::Entry::Vacant(e) = prev.entry(next) {
                    e.insert(Some((pair, GenId(g))));
                    queue.push_back(next);
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sig::preset;

    fn names(pres: &Presentation, v: &[TypedString]) -> Vec<String> {
        v.iter().map(|s| pres.sig().show_compact(s)).collect()
    }

    #[test]
    fn pattern_round_trips_through_display() {
        let pres = preset("adjunction").unwrap();
        let sig = pres.sig();
        for text in ["F(GF)*", "G (F G)*", "(F G | 1)+", "F|G", "()"] {
            let p = Pattern::parse(sig, text).unwrap();
            let again = Pattern::parse(sig, &p.display(sig)).unwrap();
            assert_eq!(p, again, "{text}");
        }
    }

    #[test]
    fn enumerate_orders_by_length_then_precedence() {
        let pres = preset("adjunction").unwrap();
        let u = pres.universe_by_name("FGF").unwrap();
        assert_eq!(names(&pres, &u.enumerate(&pres, 5)), ["F", "FGF", "FGFGF"]);

        let pres = preset("composite-monad").unwrap();
        let u = pres.universe_by_name("PTpow").unwrap();
        assert_eq!(names(&pres, &u.enumerate(&pres, 4)), ["I", "PT", "PTPT"]);
        let u = pres.universe_by_name("PTstar").unwrap();
        assert_eq!(names(&pres, &u.enumerate(&pres, 2)), ["I", "P", "T", "PP", "PT", "TP", "TT"]);

        let pres = preset("monad").unwrap();
        let u = pres.universe_by_name("Tstar").unwrap();
        assert_eq!(names(&pres, &u.enumerate(&pres, 3)), ["I", "T", "TT", "TTT"]);
    }

    #[test]
    fn ill_typed_pattern_is_rejected() {
        let pres = preset("adjunction").unwrap();
        let err = Universe::new(pres.sig(), "bad", "F F | G").unwrap_err();
        assert!(err.contains("F F"), "{err}");
        // The dead branch never completes, so it is harmless.
        assert!(Universe::new(pres.sig(), "ok", "F (G F)*").is_ok());
    }

    #[test]
    fn closure_examples() {
        let pres = preset("composite-monad").unwrap();
        let u = pres.universe_by_name("PTpow").unwrap();
        let r = |n: &str| pres.rule_by_name(n).unwrap();

        // No P P factor ever occurs inside (PT)*.
        assert_eq!(u.check_closed(&pres, &[r("muP")]), Closure::Closed);
        assert_eq!(u.check_closed(&pres, &[r("muPT")]), Closure::Closed);

        match u.check_closed(&pres, &[r("theta")]) {
            Closure::NotClosed { string, step } => {
                assert_eq!(pres.sig().show_compact(&string), "PTPT");
                assert_eq!(pres.sig().show_compact(&step.target(&pres)), "PPTT");
            }
            Closure::Closed => panic!("theta leaves (PT)*"),
        }

        // A unit inserted between P and T leaves the universe.
        match u.check_closed(&pres, &[r("muPT"), r("etaPT")]) {
            Closure::NotClosed { string, step } => {
                assert_eq!(pres.sig().show_compact(&string), "PT");
                assert_eq!(pres.sig().show_compact(&step.target(&pres)), "PPTT");
            }
            Closure::Closed => panic!("etaPT at an odd boundary leaves (PT)*"),
        }

        let pres = preset("monad").unwrap();
        let u = pres.universe_by_name("Tstar").unwrap();
        assert_eq!(u.check_closed(&pres, &pres.base_rules()), Closure::Closed);

        let pres = preset("adjunction").unwrap();
        for name in ["FGF", "GFG"] {
            let u = pres.universe_by_name(name).unwrap();
            assert_eq!(u.check_closed(&pres, &pres.base_rules()), Closure::Closed, "{name}");
        }
    }

    #[test]
    fn empty_word_is_typed_at_starting_cells() {
        let pres = preset("adjunction").unwrap();
        let u = Universe::new(pres.sig(), "fg", "(F G)*").unwrap();
        let d = pres.sig().cell_by_name("D").unwrap();
        assert_eq!(u.empty_cells(pres.sig()), vec![d]);
    }
}
