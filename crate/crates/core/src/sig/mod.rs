//! Presentations of rewrite categories.
//!
//! A presentation fixes the 0-cells, the typed 1-cell generators, the rewrite
//! rules (2-cell generators), derived rules, equations between parallel
//! derivations, and the regular universes of strings that rewrite categories
//! are restricted to.
//!
//! Strings are read with the leftmost generator outermost: `F1 F2 ... Fn` is
//! well-typed when `dom Fi = cod Fi+1`, and denotes a 1-cell `dom Fn -> cod F1`.

mod presets;
pub mod universe;

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::rewrite::{Derivation, Step};
pub use presets::{preset, PRESET_NAMES};
pub use universe::{Closure, Pattern, Universe};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CellId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GenId(pub usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gen {
    pub name: String,
    pub dom: CellId,
    pub cod: CellId,
}

/// A well-typed word of generators. The empty word is the identity 1-cell on
/// its base cell, so `dom == cod` in that case.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypedString {
    gens: Vec<GenId>,
    dom: CellId,
    cod: CellId,
}

impl TypedString {
    pub fn identity(cell: CellId) -> Self {
        TypedString {
            gens: Vec::new(),
            dom: cell,
            cod: cell,
        }
    }

    pub fn gens(&self) -> &[GenId] {
        &self.gens
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn dom(&self) -> CellId {
        self.dom
    }

    pub fn cod(&self) -> CellId {
        self.cod
    }

    pub fn count(&self, g: GenId) -> usize {
        self.gens.iter().filter(|&&x| x == g).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypingError {
    #[error("dom {left} ≠ cod {right} at position {position}")]
    Adjacency {
        position: usize,
        left: String,
        right: String,
    },
    #[error("empty string without a base cell")]
    EmptyWithoutBase,
    #[error("boundary mismatch: dom {left} ≠ cod {right}")]
    Boundary { left: String, right: String },
    #[error("unknown generator `{0}`")]
    UnknownGen(String),
    #[error("unknown cell `{0}`")]
    UnknownCell(String),
}

/// The 0-cells and 1-cell generators of a presentation.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Signature {
    cells: Vec<Cell>,
    gens: Vec<Gen>,
}

impl Signature {
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn gens(&self) -> &[Gen] {
        &self.gens
    }

    pub fn gen(&self, g: GenId) -> &Gen {
        &self.gens[g.0]
    }

    pub fn cell(&self, c: CellId) -> &Cell {
        &self.cells[c.0]
    }

    pub fn cell_by_name(&self, name: &str) -> Option<CellId> {
        self.cells.iter().position(|c| c.name == name).map(CellId)
    }

    pub fn gen_by_name(&self, name: &str) -> Option<GenId> {
        self.gens.iter().position(|g| g.name == name).map(GenId)
    }

    /// Types a word of generator ids. `base` is required when the word is empty
    /// and ignored otherwise.
    pub fn string(&self, gens: Vec<GenId>, base: Option<CellId>) -> Result<TypedString, TypingError> {
        let (Some(first), Some(last)) = (gens.first(), gens.last()) else {
            return base
                .map(TypedString::identity)
                .ok_or(TypingError::EmptyWithoutBase);
        };
        for (i, pair) in gens.windows(2).enumerate() {
            let (a, b) = (self.gen(pair[0]), self.gen(pair[1]));
            if a.dom != b.cod {
                return Err(TypingError::Adjacency {
                    position: i,
                    left: a.name.clone(),
                    right: b.name.clone(),
                });
            }
        }
        let (dom, cod) = (self.gen(*last).dom, self.gen(*first).cod);
        Ok(TypedString { gens, dom, cod })
    }

    pub fn validate_string(&self, names: &[&str], base: Option<&str>) -> Result<TypedString, TypingError> {
        let gens = names
            .iter()
            .map(|n| self.gen_by_name(n).ok_or_else(|| TypingError::UnknownGen(n.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let base = match base {
            Some(b) => Some(self.cell_by_name(b).ok_or_else(|| TypingError::UnknownCell(b.to_string()))?),
            None => None,
        };
        self.string(gens, base)
    }

    /// Parses whitespace-separated generator names, or `1_CELL` for an identity.
    pub fn parse_string(&self, text: &str) -> Result<TypedString, TypingError> {
        let words: Vec<&str> = text.split_whitespace().collect();
        match words.as_slice() {
            [single] if single.starts_with("1_") => self.validate_string(&[], Some(&single[2..])),
            _ => self.validate_string(&words, None),
        }
    }

    pub fn concat(&self, a: &TypedString, b: &TypedString) -> Result<TypedString, TypingError> {
        if a.dom != b.cod {
            return Err(TypingError::Boundary {
                left: self.cell(a.dom).name.clone(),
                right: self.cell(b.cod).name.clone(),
            });
        }
        let mut gens = Vec::with_capacity(a.len() + b.len());
        gens.extend_from_slice(&a.gens);
        gens.extend_from_slice(&b.gens);
        Ok(TypedString {
            gens,
            dom: b.dom,
            cod: a.cod,
        })
    }

    /// Concatenation of three strings known to compose.
    pub(crate) fn join3(&self, a: &TypedString, b: &TypedString, c: &TypedString) -> TypedString {
        let ab = self.concat(a, b).expect("left context composes");
        self.concat(&ab, c).expect("right context composes")
    }

    /// The cell sitting at boundary `p` of `s` (between `s[p-1]` and `s[p]`).
    pub fn boundary_cell(&self, s: &TypedString, p: usize) -> CellId {
        if p < s.len() {
            self.gen(s.gens[p]).cod
        } else {
            s.dom
        }
    }

    pub fn substring(&self, s: &TypedString, lo: usize, hi: usize) -> TypedString {
        if lo == hi {
            return TypedString::identity(self.boundary_cell(s, lo));
        }
        let gens = s.gens[lo..hi].to_vec();
        let dom = self.gen(gens[gens.len() - 1]).dom;
        let cod = self.gen(gens[0]).cod;
        TypedString { gens, dom, cod }
    }

    /// Renders a string as space-separated generator names, `1_C` for identities.
    pub fn show(&self, s: &TypedString) -> String {
        if s.is_empty() {
            format!("1_{}", self.cell(s.dom).name)
        } else {
            s.gens
                .iter()
                .map(|g| self.gen(*g).name.as_str())
                .collect::<Vec<_>>()
                .join(" ")
        }
    }

    /// Compact rendering without separators (`TTP`), used in labels.
    pub fn show_compact(&self, s: &TypedString) -> String {
        if s.is_empty() {
            return "I".to_string();
        }
        s.gens.iter().map(|g| self.gen(*g).name.as_str()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RuleRef {
    Base(usize),
    Derived(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Class {
    Good,
    Bad,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub lhs: TypedString,
    pub rhs: TypedString,
}

impl Rule {
    /// A rule is bad when it lengthens the string.
    pub fn class(&self) -> Class {
        classify(&self.lhs, &self.rhs)
    }
}

pub fn classify(lhs: &TypedString, rhs: &TypedString) -> Class {
    if rhs.len() > lhs.len() {
        Class::Bad
    } else {
        Class::Good
    }
}

/// A named composite of base rules. Acts as a single rewrite `lhs => rhs` but
/// introduces no new generator: reasoning happens after expansion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivedRule {
    pub name: String,
    pub lhs: TypedString,
    pub rhs: TypedString,
    pub body: Derivation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub name: String,
    pub left: Derivation,
    pub right: Derivation,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Presentation {
    sig: Signature,
    rules: Vec<Rule>,
    derived: Vec<DerivedRule>,
    equations: Vec<Equation>,
    universes: Vec<Universe>,
    precedence: Vec<GenId>,
    rank: Vec<usize>,
}

impl Presentation {
    pub fn sig(&self) -> &Signature {
        &self.sig
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn derived_rules(&self) -> &[DerivedRule] {
        &self.derived
    }

    pub fn equations(&self) -> &[Equation] {
        &self.equations
    }

    pub fn universes(&self) -> &[Universe] {
        &self.universes
    }

    /// Generators from lowest to highest precedence.
    pub fn precedence(&self) -> &[GenId] {
        &self.precedence
    }

    pub fn rank(&self, g: GenId) -> usize {
        self.rank[g.0]
    }

    pub fn base_rules(&self) -> Vec<RuleRef> {
        (0..self.rules.len()).map(RuleRef::Base).collect()
    }

    pub fn good_rules(&self) -> Vec<RuleRef> {
        self.base_rules()
            .into_iter()
            .filter(|r| self.class(*r) == Class::Good)
            .collect()
    }

    pub fn bad_rules(&self) -> Vec<RuleRef> {
        self.base_rules()
            .into_iter()
            .filter(|r| self.class(*r) == Class::Bad)
            .collect()
    }

    pub fn lhs(&self, r: RuleRef) -> &TypedString {
        match r {
            RuleRef::Base(i) => &self.rules[i].lhs,
            RuleRef::Derived(i) => &self.derived[i].lhs,
        }
    }

    pub fn rhs(&self, r: RuleRef) -> &TypedString {
        match r {
            RuleRef::Base(i) => &self.rules[i].rhs,
            RuleRef::Derived(i) => &self.derived[i].rhs,
        }
    }

    pub fn rule_name(&self, r: RuleRef) -> &str {
        match r {
            RuleRef::Base(i) => &self.rules[i].name,
            RuleRef::Derived(i) => &self.derived[i].name,
        }
    }

    pub fn class(&self, r: RuleRef) -> Class {
        classify(self.lhs(r), self.rhs(r))
    }

    pub fn rule_by_name(&self, name: &str) -> Option<RuleRef> {
        if let Some(i) = self.rules.iter().position(|r| r.name == name) {
            return Some(RuleRef::Base(i));
        }
        self.derived.iter().position(|r| r.name == name).map(RuleRef::Derived)
    }

    pub fn equation_by_name(&self, name: &str) -> Option<&Equation> {
        self.equations.iter().find(|e| e.name == name)
    }

    pub fn universe_by_name(&self, name: &str) -> Option<&Universe> {
        self.universes.iter().find(|u| u.name == name)
    }

    /// Recovers the name-level declarations this presentation was built from.
    pub fn declarations(&self) -> Declarations {
        let sig = &self.sig;
        let str_decl = |s: &TypedString| StrDecl::of(sig, s);
        let deriv_decl = |d: &Derivation| DerivDecl::of(self, d);
        let default_order = (0..sig.gens.len()).map(GenId).collect::<Vec<_>>();
        Declarations {
            cells: sig.cells.iter().map(|c| c.name.clone()).collect(),
            gens: sig
                .gens
                .iter()
                .map(|g| GenDecl {
                    name: g.name.clone(),
                    dom: sig.cell(g.dom).name.clone(),
                    cod: sig.cell(g.cod).name.clone(),
                })
                .collect(),
            rules: self
                .rules
                .iter()
                .map(|r| RuleDecl {
                    name: r.name.clone(),
                    lhs: str_decl(&r.lhs),
                    rhs: str_decl(&r.rhs),
                })
                .collect(),
            derived: self
                .derived
                .iter()
                .map(|r| DerivedDecl {
                    name: r.name.clone(),
                    lhs: str_decl(&r.lhs),
                    rhs: str_decl(&r.rhs),
                    body: deriv_decl(&r.body),
                })
                .collect(),
            equations: self
                .equations
                .iter()
                .map(|e| EquationDecl {
                    name: e.name.clone(),
                    left: deriv_decl(&e.left),
                    right: deriv_decl(&e.right),
                })
                .collect(),
            universes: self
                .universes
                .iter()
                .map(|u| UniverseDecl {
                    name: u.name.clone(),
                    pattern: u.pattern.display(sig),
                })
                .collect(),
            precedence: (self.precedence != default_order)
                .then(|| self.precedence.iter().map(|g| sig.gen(*g).name.clone()).collect()),
        }
    }

    /// The same presentation with one equation dropped.
    pub fn without_equation(&self, name: &str) -> Presentation {
        let mut p = self.clone();
        p.equations.retain(|e| e.name != name);
        p
    }
}

// ---------------------------------------------------------------------------
// Name-level declarations and validation.

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct StrDecl {
    pub gens: Vec<String>,
    /// Base cell; only meaningful for the empty string.
    pub base: Option<String>,
}

impl StrDecl {
    pub fn gens(names: &[&str]) -> Self {
        StrDecl {
            gens: names.iter().map(|s| s.to_string()).collect(),
            base: None,
        }
    }

    pub fn identity(cell: &str) -> Self {
        StrDecl {
            gens: Vec::new(),
            base: Some(cell.to_string()),
        }
    }

    fn of(sig: &Signature, s: &TypedString) -> Self {
        if s.is_empty() {
            StrDecl::identity(&sig.cell(s.dom).name)
        } else {
            StrDecl {
                gens: s.gens.iter().map(|g| sig.gen(*g).name.clone()).collect(),
                base: None,
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenDecl {
    pub name: String,
    pub dom: String,
    pub cod: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleDecl {
    pub name: String,
    pub lhs: StrDecl,
    pub rhs: StrDecl,
}

/// `(left) rule (right)`; empty contexts take their cell from the rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepDecl {
    pub left: Vec<String>,
    pub rule: String,
    pub right: Vec<String>,
}

impl StepDecl {
    pub fn new(left: &[&str], rule: &str, right: &[&str]) -> Self {
        StepDecl {
            left: left.iter().map(|s| s.to_string()).collect(),
            rule: rule.to_string(),
            right: right.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DerivDecl {
    Identity(StrDecl),
    Steps(Vec<StepDecl>),
}

impl DerivDecl {
    pub fn of(pres: &Presentation, d: &Derivation) -> Self {
        let sig = pres.sig();
        if d.steps.is_empty() {
            return DerivDecl::Identity(StrDecl::of(sig, &d.source));
        }
        let names = |s: &TypedString| s.gens.iter().map(|g| sig.gen(*g).name.clone()).collect();
        DerivDecl::Steps(
            d.steps
                .iter()
                .map(|st| StepDecl {
                    left: names(&st.left),
                    rule: pres.rule_name(st.rule).to_string(),
                    right: names(&st.right),
                })
                .collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivedDecl {
    pub name: String,
    pub lhs: StrDecl,
    pub rhs: StrDecl,
    pub body: DerivDecl,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationDecl {
    pub name: String,
    pub left: DerivDecl,
    pub right: DerivDecl,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniverseDecl {
    pub name: String,
    pub pattern: String,
}

/// Everything needed to build a presentation, referencing items by name.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Declarations {
    pub cells: Vec<String>,
    pub gens: Vec<GenDecl>,
    pub rules: Vec<RuleDecl>,
    pub derived: Vec<DerivedDecl>,
    pub equations: Vec<EquationDecl>,
    pub universes: Vec<UniverseDecl>,
    /// Lowest first; `None` means declaration order.
    pub precedence: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("{decl}: duplicate name `{name}`")]
    Duplicate { decl: String, name: String },
    #[error("{decl}: unknown cell `{name}`")]
    UnknownCell { decl: String, name: String },
    #[error("{decl}: unknown generator `{name}`")]
    UnknownGen { decl: String, name: String },
    #[error("{decl}: unknown rule `{name}`")]
    UnknownRule { decl: String, name: String },
    #[error("{decl}: ill-typed {part}: {source}")]
    IllTyped {
        decl: String,
        part: String,
        source: TypingError,
    },
    #[error("{decl}: rule endpoints differ (lhs {lhs}, rhs {rhs})")]
    EndpointMismatch { decl: String, lhs: String, rhs: String },
    #[error("{decl}: equation not parallel ({detail})")]
    NotParallel { decl: String, detail: String },
    #[error("{decl}: cyclic derived rule (references `{name}` before it is defined)")]
    CyclicDerived { decl: String, name: String },
    #[error("{decl}: {detail}")]
    BadDerivation { decl: String, detail: String },
    #[error("{decl}: {detail}")]
    BadUniverse { decl: String, detail: String },
    #[error("precedence: {detail}")]
    BadPrecedence { detail: String },
}

struct Builder<'a> {
    decls: &'a Declarations,
    pres: Presentation,
    errors: Vec<BuildError>,
}

impl Builder<'_> {
    fn resolve_str(&mut self, decl: &str, part: &str, s: &StrDecl) -> Option<TypedString> {
        let sig = &self.pres.sig;
        let mut gens = Vec::new();
        for name in &s.gens {
            match sig.gen_by_name(name) {
                Some(g) => gens.push(g),
                None => {
                    self.errors.push(BuildError::UnknownGen {
                        decl: decl.to_string(),
                        name: name.clone(),
                    });
                    return None;
                }
            }
        }
        let base = match &s.base {
            Some(b) => match sig.cell_by_name(b) {
                Some(c) => Some(c),
                None => {
                    self.errors.push(BuildError::UnknownCell {
                        decl: decl.to_string(),
                        name: b.clone(),
                    });
                    return None;
                }
            },
            None => None,
        };
        match sig.string(gens, base) {
            Ok(t) => Some(t),
            Err(source) => {
                self.errors.push(BuildError::IllTyped {
                    decl: decl.to_string(),
                    part: part.to_string(),
                    source,
                });
                None
            }
        }
    }

    fn resolve_rule(&mut self, decl: &str, name: &str, derived_limit: usize) -> Option<RuleRef> {
        if let Some(i) = self.pres.rules.iter().position(|r| r.name == name) {
            return Some(RuleRef::Base(i));
        }
        if let Some(i) = self.decls.derived.iter().position(|r| r.name == name) {
            if i < derived_limit && i < self.pres.derived.len() {
                return Some(RuleRef::Derived(i));
            }
            self.errors.push(BuildError::CyclicDerived {
                decl: decl.to_string(),
                name: name.to_string(),
            });
            return None;
        }
        self.errors.push(BuildError::UnknownRule {
            decl: decl.to_string(),
            name: name.to_string(),
        });
        None
    }

    fn resolve_step(&mut self, decl: &str, idx: usize, s: &StepDecl, derived_limit: usize) -> Option<Step> {
        let rule = self.resolve_rule(decl, &s.rule, derived_limit)?;
        let lhs = self.pres.lhs(rule).clone();
        let part = format!("step {idx} context");
        let left = StrDecl {
            gens: s.left.clone(),
            base: s.left.is_empty().then(|| self.pres.sig.cell(lhs.cod).name.clone()),
        };
        let right = StrDecl {
            gens: s.right.clone(),
            base: s.right.is_empty().then(|| self.pres.sig.cell(lhs.dom).name.clone()),
        };
        let left = self.resolve_str(decl, &part, &left)?;
        let right = self.resolve_str(decl, &part, &right)?;
        let sig = &self.pres.sig;
        let composed = sig.concat(&left, &lhs).and_then(|x| sig.concat(&x, &right));
        if let Err(source) = composed {
            self.errors.push(BuildError::IllTyped {
                decl: decl.to_string(),
                part,
                source,
            });
            return None;
        }
        Some(Step { left, rule, right })
    }

    fn resolve_deriv(&mut self, decl: &str, d: &DerivDecl, derived_limit: usize) -> Option<Derivation> {
        match d {
            DerivDecl::Identity(s) => self.resolve_str(decl, "identity", s).map(Derivation::identity),
            DerivDecl::Steps(steps) => {
                if steps.is_empty() {
                    self.errors.push(BuildError::BadDerivation {
                        decl: decl.to_string(),
                        detail: "empty step list; use id(...)".to_string(),
                    });
                    return None;
                }
                let mut resolved = Vec::new();
                for (i, s) in steps.iter().enumerate() {
                    resolved.push(self.resolve_step(decl, i, s, derived_limit)?);
                }
                let source = resolved[0].source(&self.pres);
                match Derivation::new(&self.pres, source, resolved) {
                    Ok(d) => Some(d),
                    Err(e) => {
                        self.errors.push(BuildError::BadDerivation {
                            decl: decl.to_string(),
                            detail: e.to_string(),
                        });
                        None
                    }
                }
            }
        }
    }

    fn check_unique<'n>(&mut self, kind: &str, names: impl Iterator<Item = &'n String>) {
        let mut seen = HashMap::new();
        for n in names {
            if seen.insert(n.clone(), ()).is_some() {
                self.errors.push(BuildError::Duplicate {
                    decl: kind.to_string(),
                    name: n.clone(),
                });
            }
        }
    }
}

impl Presentation {
    /// Resolves a derivation written against this presentation.
    pub fn resolve_derivation(&self, d: &DerivDecl) -> Result<Derivation, Vec<BuildError>> {
        let decls = self.declarations();
        let mut b = Builder {
            decls: &decls,
            pres: self.clone(),
            errors: Vec::new(),
        };
        b.resolve_deriv("derivation", d, self.derived.len()).ok_or(b.errors)
    }

    pub fn resolve_string(&self, s: &StrDecl) -> Result<TypedString, Vec<BuildError>> {
        let decls = self.declarations();
        let mut b = Builder {
            decls: &decls,
            pres: self.clone(),
            errors: Vec::new(),
        };
        b.resolve_str("string", "string", s).ok_or(b.errors)
    }
}

/// Validates declarations and assembles a presentation, or reports every
/// typing error found, each naming its declaration.
pub fn build_presentation(decls: &Declarations) -> Result<Presentation, Vec<BuildError>> {
    let mut b = Builder {
        decls,
        pres: Presentation::default(),
        errors: Vec::new(),
    };
    b.check_unique("cell", decls.cells.iter());
    b.check_unique("gen", decls.gens.iter().map(|g| &g.name));
    b.check_unique(
        "rule",
        decls.rules.iter().map(|r| &r.name).chain(decls.derived.iter().map(|r| &r.name)),
    );
    b.check_unique("eq", decls.equations.iter().map(|e| &e.name));
    b.check_unique("universe", decls.universes.iter().map(|u| &u.name));

    b.pres.sig.cells = decls.cells.iter().map(|n| Cell { name: n.clone() }).collect();
    for g in &decls.gens {
        let decl = format!("gen {}", g.name);
        let dom = b.pres.sig.cell_by_name(&g.dom);
        let cod = b.pres.sig.cell_by_name(&g.cod);
        for (c, n) in [(dom, &g.dom), (cod, &g.cod)] {
            if c.is_none() {
                b.errors.push(BuildError::UnknownCell {
                    decl: decl.clone(),
                    name: n.clone(),
                });
            }
        }
        // Keep ids stable even for broken declarations so later errors stay meaningful.
        b.pres.sig.gens.push(Gen {
            name: g.name.clone(),
            dom: dom.unwrap_or(CellId(0)),
            cod: cod.unwrap_or(CellId(0)),
        });
    }
    if !b.errors.is_empty() {
        return Err(b.errors);
    }

    for r in &decls.rules {
        let decl = format!("rule {}", r.name);
        let lhs = b.resolve_str(&decl, "lhs", &r.lhs);
        let rhs = b.resolve_str(&decl, "rhs", &r.rhs);
        let (Some(lhs), Some(rhs)) = (lhs, rhs) else { continue };
        if lhs.dom != rhs.dom || lhs.cod != rhs.cod {
            b.errors.push(BuildError::EndpointMismatch {
                decl,
                lhs: b.pres.sig.show(&lhs),
                rhs: b.pres.sig.show(&rhs),
            });
            continue;
        }
        b.pres.rules.push(Rule {
            name: r.name.clone(),
            lhs,
            rhs,
        });
    }
    if !b.errors.is_empty() {
        return Err(b.errors);
    }

    for (i, r) in decls.derived.iter().enumerate() {
        let decl = format!("defrule {}", r.name);
        let lhs = b.resolve_str(&decl, "lhs", &r.lhs);
        let rhs = b.resolve_str(&decl, "rhs", &r.rhs);
        let body = b.resolve_deriv(&decl, &r.body, i);
        let (Some(lhs), Some(rhs), Some(body)) = (lhs, rhs, body) else {
            return Err(b.errors);
        };
        let target = body.target(&b.pres);
        if body.source != lhs || target != rhs {
            b.errors.push(BuildError::BadDerivation {
                decl,
                detail: format!(
                    "body runs {} => {}, declared {} => {}",
                    b.pres.sig.show(&body.source),
                    b.pres.sig.show(&target),
                    b.pres.sig.show(&lhs),
                    b.pres.sig.show(&rhs)
                ),
            });
            return Err(b.errors);
        }
        b.pres.derived.push(DerivedRule {
            name: r.name.clone(),
            lhs,
            rhs,
            body,
        });
    }

    let all_derived = decls.derived.len();
    for e in &decls.equations {
        let decl = format!("eq {}", e.name);
        let left = b.resolve_deriv(&decl, &e.left, all_derived);
        let right = b.resolve_deriv(&decl, &e.right, all_derived);
        let (Some(left), Some(right)) = (left, right) else { continue };
        let (lt, rt) = (left.target(&b.pres), right.target(&b.pres));
        if left.source != right.source || lt != rt {
            let sig = &b.pres.sig;
            b.errors.push(BuildError::NotParallel {
                decl,
                detail: format!(
                    "{} => {} vs {} => {}",
                    sig.show(&left.source),
                    sig.show(&lt),
                    sig.show(&right.source),
                    sig.show(&rt)
                ),
            });
            continue;
        }
        b.pres.equations.push(Equation {
            name: e.name.clone(),
            left,
            right,
        });
    }

    for u in &decls.universes {
        let decl = format!("universe {}", u.name);
        match Universe::new(&b.pres.sig, &u.name, &u.pattern) {
            Ok(univ) => b.pres.universes.push(univ),
            Err(detail) => b.errors.push(BuildError::BadUniverse { decl, detail }),
        }
    }

    let n = b.pres.sig.gens.len();
    let order: Vec<GenId> = match &decls.precedence {
        None => (0..n).map(GenId).collect(),
        Some(names) => {
            let mut order = Vec::new();
            for name in names {
                match b.pres.sig.gen_by_name(name) {
                    Some(g) if !order.contains(&g) => order.push(g),
                    Some(_) => b.errors.push(BuildError::BadPrecedence {
                        detail: format!("`{name}` listed twice"),
                    }),
                    None => b.errors.push(BuildError::UnknownGen {
                        decl: "precedence".to_string(),
                        name: name.clone(),
                    }),
                }
            }
            if order.len() != n && b.errors.is_empty() {
                b.errors.push(BuildError::BadPrecedence {
                    detail: "must list every generator".to_string(),
                });
            }
            order
        }
    };
    if !b.errors.is_empty() {
        return Err(b.errors);
    }
    let mut rank = vec![0; n];
    for (i, g) in order.iter().enumerate() {
        rank[g.0] = i;
    }
    b.pres.precedence = order;
    b.pres.rank = rank;
    Ok(b.pres)
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Class::Good => write!(f, "good"),
            Class::Bad => write!(f, "bad"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn adjunction_sig() -> Signature {
        preset("adjunction").unwrap().sig().clone()
    }

    #[test]
    fn validate_string_computes_endpoints() {
        let sig = adjunction_sig();
        let gf = sig.validate_string(&["G", "F"], None).unwrap();
        let c = sig.cell_by_name("C").unwrap();
        assert_eq!((gf.dom(), gf.cod()), (c, c));
    }

    #[test]
    fn validate_string_locates_bad_adjacency() {
        let sig = adjunction_sig();
        let err = sig.validate_string(&["F", "F"], None).unwrap_err();
        assert!(matches!(err, TypingError::Adjacency { position: 0, .. }));
        let err = sig.validate_string(&["G", "F", "F"], None).unwrap_err();
        assert!(matches!(err, TypingError::Adjacency { position: 1, .. }));
    }

    #[test]
    fn empty_string_needs_base() {
        let sig = adjunction_sig();
        assert_eq!(sig.validate_string(&[], None), Err(TypingError::EmptyWithoutBase));
        let id = sig.validate_string(&[], Some("C")).unwrap();
        let c = sig.cell_by_name("C").unwrap();
        assert!(id.is_empty());
        assert_eq!((id.dom(), id.cod()), (c, c));
    }

    #[test]
    fn concat_checks_boundary_and_units() {
        let sig = adjunction_sig();
        let g = sig.parse_string("G").unwrap();
        let f = sig.parse_string("F").unwrap();
        let gf = sig.concat(&g, &f).unwrap();
        assert_eq!(sig.show(&gf), "G F");
        assert!(sig.concat(&f, &f).is_err());
        let unit = TypedString::identity(f.dom());
        assert_eq!(sig.concat(&f, &unit).unwrap(), f);
        let unit = TypedString::identity(f.cod());
        assert_eq!(sig.concat(&unit, &f).unwrap(), f);
    }

    #[test]
    fn self_composing_rule_in_adjunction_is_rejected() {
        let mut decls = preset("adjunction").unwrap().declarations();
        decls.rules.push(RuleDecl {
            name: "bogus".into(),
            lhs: StrDecl::gens(&["F", "F"]),
            rhs: StrDecl::gens(&["F"]),
        });
        let errs = build_presentation(&decls).unwrap_err();
        let msg = errs[0].to_string();
        assert!(msg.contains("rule bogus"), "{msg}");
        assert!(msg.contains("ill-typed lhs: dom F ≠ cod F"), "{msg}");
    }

    #[test]
    fn non_parallel_equation_is_rejected() {
        let mut decls = preset("monad").unwrap().declarations();
        decls.equations.push(EquationDecl {
            name: "broken".into(),
            left: DerivDecl::Steps(vec![StepDecl::new(&[], "mu", &[])]),
            right: DerivDecl::Identity(StrDecl::gens(&["T", "T"])),
        });
        let errs = build_presentation(&decls).unwrap_err();
        assert!(errs[0].to_string().contains("equation not parallel"), "{}", errs[0]);
    }

    #[test]
    fn forward_reference_between_derived_rules_is_cyclic() {
        let mut decls = preset("composite-monad").unwrap().declarations();
        // muPT's body now refers to etaPT, which is declared after it.
        decls.derived[0].body = DerivDecl::Steps(vec![StepDecl::new(&["P", "T", "P", "T"], "etaPT", &[])]);
        let errs = build_presentation(&decls).unwrap_err();
        assert!(errs.iter().any(|e| matches!(e, BuildError::CyclicDerived { .. })), "{errs:?}");
    }

    #[test]
    fn unknown_references_are_reported() {
        let mut decls = preset("monad").unwrap().declarations();
        decls.gens.push(GenDecl {
            name: "S".into(),
            dom: "X".into(),
            cod: "*".into(),
        });
        let errs = build_presentation(&decls).unwrap_err();
        assert!(matches!(&errs[0], BuildError::UnknownCell { name, .. } if name == "X"));

        let mut decls = preset("monad").unwrap().declarations();
        decls.rules[0].rhs = StrDecl::gens(&["Q"]);
        let errs = build_presentation(&decls).unwrap_err();
        assert!(matches!(&errs[0], BuildError::UnknownGen { name, .. } if name == "Q"));
    }

    #[test]
    fn rule_endpoint_mismatch() {
        let mut decls = preset("adjunction").unwrap().declarations();
        decls.rules.push(RuleDecl {
            name: "skew".into(),
            lhs: StrDecl::gens(&["F"]),
            rhs: StrDecl::gens(&["F", "G", "F", "G"]),
        });
        let errs = build_presentation(&decls).unwrap_err();
        assert!(matches!(errs[0], BuildError::EndpointMismatch { .. }), "{errs:?}");
    }

    #[test]
    fn precedence_must_be_total() {
        let mut decls = preset("composite-monad").unwrap().declarations();
        decls.precedence = Some(vec!["P".into()]);
        assert!(build_presentation(&decls).is_err());
    }
}
