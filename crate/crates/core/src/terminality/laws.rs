use thiserror::Error;

use crate::equivalence::{Engine, Verdict};
use crate::rewrite::{Derivation, Step};
use crate::sig::{Presentation, RuleRef, TypedString};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LawError {
    #[error("typing: {0}")]
    Typing(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LawResult {
    pub name: String,
    pub left: Derivation,
    pub right: Derivation,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LawReport {
    pub laws: Vec<LawResult>,
}

impl LawReport {
    pub fn all_equal(&self) -> bool {
        self.laws.iter().all(|l| l.verdict.is_equal())
    }

    pub fn law(&self, name: &str) -> Option<&LawResult> {
        self.laws.iter().find(|l| l.name == name)
    }
}

fn expect(pres: &Presentation, what: &str, found: &TypedString, expected: &TypedString) -> Result<(), LawError> {
    let sig = pres.sig();
    if found == expected {
        Ok(())
    } else {
        Err(LawError::Typing(format!(
            "{what}: expected {}, found {}",
            sig.show(expected),
            sig.show(found)
        )))
    }
}

/// Applies `rules` in order, each at the given offset, starting from `source`.
fn path(pres: &Presentation, source: &TypedString, steps: &[(usize, RuleRef)]) -> Result<Derivation, LawError> {
    let mut d = Derivation::identity(source.clone());
    for &(pos, rule) in steps {
        let cur = d.target(pres);
        let step = Step::at(pres, &cur, pos, rule).ok_or_else(|| {
            LawError::Typing(format!("{} does not apply to {}", pres.rule_name(rule), pres.sig().show(&cur)))
        })?;
        d.steps.push(step);
    }
    Ok(d)
}

fn decide(engine: &Engine, name: &str, left: Derivation, right: Derivation) -> LawResult {
    let verdict = match engine.equivalent(&left, &right) {
        Ok(v) => v,
        Err(e) => Verdict::Unknown(crate::equivalence::Diagnostics {
            reason: e.to_string(),
            ..Default::default()
        }),
    };
    LawResult {
        name: name.to_string(),
        left,
        right,
        verdict,
    }
}

/// Associativity and both unit laws for `(t, mu, eta)`, where `mu: t t => t`
/// and `eta: 1 => t` may be derived rules.
pub fn verify_monad_laws(engine: &Engine, t: &TypedString, mu: RuleRef, eta: RuleRef) -> Result<LawReport, LawError> {
    let pres = engine.pres();
    let sig = pres.sig();
    if t.is_empty() || t.dom() != t.cod() {
        return Err(LawError::Typing(format!("{} is not an endomorphism", sig.show(t))));
    }
    let tt = sig.concat(t, t).map_err(|e| LawError::Typing(e.to_string()))?;
    let ttt = sig.concat(&tt, t).map_err(|e| LawError::Typing(e.to_string()))?;
    expect(pres, "multiplication source", pres.lhs(mu), &tt)?;
    expect(pres, "multiplication target", pres.rhs(mu), t)?;
    expect(pres, "unit source", pres.lhs(eta), &TypedString::identity(t.dom()))?;
    expect(pres, "unit target", pres.rhs(eta), t)?;
    let n = t.len();
    let laws = vec![
        decide(
            engine,
            "associativity",
            path(pres, &ttt, &[(0, mu), (0, mu)])?,
            path(pres, &ttt, &[(n, mu), (0, mu)])?,
        ),
        decide(
            engine,
            "left unit",
            path(pres, t, &[(0, eta), (0, mu)])?,
            Derivation::identity(t.clone()),
        ),
        decide(
            engine,
            "right unit",
            path(pres, t, &[(n, eta), (0, mu)])?,
            Derivation::identity(t.clone()),
        ),
    ];
    Ok(LawReport { laws })
}

/// Both triangle identities for `eta: 1 => g f` and `eps: f g => 1`.
pub fn verify_adjunction_laws(
    engine: &Engine,
    f: &TypedString,
    g: &TypedString,
    eta: RuleRef,
    eps: RuleRef,
) -> Result<LawReport, LawError> {
    let pres = engine.pres();
    let sig = pres.sig();
    let gf = sig.concat(g, f).map_err(|e| LawError::Typing(format!("g f: {e}")))?;
    let fg = sig.concat(f, g).map_err(|e| LawError::Typing(format!("f g: {e}")))?;
    expect(pres, "unit source", pres.lhs(eta), &TypedString::identity(f.dom()))?;
    expect(pres, "unit target", pres.rhs(eta), &gf)?;
    expect(pres, "counit source", pres.lhs(eps), &fg)?;
    expect(pres, "counit target", pres.rhs(eps), &TypedString::identity(f.cod()))?;
    let laws = vec![
        decide(
            engine,
            "triangle on g",
            path(pres, g, &[(0, eta), (g.len(), eps)])?,
            Derivation::identity(g.clone()),
        ),
        decide(
            engine,
            "triangle on f",
            path(pres, f, &[(f.len(), eta), (0, eps)])?,
            Derivation::identity(f.clone()),
        ),
    ];
    Ok(LawReport { laws })
}
