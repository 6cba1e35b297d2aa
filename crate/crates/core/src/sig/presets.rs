//! Built-in presentations: a monad, two monads with a distributive law, an
//! adjunction, and the two-monad system behind the introductory diagram.

use super::{
    build_presentation, Declarations, DerivDecl, DerivedDecl, EquationDecl, GenDecl, Presentation, RuleDecl,
    StepDecl, StrDecl, UniverseDecl,
};

pub const PRESET_NAMES: [&str; 4] = ["monad", "composite-monad", "adjunction", "two-monads-intro"];

pub fn preset(name: &str) -> Option<Presentation> {
    let decls = match name {
        "monad" => monad_decls(),
        "composite-monad" => composite_decls(&CompositeNames::PT),
        "adjunction" => adjunction_decls(),
        "two-monads-intro" => composite_decls(&CompositeNames::INTRO),
        _ => return None,
    };
    Some(build_presentation(&decls).expect("built-in presets are well-typed"))
}

fn steps(list: &[(&[&str], &str, &[&str])]) -> DerivDecl {
    DerivDecl::Steps(list.iter().map(|(l, r, rt)| StepDecl::new(l, r, rt)).collect())
}

fn id(gens: &[&str]) -> DerivDecl {
    DerivDecl::Identity(StrDecl::gens(gens))
}

fn rule(name: &str, lhs: StrDecl, rhs: StrDecl) -> RuleDecl {
    RuleDecl {
        name: name.into(),
        lhs,
        rhs,
    }
}

fn eq(name: &str, left: DerivDecl, right: DerivDecl) -> EquationDecl {
    EquationDecl {
        name: name.into(),
        left,
        right,
    }
}

fn universe(name: &str, pattern: &str) -> UniverseDecl {
    UniverseDecl {
        name: name.into(),
        pattern: pattern.into(),
    }
}

/// Rules `mu: t t => t`, `eta: 1 => t` and the associativity and unit laws.
fn monad_part(d: &mut Declarations, cell: &str, t: &str, mu: &str, eta: &str, suffix: &str) {
    d.rules.push(rule(mu, StrDecl::gens(&[t, t]), StrDecl::gens(&[t])));
    d.rules.push(rule(eta, StrDecl::identity(cell), StrDecl::gens(&[t])));
    d.equations.push(eq(
        &format!("assoc{suffix}"),
        steps(&[(&[], mu, &[t]), (&[], mu, &[])]),
        steps(&[(&[t], mu, &[]), (&[], mu, &[])]),
    ));
    d.equations.push(eq(
        &format!("unitL{suffix}"),
        steps(&[(&[], eta, &[t]), (&[], mu, &[])]),
        id(&[t]),
    ));
    d.equations.push(eq(
        &format!("unitR{suffix}"),
        steps(&[(&[t], eta, &[]), (&[], mu, &[])]),
        id(&[t]),
    ));
}

fn monad_decls() -> Declarations {
    let mut d = Declarations {
        cells: vec!["C".into()],
        gens: vec![GenDecl {
            name: "T".into(),
            dom: "C".into(),
            cod: "C".into(),
        }],
        ..Declarations::default()
    };
    monad_part(&mut d, "C", "T", "mu", "eta", "");
    d.universes.push(universe("Tstar", "T*"));
    d.universes.push(universe("Tplus", "T+"));
    d
}

struct CompositeNames {
    p: &'static str,
    t: &'static str,
    mu_p: &'static str,
    eta_p: &'static str,
    mu_t: &'static str,
    eta_t: &'static str,
    theta: &'static str,
    mu_pt: &'static str,
    eta_pt: &'static str,
    suffix_p: &'static str,
    suffix_t: &'static str,
    star: &'static str,
    pow: &'static str,
}

impl CompositeNames {
    const PT: CompositeNames = CompositeNames {
        p: "P",
        t: "T",
        mu_p: "muP",
        eta_p: "etaP",
        mu_t: "muT",
        eta_t: "etaT",
        theta: "theta",
        mu_pt: "muPT",
        eta_pt: "etaPT",
        suffix_p: "P",
        suffix_t: "T",
        star: "PTstar",
        pow: "PTpow",
    };

    // P := T2, T := T1.
    const INTRO: CompositeNames = CompositeNames {
        p: "T2",
        t: "T1",
        mu_p: "mu2",
        eta_p: "eta2",
        mu_t: "mu1",
        eta_t: "eta1",
        theta: "theta",
        mu_pt: "mu",
        eta_pt: "eta",
        suffix_p: "2",
        suffix_t: "1",
        star: "star",
        pow: "pow",
    };
}

fn composite_decls(n: &CompositeNames) -> Declarations {
    let (p, t) = (n.p, n.t);
    let gen = |name: &str| GenDecl {
        name: name.into(),
        dom: "C".into(),
        cod: "C".into(),
    };
    let mut d = Declarations {
        cells: vec!["C".into()],
        gens: vec![gen(p), gen(t)],
        precedence: Some(vec![p.into(), t.into()]),
        ..Declarations::default()
    };
    monad_part(&mut d, "C", p, n.mu_p, n.eta_p, n.suffix_p);
    monad_part(&mut d, "C", t, n.mu_t, n.eta_t, n.suffix_t);
    // Keep the rule listing in the order P-monad, T-monad, swap.
    d.rules.push(rule(n.theta, StrDecl::gens(&[t, p]), StrDecl::gens(&[p, t])));

    let th = n.theta;
    d.equations.push(eq(
        &format!("{th}_{}", n.mu_p),
        steps(&[(&[], th, &[p]), (&[p], th, &[]), (&[], n.mu_p, &[t])]),
        steps(&[(&[t], n.mu_p, &[]), (&[], th, &[])]),
    ));
    d.equations.push(eq(
        &format!("{th}_{}", n.mu_t),
        steps(&[(&[t], th, &[]), (&[], th, &[t]), (&[p], n.mu_t, &[])]),
        steps(&[(&[], n.mu_t, &[p]), (&[], th, &[])]),
    ));
    d.equations.push(eq(
        &format!("{th}_{}", n.eta_p),
        steps(&[(&[t], n.eta_p, &[]), (&[], th, &[])]),
        steps(&[(&[], n.eta_p, &[t])]),
    ));
    d.equations.push(eq(
        &format!("{th}_{}", n.eta_t),
        steps(&[(&[], n.eta_t, &[p]), (&[], th, &[])]),
        steps(&[(&[p], n.eta_t, &[])]),
    ));

    d.derived.push(DerivedDecl {
        name: n.mu_pt.into(),
        lhs: StrDecl::gens(&[p, t, p, t]),
        rhs: StrDecl::gens(&[p, t]),
        body: steps(&[(&[p], th, &[t]), (&[p, p], n.mu_t, &[]), (&[], n.mu_p, &[t])]),
    });
    d.derived.push(DerivedDecl {
        name: n.eta_pt.into(),
        lhs: StrDecl::identity("C"),
        rhs: StrDecl::gens(&[p, t]),
        body: steps(&[(&[], n.eta_t, &[]), (&[], n.eta_p, &[t])]),
    });

    d.universes.push(universe(n.star, &format!("({p} | {t})*")));
    d.universes.push(universe(n.pow, &format!("({p} {t})*")));
    d
}

fn adjunction_decls() -> Declarations {
    let mut d = Declarations {
        cells: vec!["C".into(), "D".into()],
        gens: vec![
            GenDecl {
                name: "F".into(),
                dom: "C".into(),
                cod: "D".into(),
            },
            GenDecl {
                name: "G".into(),
                dom: "D".into(),
                cod: "C".into(),
            },
        ],
        ..Declarations::default()
    };
    d.rules.push(rule("eta", StrDecl::identity("C"), StrDecl::gens(&["G", "F"])));
    d.rules.push(rule("eps", StrDecl::gens(&["F", "G"]), StrDecl::identity("D")));
    d.equations.push(eq(
        "triangleG",
        steps(&[(&[], "eta", &["G"]), (&["G"], "eps", &[])]),
        id(&["G"]),
    ));
    d.equations.push(eq(
        "triangleF",
        steps(&[(&["F"], "eta", &[]), (&[], "eps", &["F"])]),
        id(&["F"]),
    ));
    d.universes.push(universe("FGF", "F (G F)*"));
    d.universes.push(universe("GFG", "G (F G)*"));
    d
}
