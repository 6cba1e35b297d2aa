use crate::sig::{DerivDecl, Presentation, StepDecl, StrDecl};

pub fn show_str(s: &StrDecl) -> String {
    match &s.base {
        Some(c) if s.gens.is_empty() => format!("1_{c}"),
        _ => s.gens.join(" "),
    }
}

fn show_step(s: &StepDecl) -> String {
    format!("({}) {} ({})", s.left.join(" "), s.rule, s.right.join(" "))
}

pub fn show_deriv(d: &DerivDecl) -> String {
    match d {
        DerivDecl::Identity(s) => format!("id({})", show_str(s)),
        DerivDecl::Steps(steps) => {
            let parts: Vec<String> = steps.iter().map(show_step).collect();
            format!("{{ {} }}", parts.join(" ; "))
        }
    }
}

/// The presentation in spec-file syntax; parsing the output rebuilds it.
pub fn print_spec(pres: &Presentation) -> String {
    let d = pres.declarations();
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    for c in &d.cells {
        line(format!("cell {c}"));
    }
    for g in &d.gens {
        line(format!("gen {} : {} -> {}", g.name, g.dom, g.cod));
    }
    if let Some(order) = &d.precedence {
        line(format!("precedence {}", order.join(" < ")));
    }
    for r in &d.rules {
        line(format!("rule {} : {} => {}", r.name, show_str(&r.lhs), show_str(&r.rhs)));
    }
    for r in &d.derived {
        line(format!(
            "defrule {} : {} => {} = {}",
            r.name,
            show_str(&r.lhs),
            show_str(&r.rhs),
            show_deriv(&r.body)
        ));
    }
    for e in &d.equations {
        line(format!("eq {} : {} = {}", e.name, show_deriv(&e.left), show_deriv(&e.right)));
    }
    for u in &d.universes {
        line(format!("universe {} = {}", u.name, u.pattern));
    }
    out
}
