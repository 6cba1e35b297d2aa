//! Spec-file front end: parsing, task execution, reports and DOT output.

mod dot;
mod parse;
mod print;
mod run;

pub use dot::{dot_diagram, dot_reduction_graph};
pub use parse::{parse_spec, DiagramDecl, NamedTask, SpecError, SpecFile, Task};
pub use print::{print_spec, show_deriv, show_str};
pub use run::{run, Outcome, Report, RunOptions, RunOutput, TaskRecord};

use crate::equivalence::{intro_diagram, Diagram};
use crate::sig::{preset, DerivDecl, Presentation};

/// The diagram as a `check diagram` block.
pub fn diagram_text(pres: &Presentation, d: &Diagram) -> String {
    let mut out = format!("check diagram {} {{\n", d.name);
    for (name, s) in &d.nodes {
        out.push_str(&format!("  node {name} = {}\n", pres.sig().show(s)));
    }
    for e in &d.edges {
        out.push_str(&format!(
            "  edge {} -> {} : {}\n",
            d.node_name(e.from),
            d.node_name(e.to),
            show_deriv(&DerivDecl::of(pres, &e.label))
        ));
    }
    out.push_str(&format!("  source {}\n  sink {}\n}}\n", d.node_name(d.source), d.node_name(d.sink)));
    out
}

/// Spec text for a built-in presentation together with its default checks.
pub fn preset_spec(name: &str) -> Option<String> {
    let pres = preset(name)?;
    let mut text = print_spec(&pres);
    text.push('\n');
    let tasks: &[&str] = match name {
        "monad" => &["check confluence", "check terminal T in Tstar maxlen 7", "check laws monad T mu eta"],
        "composite-monad" => &[
            "check confluence",
            "check terminal P T in PTstar maxlen 6",
            "check terminal P T in PTpow [rules muPT, etaPT] maxlen 6",
            "check laws monad P T muPT etaPT",
            "check equiv { () etaT () ; () etaP (T) } = { () etaP () ; (P) etaT () }",
        ],
        "adjunction" => &[
            "check confluence",
            "check terminal F in FGF maxlen 7",
            "check terminal G in GFG maxlen 7",
            "check laws adjunction F G eta eps",
        ],
        "two-monads-intro" => &[
            "check confluence",
            "check terminal T2 T1 in star maxlen 6",
            "check laws monad T2 T1 mu eta",
        ],
        _ => &[],
    };
    for t in tasks {
        text.push_str(t);
        text.push('\n');
    }
    if name == "two-monads-intro" {
        text.push_str(&diagram_text(&pres, &intro_diagram(&pres)?));
    }
    Some(text)
}
