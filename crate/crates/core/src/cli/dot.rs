//! Graphviz text for diagrams and reduction graphs.

use std::collections::HashMap;
use std::fmt::Write;

use crate::equivalence::Diagram;
use crate::rewrite::find_redexes;
use crate::sig::{Presentation, RuleRef, TypedString};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn dot_diagram(pres: &Presentation, d: &Diagram) -> String {
    let sig = pres.sig();
    let mut out = format!("digraph {} {{\n", quote(&d.name));
    for (i, (name, s)) in d.nodes.iter().enumerate() {
        let _ = writeln!(out, "  n{i} [label={}, tooltip={}];", quote(&sig.show_compact(s)), quote(name));
    }
    for e in &d.edges {
        let label: Vec<String> = e.label.steps.iter().map(|s| s.label(pres)).collect();
        let _ = writeln!(out, "  n{} -> n{} [label={}];", e.from, e.to, quote(&label.join("; ")));
    }
    out.push_str("}\n");
    out
}

/// Every string reachable from `start` by `rules`, breadth first, with one
/// edge per step. Stops adding nodes after `max_nodes`.
pub fn dot_reduction_graph(pres: &Presentation, start: &TypedString, rules: &[RuleRef], max_nodes: usize) -> String {
    let sig = pres.sig();
    let mut ids: HashMap<TypedString, usize> = HashMap::from([(start.clone(), 0)]);
    let mut order = vec![start.clone()];
    let mut edges = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let s = order[i].clone();
        for step in find_redexes(pres, &s, rules) {
            let t = step.target(pres);
            let j = match ids.get(&t) {
                Some(&j) => j,
                None if order.len() < max_nodes => {
                    ids.insert(t.clone(), order.len());
                    order.push(t);
                    order.len() - 1
                }
                None => continue,
            };
            edges.push((i, j, step.label(pres)));
        }
        i += 1;
    }
    let mut out = format!("digraph {} {{\n", quote(&format!("reductions of {}", sig.show_compact(start))));
    for (k, s) in order.iter().enumerate() {
        let _ = writeln!(out, "  n{k} [label={}];", quote(&sig.show_compact(s)));
    }
    for (a, b, l) in edges {
        let _ = writeln!(out, "  n{a} -> n{b} [label={}];", quote(&l));
    }
    out.push_str("}\n");
    out
}
