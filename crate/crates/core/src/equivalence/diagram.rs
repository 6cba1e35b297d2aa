//! Diagrams of derivations and their commutativity.

use thiserror::Error;

use super::{Diagnostics, Engine, ProofTrace, Verdict};
use crate::rewrite::Derivation;
use crate::sig::{DerivDecl, Presentation, StepDecl, StrDecl, TypedString};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagramEdge {
    pub from: usize,
    pub to: usize,
    pub label: Derivation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagram {
    pub name: String,
    pub nodes: Vec<(String, TypedString)>,
    pub edges: Vec<DiagramEdge>,
    pub source: usize,
    pub sink: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("edge {edge} ({from} -> {to}) starts at {found}, but node {from} is {expected}")]
    EdgeSource {
        edge: usize,
        from: String,
        to: String,
        expected: String,
        found: String,
    },
    #[error("edge {edge} ({from} -> {to}) ends at {found}, but node {to} is {expected}")]
    EdgeTarget {
        edge: usize,
        from: String,
        to: String,
        expected: String,
        found: String,
    },
    #[error("edge {0} refers to a missing node")]
    MissingNode(usize),
    #[error("diagram has a cycle through node {0}")]
    Cycle(String),
    #[error("node {0} lies on no path from source to sink")]
    OffPath(String),
    #[error("no path from source to sink")]
    NoPath,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiagramResult {
    /// `traces[i]` rewrites the first path into path `i`.
    Commutes {
        paths: Vec<Vec<usize>>,
        traces: Vec<ProofTrace>,
    },
    Unknown {
        paths: Vec<Vec<usize>>,
        failing: usize,
        diagnostics: Diagnostics,
    },
}

impl Diagram {
    pub fn node_name(&self, i: usize) -> &str {
        &self.nodes[i].0
    }

    pub fn validate(&self, pres: &Presentation) -> Result<(), DiagramError> {
        let sig = pres.sig();
        let n = self.nodes.len();
        if self.source >= n || self.sink >= n {
            return Err(DiagramError::NoPath);
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.from >= n || e.to >= n {
                return Err(DiagramError::MissingNode(i));
            }
            let (from, to) = (self.node_name(e.from).to_string(), self.node_name(e.to).to_string());
            if e.label.source != self.nodes[e.from].1 {
                return Err(DiagramError::EdgeSource {
                    edge: i,
                    from,
                    to,
                    expected: sig.show_compact(&self.nodes[e.from].1),
                    found: sig.show_compact(&e.label.source),
                });
            }
            let t = e.label.target(pres);
            if t != self.nodes[e.to].1 {
                return Err(DiagramError::EdgeTarget {
                    edge: i,
                    from,
                    to,
                    expected: sig.show_compact(&self.nodes[e.to].1),
                    found: sig.show_compact(&t),
                });
            }
        }
        // Colour-based depth-first search for cycles.
        let mut colour = vec![0u8; n];
        fn visit(d: &Diagram, v: usize, colour: &mut [u8]) -> Result<(), DiagramError> {
            colour[v] = 1;
            for e in d.edges.iter().filter(|e| e.from == v) {
                match colour[e.to] {
                    1 => return Err(DiagramError::Cycle(d.node_name(e.to).to_string())),
                    0 => visit(d, e.to, colour)?,
                    _ => {}
                }
            }
            colour[v] = 2;
            Ok(())
        }
        for v in 0..n {
            if colour[v] == 0 {
                visit(self, v, &mut colour)?;
            }
        }
        let paths = self.paths();
        if paths.is_empty() {
            return Err(DiagramError::NoPath);
        }
        let mut on_path = vec![false; n];
        on_path[self.source] = true;
        for p in &paths {
            for &e in p {
                on_path[self.edges[e].to] = true;
            }
        }
        if let Some(v) = on_path.iter().position(|b| !b) {
            return Err(DiagramError::OffPath(self.node_name(v).to_string()));
        }
        Ok(())
    }

    /// Source-to-sink paths as edge lists, depth first in edge order.
    pub fn paths(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut stack = Vec::new();
        self.walk(self.source, &mut stack, &mut out);
        out
    }

    fn walk(&self, v: usize, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if v == self.sink {
            out.push(stack.clone());
            return;
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.from == v && !stack.contains(&i) {
                stack.push(i);
                self.walk(e.to, stack, out);
                stack.pop();
            }
        }
    }

    pub fn path_derivation(&self, path: &[usize]) -> Derivation {
        path.iter().fold(Derivation::identity(self.nodes[self.source].1.clone()), |d, &e| {
            d.then(&self.edges[e].label)
        })
    }
}

/// Compares every source-to-sink path with the first one.
pub fn check_diagram(engine: &Engine, diagram: &Diagram) -> Result<DiagramResult, DiagramError> {
    let pres = engine.pres();
    diagram.validate(pres)?;
    let paths = diagram.paths();
    let reference = diagram.path_derivation(&paths[0]);
    let mut traces = vec![ProofTrace::default()];
    for (i, p) in paths.iter().enumerate().skip(1) {
        let d = diagram.path_derivation(p);
        match engine.equivalent(&reference, &d) {
            Ok(Verdict::Equal(t)) => traces.push(t),
            Ok(Verdict::Unknown(diagnostics)) => {
                return Ok(DiagramResult::Unknown {
                    paths,
                    failing: i,
                    diagnostics,
                })
            }
            Err(e) => {
                return Ok(DiagramResult::Unknown {
                    paths,
                    failing: i,
                    diagnostics: Diagnostics {
                        reason: e.to_string(),
                        ..Diagnostics::default()
                    },
                })
            }
        }
    }
    Ok(DiagramResult::Commutes { paths, traces })
}

type EdgeSpec<'a> = (&'a str, &'a str, &'a [(&'a [&'a str], &'a str, &'a [&'a str])]);

/// The nine-node two-monad diagram, over the `two-monads-intro` preset.
pub fn intro_diagram(pres: &Presentation) -> Option<Diagram> {
    let nodes: [(&str, &[&str]); 9] = [
        ("n00", &["T1", "T1", "T2"]),
        ("n01", &["T1", "T2", "T1", "T2", "T1"]),
        ("n02", &["T1", "T2", "T1"]),
        ("n10", &["T1", "T1", "T2", "T1"]),
        ("n11", &["T2", "T1", "T2", "T1", "T2", "T1"]),
        ("n12", &["T2", "T1", "T2", "T1"]),
        ("n20", &["T1", "T2", "T1"]),
        ("n21", &["T2", "T1", "T2", "T1"]),
        ("n22", &["T2", "T1"]),
    ];
    let edges: [EdgeSpec; 12] = [
        ("n00", "n01", &[(&["T1"], "eta2", &["T1", "T2"]), (&["T1", "T2", "T1", "T2"], "eta1", &[])]),
        ("n00", "n10", &[(&["T1", "T1", "T2"], "eta1", &[])]),
        ("n01", "n02", &[(&["T1"], "mu", &[])]),
        ("n01", "n11", &[(&[], "eta2", &["T1", "T2", "T1", "T2", "T1"])]),
        ("n02", "n12", &[(&[], "eta2", &["T1", "T2", "T1"])]),
        ("n10", "n11", &[(&["T1"], "eta2", &["T1", "T2", "T1"]), (&[], "eta2", &["T1", "T2", "T1", "T2", "T1"])]),
        ("n10", "n20", &[(&[], "mu1", &["T2", "T1"])]),
        ("n11", "n12", &[(&["T2", "T1"], "mu", &[])]),
        ("n11", "n21", &[(&[], "mu", &["T2", "T1"])]),
        ("n12", "n22", &[(&[], "mu", &[])]),
        ("n20", "n21", &[(&[], "eta2", &["T1", "T2", "T1"])]),
        ("n21", "n22", &[(&[], "mu", &[])]),
    ];
    let index = |n: &str| nodes.iter().position(|(m, _)| *m == n);
    let mut out_nodes = Vec::new();
    for (name, gens) in nodes {
        out_nodes.push((name.to_string(), pres.resolve_string(&StrDecl::gens(gens)).ok()?));
    }
    let mut out_edges = Vec::new();
    for (from, to, steps) in edges {
        let decl = DerivDecl::Steps(steps.iter().map(|(l, r, rt)| StepDecl::new(l, r, rt)).collect());
        out_edges.push(DiagramEdge {
            from: index(from)?,
            to: index(to)?,
            label: pres.resolve_derivation(&decl).ok()?,
        });
    }
    Some(Diagram {
        name: "intro".into(),
        nodes: out_nodes,
        edges: out_edges,
        source: 0,
        sink: 8,
    })
}
