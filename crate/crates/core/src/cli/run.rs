use std::fmt::Write;
use std::time::Instant;

use serde::Serialize;

use super::dot::{dot_diagram, dot_reduction_graph};
use super::parse::{DiagramDecl, NamedTask, SpecFile, Task};
use crate::confluence::{PairReport, PairStatus};
use crate::equivalence::{check_diagram, Diagram, DiagramEdge, DiagramResult, Engine, Verdict};
use crate::rewrite::normalize_good;
use crate::sig::{BuildError, Presentation, RuleRef, StrDecl, TypedString};
use crate::terminality::{
    check_terminal, check_terminal_subcategory, verify_adjunction_laws, verify_monad_laws, Existence, LawReport,
    TerminalityReport, Uniqueness,
};
use crate::Budget;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Ok,
    Unknown,
    Failure,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TaskRecord {
    pub task: String,
    pub verdict: String,
    pub outcome: Outcome,
    pub witness: Vec<String>,
    pub trace: Vec<String>,
    pub details: Vec<String>,
    pub budget: Budget,
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub timestamp: u64,
    pub tasks: Vec<TaskRecord>,
    pub exit_code: i32,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for t in &self.tasks {
            let _ = writeln!(out, "[{}] {} ({} ms)", t.verdict, t.task, t.elapsed_ms);
            for d in &t.details {
                let _ = writeln!(out, "    {d}");
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub budget: Budget,
    /// Length bound for terminal checks that do not state one.
    pub max_len: Option<usize>,
}

pub struct RunOutput {
    pub report: Report,
    pub dot: String,
}

struct Record {
    verdict: String,
    outcome: Outcome,
    witness: Vec<String>,
    trace: Vec<String>,
    details: Vec<String>,
}

impl Record {
    fn new(verdict: &str, outcome: Outcome) -> Record {
        Record {
            verdict: verdict.to_string(),
            outcome,
            witness: Vec::new(),
            trace: Vec::new(),
            details: Vec::new(),
        }
    }

    fn failure(msg: impl Into<String>) -> Record {
        let mut r = Record::new("Error", Outcome::Failure);
        r.details.push(msg.into());
        r
    }
}

fn errors(es: Vec<BuildError>) -> String {
    es.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ")
}

fn resolve_rule(pres: &Presentation, name: &str) -> Result<RuleRef, String> {
    pres.rule_by_name(name).ok_or_else(|| format!("unknown rule `{name}`"))
}

fn resolve_str(pres: &Presentation, s: &StrDecl) -> Result<TypedString, String> {
    pres.resolve_string(s).map_err(errors)
}

/// Executes the tasks in order with one shared engine.
pub fn run(spec: &SpecFile, opts: &RunOptions) -> RunOutput {
    let pres = &spec.presentation;
    let engine = Engine::new(pres, opts.budget);
    let mut tasks = Vec::new();
    let mut dot = String::new();
    for t in &spec.tasks {
        let start = Instant::now();
        let rec = match run_task(&engine, t, opts, &mut dot) {
            Ok(r) => r,
            Err(msg) => Record::failure(msg),
        };
        tasks.push(TaskRecord {
            task: t.name.clone(),
            verdict: rec.verdict,
            outcome: rec.outcome,
            witness: rec.witness,
            trace: rec.trace,
            details: rec.details,
            budget: opts.budget,
            elapsed_ms: start.elapsed().as_millis() as u64,
        });
    }
    if dot.is_empty() {
        dot = "digraph \"rewcat\" {\n}\n".into();
    }
    let exit_code = match tasks.iter().map(|t| t.outcome).max() {
        Some(Outcome::Failure) => 1,
        Some(Outcome::Unknown) => 2,
        _ => 0,
    };
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    RunOutput {
        report: Report {
            timestamp,
            tasks,
            exit_code,
        },
        dot,
    }
}

fn run_task(engine: &Engine, t: &NamedTask, opts: &RunOptions, dot: &mut String) -> Result<Record, String> {
    let pres = engine.pres();
    let sig = pres.sig();
    match &t.task {
        Task::Confluence => Ok(confluence(engine)),
        Task::Terminal {
            candidate,
            universe,
            rules,
            max_len,
        } => {
            let c = resolve_str(pres, candidate)?;
            let u = pres
                .universe_by_name(universe)
                .ok_or_else(|| format!("unknown universe `{universe}`"))?;
            let default_len = if u.pattern.generators().len() <= 1 { 7 } else { 6 };
            let len = max_len.or(opts.max_len).unwrap_or(default_len);
            let report = match rules {
                None => check_terminal(engine, &c, u, len),
                Some(names) => {
                    let active = names
                        .iter()
                        .map(|n| resolve_rule(pres, n))
                        .collect::<Result<Vec<_>, _>>()?;
                    check_terminal_subcategory(engine, &c, u, &active, len)
                }
            }
            .map_err(|e| e.to_string())?;
            Ok(terminal(pres, &report))
        }
        Task::Equiv { left, right } => {
            let l = pres.resolve_derivation(left).map_err(errors)?;
            let r = pres.resolve_derivation(right).map_err(errors)?;
            let v = engine.equivalent(&l, &r).map_err(|e| e.to_string())?;
            let mut rec = verdict_record(pres, &v);
            rec.witness = vec![l.show(pres), r.show(pres)];
            Ok(rec)
        }
        Task::MonadLaws { t, mu, eta } => {
            let s = resolve_str(pres, t)?;
            let report = verify_monad_laws(engine, &s, resolve_rule(pres, mu)?, resolve_rule(pres, eta)?)
                .map_err(|e| e.to_string())?;
            Ok(laws(pres, &report))
        }
        Task::AdjunctionLaws { f, g, eta, eps } => {
            let (fs, gs) = (resolve_str(pres, f)?, resolve_str(pres, g)?);
            let report = verify_adjunction_laws(engine, &fs, &gs, resolve_rule(pres, eta)?, resolve_rule(pres, eps)?)
                .map_err(|e| e.to_string())?;
            Ok(laws(pres, &report))
        }
        Task::Diagram(decl) => {
            let d = build_diagram(pres, decl)?;
            let result = check_diagram(engine, &d).map_err(|e| format!("rejected as ill-formed: {e}"))?;
            dot.push_str(&dot_diagram(pres, &d));
            Ok(diagram(pres, &d, &result))
        }
        Task::Normalize(s) => {
            let x = resolve_str(pres, s)?;
            let (nf, d) = normalize_good(pres, &x).map_err(|e| e.to_string())?;
            dot.push_str(&dot_reduction_graph(pres, &x, &pres.good_rules(), 200));
            let mut rec = Record::new("Normalized", Outcome::Ok);
            rec.witness.push(d.show(pres));
            rec.details.push(format!("normal form {}", sig.show(&nf)));
            Ok(rec)
        }
    }
}

fn pair_line(pres: &Presentation, p: &PairReport) -> String {
    let status = match &p.status {
        PairStatus::Joined(c) => format!("joined by {} ; {} ({} moves)", c.left.show(pres), c.right.show(pres), c.trace.len()),
        PairStatus::Absorbed(c) => format!("absorbed into {} ({} moves)", c.replacement.show(pres), c.trace.len()),
        PairStatus::JoinedUnverified { diagnostics, .. } => format!("joinable, not shown equal: {}", diagnostics.reason),
        PairStatus::Failed(r) => format!("failed: {r}"),
    };
    format!("{}: {status}", p.pair.show(pres))
}

fn confluence(engine: &Engine) -> Record {
    let pres = engine.pres();
    let good = engine.good_confluence();
    let bad = engine.bad_elimination();
    let ok = good.is_certified() && bad.is_certified();
    let mut rec = if ok {
        Record::new("Certified", Outcome::Ok)
    } else {
        Record::new("NotCertified", Outcome::Unknown)
    };
    rec.details.push(format!("termination: {:?}", good.termination).replace("Base", "rule "));
    rec.details.push(format!(
        "good confluence {:?}: {} critical pairs",
        good.status,
        good.pairs.len()
    ));
    rec.details.push(format!("bad elimination {:?}: {} critical pairs", bad.status, bad.pairs.len()));
    for p in good.pairs.iter().chain(&bad.pairs) {
        if !p.status.is_certified() {
            rec.details.push(pair_line(pres, p));
        }
        rec.witness.push(pair_line(pres, p));
    }
    rec
}

fn terminal(pres: &Presentation, r: &TerminalityReport) -> Record {
    let sig = pres.sig();
    let mut rec = if r.is_terminal() {
        Record::new("Terminal", Outcome::Ok)
    } else {
        Record::new("NotCertified", Outcome::Unknown)
    };
    rec.details.extend(r.basis.iter().cloned());
    if let Some(crate::sig::Closure::NotClosed { string, step }) = &r.not_closed {
        rec.details.push(format!(
            "universe not closed ({} on {}); checked the induced subcategory",
            step.show(pres),
            sig.show(string)
        ));
    }
    for s in &r.results {
        let x = sig.show_compact(&s.string);
        match &s.existence {
            Existence::Found(d) => rec.witness.push(format!("{x}: {}", d.show(pres))),
            Existence::NotFound(why) => rec.details.push(format!("{x}: no derivation ({why})")),
        }
        if let Uniqueness::Unknown(why) = &s.uniqueness {
            rec.details.push(format!("{x}: uniqueness unknown ({why})"));
        }
    }
    rec
}

fn verdict_record(pres: &Presentation, v: &Verdict) -> Record {
    match v {
        Verdict::Equal(t) => {
            let mut rec = Record::new("Equal", Outcome::Ok);
            rec.trace = t.show(pres);
            rec
        }
        Verdict::Unknown(d) => {
            let mut rec = Record::new("Unknown", Outcome::Unknown);
            rec.details.push(format!("{} ({} nodes, depth {})", d.reason, d.nodes, d.depth));
            rec
        }
    }
}

fn laws(pres: &Presentation, r: &LawReport) -> Record {
    let mut rec = if r.all_equal() {
        Record::new("Equal", Outcome::Ok)
    } else {
        Record::new("Unknown", Outcome::Unknown)
    };
    for law in &r.laws {
        match &law.verdict {
            Verdict::Equal(t) => {
                rec.details.push(format!("{}: Equal ({} moves)", law.name, t.len()));
                rec.trace.extend(t.show(pres).into_iter().map(|m| format!("{}: {m}", law.name)));
            }
            Verdict::Unknown(d) => rec.details.push(format!("{}: Unknown ({})", law.name, d.reason)),
        }
        rec.witness.push(format!("{}: {} = {}", law.name, law.left.show(pres), law.right.show(pres)));
    }
    rec
}

fn build_diagram(pres: &Presentation, decl: &DiagramDecl) -> Result<Diagram, String> {
    let index = |n: &str| {
        decl.nodes
            .iter()
            .position(|(m, _)| m == n)
            .ok_or_else(|| format!("unknown node `{n}`"))
    };
    let mut nodes = Vec::new();
    for (n, s) in &decl.nodes {
        nodes.push((n.clone(), resolve_str(pres, s)?));
    }
    let mut edges = Vec::new();
    for (from, to, label) in &decl.edges {
        edges.push(DiagramEdge {
            from: index(from)?,
            to: index(to)?,
            label: pres
                .resolve_derivation(label)
                .map_err(|e| format!("edge {from} -> {to}: {}", errors(e)))?,
        });
    }
    Ok(Diagram {
        name: decl.name.clone(),
        nodes,
        edges,
        source: index(&decl.source)?,
        sink: index(&decl.sink)?,
    })
}

fn diagram(pres: &Presentation, d: &Diagram, r: &DiagramResult) -> Record {
    let path_text = |p: &[usize]| {
        let mut names = vec![d.node_name(d.source).to_string()];
        names.extend(p.iter().map(|&e| d.node_name(d.edges[e].to).to_string()));
        names.join(" -> ")
    };
    match r {
        DiagramResult::Commutes { paths, traces } => {
            let mut rec = Record::new("Commutes", Outcome::Ok);
            rec.details.push(format!("{} paths from {} to {}", paths.len(), d.node_name(d.source), d.node_name(d.sink)));
            for (p, t) in paths.iter().zip(traces) {
                rec.witness.push(path_text(p));
                rec.trace.extend(t.show(pres).into_iter().map(|m| format!("{}: {m}", path_text(p))));
            }
            rec
        }
        DiagramResult::Unknown {
            paths,
            failing,
            diagnostics,
        } => {
            let mut rec = Record::new("Unknown", Outcome::Unknown);
            rec.details.push(format!(
                "{} vs {}: {}",
                path_text(&paths[0]),
                path_text(&paths[*failing]),
                diagnostics.reason
            ));
            rec
        }
    }
}
