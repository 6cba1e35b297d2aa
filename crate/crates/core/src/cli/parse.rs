//! Line-oriented spec files. A statement ends at a newline unless braces are
//! still open; `#` starts a comment.

use std::collections::HashMap;

use thiserror::Error;

use crate::sig::{
    build_presentation, Declarations, DerivDecl, DerivedDecl, EquationDecl, GenDecl, Presentation, RuleDecl,
    StepDecl, StrDecl, UniverseDecl,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagramDecl {
    pub name: String,
    pub nodes: Vec<(String, StrDecl)>,
    pub edges: Vec<(String, String, DerivDecl)>,
    pub source: String,
    pub sink: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Task {
    Confluence,
    Terminal {
        candidate: StrDecl,
        universe: String,
        rules: Option<Vec<String>>,
        max_len: Option<usize>,
    },
    Equiv {
        left: DerivDecl,
        right: DerivDecl,
    },
    MonadLaws {
        t: StrDecl,
        mu: String,
        eta: String,
    },
    AdjunctionLaws {
        f: StrDecl,
        g: StrDecl,
        eta: String,
        eps: String,
    },
    Diagram(DiagramDecl),
    Normalize(StrDecl),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedTask {
    pub name: String,
    pub line: usize,
    pub task: Task,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecFile {
    pub presentation: Presentation,
    pub tasks: Vec<NamedTask>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("{}", .0.join("\n"))]
    Typing(Vec<String>),
}

const KEYWORDS: [&str; 18] = [
    "cell", "gen", "rule", "defrule", "eq", "universe", "precedence", "check", "normalize", "id", "in", "rules",
    "maxlen", "node", "edge", "source", "sink", "laws",
];

#[derive(Clone, Debug, PartialEq, Eq)]
enum Kind {
    Ident,
    Sym,
    Newline,
}

#[derive(Clone, Debug)]
struct Tok {
    kind: Kind,
    text: String,
    line: usize,
    col: usize,
}

fn tokenize(text: &str) -> Result<Vec<Tok>, SpecError> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let (ln, col) = (li + 1, i + 1);
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_alphanumeric() || c == '_' || c == '\'' {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                    i += 1;
                }
                out.push(Tok {
                    kind: Kind::Ident,
                    text: chars[start..i].iter().collect(),
                    line: ln,
                    col,
                });
                continue;
            }
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            let sym = if two == "=>" || two == "->" {
                two
            } else if "{}();:=<|*+,[]".contains(c) {
                c.to_string()
            } else {
                return Err(SpecError::Parse {
                    line: ln,
                    col,
                    msg: format!("unexpected character `{c}`"),
                });
            };
            i += sym.chars().count();
            out.push(Tok {
                kind: Kind::Sym,
                text: sym,
                line: ln,
                col,
            });
        }
        out.push(Tok {
            kind: Kind::Newline,
            text: String::new(),
            line: li + 1,
            col: chars.len() + 1,
        });
    }
    Ok(out)
}

/// Groups tokens into statements, treating newlines inside braces as spaces.
fn statements(toks: Vec<Tok>) -> Result<Vec<Vec<Tok>>, SpecError> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    let mut depth = 0usize;
    let mut last = (1, 1);
    for t in toks {
        last = (t.line, t.col);
        match (t.kind.clone(), t.text.as_str()) {
            (Kind::Newline, _) => {
                if depth == 0 && !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                continue;
            }
            (Kind::Sym, "{") => depth += 1,
            (Kind::Sym, "}") => {
                if depth == 0 {
                    return Err(SpecError::Parse {
                        line: t.line,
                        col: t.col,
                        msg: "unmatched `}`".into(),
                    });
                }
                depth -= 1;
            }
            _ => {}
        }
        cur.push(t);
    }
    if depth > 0 {
        return Err(SpecError::Parse {
            line: last.0,
            col: last.1,
            msg: "unclosed `{`".into(),
        });
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    Ok(out)
}

struct Cursor<'t> {
    toks: &'t [Tok],
    pos: usize,
}

impl<'t> Cursor<'t> {
    fn peek(&self) -> Option<&'t Tok> {
        self.toks.get(self.pos)
    }

    fn peek_is(&self, text: &str) -> bool {
        self.peek().is_some_and(|t| t.text == text)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, SpecError> {
        let (line, col) = match self.peek() {
            Some(t) => (t.line, t.col),
            None => self.toks.last().map_or((1, 1), |t| (t.line, t.col + t.text.len())),
        };
        Err(SpecError::Parse {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn next(&mut self) -> Option<&'t Tok> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    fn expect(&mut self, text: &str) -> Result<(), SpecError> {
        if self.peek_is(text) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{text}`"))
        }
    }

    fn name(&mut self, what: &str) -> Result<String, SpecError> {
        match self.peek() {
            Some(t) if t.kind == Kind::Ident && !KEYWORDS.contains(&t.text.as_str()) => {
                self.pos += 1;
                Ok(t.text.clone())
            }
            _ => self.err(format!("expected {what}")),
        }
    }

    fn number(&mut self) -> Result<usize, SpecError> {
        match self.peek().map(|t| t.text.parse::<usize>()) {
            Some(Ok(n)) => {
                self.pos += 1;
                Ok(n)
            }
            _ => self.err("expected a number"),
        }
    }

    fn end(&self) -> Result<(), SpecError> {
        match self.peek() {
            None => Ok(()),
            Some(t) => self.err(format!("unexpected `{}`", t.text)),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    /// Generator names or a single `1_CELL`, up to a stop word or symbol.
    fn string(&mut self, stops: &[&str]) -> Result<StrDecl, SpecError> {
        let mut gens = Vec::new();
        while let Some(t) = self.peek() {
            if t.kind != Kind::Ident || stops.contains(&t.text.as_str()) {
                break;
            }
            if let Some(cell) = t.text.strip_prefix("1_") {
                if !gens.is_empty() {
                    return self.err("an identity string stands alone");
                }
                self.pos += 1;
                return Ok(StrDecl::identity(cell));
            }
            if KEYWORDS.contains(&t.text.as_str()) {
                return self.err(format!("`{}` is a keyword", t.text));
            }
            gens.push(t.text.clone());
            self.pos += 1;
        }
        Ok(StrDecl { gens, base: None })
    }

    fn nonempty_string(&mut self, stops: &[&str]) -> Result<StrDecl, SpecError> {
        let s = self.string(stops)?;
        if s.gens.is_empty() && s.base.is_none() {
            return self.err("expected a string");
        }
        Ok(s)
    }

    fn step(&mut self) -> Result<StepDecl, SpecError> {
        self.expect("(")?;
        let left = self.string(&[])?;
        self.expect(")")?;
        let rule = self.name("a rule name")?;
        self.expect("(")?;
        let right = self.string(&[])?;
        self.expect(")")?;
        if left.base.is_some() || right.base.is_some() {
            return self.err("write an empty context as `()`");
        }
        Ok(StepDecl {
            left: left.gens,
            rule,
            right: right.gens,
        })
    }

    fn deriv(&mut self) -> Result<DerivDecl, SpecError> {
        if self.peek_is("id") {
            self.pos += 1;
            self.expect("(")?;
            let s = self.nonempty_string(&[])?;
            self.expect(")")?;
            return Ok(DerivDecl::Identity(s));
        }
        self.expect("{")?;
        let mut steps = vec![self.step()?];
        while self.peek_is(";") {
            self.pos += 1;
            steps.push(self.step()?);
        }
        self.expect("}")?;
        Ok(DerivDecl::Steps(steps))
    }

    /// Raw text of the remaining tokens, space separated.
    fn rest(&mut self) -> String {
        let texts: Vec<&str> = self.toks[self.pos..].iter().map(|t| t.text.as_str()).collect();
        self.pos = self.toks.len();
        texts.join(" ")
    }
}

#[derive(Default)]
struct Parsed {
    decls: Declarations,
    lines: HashMap<String, usize>,
    tasks: Vec<NamedTask>,
}

fn declare(c: &mut Cursor, p: &mut Parsed, line: usize) -> Result<(), SpecError> {
    let kw = c.next().expect("nonempty statement");
    match kw.text.as_str() {
        "cell" => {
            let n = c.name("a cell name")?;
            p.lines.insert(format!("cell {n}"), line);
            p.decls.cells.push(n);
        }
        "gen" => {
            let name = c.name("a generator name")?;
            c.expect(":")?;
            let dom = c.name("a cell name")?;
            c.expect("->")?;
            let cod = c.name("a cell name")?;
            p.lines.insert(format!("gen {name}"), line);
            p.decls.gens.push(GenDecl { name, dom, cod });
        }
        "rule" | "defrule" => {
            let name = c.name("a rule name")?;
            c.expect(":")?;
            let lhs = c.nonempty_string(&[])?;
            c.expect("=>")?;
            let rhs = c.nonempty_string(&[])?;
            p.lines.insert(format!("{} {name}", kw.text), line);
            if kw.text == "rule" {
                p.decls.rules.push(RuleDecl { name, lhs, rhs });
            } else {
                c.expect("=")?;
                let body = c.deriv()?;
                p.decls.derived.push(DerivedDecl { name, lhs, rhs, body });
            }
        }
        "eq" => {
            let name = c.name("an equation name")?;
            c.expect(":")?;
            let left = c.deriv()?;
            c.expect("=")?;
            let right = c.deriv()?;
            p.lines.insert(format!("eq {name}"), line);
            p.decls.equations.push(EquationDecl { name, left, right });
        }
        "universe" => {
            let name = c.name("a universe name")?;
            c.expect("=")?;
            if c.at_end() {
                return c.err("expected a pattern");
            }
            let pattern = c.rest();
            p.lines.insert(format!("universe {name}"), line);
            p.decls.universes.push(UniverseDecl { name, pattern });
        }
        "precedence" => {
            let mut order = vec![c.name("a generator name")?];
            while c.peek_is("<") {
                c.pos += 1;
                order.push(c.name("a generator name")?);
            }
            p.lines.insert("precedence".into(), line);
            p.decls.precedence = Some(order);
        }
        "check" => {
            let task = check(c)?;
            p.tasks.push(NamedTask {
                name: String::new(),
                line,
                task,
            });
        }
        "normalize" => {
            let s = c.nonempty_string(&[])?;
            p.tasks.push(NamedTask {
                name: String::new(),
                line,
                task: Task::Normalize(s),
            });
        }
        other => {
            c.pos -= 1;
            return c.err(format!("unknown directive `{other}`"));
        }
    }
    c.end()
}

fn check(c: &mut Cursor) -> Result<Task, SpecError> {
    let what = c.next().map(|t| t.text.clone()).unwrap_or_default();
    match what.as_str() {
        "confluence" => Ok(Task::Confluence),
        "terminal" => {
            let candidate = c.nonempty_string(&["in"])?;
            c.expect("in")?;
            let universe = c.name("a universe name")?;
            let bracket = c.peek_is("[");
            if bracket {
                c.pos += 1;
            }
            let mut rules = None;
            if c.peek_is("rules") {
                c.pos += 1;
                let mut list = vec![c.name("a rule name")?];
                while c.peek_is(",") {
                    c.pos += 1;
                    list.push(c.name("a rule name")?);
                }
                rules = Some(list);
            }
            if bracket {
                c.expect("]")?;
            }
            let mut max_len = None;
            if c.peek_is("maxlen") {
                c.pos += 1;
                max_len = Some(c.number()?);
            }
            Ok(Task::Terminal {
                candidate,
                universe,
                rules,
                max_len,
            })
        }
        "equiv" => {
            let left = c.deriv()?;
            c.expect("=")?;
            let right = c.deriv()?;
            Ok(Task::Equiv { left, right })
        }
        "laws" => match c.next().map(|t| t.text.as_str()) {
            Some("monad") => {
                let mut names = Vec::new();
                while let Some(t) = c.peek() {
                    if t.kind != Kind::Ident {
                        break;
                    }
                    names.push(c.name("a name")?);
                }
                if names.len() < 3 {
                    return c.err("expected `check laws monad STR MU ETA`");
                }
                let eta = names.pop().expect("length checked");
                let mu = names.pop().expect("length checked");
                Ok(Task::MonadLaws {
                    t: StrDecl { gens: names, base: None },
                    mu,
                    eta,
                })
            }
            Some("adjunction") => {
                let f = c.name("a generator name")?;
                let g = c.name("a generator name")?;
                let eta = c.name("a rule name")?;
                let eps = c.name("a rule name")?;
                Ok(Task::AdjunctionLaws {
                    f: StrDecl { gens: vec![f], base: None },
                    g: StrDecl { gens: vec![g], base: None },
                    eta,
                    eps,
                })
            }
            _ => {
                c.pos -= 1;
                c.err("expected `monad` or `adjunction`")
            }
        },
        "diagram" => diagram(c).map(Task::Diagram),
        _ => {
            c.pos -= 1;
            c.err(format!("unknown check `{what}`"))
        }
    }
}

fn diagram(c: &mut Cursor) -> Result<DiagramDecl, SpecError> {
    let name = c.name("a diagram name")?;
    c.expect("{")?;
    let items = ["node", "edge", "source", "sink", "}"];
    let mut d = DiagramDecl {
        name,
        nodes: Vec::new(),
        edges: Vec::new(),
        source: String::new(),
        sink: String::new(),
    };
    loop {
        match c.peek().map(|t| t.text.as_str()) {
            Some("node") => {
                c.pos += 1;
                let n = c.name("a node name")?;
                c.expect("=")?;
                let s = c.nonempty_string(&items)?;
                d.nodes.push((n, s));
            }
            Some("edge") => {
                c.pos += 1;
                let from = c.name("a node name")?;
                c.expect("->")?;
                let to = c.name("a node name")?;
                c.expect(":")?;
                d.edges.push((from, to, c.deriv()?));
            }
            Some("source") => {
                c.pos += 1;
                d.source = c.name("a node name")?;
            }
            Some("sink") => {
                c.pos += 1;
                d.sink = c.name("a node name")?;
            }
            Some(";") => c.pos += 1,
            Some("}") => {
                c.pos += 1;
                break;
            }
            _ => return c.err("expected `node`, `edge`, `source`, `sink` or `}`"),
        }
    }
    if d.source.is_empty() || d.sink.is_empty() {
        return c.err("diagram needs a source and a sink");
    }
    Ok(d)
}

fn task_name(t: &Task, line: usize) -> String {
    let s = |x: &StrDecl| match &x.base {
        Some(c) => format!("1_{c}"),
        None => x.gens.join(" "),
    };
    match t {
        Task::Confluence => "confluence".into(),
        Task::Terminal { candidate, universe, .. } => format!("terminal {} in {universe}", s(candidate)),
        Task::Equiv { .. } => format!("equiv (line {line})"),
        Task::MonadLaws { t, .. } => format!("monad laws for {}", s(t)),
        Task::AdjunctionLaws { f, g, .. } => format!("adjunction laws for {} -| {}", s(f), s(g)),
        Task::Diagram(d) => format!("diagram {}", d.name),
        Task::Normalize(x) => format!("normalize {}", s(x)),
    }
}

/// Parses declarations and tasks without building the presentation.
fn parse_parts(text: &str) -> Result<Parsed, SpecError> {
    let mut p = Parsed::default();
    for stmt in statements(tokenize(text)?)? {
        let line = stmt[0].line;
        let mut c = Cursor { toks: &stmt, pos: 0 };
        declare(&mut c, &mut p, line)?;
    }
    for t in &mut p.tasks {
        t.name = task_name(&t.task, t.line);
    }
    Ok(p)
}

pub fn parse_spec(text: &str) -> Result<SpecFile, SpecError> {
    let p = parse_parts(text)?;
    let presentation = build_presentation(&p.decls).map_err(|errs| {
        SpecError::Typing(
            errs.iter()
                .map(|e| {
                    let line = p
                        .lines
                        .iter()
                        .filter(|(key, _)| e.to_string().starts_with(&format!("{key}:")))
                        .map(|(_, l)| *l)
                        .max();
                    match line {
                        Some(l) => format!("line {l}: {e}"),
                        None => e.to_string(),
                    }
                })
                .collect(),
        )
    })?;
    Ok(SpecFile {
        presentation,
        tasks: p.tasks,
    })
}
