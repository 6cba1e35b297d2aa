use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use rewcat::cli::{parse_spec, preset_spec, run, RunOptions, SpecError};
use rewcat::sig::PRESET_NAMES;
use rewcat::Budget;

/// Check confluence, equivalence and terminality claims for a rewrite category.
#[derive(Parser, Debug)]
#[command(name = "rewcat", version)]
struct Args {
    /// Spec file to check.
    #[arg(required_unless_present = "preset", conflicts_with = "preset")]
    spec: Option<PathBuf>,
    /// Run a built-in presentation with its default checks.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PRESET_NAMES))]
    preset: Option<String>,
    /// Length bound for terminal checks that do not give one.
    #[arg(long)]
    maxlen: Option<usize>,
    /// Equation applications per search branch.
    #[arg(long)]
    depth: Option<usize>,
    /// Node limit for congruence search.
    #[arg(long)]
    nodes: Option<usize>,
    /// Write the JSON report here.
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Write diagrams and reduction graphs in DOT format here.
    #[arg(long, value_name = "PATH")]
    dot: Option<PathBuf>,
    /// Print the spec text of the preset and exit.
    #[arg(long, requires = "preset")]
    print: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let (source, text) = match (&args.spec, &args.preset) {
        (_, Some(p)) => (format!("preset {p}"), preset_spec(p).expect("preset names are validated")),
        (Some(path), None) => match std::fs::read_to_string(path) {
            Ok(t) => (path.display().to_string(), t),
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                return ExitCode::from(3);
            }
        },
        (None, None) => unreachable!("clap requires a spec or a preset"),
    };
    if args.print {
        print!("{text}");
        return ExitCode::SUCCESS;
    }
    let spec = match parse_spec(&text) {
        Ok(s) => s,
        Err(SpecError::Typing(es)) => {
            for e in es {
                eprintln!("{source}: {e}");
            }
            return ExitCode::from(1);
        }
        Err(e) => {
            eprintln!("{source}: {e}");
            return ExitCode::from(3);
        }
    };
    let mut budget = Budget::default();
    if let Some(d) = args.depth {
        budget.equation_depth = d;
    }
    if let Some(n) = args.nodes {
        budget.node_limit = n;
    }
    let out = run(
        &spec,
        &RunOptions {
            budget,
            max_len: args.maxlen,
        },
    );
    print!("{}", out.report.render_text());
    if let Some(path) = &args.json {
        if let Err(e) = std::fs::write(path, out.report.to_json()) {
            eprintln!("{}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    if let Some(path) = &args.dot {
        if let Err(e) = std::fs::write(path, &out.dot) {
            eprintln!("{}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    ExitCode::from(out.report.exit_code as u8)
}
