mod common;

use std::process::Command;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use rewcat::cli::{dot_diagram, dot_reduction_graph, parse_spec, preset_spec, print_spec, run, RunOptions, SpecError};
use rewcat::equivalence::{intro_diagram, Diagram};
use rewcat::sig::{preset, PRESET_NAMES};

fn rewcat(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_rewcat")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write_temp(name: &str, text: &str) -> String {
    let dir = std::env::temp_dir().join(format!("rewcat-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn strip_volatile(json: &str) -> String {
    let mut v: serde_json::Value = serde_json::from_str(json).unwrap();
    v.as_object_mut().unwrap().remove("timestamp");
    for t in v["tasks"].as_array_mut().unwrap() {
        t.as_object_mut().unwrap().remove("elapsed_ms");
    }
    v.to_string()
}

#[test]
fn presets_round_trip_through_spec_text() {
    for name in PRESET_NAMES {
        let pres = preset(name).unwrap();
        let spec = parse_spec(&print_spec(&pres)).unwrap();
        assert_eq!(spec.presentation, pres, "{name}");
        assert!(spec.tasks.is_empty());
        let full = parse_spec(&preset_spec(name).unwrap()).unwrap();
        assert_eq!(full.presentation, pres, "{name}");
    }
}

proptest! {
    #[test]
    fn random_presentations_round_trip(seed in any::<u64>()) {
        let pres = common::random_presentation(&mut StdRng::seed_from_u64(seed));
        let text = print_spec(&pres);
        let back = parse_spec(&text).unwrap();
        prop_assert_eq!(back.presentation, pres);
    }
}

#[test]
fn preset_runs_succeed() {
    for name in PRESET_NAMES {
        let (code, out, err) = rewcat(&["--preset", name]);
        assert_eq!(code, 0, "{name}: {out}{err}");
        assert!(!out.contains("[Unknown]") && !out.contains("[NotCertified]"), "{out}");
    }
}

#[test]
fn removing_a_monad_equation_exits_2() {
    let text = preset_spec("monad").unwrap();
    for eq in ["assoc", "unitL", "unitR"] {
        let ablated: String = text
            .lines()
            .filter(|l| !l.starts_with(&format!("eq {eq} ")))
            .map(|l| format!("{l}\n"))
            .collect();
        let path = write_temp(&format!("ablate-{eq}.spec"), &ablated);
        let (code, out, _) = rewcat(&[&path]);
        assert_eq!(code, 2, "{eq}: {out}");
        assert!(out.contains("TTT: uniqueness unknown"), "{out}");
    }
}

#[test]
fn parse_errors_exit_3_with_position() {
    let path = write_temp("bad-syntax.spec", "cell C\ngen T C -> C\n");
    let (code, _, err) = rewcat(&[&path]);
    assert_eq!(code, 3);
    assert!(err.contains("2:"), "{err}");
    assert!(matches!(parse_spec("cell C\nrule\n"), Err(SpecError::Parse { line: 2, .. })));
}

#[test]
fn ill_typed_strings_are_rejected() {
    let adj = print_spec(&preset("adjunction").unwrap());
    let text = format!("{adj}check terminal F F in FGF\n");
    let spec = parse_spec(&text).unwrap();
    let out = run(&spec, &RunOptions::default());
    assert_eq!(out.report.exit_code, 1);
    assert!(out.report.tasks[0].details[0].contains("ill-typed"), "{:?}", out.report.tasks[0]);

    let bad_rule = "cell C\ncell D\ngen F : C -> D\nrule r : F F => F\n";
    match parse_spec(bad_rule) {
        Err(SpecError::Typing(es)) => assert!(es[0].starts_with("line 4:"), "{es:?}"),
        other => panic!("expected a typing error, got {other:?}"),
    }
    let path = write_temp("bad-rule.spec", bad_rule);
    assert_eq!(rewcat(&[&path]).0, 1);
}

#[test]
fn swapped_adjunction_roles_are_reported() {
    let adj = print_spec(&preset("adjunction").unwrap());
    let spec = parse_spec(&format!("{adj}check laws adjunction G F eta eps\n")).unwrap();
    let out = run(&spec, &RunOptions::default());
    assert_eq!(out.report.exit_code, 1);
    assert!(out.report.tasks[0].details[0].contains("expected 1_D, found 1_C"), "{:?}", out.report.tasks[0]);
}

#[test]
fn wrong_diagram_is_rejected_as_ill_formed() {
    let intro = print_spec(&preset("two-monads-intro").unwrap());
    let diagram = "check diagram broken {\n  node a = T1\n  node b = T2\n  edge a -> b : { () mu1 () }\n  source a\n  sink b\n}\n";
    let spec = parse_spec(&format!("{intro}{diagram}")).unwrap();
    let out = run(&spec, &RunOptions::default());
    assert_eq!(out.report.exit_code, 1);
    assert!(out.report.tasks[0].details[0].contains("ill-formed"), "{:?}", out.report.tasks[0]);
}

#[test]
fn reduction_graph_of_three_ts() {
    let pres = preset("monad").unwrap();
    let ttt = pres.sig().parse_string("T T T").unwrap();
    let dot = dot_reduction_graph(&pres, &ttt, &pres.good_rules(), 100);
    assert_eq!(dot.lines().filter(|l| l.contains("[label=") && !l.contains("->")).count(), 3);
    assert_eq!(dot.lines().filter(|l| l.contains("->")).count(), 3);
}

#[test]
fn intro_diagram_dot() {
    let pres = preset("two-monads-intro").unwrap();
    let d = intro_diagram(&pres).unwrap();
    let dot = dot_diagram(&pres, &d);
    assert_eq!(dot.lines().filter(|l| l.contains("[label=") && !l.contains("->")).count(), 9);
    assert_eq!(dot.lines().filter(|l| l.contains("->")).count(), 12);

    let empty = Diagram {
        name: "empty".into(),
        nodes: Vec::new(),
        edges: Vec::new(),
        source: 0,
        sink: 0,
    };
    let dot = dot_diagram(&pres, &empty);
    assert_eq!(dot.lines().count(), 2, "{dot}");
}

#[test]
fn cli_writes_json_and_dot() {
    let dir = std::env::temp_dir().join(format!("rewcat-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let (json, dot) = (dir.join("r.json"), dir.join("r.dot"));
    let (code, _, _) = rewcat(&[
        "--preset",
        "two-monads-intro",
        "--json",
        json.to_str().unwrap(),
        "--dot",
        dot.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["exit_code"], 0);
    assert_eq!(report["tasks"].as_array().unwrap().len(), 4);
    assert!(std::fs::read_to_string(&dot).unwrap().starts_with("digraph"));
}

#[test]
fn reports_are_deterministic() {
    for name in PRESET_NAMES {
        let spec = parse_spec(&preset_spec(name).unwrap()).unwrap();
        let a = run(&spec, &RunOptions::default()).report.to_json();
        let b = run(&spec, &RunOptions::default()).report.to_json();
        assert_eq!(strip_volatile(&a), strip_volatile(&b), "{name}");
    }
}
