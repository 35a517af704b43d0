use std::time::{Duration, Instant};

use proptest::prelude::*;

use super::*;
use crate::codec::{emit_maxpat, parse_maxpat};
use crate::fixtures;
use crate::ir::{validate, NodeKind, Waveform};

fn runtime_message(src: &str) -> String {
    match run_source(src, 1) {
        Err(ScriptError::Runtime(m)) => m,
        other => panic!("expected runtime error, got {other:?}"),
    }
}

#[test]
fn four_statement_program() {
    let p = parse_script(
        "let f = 440\nlet o = place(\"osc\", f); let d = place(\"dac\")\nconnect(o.out[0], d.in[0])\n",
    )
    .unwrap();
    assert_eq!(p.stmts.len(), 4);
    assert_eq!(
        p.stmts[0],
        Stmt::Let {
            name: "f".into(),
            value: Expr::Number(440.0)
        }
    );
}

#[test]
fn for_loop_with_body() {
    let p = parse_script("for i in 1..4 {\n  let x = i * 2\n  let y = x\n}\n").unwrap();
    match &p.stmts[..] {
        [Stmt::For { var, start, end, body }] => {
            assert_eq!(var, "i");
            assert_eq!(*start, Expr::Number(1.0));
            assert_eq!(*end, Expr::Number(4.0));
            assert_eq!(body.len(), 2);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn unclosed_place_is_a_syntax_error() {
    let err = parse_script("place(").unwrap_err();
    assert_eq!(err.code(), "syntax-error");
    assert!(matches!(err, ScriptError::Syntax { line: 1, col: 7, .. }), "{err}");
    let err = parse_script("let a = 1\nlet b = place(\"osc\", 3\n").unwrap_err();
    assert!(matches!(err, ScriptError::Syntax { line: 3, .. }), "{err}");
}

#[test]
fn other_syntax_errors() {
    for (src, line, col) in [
        ("let = 4", 1, 5),
        ("let x = 1 2", 1, 11),
        ("foo(1)", 1, 1),
        ("let place = 1", 1, 5),
        ("for i in 0..3 { emit() ", 1, 24),
        ("\n\n  x = $", 3, 7),
        ("place(\"osc", 1, 7),
    ] {
        match parse_script(src) {
            Err(ScriptError::Syntax { line: l, col: c, message }) => {
                assert_eq!((l, c), (line, col), "{src}: {message}");
            }
            other => panic!("{src}: {other:?}"),
        }
    }
}

#[test]
fn comments_and_continuations() {
    let src = "# header\nlet o = place(\n  \"osc\",\n  440) // trailing\nlet d = place(\"dac\")\nconnect(o.out[0],\n d.in[0])\nemit()\n";
    let g = run_source(src, 0).unwrap();
    assert_eq!(g, fixtures::beeper());
}

#[test]
fn beeper_script() {
    let src = "let o = place(\"osc\", 440)\nlet d = place(\"dac\")\nconnect(o.out[0], d.in[0])\nemit()";
    assert_eq!(run_source(src, 42).unwrap(), fixtures::beeper());
}

#[test]
fn plain_additive_transliteration() {
    let g = run_source(fixtures::ADDITIVE_SCRIPT, 0).unwrap();
    assert_eq!(g.node_count(), 6);
    assert_eq!(g, fixtures::additive());
}

#[test]
fn rich_additive_partials_stay_close() {
    let program = parse_script(fixtures::RICH_ADDITIVE_SCRIPT).unwrap();
    let reference = run_script(&program, 0).unwrap();
    let mut distinct = std::collections::BTreeSet::new();
    for seed in 0..100 {
        let g = run_script(&program, seed).unwrap();
        assert_eq!(g.node_count(), 6);
        let kinds = |g: &crate::ir::PatchGraph| g.nodes().iter().map(|n| n.kind).collect::<Vec<_>>();
        assert_eq!(kinds(&g), kinds(&reference));
        assert_eq!(g.edge_multiset(), reference.edge_multiset());
        for (k, &idx) in fixtures::RICH_PARTIAL_INDICES.iter().enumerate() {
            let node = &g.nodes()[idx];
            assert_eq!(node.kind, NodeKind::Osc(Waveform::Sine));
            let target = 440.0 * (k as f64 + 2.0);
            assert!((node.params[0] - target).abs() < 15.0, "seed {seed}: {}", node.params[0]);
            distinct.insert(node.params[0].to_bits());
        }
    }
    assert!(distinct.len() > 250);
}

#[test]
fn seeds_change_only_params() {
    let program = parse_script(fixtures::RICH_ADDITIVE_SCRIPT).unwrap();
    let a = run_script(&program, 1).unwrap();
    let b = run_script(&program, 2).unwrap();
    assert_ne!(a, b);
    assert_eq!(a.node_count(), b.node_count());
    assert_eq!(a.edge_multiset(), b.edge_multiset());
    for (x, y) in a.nodes().iter().zip(b.nodes()) {
        assert_eq!(x.kind, y.kind);
        if x.params != y.params {
            assert_eq!(x.kind, NodeKind::Osc(Waveform::Sine));
        }
    }
}

#[test]
fn same_seed_same_graph() {
    let program = parse_script(fixtures::RICH_ADDITIVE_SCRIPT).unwrap();
    let a = emit_maxpat(&run_script(&program, 7).unwrap()).unwrap();
    let b = emit_maxpat(&run_script(&program, 7).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn random_draws_are_in_range() {
    let src = "for i in 0..2000 {\n let r = random(3, 5)\n let o = place(\"osc\", r - 2)\n}\nemit()";
    // the graph is not well-formed (no dac), but the draws must all be valid params first
    let msg = runtime_message(src);
    assert!(msg.contains("not well-formed"), "{msg}");
    assert!(runtime_message("let x = random(5, 3)\nemit()").contains("empty range"));
}

#[test]
fn runtime_errors() {
    let cases = [
        ("let o = place(\"reverb~\")\nemit()", "unknown kind"),
        ("let o = place(\"osc\", 440)\nlet d = place(\"dac\")\nconnect(o.out[1], d.in[0])\nemit()", "no outlet 1"),
        ("let o = place(\"osc\", 440)\nlet d = place(\"dac\")\nconnect(o.out[0], d.in[2])\nemit()", "no inlet 2"),
        ("let d = place(\"dac\")\nconnect(o.out[0], d.in[0])\nemit()", "`o` is not defined"),
        ("let o = 3\nlet d = place(\"dac\")\nconnect(o.out[0], d.in[0])\nemit()", "not a node handle"),
        ("let x = 1 / 0\nemit()", "division by zero"),
        ("let x = 1 % 0\nemit()", "division by zero"),
        ("for i in 0..100001 { }\nemit()", "exceeds"),
        ("for i in 0..2.5 { }\nemit()", "must be an integer"),
        ("let o = place(\"osc\", 440)", "without emit"),
        ("for i in 0..3 { let i = 2 }\nemit()", "loop variable"),
        ("let o = place(\"osc\", -5)\nemit()", "schema error"),
        ("let o = place(\"osc\")\nemit()", "requires"),
        ("let o = place(\"osc\", 1, 2)\nemit()", "at most"),
        ("for i in 0..100000 { for j in 0..100 { let x = j } }\nemit()", "step budget"),
        ("let d = place(\"dac\")\nlet o = place(\"osc\", 440)\nconnect(d.in[0], o.out[0])\nemit()", "outlet then an inlet"),
        ("emit()", "not well-formed"),
    ];
    for (src, needle) in cases {
        let msg = runtime_message(src);
        assert!(msg.contains(needle), "{src:?}: {msg}");
    }
}

#[test]
fn emit_stops_execution() {
    let src = "let o = place(\"osc\", 440)\nlet d = place(\"dac\")\nconnect(o.out[0], d.in[0])\nemit()\nlet x = 1 / 0\n";
    assert_eq!(run_source(src, 0).unwrap(), fixtures::beeper());
}

#[test]
fn place_accepts_tags_tokens_and_pitches() {
    let src = "let n = place(\"note~ C4\")\nlet o = place(\"saw~\", 220)\nlet f = place(\"filter.bandpass\", 800)\nlet d = place(\"dac~\")\nconnect(o.out[0], f.in[0])\nconnect(f.out[0], d.in[0])\nemit()";
    let g = run_source(src, 0).unwrap();
    assert_eq!(g.nodes()[0].label.as_deref(), Some("C4"));
    assert_eq!(g.nodes()[1].kind, NodeKind::Osc(Waveform::Saw));
    assert_eq!(g.nodes()[2].params.len(), 2);
}

#[test]
fn sample_seed_is_stable() {
    assert_eq!(sample_seed("r", "additive", 0), sample_seed("r", "additive", 0));
    assert_ne!(sample_seed("r", "additive", 0), sample_seed("r", "additive", 1));
    // sha256("r|additive|0") starts with these bytes
    let digest = <sha2::Sha256 as sha2::Digest>::digest(b"r|additive|0");
    let mut expected = 0u64;
    for (i, b) in digest[..8].iter().enumerate() {
        expected |= (*b as u64) << (8 * i);
    }
    assert_eq!(sample_seed("r", "additive", 0), expected);
}

fn write_code(dir: &std::path::Path) -> std::path::PathBuf {
    let p = dir.join("prog.py");
    std::fs::write(&p, "print('hi')\n").unwrap();
    p
}

#[test]
fn external_runner_copies_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let code = write_code(dir.path());
    let fixture = dir.path().join("fixture.maxpat");
    std::fs::write(&fixture, emit_maxpat(&fixtures::additive()).unwrap()).unwrap();
    let template = format!("test -f {{code}} && cp '{}' {{out}}", fixture.display());
    let out = run_external(&template, &code, DEFAULT_TIMEOUT).unwrap();
    let g = parse_maxpat(&out.read().unwrap()).unwrap();
    assert_eq!(g.node_count(), 6);
    assert!(validate(&g).well_formed);
}

#[test]
fn external_runner_failures() {
    let dir = tempfile::tempdir().unwrap();
    let code = write_code(dir.path());
    let err = run_external("echo boom >&2; exit 1 # {code} {out}", &code, DEFAULT_TIMEOUT).unwrap_err();
    assert_eq!(err.code(), "nonzero-exit");
    assert!(err.to_string().contains("boom"));
    let err = run_external("true {code} {out}", &code, DEFAULT_TIMEOUT).unwrap_err();
    assert_eq!(err.code(), "no-output-file");
    let err = run_external("true", &code, DEFAULT_TIMEOUT).unwrap_err();
    assert_eq!(err.code(), "bad-template");
}

#[test]
fn external_runner_timeout_kills_group() {
    assert_eq!(DEFAULT_TIMEOUT, Duration::from_secs(30));
    let dir = tempfile::tempdir().unwrap();
    let code = write_code(dir.path());
    let start = Instant::now();
    let err = run_external("sleep 60 & sleep 60; echo {code} > {out}", &code, Duration::from_millis(300)).unwrap_err();
    assert_eq!(err.code(), "timeout");
    assert!(start.elapsed() < Duration::from_secs(5));
}

fn arb_name() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["a", "b", "osc1", "x_2", "fundamental", "out", "i"]).prop_map(String::from)
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-1e6..1e6f64).prop_map(Expr::Number),
        (0u32..100).prop_map(|v| Expr::Number(v as f64)),
        arb_name().prop_map(Expr::Var),
        Just(Expr::Emit),
    ];
    leaf.prop_recursive(4, 32, 4, |inner| {
        let op = prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Rem]);
        let port = |inner: BoxedStrategy<Expr>, dir: PortDir| {
            (arb_name(), inner).prop_map(move |(handle, index)| Port {
                handle,
                dir,
                index: Box::new(index),
            })
        };
        prop_oneof![
            (op, inner.clone(), inner.clone()).prop_map(|(op, a, b)| Expr::binary(op, a, b)),
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Random(Box::new(a), Box::new(b))),
            ("[a-z~* .\"\\\\0-9]{0,10}", prop::collection::vec(inner.clone(), 0..3))
                .prop_map(|(kind, args)| Expr::Place { kind, args }),
            (port(inner.clone().boxed(), PortDir::Out), port(inner.boxed(), PortDir::In))
                .prop_map(|(from, to)| Expr::Connect { from, to }),
        ]
    })
}

fn arb_program() -> impl Strategy<Value = Program> {
    let simple = prop_oneof![
        (arb_name(), arb_expr()).prop_map(|(name, value)| Stmt::Let { name, value }),
        arb_expr().prop_map(Stmt::Expr),
    ];
    let stmt = simple.prop_recursive(3, 24, 4, |inner| {
        (arb_name(), arb_expr(), arb_expr(), prop::collection::vec(inner, 0..4))
            .prop_map(|(var, start, end, body)| Stmt::For { var, start, end, body })
    });
    prop::collection::vec(stmt, 0..8).prop_map(|stmts| Program { stmts })
}

proptest! {
    #[test]
    fn pretty_print_round_trips(program in arb_program()) {
        let text = pretty(&program);
        let parsed = parse_script(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(parsed, program);
    }

    #[test]
    fn runs_are_deterministic_and_valid(program in arb_program(), seed in any::<u64>()) {
        let a = run_script(&program, seed);
        prop_assert_eq!(&a, &run_script(&program, seed));
        if let Ok(g) = a {
            prop_assert!(validate(&g).well_formed);
        }
    }

    #[test]
    fn parser_never_panics(src in "[a-z0-9(){}\\[\\].,;=+*/%\" \n-]{0,80}") {
        let _ = parse_script(&src);
    }
}
