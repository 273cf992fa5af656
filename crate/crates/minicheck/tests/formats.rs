use minicheck::{emit_native_report, parse_native_report, parse_program, NativeFinding, TracePoint, Verdict};
use proptest::prelude::*;

fn expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0i64..100_000).prop_map(|v| v.to_string()),
        prop::sample::select(vec!["a", "b", "c"]).prop_map(String::from),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| format!("-{e}")),
            inner.clone().prop_map(|e| format!("!({e})")),
            (
                inner.clone(),
                prop::sample::select(vec!["+", "-", "*", "/", "%", "<<", ">>", "<", "<=", ">", ">=", "==", "!=", "&&", "||"]),
                inner
            )
                .prop_map(|(l, op, r)| format!("({l} {op} {r})")),
        ]
    })
}

fn stmt() -> impl Strategy<Value = String> {
    let simple = prop_oneof![
        (prop::sample::select(vec!["int8", "int16", "int32"]), "[d-f]", prop::option::of(expr()))
            .prop_map(|(t, n, e)| match e {
                Some(e) => format!("{t} {n} = {e};"),
                None => format!("{t} {n};"),
            }),
        ("[a-c]", expr()).prop_map(|(n, e)| format!("{n} = {e};")),
        "[a-c]".prop_map(|n| format!("{n} = input();")),
        (expr(), expr()).prop_map(|(x, y)| format!("report({x}, {y});")),
        expr().prop_map(|e| format!("assert({e});")),
    ];
    simple.prop_recursive(3, 16, 3, |inner| {
        let block = prop::collection::vec(inner, 0..3).prop_map(|v| v.join(" "));
        prop_oneof![
            (expr(), block.clone(), prop::option::of(block.clone())).prop_map(|(c, t, e)| match e {
                Some(e) => format!("if ({c}) {{ {t} }} else {{ {e} }}"),
                None => format!("if ({c}) {{ {t} }}"),
            }),
            (expr(), block).prop_map(|(c, b)| format!("while ({c}) {{ {b} }}")),
        ]
    })
}

fn program() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::collection::vec(stmt(), 0..6), 1..3).prop_map(|fs| {
        fs.iter()
            .enumerate()
            .map(|(i, body)| format!("void f{i}() {{\n int32 a = 0; int16 b = 1; int8 c = 2;\n {}\n}}\n", body.join("\n ")))
            .collect()
    })
}

fn text() -> impl Strategy<Value = String> {
    prop::string::string_regex("[a-zA-Z0-9 ;:,=\\\\\t\n\r{}#-]{0,20}").unwrap()
}

fn finding() -> impl Strategy<Value = NativeFinding> {
    (
        (text(), text(), 1u32..5000, 0u32..200),
        prop::sample::select(Verdict::ALL.to_vec()),
        text(),
        prop::option::of(prop::collection::vec(("[a-zA-Z_][a-zA-Z0-9_]{0,6}", any::<i64>()), 0..4)),
        prop::collection::vec((text(), 1u32..5000, 0u32..200), 0..4),
    )
        .prop_map(|((category, file, line, column), verdict, message, witness, trace)| NativeFinding {
            category: format!("MC:{category}"),
            file: format!("f{file}"),
            line,
            column,
            verdict,
            message,
            witness,
            trace: trace
                .into_iter()
                .map(|(file, line, column)| TracePoint { file, line, column })
                .collect(),
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn unparse_reparses_to_the_same_program(src in program()) {
        let p = parse_program(&src).unwrap();
        let again = parse_program(&p.to_string()).unwrap();
        prop_assert_eq!(p.without_positions(), again.without_positions());
    }

    #[test]
    fn native_reports_round_trip(fs in prop::collection::vec(finding(), 0..6)) {
        let text = emit_native_report(&fs);
        prop_assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), fs.len());
        prop_assert_eq!(parse_native_report(&text).unwrap(), fs);
    }
}

#[test]
fn syntax_errors_carry_positions() {
    let err = parse_program("void f() {\n  int32 x;\n  x = ;\n}").unwrap_err();
    assert_eq!((err.line, err.column), (3, 7));
    let err = parse_program("void f() { int64 x; }").unwrap_err();
    assert_eq!(err.line, 1);
}
