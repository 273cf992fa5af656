//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

#[allow(dead_code)]
#[path = "../../minicheck/tests/common/mod.rs"]
mod mc;

#[allow(dead_code)]
#[path = "../../core/tests/common/mod.rs"]
mod model;

use std::collections::BTreeSet;
use std::net::TcpListener;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::time::{Duration, Instant};

use asef_core::{compare_reports, parse_config, parse_report, serialize_config, serialize_report, AsefError, AsefReport};
use asef_core::{CheckStatus, MappingSet};
use asef_toolchain::adapter::{run_tool, substitute_uris, to_asef, ConversionContext, ToolDescriptor};
use asef_toolchain::git;
use minicheck::{check_source, Options, Verdict};
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use serde_json::Value;

const RUNS: usize = 1000;
const DEADLINE: Duration = Duration::from_secs(30);

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lamp_dir() -> PathBuf {
    mc::lamp_dir()
}

// ---- analyzer soundness on the motivating programs ----

fn findings(name: &str, src: &str, emit_safe: bool) -> Vec<minicheck::NativeFinding> {
    let opts = Options {
        emit_safe,
        ..Options::default()
    };
    check_source(name, src, &opts).unwrap()
}

fn verdict_at(f: &[minicheck::NativeFinding], category: &str, line: u32) -> Option<Verdict> {
    f.iter().find(|x| x.category == category && x.line == line).map(|x| x.verdict)
}

fn motivating_programs() -> Outcome {
    let names = ["undef_unguarded", "undef_guarded", "equiv", "equiv_broken", "uninit"];
    let mut total = 0;
    for (i, name) in names.iter().enumerate() {
        let src = std::fs::read_to_string(mc::fixture_dir().join(format!("{name}.mc"))).map_err(|e| e.to_string())?;
        let r = mc::oracles::replay_soundness(name, &src, RUNS, 0xacce + i as u64)?;
        ensure(r.executions >= RUNS, || format!("{name}: {} executions", r.executions))?;
        total += r.executions;
    }
    let src = |n: &str| std::fs::read_to_string(mc::fixture_dir().join(format!("{n}.mc"))).unwrap();
    let unguarded = findings("undef_unguarded.mc", &src("undef_unguarded"), false);
    let negation = verdict_at(&unguarded, "MC:signed-overflow", 10);
    ensure(negation.is_some_and(|v| v != Verdict::ProvenSafe), || {
        format!("unguarded negation reported as {negation:?}")
    })?;
    ensure(findings("undef_guarded.mc", &src("undef_guarded"), false).is_empty(), || {
        "guarded variant reports findings".into()
    })?;
    ensure(verdict_at(&findings("equiv.mc", &src("equiv"), true), "MC:assert", 8) == Some(Verdict::ProvenSafe), || {
        "equivalence assertion not proven".into()
    })?;
    let broken = findings("equiv_broken.mc", &src("equiv_broken"), false);
    ensure(broken.len() == 1 && broken[0].verdict == Verdict::ProvenUnsafe, || {
        format!("broken variant: {broken:?}")
    })?;
    let uninit = findings("uninit.mc", &src("uninit"), false);
    ensure(uninit.iter().any(|f| f.category == "MC:uninit-read" && f.line == 8), || {
        "conditional initialization not reported".into()
    })?;
    Ok(format!("{} programs, {total} executions, 0 soundness violations", names.len()))
}

// ---- taxonomy table ----

fn taxonomy_table() -> Outcome {
    let m = MappingSet::default_set();
    for (tool, name, expected) in model::CATEGORY_TABLE {
        let got = m.map_native(tool, name).map_err(|e| e.to_string())?;
        ensure(got.to_string() == expected, || format!("{tool}:{name} maps to {got}, expected {expected}"))?;
    }
    let categories: BTreeSet<&str> = model::CATEGORY_TABLE.iter().map(|r| r.2).collect();
    ensure(categories.len() == 11, || format!("{} categories", categories.len()))?;
    for e in m.entries() {
        ensure(m.natives_for(&e.asef_category, &e.tool_id).contains(&e.native_name), || {
            format!("natives_for misses {}:{}", e.tool_id, e.native_name)
        })?;
    }
    Ok(format!("{} rows, {} categories, natives_for inverse over {} entries", model::CATEGORY_TABLE.len(), categories.len(), m.entries().len()))
}

// ---- serialization ----

fn runner(cases: u32) -> TestRunner {
    let cfg = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(cfg, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn status_report(status: &str) -> String {
    format!(
        r#"<AsefReport xmlns="urn:asef:1.0" toolId="MC" taskRef="t1" createdAt="2020-01-01T00:00:00Z">
  <Location id="L1" fileRef="src/lamp.mc" line="18" column="5"/>
  <Check id="C1" category="assertion.violation" status="{status}" locationRef="L1"/>
</AsefReport>"#
    )
}

fn round_trip() -> Outcome {
    let configs = std::cell::Cell::new(0);
    runner(500)
        .run(&model::config(), |cfg| {
            configs.set(configs.get() + 1);
            let xml = serialize_config(&cfg);
            proptest::prop_assert_eq!(parse_config(&xml).unwrap(), cfg);
            Ok(())
        })
        .map_err(|e| format!("configuration: {e}"))?;
    let reports = std::cell::Cell::new(0);
    runner(500)
        .run(&model::report(), |r| {
            reports.set(reports.get() + 1);
            let xml = serialize_report(&r);
            proptest::prop_assert_eq!(parse_report(&xml).unwrap(), r);
            Ok(())
        })
        .map_err(|e| format!("report: {e}"))?;
    for s in CheckStatus::ALL {
        let r = parse_report(&status_report(s.as_str())).map_err(|e| e.to_string())?;
        ensure(r.checks[0].status == s, || format!("{s:?} misparsed"))?;
    }
    for bad in ["failed", "safe", "Error", "unsafe", "Syntactic Violation", ""] {
        ensure(matches!(parse_report(&status_report(bad)), Err(AsefError::Schema { .. })), || {
            format!("status `{bad}` accepted")
        })?;
    }
    ensure(configs.get() >= 500 && reports.get() >= 500, || "too few cases".into())?;
    Ok(format!(
        "{} configurations, {} reports, {} statuses accepted",
        configs.get(),
        reports.get(),
        CheckStatus::ALL.len()
    ))
}

// ---- interval domain ----

fn interval_oracle() -> Outcome {
    let mut pairs = 0;
    for (name, op, concrete) in mc::oracles::binary_operators() {
        pairs += mc::oracles::interval_containment(name, op, concrete)?;
    }
    let mut witnesses = 0;
    for (name, src) in mc::corpus() {
        witnesses += mc::oracles::replay_witnesses(&name, &src)?;
    }
    ensure(witnesses > 0, || "no witnesses in the corpus".into())?;
    Ok(format!(
        "{} operators over [-{b},{b}], {pairs} concrete pairs contained; {witnesses}/{witnesses} witnesses replay",
        mc::oracles::binary_operators().len(),
        b = mc::oracles::BOUND
    ))
}

// ---- cross-tool comparison ----

fn lamp_reports() -> (AsefReport, AsefReport) {
    let cfg = parse_config(&std::fs::read_to_string(lamp_dir().join("asef.global.xml")).unwrap()).unwrap();
    let effective = cfg.effective().unwrap();
    let mut ctx = ConversionContext::new(MappingSet::default_set(), "lamp-task");
    ctx.source_root = Some("/ws".into());
    let native = run_tool(&ToolDescriptor::builtin("minicheck"), &effective, "lamp-task", &lamp_dir()).unwrap();
    let (mc, _) = substitute_uris(&to_asef(&native, &ctx, "minicheck").unwrap(), &effective.uri_substitution_rules);
    let stub = std::fs::read_to_string(lamp_dir().join("stubs/astree-stub.native")).unwrap();
    let (astree, _) = substitute_uris(&to_asef(&stub, &ctx, "astree-stub").unwrap(), &effective.uri_substitution_rules);
    (mc, astree)
}

type Pair = (String, String, String);

fn pairs(d: &asef_core::DiffResult) -> BTreeSet<Pair> {
    d.matched
        .iter()
        .map(|m| (m.a.id.clone(), m.b.id.clone(), m.common_category.to_string()))
        .collect()
}

fn ids(checks: &[asef_core::AsefCheck]) -> BTreeSet<String> {
    checks.iter().map(|c| c.id.clone()).collect()
}

fn cross_tool_diff() -> Outcome {
    let (mc, astree) = lamp_reports();
    let d = compare_reports(&mc, &astree);
    let overflow = d
        .matched
        .iter()
        .find(|m| {
            m.common_category.to_string() == "numeric.overflow"
                && mc.resolve_location(&m.a.location_ref).map(|l| l.line) == Ok(17)
                && astree.resolve_location(&m.b.location_ref).map(|l| l.line) == Ok(17)
        })
        .ok_or("no numeric.overflow match at line 17")?;
    let e = compare_reports(&astree, &mc);
    let swapped: BTreeSet<Pair> = pairs(&e).into_iter().map(|(a, b, c)| (b, a, c)).collect();
    ensure(pairs(&d) == swapped, || "matched pairs differ under swap".into())?;
    ensure(ids(&d.only_in_a) == ids(&e.only_in_b) && ids(&d.only_in_b) == ids(&e.only_in_a), || {
        "unmatched checks differ under swap".into()
    })?;
    ensure(d.status_conflicts.len() == e.status_conflicts.len(), || "conflicts differ under swap".into())?;
    Ok(format!(
        "{} <-> {} common {} at line 17; {} matched, symmetric under swap",
        overflow.a.id,
        overflow.b.id,
        overflow.common_category,
        d.matched.len()
    ))
}

// ---- the service, as a process ----

struct Server(Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

fn asef() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_asef"));
    c.env_remove("ASEF_LOG").stdout(Stdio::null()).stderr(Stdio::null());
    c
}

fn init_demo(dir: &Path, port: u16) -> Result<(), String> {
    let st = asef()
        .args(["init-demo", dir.to_str().unwrap(), "--port", &port.to_string()])
        .status()
        .map_err(|e| e.to_string())?;
    ensure(st.success(), || format!("init-demo exited with {st}"))
}

fn serve(dir: &Path, port: u16, crash: bool) -> Result<Server, String> {
    let mut cmd = asef();
    cmd.args(["serve", "--config", dir.join("asef.conf").to_str().unwrap()]);
    if crash {
        cmd.env("ASEF_CRASH_AFTER_PUBLISH", "true");
    }
    let server = Server(cmd.spawn().map_err(|e| e.to_string())?);
    let start = Instant::now();
    while start.elapsed() < Duration::from_secs(10) {
        if get(port, "/cases").is_ok() {
            return Ok(server);
        }
        std::thread::sleep(Duration::from_millis(50));
    }
    Err("service did not come up".into())
}

fn get(port: u16, path: &str) -> Result<Value, String> {
    let mut resp = ureq::get(&format!("http://127.0.0.1:{port}{path}")).call().map_err(|e| format!("GET {path}: {e}"))?;
    let body = resp.body_mut().read_to_string().map_err(|e| e.to_string())?;
    serde_json::from_str(&body).map_err(|e| format!("GET {path}: {e}"))
}

fn push(dir: &Path, commit: &str, port: u16) -> Result<(), String> {
    git::git(&dir.join("dev"), &["push", "--quiet", "origin", &format!("{commit}:main")]).map_err(|e| e.to_string())?;
    webhook(port, commit)
}

fn webhook(port: u16, commit: &str) -> Result<(), String> {
    let body = serde_json::json!({"repoId": "lamp", "commit": commit, "changedPaths": ["src/lamp.mc"]}).to_string();
    let resp = ureq::post(&format!("http://127.0.0.1:{port}/webhook/code"))
        .header("content-type", "application/json")
        .send(body)
        .map_err(|e| format!("webhook: {e}"))?;
    ensure(resp.status() == 202, || format!("webhook answered {}", resp.status()))
}

fn commits(dir: &Path) -> (String, String) {
    let dev = dir.join("dev");
    (
        git::git(&dev, &["rev-parse", "HEAD~1"]).unwrap(),
        git::git(&dev, &["rev-parse", "HEAD"]).unwrap(),
    )
}

fn uri_path(uri: &str) -> String {
    let rest = uri.split_once("://").map_or(uri, |(_, r)| r);
    rest.find('/').map_or(String::new(), |i| rest[i..].to_string())
}

/// Waits for the result of `commit` in case 1 and returns it.
fn await_result(port: u16, commit: &str, within: Duration) -> Result<Value, String> {
    let start = Instant::now();
    loop {
        let results = get(port, "/cases/1/results")?;
        if let Some(r) = results["items"].as_array().into_iter().flatten().find(|r| r["commit"] == commit) {
            return Ok(r.clone());
        }
        if start.elapsed() > within {
            return Err(format!("no result for {commit} after {within:?}"));
        }
        std::thread::sleep(Duration::from_millis(100));
    }
}

fn items(v: &Value) -> Vec<Value> {
    v["items"].as_array().cloned().unwrap_or_default()
}

fn end_to_end() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = tmp.path().join("demo");
    let port = free_port();
    init_demo(&dir, port)?;
    let (buggy, fixed) = commits(&dir);
    let _server = serve(&dir, port, false)?;

    let t0 = Instant::now();
    push(&dir, &buggy, port)?;
    let result = await_result(port, &buggy, DEADLINE)?;
    let red_after = t0.elapsed();
    let files = get(port, &format!("{}/files", uri_path(result["uri"].as_str().unwrap())))?;
    let lamp = items(&files)
        .into_iter()
        .find(|f| f["path"] == "src/lamp.mc")
        .ok_or("src/lamp.mc not in result")?;
    ensure(lamp["flag"] == "red", || format!("buggy lamp flagged {}", lamp["flag"]))?;
    let view = get(port, &format!("{}/files/{}", uri_path(result["uri"].as_str().unwrap()), uri_path(lamp["uri"].as_str().unwrap()).rsplit('/').next().unwrap()))?;
    let at18 = view["checks"]
        .as_array()
        .into_iter()
        .flatten()
        .find(|c| c["category"] == "assertion.violation" && c["line"] == 18)
        .ok_or("no assertion.violation check at line 18")?;
    ensure(at18["status"] == "Unsafe", || format!("line 18 check is {}", at18["status"]))?;

    push(&dir, &fixed, port)?;
    let result = await_result(port, &fixed, DEADLINE)?;
    ensure(result["flag"] == "green", || format!("fixed lamp flagged {}", result["flag"]))?;
    Ok(format!("red with assertion.violation at line 18 after {:.1}s; fix green", red_after.as_secs_f64()))
}

fn analysis_commits(dir: &Path) -> usize {
    git::git(&dir.join("analysis"), &["rev-list", "--count", "HEAD"]).unwrap().parse().unwrap()
}

fn wait_exit(server: &mut Server, within: Duration) -> Result<std::process::ExitStatus, String> {
    let start = Instant::now();
    loop {
        if let Some(st) = server.0.try_wait().map_err(|e| e.to_string())? {
            return Ok(st);
        }
        if start.elapsed() > within {
            return Err("service did not stop after publishing".into());
        }
        std::thread::sleep(Duration::from_millis(50));
    }
}

fn exactly_once() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;

    let dir = tmp.path().join("dup");
    let port = free_port();
    init_demo(&dir, port)?;
    let (buggy, _) = commits(&dir);
    let server = serve(&dir, port, false)?;
    push(&dir, &buggy, port)?;
    for _ in 0..3 {
        webhook(port, &buggy)?;
    }
    await_result(port, &buggy, DEADLINE)?;
    for _ in 0..3 {
        webhook(port, &buggy)?;
    }
    std::thread::sleep(Duration::from_millis(500));
    let results = get(port, "/cases/1/results")?;
    ensure(results["total"] == 1, || format!("{} results after duplicate deliveries", results["total"]))?;
    ensure(analysis_commits(&dir) == 2, || format!("{} analysis commits", analysis_commits(&dir)))?;
    drop(server);

    let dir = tmp.path().join("crash");
    let port = free_port();
    init_demo(&dir, port)?;
    let (buggy, _) = commits(&dir);
    let mut server = serve(&dir, port, true)?;
    push(&dir, &buggy, port)?;
    let st = wait_exit(&mut server, DEADLINE)?;
    ensure(!st.success(), || "crashing service exited cleanly".into())?;
    let published = git::ls_tree(&dir.join("analysis"), "HEAD").map_err(|e| e.to_string())?;
    ensure(published.iter().any(|p| p.ends_with("minicheck.asef.xml")), || "report was not published".into())?;
    drop(server);

    let _server = serve(&dir, port, false)?;
    let result = await_result(port, &buggy, Duration::from_secs(5))?;
    ensure(result["flag"] == "red", || format!("recovered result flagged {}", result["flag"]))?;
    webhook(port, &buggy)?;
    std::thread::sleep(Duration::from_millis(500));
    let results = get(port, "/cases/1/results")?;
    ensure(results["total"] == 1, || format!("{} results after restart", results["total"]))?;
    ensure(analysis_commits(&dir) == 2, || "redelivery after restart published again".into())?;
    Ok("6 duplicate deliveries ingested once; crash between publish and ingest recovered on restart".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("end-to-end lamp pipeline", end_to_end),
        ("soundness on the motivating programs", motivating_programs),
        ("category table and inverse mapping", taxonomy_table),
        ("configuration and report round-trip", round_trip),
        ("interval oracle and witness replay", interval_oracle),
        ("cross-tool diff", cross_tool_diff),
        ("exactly-once ingestion", exactly_once),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, f) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(e) => {
                failed += 1;
                println!("FAIL {name}: {e}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
