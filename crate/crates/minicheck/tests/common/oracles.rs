//! Replay and interval oracles, returning counts or the first disagreement.

use std::collections::HashMap;

use asef_core::HardwareTarget;
use minicheck::ast::{IntType, Pos};
use minicheck::{analyze_function, check_source, parse_program, Interval, Kind, Options, Verdict, DEFAULT_BUDGET};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct Replay {
    pub executions: usize,
    pub bad_events: usize,
}

pub fn sample(rng: &mut ChaCha8Rng, ty: IntType) -> i64 {
    let (lo, hi) = (ty.min() as i64, ty.max() as i64);
    match rng.gen_range(0..4) {
        0 => [lo, hi, 0, -1, 1, lo + 1, hi - 1][rng.gen_range(0..7)],
        1 => rng.gen_range(-600..=600).clamp(lo, hi),
        _ => rng.gen_range(lo..=hi),
    }
}

/// Runs every function of `src` `runs` times on sampled inputs; every
/// concrete bad event must carry a finding that is not proven safe.
pub fn replay_soundness(name: &str, src: &str, runs: usize, seed: u64) -> Result<Replay, String> {
    let hw = HardwareTarget::ilp32("ecu32");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let program = parse_program(src).map_err(|e| format!("{name}: {e}"))?;
    let mut out = Replay::default();
    for f in &program.functions {
        let verdicts: HashMap<(Kind, Pos), Verdict> = analyze_function(f, &hw)
            .findings
            .into_iter()
            .map(|x| ((x.kind, x.pos), x.verdict))
            .collect();
        for _ in 0..runs {
            let run = super::run(f, 32, 400, &mut |_, ty| sample(&mut rng, ty));
            out.executions += 1;
            out.bad_events += run.bad.len();
            for b in &run.bad {
                let v = verdicts.get(&(b.kind, b.pos));
                if !v.is_some_and(|v| *v != Verdict::ProvenSafe) {
                    return Err(format!("{name}: concrete {:?} at {} not covered (verdict {v:?})", b.kind, b.pos));
                }
            }
        }
    }
    Ok(out)
}

/// Replays every witness reported for `src`; returns how many were checked.
pub fn replay_witnesses(name: &str, src: &str) -> Result<usize, String> {
    let program = parse_program(src).map_err(|e| format!("{name}: {e}"))?;
    let findings = check_source(name, src, &Options::default()).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for nf in findings.iter().filter(|f| f.witness.is_some()) {
        let values: HashMap<&str, i64> = nf.witness.as_ref().unwrap().iter().map(|(k, v)| (k.as_str(), *v)).collect();
        let kind = Kind::from_qualified(&nf.category).ok_or_else(|| format!("unknown category {}", nf.category))?;
        let pos = Pos::new(nf.line, nf.column);
        let replayed = program
            .functions
            .iter()
            .any(|f| super::run(f, 32, DEFAULT_BUDGET, &mut |var, _| values.get(var).copied().unwrap_or(0)).hit(kind, pos));
        if !replayed {
            return Err(format!("{name}: witness {:?} does not reach {} at {pos}", nf.witness, nf.category));
        }
        if nf.verdict != Verdict::ProvenUnsafe {
            return Err(format!("{name}: witnessed finding at {pos} is {}", nf.verdict));
        }
        checked += 1;
    }
    Ok(checked)
}

pub const BOUND: i128 = 8;

fn operand_intervals() -> Vec<(i128, i128)> {
    let mut v = Vec::new();
    for lo in -BOUND..=BOUND {
        for hi in lo..=BOUND {
            v.push((lo, hi));
        }
    }
    v
}

/// Checks that `op` contains every concrete result for all operand
/// intervals within `[-BOUND, BOUND]`; returns the number of concrete pairs.
pub fn interval_containment(
    name: &str,
    op: impl Fn(&Interval, &Interval) -> Interval,
    concrete: impl Fn(i128, i128) -> Option<i128>,
) -> Result<usize, String> {
    let ivs = operand_intervals();
    let mut pairs = 0;
    for &(al, ah) in &ivs {
        for &(bl, bh) in &ivs {
            let r = op(&Interval::new(al, ah), &Interval::new(bl, bh));
            for a in al..=ah {
                for b in bl..=bh {
                    if let Some(c) = concrete(a, b) {
                        pairs += 1;
                        if !r.contains(c) {
                            return Err(format!("{name}: [{al},{ah}] {name} [{bl},{bh}] = {r} misses {a} {name} {b} = {c}"));
                        }
                    }
                }
            }
        }
    }
    Ok(pairs)
}

type BinOpFn = fn(&Interval, &Interval) -> Interval;
type ConcreteFn = fn(i128, i128) -> Option<i128>;

/// Every binary operator with its concrete counterpart.
pub fn binary_operators() -> Vec<(&'static str, BinOpFn, ConcreteFn)> {
    vec![
        ("+", Interval::add, |a, b| Some(a + b)),
        ("-", Interval::sub, |a, b| Some(a - b)),
        ("*", Interval::mul, |a, b| Some(a * b)),
        ("/", Interval::div, |a, b| (b != 0).then(|| a / b)),
        ("%", Interval::rem, |a, b| (b != 0).then(|| a % b)),
        ("<<", Interval::shl, |a, b| (b >= 0).then(|| a * (1 << b))),
        (">>", Interval::shr, |a, b| (b >= 0).then(|| a.div_euclid(1 << b))),
    ]
}
