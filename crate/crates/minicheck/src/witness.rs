//! Bounded counterexample search by concrete execution.

use thiserror::Error;

use crate::ast::{Function, Pos};
use crate::exec::execute;
use crate::finding::{Finding, Verdict};
use crate::resolve::{Resolution, VarId};

pub const DEFAULT_BUDGET: usize = 10_000;

/// Candidate assignments tried before giving up.
pub const MAX_CANDIDATES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    /// `(variable, value)` in order of the variables' first external assignment.
    pub values: Vec<(String, i64)>,
    /// External call sites that produced the values, in the same order.
    pub sites: Vec<Pos>,
}

impl Witness {
    pub fn render(&self) -> String {
        self.values
            .iter()
            .map(|(n, v)| format!("{{{n} = {v}}}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessError {
    #[error("finding at {0} is proven safe; there is nothing to witness")]
    ProvenSafe(Pos),
}

/// `[lo, hi, 0, -1, 1, floor((lo + hi) / 2)]` restricted to `[lo, hi]`, without repeats.
pub fn candidates(lo: i64, hi: i64) -> Vec<i64> {
    let mid = ((lo as i128 + hi as i128).div_euclid(2)) as i64;
    let mut out = Vec::new();
    for v in [lo, hi, 0, -1, 1, mid] {
        if lo <= v && v <= hi && !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

/// Tries every combination of candidate values for the function's external
/// inputs (first input varying slowest); each external call returns the
/// value chosen for its receiving variable. Each run is limited to `budget`
/// steps. Returns the first assignment whose run reaches the finding's bad
/// event.
pub fn find_witness(f: &Function, res: &Resolution, finding: &Finding, int_bits: u32, budget: usize) -> Result<Option<Witness>, WitnessError> {
    if finding.verdict == Verdict::ProvenSafe {
        return Err(WitnessError::ProvenSafe(finding.pos));
    }
    let vars: &[VarId] = &res.havoc;
    let choices: Vec<Vec<i64>> = vars
        .iter()
        .map(|&v| {
            let ty = res.vars[v].ty;
            candidates(ty.min() as i64, ty.max() as i64)
        })
        .collect();
    let mut idx = vec![0usize; vars.len()];
    for _ in 0..MAX_CANDIDATES {
        let assignment: Vec<i64> = idx.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
        let run = execute(f, res, int_bits, budget, |v, _| {
            let k = vars.iter().position(|&h| h == v).expect("havoc variable");
            assignment[k]
        });
        if run.hit(finding.kind, finding.pos) {
            return Ok(Some(Witness {
                values: vars
                    .iter()
                    .zip(&assignment)
                    .map(|(&v, &x)| (res.vars[v].name.clone(), x))
                    .collect(),
                sites: vars.iter().map(|v| res.havoc_sites[v]).collect(),
            }));
        }
        // odometer, last variable fastest
        let mut k = idx.len();
        loop {
            if k == 0 {
                return Ok(None);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < choices[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(None)
}
