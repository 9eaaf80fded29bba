//! Run the soundness checks over every enumerated main.

use rayon::prelude::*;
use serde::Serialize;

use super::enumerate::enumerate_mains;
use super::soundness::{run_soundness, SoundnessConfig, Verdict};
use crate::ast::Program;
use crate::semantics::Fault;

#[derive(Clone, Debug, Serialize)]
pub struct CandidateResult {
    pub id: usize,
    pub main: String,
    pub verdict: Verdict,
    pub steps: usize,
    /// Step of the first violation.
    pub failing_step: Option<usize>,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DifferentialSummary {
    pub candidates: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub steps: usize,
    pub dispatches_checked: usize,
    /// Every candidate, sorted by id.
    pub results: Vec<CandidateResult>,
    /// Failing candidates, sorted by id.
    pub violations: Vec<CandidateResult>,
}

impl DifferentialSummary {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn run_differential(p: &Program, depth: usize, max_steps: usize) -> DifferentialSummary {
    run_differential_with(p, depth, max_steps, None)
}

pub fn run_differential_with(p: &Program, depth: usize, max_steps: usize, fault: Option<Fault>) -> DifferentialSummary {
    let mains = enumerate_mains(p, depth);
    let cfg = SoundnessConfig { max_steps, fault, keep_records: false };
    let mut results: Vec<(CandidateResult, usize)> = mains
        .into_par_iter()
        .enumerate()
        .map(|(id, main)| {
            let rendered = main.to_string();
            let r = run_soundness(&format!("#{id}"), &p.with_main(main), cfg);
            let first = r.violations.first();
            let result = CandidateResult {
                id,
                main: rendered,
                verdict: r.verdict,
                steps: r.steps,
                failing_step: first.map(|v| v.step),
                failure: first.map(ToString::to_string),
            };
            (result, r.dispatches_checked)
        })
        .collect();
    results.sort_by_key(|(r, _)| r.id);
    let mut s = DifferentialSummary { candidates: results.len(), ..Default::default() };
    for (r, dispatches) in results {
        s.steps += r.steps;
        s.dispatches_checked += dispatches;
        match r.verdict {
            Verdict::NotAccepted => s.rejected += 1,
            Verdict::Pass => s.accepted += 1,
            Verdict::Fail => {
                s.accepted += 1;
                s.violations.push(r.clone());
            }
        }
        s.results.push(r);
    }
    s
}
