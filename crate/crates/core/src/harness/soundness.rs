//! Trace-level checks of subject reduction, progress and final-value
//! typing, plus oracle agreement on every method entry.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use super::oracle::{resolve_oracle, resolve_proceed, resolve_super, resolve_superproceed, Resolution};
use crate::ast::*;
use crate::relations::type_sub;
use crate::semantics::{step_with, CallKind, Dispatch, Fault, RuleName, StepOutcome};
use crate::typing::wf::{replay_witness, WitnessLedger};
use crate::typing::{check_program, Checker};

#[derive(Clone, Copy, Debug)]
pub struct SoundnessConfig {
    pub max_steps: usize,
    pub fault: Option<Fault>,
    /// Keep one record per step in the report.
    pub keep_records: bool,
}

impl SoundnessConfig {
    pub fn new(max_steps: usize) -> SoundnessConfig {
        SoundnessConfig { max_steps, fault: None, keep_records: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    SubjectReduction,
    Progress,
    FinalType,
    Oracle,
    Witness,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SoundnessViolation {
    pub step: usize,
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for SoundnessViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {}: {:?}: {}", self.step, self.kind, self.message)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StepRecord {
    pub index: usize,
    pub rule: String,
    pub active: String,
    pub pre: String,
    pub post: Option<String>,
    pub subtype_ok: bool,
    pub progress_ok: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The program does not typecheck, so the theorems say nothing about it.
    NotAccepted,
}

#[derive(Clone, Debug, Serialize)]
pub struct SoundnessReport {
    pub id: String,
    pub static_type: Option<Type>,
    pub steps: usize,
    /// `value <v>`, `out of fuel`, `stuck: <reason>`, or the type errors.
    pub outcome: String,
    pub dispatches_checked: usize,
    pub records: Vec<StepRecord>,
    pub violations: Vec<SoundnessViolation>,
    pub verdict: Verdict,
}

impl SoundnessReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    fn violate(&mut self, step: usize, kind: ViolationKind, message: String) {
        self.violations.push(SoundnessViolation { step, kind, message });
    }
}

/// Oracle expectations for cursors substituted into entered bodies,
/// matched most-recent first (see [`super::provenance::call_edges`]).
#[derive(Default)]
struct OracleTracker {
    pending: HashMap<(Cursor, MethodName), Vec<Option<Resolution>>>,
    checked: usize,
}

impl OracleTracker {
    fn check(&mut self, t: &Tables, fresh: bool, d: &Dispatch) -> Result<(), String> {
        let full = d.cursor.full();
        let expected = if fresh {
            Some(resolve_oracle(t, full, d.cursor.class(), d.method))
        } else {
            self.pending.get_mut(&(d.cursor.clone(), d.method)).and_then(Vec::pop)
        };
        let Some(expected) = expected else { return Ok(()) };
        self.checked += 1;
        let here = match expected {
            Some(r) if r.class == d.site.class && r.layer == d.site.layer => r,
            Some(r) => return Err(format!("{d} but the oracle resolves {}", r.site(d.method))),
            None => return Err(format!("{d} but the oracle finds no definition")),
        };
        for (kind, cursor, m) in d.spawned.iter().rev() {
            let next = match kind {
                CallKind::Proceed => resolve_proceed(t, full, &here, *m),
                CallKind::Super => resolve_super(t, full, &here, *m),
                CallKind::SuperProceed => resolve_superproceed(t, &here, *m),
            };
            self.pending.entry((cursor.clone(), *m)).or_default().push(next);
        }
        Ok(())
    }
}

/// Evaluate `p.main`, re-typing the whole expression after every step.
pub fn run_soundness(id: &str, p: &Program, cfg: SoundnessConfig) -> SoundnessReport {
    let mut report = SoundnessReport {
        id: id.to_owned(),
        static_type: None,
        steps: 0,
        outcome: String::new(),
        dispatches_checked: 0,
        records: Vec::new(),
        violations: Vec::new(),
        verdict: Verdict::Pass,
    };
    let t0 = match check_program(p) {
        Ok(ty) => ty,
        Err(errs) => {
            report.outcome = errs.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ");
            report.verdict = Verdict::NotAccepted;
            return report;
        }
    };
    report.static_type = Some(t0);
    let t: &Tables = p;
    let top = LayerSeq::empty();
    let mut ledger = WitnessLedger::new();
    ledger.record(t, &[]);
    let mut oracle = OracleTracker::default();
    let mut cur = p.main.clone();
    let mut pre = t0;

    loop {
        let index = report.steps + 1;
        match step_with(t, &top, &cur, cfg.fault) {
            StepOutcome::AlreadyValue(v) => {
                let vt = match &v {
                    Value::Obj(o) => Type::Class(o.class),
                    Value::Layer(l) => Type::Layer(*l),
                };
                if !type_sub(t, vt, t0) {
                    let at = report.steps;
                    report.violate(at, ViolationKind::FinalType, format!("final value {v} is not a {t0}"));
                }
                report.outcome = format!("value {v}");
                break;
            }
            StepOutcome::Stuck(reason) => {
                report.violate(index, ViolationKind::Progress, format!("stuck on a well-typed term: {reason}"));
                if cfg.keep_records {
                    report.records.push(StepRecord {
                        index,
                        rule: String::new(),
                        active: String::new(),
                        pre: pre.to_string(),
                        post: None,
                        subtype_ok: false,
                        progress_ok: false,
                    });
                }
                report.outcome = format!("stuck: {reason}");
                break;
            }
            StepOutcome::Stepped(s) => {
                if report.steps >= cfg.max_steps {
                    report.outcome = "out of fuel".into();
                    break;
                }
                report.steps = index;
                let seq = ledger.record(t, &s.events);
                if seq != s.active {
                    report.violate(index, ViolationKind::Witness, format!("events replay to {seq}, step ran under {}", s.active));
                }
                let witness = ledger.get(&seq.to_set()).cloned().unwrap_or_default();
                if let Err(e) = replay_witness(t, &witness) {
                    report.violate(index,
                        ViolationKind::Witness,
                        format!("active set {} has no valid witness: {} at event {}: {}", fmt_layer_set(&seq.to_set()), e.rule, e.event, e.message),
                    );
                }
                if let Some(d) = &s.dispatch {
                    if let Err(msg) = oracle.check(t, s.path.contains(&RuleName::RInvk), d) {
                        report.violate(index, ViolationKind::Oracle, msg);
                    }
                }
                let checker = Checker::new(t).with_ledger(&ledger);
                let post = checker.type_expr(&Location::TopLevel, &LayerSet::new(), &TypeEnv::empty(), &s.expr);
                let subtype_ok = match &post {
                    Ok(ty) if type_sub(t, *ty, pre) => true,
                    Ok(ty) => {
                        report.violate(index, ViolationKind::SubjectReduction, format!("{} step took type {pre} to {ty}", s.path_string()));
                        false
                    }
                    Err(e) => {
                        report.violate(index, ViolationKind::SubjectReduction, format!("{} step produced an ill-typed term: {e}", s.path_string()));
                        false
                    }
                };
                if cfg.keep_records {
                    report.records.push(StepRecord {
                        index,
                        rule: s.path_string(),
                        active: s.active.to_string(),
                        pre: pre.to_string(),
                        post: post.as_ref().ok().map(ToString::to_string),
                        subtype_ok,
                        progress_ok: true,
                    });
                }
                match post {
                    Ok(ty) => pre = ty,
                    Err(_) => {
                        report.outcome = "ill-typed intermediate term".into();
                        break;
                    }
                }
                cur = s.expr;
            }
        }
    }
    report.dispatches_checked = oracle.checked;
    if !report.violations.is_empty() {
        report.verdict = Verdict::Fail;
    }
    report
}
