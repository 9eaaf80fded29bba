//! Which call produced which method entry, reconstructed from a trace:
//! every `proceed`/`super`/`superproceed` substitution records its cursor,
//! and the later entry through that cursor closes the edge.

use std::collections::HashMap;

use crate::ast::{Cursor, MethodName};
use crate::semantics::{CallKind, RuleName, Site, Trace};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CallEdge {
    /// Step at which the callee was entered.
    pub step: usize,
    pub from: Site,
    pub kind: CallKind,
    pub to: Site,
}

/// A method entry that came from an ordinary invocation `e.m(..)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub step: usize,
    pub cursor: Cursor,
    pub to: Site,
}

/// Entries reached by ordinary invocations.
pub fn invocation_entries(trace: &Trace) -> Vec<Entry> {
    trace
        .entries
        .iter()
        .filter(|e| e.path.contains(&RuleName::RInvk))
        .filter_map(|e| e.dispatch.as_ref().map(|d| Entry { step: e.index, cursor: d.cursor.clone(), to: d.site }))
        .collect()
}

/// Entries reached through `proceed`, `super` or `superproceed`.
///
/// Each substituted call is entered exactly once, and a body's calls are all
/// entered before those of the body that called it resume, so identical
/// pending cursors are matched most-recent first.
pub fn call_edges(trace: &Trace) -> Vec<CallEdge> {
    let mut pending: HashMap<(Cursor, MethodName), Vec<(Site, CallKind)>> = HashMap::new();
    let mut out = Vec::new();
    for e in &trace.entries {
        let Some(d) = &e.dispatch else { continue };
        if !e.path.contains(&RuleName::RInvk) {
            if let Some((from, kind)) = pending.get_mut(&(d.cursor.clone(), d.method)).and_then(Vec::pop) {
                out.push(CallEdge { step: e.index, from, kind, to: d.site });
            }
        }
        for (kind, cursor, m) in d.spawned.iter().rev() {
            pending.entry((cursor.clone(), *m)).or_default().push((d.site, *kind));
        }
    }
    out
}
