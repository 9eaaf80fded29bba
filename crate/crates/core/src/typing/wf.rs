//! Layer-set well-formedness: sets obtainable by legal `with`/`swap`
//! activations starting from the empty set.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Mutex;

use crate::ast::*;
use crate::relations::{set_weak_sub, weak_sub};
use crate::semantics::ActivationEvent;

/// Above this many layers the exhaustive forward closure is skipped in
/// favour of the bounded backward search.
const FORWARD_LIMIT: usize = 16;

/// A derivation of `Λ WF` as the activation events that build it.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct WfWitness(pub Vec<ActivationEvent>);

impl fmt::Display for WfWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("∅");
        }
        let parts: Vec<String> = self.0.iter().map(ActivationEvent::to_string).collect();
        f.write_str(&parts.join(", "))
    }
}

/// Why a witness fails to replay.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessError {
    pub event: usize,
    pub rule: &'static str,
    pub message: String,
}

/// Replay `w` through Wf-With / Wf-Swap from `∅`; returns the derived set.
pub fn replay_witness(t: &Tables, w: &WfWitness) -> Result<LayerSet, WitnessError> {
    let mut lam = LayerSet::new();
    for (i, ev) in w.0.iter().enumerate() {
        match *ev {
            ActivationEvent::With(la) => {
                if !t.is_layer_name(la) {
                    return Err(WitnessError { event: i, rule: "Wf-With", message: format!("unknown layer {la}") });
                }
                if !set_weak_sub(t, &lam, &t.requires(la)) {
                    return Err(WitnessError {
                        event: i,
                        rule: "Wf-With",
                        message: format!("{} does not cover requires {} of {la}", fmt_layer_set(&lam), fmt_layer_set(&t.requires(la))),
                    });
                }
                lam.insert(la);
            }
            ActivationEvent::Swap(l, lsw) => {
                if !t.is_swappable(lsw) || !weak_sub(t, l, lsw) || !t.is_layer_name(l) {
                    return Err(WitnessError {
                        event: i,
                        rule: "Wf-Swap",
                        message: format!("{l} is not a sublayer of a swappable {lsw}"),
                    });
                }
                lam.retain(|&x| !weak_sub(t, x, lsw));
                if !set_weak_sub(t, &lam, &t.requires(l)) {
                    return Err(WitnessError {
                        event: i,
                        rule: "Wf-Swap",
                        message: format!("{} does not cover requires {} of {l}", fmt_layer_set(&lam), fmt_layer_set(&t.requires(l))),
                    });
                }
                lam.insert(l);
            }
        }
    }
    Ok(lam)
}

/// Witnesses keyed by the set they derive, recorded while evaluating.
#[derive(Clone, Debug, Default)]
pub struct WitnessLedger {
    entries: HashMap<LayerSet, WfWitness>,
}

impl WitnessLedger {
    pub fn new() -> WitnessLedger {
        WitnessLedger::default()
    }

    /// Record the events that led to `seq`; the first witness for a set wins.
    pub fn record(&mut self, t: &Tables, events: &[ActivationEvent]) -> LayerSeq {
        let mut seq = LayerSeq::empty();
        for ev in events {
            seq = ev.apply(t, &seq);
        }
        self.entries.entry(seq.to_set()).or_insert_with(|| WfWitness(events.to_vec()));
        seq
    }

    pub fn get(&self, lam: &LayerSet) -> Option<&WfWitness> {
        self.entries.get(lam)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LayerSet, &WfWitness)> {
        self.entries.iter()
    }
}

/// Memoized well-formedness facts for one table.
pub(crate) struct WfCache {
    universe: Vec<LayerName>,
    /// Every well-formed subset of the universe, as bitmasks; `None` when
    /// the universe is too large to close forward.
    reachable: Option<HashSet<u32>>,
    backward: Mutex<HashMap<LayerSet, bool>>,
}

fn cache(t: &Tables) -> &WfCache {
    t.cache.wf.get_or_init(|| {
        let mut universe = t.layer_names();
        universe.push(LayerName::base());
        let reachable = (universe.len() <= FORWARD_LIMIT).then(|| forward_closure(t, &universe));
        WfCache { universe, reachable, backward: Mutex::new(HashMap::new()) }
    })
}

fn forward_closure(t: &Tables, universe: &[LayerName]) -> HashSet<u32> {
    let n = universe.len();
    let bit = |i: usize| 1u32 << i;
    // below[r]: layers weakly below r; a set covers `r` iff it meets below[r].
    let below: Vec<u32> = (0..n)
        .map(|r| (0..n).filter(|&l| weak_sub(t, universe[l], universe[r])).fold(0, |m, l| m | bit(l)))
        .collect();
    let index: HashMap<LayerName, usize> = universe.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let reqs: Vec<Vec<usize>> = universe
        .iter()
        .map(|&l| t.requires(l).iter().map(|r| index.get(r).copied().unwrap_or(usize::MAX)).collect())
        .collect();
    let covers = |set: u32, l: usize| reqs[l].iter().all(|&r| r != usize::MAX && set & below[r] != 0);
    let swappables: Vec<usize> = (0..n).filter(|&i| t.is_swappable(universe[i])).collect();

    let mut seen = HashSet::from([0u32]);
    let mut queue = VecDeque::from([0u32]);
    while let Some(set) = queue.pop_front() {
        let mut push = |next: u32| {
            if seen.insert(next) {
                queue.push_back(next);
            }
        };
        for l in 0..n {
            if covers(set, l) {
                push(set | bit(l));
            }
            for &sw in &swappables {
                if below[sw] & bit(l) != 0 {
                    let rm = set & !below[sw];
                    if covers(rm, l) {
                        push(rm | bit(l));
                    }
                }
            }
        }
    }
    seen
}

/// `Λ WF`.
pub fn wf_layer_set(t: &Tables, lam: &LayerSet) -> bool {
    let c = cache(t);
    match &c.reachable {
        Some(reachable) => match to_mask(&c.universe, lam) {
            Some(mask) => reachable.contains(&mask),
            None => false,
        },
        None => wf_backward(t, lam),
    }
}

fn to_mask(universe: &[LayerName], lam: &LayerSet) -> Option<u32> {
    lam.iter().try_fold(0u32, |m, l| universe.iter().position(|u| u == l).map(|i| m | (1 << i)))
}

/// Exhaustive forward closure; only available for small tables.
pub fn wf_layer_set_forward(t: &Tables, lam: &LayerSet) -> Option<bool> {
    let c = cache(t);
    c.reachable.as_ref().map(|r| to_mask(&c.universe, lam).is_some_and(|m| r.contains(&m)))
}

/// Memoized backward search: peel off the last activation via Wf-With or
/// Wf-Swap. For Wf-Swap the pre-swap set may have held any subset of the
/// swappable's sublayers, which the search enumerates; the recursion depth
/// is bounded by twice the universe size.
pub fn wf_backward(t: &Tables, lam: &LayerSet) -> bool {
    let c = cache(t);
    let bound = 2 * c.universe.len() + 2;
    let mut visiting = HashSet::new();
    backward(t, c, lam, bound, &mut visiting)
}

fn backward(t: &Tables, c: &WfCache, lam: &LayerSet, depth: usize, visiting: &mut HashSet<LayerSet>) -> bool {
    if lam.is_empty() {
        return true;
    }
    if lam.iter().any(|l| !c.universe.contains(l)) {
        return false;
    }
    if let Some(&hit) = c.backward.lock().unwrap().get(lam) {
        return hit;
    }
    if depth == 0 || !visiting.insert(lam.clone()) {
        return false;
    }
    let mut ok = false;
    'outer: for &la in lam {
        let mut rest = lam.clone();
        rest.remove(&la);
        if set_weak_sub(t, &rest, &t.requires(la)) && backward(t, c, &rest, depth - 1, visiting) {
            ok = true;
            break;
        }
        for sw in t.layers.values().filter(|d| d.swappable && weak_sub(t, la, d.name)) {
            // Λrm holds no sublayer of the swappable.
            if rest.iter().any(|&x| weak_sub(t, x, sw.name)) || !set_weak_sub(t, &rest, &t.requires(la)) {
                continue;
            }
            let subs: Vec<LayerName> = c.universe.iter().copied().filter(|&x| weak_sub(t, x, sw.name)).collect();
            if subs.len() > 20 {
                continue;
            }
            for bits in 0u32..(1 << subs.len()) {
                let mut pre = rest.clone();
                pre.extend(subs.iter().enumerate().filter(|(i, _)| bits & (1 << i) != 0).map(|(_, &l)| l));
                if pre != *lam && backward(t, c, &pre, depth - 1, visiting) {
                    ok = true;
                    break 'outer;
                }
            }
        }
    }
    visiting.remove(lam);
    if ok || visiting.is_empty() {
        c.backward.lock().unwrap().insert(lam.clone(), ok);
    }
    ok
}
