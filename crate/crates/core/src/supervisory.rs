//! Supervised plants and the checks run on them: behavioral and language
//! controllability, requirement refinement, deadlock freedom and
//! nonblocking.

use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::action::{Action, ChannelClass, EncapSet, Name};
use crate::grammar::{classify_term, Grammar};
use crate::lts::Lts;
use crate::pbisim::{pbisim_leq, BisimActionSet, Counterexample};
use crate::term::Term;

/// Largest number of subset states either determinized side may reach.
pub const MAX_SUBSET_STATES: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SupervisoryError {
    #[error("subset construction exceeded {limit} states")]
    SubsetBudget { limit: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Evidence {
    /// A trace from an initial state and the state it ends in.
    Trace { trace: Vec<Action>, state: Option<usize> },
    Play(Counterexample),
    /// Nonblocking was checked on a system that never terminates.
    NoTerminatingState,
}

impl Evidence {
    /// Machine-readable lines, one action or play step per line.
    pub fn lines(&self) -> Vec<String> {
        match self {
            Evidence::Trace { trace, state } => {
                let mut out: Vec<String> = trace.iter().map(|a| a.to_string()).collect();
                if let Some(s) = state {
                    out.push(format!("state {s}"));
                }
                out
            }
            Evidence::Play(cx) => cx.render().lines().map(str::to_string).collect(),
            Evidence::NoTerminatingState => vec!["no terminating state".to_string()],
        }
    }

    pub fn trace(&self) -> Option<&[Action]> {
        match self {
            Evidence::Trace { trace, .. } => Some(trace),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ControlVerdict {
    pub pass: bool,
    pub evidence: Option<Evidence>,
    pub checks_run: Vec<String>,
    pub warnings: Vec<String>,
}

impl ControlVerdict {
    fn pass(check: &str) -> Self {
        ControlVerdict { pass: true, evidence: None, checks_run: vec![check.to_string()], warnings: Vec::new() }
    }

    fn fail(check: &str, evidence: Evidence) -> Self {
        ControlVerdict {
            pass: false,
            evidence: Some(evidence),
            checks_run: vec![check.to_string()],
            warnings: Vec::new(),
        }
    }
}

/// `∂_E(S ‖ U)`.
pub fn compose_supervised(plant: &Term, supervisor: &Term, e: &EncapSet) -> Term {
    Term::encap(e.clone(), Term::par(supervisor.clone(), plant.clone()))
}

/// Grammar conformance messages for a plant/supervisor pair. Violations are
/// reported, not enforced.
pub fn supervision_warnings(
    plant: &Term,
    supervisor: &Term,
    state_based: bool,
    class_of: &dyn Fn(&str) -> Option<ChannelClass>,
) -> Vec<String> {
    let (pg, sg) = if state_based {
        (Grammar::PlantState, Grammar::SupervisorState)
    } else {
        (Grammar::PlantEvent, Grammar::SupervisorEvent)
    };
    let mut out = Vec::new();
    if let Err(e) = classify_term(plant, pg, class_of) {
        out.push(e.to_string());
    }
    if let Err(e) = classify_term(supervisor, sg, class_of) {
        out.push(e.to_string());
    }
    out
}

/// `supervised ≤_{Act_U} plant`, where `plant` was built from the renamed
/// plant term.
pub fn check_controllability(supervised: &Lts, plant: &Lts, uncontrollable: &BTreeSet<Name>) -> ControlVerdict {
    let outcome = pbisim_leq(supervised, plant, &BisimActionSet::Uncontrollable(uncontrollable.clone()));
    let mut verdict = match outcome.counterexample {
        None => ControlVerdict::pass("controllable"),
        Some(cx) => ControlVerdict::fail("controllable", Evidence::Play(cx)),
    };
    let performed: BTreeSet<Action> = supervised.actions().into_iter().collect();
    for a in plant.actions() {
        let open = (a.sends == 0) != (a.receives == 0);
        if open && !performed.contains(&a) {
            verdict.warnings.push(format!("plant action `{a}` is an open communication after renaming"));
        }
    }
    verdict
}

/// `supervised ≤_∅ requirement`.
pub fn check_requirement_refinement(supervised: &Lts, requirement: &Lts) -> ControlVerdict {
    match pbisim_leq(supervised, requirement, &BisimActionSet::empty()).counterexample {
        None => ControlVerdict::pass("requirement-refinement"),
        Some(cx) => ControlVerdict::fail("requirement-refinement", Evidence::Play(cx)),
    }
}

/// Breadth-first parents from all initial states.
fn bfs_tree(l: &Lts) -> (Vec<usize>, Vec<Option<(usize, usize)>>) {
    let mut order = Vec::new();
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; l.len()];
    let mut seen = vec![false; l.len()];
    let mut queue = VecDeque::new();
    for &s in &l.initial {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(s) = queue.pop_front() {
        order.push(s);
        for &i in l.out_indices(s) {
            let t = &l.transitions[i];
            if !seen[t.target] {
                seen[t.target] = true;
                parent[t.target] = Some((s, i));
                queue.push_back(t.target);
            }
        }
    }
    (order, parent)
}

fn trace_to(l: &Lts, parent: &[Option<(usize, usize)>], mut s: usize) -> Vec<Action> {
    let mut trace = Vec::new();
    while let Some((p, i)) = parent[s] {
        trace.push(l.transitions[i].action.clone());
        s = p;
    }
    trace.reverse();
    trace
}

/// A shortest trace from an initial state to `s`, if `s` is reachable.
pub fn shortest_trace(l: &Lts, s: usize) -> Option<Vec<Action>> {
    let (order, parent) = bfs_tree(l);
    order.contains(&s).then(|| trace_to(l, &parent, s))
}

/// Looks for a reachable state with no moves that is not terminating and
/// returns a shortest trace to one.
pub fn check_deadlock_free(l: &Lts) -> ControlVerdict {
    let (order, parent) = bfs_tree(l);
    for s in order {
        if l.outgoing(s).next().is_none() && !l.is_terminating(s) {
            let trace = trace_to(l, &parent, s);
            return ControlVerdict::fail("deadlock", Evidence::Trace { trace, state: Some(s) });
        }
    }
    ControlVerdict::pass("deadlock")
}

/// Every reachable state can reach a terminating one.
pub fn check_nonblocking(l: &Lts) -> ControlVerdict {
    if !l.terminating.iter().any(|&t| t) {
        return ControlVerdict::fail("nonblocking", Evidence::NoTerminatingState);
    }
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); l.len()];
    for t in &l.transitions {
        pred[t.target].push(t.source);
    }
    let mut coreach = l.terminating.clone();
    let mut queue: VecDeque<usize> = (0..l.len()).filter(|&s| coreach[s]).collect();
    while let Some(s) = queue.pop_front() {
        for &p in &pred[s] {
            if !coreach[p] {
                coreach[p] = true;
                queue.push_back(p);
            }
        }
    }
    let (order, parent) = bfs_tree(l);
    for s in order {
        if !coreach[s] {
            let trace = trace_to(l, &parent, s);
            return ControlVerdict::fail("nonblocking", Evidence::Trace { trace, state: Some(s) });
        }
    }
    ControlVerdict::pass("nonblocking")
}

struct Determinizer<'a> {
    l: &'a Lts,
    ids: HashMap<Vec<usize>, usize>,
    subsets: Vec<Vec<usize>>,
}

impl<'a> Determinizer<'a> {
    fn new(l: &'a Lts) -> Self {
        Determinizer { l, ids: HashMap::new(), subsets: Vec::new() }
    }

    fn intern(&mut self, mut set: Vec<usize>) -> Result<usize, SupervisoryError> {
        set.sort_unstable();
        set.dedup();
        if let Some(&id) = self.ids.get(&set) {
            return Ok(id);
        }
        if self.subsets.len() >= MAX_SUBSET_STATES {
            return Err(SupervisoryError::SubsetBudget { limit: MAX_SUBSET_STATES });
        }
        self.subsets.push(set.clone());
        self.ids.insert(set, self.subsets.len() - 1);
        Ok(self.subsets.len() - 1)
    }

    /// Successor subsets by label, in label order.
    fn moves(&self, id: usize) -> Vec<(Action, Vec<usize>)> {
        let mut by: std::collections::BTreeMap<Action, Vec<usize>> = Default::default();
        for &s in &self.subsets[id] {
            for t in self.l.outgoing(s) {
                by.entry(t.action.clone()).or_default().push(t.target);
            }
        }
        by.into_iter().collect()
    }
}

/// `L(supervised)·U ∩ L(plant) ⊆ L(supervised)` over prefix-closed trace
/// languages, with `U` the actions on uncontrollable channels.
pub fn check_language_controllability(
    supervised: &Lts,
    plant: &Lts,
    uncontrollable: &BTreeSet<Name>,
) -> Result<ControlVerdict, SupervisoryError> {
    let mut d1 = Determinizer::new(supervised);
    let mut d2 = Determinizer::new(plant);
    let start = (d1.intern(supervised.initial.clone())?, d2.intern(plant.initial.clone())?);
    let mut parent: HashMap<(usize, usize), Option<((usize, usize), Action)>> = HashMap::new();
    parent.insert(start, None);
    let mut queue = VecDeque::from([start]);
    let trace_of = |parent: &HashMap<_, Option<((usize, usize), Action)>>, mut at: (usize, usize)| {
        let mut trace = Vec::new();
        while let Some(Some((prev, a))) = parent.get(&at) {
            trace.push(a.clone());
            at = *prev;
        }
        trace.reverse();
        trace
    };
    while let Some(pair) = queue.pop_front() {
        let m1: HashMap<Action, Vec<usize>> = d1.moves(pair.0).into_iter().collect();
        for (a, targets2) in d2.moves(pair.1) {
            match m1.get(&a) {
                Some(targets1) => {
                    let next = (d1.intern(targets1.clone())?, d2.intern(targets2)?);
                    if !parent.contains_key(&next) {
                        parent.insert(next, Some((pair, a)));
                        queue.push_back(next);
                    }
                }
                None if uncontrollable.contains(&a.channel) => {
                    let mut trace = trace_of(&parent, pair);
                    trace.push(a);
                    return Ok(ControlVerdict::fail("lang-controllable", Evidence::Trace { trace, state: None }));
                }
                None => {}
            }
        }
    }
    Ok(ControlVerdict::pass("lang-controllable"))
}
