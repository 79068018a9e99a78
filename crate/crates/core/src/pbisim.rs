//! Partial bisimulation: the preorder `≤_B` between LTSs, its equivalence,
//! and quotienting by it.
//!
//! The relation is computed as a greatest fixpoint over state pairs. Pairs
//! are removed in rounds, and the round and cause of every removal are kept
//! so that a failing verdict comes with a play tree that explains it.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::{self, Write};

use crate::action::{Action, Name};
use crate::lts::{Lts, LtsState};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BisimActionSet {
    Explicit(BTreeSet<Action>),
    /// Every action on one of these (uncontrollable) channels.
    Uncontrollable(BTreeSet<Name>),
    All,
}

impl BisimActionSet {
    pub fn empty() -> Self {
        BisimActionSet::Explicit(BTreeSet::new())
    }

    pub fn contains(&self, a: &Action) -> bool {
        match self {
            BisimActionSet::Explicit(set) => set.contains(a),
            BisimActionSet::Uncontrollable(channels) => channels.contains(&a.channel),
            BisimActionSet::All => true,
        }
    }

    /// Members of an explicit set that label no transition of either LTS.
    pub fn strays(&self, l1: &Lts, l2: &Lts) -> Vec<Action> {
        let BisimActionSet::Explicit(set) = self else { return Vec::new() };
        let used: HashSet<Action> = l1.actions().into_iter().chain(l2.actions()).collect();
        set.iter().filter(|a| !used.contains(*a)).cloned().collect()
    }
}

impl fmt::Display for BisimActionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BisimActionSet::All => f.write_str("all"),
            BisimActionSet::Uncontrollable(_) => f.write_str("U"),
            BisimActionSet::Explicit(set) => {
                let items: Vec<String> = set.iter().map(|a| a.to_string()).collect();
                write!(f, "{{{}}}", items.join(", "))
            }
        }
    }
}

/// Why a pair of states is not related.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FailKind {
    /// The valuations of a state-based pair differ.
    Valuation,
    /// The left state terminates and the right one does not.
    Termination,
    /// The left state moves to `target` and no right move answers it.
    Forward { action: Action, target: usize },
    /// The right state makes a bisimulated move to `target` the left
    /// cannot answer.
    Back { action: Action, target: usize },
}

/// One position of a failing play. For moves, `responses` lists every
/// answer the defender has; each of them fails in turn.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlayNode {
    pub left: usize,
    pub right: usize,
    pub kind: FailKind,
    pub responses: Vec<PlayNode>,
    /// Set when the tree was cut to stay within the node budget.
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    /// The initial state of the left LTS that no initial right state covers.
    pub left_initial: usize,
    /// One play per initial state of the right LTS.
    pub plays: Vec<PlayNode>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PbisimOutcome {
    pub holds: bool,
    /// The greatest partial bisimulation, when the verdict holds.
    pub witness: Option<Vec<(usize, usize)>>,
    pub counterexample: Option<Counterexample>,
}

const MAX_PLAY_NODES: usize = 2_000;

struct Fixpoint {
    n2: usize,
    /// Round in which each pair was removed; `None` while related.
    removed: Vec<Option<u32>>,
    reason: HashMap<usize, FailKind>,
}

impl Fixpoint {
    fn alive(&self, p: usize, q: usize) -> bool {
        self.removed[p * self.n2 + q].is_none()
    }
}

fn same_valuation(l1: &Lts, p: usize, l2: &Lts, q: usize) -> bool {
    match (l1.valuation(p), l2.valuation(q)) {
        (Some(v), Some(w)) => v == w,
        _ => true,
    }
}

fn predecessors(l: &Lts) -> Vec<Vec<usize>> {
    let mut pred = vec![Vec::new(); l.len()];
    for t in &l.transitions {
        if !pred[t.target].contains(&t.source) {
            pred[t.target].push(t.source);
        }
    }
    pred
}

/// First violated condition of `(p, q)` against the current relation.
fn violation(l1: &Lts, l2: &Lts, b: &BisimActionSet, fp: &Fixpoint, p: usize, q: usize) -> Option<FailKind> {
    if l1.is_terminating(p) && !l2.is_terminating(q) {
        return Some(FailKind::Termination);
    }
    for t in l1.outgoing(p) {
        let answered = l2.outgoing(q).any(|u| u.action == t.action && fp.alive(t.target, u.target));
        if !answered {
            return Some(FailKind::Forward { action: t.action.clone(), target: t.target });
        }
    }
    for u in l2.outgoing(q) {
        if !b.contains(&u.action) {
            continue;
        }
        let answered = l1.outgoing(p).any(|t| t.action == u.action && fp.alive(t.target, u.target));
        if !answered {
            return Some(FailKind::Back { action: u.action.clone(), target: u.target });
        }
    }
    None
}

fn greatest_fixpoint(l1: &Lts, l2: &Lts, b: &BisimActionSet) -> Fixpoint {
    let (n1, n2) = (l1.len(), l2.len());
    let mut fp = Fixpoint { n2, removed: vec![None; n1 * n2], reason: HashMap::new() };
    let mut pending: Vec<(usize, usize)> = Vec::new();
    for p in 0..n1 {
        for q in 0..n2 {
            if same_valuation(l1, p, l2, q) {
                pending.push((p, q));
            } else {
                fp.removed[p * n2 + q] = Some(0);
            }
        }
    }
    let pred1 = predecessors(l1);
    let pred2 = predecessors(l2);
    let mut round = 1u32;
    loop {
        let mut deleted = Vec::new();
        for &(p, q) in &pending {
            if !fp.alive(p, q) {
                continue;
            }
            if let Some(kind) = violation(l1, l2, b, &fp, p, q) {
                deleted.push((p, q, kind));
            }
        }
        if deleted.is_empty() {
            break;
        }
        let mut next = HashSet::new();
        for (p, q, kind) in deleted {
            let k = p * n2 + q;
            if fp.removed[k].is_some() {
                continue;
            }
            fp.removed[k] = Some(round);
            fp.reason.insert(k, kind);
            for &pp in &pred1[p] {
                for &qq in &pred2[q] {
                    if fp.alive(pp, qq) {
                        next.insert((pp, qq));
                    }
                }
            }
        }
        pending = next.into_iter().collect();
        pending.sort_unstable();
        round += 1;
    }
    fp
}

fn play(l1: &Lts, l2: &Lts, fp: &Fixpoint, p: usize, q: usize, budget: &mut usize) -> PlayNode {
    let kind = fp.reason.get(&(p * fp.n2 + q)).cloned().unwrap_or(FailKind::Valuation);
    let mut node = PlayNode { left: p, right: q, kind: kind.clone(), responses: Vec::new(), truncated: false };
    *budget = budget.saturating_sub(1);
    let answers: Vec<(usize, usize)> = match &kind {
        FailKind::Valuation | FailKind::Termination => Vec::new(),
        FailKind::Forward { action, target } => l2
            .outgoing(q)
            .filter(|u| &u.action == action)
            .map(|u| (*target, u.target))
            .collect(),
        FailKind::Back { action, target } => l1
            .outgoing(p)
            .filter(|t| &t.action == action)
            .map(|t| (t.target, *target))
            .collect(),
    };
    for (pp, qq) in answers {
        if *budget == 0 {
            node.truncated = true;
            break;
        }
        node.responses.push(play(l1, l2, fp, pp, qq, budget));
    }
    node
}

/// Decides `l1 ≤_B l2`: every initial state of `l1` is related to some
/// initial state of `l2`. Pairs of state-based states are only related when
/// their valuations agree.
pub fn pbisim_leq(l1: &Lts, l2: &Lts, b: &BisimActionSet) -> PbisimOutcome {
    let fp = greatest_fixpoint(l1, l2, b);
    for &p in &l1.initial {
        if !l2.initial.iter().any(|&q| fp.alive(p, q)) {
            let mut budget = MAX_PLAY_NODES;
            let plays = l2.initial.iter().map(|&q| play(l1, l2, &fp, p, q, &mut budget)).collect();
            return PbisimOutcome {
                holds: false,
                witness: None,
                counterexample: Some(Counterexample { left_initial: p, plays }),
            };
        }
    }
    let mut witness = Vec::new();
    for p in 0..l1.len() {
        for q in 0..l2.len() {
            if fp.alive(p, q) {
                witness.push((p, q));
            }
        }
    }
    PbisimOutcome { holds: true, witness: Some(witness), counterexample: None }
}

/// `l1 ↔_B l2`; a failing outcome carries the counterexample of the first
/// direction that fails.
pub fn pbisim_eq(l1: &Lts, l2: &Lts, b: &BisimActionSet) -> PbisimOutcome {
    let forward = pbisim_leq(l1, l2, b);
    if !forward.holds {
        return forward;
    }
    let back = pbisim_leq(l2, l1, b);
    if !back.holds {
        return back;
    }
    forward
}

/// Checks directly that `rel` is a partial bisimulation from `l1` to `l2`
/// covering the initial states.
pub fn validate_witness(l1: &Lts, l2: &Lts, b: &BisimActionSet, rel: &[(usize, usize)]) -> bool {
    let set: HashSet<(usize, usize)> = rel.iter().copied().collect();
    let related = |p: usize, q: usize| set.contains(&(p, q));
    for &(p, q) in rel {
        if !same_valuation(l1, p, l2, q) {
            return false;
        }
        if l1.is_terminating(p) && !l2.is_terminating(q) {
            return false;
        }
        for t in l1.outgoing(p) {
            if !l2.outgoing(q).any(|u| u.action == t.action && related(t.target, u.target)) {
                return false;
            }
        }
        for u in l2.outgoing(q).filter(|u| b.contains(&u.action)) {
            if !l1.outgoing(p).any(|t| t.action == u.action && related(t.target, u.target)) {
                return false;
            }
        }
    }
    l1.initial.iter().all(|&p| l2.initial.iter().any(|&q| related(p, q)))
}

/// Quotient of `l` by `↔_B` computed between `l` and itself. Each block
/// carries every transition of its members.
pub fn minimize(l: &Lts, b: &BisimActionSet) -> Lts {
    let fp = greatest_fixpoint(l, l, b);
    let mut block = vec![usize::MAX; l.len()];
    let mut reps = Vec::new();
    for s in 0..l.len() {
        if block[s] != usize::MAX {
            continue;
        }
        let id = reps.len();
        reps.push(s);
        for t in s..l.len() {
            if block[t] == usize::MAX && fp.alive(s, t) && fp.alive(t, s) {
                block[t] = id;
            }
        }
    }
    let mut out = Lts::new();
    out.symbols = l.symbols.clone();
    out.stats.state_based = l.stats.state_based;
    for &r in &reps {
        out.add_state(LtsState { term: None, valuation: l.valuation(r) }, l.is_terminating(r));
    }
    for &s in &l.initial {
        out.add_initial(block[s]);
    }
    for t in &l.transitions {
        out.add_transition(block[t.source], t.action.clone(), block[t.target]);
    }
    out
}

impl Counterexample {
    /// Indented rendering of the play tree, one move per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "left initial state {} is related to no right initial state", self.left_initial);
        for node in &self.plays {
            render_node(node, 0, &mut out);
        }
        out
    }

    /// The first line of play: attacker moves along the first response at
    /// every position, ending at a directly failing pair.
    pub fn first_line(&self) -> Vec<String> {
        let mut lines = Vec::new();
        let mut node = self.plays.first();
        while let Some(n) = node {
            lines.push(describe(n));
            node = n.responses.first();
        }
        lines
    }
}

fn describe(n: &PlayNode) -> String {
    match &n.kind {
        FailKind::Valuation => format!("({}, {}) valuations differ", n.left, n.right),
        FailKind::Termination => format!("({}, {}) left terminates, right does not", n.left, n.right),
        FailKind::Forward { action, target } => {
            format!("({}, {}) left moves {action} to {target}; right has {} answer(s)", n.left, n.right, n.responses.len())
        }
        FailKind::Back { action, target } => {
            format!("({}, {}) right moves {action} to {target}; left has {} answer(s)", n.left, n.right, n.responses.len())
        }
    }
}

fn render_node(n: &PlayNode, depth: usize, out: &mut String) {
    let _ = writeln!(out, "{}{}", "  ".repeat(depth), describe(n));
    for r in &n.responses {
        render_node(r, depth + 1, out);
    }
    if n.truncated {
        let _ = writeln!(out, "{}...", "  ".repeat(depth + 1));
    }
}
