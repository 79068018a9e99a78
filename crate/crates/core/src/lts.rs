//! Explicit-state labeled transition systems and their export formats.

use std::collections::{HashSet, VecDeque};
use std::fmt::Write;
use std::sync::Arc;

use crate::action::Action;
use crate::formula::{SymbolTable, Valuation};
use crate::term::Term;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LtsState {
    /// Normalized term this state was built from; absent for synthetic or
    /// quotient states.
    pub term: Option<Term>,
    /// Present for state-based systems.
    pub valuation: Option<Valuation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub source: usize,
    pub action: Action,
    pub target: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub states: usize,
    pub transitions: usize,
    pub state_based: bool,
}

#[derive(Clone, Debug, Default)]
pub struct Lts {
    pub states: Vec<LtsState>,
    pub initial: Vec<usize>,
    pub transitions: Vec<Transition>,
    pub terminating: Vec<bool>,
    pub symbols: Option<Arc<SymbolTable>>,
    pub stats: BuildStats,
    out: Vec<Vec<usize>>,
    seen: HashSet<(usize, Action, usize)>,
}

impl Lts {
    pub fn new() -> Self {
        Lts::default()
    }

    pub fn add_state(&mut self, state: LtsState, terminating: bool) -> usize {
        self.states.push(state);
        self.terminating.push(terminating);
        self.out.push(Vec::new());
        self.stats.states = self.states.len();
        self.states.len() - 1
    }

    /// Adds a bare state with no term or valuation payload.
    pub fn add_plain_state(&mut self, terminating: bool) -> usize {
        self.add_state(LtsState { term: None, valuation: None }, terminating)
    }

    /// Adds a transition unless an identical one already exists. Returns
    /// whether it was new.
    pub fn add_transition(&mut self, source: usize, action: Action, target: usize) -> bool {
        assert!(source < self.states.len() && target < self.states.len(), "transition endpoint out of range");
        if !self.seen.insert((source, action.clone(), target)) {
            return false;
        }
        self.out[source].push(self.transitions.len());
        self.transitions.push(Transition { source, action, target });
        self.stats.transitions = self.transitions.len();
        true
    }

    pub fn add_initial(&mut self, s: usize) {
        if !self.initial.contains(&s) {
            self.initial.push(s);
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn outgoing(&self, s: usize) -> impl Iterator<Item = &Transition> + '_ {
        self.out[s].iter().map(move |&i| &self.transitions[i])
    }

    /// Indices into `transitions` of the moves leaving `s`.
    pub fn out_indices(&self, s: usize) -> &[usize] {
        &self.out[s]
    }

    pub fn is_terminating(&self, s: usize) -> bool {
        self.terminating[s]
    }

    pub fn valuation(&self, s: usize) -> Option<Valuation> {
        self.states[s].valuation
    }

    pub fn is_state_based(&self) -> bool {
        self.states.iter().any(|s| s.valuation.is_some())
    }

    /// Distinct labels in first-occurrence order.
    pub fn actions(&self) -> Vec<Action> {
        let mut seen = HashSet::new();
        self.transitions
            .iter()
            .filter(|t| seen.insert(t.action.clone()))
            .map(|t| t.action.clone())
            .collect()
    }

    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &s in &self.initial {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            for t in self.outgoing(s) {
                if !seen[t.target] {
                    seen[t.target] = true;
                    queue.push_back(t.target);
                }
            }
        }
        seen
    }

    /// States reached after following `trace` from the initial states.
    pub fn replay(&self, trace: &[Action]) -> Vec<usize> {
        let mut current: Vec<usize> = self.initial.clone();
        for a in trace {
            let mut next: Vec<usize> = Vec::new();
            for &s in &current {
                for t in self.outgoing(s) {
                    if &t.action == a && !next.contains(&t.target) {
                        next.push(t.target);
                    }
                }
            }
            current = next;
        }
        current
    }

    pub fn state_label(&self, s: usize) -> String {
        match (&self.symbols, self.states[s].valuation) {
            (Some(table), Some(v)) => format!("{s} {}", table.fmt_valuation(v)),
            _ => s.to_string(),
        }
    }

    /// Graphviz rendering. Terminating states are double circles; state
    /// labels list the true symbols of their valuation.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph lts {\n  rankdir=LR;\n");
        for (k, &s) in self.initial.iter().enumerate() {
            let _ = writeln!(out, "  init{k} [shape=point];");
            let _ = writeln!(out, "  init{k} -> s{s};");
        }
        for s in 0..self.len() {
            let shape = if self.terminating[s] { "doublecircle" } else { "circle" };
            let _ = writeln!(
                out,
                "  s{s} [shape={shape}, label=\"{}\"];",
                escape(&self.state_label(s))
            );
        }
        for t in &self.transitions {
            let _ = writeln!(
                out,
                "  s{} -> s{} [label=\"{}\"];",
                t.source,
                t.target,
                escape(&t.action.to_string())
            );
        }
        out.push_str("}\n");
        out
    }

    /// Aldebaran format: `des (first-initial, #transitions, #states)` and one
    /// `(source,"label",target)` line per transition.
    pub fn to_aut(&self) -> String {
        let first = self.initial.first().copied().unwrap_or(0);
        let mut out = format!("des ({}, {}, {})\n", first, self.transitions.len(), self.len());
        for t in &self.transitions {
            let _ = writeln!(out, "({},\"{}\",{})", t.source, escape(&t.action.to_string()), t.target);
        }
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
