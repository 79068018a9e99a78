//! Event-based operational semantics: termination, one-step transitions
//! and reachable-LTS construction for terms without valuations.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use thiserror::Error;

use crate::action::{blocks, Action, Name};
use crate::formula::FormulaError;
use crate::lts::{Lts, LtsState};
use crate::term::Term;

pub const DEFAULT_MAX_STATES: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("term uses guards, emissions or the inaccessible process; use the state-based semantics")]
    StateBasedConstruct,
    #[error("unresolved reference `{0}`")]
    UnresolvedReference(Name),
    #[error("state budget of {limit} exceeded; likely diverging term: {frontier}")]
    BudgetExceeded { limit: usize, frontier: Term },
    #[error("no consistent initial state")]
    NoConsistentInitial,
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("{0}")]
    Other(String),
}

/// Successful termination `t↓`.
pub fn terminates(t: &Term) -> Result<bool, SemanticsError> {
    Ok(match t {
        Term::Empty | Term::Star(_) => true,
        Term::Deadlock | Term::Prefix(..) => false,
        Term::Seq(p, q) | Term::Par(p, q) => terminates(p)? && terminates(q)?,
        Term::Alt(p, q) => terminates(p)? || terminates(q)?,
        Term::Encap(_, p) => terminates(p)?,
        Term::Inaccessible | Term::Guard(..) | Term::Emit(..) => {
            return Err(SemanticsError::StateBasedConstruct)
        }
        Term::Ref(n) => return Err(SemanticsError::UnresolvedReference(n.clone())),
    })
}

/// All one-step transitions of `t`, in a fixed syntactic order. Targets are
/// not normalized.
pub fn step(t: &Term) -> Result<Vec<(Action, Term)>, SemanticsError> {
    let mut out = Vec::new();
    step_into(t, &mut out)?;
    Ok(out)
}

fn step_into(t: &Term, out: &mut Vec<(Action, Term)>) -> Result<(), SemanticsError> {
    match t {
        Term::Deadlock | Term::Empty => {}
        Term::Prefix(a, p) => out.push((a.clone(), (**p).clone())),
        Term::Star(p) => {
            for (a, p1) in step(p)? {
                out.push((a, Term::Seq(Arc::new(p1), Arc::new(t.clone()))));
            }
        }
        Term::Seq(p, q) => {
            for (a, p1) in step(p)? {
                out.push((a, Term::Seq(Arc::new(p1), q.clone())));
            }
            if terminates(p)? {
                step_into(q, out)?;
            }
        }
        Term::Alt(p, q) => {
            step_into(p, out)?;
            step_into(q, out)?;
        }
        Term::Par(p, q) => {
            let left = step(p)?;
            let right = step(q)?;
            for (a, p1) in &left {
                out.push((a.clone(), Term::Par(Arc::new(p1.clone()), q.clone())));
            }
            for (a, q1) in &right {
                out.push((a.clone(), Term::Par(p.clone(), Arc::new(q1.clone()))));
            }
            for (a, p1) in &left {
                for (b, q1) in &right {
                    if let Some(merged) = a.merge(b) {
                        out.push((merged, Term::par(p1.clone(), q1.clone())));
                    }
                }
            }
        }
        Term::Encap(set, p) => {
            for (a, p1) in step(p)? {
                if !blocks(set, &a) {
                    out.push((a, Term::Encap(set.clone(), Arc::new(p1))));
                }
            }
        }
        Term::Inaccessible | Term::Guard(..) | Term::Emit(..) => {
            return Err(SemanticsError::StateBasedConstruct)
        }
        Term::Ref(n) => return Err(SemanticsError::UnresolvedReference(n.clone())),
    }
    Ok(())
}

/// Rewrites `ε·p → p`, `δ·p → δ`, `δ+p → p`, `p+δ → p`, `∂(δ) → δ`,
/// `∂(ε) → ε` bottom-up and right-associates nested alternatives. The result
/// is strongly bisimilar to the input in both semantics.
pub fn normalize(t: &Term) -> Term {
    match normalize_inner(t) {
        Some(n) => n,
        None => t.clone(),
    }
}

fn norm_arc(p: &Arc<Term>) -> Arc<Term> {
    match normalize_inner(p) {
        Some(n) => Arc::new(n),
        None => p.clone(),
    }
}

/// `None` when the term is already normal.
fn normalize_inner(t: &Term) -> Option<Term> {
    match t {
        Term::Deadlock | Term::Empty | Term::Inaccessible | Term::Ref(_) => None,
        Term::Prefix(a, p) => normalize_inner(p).map(|n| Term::Prefix(a.clone(), Arc::new(n))),
        Term::Star(p) => normalize_inner(p).map(|n| Term::Star(Arc::new(n))),
        Term::Guard(phi, p) => normalize_inner(p).map(|n| Term::Guard(phi.clone(), Arc::new(n))),
        Term::Emit(phi, p) => normalize_inner(p).map(|n| Term::Emit(phi.clone(), Arc::new(n))),
        Term::Par(p, q) => {
            let (np, nq) = (norm_arc(p), norm_arc(q));
            if Arc::ptr_eq(&np, p) && Arc::ptr_eq(&nq, q) {
                None
            } else {
                Some(Term::Par(np, nq))
            }
        }
        Term::Seq(p, q) => {
            let np = norm_arc(p);
            match &*np {
                Term::Empty => Some((*norm_arc(q)).clone()),
                Term::Deadlock => Some(Term::Deadlock),
                _ => {
                    let nq = norm_arc(q);
                    if Arc::ptr_eq(&np, p) && Arc::ptr_eq(&nq, q) {
                        None
                    } else {
                        Some(Term::Seq(np, nq))
                    }
                }
            }
        }
        Term::Alt(p, q) => {
            let (np, nq) = (norm_arc(p), norm_arc(q));
            if *np == Term::Deadlock {
                return Some((*nq).clone());
            }
            if *nq == Term::Deadlock {
                return Some((*np).clone());
            }
            if matches!(&*np, Term::Alt(..)) {
                return Some(append_alt(&np, nq));
            }
            if Arc::ptr_eq(&np, p) && Arc::ptr_eq(&nq, q) {
                None
            } else {
                Some(Term::Alt(np, nq))
            }
        }
        Term::Encap(set, p) => {
            let np = norm_arc(p);
            match &*np {
                Term::Deadlock | Term::Empty => Some((*np).clone()),
                _ if Arc::ptr_eq(&np, p) => None,
                _ => Some(Term::Encap(set.clone(), np)),
            }
        }
    }
}

fn append_alt(left: &Arc<Term>, tail: Arc<Term>) -> Term {
    match &**left {
        Term::Alt(a, b) => Term::Alt(a.clone(), Arc::new(append_alt(b, tail))),
        _ => Term::Alt(left.clone(), tail),
    }
}

/// Breadth-first construction of the reachable LTS of `normalize(t)`.
pub fn build_lts(t: &Term, max_states: usize) -> Result<Lts, SemanticsError> {
    let start = normalize(t);
    let mut lts = Lts::new();
    let mut index: HashMap<Term, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let s0 = lts.add_state(LtsState { term: Some(start.clone()), valuation: None }, terminates(&start)?);
    lts.add_initial(s0);
    index.insert(start, s0);
    queue.push_back(s0);
    while let Some(s) = queue.pop_front() {
        let term = lts.states[s].term.clone().expect("built states carry terms");
        for (a, target) in step(&term)? {
            let target = normalize(&target);
            let id = match index.get(&target) {
                Some(&id) => id,
                None => {
                    if lts.len() >= max_states {
                        return Err(SemanticsError::BudgetExceeded { limit: max_states, frontier: target });
                    }
                    let fin = terminates(&target)?;
                    let id = lts.add_state(LtsState { term: Some(target.clone()), valuation: None }, fin);
                    index.insert(target, id);
                    queue.push_back(id);
                    id
                }
            };
            lts.add_transition(s, a, id);
        }
    }
    Ok(lts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::Shape;

    fn a() -> Action {
        Action::event("a", None)
    }

    fn a_eps() -> Term {
        Term::prefix(a(), Term::Empty)
    }

    #[test]
    fn termination_rules() {
        assert!(terminates(&Term::Empty).unwrap());
        assert!(terminates(&Term::star(a_eps())).unwrap());
        assert!(!terminates(&Term::seq(Term::Deadlock, Term::Empty)).unwrap());
        assert!(terminates(&Term::alt(Term::Deadlock, Term::Empty)).unwrap());
        assert!(!terminates(&Term::par(Term::Empty, a_eps())).unwrap());
    }

    #[test]
    fn state_based_constructs_are_rejected() {
        let t = Term::emit(crate::formula::Formula::True, Term::Empty);
        assert_eq!(terminates(&t), Err(SemanticsError::StateBasedConstruct));
        assert_eq!(step(&Term::Inaccessible).unwrap_err(), SemanticsError::StateBasedConstruct);
    }

    #[test]
    fn prefix_fires() {
        assert_eq!(step(&a_eps()).unwrap(), vec![(a(), Term::Empty)]);
    }

    #[test]
    fn send_receive_interleave_and_merge() {
        let snd = Term::prefix(Action::send("s", Some("d")), Term::Empty);
        let rcv = Term::prefix(Action::receive("s", Some("d")), Term::Empty);
        let t = Term::par(snd.clone(), rcv.clone());
        let steps = step(&t).unwrap();
        assert_eq!(
            steps,
            vec![
                (Action::send("s", Some("d")), Term::par(Term::Empty, rcv.clone())),
                (Action::receive("s", Some("d")), Term::par(snd.clone(), Term::Empty)),
                (Action::comm("s", Some("d")), Term::par(Term::Empty, Term::Empty)),
            ]
        );
        let set = [Shape::new("s", 0, 1), Shape::new("s", 1, 0)].into_iter().collect();
        let enc = Term::encap(set, t);
        let steps = step(&enc).unwrap();
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].0, Action::comm("s", Some("d")));
    }

    #[test]
    fn normalization_examples() {
        let star = Term::star(a_eps());
        assert_eq!(normalize(&Term::seq(Term::Empty, star.clone())), star);
        assert_eq!(normalize(&Term::seq(Term::Deadlock, a_eps())), Term::Deadlock);
        assert_eq!(normalize(&a_eps()), a_eps());
        let t = Term::alt(Term::alt(a_eps(), Term::Empty), Term::alt(Term::Deadlock, a_eps()));
        assert_eq!(normalize(&t), Term::alt(a_eps(), Term::alt(Term::Empty, a_eps())));
    }

    #[test]
    fn small_lts_sizes() {
        let l = build_lts(&a_eps(), 10).unwrap();
        assert_eq!((l.len(), l.transitions.len()), (2, 1));
        assert_eq!(l.terminating.iter().filter(|x| **x).count(), 1);

        let l = build_lts(&Term::star(a_eps()), 10).unwrap();
        assert_eq!((l.len(), l.transitions.len()), (1, 1));
        assert_eq!(l.transitions[0].source, l.transitions[0].target);
        assert!(l.terminating[0]);
    }

    #[test]
    fn budget_is_enforced() {
        let t = Term::par(Term::star(a_eps()), Term::prefix(a(), Term::prefix(a(), Term::Empty)));
        match build_lts(&t, 2) {
            Err(SemanticsError::BudgetExceeded { limit: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
