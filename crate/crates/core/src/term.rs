//! Process terms.

use std::fmt;
use std::sync::Arc;

use crate::action::{fmt_encap_set, Action, EncapSet, Name};
use crate::formula::Formula;

/// A process expression. Children are reference counted so that successor
/// terms share structure with their source.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    /// `δ`, printed `0`.
    Deadlock,
    /// `ε`, printed `1`.
    Empty,
    /// `⊥`, printed `bot`.
    Inaccessible,
    Prefix(Action, Arc<Term>),
    Seq(Arc<Term>, Arc<Term>),
    Alt(Arc<Term>, Arc<Term>),
    Par(Arc<Term>, Arc<Term>),
    Star(Arc<Term>),
    Encap(Arc<EncapSet>, Arc<Term>),
    Guard(Arc<Formula>, Arc<Term>),
    Emit(Arc<Formula>, Arc<Term>),
    Ref(Name),
}

impl Term {
    pub fn prefix(a: Action, p: Term) -> Term {
        Term::Prefix(a, Arc::new(p))
    }

    pub fn seq(p: Term, q: Term) -> Term {
        Term::Seq(Arc::new(p), Arc::new(q))
    }

    pub fn alt(p: Term, q: Term) -> Term {
        Term::Alt(Arc::new(p), Arc::new(q))
    }

    pub fn par(p: Term, q: Term) -> Term {
        Term::Par(Arc::new(p), Arc::new(q))
    }

    pub fn star(p: Term) -> Term {
        Term::Star(Arc::new(p))
    }

    pub fn encap(set: EncapSet, p: Term) -> Term {
        Term::Encap(Arc::new(set), Arc::new(p))
    }

    pub fn guard(phi: Formula, p: Term) -> Term {
        Term::Guard(Arc::new(phi), Arc::new(p))
    }

    pub fn emit(phi: Formula, p: Term) -> Term {
        Term::Emit(Arc::new(phi), Arc::new(p))
    }

    pub fn reference(n: &str) -> Term {
        Term::Ref(crate::action::name(n))
    }

    /// Whether the term uses any construct that needs valuations.
    pub fn is_state_based(&self) -> bool {
        match self {
            Term::Inaccessible | Term::Guard(..) | Term::Emit(..) => true,
            Term::Deadlock | Term::Empty | Term::Ref(_) => false,
            Term::Prefix(_, p) | Term::Star(p) | Term::Encap(_, p) => p.is_state_based(),
            Term::Seq(p, q) | Term::Alt(p, q) | Term::Par(p, q) => {
                p.is_state_based() || q.is_state_based()
            }
        }
    }

    /// Visits every subterm in pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        match self {
            Term::Deadlock | Term::Empty | Term::Inaccessible | Term::Ref(_) => {}
            Term::Prefix(_, p)
            | Term::Star(p)
            | Term::Encap(_, p)
            | Term::Guard(_, p)
            | Term::Emit(_, p) => p.walk(f),
            Term::Seq(p, q) | Term::Alt(p, q) | Term::Par(p, q) => {
                p.walk(f);
                q.walk(f);
            }
        }
    }

    /// Prefix actions in order of first occurrence.
    pub fn prefix_actions(&self) -> Vec<Action> {
        let mut out: Vec<Action> = Vec::new();
        self.walk(&mut |t| {
            if let Term::Prefix(a, _) = t {
                if !out.contains(a) {
                    out.push(a.clone());
                }
            }
        });
        out
    }

    pub fn formulas(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        self.walk(&mut |t| match t {
            Term::Guard(phi, _) | Term::Emit(phi, _) => out.push(&**phi),
            _ => {}
        });
        out
    }

    pub fn references(&self) -> Vec<Name> {
        let mut out: Vec<Name> = Vec::new();
        self.walk(&mut |t| {
            if let Term::Ref(n) = t {
                if !out.contains(n) {
                    out.push(n.clone());
                }
            }
        });
        out
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }

    fn level(&self) -> u8 {
        match self {
            Term::Alt(..) => 0,
            Term::Par(..) => 1,
            Term::Seq(..) => 2,
            Term::Prefix(..) | Term::Guard(..) | Term::Emit(..) => 3,
            _ => 4,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, level: u8) -> fmt::Result {
        let mine = self.level();
        if mine < level {
            f.write_str("(")?;
        }
        match self {
            Term::Deadlock => f.write_str("0")?,
            Term::Empty => f.write_str("1")?,
            Term::Inaccessible => f.write_str("bot")?,
            Term::Ref(n) => f.write_str(n)?,
            Term::Prefix(a, p) => {
                write!(f, "{a}.")?;
                p.fmt_at(f, 3)?;
            }
            // Binary operators associate to the right.
            Term::Seq(p, q) => {
                p.fmt_at(f, 3)?;
                f.write_str(" ; ")?;
                q.fmt_at(f, 2)?;
            }
            Term::Par(p, q) => {
                p.fmt_at(f, 2)?;
                f.write_str(" || ")?;
                q.fmt_at(f, 1)?;
            }
            Term::Alt(p, q) => {
                p.fmt_at(f, 1)?;
                f.write_str(" + ")?;
                q.fmt_at(f, 0)?;
            }
            Term::Star(p) => {
                p.fmt_at(f, 4)?;
                f.write_str("*")?;
            }
            Term::Encap(set, p) => {
                write!(f, "encap({}, ", fmt_encap_set(set))?;
                p.fmt_at(f, 0)?;
                f.write_str(")")?;
            }
            Term::Guard(phi, p) => {
                write!(f, "[{phi}] -> ")?;
                p.fmt_at(f, 3)?;
            }
            Term::Emit(phi, p) => {
                if phi.is_atomic() {
                    write!(f, "{phi} ^^ ")?;
                } else {
                    write!(f, "({phi}) ^^ ")?;
                }
                p.fmt_at(f, 3)?;
            }
        }
        if mine < level {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}
