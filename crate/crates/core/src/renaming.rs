//! Renaming of action shapes, used to close the open communications of a
//! standalone plant so it is comparable with the supervised plant.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::action::{Action, Shape};
use crate::term::Term;

/// Finite map on action shapes, applied to every datum alike. Identity
/// outside its domain.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RenamingMap {
    pub map: BTreeMap<Shape, Shape>,
}

impl RenamingMap {
    pub fn new<I: IntoIterator<Item = (Shape, Shape)>>(pairs: I) -> Self {
        RenamingMap { map: pairs.into_iter().collect() }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().all(|(k, v)| k == v)
    }

    pub fn rename_action(&self, a: &Action) -> Action {
        match self.map.get(&a.shape()) {
            Some(target) => target.with_datum(a.datum.clone()),
            None => a.clone(),
        }
    }

    /// Applies the map to every action prefix; all other constructs are
    /// traversed homomorphically.
    pub fn apply(&self, t: &Term) -> Term {
        let rec = |p: &Arc<Term>| Arc::new(self.apply(p));
        match t {
            Term::Deadlock | Term::Empty | Term::Inaccessible | Term::Ref(_) => t.clone(),
            Term::Prefix(a, p) => Term::Prefix(self.rename_action(a), rec(p)),
            Term::Seq(p, q) => Term::Seq(rec(p), rec(q)),
            Term::Alt(p, q) => Term::Alt(rec(p), rec(q)),
            Term::Par(p, q) => Term::Par(rec(p), rec(q)),
            Term::Star(p) => Term::Star(rec(p)),
            Term::Encap(e, p) => Term::Encap(e.clone(), rec(p)),
            Term::Guard(phi, p) => Term::Guard(phi.clone(), rec(p)),
            Term::Emit(phi, p) => Term::Emit(phi.clone(), rec(p)),
        }
    }
}

pub fn apply_renaming(t: &Term, xi: &RenamingMap) -> Term {
    xi.apply(t)
}

impl fmt::Display for RenamingMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.map.iter().map(|(k, v)| format!("{k} -> {v}")).collect();
        f.write_str(&items.join(", "))
    }
}
