//! Syntactic classes of plants and supervisors.

use std::fmt;

use thiserror::Error;

use crate::action::{Action, ChannelClass};
use crate::term::Term;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Grammar {
    PlantEvent,
    SupervisorEvent,
    PlantState,
    SupervisorState,
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Grammar::PlantEvent => "event-based plant",
            Grammar::SupervisorEvent => "event-based supervisor",
            Grammar::PlantState => "state-based plant",
            Grammar::SupervisorState => "state-based supervisor",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("`{subterm}` is not allowed in this {grammar}: {reason}")]
pub struct GrammarViolation {
    pub grammar: Grammar,
    pub subterm: Term,
    pub reason: String,
}

/// Checks that `t` is generated by `grammar`, returning the first offending
/// subterm in pre-order otherwise. `class_of` resolves channel classes.
pub fn classify_term(
    t: &Term,
    grammar: Grammar,
    class_of: &dyn Fn(&str) -> Option<ChannelClass>,
) -> Result<(), GrammarViolation> {
    let fail = |reason: &str| {
        Err(GrammarViolation {
            grammar,
            subterm: t.clone(),
            reason: reason.to_string(),
        })
    };
    let plant = matches!(grammar, Grammar::PlantEvent | Grammar::PlantState);
    let state = matches!(grammar, Grammar::PlantState | Grammar::SupervisorState);
    let rec = |p: &Term| classify_term(p, grammar, class_of);
    match t {
        Term::Empty => Ok(()),
        Term::Deadlock if plant => Ok(()),
        Term::Deadlock => fail("deadlock is not a supervisor"),
        Term::Inaccessible => fail("the inaccessible process is not allowed"),
        Term::Ref(_) => fail("unexpanded reference"),
        Term::Prefix(a, p) => {
            let Some(class) = class_of(&a.channel) else {
                return fail("undeclared channel");
            };
            if let Err(reason) = prefix_allowed(a, class, grammar) {
                return fail(&reason);
            }
            rec(p)
        }
        Term::Alt(p, q) => {
            rec(p)?;
            rec(q)
        }
        Term::Star(p) => rec(p),
        Term::Seq(p, q) | Term::Par(p, q) if plant => {
            rec(p)?;
            rec(q)
        }
        Term::Encap(_, p) if plant => rec(p),
        Term::Seq(..) | Term::Par(..) | Term::Encap(..) => fail("operator not allowed in a supervisor"),
        Term::Guard(_, p) if state => rec(p),
        Term::Emit(_, p) if plant && state => rec(p),
        Term::Guard(..) | Term::Emit(..) => fail("construct not allowed here"),
    }
}

fn prefix_allowed(a: &Action, class: ChannelClass, grammar: Grammar) -> Result<(), String> {
    let shape = (a.sends, a.receives);
    let ok = match (grammar, class) {
        (Grammar::PlantEvent | Grammar::PlantState, ChannelClass::Controllable) => shape == (0, 1),
        (Grammar::PlantEvent | Grammar::PlantState, ChannelClass::Uncontrollable) => {
            a.sends <= 1 && a.receives <= 1
        }
        (Grammar::SupervisorEvent, ChannelClass::Controllable)
        | (Grammar::SupervisorState, ChannelClass::Controllable) => shape == (1, 0),
        (Grammar::SupervisorEvent, ChannelClass::Uncontrollable) => shape == (0, 1),
        (Grammar::SupervisorState, ChannelClass::Uncontrollable) => false,
    };
    if ok {
        Ok(())
    } else {
        Err(format!("action `{a}` on a {class} channel not allowed"))
    }
}
