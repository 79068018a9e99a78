//! State-based control requirements evaluated over a built LTS.

use std::fmt;

use crate::action::Action;
use crate::event::SemanticsError;
use crate::formula::{Formula, SymbolTable};
use crate::lts::Lts;
use crate::state::validate_formula;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Requirement {
    /// Every reachable valuation satisfies the formula.
    Pure(Formula),
    /// Whenever the action is enabled, the formula holds.
    EventImplies(Action, Formula),
    /// Whenever the formula holds, the action is disabled.
    Disables(Formula, Action),
}

impl Requirement {
    pub fn formula(&self) -> &Formula {
        match self {
            Requirement::Pure(phi) | Requirement::EventImplies(_, phi) | Requirement::Disables(phi, _) => phi,
        }
    }

    pub fn action(&self) -> Option<&Action> {
        match self {
            Requirement::Pure(_) => None,
            Requirement::EventImplies(a, _) | Requirement::Disables(_, a) => Some(a),
        }
    }
}

impl fmt::Display for Requirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Requirement::Pure(phi) => write!(f, "{phi}"),
            Requirement::EventImplies(a, phi) => write!(f, "enables({a}) => {phi}"),
            Requirement::Disables(phi, a) => write!(f, "{phi} => disabled({a})"),
        }
    }
}

/// `enables(a) ⊃ φ` holds exactly when `¬φ` disables `a`.
pub fn event_implies_as_disables(r: &Requirement) -> Requirement {
    match r {
        Requirement::EventImplies(a, phi) => Requirement::Disables(Formula::not(phi.clone()), a.clone()),
        other => other.clone(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RequirementOutcome {
    /// Reachable states violating the requirement, ascending.
    pub violations: Vec<usize>,
}

impl RequirementOutcome {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a requirement on every reachable state of a state-based LTS.
pub fn check_requirement(l: &Lts, r: &Requirement) -> Result<RequirementOutcome, SemanticsError> {
    let table: &SymbolTable = l
        .symbols
        .as_deref()
        .ok_or_else(|| SemanticsError::Other("requirements need a state-based LTS".into()))?;
    validate_formula(r.formula(), table)?;
    let reachable = l.reachable();
    let mut violations = Vec::new();
    for s in (0..l.len()).filter(|&s| reachable[s]) {
        let v = l
            .valuation(s)
            .ok_or_else(|| SemanticsError::Other(format!("state {s} has no valuation")))?;
        let enabled = |a: &Action| l.outgoing(s).any(|t| &t.action == a);
        let ok = match r {
            Requirement::Pure(phi) => phi.eval(table, v)?,
            Requirement::EventImplies(a, phi) => !enabled(a) || phi.eval(table, v)?,
            Requirement::Disables(phi, a) => !phi.eval(table, v)? || !enabled(a),
        };
        if !ok {
            violations.push(s);
        }
    }
    Ok(RequirementOutcome { violations })
}
