//! Valuation effect function: which valuations may follow an action.

use std::fmt;

use crate::action::{Action, Name, Shape};
use crate::formula::{Formula, FormulaError, Partial, SymbolTable, Tri, Valuation};

/// Description of the successor valuation set `effect(a, v)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum EffectDesc {
    /// Every valuation.
    Any,
    /// Only `v` itself.
    Keep,
    /// `v` with the listed symbols set to true.
    SetTrue(Vec<Name>),
    /// `v` with the listed symbols set to false.
    SetFalse(Vec<Name>),
    /// Every valuation satisfying the formula.
    ConstrainedBy(Formula),
}

impl EffectDesc {
    /// The single successor valuation, for descriptions that have one.
    pub fn successor(&self, table: &SymbolTable, v: Valuation) -> Result<Option<Valuation>, FormulaError> {
        Ok(match self {
            EffectDesc::Keep => Some(v),
            EffectDesc::SetTrue(symbols) | EffectDesc::SetFalse(symbols) => {
                let value = matches!(self, EffectDesc::SetTrue(_));
                let mut w = v;
                for s in symbols {
                    w = w.with(table.lookup(s)?, value);
                }
                Some(w)
            }
            EffectDesc::Any | EffectDesc::ConstrainedBy(_) => None,
        })
    }

    pub fn contains(&self, table: &SymbolTable, v: Valuation, target: Valuation) -> Result<bool, FormulaError> {
        match self {
            EffectDesc::Any => Ok(true),
            EffectDesc::ConstrainedBy(phi) => phi.eval(table, target),
            _ => Ok(self.successor(table, v)? == Some(target)),
        }
    }

    /// Membership of a partially assigned target valuation.
    pub fn contains_partial(&self, table: &SymbolTable, v: Valuation, target: &Partial) -> Tri {
        match self {
            EffectDesc::Any => Some(true),
            EffectDesc::ConstrainedBy(phi) => phi.eval_partial(table, target),
            _ => match self.successor(table, v) {
                Ok(Some(w)) => {
                    if (w.0 ^ target.bits) & target.assigned != 0 {
                        Some(false)
                    } else if target.assigned.count_ones() as usize >= table.len() {
                        Some(true)
                    } else {
                        None
                    }
                }
                _ => Some(false),
            },
        }
    }

    pub fn symbols(&self) -> Vec<Name> {
        match self {
            EffectDesc::Any | EffectDesc::Keep => Vec::new(),
            EffectDesc::SetTrue(s) | EffectDesc::SetFalse(s) => s.clone(),
            EffectDesc::ConstrainedBy(phi) => phi.symbols(),
        }
    }
}

impl fmt::Display for EffectDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |s: &Vec<Name>| s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        match self {
            EffectDesc::Any => f.write_str("any"),
            EffectDesc::Keep => f.write_str("keep"),
            EffectDesc::SetTrue(s) => write!(f, "set({})", join(s)),
            EffectDesc::SetFalse(s) => write!(f, "unset({})", join(s)),
            EffectDesc::ConstrainedBy(phi) => write!(f, "where({phi})"),
        }
    }
}

/// Matches actions by shape, and by datum when one is given.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ActionPattern {
    pub shape: Shape,
    pub datum: Option<Name>,
}

impl ActionPattern {
    pub fn matches(&self, a: &Action) -> bool {
        self.shape.channel == a.channel
            && self.shape.sends == a.sends
            && self.shape.receives == a.receives
            && (self.datum.is_none() || self.datum == a.datum)
    }
}

impl fmt::Display for ActionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.shape)?;
        if let Some(d) = &self.datum {
            write!(f, "({d})")?;
        }
        Ok(())
    }
}

/// First matching rule wins; actions matching no rule use `default`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EffectSpec {
    pub rules: Vec<(ActionPattern, EffectDesc)>,
    pub default: EffectDesc,
}

impl Default for EffectSpec {
    fn default() -> Self {
        EffectSpec::uniform(EffectDesc::Any)
    }
}

impl EffectSpec {
    pub fn uniform(desc: EffectDesc) -> Self {
        EffectSpec {
            rules: Vec::new(),
            default: desc,
        }
    }

    pub fn rule(mut self, pattern: ActionPattern, desc: EffectDesc) -> Self {
        self.rules.push((pattern, desc));
        self
    }

    pub fn resolve(&self, a: &Action) -> &EffectDesc {
        self.rules
            .iter()
            .find(|(p, _)| p.matches(a))
            .map(|(_, d)| d)
            .unwrap_or(&self.default)
    }

    pub fn symbols(&self) -> Vec<Name> {
        let mut out: Vec<Name> = Vec::new();
        for d in self.rules.iter().map(|(_, d)| d).chain(std::iter::once(&self.default)) {
            for s in d.symbols() {
                if !out.contains(&s) {
                    out.push(s);
                }
            }
        }
        out
    }
}
