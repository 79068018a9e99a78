//! Propositional formulas over signal symbols and their valuations.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::action::Name;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    False,
    True,
    Symbol(Name),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    /// Exactly one of the listed symbols holds.
    OneOf(Vec<Name>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("unknown propositional symbol `{0}`")]
    UnknownSymbol(Name),
    #[error("oneof over an empty symbol set")]
    EmptyOneOf,
    #[error("too many propositional symbols ({0}); at most {max} are supported", max = MAX_SYMBOLS)]
    TooManySymbols(usize),
}

pub const MAX_SYMBOLS: usize = 64;

#[allow(clippy::should_implement_trait)]
impl Formula {
    pub fn sym(s: &str) -> Formula {
        Formula::Symbol(crate::action::name(s))
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    /// Symbols in order of first occurrence.
    pub fn symbols(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.collect_symbols(&mut out);
        out
    }

    pub fn collect_symbols(&self, out: &mut Vec<Name>) {
        match self {
            Formula::False | Formula::True => {}
            Formula::Symbol(s) => {
                if !out.contains(s) {
                    out.push(s.clone());
                }
            }
            Formula::Not(a) => a.collect_symbols(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
            Formula::OneOf(symbols) => {
                for s in symbols {
                    if !out.contains(s) {
                        out.push(s.clone());
                    }
                }
            }
        }
    }

    pub fn eval(&self, table: &SymbolTable, v: Valuation) -> Result<bool, FormulaError> {
        Ok(match self {
            Formula::False => false,
            Formula::True => true,
            Formula::Symbol(s) => v.get(table.lookup(s)?),
            Formula::Not(a) => !a.eval(table, v)?,
            Formula::And(a, b) => a.eval(table, v)? && b.eval(table, v)?,
            Formula::Or(a, b) => a.eval(table, v)? || b.eval(table, v)?,
            Formula::Implies(a, b) => !a.eval(table, v)? || b.eval(table, v)?,
            Formula::OneOf(symbols) => {
                if symbols.is_empty() {
                    return Err(FormulaError::EmptyOneOf);
                }
                let mut count = 0;
                for s in symbols {
                    if v.get(table.lookup(s)?) {
                        count += 1;
                    }
                }
                count == 1
            }
        })
    }

    /// Kleene three-valued evaluation under a partial assignment; `None`
    /// means the value depends on unassigned symbols. Unknown symbols are
    /// treated as unassigned.
    pub fn eval_partial(&self, table: &SymbolTable, pv: &Partial) -> Tri {
        match self {
            Formula::False => Some(false),
            Formula::True => Some(true),
            Formula::Symbol(s) => table.index_of(s).and_then(|i| pv.get(i)),
            Formula::Not(a) => a.eval_partial(table, pv).map(|b| !b),
            Formula::And(a, b) => tri_and(a.eval_partial(table, pv), || b.eval_partial(table, pv)),
            Formula::Or(a, b) => tri_or(a.eval_partial(table, pv), || b.eval_partial(table, pv)),
            Formula::Implies(a, b) => {
                tri_or(a.eval_partial(table, pv).map(|x| !x), || b.eval_partial(table, pv))
            }
            Formula::OneOf(symbols) => {
                let mut trues = 0;
                let mut unknown = 0;
                for s in symbols {
                    match table.index_of(s).and_then(|i| pv.get(i)) {
                        Some(true) => trues += 1,
                        Some(false) => {}
                        None => unknown += 1,
                    }
                }
                if trues > 1 {
                    Some(false)
                } else if unknown == 0 {
                    Some(trues == 1)
                } else {
                    None
                }
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Implies(..) => 0,
            Formula::Or(..) => 1,
            Formula::And(..) => 2,
            Formula::Not(..) => 3,
            _ => 4,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, level: u8) -> fmt::Result {
        let prec = self.precedence();
        if prec < level {
            f.write_str("(")?;
        }
        match self {
            Formula::False => f.write_str("false")?,
            Formula::True => f.write_str("true")?,
            Formula::Symbol(s) => f.write_str(s)?,
            Formula::Not(a) => {
                f.write_str("~")?;
                a.fmt_at(f, 3)?;
            }
            // `=>` is right-associative, `&` and `|` left-associative.
            Formula::Implies(a, b) => {
                a.fmt_at(f, 1)?;
                f.write_str(" => ")?;
                b.fmt_at(f, 0)?;
            }
            Formula::Or(a, b) => {
                a.fmt_at(f, 1)?;
                f.write_str(" | ")?;
                b.fmt_at(f, 2)?;
            }
            Formula::And(a, b) => {
                a.fmt_at(f, 2)?;
                f.write_str(" & ")?;
                b.fmt_at(f, 3)?;
            }
            Formula::OneOf(symbols) => {
                let names: Vec<&str> = symbols.iter().map(|s| &**s).collect();
                write!(f, "oneof({{{}}})", names.join(", "))?;
            }
        }
        if prec < level {
            f.write_str(")")?;
        }
        Ok(())
    }

    /// True when printing needs no surrounding parentheses in a term context.
    pub fn is_atomic(&self) -> bool {
        self.precedence() == 4
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

/// `⊕ S`: the disjunction over `P ∈ S` of `P` conjoined with the negation of
/// every other member.
pub fn expand_oneof(symbols: &[Name]) -> Result<Formula, FormulaError> {
    if symbols.is_empty() {
        return Err(FormulaError::EmptyOneOf);
    }
    let mut disjuncts = symbols.iter().map(|p| {
        symbols
            .iter()
            .filter(|q| *q != p)
            .fold(Formula::Symbol(p.clone()), |acc, q| {
                Formula::and(acc, Formula::not(Formula::Symbol(q.clone())))
            })
    });
    let first = disjuncts.next().expect("nonempty");
    Ok(disjuncts.fold(first, Formula::or))
}

pub type Tri = Option<bool>;

fn tri_and(a: Tri, b: impl FnOnce() -> Tri) -> Tri {
    match a {
        Some(false) => Some(false),
        Some(true) => b(),
        None => match b() {
            Some(false) => Some(false),
            _ => None,
        },
    }
}

fn tri_or(a: Tri, b: impl FnOnce() -> Tri) -> Tri {
    match a {
        Some(true) => Some(true),
        Some(false) => b(),
        None => match b() {
            Some(true) => Some(true),
            _ => None,
        },
    }
}

pub fn tri_and2(a: Tri, b: Tri) -> Tri {
    tri_and(a, || b)
}

pub fn tri_or2(a: Tri, b: Tri) -> Tri {
    tri_or(a, || b)
}

/// Ordered set of propositional symbols; position `i` is bit `i` of a
/// [`Valuation`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolTable {
    names: Vec<Name>,
    index: HashMap<Name, usize>,
}

impl SymbolTable {
    pub fn new<I: IntoIterator<Item = Name>>(symbols: I) -> Result<Self, FormulaError> {
        let mut table = SymbolTable::default();
        for s in symbols {
            table.insert(s)?;
        }
        Ok(table)
    }

    pub fn insert(&mut self, s: Name) -> Result<usize, FormulaError> {
        if let Some(&i) = self.index.get(&s) {
            return Ok(i);
        }
        if self.names.len() == MAX_SYMBOLS {
            return Err(FormulaError::TooManySymbols(self.names.len() + 1));
        }
        self.index.insert(s.clone(), self.names.len());
        self.names.push(s);
        Ok(self.names.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[Name] {
        &self.names
    }

    pub fn index_of(&self, s: &str) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn lookup(&self, s: &Name) -> Result<usize, FormulaError> {
        self.index_of(s)
            .ok_or_else(|| FormulaError::UnknownSymbol(s.clone()))
    }

    /// Every valuation over this table, in increasing bit order.
    pub fn all_valuations(&self) -> impl Iterator<Item = Valuation> {
        let n = self.len();
        assert!(n < 64, "valuation space too large to enumerate");
        (0..(1u64 << n)).map(Valuation)
    }

    pub fn true_symbols(&self, v: Valuation) -> Vec<Name> {
        self.names
            .iter()
            .enumerate()
            .filter(|(i, _)| v.get(*i))
            .map(|(_, s)| s.clone())
            .collect()
    }

    pub fn fmt_valuation(&self, v: Valuation) -> String {
        let names: Vec<String> = self.true_symbols(v).iter().map(|s| s.to_string()).collect();
        format!("{{{}}}", names.join(", "))
    }
}

/// Total truth assignment over a [`SymbolTable`], stored as a bit set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Valuation(pub u64);

impl Valuation {
    pub fn get(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn with(self, i: usize, value: bool) -> Valuation {
        if value {
            Valuation(self.0 | 1 << i)
        } else {
            Valuation(self.0 & !(1 << i))
        }
    }

    pub fn from_true(table: &SymbolTable, symbols: &[&str]) -> Result<Valuation, FormulaError> {
        let mut v = Valuation(0);
        for s in symbols {
            let i = table.lookup(&crate::action::name(s))?;
            v = v.with(i, true);
        }
        Ok(v)
    }
}

/// Partial assignment built up during valuation enumeration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Partial {
    pub bits: u64,
    pub assigned: u64,
}

impl Partial {
    pub fn get(&self, i: usize) -> Tri {
        if self.assigned >> i & 1 == 1 {
            Some(self.bits >> i & 1 == 1)
        } else {
            None
        }
    }

    pub fn assign(self, i: usize, value: bool) -> Partial {
        Partial {
            bits: if value { self.bits | 1 << i } else { self.bits & !(1 << i) },
            assigned: self.assigned | 1 << i,
        }
    }

    pub fn total(v: Valuation, len: usize) -> Partial {
        Partial {
            bits: v.0,
            assigned: if len >= 64 { u64::MAX } else { (1 << len) - 1 },
        }
    }
}
