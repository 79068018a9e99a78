//! State-based operational semantics: terms paired with valuations, the
//! consistency predicate, valuation-aware transitions and LTS construction.
//!
//! Successor valuations are never enumerated blindly. A derivation collects
//! the constraints its target valuation must meet (effect membership and
//! consistency of the surrounding context) and the admissible valuations are
//! then found by a backtracking search that prunes with three-valued
//! evaluation of those constraints.

use std::collections::{HashMap, VecDeque};
use std::rc::Rc;
use std::sync::Arc;

use crate::action::{blocks, Action};
use crate::effect::{EffectDesc, EffectSpec};
use crate::event::{normalize, SemanticsError};
use crate::formula::{tri_and2, tri_or2, Formula, FormulaError, Partial, SymbolTable, Tri, Valuation};
use crate::lts::{Lts, LtsState};
use crate::term::Term;

/// Largest symbol set for which the effect inclusion check enumerates
/// valuation pairs.
pub const MAX_WELLDEFINED_SYMBOLS: usize = 20;

/// Consistency and termination of `t` under a (partial) valuation.
fn cons_term(t: &Term, table: &SymbolTable, pv: &Partial) -> (Tri, Tri) {
    match t {
        Term::Deadlock | Term::Prefix(..) => (Some(true), Some(false)),
        Term::Empty => (Some(true), Some(true)),
        Term::Inaccessible | Term::Ref(_) => (Some(false), Some(false)),
        Term::Alt(p, q) => {
            let (cp, tp) = cons_term(p, table, pv);
            let (cq, tq) = cons_term(q, table, pv);
            (tri_and2(cp, cq), tri_or2(tri_and2(tp, cq), tri_and2(tq, cp)))
        }
        Term::Seq(p, q) => {
            let (cp, tp) = cons_term(p, table, pv);
            let (cq, tq) = cons_term(q, table, pv);
            let cons = tri_or2(tri_and2(tp, cq), tri_and2(cp, tp.map(|b| !b)));
            (cons, tri_and2(tp, tq))
        }
        Term::Par(p, q) => {
            let (cp, tp) = cons_term(p, table, pv);
            let (cq, tq) = cons_term(q, table, pv);
            (tri_and2(cp, cq), tri_and2(tp, tq))
        }
        Term::Star(p) => {
            let (cp, _) = cons_term(p, table, pv);
            (cp, cp)
        }
        Term::Encap(_, p) => cons_term(p, table, pv),
        Term::Guard(phi, p) => {
            let g = phi.eval_partial(table, pv);
            let (cp, tp) = cons_term(p, table, pv);
            (tri_or2(g.map(|b| !b), tri_and2(g, cp)), tri_and2(g, tp))
        }
        Term::Emit(phi, p) => {
            let g = phi.eval_partial(table, pv);
            let (cp, tp) = cons_term(p, table, pv);
            (tri_and2(g, cp), tri_and2(g, tp))
        }
    }
}

fn exact(t: &Term, table: &SymbolTable, v: Valuation) -> (bool, bool) {
    let (c, f) = cons_term(t, table, &Partial::total(v, table.len()));
    (c.unwrap_or(false), f.unwrap_or(false))
}

/// Checks that every symbol the term mentions is in the table and that no
/// references remain.
pub fn validate_term(t: &Term, table: &SymbolTable) -> Result<(), SemanticsError> {
    if let Some(n) = t.references().first() {
        return Err(SemanticsError::UnresolvedReference(n.clone()));
    }
    for phi in t.formulas() {
        validate_formula(phi, table)?;
    }
    Ok(())
}

pub fn validate_formula(phi: &Formula, table: &SymbolTable) -> Result<(), FormulaError> {
    for s in phi.symbols() {
        table.lookup(&s)?;
    }
    if let Formula::OneOf(s) = phi {
        if s.is_empty() {
            return Err(FormulaError::EmptyOneOf);
        }
    }
    Ok(())
}

fn validate_effect(eff: &EffectSpec, table: &SymbolTable) -> Result<(), FormulaError> {
    for s in eff.symbols() {
        table.lookup(&s)?;
    }
    Ok(())
}

/// The consistency predicate `⟨t, v⟩ ↘`.
pub fn consistent(t: &Term, table: &SymbolTable, v: Valuation) -> Result<bool, SemanticsError> {
    validate_term(t, table)?;
    Ok(exact(t, table, v).0)
}

/// Successful termination `⟨t, v⟩ ↓`.
pub fn sb_terminates(t: &Term, table: &SymbolTable, v: Valuation) -> Result<bool, SemanticsError> {
    validate_term(t, table)?;
    Ok(exact(t, table, v).1)
}

#[derive(Clone, Debug)]
enum Cond {
    /// Target valuation is in `effect(a, v)` for the source valuation `v`.
    Effect(Action),
    Consistent(Term),
    Holds(Formula),
}

struct Pending {
    action: Action,
    target: Term,
    conds: Vec<Cond>,
}

struct Solver<'a> {
    table: &'a SymbolTable,
    effect: &'a EffectSpec,
    source: Valuation,
}

impl Solver<'_> {
    fn eval(&self, c: &Cond, pv: &Partial) -> Tri {
        match c {
            Cond::Effect(a) => self.effect.resolve(a).contains_partial(self.table, self.source, pv),
            Cond::Consistent(t) => cons_term(t, self.table, pv).0,
            Cond::Holds(phi) => phi.eval_partial(self.table, pv),
        }
    }

    /// Valuations satisfying all conditions, ascending; stops after `limit`.
    fn solutions(&self, conds: &[Cond], limit: usize) -> Vec<Valuation> {
        let mut out = Vec::new();
        self.search(conds, Partial::default(), 0, limit, &mut out);
        out
    }

    fn search(&self, conds: &[Cond], pv: Partial, depth: usize, limit: usize, out: &mut Vec<Valuation>) {
        if out.len() >= limit {
            return;
        }
        let mut all_true = true;
        for c in conds {
            match self.eval(c, &pv) {
                Some(false) => return,
                Some(true) => {}
                None => all_true = false,
            }
        }
        let n = self.table.len();
        if depth == n {
            debug_assert!(all_true);
            out.push(Valuation(pv.bits));
            return;
        }
        if all_true {
            // Every completion works; list them without further checks.
            let free = n - depth;
            for rest in 0..(1u64 << free) {
                if out.len() >= limit {
                    return;
                }
                out.push(Valuation(pv.bits | rest << depth));
            }
            return;
        }
        self.search(conds, pv.assign(depth, false), depth + 1, limit, out);
        self.search(conds, pv.assign(depth, true), depth + 1, limit, out);
    }

    fn satisfiable(&self, conds: &[Cond]) -> bool {
        !self.solutions(conds, 1).is_empty()
    }

    fn holds_now(&self, t: &Term) -> (bool, bool) {
        exact(t, self.table, self.source)
    }

    fn derive(&self, t: &Term) -> Vec<Pending> {
        let mut out = Vec::new();
        self.derive_into(t, &mut out);
        out
    }

    fn derive_into(&self, t: &Term, out: &mut Vec<Pending>) {
        match t {
            Term::Deadlock | Term::Empty | Term::Inaccessible | Term::Ref(_) => {}
            Term::Prefix(a, p) => out.push(Pending {
                action: a.clone(),
                target: (**p).clone(),
                conds: vec![Cond::Effect(a.clone()), Cond::Consistent((**p).clone())],
            }),
            Term::Alt(p, q) => {
                if self.holds_now(q).0 {
                    self.derive_into(p, out);
                }
                if self.holds_now(p).0 {
                    self.derive_into(q, out);
                }
            }
            Term::Seq(p, q) => {
                for mut d in self.derive(p) {
                    d.target = Term::Seq(Arc::new(d.target), q.clone());
                    d.conds.push(Cond::Consistent(d.target.clone()));
                    out.push(d);
                }
                if self.holds_now(p).1 {
                    self.derive_into(q, out);
                }
            }
            Term::Star(p) => {
                for mut d in self.derive(p) {
                    d.target = Term::Seq(Arc::new(d.target), Arc::new(t.clone()));
                    d.conds.push(Cond::Consistent(d.target.clone()));
                    out.push(d);
                }
            }
            Term::Par(p, q) => {
                let left = self.derive(p);
                let right = self.derive(q);
                if self.holds_now(q).0 {
                    for d in &left {
                        let mut conds = d.conds.clone();
                        conds.push(Cond::Consistent((**q).clone()));
                        out.push(Pending {
                            action: d.action.clone(),
                            target: Term::Par(Arc::new(d.target.clone()), q.clone()),
                            conds,
                        });
                    }
                }
                if self.holds_now(p).0 {
                    for d in &right {
                        let mut conds = d.conds.clone();
                        conds.push(Cond::Consistent((**p).clone()));
                        out.push(Pending {
                            action: d.action.clone(),
                            target: Term::Par(p.clone(), Arc::new(d.target.clone())),
                            conds,
                        });
                    }
                }
                let mut sat_left: Vec<Option<bool>> = vec![None; left.len()];
                let mut sat_right: Vec<Option<bool>> = vec![None; right.len()];
                for (i, l) in left.iter().enumerate() {
                    for (j, r) in right.iter().enumerate() {
                        let Some(merged) = l.action.merge(&r.action) else { continue };
                        let ok_l = *sat_left[i].get_or_insert_with(|| self.satisfiable(&l.conds));
                        let ok_r = *sat_right[j].get_or_insert_with(|| self.satisfiable(&r.conds));
                        if !(ok_l && ok_r) {
                            continue;
                        }
                        let target = Term::par(l.target.clone(), r.target.clone());
                        out.push(Pending {
                            action: merged.clone(),
                            conds: vec![Cond::Effect(merged), Cond::Consistent(target.clone())],
                            target,
                        });
                    }
                }
            }
            Term::Encap(set, p) => {
                for mut d in self.derive(p) {
                    if !blocks(set, &d.action) {
                        d.target = Term::Encap(set.clone(), Arc::new(d.target));
                        out.push(d);
                    }
                }
            }
            Term::Guard(phi, p) | Term::Emit(phi, p) => {
                if phi.eval(self.table, self.source).unwrap_or(false) {
                    self.derive_into(p, out);
                }
            }
        }
    }
}

/// All transitions `⟨t, v⟩ -a-> ⟨t', v'⟩`, in derivation order with target
/// valuations ascending. Targets are not normalized.
pub fn sb_step(
    t: &Term,
    table: &SymbolTable,
    v: Valuation,
    eff: &EffectSpec,
) -> Result<Vec<(Action, Term, Valuation)>, SemanticsError> {
    validate_term(t, table)?;
    validate_effect(eff, table)?;
    Ok(sb_step_unchecked(t, table, v, eff))
}

fn sb_step_unchecked(t: &Term, table: &SymbolTable, v: Valuation, eff: &EffectSpec) -> Vec<(Action, Term, Valuation)> {
    let solver = Solver { table, effect: eff, source: v };
    let mut out = Vec::new();
    for d in solver.derive(t) {
        for w in solver.solutions(&d.conds, usize::MAX) {
            out.push((d.action.clone(), d.target.clone(), w));
        }
    }
    out
}

/// Breadth-first construction of the reachable state-based LTS. Initial
/// states are `⟨normalize(t), v⟩` for every `v ⊨ init` at which the term is
/// consistent.
pub fn build_sb_lts(
    t: &Term,
    table: &Arc<SymbolTable>,
    eff: &EffectSpec,
    init: &Formula,
    max_states: usize,
) -> Result<Lts, SemanticsError> {
    validate_term(t, table)?;
    validate_effect(eff, table)?;
    validate_formula(init, table)?;
    let start = normalize(t);
    let solver = Solver { table, effect: eff, source: Valuation(0) };
    let initial = solver.solutions(
        &[Cond::Holds(init.clone()), Cond::Consistent(start.clone())],
        max_states.saturating_add(1),
    );
    if initial.is_empty() {
        return Err(SemanticsError::NoConsistentInitial);
    }
    let mut lts = Lts::new();
    lts.symbols = Some(table.clone());
    lts.stats.state_based = true;
    let mut index: HashMap<(Rc<Term>, Valuation), usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let shared_start = Rc::new(start);
    for v in initial {
        if lts.len() >= max_states {
            return Err(SemanticsError::BudgetExceeded { limit: max_states, frontier: (*shared_start).clone() });
        }
        let (_, fin) = exact(&shared_start, table, v);
        let id = lts.add_state(LtsState { term: Some((*shared_start).clone()), valuation: Some(v) }, fin);
        lts.add_initial(id);
        index.insert((shared_start.clone(), v), id);
        queue.push_back(id);
    }
    while let Some(s) = queue.pop_front() {
        let term = lts.states[s].term.clone().expect("built states carry terms");
        let v = lts.states[s].valuation.expect("state-based states carry valuations");
        for (a, target, w) in sb_step_unchecked(&term, table, v, eff) {
            let target = Rc::new(normalize(&target));
            let key = (target, w);
            let id = match index.get(&key) {
                Some(&id) => id,
                None => {
                    if lts.len() >= max_states {
                        return Err(SemanticsError::BudgetExceeded { limit: max_states, frontier: (*key.0).clone() });
                    }
                    let (cons, fin) = exact(&key.0, table, w);
                    assert!(cons, "inconsistent target state {} at {}", key.0, table.fmt_valuation(w));
                    let id = lts.add_state(LtsState { term: Some((*key.0).clone()), valuation: Some(w) }, fin);
                    index.insert(key, id);
                    queue.push_back(id);
                    id
                }
            };
            lts.add_transition(s, a, id);
        }
    }
    Ok(lts)
}

/// A merged action whose effect is not included in the sequential
/// composition of its parts' effects.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EffectViolation {
    pub merged: Action,
    pub first: Action,
    pub second: Action,
    pub valuation: Valuation,
}

#[derive(Clone)]
enum VSet {
    One(Valuation),
    Many(usize),
}

struct SetCache<'a> {
    table: &'a SymbolTable,
    sets: Vec<Vec<u64>>,
    fixed: HashMap<EffectDesc, usize>,
    images: HashMap<(usize, Action), usize>,
    subset: HashMap<(usize, usize), bool>,
}

impl<'a> SetCache<'a> {
    fn words(&self) -> usize {
        ((1usize << self.table.len()) + 63) / 64
    }

    fn intern(&mut self, bits: Vec<u64>) -> usize {
        self.sets.push(bits);
        self.sets.len() - 1
    }

    fn effect(&mut self, desc: &EffectDesc, v: Valuation) -> Result<VSet, FormulaError> {
        if let Some(w) = desc.successor(self.table, v)? {
            return Ok(VSet::One(w));
        }
        if let Some(&id) = self.fixed.get(desc) {
            return Ok(VSet::Many(id));
        }
        let mut bits = vec![0u64; self.words()];
        for w in self.table.all_valuations() {
            if desc.contains(self.table, v, w)? {
                bits[(w.0 / 64) as usize] |= 1 << (w.0 % 64);
            }
        }
        let id = self.intern(bits);
        self.fixed.insert(desc.clone(), id);
        Ok(VSet::Many(id))
    }

    /// `effect(a, S)` as the union over members of `S`.
    fn image(&mut self, eff: &EffectSpec, a: &Action, set: &VSet) -> Result<VSet, FormulaError> {
        let desc = eff.resolve(a).clone();
        match set {
            VSet::One(w) => self.effect(&desc, *w),
            VSet::Many(id) => {
                if let Some(&img) = self.images.get(&(*id, a.clone())) {
                    return Ok(VSet::Many(img));
                }
                let members: Vec<Valuation> = self.members(*id);
                let mut bits = vec![0u64; self.words()];
                for w in members {
                    match self.effect(&desc, w)? {
                        VSet::One(x) => bits[(x.0 / 64) as usize] |= 1 << (x.0 % 64),
                        VSet::Many(other) => {
                            for (b, o) in bits.iter_mut().zip(&self.sets[other]) {
                                *b |= o;
                            }
                        }
                    }
                }
                let img = self.intern(bits);
                self.images.insert((*id, a.clone()), img);
                Ok(VSet::Many(img))
            }
        }
    }

    fn members(&self, id: usize) -> Vec<Valuation> {
        let bits = &self.sets[id];
        self.table
            .all_valuations()
            .filter(|w| bits[(w.0 / 64) as usize] >> (w.0 % 64) & 1 == 1)
            .collect()
    }

    fn contains(&self, id: usize, w: Valuation) -> bool {
        self.sets[id][(w.0 / 64) as usize] >> (w.0 % 64) & 1 == 1
    }

    fn is_subset(&mut self, a: &VSet, b: &VSet) -> bool {
        match (a, b) {
            (VSet::One(x), VSet::One(y)) => x == y,
            (VSet::One(x), VSet::Many(j)) => self.contains(*j, *x),
            (VSet::Many(i), VSet::One(y)) => self.members(*i).iter().all(|w| w == y),
            (VSet::Many(i), VSet::Many(j)) => {
                if let Some(&r) = self.subset.get(&(*i, *j)) {
                    return r;
                }
                let r = self.sets[*i].iter().zip(&self.sets[*j]).all(|(x, y)| x & !y == 0);
                self.subset.insert((*i, *j), r);
                r
            }
        }
    }
}

/// Checks `effect(merged, v) ⊆ effect(b, effect(a, v)) ∩ effect(a, effect(b, v))`
/// for every split of every multi-party action in `actions` into two
/// communicating parts, and every valuation.
pub fn check_effect_welldefined(
    eff: &EffectSpec,
    actions: &[Action],
    table: &SymbolTable,
) -> Result<Option<EffectViolation>, SemanticsError> {
    if table.len() > MAX_WELLDEFINED_SYMBOLS {
        return Err(SemanticsError::Other(format!(
            "effect check needs at most {MAX_WELLDEFINED_SYMBOLS} symbols, model has {}",
            table.len()
        )));
    }
    validate_effect(eff, table)?;
    let mut cache = SetCache {
        table,
        sets: Vec::new(),
        fixed: HashMap::new(),
        images: HashMap::new(),
        subset: HashMap::new(),
    };
    for merged in actions {
        for (first, second) in splits(merged) {
            for v in table.all_valuations() {
                let lhs = cache.effect(eff.resolve(merged), v)?;
                let after_first = cache.effect(eff.resolve(&first), v)?;
                let one_way = cache.image(eff, &second, &after_first)?;
                let after_second = cache.effect(eff.resolve(&second), v)?;
                let other_way = cache.image(eff, &first, &after_second)?;
                if !cache.is_subset(&lhs, &one_way) || !cache.is_subset(&lhs, &other_way) {
                    return Ok(Some(EffectViolation {
                        merged: merged.clone(),
                        first,
                        second,
                        valuation: v,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Ordered pairs of communicating actions whose merge is `a`.
pub fn splits(a: &Action) -> Vec<(Action, Action)> {
    let mut out = Vec::new();
    for l in 0..=a.sends {
        for k in 0..=a.receives {
            let (m, n) = (a.sends - l, a.receives - k);
            if l + k > 0 && m + n > 0 {
                let first = Action { sends: l, receives: k, ..a.clone() };
                let second = Action { sends: m, receives: n, ..a.clone() };
                out.push((first, second));
            }
        }
    }
    out
}
