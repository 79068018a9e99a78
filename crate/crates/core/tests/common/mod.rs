//! Independent reference implementations used as test oracles, plus seeded
//! random generators. Nothing here calls into the semantics or the checkers
//! of the library; only its data types are shared.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use pact_core::action::{Action, EncapSet, Shape};
use pact_core::effect::{EffectDesc, EffectSpec};
use pact_core::formula::{Formula, SymbolTable, Valuation};
use pact_core::lts::{Lts, LtsState};
use pact_core::term::Term;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Random terms and formulas

pub struct TermGen {
    pub channels: Vec<&'static str>,
    pub data: Vec<Option<&'static str>>,
    pub symbols: Vec<&'static str>,
    pub state_based: bool,
    /// Whether leaves may be `bot`.
    pub bottom: bool,
}

impl TermGen {
    pub fn event(channels: usize, data: usize) -> Self {
        let mut d = vec![None];
        d.extend(["x", "y"].iter().take(data).map(|s| Some(*s)));
        TermGen { channels: ["c", "e"][..channels].to_vec(), data: d, symbols: Vec::new(), state_based: false, bottom: false }
    }

    pub fn state(channels: usize, data: usize, symbols: usize) -> Self {
        let mut g = Self::event(channels, data);
        g.symbols = ["P", "Q", "R"][..symbols].to_vec();
        g.state_based = true;
        g.bottom = true;
        g
    }

    pub fn table(&self) -> Arc<SymbolTable> {
        Arc::new(SymbolTable::new(self.symbols.iter().map(|s| pact_core::action::name(s))).unwrap())
    }

    pub fn action(&self, rng: &mut StdRng) -> Action {
        let c = self.channels.choose(rng).unwrap();
        let (s, r) = [(0, 0), (1, 0), (0, 1), (1, 1)][rng.gen_range(0..4)];
        Action::new(c, s, r, *self.data.choose(rng).unwrap())
    }

    pub fn shape(&self, rng: &mut StdRng) -> Shape {
        let c = self.channels.choose(rng).unwrap();
        let (s, r) = [(0, 0), (1, 0), (0, 1), (1, 1), (2, 0)][rng.gen_range(0..5)];
        Shape::new(c, s, r)
    }

    pub fn formula(&self, rng: &mut StdRng, depth: usize) -> Formula {
        if depth == 0 || rng.gen_bool(0.4) {
            return match rng.gen_range(0..6) {
                0 => Formula::True,
                1 => Formula::False,
                _ => Formula::sym(self.symbols.choose(rng).unwrap()),
            };
        }
        match rng.gen_range(0..5) {
            0 => Formula::not(self.formula(rng, depth - 1)),
            1 => Formula::and(self.formula(rng, depth - 1), self.formula(rng, depth - 1)),
            2 => Formula::or(self.formula(rng, depth - 1), self.formula(rng, depth - 1)),
            3 => Formula::implies(self.formula(rng, depth - 1), self.formula(rng, depth - 1)),
            _ => {
                let mut s: Vec<_> = self.symbols.iter().map(|s| pact_core::action::name(s)).collect();
                s.shuffle(rng);
                s.truncate(rng.gen_range(1..=self.symbols.len()));
                Formula::OneOf(s)
            }
        }
    }

    pub fn term(&self, rng: &mut StdRng, depth: usize) -> Term {
        if depth == 0 || rng.gen_bool(0.2) {
            return match rng.gen_range(0..10) {
                0 | 1 => Term::Deadlock,
                2..=4 => Term::Empty,
                5 if self.bottom => Term::Inaccessible,
                _ => Term::prefix(self.action(rng), Term::Empty),
            };
        }
        let d = depth - 1;
        let kinds = if self.state_based { 10 } else { 8 };
        match rng.gen_range(0..kinds) {
            0 | 1 => Term::prefix(self.action(rng), self.term(rng, d)),
            2 => Term::seq(self.term(rng, d), self.term(rng, d)),
            3 => Term::alt(self.term(rng, d), self.term(rng, d)),
            4 => Term::par(self.term(rng, d), self.term(rng, d)),
            5 => Term::star(self.term(rng, d)),
            6 => {
                let set: EncapSet = (0..rng.gen_range(1..3)).map(|_| self.shape(rng)).collect();
                Term::encap(set, self.term(rng, d))
            }
            7 => Term::prefix(self.action(rng), self.term(rng, d)),
            8 => Term::guard(self.formula(rng, 2), self.term(rng, d)),
            _ => Term::emit(self.formula(rng, 2), self.term(rng, d)),
        }
    }

    pub fn effect_desc(&self, rng: &mut StdRng) -> EffectDesc {
        let pick = |rng: &mut StdRng| vec![pact_core::action::name(self.symbols.choose(rng).unwrap())];
        match rng.gen_range(0..5) {
            0 => EffectDesc::Any,
            1 => EffectDesc::Keep,
            2 => EffectDesc::SetTrue(pick(rng)),
            3 => EffectDesc::SetFalse(pick(rng)),
            _ => EffectDesc::ConstrainedBy(self.formula(rng, 2)),
        }
    }

    pub fn effect(&self, rng: &mut StdRng) -> EffectSpec {
        let mut spec = EffectSpec::uniform(self.effect_desc(rng));
        for _ in 0..rng.gen_range(0..3) {
            let a = self.action(rng);
            let pattern = pact_core::effect::ActionPattern {
                shape: a.shape(),
                datum: if rng.gen_bool(0.5) { a.datum.clone() } else { None },
            };
            spec = spec.rule(pattern, self.effect_desc(rng));
        }
        spec
    }
}

// ---------------------------------------------------------------------------
// Event semantics, rule by rule

fn merge(a: &Action, b: &Action) -> Option<Action> {
    let communicating = a.sends + a.receives > 0 && b.sends + b.receives > 0;
    (communicating && a.channel == b.channel && a.datum == b.datum).then(|| Action {
        channel: a.channel.clone(),
        sends: a.sends + b.sends,
        receives: a.receives + b.receives,
        datum: a.datum.clone(),
    })
}

fn blocked(set: &EncapSet, a: &Action) -> bool {
    set.iter().any(|s| s.channel == a.channel && s.sends == a.sends && s.receives == a.receives)
}

fn seq(p: Term, q: &Arc<Term>) -> Term {
    Term::Seq(Arc::new(p), q.clone())
}

pub fn terminates1(t: &Term) -> bool {
    match t {
        // 1↓ and p*↓
        Term::Empty | Term::Star(_) => true,
        // p↓, q↓ ⟹ p·q↓ and p‖q↓
        Term::Seq(p, q) | Term::Par(p, q) => terminates1(p) && terminates1(q),
        // p↓ ⟹ (p+q)↓;  q↓ ⟹ (p+q)↓
        Term::Alt(p, q) => terminates1(p) || terminates1(q),
        // p↓ ⟹ ∂E(p)↓
        Term::Encap(_, p) => terminates1(p),
        _ => false,
    }
}

pub fn steps1(t: &Term) -> HashSet<(Action, Term)> {
    let mut out = HashSet::new();
    match t {
        // a.p —a→ p
        Term::Prefix(a, p) => {
            out.insert((a.clone(), (**p).clone()));
        }
        // p —a→ p' ⟹ p* —a→ p'·p*
        Term::Star(p) => {
            for (a, p1) in steps1(p) {
                out.insert((a, Term::Seq(Arc::new(p1), Arc::new(t.clone()))));
            }
        }
        Term::Seq(p, q) => {
            // p↓, q —a→ q' ⟹ p·q —a→ q'
            if terminates1(p) {
                out.extend(steps1(q));
            }
            // p —a→ p' ⟹ p·q —a→ p'·q
            for (a, p1) in steps1(p) {
                out.insert((a, seq(p1, q)));
            }
        }
        // either summand moves
        Term::Alt(p, q) => {
            out.extend(steps1(p));
            out.extend(steps1(q));
        }
        Term::Par(p, q) => {
            let (sp, sq) = (steps1(p), steps1(q));
            for (a, p1) in &sp {
                out.insert((a.clone(), Term::Par(Arc::new(p1.clone()), q.clone())));
            }
            for (a, q1) in &sq {
                out.insert((a.clone(), Term::Par(p.clone(), Arc::new(q1.clone()))));
            }
            // synchronization
            for (a, p1) in &sp {
                for (b, q1) in &sq {
                    if let Some(m) = merge(a, b) {
                        out.insert((m, Term::Par(Arc::new(p1.clone()), Arc::new(q1.clone()))));
                    }
                }
            }
        }
        Term::Encap(e, p) => {
            for (a, p1) in steps1(p) {
                if !blocked(e, &a) {
                    out.insert((a, Term::Encap(e.clone(), Arc::new(p1))));
                }
            }
        }
        _ => {}
    }
    out
}

// ---------------------------------------------------------------------------
// State-based semantics, rule by rule

pub struct Sb<'a> {
    pub table: &'a SymbolTable,
    pub effect: &'a EffectSpec,
}

impl<'a> Sb<'a> {
    fn bit(&self, s: &str) -> usize {
        self.table.index_of(s).expect("known symbol")
    }

    pub fn eval(&self, phi: &Formula, v: Valuation) -> bool {
        let on = |s: &str| v.0 >> self.bit(s) & 1 == 1;
        match phi {
            Formula::True => true,
            Formula::False => false,
            Formula::Symbol(s) => on(s),
            Formula::Not(f) => !self.eval(f, v),
            Formula::And(a, b) => self.eval(a, v) && self.eval(b, v),
            Formula::Or(a, b) => self.eval(a, v) || self.eval(b, v),
            Formula::Implies(a, b) => !self.eval(a, v) || self.eval(b, v),
            Formula::OneOf(s) => s.iter().filter(|s| on(s)).count() == 1,
        }
    }

    pub fn valuations(&self) -> impl Iterator<Item = Valuation> {
        (0..1u64 << self.table.len()).map(Valuation)
    }

    fn desc(&self, a: &Action) -> &EffectDesc {
        for (pat, d) in &self.effect.rules {
            let shape_ok =
                pat.shape.channel == a.channel && pat.shape.sends == a.sends && pat.shape.receives == a.receives;
            if shape_ok && (pat.datum.is_none() || pat.datum == a.datum) {
                return d;
            }
        }
        &self.effect.default
    }

    pub fn effect_of(&self, a: &Action, v: Valuation) -> Vec<Valuation> {
        match self.desc(a) {
            EffectDesc::Any => self.valuations().collect(),
            EffectDesc::Keep => vec![v],
            EffectDesc::SetTrue(s) => vec![Valuation(s.iter().fold(v.0, |w, s| w | 1 << self.bit(s)))],
            EffectDesc::SetFalse(s) => vec![Valuation(s.iter().fold(v.0, |w, s| w & !(1 << self.bit(s))))],
            EffectDesc::ConstrainedBy(phi) => self.valuations().filter(|&w| self.eval(phi, w)).collect(),
        }
    }

    pub fn cons(&self, t: &Term, v: Valuation) -> bool {
        match t {
            Term::Deadlock | Term::Empty | Term::Prefix(..) => true,
            Term::Inaccessible | Term::Ref(_) => false,
            Term::Alt(p, q) | Term::Par(p, q) => self.cons(p, v) && self.cons(q, v),
            Term::Seq(p, q) => {
                (self.fin(p, v) && self.cons(q, v)) || (self.cons(p, v) && !self.fin(p, v))
            }
            Term::Star(p) | Term::Encap(_, p) => self.cons(p, v),
            Term::Guard(phi, p) => !self.eval(phi, v) || self.cons(p, v),
            Term::Emit(phi, p) => self.eval(phi, v) && self.cons(p, v),
        }
    }

    pub fn fin(&self, t: &Term, v: Valuation) -> bool {
        match t {
            Term::Empty => true,
            Term::Star(p) => self.cons(p, v),
            Term::Alt(p, q) => (self.cons(p, v) && self.fin(q, v)) || (self.fin(p, v) && self.cons(q, v)),
            Term::Seq(p, q) | Term::Par(p, q) => self.fin(p, v) && self.fin(q, v),
            Term::Encap(_, p) => self.fin(p, v),
            Term::Guard(phi, p) | Term::Emit(phi, p) => self.fin(p, v) && self.eval(phi, v),
            _ => false,
        }
    }

    pub fn steps(&self, t: &Term, v: Valuation) -> HashSet<(Action, Term, Valuation)> {
        let mut out = HashSet::new();
        match t {
            Term::Prefix(a, p) => {
                for w in self.effect_of(a, v) {
                    if self.cons(p, w) {
                        out.insert((a.clone(), (**p).clone(), w));
                    }
                }
            }
            Term::Alt(p, q) => {
                if self.cons(q, v) {
                    out.extend(self.steps(p, v));
                }
                if self.cons(p, v) {
                    out.extend(self.steps(q, v));
                }
            }
            Term::Seq(p, q) => {
                if self.fin(p, v) {
                    out.extend(self.steps(q, v));
                }
                for (a, p1, w) in self.steps(p, v) {
                    let target = seq(p1, q);
                    if self.cons(&target, w) {
                        out.insert((a, target, w));
                    }
                }
            }
            // The unfolded target must be consistent as well, so that every
            // derived state is consistent.
            Term::Star(p) => {
                for (a, p1, w) in self.steps(p, v) {
                    let target = Term::Seq(Arc::new(p1), Arc::new(t.clone()));
                    if self.cons(&target, w) {
                        out.insert((a, target, w));
                    }
                }
            }
            Term::Par(p, q) => {
                let (sp, sq) = (self.steps(p, v), self.steps(q, v));
                for (a, p1, w) in &sp {
                    if self.cons(q, v) && self.cons(q, *w) {
                        out.insert((a.clone(), Term::Par(Arc::new(p1.clone()), q.clone()), *w));
                    }
                }
                for (a, q1, w) in &sq {
                    if self.cons(p, v) && self.cons(p, *w) {
                        out.insert((a.clone(), Term::Par(p.clone(), Arc::new(q1.clone())), *w));
                    }
                }
                for (a, p1, _) in &sp {
                    for (b, q1, _) in &sq {
                        if let Some(m) = merge(a, b) {
                            let target = Term::Par(Arc::new(p1.clone()), Arc::new(q1.clone()));
                            for w in self.effect_of(&m, v) {
                                if self.cons(&target, w) {
                                    out.insert((m.clone(), target.clone(), w));
                                }
                            }
                        }
                    }
                }
            }
            Term::Encap(e, p) => {
                for (a, p1, w) in self.steps(p, v) {
                    if !blocked(e, &a) {
                        out.insert((a, Term::Encap(e.clone(), Arc::new(p1)), w));
                    }
                }
            }
            Term::Guard(phi, p) | Term::Emit(phi, p) => {
                if self.eval(phi, v) {
                    out.extend(self.steps(p, v));
                }
            }
            _ => {}
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Random LTSs

pub fn actions(names: &[&str]) -> Vec<Action> {
    names.iter().map(|n| Action::event(n, None)).collect()
}

/// A random LTS with one initial state (0).
pub fn random_lts(rng: &mut StdRng, max_states: usize, labels: &[Action], density: f64) -> Lts {
    let n = rng.gen_range(1..=max_states);
    let mut l = Lts::new();
    for _ in 0..n {
        l.add_plain_state(rng.gen_bool(0.3));
    }
    l.add_initial(0);
    for s in 0..n {
        for a in labels {
            for t in 0..n {
                if rng.gen_bool((density / n as f64).min(1.0)) {
                    l.add_transition(s, a.clone(), t);
                }
            }
        }
    }
    l
}

/// Like [`random_lts`], with valuations over `bits` symbols on every state.
pub fn random_sb_lts(rng: &mut StdRng, max_states: usize, labels: &[Action], bits: u32, table: Arc<SymbolTable>) -> Lts {
    let mut l = random_lts(rng, max_states, labels, 1.5);
    for s in &mut l.states {
        *s = LtsState { term: None, valuation: Some(Valuation(rng.gen_range(0..1u64 << bits))) };
    }
    l.symbols = Some(table);
    l
}

fn moves(l: &Lts, s: usize) -> Vec<(&Action, usize)> {
    l.transitions.iter().filter(|t| t.source == s).map(|t| (&t.action, t.target)).collect()
}

// ---------------------------------------------------------------------------
// Behavioral relations

/// Greatest partial bisimulation by brute-force iteration over the full
/// pair matrix. States with valuations are related only when the
/// valuations agree.
pub fn naive_pbisim_matrix(l1: &Lts, l2: &Lts, in_b: &dyn Fn(&Action) -> bool) -> Vec<Vec<bool>> {
    let (n1, n2) = (l1.len(), l2.len());
    let mut r = vec![vec![false; n2]; n1];
    for (s, row) in r.iter_mut().enumerate() {
        for (t, cell) in row.iter_mut().enumerate() {
            let term_ok = !l1.terminating[s] || l2.terminating[t];
            *cell = term_ok && l1.states[s].valuation == l2.states[t].valuation;
        }
    }
    let m1: Vec<_> = (0..n1).map(|s| moves(l1, s)).collect();
    let m2: Vec<_> = (0..n2).map(|t| moves(l2, t)).collect();
    loop {
        let mut changed = false;
        for s in 0..n1 {
            for t in 0..n2 {
                if !r[s][t] {
                    continue;
                }
                let fwd = m1[s].iter().all(|(a, s1)| m2[t].iter().any(|(b, t1)| a == b && r[*s1][*t1]));
                let back = m2[t]
                    .iter()
                    .filter(|(b, _)| in_b(b))
                    .all(|(b, t1)| m1[s].iter().any(|(a, s1)| a == b && r[*s1][*t1]));
                if !(fwd && back) {
                    r[s][t] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return r;
        }
    }
}

fn lift(l1: &Lts, l2: &Lts, r: &[Vec<bool>]) -> bool {
    l1.initial.iter().all(|&i| l2.initial.iter().any(|&j| r[i][j]))
}

pub fn naive_pbisim(l1: &Lts, l2: &Lts, in_b: &dyn Fn(&Action) -> bool) -> bool {
    lift(l1, l2, &naive_pbisim_matrix(l1, l2, in_b))
}

/// Strong simulation (with termination) as a game: the positions the
/// attacker wins are computed as an attractor.
pub fn simulates(l1: &Lts, l2: &Lts) -> bool {
    let (n1, n2) = (l1.len(), l2.len());
    let m1: Vec<_> = (0..n1).map(|s| moves(l1, s)).collect();
    let m2: Vec<_> = (0..n2).map(|t| moves(l2, t)).collect();
    let mut lost = vec![vec![false; n2]; n1];
    for s in 0..n1 {
        for t in 0..n2 {
            lost[s][t] = l1.terminating[s] && !l2.terminating[t];
        }
    }
    // The attacker wins at (s, t) with a challenge s —a→ s' all of whose
    // answers t —a→ t' lead to positions already won. Iterate to a fixpoint.
    let mut grew = true;
    while grew {
        grew = false;
        for s in 0..n1 {
            for t in 0..n2 {
                if lost[s][t] {
                    continue;
                }
                let attack =
                    m1[s].iter().any(|(a, s1)| m2[t].iter().filter(|(b, _)| b == a).all(|(_, t1)| lost[*s1][*t1]));
                if attack {
                    lost[s][t] = true;
                    grew = true;
                }
            }
        }
    }
    let r: Vec<Vec<bool>> = lost.iter().map(|row| row.iter().map(|x| !x).collect()).collect();
    lift(l1, l2, &r)
}

/// Strong bisimilarity by signature partition refinement over the disjoint
/// union of both LTSs; termination and valuation split the initial
/// partition.
pub fn bisimilar(l1: &Lts, l2: &Lts) -> bool {
    let off = l1.len();
    let n = off + l2.len();
    let mut edges: Vec<Vec<(Action, usize)>> = vec![Vec::new(); n];
    for t in &l1.transitions {
        edges[t.source].push((t.action.clone(), t.target));
    }
    for t in &l2.transitions {
        edges[off + t.source].push((t.action.clone(), off + t.target));
    }
    let label = |x: usize| {
        let (l, s) = if x < off { (l1, x) } else { (l2, x - off) };
        (l.terminating[s], l.states[s].valuation)
    };
    let mut first: HashMap<(bool, Option<Valuation>), usize> = HashMap::new();
    let mut block: Vec<usize> = (0..n)
        .map(|x| {
            let k = first.len();
            *first.entry(label(x)).or_insert(k)
        })
        .collect();
    loop {
        let mut ids: HashMap<(usize, Vec<(Action, usize)>), usize> = HashMap::new();
        let next: Vec<usize> = (0..n)
            .map(|x| {
                let mut sig: Vec<(Action, usize)> = edges[x].iter().map(|(a, y)| (a.clone(), block[*y])).collect();
                sig.sort();
                sig.dedup();
                let k = ids.len();
                *ids.entry((block[x], sig)).or_insert(k)
            })
            .collect();
        let before: HashSet<usize> = block.iter().copied().collect();
        if ids.len() == before.len() {
            break;
        }
        block = next;
    }
    let eq = |x: usize, y: usize| block[x] == block[y];
    l1.initial.iter().all(|&i| l2.initial.iter().any(|&j| eq(i, off + j)))
        && l2.initial.iter().all(|&j| l1.initial.iter().any(|&i| eq(i, off + j)))
}

// ---------------------------------------------------------------------------
// Traces

/// Every trace of length at most `depth`.
pub fn traces(l: &Lts, depth: usize) -> HashSet<Vec<Action>> {
    let mut out = HashSet::new();
    let mut frontier: HashSet<(Vec<Action>, usize)> = l.initial.iter().map(|&s| (Vec::new(), s)).collect();
    while !frontier.is_empty() {
        let mut next = HashSet::new();
        for (tr, s) in frontier {
            if tr.len() < depth {
                for (a, t) in moves(l, s) {
                    let mut longer = tr.clone();
                    longer.push(a.clone());
                    next.insert((longer, t));
                }
            }
            out.insert(tr);
        }
        frontier = next;
    }
    out
}

// ---------------------------------------------------------------------------
// Reachable LTSs straight from the oracles, without normalization

pub fn raw_lts(t: &Term, limit: usize) -> Option<Lts> {
    let mut l = Lts::new();
    let mut index: HashMap<Term, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let s0 = l.add_state(LtsState { term: Some(t.clone()), valuation: None }, terminates1(t));
    l.add_initial(s0);
    index.insert(t.clone(), s0);
    queue.push_back(t.clone());
    while let Some(p) = queue.pop_front() {
        let s = index[&p];
        for (a, q) in steps1(&p) {
            let id = match index.get(&q) {
                Some(&id) => id,
                None => {
                    if l.len() >= limit {
                        return None;
                    }
                    let id = l.add_state(LtsState { term: Some(q.clone()), valuation: None }, terminates1(&q));
                    index.insert(q.clone(), id);
                    queue.push_back(q);
                    id
                }
            };
            l.add_transition(s, a, id);
        }
    }
    Some(l)
}

impl<'a> Sb<'a> {
    /// Reachable states from every consistent `⟨t, v⟩`.
    pub fn raw_lts(&self, t: &Term, limit: usize) -> Option<Lts> {
        let mut l = Lts::new();
        let mut index: HashMap<(Term, Valuation), usize> = HashMap::new();
        let mut queue = VecDeque::new();
        for v in self.valuations() {
            if self.cons(t, v) {
                let id = l.add_state(LtsState { term: Some(t.clone()), valuation: Some(v) }, self.fin(t, v));
                l.add_initial(id);
                index.insert((t.clone(), v), id);
                queue.push_back((t.clone(), v));
            }
        }
        while let Some((p, v)) = queue.pop_front() {
            let s = index[&(p.clone(), v)];
            for (a, q, w) in self.steps(&p, v) {
                let key = (q, w);
                let id = match index.get(&key) {
                    Some(&id) => id,
                    None => {
                        if l.len() >= limit {
                            return None;
                        }
                        let st = LtsState { term: Some(key.0.clone()), valuation: Some(w) };
                        let id = l.add_state(st, self.fin(&key.0, w));
                        index.insert(key.clone(), id);
                        queue.push_back(key);
                        id
                    }
                };
                l.add_transition(s, a, id);
            }
        }
        Some(l)
    }
}
