//! Resolved models: declarations checked against each other, references
//! expanded and the symbol table fixed.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use indexmap::IndexMap;
use thiserror::Error;

use crate::action::{Action, ChannelClass, ChannelDecl, EncapSet, Name, Shape};
use crate::dsl::{parse_decls, DeclKind, ParseError, SupervisorMode};
use crate::effect::EffectSpec;
use crate::formula::{Formula, FormulaError, SymbolTable};
use crate::event::{build_lts, SemanticsError};
use crate::grammar::{classify_term, Grammar, GrammarViolation};
use crate::lts::Lts;
use crate::renaming::{apply_renaming, RenamingMap};
use crate::requirements::Requirement;
use crate::supervisory::compose_supervised;
use crate::term::Term;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{line}:{col}: unresolved reference `{name}`")]
    Unresolved { name: Name, line: usize, col: usize },
    #[error("{line}:{col}: cyclic definition through `{name}`")]
    Cycle { name: Name, line: usize, col: usize },
    #[error("{line}:{col}: channel `{name}` declared both controllable and uncontrollable")]
    ClassConflict { name: Name, line: usize, col: usize },
    #[error("{line}:{col}: {violation}")]
    Grammar { line: usize, col: usize, violation: GrammarViolation },
    #[error("{line}:{col}: {message}")]
    Invalid { line: usize, col: usize, message: String },
    #[error("no {kind} named `{name}`")]
    UnknownName { kind: &'static str, name: String },
    #[error("{0}")]
    Ambiguous(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupervisorDecl {
    pub mode: SupervisorMode,
    pub term: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedRequirement {
    pub name: Option<Name>,
    pub requirement: Requirement,
}

impl NamedRequirement {
    pub fn label(&self, index: usize) -> String {
        match &self.name {
            Some(n) => n.to_string(),
            None => format!("#{}", index + 1),
        }
    }
}

/// A parsed model. Terms are kept as written; [`Model::term`] returns them
/// with references expanded.
/// Which plant, supervisor, encapsulation and renaming to use; `None`
/// picks the default declaration.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Selection {
    pub plant: Option<String>,
    pub supervisor: Option<String>,
    pub encap: Option<String>,
    pub rename: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    pub channels: Vec<ChannelDecl>,
    pub data: Vec<Name>,
    pub groups: IndexMap<Name, Vec<Name>>,
    pub symbols: Arc<SymbolTable>,
    pub defs: IndexMap<Name, Term>,
    pub plants: IndexMap<Name, Term>,
    pub supervisors: IndexMap<Name, SupervisorDecl>,
    pub encapsulations: IndexMap<Name, EncapSet>,
    pub renamings: IndexMap<Name, RenamingMap>,
    pub effect: EffectSpec,
    pub init: Formula,
    pub requirements: Vec<NamedRequirement>,
    resolved: IndexMap<Name, Term>,
}

fn invalid(line: usize, col: usize, message: impl Into<String>) -> ModelError {
    ModelError::Invalid { line, col, message: message.into() }
}

/// Parses and resolves a model file.
pub fn parse_model(text: &str) -> Result<Model, ModelError> {
    let decls = parse_decls(text)?;
    let mut channels: Vec<ChannelDecl> = Vec::new();
    let mut data: Vec<Name> = Vec::new();
    let mut groups = IndexMap::new();
    let mut defs = IndexMap::new();
    let mut plants = IndexMap::new();
    let mut supervisors: IndexMap<Name, (Option<SupervisorMode>, Term)> = IndexMap::new();
    let mut encapsulations = IndexMap::new();
    let mut renamings = IndexMap::new();
    let mut effect = EffectSpec::default();
    let mut default_effect_seen = false;
    let mut init: Option<Formula> = None;
    let mut requirements = Vec::new();
    let mut at: HashMap<Name, (usize, usize)> = HashMap::new();

    for d in &decls {
        let (line, col) = (d.line, d.col);
        let mut claim = |n: &Name, what: &str| -> Result<(), ModelError> {
            if at.insert(n.clone(), (line, col)).is_some() {
                return Err(invalid(line, col, format!("{what} `{n}` is already defined")));
            }
            Ok(())
        };
        match &d.kind {
            DeclKind::Channels(class, names) => {
                for n in names {
                    if let Some(prev) = channels.iter().find(|c| &c.name == n) {
                        if prev.class != *class {
                            return Err(ModelError::ClassConflict { name: n.clone(), line, col });
                        }
                        return Err(invalid(line, col, format!("channel `{n}` declared twice")));
                    }
                    channels.push(ChannelDecl { name: n.clone(), class: *class });
                }
            }
            DeclKind::Data(names) => {
                for n in names {
                    if data.contains(n) {
                        return Err(invalid(line, col, format!("data element `{n}` declared twice")));
                    }
                    data.push(n.clone());
                }
            }
            DeclKind::Group(g, members) => {
                groups.insert(g.clone(), members.clone());
            }
            DeclKind::Def(n, t) => {
                claim(n, "process")?;
                defs.insert(n.clone(), t.clone());
            }
            DeclKind::Plant(n, t) => {
                claim(n, "process")?;
                plants.insert(n.clone(), t.clone());
            }
            DeclKind::Supervisor(mode, n, t) => {
                claim(n, "process")?;
                supervisors.insert(n.clone(), (*mode, t.clone()));
            }
            DeclKind::Encap(n, set) => {
                if encapsulations.insert(n.clone(), set.clone()).is_some() {
                    return Err(invalid(line, col, format!("encapsulation `{n}` declared twice")));
                }
            }
            DeclKind::Rename(n, map) => {
                if renamings.insert(n.clone(), map.clone()).is_some() {
                    return Err(invalid(line, col, format!("renaming `{n}` declared twice")));
                }
            }
            DeclKind::Effect(None, desc) => {
                if default_effect_seen {
                    return Err(invalid(line, col, "default effect declared twice"));
                }
                default_effect_seen = true;
                effect.default = desc.clone();
            }
            DeclKind::Effect(Some(p), desc) => effect.rules.push((p.clone(), desc.clone())),
            DeclKind::Init(f) => {
                if init.replace(f.clone()).is_some() {
                    return Err(invalid(line, col, "init declared twice"));
                }
            }
            DeclKind::Req(n, r) => requirements.push(NamedRequirement { name: n.clone(), requirement: r.clone() }),
        }
    }

    let class: HashMap<Name, ChannelClass> = channels.iter().map(|c| (c.name.clone(), c.class)).collect();
    let pos_of = |kind: &dyn Fn(&DeclKind) -> bool| {
        decls.iter().find(|d| kind(&d.kind)).map(|d| (d.line, d.col)).unwrap_or((1, 1))
    };
    let check_shape = |s: &Shape, line: usize, col: usize| -> Result<(), ModelError> {
        if !class.contains_key(&s.channel) {
            return Err(invalid(line, col, format!("undeclared channel `{}`", s.channel)));
        }
        Ok(())
    };
    let check_action = |a: &Action, line: usize, col: usize| -> Result<(), ModelError> {
        check_shape(&a.shape(), line, col)?;
        if let Some(d) = &a.datum {
            if !data.contains(d) {
                return Err(invalid(line, col, format!("undeclared data element `{d}` in `{a}`")));
            }
        }
        Ok(())
    };

    // Expand references.
    let mut bodies: IndexMap<Name, Term> = IndexMap::new();
    for (n, t) in defs.iter().chain(plants.iter()) {
        bodies.insert(n.clone(), t.clone());
    }
    for (n, (_, t)) in &supervisors {
        bodies.insert(n.clone(), t.clone());
    }
    let mut resolved: IndexMap<Name, Term> = IndexMap::new();
    let names: Vec<Name> = bodies.keys().cloned().collect();
    for n in &names {
        let mut stack = Vec::new();
        expand_name(n, &bodies, &at, &mut resolved, &mut stack)?;
    }
    // Keep the declaration order rather than the order of completion.
    let resolved: IndexMap<Name, Term> = names.iter().map(|n| (n.clone(), resolved[n].clone())).collect();

    for (n, t) in &resolved {
        let (line, col) = at[n];
        for a in t.prefix_actions() {
            check_action(&a, line, col)?;
        }
        let mut shapes = Vec::new();
        t.walk(&mut |s| {
            if let Term::Encap(set, _) = s {
                shapes.extend(set.iter().cloned());
            }
        });
        for s in &shapes {
            check_shape(s, line, col)?;
        }
    }
    for (n, set) in &encapsulations {
        let (line, col) = pos_of(&|k| matches!(k, DeclKind::Encap(m, _) if m == n));
        for s in set {
            check_shape(s, line, col)?;
        }
    }
    for (n, map) in &renamings {
        let (line, col) = pos_of(&|k| matches!(k, DeclKind::Rename(m, _) if m == n));
        for (from, to) in &map.map {
            check_shape(from, line, col)?;
            check_shape(to, line, col)?;
            if from.channel != to.channel {
                return Err(invalid(line, col, format!("renaming `{from} -> {to}` changes the channel")));
            }
        }
    }
    for (p, _) in &effect.rules {
        let (line, col) = pos_of(&|k| matches!(k, DeclKind::Effect(Some(q), _) if q == p));
        check_shape(&p.shape, line, col)?;
        if let Some(d) = &p.datum {
            if !data.contains(d) {
                return Err(invalid(line, col, format!("undeclared data element `{d}`")));
            }
        }
    }
    for (i, r) in requirements.iter().enumerate() {
        let (line, col) = decls
            .iter()
            .filter(|d| matches!(d.kind, DeclKind::Req(..)))
            .nth(i)
            .map(|d| (d.line, d.col))
            .unwrap_or((1, 1));
        if let Some(a) = r.requirement.action() {
            check_action(a, line, col)?;
        }
    }

    // Symbols: groups first, then first occurrence in declaration order.
    let mut table = SymbolTable::default();
    let mut add = |s: Name| -> Result<(), ModelError> {
        table.insert(s).map(|_| ()).map_err(|e: FormulaError| invalid(1, 1, e.to_string()))
    };
    for members in groups.values() {
        for s in members {
            add(s.clone())?;
        }
    }
    let written: Vec<&Term> = defs.values().chain(plants.values()).chain(supervisors.values().map(|(_, t)| t)).collect();
    for t in written {
        for phi in t.formulas() {
            for s in phi.symbols() {
                add(s)?;
            }
        }
    }
    for s in effect.symbols() {
        add(s)?;
    }
    let init = init.unwrap_or(Formula::True);
    for s in init.symbols() {
        add(s)?;
    }
    for r in &requirements {
        for s in r.requirement.formula().symbols() {
            add(s)?;
        }
    }

    let class_of = |c: &str| class.get(c).copied();
    for n in plants.keys() {
        let t = &resolved[n];
        let g = if t.is_state_based() { Grammar::PlantState } else { Grammar::PlantEvent };
        let (line, col) = at[n];
        classify_term(t, g, &class_of).map_err(|violation| ModelError::Grammar { line, col, violation })?;
    }
    let mut sups = IndexMap::new();
    for (n, (mode, t)) in &supervisors {
        let body = &resolved[n];
        let mode = mode.unwrap_or(if body.is_state_based() { SupervisorMode::State } else { SupervisorMode::Event });
        let g = match mode {
            SupervisorMode::Event => Grammar::SupervisorEvent,
            SupervisorMode::State => Grammar::SupervisorState,
        };
        let (line, col) = at[n];
        classify_term(body, g, &class_of).map_err(|violation| ModelError::Grammar { line, col, violation })?;
        sups.insert(n.clone(), SupervisorDecl { mode, term: t.clone() });
    }

    Ok(Model {
        channels,
        data,
        groups,
        symbols: Arc::new(table),
        defs,
        plants,
        supervisors: sups,
        encapsulations,
        renamings,
        effect,
        init,
        requirements,
        resolved,
    })
}

fn expand_name(
    n: &Name,
    bodies: &IndexMap<Name, Term>,
    at: &HashMap<Name, (usize, usize)>,
    done: &mut IndexMap<Name, Term>,
    stack: &mut Vec<Name>,
) -> Result<Term, ModelError> {
    if let Some(t) = done.get(n) {
        return Ok(t.clone());
    }
    let (line, col) = at[n];
    if stack.contains(n) {
        return Err(ModelError::Cycle { name: n.clone(), line, col });
    }
    stack.push(n.clone());
    let t = expand_term(&bodies[n], bodies, at, done, stack, (line, col))?;
    stack.pop();
    done.insert(n.clone(), t.clone());
    Ok(t)
}

fn expand_term(
    t: &Term,
    bodies: &IndexMap<Name, Term>,
    at: &HashMap<Name, (usize, usize)>,
    done: &mut IndexMap<Name, Term>,
    stack: &mut Vec<Name>,
    pos: (usize, usize),
) -> Result<Term, ModelError> {
    let mut rec = |p: &Term| expand_term(p, bodies, at, done, stack, pos).map(Arc::new);
    Ok(match t {
        Term::Ref(r) => {
            if !bodies.contains_key(r) {
                return Err(ModelError::Unresolved { name: r.clone(), line: pos.0, col: pos.1 });
            }
            return expand_name(r, bodies, at, done, stack);
        }
        Term::Deadlock | Term::Empty | Term::Inaccessible => t.clone(),
        Term::Prefix(a, p) => Term::Prefix(a.clone(), rec(p)?),
        Term::Seq(p, q) => Term::Seq(rec(p)?, rec(q)?),
        Term::Alt(p, q) => Term::Alt(rec(p)?, rec(q)?),
        Term::Par(p, q) => Term::Par(rec(p)?, rec(q)?),
        Term::Star(p) => Term::Star(rec(p)?),
        Term::Encap(e, p) => Term::Encap(e.clone(), rec(p)?),
        Term::Guard(phi, p) => Term::Guard(phi.clone(), rec(p)?),
        Term::Emit(phi, p) => Term::Emit(phi.clone(), rec(p)?),
    })
}

fn pick<'a, V>(map: &'a IndexMap<Name, V>, wanted: Option<&str>, default: &str, kind: &'static str) -> Result<(&'a Name, &'a V), ModelError> {
    if let Some(w) = wanted {
        return map.get_key_value(w).ok_or_else(|| ModelError::UnknownName { kind, name: w.to_string() });
    }
    if let Some(kv) = map.get_key_value(default) {
        return Ok(kv);
    }
    match map.len() {
        1 => Ok(map.get_index(0).expect("one entry")),
        0 => Err(ModelError::UnknownName { kind, name: default.to_string() }),
        _ => Err(ModelError::Ambiguous(format!(
            "model declares several {kind}s ({}); choose one",
            map.keys().map(|k| k.to_string()).collect::<Vec<_>>().join(", ")
        ))),
    }
}

impl Model {
    pub fn channel_class(&self, c: &str) -> Option<ChannelClass> {
        self.channels.iter().find(|d| &*d.name == c).map(|d| d.class)
    }

    pub fn channels_of(&self, class: ChannelClass) -> BTreeSet<Name> {
        self.channels.iter().filter(|c| c.class == class).map(|c| c.name.clone()).collect()
    }

    pub fn uncontrollable(&self) -> BTreeSet<Name> {
        self.channels_of(ChannelClass::Uncontrollable)
    }

    pub fn controllable(&self) -> BTreeSet<Name> {
        self.channels_of(ChannelClass::Controllable)
    }

    /// A definition, plant or supervisor with references expanded.
    pub fn term(&self, name: &str) -> Result<&Term, ModelError> {
        self.resolved.get(name).ok_or_else(|| ModelError::UnknownName { kind: "process", name: name.to_string() })
    }

    /// The named plant, or the one called `U`, or the only one.
    pub fn plant(&self, wanted: Option<&str>) -> Result<(Name, &Term), ModelError> {
        let (n, _) = pick(&self.plants, wanted, "U", "plant")?;
        Ok((n.clone(), &self.resolved[n]))
    }

    /// The named supervisor, or the one called `S`, or the only one.
    pub fn supervisor(&self, wanted: Option<&str>) -> Result<(Name, &Term, SupervisorMode), ModelError> {
        let (n, d) = pick(&self.supervisors, wanted, "S", "supervisor")?;
        Ok((n.clone(), &self.resolved[n], d.mode))
    }

    pub fn encapsulation(&self, wanted: Option<&str>) -> Result<(Name, &EncapSet), ModelError> {
        let (n, e) = pick(&self.encapsulations, wanted, "E", "encapsulation")?;
        Ok((n.clone(), e))
    }

    pub fn renaming(&self, wanted: Option<&str>) -> Result<(Name, &RenamingMap), ModelError> {
        let (n, r) = pick(&self.renamings, wanted, "xi", "renaming")?;
        Ok((n.clone(), r))
    }

    /// Resolves `plant`, `supervised` (the plant under the supervisor and
    /// encapsulation), `renamed` (the plant under the renaming) or a process name.
    pub fn subject(&self, subject: &str, sel: &Selection) -> Result<Term, ModelError> {
        Ok(match subject {
            "plant" => self.plant(sel.plant.as_deref())?.1.clone(),
            "supervised" => {
                let (_, u) = self.plant(sel.plant.as_deref())?;
                let (_, s, _) = self.supervisor(sel.supervisor.as_deref())?;
                let (_, e) = self.encapsulation(sel.encap.as_deref())?;
                compose_supervised(u, s, e)
            }
            "renamed" => {
                let (_, u) = self.plant(sel.plant.as_deref())?;
                let (_, xi) = self.renaming(sel.rename.as_deref())?;
                apply_renaming(u, xi)
            }
            other => self.term(other)?.clone(),
        })
    }

    /// Whether terms of this model need the state-based semantics.
    pub fn is_state_based(&self) -> bool {
        self.resolved.values().any(Term::is_state_based) || !self.symbols.is_empty()
    }

    /// The reachable LTS of `t` under this model's semantics: state-based
    /// with the model's effect and initial condition when the model has
    /// symbols, event-based otherwise.
    pub fn build(&self, t: &Term, max_states: usize) -> Result<Lts, SemanticsError> {
        if self.is_state_based() {
            crate::state::build_sb_lts(t, &self.symbols, &self.effect, &self.init, max_states)
        } else {
            build_lts(t, max_states)
        }
    }

    /// Every prefix action of some resolved term, in first-occurrence order.
    pub fn prefix_actions(&self) -> Vec<Action> {
        let mut out: Vec<Action> = Vec::new();
        for t in self.resolved.values() {
            for a in t.prefix_actions() {
                if !out.contains(&a) {
                    out.push(a);
                }
            }
        }
        out
    }
}
