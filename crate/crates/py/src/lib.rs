//! Python bindings: parse models, build their transition systems and run the
//! partial-bisimulation and supervisory checks from Python.

use std::collections::BTreeSet;

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use pact_core::action::Name;
use pact_core::dsl::{parse_action, print_model};
use pact_core::event::{SemanticsError, DEFAULT_MAX_STATES};
use pact_core::examples;
use pact_core::lts::Lts as CoreLts;
use pact_core::model::{parse_model as core_parse_model, Model as CoreModel, Selection};
use pact_core::pbisim::{self, BisimActionSet};
use pact_core::requirements::check_requirement;
use pact_core::supervisory::{self, ControlVerdict, Evidence};

create_exception!(pact, PactError, PyValueError, "Model, semantics or check error.");
create_exception!(pact, BudgetExceeded, PactError, "A state or subset budget ran out.");

fn err(e: impl std::fmt::Display) -> PyErr {
    PactError::new_err(e.to_string())
}

fn semantics(e: SemanticsError) -> PyErr {
    match e {
        SemanticsError::BudgetExceeded { .. } => BudgetExceeded::new_err(e.to_string()),
        other => err(other),
    }
}

/// A parsed model with its declarations resolved.
#[pyclass(frozen, module = "pact")]
struct Model {
    inner: CoreModel,
}

#[pymethods]
impl Model {
    #[getter]
    fn plants(&self) -> Vec<String> {
        self.inner.plants.keys().map(|n| n.to_string()).collect()
    }

    #[getter]
    fn supervisors(&self) -> Vec<String> {
        self.inner.supervisors.keys().map(|n| n.to_string()).collect()
    }

    #[getter]
    fn uncontrollable(&self) -> BTreeSet<String> {
        names(&self.inner.uncontrollable())
    }

    #[getter]
    fn controllable(&self) -> BTreeSet<String> {
        names(&self.inner.controllable())
    }

    #[getter]
    fn state_based(&self) -> bool {
        self.inner.is_state_based()
    }

    /// Canonical text of the model.
    fn to_text(&self) -> String {
        print_model(&self.inner)
    }

    /// Builds the LTS of `plant`, `supervised`, `renamed` or a named process.
    #[pyo3(signature = (subject = "plant", *, plant = None, supervisor = None, encap = None, rename = None, max_states = DEFAULT_MAX_STATES))]
    fn build(
        &self,
        subject: &str,
        plant: Option<String>,
        supervisor: Option<String>,
        encap: Option<String>,
        rename: Option<String>,
        max_states: usize,
    ) -> PyResult<Lts> {
        let sel = Selection { plant, supervisor, encap, rename };
        let t = self.inner.subject(subject, &sel).map_err(err)?;
        let l = self.inner.build(&t, max_states).map_err(semantics)?;
        Ok(Lts { inner: l })
    }

    /// `(label, holds)` for each requirement, checked on `lts`.
    fn check_requirements(&self, lts: &Lts) -> PyResult<Vec<(String, bool)>> {
        self.inner
            .requirements
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let o = check_requirement(&lts.inner, &r.requirement).map_err(err)?;
                Ok((r.label(i), o.holds()))
            })
            .collect()
    }

    /// The action set for `b`: "U" is every action on an uncontrollable channel.
    fn action_set(&self, b: &str) -> PyResult<ActionSet> {
        let set = match b.trim() {
            "U" => BisimActionSet::Uncontrollable(self.inner.uncontrollable()),
            other => parse_set(other)?,
        };
        Ok(ActionSet { inner: set })
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(plants={:?}, supervisors={:?})",
            self.plants(),
            self.supervisors()
        )
    }
}

fn names(set: &BTreeSet<Name>) -> BTreeSet<String> {
    set.iter().map(|n| n.to_string()).collect()
}

fn parse_set(spec: &str) -> PyResult<BisimActionSet> {
    Ok(match spec {
        "all" => BisimActionSet::All,
        "none" | "" => BisimActionSet::empty(),
        list => BisimActionSet::Explicit(
            list.split(',').map(|s| parse_action(s.trim())).collect::<Result<_, _>>().map_err(err)?,
        ),
    })
}

/// The set of actions a partial bisimulation must match in both directions.
#[pyclass(frozen, module = "pact")]
struct ActionSet {
    inner: BisimActionSet,
}

#[pymethods]
impl ActionSet {
    /// `"all"`, `"none"` or a comma-separated list of actions.
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Ok(ActionSet { inner: parse_set(spec.trim())? })
    }

    /// Every action on one of these channels.
    #[staticmethod]
    fn channels(channels: Vec<String>) -> Self {
        ActionSet { inner: BisimActionSet::Uncontrollable(channels.iter().map(|c| pact_core::action::name(c)).collect()) }
    }

    fn __contains__(&self, action: &str) -> PyResult<bool> {
        Ok(self.inner.contains(&parse_action(action).map_err(err)?))
    }
}

/// A labelled transition system with terminating states.
#[pyclass(frozen, module = "pact")]
struct Lts {
    inner: CoreLts,
}

#[pymethods]
impl Lts {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn initial(&self) -> Vec<usize> {
        self.inner.initial.clone()
    }

    /// `(source, action, target)` triples.
    fn transitions(&self) -> Vec<(usize, String, usize)> {
        self.inner.transitions.iter().map(|t| (t.source, t.action.to_string(), t.target)).collect()
    }

    fn is_terminating(&self, state: usize) -> bool {
        self.inner.is_terminating(state)
    }

    fn state_label(&self, state: usize) -> String {
        self.inner.state_label(state)
    }

    /// A shortest trace from an initial state to `state`, if it is reachable.
    fn shortest_trace(&self, state: usize) -> Option<Vec<String>> {
        supervisory::shortest_trace(&self.inner, state).map(|t| t.iter().map(|a| a.to_string()).collect())
    }

    fn to_dot(&self) -> String {
        self.inner.to_dot()
    }

    fn to_aut(&self) -> String {
        self.inner.to_aut()
    }

    /// Quotient by mutual partial bisimilarity.
    fn minimize(&self, b: &ActionSet) -> Lts {
        Lts { inner: pbisim::minimize(&self.inner, &b.inner) }
    }

    fn __repr__(&self) -> String {
        format!("Lts(states={}, transitions={})", self.inner.len(), self.inner.transitions.len())
    }
}

/// Outcome of a check: whether it passed and the evidence when it did not.
#[pyclass(frozen, module = "pact")]
struct Verdict {
    #[pyo3(get)]
    passed: bool,
    /// One action or play step per line.
    #[pyo3(get)]
    evidence: Vec<String>,
    /// The trace part of the evidence, when the evidence is a trace.
    #[pyo3(get)]
    trace: Option<Vec<String>>,
    #[pyo3(get)]
    warnings: Vec<String>,
}

#[pymethods]
impl Verdict {
    fn __bool__(&self) -> bool {
        self.passed
    }

    fn __repr__(&self) -> String {
        format!("Verdict(passed={}, evidence_lines={})", self.passed, self.evidence.len())
    }
}

impl From<ControlVerdict> for Verdict {
    fn from(v: ControlVerdict) -> Self {
        Verdict {
            passed: v.pass,
            evidence: v.evidence.as_ref().map(Evidence::lines).unwrap_or_default(),
            trace: v.evidence.as_ref().and_then(Evidence::trace).map(|t| t.iter().map(|a| a.to_string()).collect()),
            warnings: v.warnings,
        }
    }
}

fn pbisim_verdict(o: pbisim::PbisimOutcome) -> Verdict {
    Verdict {
        passed: o.holds,
        evidence: o.counterexample.map(|c| c.render().lines().map(str::to_string).collect()).unwrap_or_default(),
        trace: None,
        warnings: Vec::new(),
    }
}

#[pyfunction]
fn parse_model(text: &str) -> PyResult<Model> {
    Ok(Model { inner: core_parse_model(text).map_err(err)? })
}

/// One of the bundled models, `"agv"` or `"printer"`.
#[pyfunction]
fn load_example(name: &str) -> PyResult<Model> {
    Ok(Model { inner: examples::load_example(name).map_err(err)? })
}

/// `left ≤_B right`.
#[pyfunction]
fn pbisim_leq(left: &Lts, right: &Lts, b: &ActionSet) -> Verdict {
    pbisim_verdict(pbisim::pbisim_leq(&left.inner, &right.inner, &b.inner))
}

/// `left ↔_B right`.
#[pyfunction]
fn pbisim_eq(left: &Lts, right: &Lts, b: &ActionSet) -> Verdict {
    pbisim_verdict(pbisim::pbisim_eq(&left.inner, &right.inner, &b.inner))
}

#[pyfunction]
fn check_deadlock_free(lts: &Lts) -> Verdict {
    supervisory::check_deadlock_free(&lts.inner).into()
}

#[pyfunction]
fn check_nonblocking(lts: &Lts) -> Verdict {
    supervisory::check_nonblocking(&lts.inner).into()
}

/// Supervised ≤_U plant, with `uncontrollable` the channel names in U.
#[pyfunction]
fn check_controllability(supervised: &Lts, plant: &Lts, uncontrollable: BTreeSet<String>) -> Verdict {
    let u: BTreeSet<Name> = uncontrollable.iter().map(|c| pact_core::action::name(c)).collect();
    supervisory::check_controllability(&supervised.inner, &plant.inner, &u).into()
}

#[pyfunction]
fn check_language_controllability(
    supervised: &Lts,
    plant: &Lts,
    uncontrollable: BTreeSet<String>,
) -> PyResult<Verdict> {
    let u: BTreeSet<Name> = uncontrollable.iter().map(|c| pact_core::action::name(c)).collect();
    let v = supervisory::check_language_controllability(&supervised.inner, &plant.inner, &u).map_err(|e| BudgetExceeded::new_err(e.to_string()))?;
    Ok(v.into())
}

#[pymodule]
fn pact(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PactError", m.py().get_type::<PactError>())?;
    m.add("BudgetExceeded", m.py().get_type::<BudgetExceeded>())?;
    m.add("DEFAULT_MAX_STATES", DEFAULT_MAX_STATES)?;
    m.add_class::<Model>()?;
    m.add_class::<Lts>()?;
    m.add_class::<ActionSet>()?;
    m.add_class::<Verdict>()?;
    m.add_function(wrap_pyfunction!(parse_model, m)?)?;
    m.add_function(wrap_pyfunction!(load_example, m)?)?;
    m.add_function(wrap_pyfunction!(pbisim_leq, m)?)?;
    m.add_function(wrap_pyfunction!(pbisim_eq, m)?)?;
    m.add_function(wrap_pyfunction!(check_deadlock_free, m)?)?;
    m.add_function(wrap_pyfunction!(check_nonblocking, m)?)?;
    m.add_function(wrap_pyfunction!(check_controllability, m)?)?;
    m.add_function(wrap_pyfunction!(check_language_controllability, m)?)?;
    Ok(())
}
