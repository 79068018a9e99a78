//! The `pact` command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage
//! and model errors, 3 when a state or subset budget runs out.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::dsl::{parse_action, print_model, ParseError};
use crate::event::{SemanticsError, DEFAULT_MAX_STATES};
use crate::lts::Lts;
use crate::model::{parse_model, Model, ModelError, Selection};
use crate::pbisim::{minimize, pbisim_eq, pbisim_leq, BisimActionSet};
use crate::requirements::check_requirement;
use crate::supervisory::{
    check_controllability, check_deadlock_free, check_language_controllability, check_nonblocking,
    shortest_trace, supervision_warnings, ControlVerdict, Evidence, SupervisoryError,
};
use crate::term::Term;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "pact", version, about = "Supervisory control checks for process models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate a model and print it in canonical form.
    Parse(ModelArgs),
    /// Build the reachable LTS of a process and export it.
    Lts {
        #[command(flatten)]
        model: ModelArgs,
        /// `plant`, `supervised`, `renamed` or the name of a process.
        #[arg(long, default_value = "plant")]
        of: String,
        #[arg(long, value_enum, default_value_t = Format::Aut)]
        format: Format,
    },
    /// Run a check; exit status 1 means it failed.
    #[command(subcommand)]
    Check(Check),
    /// Quotient an LTS by partial bisimilarity and export it.
    Minimize {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "plant")]
        of: String,
        /// Bisimulation action set: `U`, `all`, `none` or a comma list of actions.
        #[arg(long)]
        b: String,
        #[arg(long, value_enum, default_value_t = Format::Aut)]
        format: Format,
    },
}

#[derive(Subcommand, Debug)]
pub enum Check {
    /// `left ≤_B right`, or `left ↔_B right` with `--eq`.
    Pbisim {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "supervised")]
        left: String,
        #[arg(long, default_value = "renamed")]
        right: String,
        #[arg(long, default_value = "U")]
        b: String,
        #[arg(long)]
        eq: bool,
    },
    /// The supervised plant against the renamed plant, bisimulating uncontrollable actions.
    Controllable(ModelArgs),
    /// Language controllability of the supervised plant.
    LangControllable(ModelArgs),
    Deadlock(ModelArgs),
    Nonblocking(ModelArgs),
    /// State-based requirements, on the supervised plant when there is a supervisor.
    Reqs(ModelArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub plant: Option<String>,
    #[arg(long)]
    pub supervisor: Option<String>,
    #[arg(long)]
    pub encap: Option<String>,
    #[arg(long)]
    pub rename: Option<String>,
    #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
    pub max_states: usize,
    /// Also write evidence lines to this file.
    #[arg(long)]
    pub evidence_out: Option<PathBuf>,
    #[arg(short, long)]
    pub verbose: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Dot,
    Aut,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Output(#[from] io::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Supervisory(#[from] SupervisoryError),
    #[error("bad action set: {0}")]
    ActionSet(ParseError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Semantics(SemanticsError::BudgetExceeded { .. })
            | CliError::Supervisory(SupervisoryError::SubsetBudget { .. }) => EXIT_BUDGET,
            _ => EXIT_USAGE,
        }
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_PASS
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            }
        }
    };
    match run(&cli, out, err) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Runs one command. `Ok(false)` means a check failed.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<bool, CliError> {
    match &cli.command {
        Command::Parse(a) => {
            let m = load(a)?;
            write!(out, "{}", print_model(&m))?;
            Ok(true)
        }
        Command::Lts { model, of, format } => {
            let s = Session::open(model)?;
            let l = s.build(of)?;
            s.note(err, &format!("{of}: {} states, {} transitions", l.len(), l.transitions.len()))?;
            export(out, &l, *format)?;
            Ok(true)
        }
        Command::Minimize { model, of, b, format } => {
            let s = Session::open(model)?;
            let l = s.build(of)?;
            let q = minimize(&l, &s.action_set(b)?);
            s.note(err, &format!("{of}: {} states, minimized to {}", l.len(), q.len()))?;
            export(out, &q, *format)?;
            Ok(true)
        }
        Command::Check(c) => run_check(c, out, err),
    }
}

fn run_check(c: &Check, out: &mut dyn Write, err: &mut dyn Write) -> Result<bool, CliError> {
    match c {
        Check::Pbisim { model, left, right, b, eq } => {
            let s = Session::open(model)?;
            let (l1, l2) = (s.build(left)?, s.build(right)?);
            let set = s.action_set(b)?;
            for a in set.strays(&l1, &l2) {
                writeln!(err, "warning: action `{a}` in the action set occurs on neither side")?;
            }
            let outcome = if *eq { pbisim_eq(&l1, &l2, &set) } else { pbisim_leq(&l1, &l2, &set) };
            let name = if *eq { "pbisim-eq" } else { "pbisim" };
            let verdict = ControlVerdict {
                pass: outcome.holds,
                evidence: outcome.counterexample.map(Evidence::Play),
                checks_run: vec![name.to_string()],
                warnings: Vec::new(),
            };
            if let Some(w) = &outcome.witness {
                s.note(err, &format!("witness relation with {} pairs", w.len()))?;
            }
            s.report(out, err, name, &verdict)
        }
        Check::Controllable(a) => {
            let s = Session::open(a)?;
            let (sup, plant) = (s.build("supervised")?, s.build("renamed")?);
            let mut verdict = check_controllability(&sup, &plant, &s.model.uncontrollable());
            verdict.warnings.extend(s.grammar_warnings()?);
            s.report(out, err, "controllable", &verdict)
        }
        Check::LangControllable(a) => {
            let s = Session::open(a)?;
            let (sup, plant) = (s.build("supervised")?, s.build("renamed")?);
            let verdict = check_language_controllability(&sup, &plant, &s.model.uncontrollable())?;
            s.report(out, err, "lang-controllable", &verdict)
        }
        Check::Deadlock(a) => {
            let s = Session::open(a)?;
            let l = s.build(s.default_subject())?;
            s.report(out, err, "deadlock", &check_deadlock_free(&l))
        }
        Check::Nonblocking(a) => {
            let s = Session::open(a)?;
            let l = s.build(s.default_subject())?;
            s.report(out, err, "nonblocking", &check_nonblocking(&l))
        }
        Check::Reqs(a) => {
            let s = Session::open(a)?;
            let l = s.build(s.default_subject())?;
            let mut all = true;
            let mut evidence = Vec::new();
            for (i, r) in s.model.requirements.iter().enumerate() {
                let label = r.label(i);
                let outcome = check_requirement(&l, &r.requirement)?;
                if outcome.holds() {
                    writeln!(out, "{label}: pass")?;
                    continue;
                }
                all = false;
                writeln!(out, "{label}: FAIL ({})", r.requirement)?;
                let st = outcome.violations[0];
                evidence.push(format!("requirement {label}"));
                for act in shortest_trace(&l, st).unwrap_or_default() {
                    evidence.push(act.to_string());
                }
                evidence.push(format!("state {}", l.state_label(st)));
            }
            print_evidence(out, &evidence)?;
            s.write_evidence(&evidence)?;
            Ok(all)
        }
    }
}

fn load(a: &ModelArgs) -> Result<Model, CliError> {
    let text = fs::read_to_string(&a.model).map_err(|source| CliError::Read { path: a.model.clone(), source })?;
    Ok(parse_model(&text)?)
}

fn export(out: &mut dyn Write, l: &Lts, format: Format) -> Result<(), CliError> {
    let text = match format {
        Format::Dot => l.to_dot(),
        Format::Aut => l.to_aut(),
    };
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn print_evidence(out: &mut dyn Write, lines: &[String]) -> io::Result<()> {
    for line in lines {
        writeln!(out, "EVIDENCE: {line}")?;
    }
    Ok(())
}

struct Session<'a> {
    args: &'a ModelArgs,
    model: Model,
}

impl<'a> Session<'a> {
    fn open(args: &'a ModelArgs) -> Result<Self, CliError> {
        Ok(Session { args, model: load(args)? })
    }

    fn default_subject(&self) -> &'static str {
        if self.model.supervisors.is_empty() {
            "plant"
        } else {
            "supervised"
        }
    }

    fn term(&self, subject: &str) -> Result<Term, CliError> {
        let a = self.args;
        let sel = Selection {
            plant: a.plant.clone(),
            supervisor: a.supervisor.clone(),
            encap: a.encap.clone(),
            rename: a.rename.clone(),
        };
        Ok(self.model.subject(subject, &sel)?)
    }

    fn build(&self, subject: &str) -> Result<Lts, CliError> {
        let l = self.model.build(&self.term(subject)?, self.args.max_states)?;
        Ok(l)
    }

    fn action_set(&self, spec: &str) -> Result<BisimActionSet, CliError> {
        Ok(match spec.trim() {
            "U" => BisimActionSet::Uncontrollable(self.model.uncontrollable()),
            "all" => BisimActionSet::All,
            "none" | "" => BisimActionSet::empty(),
            list => BisimActionSet::Explicit(
                list.split(',')
                    .map(|s| parse_action(s.trim()))
                    .collect::<Result<_, _>>()
                    .map_err(CliError::ActionSet)?,
            ),
        })
    }

    fn grammar_warnings(&self) -> Result<Vec<String>, CliError> {
        let m = &self.model;
        let (_, u) = m.plant(self.args.plant.as_deref())?;
        let (_, s, _) = m.supervisor(self.args.supervisor.as_deref())?;
        Ok(supervision_warnings(u, s, m.is_state_based(), &|c| m.channel_class(c)))
    }

    fn note(&self, err: &mut dyn Write, msg: &str) -> io::Result<()> {
        if self.args.verbose {
            writeln!(err, "{msg}")?;
        }
        Ok(())
    }

    fn write_evidence(&self, lines: &[String]) -> Result<(), CliError> {
        if let Some(path) = &self.args.evidence_out {
            let mut text = lines.join("\n");
            if !text.is_empty() {
                text.push('\n');
            }
            fs::write(path, text).map_err(|source| CliError::Write { path: path.clone(), source })?;
        }
        Ok(())
    }

    fn report(
        &self,
        out: &mut dyn Write,
        err: &mut dyn Write,
        name: &str,
        verdict: &ControlVerdict,
    ) -> Result<bool, CliError> {
        for w in &verdict.warnings {
            writeln!(err, "warning: {w}")?;
        }
        writeln!(out, "{name}: {}", if verdict.pass { "pass" } else { "FAIL" })?;
        let lines = verdict.evidence.as_ref().map(Evidence::lines).unwrap_or_default();
        print_evidence(out, &lines)?;
        self.write_evidence(&lines)?;
        Ok(verdict.pass)
    }
}
