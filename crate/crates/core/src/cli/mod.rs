//! The `condtrace` command line: argument parsing, command execution and report
//! rendering. [`run`] is the whole program minus process I/O, so it can be
//! driven from tests.

mod document;
mod report;

pub use document::{parse_cts, CtsDocument};
pub use report::{table, LawLine, Report, Witness};

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Read;

use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use crate::cts::{
    behaviour_equiv, build_alpha, coincidence_check, complete, direct_behaviour, fixpoint_traces,
    validate, Behaviour, Cts, Mode, ObsKind,
};
use crate::dlaw::{build_dlaw, check_closed_form, check_kl_law, Induced, StandardLifting, Universe};
use crate::error::Error;
use crate::monad::{labels_of, Backend};
use crate::order::{FinPoset, FinSet};
use crate::report::Coverage;
use crate::suites::{dlaw_functors, Suite};

#[derive(Parser, Debug)]
#[command(
    name = "condtrace",
    version,
    about = "Decorated-trace semantics of conditional transition systems"
)]
pub struct Cli {
    /// Print the canonical JSON report instead of text tables.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Lang,
    Ready,
    Fail,
}

impl ModeArg {
    fn kind(self) -> ObsKind {
        match self {
            ModeArg::Lang => ObsKind::Acceptance,
            ModeArg::Ready => ObsKind::Ready,
            ModeArg::Fail => ObsKind::Failure,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Fixpoint,
    Direct,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Monads,
    Kleisli,
    Dlaw,
    Quantale,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Set,
    Pos,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check that every transition is also present under all smaller conditions.
    Validate { file: String },
    /// Print the document with every transition forced by down-closure added.
    Complete { file: String },
    /// List the decorated traces of a state.
    Semantics {
        file: String,
        #[arg(long, value_enum, default_value = "lang")]
        mode: ModeArg,
        #[arg(long)]
        state: String,
        /// Only the traces of this condition's cell.
        #[arg(long)]
        condition: Option<String>,
        #[arg(long)]
        upgrades: bool,
        /// Words shorter than this are listed [default: |states| * |conditions| + 1].
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, value_enum, default_value = "fixpoint")]
        method: Method,
        /// Observe exactly the enabled set instead of all its subsets (diagnostic).
        #[arg(long)]
        exact_ready: bool,
    },
    /// Decide conditional equivalence of two states.
    Equiv {
        file: String,
        #[arg(long, value_enum, default_value = "lang")]
        mode: ModeArg,
        #[arg(long, num_args = 2, value_names = ["S1", "S2"], required = true)]
        pair: Vec<String>,
        /// Compare only under this condition and those below it.
        #[arg(long)]
        condition: Option<String>,
        #[arg(long)]
        upgrades: bool,
    },
    /// Compare fixpoint iterates against the closed-form semantics.
    Coincide {
        file: String,
        #[arg(long, value_enum, default_value = "lang")]
        mode: ModeArg,
        #[arg(long)]
        upgrades: bool,
        /// Words shorter than this are compared [default: |states| * |conditions| + 1].
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Run a law suite over its registered universe.
    Laws {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        /// Largest carrier size enumerated.
        #[arg(long, default_value_t = 2)]
        size_bound: usize,
        /// Seed for random instances and sampled subsets.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the distributive laws of the standard liftings on one carrier.
    DlawShow {
        #[arg(long)]
        carrier_size: usize,
        /// `pos` uses the chain 0 < 1 < .. instead of a discrete set.
        #[arg(long, value_enum, default_value = "set")]
        backend: BackendArg,
    },
}

/// Everything the process should emit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

/// A failure before any verdict: exit code 2.
struct Usage(String);

impl From<Error> for Usage {
    fn from(e: Error) -> Self {
        Usage(e.to_string())
    }
}

fn flag_error(flag: &str, e: Error) -> Usage {
    Usage(format!("{flag}: {e}"))
}

/// Runs the program on `args` (including the program name), reading `-` from `stdin`.
pub fn run<I, T>(args: I, stdin: &mut dyn Read) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Outcome {
                    stdout: text,
                    stderr: String::new(),
                    code: 0,
                },
                _ => Outcome {
                    stdout: String::new(),
                    stderr: text,
                    code: 2,
                },
            };
        }
    };
    match execute(&cli.command, stdin) {
        Ok((report, code)) => Outcome {
            stdout: if cli.json {
                report.to_json()
            } else if let (Command::Complete { .. }, Some(doc)) = (&cli.command, &report.listing) {
                doc.clone()
            } else {
                report.to_text()
            },
            stderr: String::new(),
            code,
        },
        Err(Usage(msg)) => Outcome {
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
            code: 2,
        },
    }
}

fn load(file: &str, stdin: &mut dyn Read) -> Result<(CtsDocument, String), Usage> {
    let mut bytes = Vec::new();
    if file == "-" {
        stdin
            .read_to_end(&mut bytes)
            .map_err(|e| Usage(format!("<stdin>: {e}")))?;
    } else {
        bytes = std::fs::read(file).map_err(|e| Usage(format!("{file}: {e}")))?;
    }
    let digest = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes).map_err(|_| Usage(format!("{file}: not UTF-8 text")))?;
    let doc = parse_cts(&text).map_err(|e| Usage(format!("{file}: {e}")))?;
    Ok((doc, digest))
}

fn mode(kind: ModeArg, upgrades: bool, exact_ready: bool) -> Result<Mode, Usage> {
    if exact_ready {
        if kind != ModeArg::Ready || upgrades {
            return Err(Usage("--exact-ready: needs --mode ready and no --upgrades".into()));
        }
        return Ok(Mode::exact_ready());
    }
    Mode::new(kind.kind(), upgrades).map_err(|e| flag_error("--mode fail --upgrades", e))
}

fn default_depth(cts: &Cts) -> usize {
    cts.states().len() * cts.conditions().len() + 1
}

fn witness(cts: &Cts, mode: Mode, (k, w, o): &(usize, Vec<usize>, usize)) -> Witness {
    Witness {
        condition: cts.conditions().label(*k).to_string(),
        word: cts.word_label(w),
        observation: mode.format_obs(cts.alphabet(), *o),
    }
}

fn describe_transition(cts: &Cts, (x, a, k, y): (usize, usize, usize, usize)) -> String {
    format!(
        "{} {} {} {}",
        cts.states().label(x),
        cts.alphabet().label(a),
        cts.conditions().label(k),
        cts.states().label(y)
    )
}

fn execute(command: &Command, stdin: &mut dyn Read) -> Result<(Report, i32), Usage> {
    match command {
        Command::Validate { file } => {
            let (doc, digest) = load(file, stdin)?;
            let cts = &doc.cts;
            let v = validate(cts);
            let mut r = Report::new(format!("validate {file}"), Some(digest));
            let counterexample = v.missing.first().map(|&(x, a, k, y)| {
                let forced_by = cts
                    .transitions()
                    .iter()
                    .find(|&&(x2, a2, k2, y2)| (x2, a2, y2) == (x, a, y) && cts.conditions().leq(k, k2))
                    .and_then(|t| doc.line_of(t).map(|line| (describe_transition(cts, *t), line)));
                let missing = describe_transition(cts, (x, a, k, y));
                match forced_by {
                    Some((t, line)) => format!("trans: {missing} is forced by `trans: {t}` (line {line})"),
                    None => format!("trans: {missing} is missing"),
                }
            });
            r.laws.push(LawLine {
                name: "down-closure".into(),
                status: if v.is_valid() { "pass" } else { "fail" }.into(),
                coverage: Coverage::Exhaustive(cts.transitions().len() as u64).to_string(),
                counterexample,
            });
            r.verdict = if v.is_valid() { "valid" } else { "invalid" }.into();
            if !v.is_valid() {
                r.notes.push(("missing".into(), v.missing.len().to_string()));
            }
            let code = if v.is_valid() { 0 } else { 1 };
            Ok((r, code))
        }
        Command::Complete { file } => {
            let (doc, digest) = load(file, stdin)?;
            let done = complete(&doc.cts);
            let mut r = Report::new(format!("complete {file}"), Some(digest));
            let added = done.transitions().len() - doc.cts.transitions().len();
            r.verdict = format!("complete ({added} transitions added)");
            r.listing = Some(done.to_string());
            Ok((r, 0))
        }
        Command::Semantics {
            file,
            mode: m,
            state,
            condition,
            upgrades,
            depth,
            method,
            exact_ready,
        } => {
            let mode = mode(*m, *upgrades, *exact_ready)?;
            let (doc, digest) = load(file, stdin)?;
            let cts = &doc.cts;
            let x = cts.state(state).map_err(|e| flag_error("--state", e))?;
            let ks: Vec<usize> = match condition {
                Some(c) => vec![cts.condition(c).map_err(|e| flag_error("--condition", e))?],
                None => (0..cts.conditions().len()).collect(),
            };
            let depth = depth.unwrap_or_else(|| default_depth(cts));
            let (behaviour, stabilized): (Behaviour, Option<bool>) = match method {
                Method::Fixpoint => {
                    let alpha = build_alpha(cts, mode)?;
                    let fix = fixpoint_traces(&alpha, depth)?;
                    (fix.behaviour, Some(fix.stabilized))
                }
                Method::Direct => (direct_behaviour(cts, mode, depth)?, None),
            };
            let traces: BTreeSet<(usize, usize, Vec<usize>, usize)> = ks
                .iter()
                .flat_map(|&k| behaviour.cell(k, x).traces())
                .map(|(k2, w, o)| (k2, w.len(), w, o))
                .collect();
            let mut command = format!("semantics {file} --mode {} --state {state}", m.name());
            if let Some(c) = condition {
                command.push_str(&format!(" --condition {c}"));
            }
            if *upgrades {
                command.push_str(" --upgrades");
            }
            command.push_str(&format!(" --depth {depth} --method {}", method.name()));
            if *exact_ready {
                command.push_str(" --exact-ready");
            }
            let mut r = Report::new(command, Some(digest));
            r.witnesses = traces
                .into_iter()
                .map(|(k, _, w, o)| witness(cts, mode, &(k, w, o)))
                .collect();
            r.verdict = format!("{} traces", r.witnesses.len());
            r.witness_heading = "traces".into();
            r.depth = Some(depth);
            r.stabilized = stabilized;
            Ok((r, 0))
        }
        Command::Equiv {
            file,
            mode: m,
            pair,
            condition,
            upgrades,
        } => {
            let mode = mode(*m, *upgrades, false)?;
            let (doc, digest) = load(file, stdin)?;
            let cts = &doc.cts;
            let x = cts.state(&pair[0]).map_err(|e| flag_error("--pair", e))?;
            let y = cts.state(&pair[1]).map_err(|e| flag_error("--pair", e))?;
            let at = match condition {
                Some(c) => Some(cts.condition(c).map_err(|e| flag_error("--condition", e))?),
                None => None,
            };
            let e = behaviour_equiv(cts, mode, x, y, at)?;
            let mut command = format!("equiv {file} --mode {} --pair {} {}", m.name(), pair[0], pair[1]);
            if let Some(c) = condition {
                command.push_str(&format!(" --condition {c}"));
            }
            if *upgrades {
                command.push_str(" --upgrades");
            }
            let mut r = Report::new(command, Some(digest));
            r.verdict = if e.equivalent { "equivalent" } else { "inequivalent" }.into();
            r.notes.push(("product".into(), format!("{} states", e.product_states)));
            if let Some(t) = &e.witness {
                r.witnesses.push(witness(cts, mode, t));
                let (has, lacks) = if e.witness_in_first { (x, y) } else { (y, x) };
                r.witness_heading = format!(
                    "witness (a trace of {}, not of {})",
                    cts.states().label(has),
                    cts.states().label(lacks)
                );
            }
            Ok((r, if e.equivalent { 0 } else { 1 }))
        }
        Command::Coincide {
            file,
            mode: m,
            upgrades,
            depth,
        } => {
            let mode = mode(*m, *upgrades, false)?;
            let (doc, digest) = load(file, stdin)?;
            let cts = &doc.cts;
            let depth = depth.unwrap_or_else(|| default_depth(cts));
            let report = coincidence_check(cts, mode, depth)?;
            let fix = fixpoint_traces(&build_alpha(cts, mode)?, depth)?;
            let mut command = format!("coincide {file} --mode {}", m.name());
            if *upgrades {
                command.push_str(" --upgrades");
            }
            command.push_str(&format!(" --depth {depth}"));
            let mut r = Report::new(command, Some(digest));
            r.add_laws(&report);
            r.verdict = if report.all_pass() { "coincide" } else { "mismatch" }.into();
            r.depth = Some(depth);
            r.stabilized = Some(fix.stabilized);
            Ok((r, if report.all_pass() { 0 } else { 1 }))
        }
        Command::Laws { suite, size_bound, seed } => {
            let s = suite.suite();
            let report = s.run(*size_bound, *seed)?;
            let mut r = Report::new(
                format!("laws --suite {} --size-bound {size_bound} --seed {seed}", s.name()),
                None,
            );
            r.add_laws(&report);
            let failed = report.failures().count();
            r.verdict = if failed == 0 {
                format!("pass ({} laws)", report.entries.len())
            } else {
                format!("fail ({failed} of {} laws)", report.entries.len())
            };
            Ok((r, if failed == 0 { 0 } else { 1 }))
        }
        Command::DlawShow { carrier_size, backend } => {
            let (b, x) = match backend {
                BackendArg::Set => (Backend::Set, FinPoset::discrete(&FinSet::range(*carrier_size))),
                BackendArg::Pos => {
                    let labels: Vec<String> = (0..*carrier_size).map(|i| i.to_string()).collect();
                    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
                    (Backend::Pos, FinPoset::chain(&refs))
                }
            };
            let universe = Universe {
                backend: b,
                carriers: vec![x.clone()],
            };
            let mut r = Report::new(
                format!("dlaw-show --carrier-size {carrier_size} --backend {}", b.name()),
                None,
            );
            let mut listing = String::new();
            for functor in dlaw_functors() {
                let lifting = Induced(StandardLifting(functor.clone()));
                let law = build_dlaw(&lifting, b, &x)?;
                let cod = b.view(&functor.obj(&x));
                let rows: Vec<Vec<String>> = (0..law.arrow.dom().len())
                    .map(|e| {
                        vec![
                            law.arrow.dom().label(e).to_string(),
                            "|->".into(),
                            labels_of(cod.carrier(), law.apply(e)),
                        ]
                    })
                    .collect();
                listing.push_str(&format!("vartheta for F = {} on X = {x}\n", functor.name()));
                listing.push_str(&table(&rows));
                listing.push('\n');
                let mut checks = check_closed_form(&functor, &universe)?;
                checks.entries.extend(check_kl_law(&lifting, &universe)?.entries);
                for e in &mut checks.entries {
                    e.name = format!("{}/{}", functor.name(), e.name);
                }
                r.add_laws(&checks);
            }
            let ok = r.laws.iter().all(|l| l.status == "pass");
            r.verdict = if ok { "pass" } else { "fail" }.into();
            r.listing = Some(listing);
            Ok((r, if ok { 0 } else { 1 }))
        }
    }
}

impl ModeArg {
    fn name(self) -> &'static str {
        self.kind().name()
    }
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Fixpoint => "fixpoint",
            Method::Direct => "direct",
        }
    }
}

impl SuiteArg {
    fn suite(self) -> Suite {
        match self {
            SuiteArg::Monads => Suite::Monads,
            SuiteArg::Kleisli => Suite::Kleisli,
            SuiteArg::Dlaw => Suite::Dlaw,
            SuiteArg::Quantale => Suite::Quantale,
        }
    }
}
