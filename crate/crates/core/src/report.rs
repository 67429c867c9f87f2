//! Pass/fail matrices produced by every law checker.

use std::fmt;

use serde::Serialize;

/// How much of the quantified statement a check actually covered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "cases", rename_all = "snake_case")]
pub enum Coverage {
    /// Every instance in the stated universe was evaluated.
    Exhaustive(u64),
    /// A deterministic seeded subset of the universe was evaluated.
    Sampled(u64),
    /// Evaluated at finitely many probe points of an infinite domain.
    Probes(u64),
}

impl Coverage {
    pub fn cases(&self) -> u64 {
        match *self {
            Coverage::Exhaustive(n) | Coverage::Sampled(n) | Coverage::Probes(n) => n,
        }
    }
}

impl fmt::Display for Coverage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.cases() == 1 { "" } else { "s" };
        match self {
            Coverage::Exhaustive(n) => write!(f, "exhaustive ({n} case{s})"),
            Coverage::Sampled(n) => write!(f, "sampled ({n} case{s})"),
            Coverage::Probes(n) => write!(f, "verified at {n} probe{s}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LawEntry {
    pub name: String,
    pub passed: bool,
    pub coverage: Coverage,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

impl LawEntry {
    pub fn status(&self) -> &'static str {
        if self.passed {
            "pass"
        } else {
            "fail"
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LawReport {
    pub entries: Vec<LawEntry>,
}

impl LawReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, entry: LawEntry) {
        self.entries.push(entry);
    }

    /// Appends every entry of `other`, prefixing names with `prefix/`.
    pub fn absorb(&mut self, prefix: &str, other: LawReport) {
        for mut e in other.entries {
            if !prefix.is_empty() {
                e.name = format!("{prefix}/{}", e.name);
            }
            self.entries.push(e);
        }
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn get(&self, name: &str) -> Option<&LawEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn passed(&self, name: &str) -> bool {
        self.get(name)
            .unwrap_or_else(|| panic!("no law named {name} in report"))
            .passed
    }

    pub fn failures(&self) -> impl Iterator<Item = &LawEntry> {
        self.entries.iter().filter(|e| !e.passed)
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.entries.iter().map(|e| e.name.len()).max().unwrap_or(0);
        for e in &self.entries {
            write!(f, "{:<w$}  {}  {}", e.name, e.status(), e.coverage)?;
            if let Some(c) = &e.counterexample {
                write!(f, "  counterexample: {c}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Accumulates one law's verdict while a checker walks its universe.
/// The first failing case in enumeration order is kept as the witness.
pub(crate) struct Tally {
    name: String,
    cases: u64,
    sampled: bool,
    witness: Option<String>,
}

impl Tally {
    pub fn new(name: impl Into<String>) -> Self {
        Tally {
            name: name.into(),
            cases: 0,
            sampled: false,
            witness: None,
        }
    }

    pub fn sampled(mut self, yes: bool) -> Self {
        self.sampled = yes;
        self
    }

    /// Records one case; `describe` runs only for the first failure.
    #[inline]
    pub fn case(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok && self.witness.is_none() {
            self.witness = Some(describe());
        }
    }

    pub fn finish(self) -> LawEntry {
        let coverage = if self.sampled {
            Coverage::Sampled(self.cases)
        } else {
            Coverage::Exhaustive(self.cases)
        };
        self.finish_with(coverage)
    }

    pub fn finish_probes(self) -> LawEntry {
        let n = self.cases;
        self.finish_with(Coverage::Probes(n))
    }

    fn finish_with(self, coverage: Coverage) -> LawEntry {
        LawEntry {
            name: self.name,
            passed: self.witness.is_none(),
            coverage,
            counterexample: self.witness,
        }
    }
}
