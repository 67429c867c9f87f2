//! The line-oriented CTS file format.
//!
//! ```text
//! # comments run to the end of the line
//! conditions: k1 k2
//! order: k2 <= k1
//! alphabet: a
//! states: x y
//! accepting: y
//! trans: x a k2 y
//! ```
//!
//! Declarations may appear in any order; `order` lines are closed reflexively and
//! transitively as they are read, so a cycle is reported at the line closing it.

use std::collections::BTreeMap;

use crate::cts::{Cts, Transition};
use crate::error::{Error, Result};
use crate::order::{FinPoset, FinSet};

/// A parsed file together with where each item came from.
#[derive(Clone, Debug)]
pub struct CtsDocument {
    pub text: String,
    pub cts: Cts,
    /// Line of every transition as written (1-based).
    pub transition_lines: BTreeMap<Transition, usize>,
    /// Line of each declaration keyword.
    pub declarations: BTreeMap<&'static str, usize>,
}

impl CtsDocument {
    pub fn line_of(&self, t: &Transition) -> Option<usize> {
        self.transition_lines.get(t).copied()
    }
}

const KEYWORDS: [&str; 6] = ["conditions", "order", "alphabet", "states", "accepting", "trans"];

struct Line<'a> {
    number: usize,
    keyword: &'static str,
    args: Vec<&'a str>,
}

fn syntax(line: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<Line<'_>>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let number = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (head, rest) = content
            .split_once(':')
            .ok_or_else(|| syntax(number, format!("expected `keyword: ...`, found `{content}`")))?;
        let head = head.trim();
        let keyword = KEYWORDS
            .iter()
            .copied()
            .find(|k| *k == head)
            .ok_or_else(|| syntax(number, format!("unknown keyword `{head}`")))?;
        let args: Vec<&str> = rest.split_whitespace().collect();
        if let Some(bad) = args.iter().find(|a| a.contains(':')) {
            return Err(syntax(number, format!("unexpected `:` in `{bad}`")));
        }
        out.push(Line { number, keyword, args });
    }
    Ok(out)
}

fn declare(lines: &[Line], keyword: &'static str, required: bool) -> Result<Option<(usize, FinSet)>> {
    let mut found = lines.iter().filter(|l| l.keyword == keyword);
    let Some(first) = found.next() else {
        return if required {
            Err(syntax(0, format!("missing `{keyword}:` line")))
        } else {
            Ok(None)
        };
    };
    if let Some(again) = found.next() {
        return Err(syntax(again.number, format!("`{keyword}:` declared twice")));
    }
    if required && first.args.is_empty() {
        return Err(syntax(first.number, format!("`{keyword}:` needs at least one name")));
    }
    let set = FinSet::new(first.args.iter().copied()).map_err(|e| e.at_line(first.number))?;
    Ok(Some((first.number, set)))
}

fn resolve(set: &FinSet, kind: &'static str, name: &str, line: usize) -> Result<usize> {
    set.index_of(name).ok_or_else(|| {
        Error::DanglingReference {
            kind,
            name: name.to_string(),
        }
        .at_line(line)
    })
}

/// Parses a document. Errors carry the offending line; line 0 means the whole file.
pub fn parse_cts(text: &str) -> Result<CtsDocument> {
    let lines = tokenize(text)?;
    let mut declarations = BTreeMap::new();
    let mut sets = Vec::new();
    for kw in ["conditions", "alphabet", "states"] {
        let (line, set) = declare(&lines, kw, true)?.expect("required");
        declarations.insert(kw, line);
        sets.push(set);
    }
    let [conds, alphabet, states]: [FinSet; 3] = sets.try_into().expect("three declarations");

    let mut pairs = Vec::new();
    for l in lines.iter().filter(|l| l.keyword == "order") {
        let [lo, le, hi] = l.args[..] else {
            return Err(syntax(l.number, "expected `order: <condition> <= <condition>`"));
        };
        if le != "<=" {
            return Err(syntax(l.number, format!("expected `<=`, found `{le}`")));
        }
        pairs.push((
            resolve(&conds, "condition", lo, l.number)?,
            resolve(&conds, "condition", hi, l.number)?,
        ));
        FinPoset::closure(&conds, &pairs).map_err(|e| e.at_line(l.number))?;
    }
    let conditions = FinPoset::closure(&conds, &pairs)?;

    let mut accepting = crate::bits::BitSet::new(states.len());
    let acc_lines: Vec<&Line> = lines.iter().filter(|l| l.keyword == "accepting").collect();
    if let Some(again) = acc_lines.get(1) {
        return Err(syntax(again.number, "`accepting:` declared twice"));
    }
    if let Some(l) = acc_lines.first() {
        declarations.insert("accepting", l.number);
        for s in &l.args {
            accepting.insert(resolve(&states, "state", s, l.number)?);
        }
    }

    let mut transition_lines = BTreeMap::new();
    for l in lines.iter().filter(|l| l.keyword == "trans") {
        let [x, a, k, y] = l.args[..] else {
            return Err(syntax(
                l.number,
                "expected `trans: <state> <action> <condition> <state>`",
            ));
        };
        let t = (
            resolve(&states, "state", x, l.number)?,
            resolve(&alphabet, "action", a, l.number)?,
            resolve(&conds, "condition", k, l.number)?,
            resolve(&states, "state", y, l.number)?,
        );
        transition_lines.entry(t).or_insert(l.number);
    }
    let cts = Cts::from_indices(
        conditions,
        alphabet,
        states,
        accepting,
        transition_lines.keys().copied(),
    )?;
    Ok(CtsDocument {
        text: text.to_string(),
        cts,
        transition_lines,
        declarations,
    })
}
