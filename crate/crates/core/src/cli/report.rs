use serde::Serialize;

use crate::report::LawReport;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub condition: String,
    pub word: String,
    pub observation: String,
}

impl Witness {
    pub fn line(&self) -> String {
        format!("{} : {} / {}", self.condition, self.word, self.observation)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LawLine {
    pub name: String,
    pub status: String,
    pub coverage: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

/// What every command prints. JSON keys come out sorted because the report is
/// converted to a `serde_json::Value`, whose maps are ordered.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub command: String,
    pub input_digest: Option<String>,
    pub verdict: String,
    pub witnesses: Vec<Witness>,
    pub laws: Vec<LawLine>,
    pub depth: Option<usize>,
    pub stabilized: Option<bool>,
    /// Document text for `complete`, the law table for `dlaw-show`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub listing: Option<String>,
    /// Extra `key value` lines shown only in text output.
    #[serde(skip)]
    pub notes: Vec<(String, String)>,
    /// Heading of the witness table in text output.
    #[serde(skip)]
    pub witness_heading: String,
}

impl Report {
    pub fn new(command: String, input_digest: Option<String>) -> Self {
        Report {
            command,
            input_digest,
            witness_heading: "witness".into(),
            ..Default::default()
        }
    }

    pub fn add_laws(&mut self, r: &LawReport) {
        self.laws.extend(r.entries.iter().map(|e| LawLine {
            name: e.name.clone(),
            status: e.status().into(),
            coverage: e.coverage.to_string(),
            counterexample: e.counterexample.clone(),
        }));
    }

    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("reports serialize");
        let mut s = serde_json::to_string_pretty(&value).expect("values serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut head: Vec<(String, String)> = vec![("command".into(), self.command.clone())];
        if let Some(d) = &self.input_digest {
            head.push(("input".into(), format!("sha256:{d}")));
        }
        head.push(("verdict".into(), self.verdict.clone()));
        if let Some(d) = self.depth {
            head.push(("depth".into(), d.to_string()));
        }
        if let Some(s) = self.stabilized {
            head.push(("stabilized".into(), if s { "yes" } else { "no" }.into()));
        }
        head.extend(self.notes.iter().cloned());
        let mut out = table(&head.iter().map(|(k, v)| vec![k.clone(), v.clone()]).collect::<Vec<_>>());

        if !self.witnesses.is_empty() {
            out.push('\n');
            out.push_str(&self.witness_heading);
            out.push('\n');
            let wc = self.witnesses.iter().map(|w| w.condition.chars().count()).max().unwrap_or(0);
            let ww = self.witnesses.iter().map(|w| w.word.chars().count()).max().unwrap_or(0);
            for w in &self.witnesses {
                out.push_str(&format!(
                    "  {:<wc$} : {:<ww$} / {}\n",
                    w.condition, w.word, w.observation
                ));
            }
        }
        if !self.laws.is_empty() {
            out.push('\n');
            let rows: Vec<Vec<String>> = self
                .laws
                .iter()
                .map(|l| {
                    let mut row = vec![l.name.clone(), l.status.clone(), l.coverage.clone()];
                    if let Some(c) = &l.counterexample {
                        row.push(format!("counterexample: {c}"));
                    }
                    row
                })
                .collect();
            out.push_str(&table(&rows));
        }
        if let Some(l) = &self.listing {
            out.push('\n');
            out.push_str(l);
        }
        out
    }
}

/// Left-aligned columns separated by two spaces; trailing cells may be missing.
pub fn table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in rows {
        let mut line = String::new();
        for (c, cell) in r.iter().enumerate() {
            if c + 1 == r.len() {
                line.push_str(cell);
            } else {
                line.push_str(&format!("{cell:<w$}  ", w = widths[c]));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}
