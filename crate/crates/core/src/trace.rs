//! Finite traces of label sets and their JSON Lines file format.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{SyntaxError, TraceError};
use crate::syntax::Atom;

/// Atoms true at one instant.
pub type LabelSet = BTreeSet<Atom>;

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Trace {
    steps: Vec<LabelSet>,
}

impl Trace {
    pub fn new(steps: Vec<LabelSet>) -> Self {
        Trace { steps }
    }

    /// Build a trace that must honour the environment contract: `end`, if
    /// present, labels only the final instant.
    pub fn from_env(steps: Vec<LabelSet>) -> Result<Self, TraceError> {
        let t = Trace { steps };
        t.check_end_contract()?;
        Ok(t)
    }

    pub fn from_names<S: AsRef<str>>(steps: &[&[S]]) -> Result<Self, SyntaxError> {
        let steps = steps
            .iter()
            .map(|s| s.iter().map(|n| Atom::new(n.as_ref())).collect::<Result<LabelSet, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Trace { steps })
    }

    pub fn check_end_contract(&self) -> Result<(), TraceError> {
        let last = self.steps.len().saturating_sub(1);
        for (i, s) in self.steps.iter().enumerate() {
            if i != last && s.iter().any(Atom::is_end) {
                return Err(TraceError::EndNotFinal { index: i, last });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[LabelSet] {
        &self.steps
    }

    pub fn push(&mut self, labels: LabelSet) {
        self.steps.push(labels);
    }

    /// The first `len` instants.
    pub fn prefix(&self, len: usize) -> Trace {
        Trace { steps: self.steps[..len.min(self.steps.len())].to_vec() }
    }
}

impl std::ops::Index<usize> for Trace {
    type Output = LabelSet;

    fn index(&self, j: usize) -> &LabelSet {
        &self.steps[j]
    }
}

impl FromIterator<LabelSet> for Trace {
    fn from_iter<I: IntoIterator<Item = LabelSet>>(iter: I) -> Self {
        Trace { steps: iter.into_iter().collect() }
    }
}

/// One line of a trace file: `{"labels": [["soil"], ["soil", "end"]], "meta": {...}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRecord {
    pub labels: Vec<Vec<Atom>>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub meta: serde_json::Value,
}

impl TraceRecord {
    pub fn from_trace(trace: &Trace, meta: serde_json::Value) -> Self {
        TraceRecord {
            labels: trace.steps().iter().map(|s| s.iter().cloned().collect()).collect(),
            meta,
        }
    }

    pub fn trace(&self) -> Trace {
        Trace::new(self.labels.iter().map(|s| s.iter().cloned().collect()).collect())
    }
}

/// Read every episode in a JSON Lines trace file. Blank lines are skipped and
/// traces labelling `end` before their last instant are rejected.
pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<(Trace, serde_json::Value)>, TraceError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TraceRecord =
            serde_json::from_str(&line).map_err(|source| TraceError::Json { line: i + 1, source })?;
        let trace = rec.trace();
        trace.check_end_contract()?;
        out.push((trace, rec.meta));
    }
    Ok(out)
}

pub fn write_jsonl<W: Write>(mut w: W, records: &[TraceRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
