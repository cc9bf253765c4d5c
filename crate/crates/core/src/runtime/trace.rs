//! Append-only run trace with CSV and JSON-lines codecs.

use std::fmt;
use std::io::{BufRead, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceKind {
    Tick,
    Injection,
    Percept,
    RuleFired,
    MessageSent,
    MessageDelivered,
    EnvEffect,
    EnvOverwrite,
    RoleUpdate,
    ObligationOpened,
    ObligationSettled,
    ObligationViolated,
    Error,
}

impl TraceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceKind::Tick => "tick",
            TraceKind::Injection => "injection",
            TraceKind::Percept => "percept",
            TraceKind::RuleFired => "rule-fired",
            TraceKind::MessageSent => "message-sent",
            TraceKind::MessageDelivered => "message-delivered",
            TraceKind::EnvEffect => "env-effect",
            TraceKind::EnvOverwrite => "env-overwrite",
            TraceKind::RoleUpdate => "role-update",
            TraceKind::ObligationOpened => "obligation-opened",
            TraceKind::ObligationSettled => "obligation-settled",
            TraceKind::ObligationViolated => "obligation-violated",
            TraceKind::Error => "error",
        }
    }
}

impl fmt::Display for TraceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub tick: u64,
    pub seq: u64,
    pub kind: TraceKind,
    pub agent: String,
    pub detail: String,
    pub degree: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceFormat {
    #[default]
    Csv,
    JsonLines,
}

impl FromStr for TraceFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(TraceFormat::Csv),
            "jsonl" | "json-lines" => Ok(TraceFormat::JsonLines),
            other => Err(format!("unknown trace format `{other}` (expected csv or jsonl)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    records: Vec<TraceRecord>,
}

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a record; sequence numbers count up from 0 over the run.
    pub fn push(&mut self, tick: u64, kind: TraceKind, agent: impl Into<String>, detail: impl Into<String>, degree: Option<f64>) {
        let seq = self.records.len() as u64;
        self.records.push(TraceRecord {
            tick,
            seq,
            kind,
            agent: agent.into(),
            detail: detail.into(),
            degree,
        });
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn of_kind(&self, kind: TraceKind) -> impl Iterator<Item = &TraceRecord> {
        self.records.iter().filter(move |r| r.kind == kind)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), TraceError> {
        let mut w = csv::Writer::from_writer(out);
        if self.records.is_empty() {
            w.write_record(["tick", "seq", "kind", "agent", "detail", "degree"])?;
        }
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, TraceError> {
        let mut r = csv::Reader::from_reader(input);
        let records = r.deserialize().collect::<Result<Vec<TraceRecord>, _>>()?;
        Ok(Self { records })
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<(), TraceError> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r).map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, TraceError> {
        let mut records = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            records.push(serde_json::from_str(&line).map_err(|source| TraceError::Json { line: i + 1, source })?);
        }
        Ok(Self { records })
    }

    pub fn to_bytes(&self, format: TraceFormat) -> Result<Vec<u8>, TraceError> {
        let mut buf = Vec::new();
        match format {
            TraceFormat::Csv => self.write_csv(&mut buf)?,
            TraceFormat::JsonLines => self.write_jsonl(&mut buf)?,
        }
        Ok(buf)
    }

    pub fn from_bytes(bytes: &[u8], format: TraceFormat) -> Result<Self, TraceError> {
        match format {
            TraceFormat::Csv => Self::read_csv(bytes),
            TraceFormat::JsonLines => Self::read_jsonl(bytes),
        }
    }
}
