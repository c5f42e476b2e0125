//! JSON-lines audit report: a header, one line per check, then a summary.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::verdict::{BlameTag, ErrorCode, Outcome};

pub const HEADER_NOTE: &str = "preconditions use dynamic-chain disjunction";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Entry,
    Exit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AuditRecord {
    pub seq: u64,
    pub phase: Phase,
    /// `Class::method` as seen at the event (runtime class).
    pub context: String,
    /// `inv`, `pre` or `post`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub expr: String,
    pub verdict: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_code: Option<ErrorCode>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blame: Option<BlameTag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object_id: Option<u64>,
    pub frame_id: u64,
    /// One clause of a multi-group precondition; the combined record that
    /// follows carries the effective verdict and alone counts in the summary.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub member: bool,
    /// On exit postconditions: the effective precondition verdict at entry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pre_verdict: Option<Outcome>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AuditSummary {
    pub pass: u64,
    pub fail: u64,
    pub error: u64,
    pub records: u64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub members: u64,
    /// The session ended before the VM reported its death.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub incomplete: bool,
    /// The auditor disconnected early after a failure.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub stopped_early: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exit_status: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vm_error: Option<String>,
    /// Evaluations after which the heap digest differed (purity check on).
    #[serde(default, skip_serializing_if = "is_zero")]
    pub digest_mismatches: u64,
}

fn is_zero(n: &u64) -> bool {
    *n == 0
}

impl AuditSummary {
    fn count(&mut self, r: &AuditRecord) {
        if r.member {
            self.members += 1;
            return;
        }
        self.records += 1;
        match r.verdict {
            Outcome::Pass => self.pass += 1,
            Outcome::Fail => self.fail += 1,
            Outcome::Error => self.error += 1,
        }
    }
}

pub struct ReportWriter<W: Write> {
    out: W,
    next_seq: u64,
    summary: AuditSummary,
}

impl<W: Write> ReportWriter<W> {
    pub fn new(out: W) -> Self {
        ReportWriter {
            out,
            next_seq: 1,
            summary: AuditSummary::default(),
        }
    }

    pub fn header(&mut self, constraints: &str, target: &str) -> io::Result<()> {
        let line = serde_json::json!({
            "type": "header",
            "constraints": constraints,
            "target": target,
            "note": HEADER_NOTE,
        });
        self.line(&line)
    }

    /// Writes a record, assigning its sequence number.
    pub fn record(&mut self, mut r: AuditRecord) -> io::Result<AuditRecord> {
        r.seq = self.next_seq;
        self.next_seq += 1;
        self.line(&r)?;
        self.summary.count(&r);
        Ok(r)
    }

    pub fn summary(&self) -> &AuditSummary {
        &self.summary
    }

    pub fn summary_mut(&mut self) -> &mut AuditSummary {
        &mut self.summary
    }

    /// Writes the summary line and hands back the sink.
    pub fn finish(mut self) -> io::Result<(AuditSummary, W)> {
        let mut v = serde_json::to_value(&self.summary).map_err(io::Error::other)?;
        if let serde_json::Value::Object(m) = &mut v {
            let mut with_type = serde_json::Map::new();
            with_type.insert("type".into(), "summary".into());
            with_type.extend(std::mem::take(m));
            *m = with_type;
        }
        self.line(&v)?;
        Ok((self.summary, self.out))
    }

    fn line(&mut self, v: &impl Serialize) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, v).map_err(io::Error::other)?;
        self.out.write_all(b"\n")?;
        self.out.flush()
    }
}

/// A parsed report line.
#[derive(Debug, Clone, PartialEq)]
pub enum ReportLine {
    Header(serde_json::Value),
    Record(AuditRecord),
    Summary(AuditSummary),
}

pub fn parse_report(text: &str) -> Result<Vec<ReportLine>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l)?;
            Ok(match v.get("type").and_then(|t| t.as_str()) {
                Some("header") => ReportLine::Header(v),
                Some("summary") => ReportLine::Summary(serde_json::from_value(v)?),
                _ => ReportLine::Record(serde_json::from_value(v)?),
            })
        })
        .collect()
}
