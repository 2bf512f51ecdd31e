use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::engine::Algorithm;
use crate::identity::EngineerId;
use crate::params::AlgorithmParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileReport {
    pub path: String,
    pub authors: Vec<EngineerId>,
    /// Highest raw DOA on the file; `null` when nobody has activity on it.
    pub top_doa: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineerReport {
    pub id: EngineerId,
    pub names: Vec<String>,
    pub emails: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub project: String,
    pub branch: String,
    pub as_of: String,
    pub algorithm: Algorithm,
    pub bus_factor: usize,
    pub key_engineers: Vec<EngineerId>,
    pub coverage_trace: Vec<f64>,
    pub file_count: usize,
    pub files: Vec<FileReport>,
    pub params: AlgorithmParams,
    pub warnings: Vec<String>,
    /// Aliases of the key engineers, in removal order.
    pub engineers: Vec<EngineerReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub multimodal: Report,
    pub baseline: Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
#[allow(clippy::large_enum_variant)]
pub enum ReportDocument {
    Both(Comparison),
    Single(Report),
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization is infallible");
    s.push('\n');
    s
}

fn render_report(out: &mut String, r: &Report) {
    let _ = writeln!(out, "project:     {}", r.project);
    let _ = writeln!(out, "branch:      {}", r.branch);
    let _ = writeln!(out, "as of:       {}", r.as_of);
    let _ = writeln!(out, "algorithm:   {}", r.algorithm);
    let _ = writeln!(out, "files:       {}", r.file_count);
    let _ = writeln!(out, "bus factor:  {}", r.bus_factor);
    if !r.key_engineers.is_empty() {
        let _ = writeln!(out, "key engineers:");
        for (i, (id, cov)) in r.key_engineers.iter().zip(&r.coverage_trace).enumerate() {
            let names = r
                .engineers
                .iter()
                .find(|e| &e.id == id)
                .map(|e| e.names.join(", "))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "  {:>2}. {id:<32} {names:<24} coverage after removal {:.1}%",
                i + 1,
                cov * 100.0
            );
        }
    }
    let abandoned = r.files.iter().filter(|f| f.authors.is_empty()).count();
    let _ = writeln!(out, "files without authors: {abandoned}");
    for w in &r.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
}

pub fn render_text(doc: &ReportDocument) -> String {
    let mut out = String::new();
    match doc {
        ReportDocument::Single(r) => render_report(&mut out, r),
        ReportDocument::Both(c) => {
            render_report(&mut out, &c.multimodal);
            out.push('\n');
            render_report(&mut out, &c.baseline);
        }
    }
    out
}
