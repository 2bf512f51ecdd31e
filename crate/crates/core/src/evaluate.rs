//! Comparison of predictions against human estimates.
//!
//! Bus-factor error is measured against the mean of the respondents'
//! estimates for each project. Key-engineer precision and recall are
//! micro-averaged: every (project, engineer) decision is pooled.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::report::Report;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthProject {
    pub name: String,
    pub estimates: Vec<u32>,
    /// Union of the engineers named by respondents (names or emails).
    pub key_engineers: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruth {
    pub projects: Vec<TruthProject>,
}

impl GroundTruth {
    pub fn validate(&self) -> std::result::Result<(), String> {
        for p in &self.projects {
            if p.estimates.is_empty() {
                return Err(format!("project `{}` has no bus factor estimates", p.name));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlainPrediction {
    pub name: String,
    pub bus_factor: usize,
    pub key_engineers: Vec<String>,
}

/// Accepted prediction documents: a plain project list, or analyze reports.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum PredictionsFile {
    Plain { projects: Vec<PlainPrediction> },
    Reports(Vec<Report>),
    Report(Box<Report>),
}

/// A predicted key engineer with every alias it may be named by.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictedEngineer {
    pub aliases: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prediction {
    pub name: String,
    pub bus_factor: usize,
    pub key_engineers: Vec<PredictedEngineer>,
}

fn norm(s: &str) -> String {
    s.trim().to_lowercase()
}

impl PredictedEngineer {
    pub fn named(alias: &str) -> Self {
        Self {
            aliases: BTreeSet::from([norm(alias)]),
        }
    }
}

impl From<&Report> for Prediction {
    fn from(r: &Report) -> Self {
        let key_engineers = r
            .key_engineers
            .iter()
            .map(|id| {
                let mut aliases = BTreeSet::from([norm(id.as_str())]);
                if let Some(e) = r.engineers.iter().find(|e| &e.id == id) {
                    aliases.extend(e.names.iter().chain(&e.emails).map(|a| norm(a)));
                }
                PredictedEngineer { aliases }
            })
            .collect();
        Self {
            name: r.project.clone(),
            bus_factor: r.bus_factor,
            key_engineers,
        }
    }
}

impl PredictionsFile {
    pub fn into_predictions(self) -> Vec<Prediction> {
        match self {
            PredictionsFile::Plain { projects } => projects
                .into_iter()
                .map(|p| Prediction {
                    key_engineers: p.key_engineers.iter().map(|k| PredictedEngineer::named(k)).collect(),
                    name: p.name,
                    bus_factor: p.bus_factor,
                })
                .collect(),
            PredictionsFile::Reports(reports) => reports.iter().map(Prediction::from).collect(),
            PredictionsFile::Report(report) => vec![Prediction::from(report.as_ref())],
        }
    }
}

pub fn load_predictions(path: &Path) -> Result<Vec<Prediction>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::input(path, e))?;
    let file: PredictionsFile = serde_json::from_str(&text)
        .map_err(|e| Error::input(path, format!("not a predictions document or report: {e}")))?;
    Ok(file.into_predictions())
}

pub fn load_truth(path: &Path) -> Result<GroundTruth> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::input(path, e))?;
    let truth: GroundTruth = serde_json::from_str(&text).map_err(|e| Error::input(path, e))?;
    truth.validate().map_err(|e| Error::input(path, e))?;
    Ok(truth)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectDelta {
    pub name: String,
    pub predicted: usize,
    pub target: f64,
    /// `predicted − target`
    pub delta: f64,
    pub matched_predicted: usize,
    pub predicted_key_engineers: usize,
    pub matched_truth: usize,
    pub truth_key_engineers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub projects_evaluated: usize,
    pub mae: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub projects: Vec<ProjectDelta>,
    pub warnings: Vec<String>,
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn evaluate(predictions: &[Prediction], truth: &GroundTruth) -> Result<EvaluationReport> {
    let mut warnings = Vec::new();
    let truth_by_name: BTreeMap<&str, &TruthProject> =
        truth.projects.iter().map(|p| (p.name.as_str(), p)).collect();
    let mut preds_by_name: BTreeMap<&str, &Prediction> = BTreeMap::new();
    for p in predictions {
        if preds_by_name.insert(p.name.as_str(), p).is_some() {
            warnings.push(format!("duplicate prediction for `{}`, the last one is used", p.name));
        }
    }

    let mut projects = Vec::new();
    for (name, pred) in &preds_by_name {
        let Some(t) = truth_by_name.get(name) else {
            warnings.push(format!("project `{name}` has no ground truth, excluded"));
            continue;
        };
        if t.estimates.is_empty() {
            return Err(Error::Evaluation(format!("project `{name}` has no estimates")));
        }
        let target = t.estimates.iter().map(|&e| f64::from(e)).sum::<f64>() / t.estimates.len() as f64;
        let truth_set: BTreeSet<String> = t.key_engineers.iter().map(|k| norm(k)).collect();
        let matched_predicted = pred
            .key_engineers
            .iter()
            .filter(|e| !e.aliases.is_disjoint(&truth_set))
            .count();
        let matched_truth = truth_set
            .iter()
            .filter(|k| pred.key_engineers.iter().any(|e| e.aliases.contains(*k)))
            .count();
        projects.push(ProjectDelta {
            name: name.to_string(),
            predicted: pred.bus_factor,
            target,
            delta: pred.bus_factor as f64 - target,
            matched_predicted,
            predicted_key_engineers: pred.key_engineers.len(),
            matched_truth,
            truth_key_engineers: truth_set.len(),
        });
    }
    for name in truth_by_name.keys() {
        if !preds_by_name.contains_key(name) {
            warnings.push(format!("project `{name}` has no prediction, excluded"));
        }
    }
    if projects.is_empty() {
        return Err(Error::Evaluation(
            "no project appears in both predictions and ground truth".to_owned(),
        ));
    }

    let mae = projects.iter().map(|p| p.delta.abs()).sum::<f64>() / projects.len() as f64;
    let sum = |f: fn(&ProjectDelta) -> usize| projects.iter().map(f).sum::<usize>();
    let precision = ratio(sum(|p| p.matched_predicted), sum(|p| p.predicted_key_engineers));
    let recall = ratio(sum(|p| p.matched_truth), sum(|p| p.truth_key_engineers));
    Ok(EvaluationReport {
        projects_evaluated: projects.len(),
        mae,
        precision,
        recall,
        f1: f1_score(precision, recall),
        projects,
        warnings,
    })
}

pub fn render_text(r: &EvaluationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "projects evaluated: {}", r.projects_evaluated);
    let _ = writeln!(out, "bus factor MAE:     {:.3}", r.mae);
    let _ = writeln!(
        out,
        "key engineers:      P {:.3}  R {:.3}  F1 {:.3}",
        r.precision, r.recall, r.f1
    );
    for p in &r.projects {
        let _ = writeln!(
            out,
            "  {:<24} predicted {:>3}  target {:>6.2}  delta {:>+7.2}",
            p.name, p.predicted, p.target, p.delta
        );
    }
    for w in &r.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}
