use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tunable knobs of the multimodal model and the greedy loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgorithmParams {
    /// Inverse decay speed in days (e-folding time of knowledge).
    pub decay_days: f64,
    /// Maximum effective meeting minutes credited per commit.
    pub mte_minutes: f64,
    pub fa_weight: f64,
    pub dl_weight: f64,
    pub rv_weight: f64,
    pub log_dl_weight: f64,
    pub log_rv_weight: f64,
    /// Absolute DOA an engineer needs to author a file (multimodal only).
    pub doa_threshold: f64,
    /// Fraction of the per-file maximum DOA an author must reach.
    pub norm_threshold: f64,
    /// The greedy loop keeps removing engineers while coverage is at least this.
    pub coverage_threshold: f64,
    pub meeting_window_days: u32,
    pub meeting_exclude_keywords: Vec<String>,
}

impl Default for AlgorithmParams {
    fn default() -> Self {
        Self {
            decay_days: 220.0,
            mte_minutes: 240.0,
            fa_weight: 3.0,
            dl_weight: 1.0,
            rv_weight: 0.5,
            log_dl_weight: 2.4,
            log_rv_weight: 1.2,
            doa_threshold: 1.0,
            norm_threshold: 0.75,
            coverage_threshold: 0.5,
            meeting_window_days: 7,
            meeting_exclude_keywords: vec![
                "seminar".to_owned(),
                "reading".to_owned(),
                "random".to_owned(),
            ],
        }
    }
}

fn invalid(name: &str, constraint: &str) -> Error {
    Error::InvalidParam {
        name: name.to_owned(),
        constraint: constraint.to_owned(),
    }
}

impl AlgorithmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.decay_days > 0.0 && self.decay_days.is_finite()) {
            return Err(invalid("decay_days", "must be a finite number > 0"));
        }
        if !(self.mte_minutes > 0.0 && self.mte_minutes.is_finite()) {
            return Err(invalid("mte_minutes", "must be a finite number > 0"));
        }
        if !(self.norm_threshold > 0.0 && self.norm_threshold <= 1.0) {
            return Err(invalid("norm_threshold", "must satisfy 0 < value <= 1"));
        }
        if !(self.coverage_threshold > 0.0 && self.coverage_threshold < 1.0) {
            return Err(invalid("coverage_threshold", "must satisfy 0 < value < 1"));
        }
        if !self.doa_threshold.is_finite() {
            return Err(invalid("doa_threshold", "must be finite"));
        }
        let weights = [
            ("fa_weight", self.fa_weight),
            ("dl_weight", self.dl_weight),
            ("rv_weight", self.rv_weight),
            ("log_dl_weight", self.log_dl_weight),
            ("log_rv_weight", self.log_rv_weight),
        ];
        for (name, w) in weights {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(invalid(name, "weights must be finite and >= 0"));
            }
        }
        if self
            .meeting_exclude_keywords
            .iter()
            .any(|k| k.is_empty() || *k != k.to_lowercase())
        {
            return Err(invalid(
                "meeting_exclude_keywords",
                "keywords must be non-empty and lowercase",
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let p = AlgorithmParams::default();
        p.validate().unwrap();
        assert_eq!(p.decay_days, 220.0);
        assert_eq!(p.mte_minutes, 240.0);
        assert_eq!(p.meeting_window_days, 7);
    }

    #[test]
    fn rejects_out_of_range() {
        type Mutation = Box<dyn Fn(&mut AlgorithmParams)>;
        let cases: Vec<(&str, Mutation)> = vec![
            ("decay_days", Box::new(|p| p.decay_days = 0.0)),
            ("mte_minutes", Box::new(|p| p.mte_minutes = -1.0)),
            ("norm_threshold", Box::new(|p| p.norm_threshold = 1.5)),
            ("coverage_threshold", Box::new(|p| p.coverage_threshold = 1.0)),
            ("rv_weight", Box::new(|p| p.rv_weight = -0.1)),
            (
                "meeting_exclude_keywords",
                Box::new(|p| p.meeting_exclude_keywords = vec!["Seminar".into()]),
            ),
        ];
        for (name, mutate) in cases {
            let mut p = AlgorithmParams::default();
            mutate(&mut p);
            match p.validate() {
                Err(Error::InvalidParam { name: n, .. }) => assert_eq!(n, name),
                other => panic!("{name}: expected InvalidParam, got {other:?}"),
            }
        }
    }
}
