use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::EntityType;

use super::{EntitySpan, EvalError};

/// How a predicted span is credited against gold spans.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatchMode {
    /// Type, start and end must all agree.
    #[default]
    Strict,
    /// Type and first token must agree; the end is ignored.
    FirstToken,
}

impl MatchMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MatchMode::Strict => "strict",
            MatchMode::FirstToken => "first-token",
        }
    }
}

impl FromStr for MatchMode {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(MatchMode::Strict),
            "first-token" => Ok(MatchMode::FirstToken),
            other => Err(EvalError::Argument(format!("unknown match mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Counts {
    pub fn add(&mut self, other: Counts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    pub fn prf(&self) -> Prf {
        let precision = ratio(self.tp, self.tp + self.fp);
        let recall = ratio(self.tp, self.tp + self.fn_);
        Prf {
            precision,
            recall,
            f1: f1_score(precision, recall),
        }
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Micro counts overall and per entity type.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub per_type: BTreeMap<EntityType, Counts>,
    pub overall: Counts,
}

fn match_counts(
    gold: &[EntitySpan],
    predicted: &[EntitySpan],
    mode: MatchMode,
) -> BTreeMap<EntityType, Counts> {
    let mut out: BTreeMap<EntityType, Counts> = EntityType::ALL
        .iter()
        .map(|&t| (t, Counts::default()))
        .collect();
    let mut used = vec![false; gold.len()];
    for p in predicted {
        let hit = gold.iter().enumerate().position(|(i, g)| {
            !used[i]
                && g.entity_type == p.entity_type
                && g.start == p.start
                && (mode == MatchMode::FirstToken || g.end == p.end)
        });
        let c = out.get_mut(&p.entity_type).unwrap();
        match hit {
            Some(i) => {
                used[i] = true;
                c.tp += 1;
            }
            None => c.fp += 1,
        }
    }
    for (g, u) in gold.iter().zip(used) {
        if !u {
            out.get_mut(&g.entity_type).unwrap().fn_ += 1;
        }
    }
    out
}

/// Entity-level TP/FP/FN over aligned sentences.
pub fn entity_counts(
    gold: &[Vec<EntitySpan>],
    predicted: &[Vec<EntitySpan>],
    mode: MatchMode,
) -> Result<ConfusionCounts, EvalError> {
    if gold.len() != predicted.len() {
        return Err(EvalError::Length {
            gold: gold.len(),
            predicted: predicted.len(),
        });
    }
    let mut cc = ConfusionCounts {
        per_type: EntityType::ALL
            .iter()
            .map(|&t| (t, Counts::default()))
            .collect(),
        overall: Counts::default(),
    };
    for (g, p) in gold.iter().zip(predicted) {
        for (ty, c) in match_counts(g, p, mode) {
            cc.per_type.get_mut(&ty).unwrap().add(c);
            cc.overall.add(c);
        }
    }
    Ok(cc)
}

/// Evaluation summary for one model on one dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub model: String,
    pub match_mode: MatchMode,
    pub overall: Prf,
    pub per_type: BTreeMap<EntityType, Prf>,
    pub counts: ConfusionCounts,
    pub token_accuracy_masked: Option<f64>,
    pub token_accuracy_unmasked: Option<f64>,
}

impl MetricsReport {
    pub fn from_counts(
        model: impl Into<String>,
        match_mode: MatchMode,
        counts: ConfusionCounts,
    ) -> Self {
        MetricsReport {
            model: model.into(),
            match_mode,
            overall: counts.overall.prf(),
            per_type: counts.per_type.iter().map(|(t, c)| (*t, c.prf())).collect(),
            counts,
            token_accuracy_masked: None,
            token_accuracy_unmasked: None,
        }
    }

    /// `key<TAB>value` lines with stable key names.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| writeln!(out, "{k}\t{v}").unwrap();
        kv("model", self.model.clone());
        kv("match_mode", self.match_mode.as_str().into());
        kv("precision", format!("{}", self.overall.precision));
        kv("recall", format!("{}", self.overall.recall));
        kv("f1", format!("{}", self.overall.f1));
        kv("tp", self.counts.overall.tp.to_string());
        kv("fp", self.counts.overall.fp.to_string());
        kv("fn", self.counts.overall.fn_.to_string());
        for (ty, prf) in &self.per_type {
            let c = self.counts.per_type.get(ty).copied().unwrap_or_default();
            kv(
                &format!("per_type.{ty}.precision"),
                format!("{}", prf.precision),
            );
            kv(&format!("per_type.{ty}.recall"), format!("{}", prf.recall));
            kv(&format!("per_type.{ty}.f1"), format!("{}", prf.f1));
            kv(&format!("per_type.{ty}.tp"), c.tp.to_string());
            kv(&format!("per_type.{ty}.fp"), c.fp.to_string());
            kv(&format!("per_type.{ty}.fn"), c.fn_.to_string());
        }
        if let Some(a) = self.token_accuracy_masked {
            kv("token_accuracy.masked", format!("{a}"));
        }
        if let Some(a) = self.token_accuracy_unmasked {
            kv("token_accuracy.unmasked", format!("{a}"));
        }
        out
    }
}

/// Fraction of matching tags. `masked` counts only the first `lengths[i]`
/// positions of each sentence; otherwise every position counts.
pub fn token_accuracy(
    gold: &[Vec<usize>],
    predicted: &[Vec<usize>],
    lengths: &[usize],
    masked: bool,
) -> Result<f64, EvalError> {
    if gold.len() != predicted.len() || gold.len() != lengths.len() {
        return Err(EvalError::Length {
            gold: gold.len(),
            predicted: predicted.len(),
        });
    }
    let mut correct = 0usize;
    let mut total = 0usize;
    for ((g, p), &len) in gold.iter().zip(predicted).zip(lengths) {
        if g.len() != p.len() || len > g.len() {
            return Err(EvalError::Misaligned(format!(
                "gold {} / predicted {} / length {len}",
                g.len(),
                p.len()
            )));
        }
        let n = if masked { len } else { g.len() };
        correct += g[..n].iter().zip(&p[..n]).filter(|(a, b)| a == b).count();
        total += n;
    }
    Ok(if total == 0 {
        0.0
    } else {
        correct as f64 / total as f64
    })
}
