//! Micro-averaged precision, recall and F1 for multi-label predictions.
//!
//! Counts are pooled over every (record, field) pair. A ratio whose
//! denominator is zero is reported as 0 and flagged as undefined.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Record id to field-id set.
pub type LabelMap = BTreeMap<String, BTreeSet<String>>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub precision_defined: bool,
    pub recall_defined: bool,
}

impl Prf {
    pub fn from_counts(tp: u64, fp: u64, fn_: u64) -> Self {
        let ratio = |num: u64, den: u64| {
            if den == 0 {
                (0.0, false)
            } else {
                (num as f64 / den as f64, true)
            }
        };
        let (precision, precision_defined) = ratio(tp, tp + fp);
        let (recall, recall_defined) = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Prf {
            precision,
            recall,
            f1,
            tp,
            fp,
            fn_,
            precision_defined,
            recall_defined,
        }
    }
}

fn check_ids(gold: &LabelMap, pred: &LabelMap) -> Result<()> {
    let only_gold: Vec<String> = gold.keys().filter(|k| !pred.contains_key(*k)).cloned().collect();
    let only_pred: Vec<String> = pred.keys().filter(|k| !gold.contains_key(*k)).cloned().collect();
    if only_gold.is_empty() && only_pred.is_empty() {
        Ok(())
    } else {
        Err(Error::IdMismatch { only_gold, only_pred })
    }
}

#[derive(Default, Clone, Copy)]
struct Counts {
    tp: u64,
    fp: u64,
    fn_: u64,
}

fn class_counts(gold: &LabelMap, pred: &LabelMap) -> BTreeMap<String, Counts> {
    let mut out: BTreeMap<String, Counts> = BTreeMap::new();
    for (id, g) in gold {
        let p = &pred[id];
        for f in g.union(p) {
            let c = out.entry(f.clone()).or_default();
            match (g.contains(f), p.contains(f)) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (true, false) => c.fn_ += 1,
                (false, false) => unreachable!(),
            }
        }
    }
    out
}

pub fn micro_prf(gold: &LabelMap, pred: &LabelMap) -> Result<Prf> {
    check_ids(gold, pred)?;
    let total = class_counts(gold, pred)
        .into_values()
        .fold(Counts::default(), |a, c| Counts {
            tp: a.tp + c.tp,
            fp: a.fp + c.fp,
            fn_: a.fn_ + c.fn_,
        });
    Ok(Prf::from_counts(total.tp, total.fp, total.fn_))
}

/// Fields that are neither gold nor predicted anywhere are absent.
pub fn per_class_prf(gold: &LabelMap, pred: &LabelMap) -> Result<BTreeMap<String, Prf>> {
    check_ids(gold, pred)?;
    Ok(class_counts(gold, pred)
        .into_iter()
        .map(|(f, c)| (f, Prf::from_counts(c.tp, c.fp, c.fn_)))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_records: usize,
    pub micro: Prf,
    pub per_class: BTreeMap<String, Prf>,
}

impl EvalReport {
    pub fn compute(gold: &LabelMap, pred: &LabelMap) -> Result<Self> {
        Ok(EvalReport {
            n_records: gold.len(),
            micro: micro_prf(gold, pred)?,
            per_class: per_class_prf(gold, pred)?,
        })
    }

    pub fn to_text(&self) -> String {
        let width = self
            .per_class
            .keys()
            .map(|k| k.len())
            .max()
            .unwrap_or(0)
            .max("micro".len());
        let mut s = format!("records: {}\n\n", self.n_records);
        s.push_str(&format!(
            "{:<width$}  {:>9}  {:>9}  {:>9}  {:>6}  {:>6}  {:>6}\n",
            "field", "precision", "recall", "f1", "tp", "fp", "fn"
        ));
        let row = |name: &str, p: &Prf| {
            let mark = |v: f64, defined: bool| {
                if defined {
                    format!("{v:.4}")
                } else {
                    format!("{v:.4}*")
                }
            };
            format!(
                "{:<width$}  {:>9}  {:>9}  {:>9.4}  {:>6}  {:>6}  {:>6}\n",
                name,
                mark(p.precision, p.precision_defined),
                mark(p.recall, p.recall_defined),
                p.f1,
                p.tp,
                p.fp,
                p.fn_
            )
        };
        for (f, p) in &self.per_class {
            s.push_str(&row(f, p));
        }
        s.push_str(&row("micro", &self.micro));
        s.push_str("\n* undefined (zero denominator), reported as 0\n");
        s
    }
}
