//! Trend analytics over labeled corpora.
//!
//! - annual per-field publication series and growth rates ([`annual_counts`], [`growth_rate`]);
//! - the growth-share matrix, with each axis passed through a fitted
//!   Yeo-Johnson transform before quadrant assignment ([`matrix`]);
//! - innovation life-cycle positions ([`lifecycle`]).
//!
//! All outputs are ordered by field id so exports are byte-stable.

pub mod lifecycle;
pub mod matrix;
pub mod yeo_johnson;

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::corpus::PaperRecord;
use crate::error::{Error, Result};
use crate::taxonomy::Taxonomy;

pub use lifecycle::{lifecycle_components, lifecycle_points, lifecycle_points_with_base, LifecycleComponents, LifecyclePoint, LogBase};
pub use matrix::{classify_axes, growth_share_matrix, AxisClassification, MatrixPoint, MatrixResult, Quadrant, SplitRule};
pub use yeo_johnson::{fit_lambda, yeo_johnson, yj_log_likelihood, YjParams};

/// Analysis window `[end_year - length + 1, end_year]` inside the observation
/// period `[observation_start, end_year]`. Both ends are inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct WindowSpec {
    pub end_year: i32,
    pub length: u32,
    pub observation_start: i32,
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec {
            end_year: 2022,
            length: 5,
            observation_start: 1952,
        }
    }
}

impl WindowSpec {
    pub fn new(end_year: i32, length: u32, observation_start: i32) -> Result<Self> {
        let w = WindowSpec {
            end_year,
            length,
            observation_start,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if self.length < 1 {
            return Err(Error::Config("window length must be >= 1".into()));
        }
        if i64::from(self.observation_start) > i64::from(self.end_year) - i64::from(self.length) {
            return Err(Error::Config(format!(
                "observation start {} must be <= end year - window length ({})",
                self.observation_start,
                i64::from(self.end_year) - i64::from(self.length)
            )));
        }
        Ok(())
    }

    pub fn start_year(&self) -> i32 {
        self.end_year - self.length as i32 + 1
    }

    pub fn window_years(&self) -> RangeInclusive<i32> {
        self.start_year()..=self.end_year
    }

    pub fn observation_years(&self) -> RangeInclusive<i32> {
        self.observation_start..=self.end_year
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthFormula {
    /// `(c_end - c_start) / max(c_start, 1)`.
    #[default]
    Relative,
    /// Compound annual growth over the window, with the same zero guard on the start count.
    Cagr,
}

/// Dense per-year counts over the observation period.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnualSeries {
    pub field_id: String,
    pub counts: BTreeMap<i32, u64>,
}

impl AnnualSeries {
    pub fn zeros(field_id: impl Into<String>, window: &WindowSpec) -> Self {
        AnnualSeries {
            field_id: field_id.into(),
            counts: window.observation_years().map(|y| (y, 0)).collect(),
        }
    }

    pub fn from_counts(field_id: impl Into<String>, window: &WindowSpec, counts: &[(i32, u64)]) -> Self {
        let mut s = Self::zeros(field_id, window);
        for &(y, c) in counts {
            if let Some(slot) = s.counts.get_mut(&y) {
                *slot += c;
            }
        }
        s
    }

    pub fn count(&self, year: i32) -> u64 {
        self.counts.get(&year).copied().unwrap_or(0)
    }

    pub fn window_total(&self, window: &WindowSpec) -> u64 {
        window.window_years().map(|y| self.count(y)).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}

pub type SeriesMap = BTreeMap<String, AnnualSeries>;

/// Per-field publication counts for every taxonomy node. With `propagate`, a
/// record also counts once toward every ancestor of its labels. Records outside
/// the observation period are ignored.
pub fn annual_counts(
    records: &[PaperRecord],
    taxonomy: &Taxonomy,
    window: &WindowSpec,
    propagate: bool,
) -> Result<SeriesMap> {
    window.validate()?;
    let mut map: SeriesMap = taxonomy
        .ids()
        .map(|id| (id.to_string(), AnnualSeries::zeros(id, window)))
        .collect();
    let years = window.observation_years();
    for r in records {
        if !years.contains(&r.year) {
            continue;
        }
        let mut fields = std::collections::BTreeSet::new();
        for id in r.labels.ids() {
            if !taxonomy.contains(id) {
                return Err(Error::UnknownField(id.to_string()));
            }
            fields.insert(id);
            if propagate {
                fields.extend(taxonomy.ancestors(id)?);
            }
        }
        for f in fields {
            let series = map.get_mut(f).expect("series exist for every node");
            *series.counts.get_mut(&r.year).expect("dense years") += 1;
        }
    }
    Ok(map)
}

pub fn growth_rate(series: &AnnualSeries, window: &WindowSpec, formula: GrowthFormula) -> f64 {
    let start = series.count(window.start_year()) as f64;
    let end = series.count(window.end_year) as f64;
    let base = start.max(1.0);
    match formula {
        GrowthFormula::Relative => (end - start) / base,
        GrowthFormula::Cagr => {
            if window.length < 2 {
                0.0
            } else {
                (end / base).powf(1.0 / f64::from(window.length - 1)) - 1.0
            }
        }
    }
}

/// Fields by descending total, ties broken by ascending id.
pub fn rank_totals(totals: &BTreeMap<String, u64>) -> Vec<(String, u64)> {
    let mut v: Vec<(String, u64)> = totals.iter().map(|(k, &c)| (k.clone(), c)).collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v
}

pub fn series_totals(series: &SeriesMap, window: Option<&WindowSpec>) -> BTreeMap<String, u64> {
    series
        .iter()
        .map(|(k, s)| (k.clone(), window.map_or_else(|| s.total(), |w| s.window_total(w))))
        .collect()
}

/// Reads a pre-aggregated counts CSV: either `field_id,count` or the series
/// layout `field_id,year,count`. Counts for the same field are summed.
pub fn read_counts<R: Read>(reader: R) -> Result<BTreeMap<String, u64>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let field_col = col("field_id").ok_or_else(|| Error::Config("counts file needs a field_id column".into()))?;
    let count_col = col("count").ok_or_else(|| Error::Config("counts file needs a count column".into()))?;
    let mut out: BTreeMap<String, u64> = BTreeMap::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let field = row.get(field_col).unwrap_or("").trim().to_string();
        let raw = row.get(count_col).unwrap_or("").trim().replace([',', '_'], "");
        let count: u64 = raw.parse().map_err(|_| Error::Parse {
            line: i + 2,
            column: count_col + 1,
            message: format!("bad count `{raw}`"),
        })?;
        *out.entry(field).or_default() += count;
    }
    Ok(out)
}

pub fn write_series_csv<W: Write>(series: &SeriesMap, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["field_id", "year", "count"])?;
    for (id, s) in series {
        for (year, count) in &s.counts {
            w.write_record([id.as_str(), &year.to_string(), &count.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_ranking_csv<W: Write>(ranking: &[(String, u64)], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["rank", "field_id", "count"])?;
    for (i, (id, c)) in ranking.iter().enumerate() {
        w.write_record([(i + 1).to_string(), id.clone(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
