//! Growth-share matrix: window growth rate against window publication total.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::yeo_johnson::{fit_lambda, yeo_johnson, YjParams};
use super::{growth_rate, GrowthFormula, SeriesMap, WindowSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quadrant {
    /// High growth, high total.
    TrendingStar,
    /// Low growth, high total.
    Foundational,
    /// High growth, low total.
    RisingQuestionMark,
    /// Low growth, low total.
    Niche,
}

impl Quadrant {
    pub fn from_split(high_growth: bool, high_total: bool) -> Self {
        match (high_growth, high_total) {
            (true, true) => Quadrant::TrendingStar,
            (false, true) => Quadrant::Foundational,
            (true, false) => Quadrant::RisingQuestionMark,
            (false, false) => Quadrant::Niche,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Quadrant::TrendingStar => "trending-star",
            Quadrant::Foundational => "foundational",
            Quadrant::RisingQuestionMark => "rising-question-mark",
            Quadrant::Niche => "niche",
        }
    }
}

impl fmt::Display for Quadrant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where each transformed axis is split into high and low. Values strictly
/// above the split point are high.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitRule {
    #[default]
    Median,
    Mean,
}

impl SplitRule {
    pub fn split_point(self, values: &[f64]) -> f64 {
        match self {
            SplitRule::Median => median(values),
            SplitRule::Mean => values.iter().sum::<f64>() / values.len() as f64,
        }
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixPoint {
    pub field_id: String,
    pub raw_growth: f64,
    pub raw_total: u64,
    pub tf_growth: f64,
    pub tf_total: f64,
    pub quadrant: Quadrant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixResult {
    pub points: Vec<MatrixPoint>,
    pub growth_params: YjParams,
    pub total_params: YjParams,
    pub split: SplitRule,
    pub growth_split: f64,
    pub total_split: f64,
}

/// Transformed coordinates and quadrants for raw axis values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisClassification {
    pub tf_growth: Vec<f64>,
    pub tf_total: Vec<f64>,
    pub quadrants: Vec<Quadrant>,
    pub growth_params: YjParams,
    pub total_params: YjParams,
    pub growth_split: f64,
    pub total_split: f64,
}

/// Fits a Yeo-Johnson parameter per axis, transforms both axes and splits each
/// at its split point. `growth[i]` and `totals[i]` belong to the same field.
pub fn classify_axes(growth: &[f64], totals: &[f64], split: SplitRule, bounds: &YjParams) -> Result<AxisClassification> {
    if growth.len() != totals.len() {
        return Err(Error::Config(format!(
            "axis lengths differ: {} growth values, {} totals",
            growth.len(),
            totals.len()
        )));
    }
    let growth_params = fit_lambda(growth, bounds)?;
    let total_params = fit_lambda(totals, bounds)?;
    let tf_growth: Vec<f64> = growth.iter().map(|&g| yeo_johnson(g, growth_params.lambda)).collect();
    let tf_total: Vec<f64> = totals.iter().map(|&t| yeo_johnson(t, total_params.lambda)).collect();
    let growth_split = split.split_point(&tf_growth);
    let total_split = split.split_point(&tf_total);
    let quadrants = tf_growth
        .iter()
        .zip(&tf_total)
        .map(|(&g, &t)| Quadrant::from_split(g > growth_split, t > total_split))
        .collect();
    Ok(AxisClassification {
        tf_growth,
        tf_total,
        quadrants,
        growth_params,
        total_params,
        growth_split,
        total_split,
    })
}

/// Builds the matrix for every field with a non-zero window total.
///
/// Each axis gets its own fitted Yeo-Johnson parameter; quadrants compare the
/// transformed coordinates against the split point of that axis.
pub fn growth_share_matrix(
    series: &SeriesMap,
    window: &WindowSpec,
    formula: GrowthFormula,
    split: SplitRule,
    bounds: &YjParams,
) -> Result<MatrixResult> {
    window.validate()?;
    let active: Vec<_> = series
        .values()
        .filter(|s| s.window_total(window) > 0)
        .collect();
    if active.len() < 3 {
        return Err(Error::Degenerate(format!(
            "growth-share matrix needs at least 3 fields with papers in the window, got {}",
            active.len()
        )));
    }
    let growth: Vec<f64> = active.iter().map(|s| growth_rate(s, window, formula)).collect();
    let totals: Vec<u64> = active.iter().map(|s| s.window_total(window)).collect();
    let totals_f: Vec<f64> = totals.iter().map(|&t| t as f64).collect();
    let axes = classify_axes(&growth, &totals_f, split, bounds)?;

    let points = active
        .iter()
        .enumerate()
        .map(|(i, s)| MatrixPoint {
            field_id: s.field_id.clone(),
            raw_growth: growth[i],
            raw_total: totals[i],
            tf_growth: axes.tf_growth[i],
            tf_total: axes.tf_total[i],
            quadrant: axes.quadrants[i],
        })
        .collect();
    Ok(MatrixResult {
        points,
        growth_params: axes.growth_params,
        total_params: axes.total_params,
        split,
        growth_split: axes.growth_split,
        total_split: axes.total_split,
    })
}

pub fn write_matrix_csv<W: Write>(points: &[MatrixPoint], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["field_id", "raw_growth", "raw_total", "tf_growth", "tf_total", "quadrant"])?;
    for p in points {
        w.write_record([
            p.field_id.clone(),
            p.raw_growth.to_string(),
            p.raw_total.to_string(),
            p.tf_growth.to_string(),
            p.tf_total.to_string(),
            p.quadrant.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
