//! Positions of fields on the innovation life-cycle (logistic) curve.
//!
//! Each field gets three components over the analysis window:
//!
//! - `g`: its growth rate, min-max normalised across fields into `[1e-10, 1]`;
//! - `h`: window papers over the field's papers in the whole observation period;
//! - `k`: window papers over all fields' window papers.
//!
//! The raw position is `x = log((1/g) * (1/h) * k)`. Positions are min-max
//! normalised into `[-5, 5]` and mapped through the logistic function.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{growth_rate, GrowthFormula, SeriesMap, WindowSpec};
use crate::error::{Error, Result};

/// Lower bound for `g`, and floor for `h` and `k`.
pub const COMPONENT_FLOOR: f64 = 1e-10;
pub const X_NORM_MIN: f64 = -5.0;
pub const X_NORM_MAX: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifecycleComponents {
    pub field_id: String,
    pub g: f64,
    pub h: f64,
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifecyclePoint {
    pub field_id: String,
    pub g: f64,
    pub h: f64,
    pub k: f64,
    pub x: f64,
    pub x_norm: f64,
    pub y: f64,
}

/// Logarithm used for the raw position. Normalised positions do not depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogBase {
    #[default]
    Natural,
    Ten,
    Two,
}

impl LogBase {
    pub fn log(self, v: f64) -> f64 {
        match self {
            LogBase::Natural => v.ln(),
            LogBase::Ten => v.log10(),
            LogBase::Two => v.log2(),
        }
    }
}

pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Components for every field with at least one paper in the observation period.
///
/// When all growth rates are equal the normalisation is degenerate and every
/// field gets `g = 1`.
pub fn lifecycle_components(
    series: &SeriesMap,
    window: &WindowSpec,
    formula: GrowthFormula,
) -> Result<Vec<LifecycleComponents>> {
    window.validate()?;
    let active: Vec<_> = series.values().filter(|s| s.total() > 0).collect();
    let window_sum: u64 = active.iter().map(|s| s.window_total(window)).sum();
    if window_sum == 0 {
        return Err(Error::EmptyWindow(format!(
            "no papers in {}..={}",
            window.start_year(),
            window.end_year
        )));
    }
    let rates: Vec<f64> = active.iter().map(|s| growth_rate(s, window, formula)).collect();
    let lo = rates.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(active
        .iter()
        .zip(&rates)
        .map(|(s, &r)| {
            let g = if hi > lo {
                let t = (r - lo) / (hi - lo);
                t + (1.0 - t) * COMPONENT_FLOOR
            } else {
                1.0
            };
            let in_window = s.window_total(window) as f64;
            LifecycleComponents {
                field_id: s.field_id.clone(),
                g: g.clamp(COMPONENT_FLOOR, 1.0),
                h: (in_window / s.total() as f64).max(COMPONENT_FLOOR),
                k: (in_window / window_sum as f64).max(COMPONENT_FLOOR),
            }
        })
        .collect())
}

pub fn lifecycle_points(components: &[LifecycleComponents]) -> Result<Vec<LifecyclePoint>> {
    lifecycle_points_with_base(components, LogBase::Natural)
}

pub fn lifecycle_points_with_base(
    components: &[LifecycleComponents],
    base: LogBase,
) -> Result<Vec<LifecyclePoint>> {
    if components.len() < 2 {
        return Err(Error::NormalizationUndefined(format!(
            "life-cycle positions need at least 2 fields, got {}",
            components.len()
        )));
    }
    let xs: Vec<f64> = components
        .iter()
        .map(|c| base.log((1.0 / c.g) * (1.0 / c.h) * c.k))
        .collect();
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(Error::NormalizationUndefined(
            "all fields share the same raw position".into(),
        ));
    }
    Ok(components
        .iter()
        .zip(xs)
        .map(|(c, x)| {
            let x_norm = X_NORM_MIN + (x - lo) / (hi - lo) * (X_NORM_MAX - X_NORM_MIN);
            LifecyclePoint {
                field_id: c.field_id.clone(),
                g: c.g,
                h: c.h,
                k: c.k,
                x,
                x_norm,
                y: logistic(x_norm),
            }
        })
        .collect())
}

pub fn write_lifecycle_csv<W: Write>(points: &[LifecyclePoint], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["field_id", "g", "h", "k", "x", "x_norm", "y"])?;
    for p in points {
        w.write_record([
            p.field_id.clone(),
            p.g.to_string(),
            p.h.to_string(),
            p.k.to_string(),
            p.x.to_string(),
            p.x_norm.to_string(),
            p.y.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
