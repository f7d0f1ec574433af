//! Yeo-Johnson power transform and maximum-likelihood estimation of its parameter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this distance from the singular points, the log-form series is used.
const NEAR_SINGULAR: f64 = 1e-3;

/// Yeo-Johnson transform of `y` for parameter `lambda`. Total over the reals.
pub fn yeo_johnson(y: f64, lambda: f64) -> f64 {
    if y == 0.0 {
        // every branch is zero here; avoid printing a signed zero
        0.0
    } else if y > 0.0 {
        if lambda == 0.0 {
            y.ln_1p()
        } else if lambda.abs() < NEAR_SINGULAR {
            (lambda * y.ln_1p()).exp_m1() / lambda
        } else {
            ((y + 1.0).powf(lambda) - 1.0) / lambda
        }
    } else {
        let p = 2.0 - lambda;
        if lambda == 2.0 {
            -(-y).ln_1p()
        } else if p.abs() < NEAR_SINGULAR {
            -(p * (-y).ln_1p()).exp_m1() / p
        } else {
            -((1.0 - y).powf(p) - 1.0) / p
        }
    }
}

/// Normal-theory profile log-likelihood of `lambda` for `data`.
///
/// `-(m/2) ln(var) + (lambda - 1) * sum(sign(y) ln(|y| + 1))`, with the
/// population variance of the transformed data. Returns `-inf` when the
/// transformed variance is zero or not finite.
pub fn yj_log_likelihood(data: &[f64], lambda: f64) -> f64 {
    let m = data.len() as f64;
    let transformed: Vec<f64> = data.iter().map(|&y| yeo_johnson(y, lambda)).collect();
    let mean = transformed.iter().sum::<f64>() / m;
    let var = transformed.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / m;
    if !(var.is_finite() && var > 0.0) {
        return f64::NEG_INFINITY;
    }
    let jacobian: f64 = data.iter().map(|&y| y.signum() * y.abs().ln_1p()).sum();
    -0.5 * m * var.ln() + (lambda - 1.0) * jacobian
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YjParams {
    pub lambda: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub tolerance: f64,
}

impl Default for YjParams {
    fn default() -> Self {
        YjParams {
            lambda: 1.0,
            lambda_min: -5.0,
            lambda_max: 5.0,
            tolerance: 1e-6,
        }
    }
}

impl YjParams {
    pub fn with_bounds(lambda_min: f64, lambda_max: f64) -> Self {
        YjParams {
            lambda_min,
            lambda_max,
            ..Self::default()
        }
    }
}

const COARSE_STEPS: usize = 200;

/// Fits `lambda` by maximising [`yj_log_likelihood`] within the parameter bounds.
///
/// A coarse scan locates the best bracket; golden-section search then refines
/// it to `params.tolerance`.
pub fn fit_lambda(data: &[f64], params: &YjParams) -> Result<YjParams> {
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    if data.len() < 3 {
        return Err(Error::Degenerate(format!(
            "lambda fit needs at least 3 values, got {}",
            data.len()
        )));
    }
    if data.iter().all(|&v| v == data[0]) {
        return Err(Error::Degenerate("all values are equal".into()));
    }
    let (lo, hi) = (params.lambda_min, params.lambda_max);
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || !(params.tolerance > 0.0) {
        return Err(Error::Config(format!("invalid lambda search bounds [{lo}, {hi}]")));
    }

    let ll = |l: f64| yj_log_likelihood(data, l);
    let step = (hi - lo) / COARSE_STEPS as f64;
    let grid_point = |i: usize| if i == COARSE_STEPS { hi } else { lo + step * i as f64 };
    let best_i = (0..=COARSE_STEPS)
        .map(|i| (i, ll(grid_point(i))))
        .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
        .0;
    let mut a = grid_point(best_i.saturating_sub(1));
    let mut b = grid_point((best_i + 1).min(COARSE_STEPS));

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (ll(c), ll(d));
    while (b - a).abs() > params.tolerance {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = ll(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = ll(d);
        }
    }
    let mid = 0.5 * (a + b);
    let lambda = [mid, grid_point(best_i)]
        .into_iter()
        .fold((mid, f64::NEG_INFINITY), |best, l| {
            let v = ll(l);
            if v > best.1 {
                (l, v)
            } else {
                best
            }
        })
        .0
        .clamp(lo, hi);
    if !ll(lambda).is_finite() {
        return Err(Error::Degenerate("log-likelihood is not finite anywhere in the bounds".into()));
    }
    Ok(YjParams { lambda, ..*params })
}
