use serde::Serialize;

use super::{DiagnosticsSample, RunSummary, L2_SLACK};
use crate::error::{Error, Result};
use crate::output::{ser_f17, ser_opt_f17};

/// Result of checking `‖u(t)‖ ≤ ‖u₀‖ + ∫₀ᵗ‖f‖` at every sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct L2BoundReport {
    pub holds: bool,
    /// Smallest `(bound − ‖u(t)‖)/bound` over the samples.
    pub worst_slack: f64,
}

pub fn verify_l2_bound(samples: &[DiagnosticsSample], f_norm_integral: &dyn Fn(f64) -> f64) -> L2BoundReport {
    let Some(first) = samples.first() else {
        return L2BoundReport {
            holds: true,
            worst_slack: f64::INFINITY,
        };
    };
    let u0 = first.h0sq.sqrt();
    let mut holds = true;
    let mut worst = f64::INFINITY;
    for s in samples {
        let bound = u0 + f_norm_integral(s.t);
        let norm = s.h0sq.sqrt();
        if norm > bound * (1.0 + L2_SLACK) {
            holds = false;
        }
        let slack = if bound > 0.0 { (bound - norm) / bound } else { -norm };
        worst = worst.min(slack);
    }
    L2BoundReport {
        holds,
        worst_slack: worst,
    }
}

/// `‖u(t)‖_{H⁰}` non-increasing along the samples up to `rel_slack`.
pub fn l2_non_increasing(samples: &[DiagnosticsSample], rel_slack: f64) -> bool {
    samples
        .windows(2)
        .all(|w| w[1].h0sq.sqrt() <= w[0].h0sq.sqrt() * (1.0 + rel_slack))
}

/// Quadrature weight of each sample (trapezoid rule on the sample times).
fn sample_weights(samples: &[DiagnosticsSample]) -> Vec<f64> {
    let n = samples.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { samples[i].t - samples[i - 1].t } else { 0.0 };
            let right = if i + 1 < n { samples[i + 1].t - samples[i].t } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// Discrete measure of `{t : sup_x |u(t,x)| ≥ √N}`.
///
/// The grid supremum stands in for the supremum over the torus. Each
/// activated sample contributes its trapezoid weight, so the result lies in
/// `[0, T]`.
pub fn activation_measure(samples: &[DiagnosticsSample], level: f64) -> f64 {
    sample_weights(samples)
        .into_iter()
        .zip(samples)
        .filter(|(_, s)| s.sup_u * s.sup_u >= level)
        .fold(0.0, |acc, (w, _)| acc + w)
}

/// `max_t sup|u|² / (‖Δu‖·‖∇u‖)`, skipping states with vanishing gradient.
pub fn agmon_ratio(samples: &[DiagnosticsSample]) -> Option<f64> {
    samples
        .iter()
        .filter(|s| s.grad_sq > 1e-30 && s.lap_sq > 1e-30)
        .map(|s| s.sup_u * s.sup_u / (s.lap_sq.sqrt() * s.grad_sq.sqrt()))
        .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthEntry {
    #[serde(rename = "N", serialize_with = "ser_f17")]
    pub level: f64,
    #[serde(serialize_with = "ser_f17")]
    pub lhs: f64,
    #[serde(serialize_with = "ser_f17")]
    pub envelope: f64,
    #[serde(serialize_with = "ser_f17")]
    pub ratio: f64,
}

/// Growth of a norm quantity across a taming sweep against an envelope in `N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub quantity: String,
    pub envelope: String,
    pub entries: Vec<GrowthEntry>,
    #[serde(serialize_with = "ser_f17")]
    pub reference_ratio: f64,
    #[serde(serialize_with = "ser_f17")]
    pub max_ratio: f64,
    #[serde(serialize_with = "ser_f17")]
    pub slack_factor: f64,
    pub bounded: bool,
    /// Least-squares slope of `ln lhs` against `ln N` (reported, not asserted).
    #[serde(serialize_with = "ser_opt_f17")]
    pub fitted_exponent: Option<f64>,
}

/// Ratio bound relative to the smallest-`N` ratio.
pub const GROWTH_SLACK: f64 = 2.0;

fn growth(
    sweep: &[RunSummary],
    quantity: &str,
    envelope_name: &str,
    lhs: fn(&RunSummary) -> f64,
    envelope: fn(f64) -> f64,
) -> Result<GrowthReport> {
    if sweep.len() < 3 {
        return Err(Error::config(format!(
            "growth check needs at least 3 taming levels, got {}",
            sweep.len()
        )));
    }
    let tag = &sweep[0].scenario_tag;
    let mut levels = Vec::with_capacity(sweep.len());
    for s in sweep {
        if &s.scenario_tag != tag {
            return Err(Error::config("growth check: runs differ in scenario, grid or physics"));
        }
        let n = s
            .taming_n
            .ok_or_else(|| Error::config("growth check: every run must be tamed"))?;
        levels.push((n, s));
    }
    levels.sort_by(|a, b| a.0.total_cmp(&b.0));
    if levels.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::config("growth check: duplicate taming level"));
    }
    let entries: Vec<GrowthEntry> = levels
        .iter()
        .map(|(n, s)| {
            let l = lhs(s);
            let e = envelope(*n);
            GrowthEntry {
                level: *n,
                lhs: l,
                envelope: e,
                ratio: l / e,
            }
        })
        .collect();
    let reference_ratio = entries[0].ratio;
    let max_ratio = entries.iter().map(|e| e.ratio).fold(f64::NEG_INFINITY, f64::max);
    let fitted_exponent = if entries.iter().all(|e| e.level > 0.0 && e.lhs > 0.0) {
        let xs: Vec<f64> = entries.iter().map(|e| e.level.ln()).collect();
        let ys: Vec<f64> = entries.iter().map(|e| e.lhs.ln()).collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    } else {
        None
    };
    Ok(GrowthReport {
        quantity: quantity.to_string(),
        envelope: envelope_name.to_string(),
        bounded: max_ratio <= GROWTH_SLACK * reference_ratio,
        entries,
        reference_ratio,
        max_ratio,
        slack_factor: GROWTH_SLACK,
        fitted_exponent,
    })
}

/// `sup_t‖u_N‖²_{H¹} + ∫₀ᵀ‖u_N‖²_{H²}` against `1 + N`.
pub fn verify_h1_growth(sweep: &[RunSummary]) -> Result<GrowthReport> {
    growth(
        sweep,
        "sup_h1sq + int_h2sq",
        "1+N",
        RunSummary::h1_envelope_lhs,
        |n| 1.0 + n,
    )
}

/// `sup_t‖u_N‖²_{H²}` against `1 + N²`.
pub fn verify_h2_growth(sweep: &[RunSummary]) -> Result<GrowthReport> {
    growth(sweep, "sup_h2sq", "1+N^2", |s| s.sup_h2sq, |n| 1.0 + n * n)
}
