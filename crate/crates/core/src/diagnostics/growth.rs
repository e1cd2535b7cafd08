//! Exponential-growth test on `‖∫₀ᵗ w(s) ds‖`.

use crate::error::{Result, SpectreError};
use crate::laplace_core::fit_line;
use serde::Serialize;

pub const DEFAULT_WINDOW_FRAC: f64 = 0.5;
const LOG_GUARD: f64 = 1e-300;
const MAX_RELATIVE_RESIDUAL: f64 = 0.1;
/// Running max may grow by this factor over the window and still count as bounded.
const BOUNDED_SLACK: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GrowthVerdict {
    Bounded,
    Subexponential,
    Exponential { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthEstimate {
    pub alpha: f64,
    pub window: (f64, f64),
    /// RMS deviation from the fitted line divided by the rise of the
    /// log-norm over the window.
    pub fit_residual: f64,
    pub eps_growth: f64,
    pub verdict: GrowthVerdict,
}

impl GrowthEstimate {
    pub fn is_exponential(&self) -> bool {
        matches!(self.verdict, GrowthVerdict::Exponential { .. })
    }
}

/// Default `eps_growth` for an operator with spectral radius `ρ`:
/// `10⁻³` times the frequency scale `√(1+ρ)`.
pub fn default_eps_growth(spectral_radius: f64) -> f64 {
    1e-3 * (1.0 + spectral_radius.max(0.0)).sqrt()
}

/// Fits `log(runmax ‖·‖ + δ)` against `t` on the last `window_frac` of the series.
pub fn growth_rate(series: &[(f64, f64)], window_frac: f64, eps_growth: f64) -> Result<GrowthEstimate> {
    if !(window_frac > 0.0 && window_frac < 1.0) {
        return Err(SpectreError::config("growth.window_frac", "must lie in (0, 1)"));
    }
    let (t0, t_end) = match (series.first(), series.last()) {
        (Some(a), Some(b)) if b.0 > a.0 => (a.0, b.0),
        _ => return Err(SpectreError::InsufficientData("growth series is empty or has no time span".into())),
    };
    let t_lo = t_end - window_frac * (t_end - t0);
    let mut running = 0.0f64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut start_max = None;
    for &(t, v) in series {
        let v = if v.is_finite() { v } else { f64::MAX };
        running = running.max(v);
        if t >= t_lo {
            start_max.get_or_insert(running);
            xs.push(t);
            ys.push((running + LOG_GUARD).ln());
        }
    }
    if xs.len() < 10 {
        return Err(SpectreError::InsufficientData(format!(
            "{} points in the fit window, need at least 10",
            xs.len()
        )));
    }
    let window = (xs[0], *xs.last().unwrap());
    let (alpha, intercept, _) = fit_line(&xs, &ys);
    let rms = (xs.iter().zip(&ys).map(|(x, y)| (y - alpha * x - intercept).powi(2)).sum::<f64>() / xs.len() as f64).sqrt();
    let rise = ys.last().unwrap() - ys[0];
    let fit_residual = if rise > 0.0 { rms / rise } else { f64::INFINITY };

    // polynomial growth t^m has a local log-slope that falls like 1/t; an
    // exponential keeps it constant across the two halves of the window
    let mid = xs.len() / 2;
    let early = fit_line(&xs[..mid], &ys[..mid]).0;
    let late = fit_line(&xs[mid..], &ys[mid..]).0;
    let steady = early > 0.0 && late >= 0.8 * early;

    let span = window.1 - window.0;
    let verdict = if alpha > eps_growth && alpha * span >= 1.0 && fit_residual < MAX_RELATIVE_RESIDUAL && steady {
        GrowthVerdict::Exponential { alpha }
    } else if running <= BOUNDED_SLACK * start_max.unwrap_or(running) {
        GrowthVerdict::Bounded
    } else {
        GrowthVerdict::Subexponential
    };
    Ok(GrowthEstimate { alpha, window, fit_residual, eps_growth, verdict })
}
