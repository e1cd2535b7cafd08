//! Limiting amplitude `v = lim (1/T)∫₀ᵀ e^{iks} u(s) ds` and its closed form.

use crate::cx::{diff_norm, norm, C64};
use crate::error::{Result, SpectreError};
use crate::laplace_core::{decompose, resolvent_solve_k, DecompositionReport};
use crate::operator_lab::{LinearOperator, SpectralOracle};
use crate::wave_engine::{evolve_forced, modulated_average_at_steps, EvolveConfig, WaveTrajectory};
use serde::Serialize;

/// Context an amplitude query must respect.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmplitudeGuard {
    /// Result of the stability detector.
    pub stable: bool,
    /// Detected `k_j` (positive); `±k_j` are both excluded.
    pub detected: Vec<f64>,
    pub exclusion_radius: f64,
}

impl AmplitudeGuard {
    /// Stable, nothing detected, no exclusion.
    pub fn unrestricted() -> Self {
        AmplitudeGuard { stable: true, detected: Vec::new(), exclusion_radius: 0.0 }
    }

    /// Exclusion radius `10·Δk`.
    pub fn from_scan(stable: bool, detected: Vec<f64>, grid_step: f64) -> Self {
        AmplitudeGuard { stable, detected, exclusion_radius: 10.0 * grid_step }
    }

    pub fn check(&self, k: f64) -> Result<()> {
        if !self.stable {
            return Err(SpectreError::Precondition(
                "limiting amplitude requested on an exponentially unstable instance".into(),
            ));
        }
        for &kj in &self.detected {
            for s in [kj, -kj] {
                if (k - s).abs() <= self.exclusion_radius {
                    return Err(SpectreError::AmplitudeUndefined { k, k_j: s });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmplitudeResult {
    pub k: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub v_avg: Vec<C64>,
    pub v_resolvent: Option<Vec<C64>>,
    pub v_closed: Option<Vec<C64>>,
    /// `‖(L − k²) v_avg − f‖`
    pub residual: f64,
    #[serde(rename = "gap")]
    pub avg_vs_resolvent_gap: Option<f64>,
    /// `β` in `gap(T) ∝ T^{−β}`.
    #[serde(rename = "rate")]
    pub convergence_rate: Option<f64>,
    /// `(T', gap(T'))` for `T' = T/4, T/2, T`.
    pub gaps: Vec<(f64, f64)>,
    /// `T · gap(T)`: large near an excluded `k_j`.
    pub effective_constant: Option<f64>,
}

/// `v = W₁(−ik) + Σ_j i v_j / (k − k_j)`.
pub fn amplitude_closed_form(decomp: &DecompositionReport, k: f64) -> Result<Vec<C64>> {
    if !decomp.right_poles.is_empty() {
        return Err(SpectreError::TheoremInapplicable(format!(
            "{} right-half-plane pole(s) present; the closed form needs all b_m = 0",
            decomp.right_poles.len()
        )));
    }
    let mut v = decomp.w1_sampler.eval_closed(C64::new(0.0, -k));
    for pole in &decomp.imag_poles {
        let d = k - pole.k;
        if d.abs() <= 1e-12 * (1.0 + k.abs()) {
            return Err(SpectreError::Singular(format!("k = {k} coincides with pole k_j = {}", pole.k)));
        }
        let s = C64::new(0.0, 1.0) / d;
        for (x, y) in v.iter_mut().zip(&pole.v) {
            *x += s * y;
        }
    }
    Ok(v)
}

fn apply_shifted(op: &LinearOperator, v: &[C64], k2: f64) -> Vec<C64> {
    op.apply(v).into_iter().zip(v).map(|(a, b)| a - b * k2).collect()
}

/// Gap envelope `max_{t ∈ [T'/2, T']} ‖M(k,t) − v_ref‖` at `T' ∈ {T/4, T/2, T}`
/// and the fitted exponent.
fn convergence(traj: &WaveTrajectory, k: f64, v_ref: &[C64]) -> (Vec<(f64, f64)>, Option<f64>) {
    let steps = traj.steps();
    let first = (steps / 8).max(1);
    let m = 4096.min(steps - first + 1);
    let mut stops: Vec<usize> =
        (0..m).map(|i| first + ((steps - first) as f64 * i as f64 / (m - 1).max(1) as f64).round() as usize).collect();
    stops.dedup();
    let series: Vec<(f64, f64)> =
        modulated_average_at_steps(traj, k, &stops).into_iter().map(|(t, v)| (t, diff_norm(&v, v_ref))).collect();
    let t_end = traj.final_time();
    let gaps: Vec<(f64, f64)> = [0.25, 0.5, 1.0]
        .iter()
        .map(|&frac| {
            let hi = frac * t_end;
            let g = series
                .iter()
                .filter(|(t, _)| *t >= 0.5 * hi - 1e-9 && *t <= hi + 1e-9)
                .map(|(_, g)| *g)
                .fold(0.0, f64::max);
            (hi, g)
        })
        .collect();
    if gaps.iter().any(|(_, g)| !(*g > 0.0)) {
        return (gaps, None);
    }
    let xs: Vec<f64> = gaps.iter().map(|(t, _)| t.ln()).collect();
    let ys: Vec<f64> = gaps.iter().map(|(_, g)| g.ln()).collect();
    (gaps, Some(-crate::laplace_core::fit_line(&xs, &ys).0))
}

/// Evolves the forced problem at frequency `k` and compares the Cesàro
/// average with the resolvent solve and, given an oracle, the closed form.
pub fn limiting_amplitude(
    op: &LinearOperator,
    f: &[C64],
    k: f64,
    cfg: &EvolveConfig,
    oracle: Option<&SpectralOracle>,
    guard: &AmplitudeGuard,
) -> Result<AmplitudeResult> {
    guard.check(k)?;
    let cfg = cfg.clone().forced(k);
    let traj = evolve_forced(op, f, &cfg, oracle)?;
    if let Some(t) = traj.overflow_at() {
        return Err(SpectreError::Overflow(format!("forced solution overflowed at t = {t}")));
    }
    let v_resolvent = resolvent_solve_k(op, f, C64::new(k * k, 0.0)).ok();
    let v_closed = oracle.and_then(|o| decompose(op, o, f).ok()).and_then(|d| amplitude_closed_form(&d, k).ok());
    amplitude_from_trajectory(op, f, k, &traj, v_resolvent, v_closed)
}

/// Amplitude analysis on an existing forced trajectory.
pub fn amplitude_from_trajectory(
    op: &LinearOperator,
    f: &[C64],
    k: f64,
    traj: &WaveTrajectory,
    v_resolvent: Option<Vec<C64>>,
    v_closed: Option<Vec<C64>>,
) -> Result<AmplitudeResult> {
    if traj.steps() < 8 {
        return Err(SpectreError::InsufficientData("forced trajectory has fewer than 8 steps".into()));
    }
    let t_final = traj.final_time();
    let v_avg = modulated_average_at_steps(traj, k, &[traj.steps()]).pop().map(|(_, v)| v).unwrap_or_default();
    let r = apply_shifted(op, &v_avg, k * k);
    let residual = diff_norm(&r, f);
    let avg_vs_resolvent_gap = v_resolvent.as_ref().map(|v| diff_norm(&v_avg, v));
    let reference = v_resolvent.as_ref().or(v_closed.as_ref());
    let (gaps, convergence_rate) = match reference {
        Some(v) if norm(f) > 0.0 => convergence(traj, k, v),
        _ => (Vec::new(), None),
    };
    let effective_constant = gaps.last().map(|(t, g)| t * g);
    Ok(AmplitudeResult {
        k,
        t_final,
        v_avg,
        v_resolvent,
        v_closed,
        residual,
        avg_vs_resolvent_gap,
        convergence_rate,
        gaps,
        effective_constant,
    })
}
