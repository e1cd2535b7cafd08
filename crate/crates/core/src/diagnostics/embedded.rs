//! Positive-eigenvalue detection from the tail of `‖M(k,t)‖`.

use super::growth::{default_eps_growth, growth_rate, DEFAULT_WINDOW_FRAC};
use crate::cx::{norm, C64};
use crate::error::{Result, SpectreError};
use crate::operator_lab::{LinearOperator, SpectralOracle};
use crate::par::{map_slice, Parallelism};
use crate::wave_engine::{evolve_free, modulated_average_at_steps, EvolveConfig, Mask, WaveTrajectory};
use serde::{Deserialize, Serialize};

/// Cap on sub-grid frequencies per scan cell.
pub const MAX_CELL_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl KGrid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Self {
        KGrid { lo, hi, step }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(SpectreError::config("k_grid", "need finite lo < hi"));
        }
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(SpectreError::config("k_grid.step", "must be positive"));
        }
        if (self.hi - self.lo) / self.step > 1e6 {
            return Err(SpectreError::config("k_grid.step", "grid has more than 10⁶ points"));
        }
        Ok(())
    }

    /// `lo, lo+step, …` up to `hi` (inclusive within rounding).
    pub fn points(&self) -> Vec<f64> {
        let m = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=m).map(|i| self.lo + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddedOptions {
    /// Flag threshold relative to `‖f‖`.
    pub tol_flag_rel: f64,
    /// Fraction of the horizon used for the tail fit.
    pub tail_frac: f64,
    pub tail_points: usize,
    pub mask: Option<Mask>,
    #[serde(skip)]
    pub exec: Parallelism,
}

impl Default for EmbeddedOptions {
    fn default() -> Self {
        EmbeddedOptions { tol_flag_rel: 1e-3, tail_frac: 0.5, tail_points: 256, mask: None, exec: Parallelism::Parallel }
    }
}

/// Tail fit `‖M(k,t)‖ ≈ a + b/t` at one `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub k: f64,
    pub fit_a: f64,
    pub fit_b: f64,
    /// Max deviation of the tail from the fit.
    pub fit_residual: f64,
    /// `‖M(k,T)‖`
    pub limit_norm: f64,
    pub flagged: bool,
    /// `M(k,T)` on flagged rows.
    pub v_estimate: Option<Vec<C64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectedMode {
    /// Maximizer of `‖M(k,T)‖` near the flagged cells.
    pub k: f64,
    pub v: Vec<C64>,
    pub norm: f64,
    /// Flagged grid cells merged into this detection.
    pub cell: (f64, f64),
}

/// `k = 0`: `M(0,t) = t⁻¹∫₀ᵗ w`, so an unflagged row means `‖∫₀ᵗ w‖ = o(t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroFrequencyRow {
    pub row: ScanRow,
    pub cumulative_is_o_t: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddedDetection {
    pub grid: KGrid,
    pub horizon: f64,
    /// `T·Δk`; two modes closer than about `1/T` cannot be separated.
    pub resolution_ratio: f64,
    pub tol_flag: f64,
    pub rows: Vec<ScanRow>,
    pub detected: Vec<DetectedMode>,
    pub zero_row: ZeroFrequencyRow,
    pub warnings: Vec<String>,
}

impl EmbeddedDetection {
    pub fn flagged_ks(&self) -> Vec<f64> {
        self.rows.iter().filter(|r| r.flagged).map(|r| r.k).collect()
    }
}

/// Least squares `y ≈ a + b/t`; returns `(a, b, max |residual|)`.
pub fn fit_tail(ts: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let xs: Vec<f64> = ts.iter().map(|t| 1.0 / t).collect();
    let (b, a, res) = crate::laplace_core::fit_line(&xs, ys);
    (a, b, res)
}

fn tail_steps(traj: &WaveTrajectory, frac: f64, points: usize) -> Vec<usize> {
    let steps = traj.steps();
    let first = ((1.0 - frac) * steps as f64).floor() as usize;
    let first = first.max(1);
    let m = points.max(2);
    let mut out: Vec<usize> = (0..m).map(|i| first + ((steps - first) as f64 * i as f64 / (m - 1) as f64).round() as usize).collect();
    out.dedup();
    out
}

fn masked(mask: Option<&Mask>, v: &[C64]) -> f64 {
    mask.map_or_else(|| norm(v), |m| m.norm(v))
}

/// Sub-grid frequencies covering the cell `[k − Δk/2, k + Δk/2]` at a
/// spacing of at most `1/T`, so a mode anywhere in the cell stays in phase
/// with one of them over the whole horizon.
fn cell_points(k: f64, step: f64, horizon: f64) -> Vec<f64> {
    let m = ((step * horizon).ceil() as usize).clamp(1, MAX_CELL_POINTS);
    if m == 1 {
        return vec![k];
    }
    (0..m).map(|i| k - 0.5 * step + (i as f64 + 0.5) * step / m as f64).collect()
}

/// Tail fit of `t ↦ max_{k' ∈ cell} ‖M(k',t)‖` around grid point `k`.
fn scan_row(traj: &WaveTrajectory, k: f64, step: f64, stops: &[usize], opts: &EmbeddedOptions, tol_flag: f64) -> ScanRow {
    let mut envelope: Vec<f64> = Vec::new();
    let mut ts: Vec<f64> = Vec::new();
    let mut best: Option<(f64, Vec<C64>)> = None;
    for kk in cell_points(k, step, traj.final_time()) {
        let series = modulated_average_at_steps(traj, kk, stops);
        if envelope.is_empty() {
            ts = series.iter().map(|(t, _)| *t).collect();
            envelope = vec![0.0; series.len()];
        }
        for (e, (_, m)) in envelope.iter_mut().zip(&series) {
            *e = e.max(masked(opts.mask.as_ref(), m));
        }
        if let Some((_, last)) = series.last() {
            let v = masked(opts.mask.as_ref(), last);
            if best.as_ref().is_none_or(|(b, _)| v > *b) {
                best = Some((v, last.clone()));
            }
        }
    }
    let (fit_a, fit_b, fit_residual) = fit_tail(&ts, &envelope);
    let flagged = fit_a > tol_flag && fit_residual < 0.1 * fit_a;
    let (limit_norm, last) = best.unwrap_or_default();
    ScanRow { k, fit_a, fit_b, fit_residual, limit_norm, flagged, v_estimate: flagged.then_some(last) }
}

fn final_average(traj: &WaveTrajectory, k: f64) -> Vec<C64> {
    modulated_average_at_steps(traj, k, &[traj.steps()]).pop().map(|(_, m)| m).unwrap_or_default()
}

/// Maximizes `‖M(k,T)‖` on `[lo, hi]`: coarse sampling below the main-lobe
/// width `2π/T`, then golden-section search around the best sample.
fn refine_peak(traj: &WaveTrajectory, lo: f64, hi: f64, mask: Option<&Mask>, exec: Parallelism) -> f64 {
    let obj = |k: f64| masked(mask, &final_average(traj, k));
    let lobe = 2.0 * std::f64::consts::PI / traj.final_time();
    let m = (((hi - lo) / (0.25 * lobe)).ceil() as usize).clamp(8, 64);
    let ks: Vec<f64> = (0..=m).map(|i| lo + (hi - lo) * i as f64 / m as f64).collect();
    let vals = map_slice(exec, &ks, |&k| obj(k));
    let best = vals.iter().enumerate().fold(0, |b, (i, v)| if *v > vals[b] { i } else { b });
    let h = (hi - lo) / m as f64;
    let (mut a, mut b) = (ks[best] - h, ks[best] + h);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (obj(c), obj(d));
    for _ in 0..40 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = obj(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = obj(d);
        }
    }
    let k = 0.5 * (a + b);
    if obj(k) >= vals[best] {
        k
    } else {
        ks[best]
    }
}

/// Scans `grid` on an already computed free trajectory.
///
/// Each row covers one grid cell: `‖M(k',t)‖` is evaluated on a sub-grid of
/// spacing `≤ 1/T` inside the cell and the tail of the pointwise maximum is
/// fitted to `a + b/t`. The row is flagged when `a > tol_flag` and the fit
/// residual is below `a/10`.
pub fn detect_embedded_on(traj: &WaveTrajectory, f: &[C64], grid: &KGrid, opts: &EmbeddedOptions) -> Result<EmbeddedDetection> {
    grid.validate()?;
    if let Some(t) = traj.overflow_at() {
        return Err(SpectreError::Precondition(format!(
            "trajectory overflowed at t = {t}; modulated averages diverge on unstable instances"
        )));
    }
    let growth = growth_rate(&traj.cumulative_norms(), DEFAULT_WINDOW_FRAC, default_eps_growth(0.0))?;
    if growth.is_exponential() {
        return Err(SpectreError::Precondition(format!(
            "∫w grows exponentially (rate {:.4}); modulated averages diverge on unstable instances",
            growth.alpha
        )));
    }
    let tol_flag = opts.tol_flag_rel * norm(f);
    let stops = tail_steps(traj, opts.tail_frac, opts.tail_points);
    let ks = grid.points();
    let rows = map_slice(opts.exec, &ks, |&k| scan_row(traj, k, grid.step, &stops, opts, tol_flag));
    let zero = scan_row(traj, 0.0, 0.0, &stops, opts, tol_flag);
    let zero_row = ZeroFrequencyRow { cumulative_is_o_t: !zero.flagged, row: zero };

    let mut clusters: Vec<(usize, usize)> = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        if !r.flagged {
            continue;
        }
        match clusters.last_mut() {
            Some((_, end)) if *end + 1 == i => *end = i,
            _ => clusters.push((i, i)),
        }
    }
    let detected: Vec<DetectedMode> = clusters
        .iter()
        .map(|&(s, e)| {
            let peak = (s..=e).fold(s, |b, i| if rows[i].limit_norm > rows[b].limit_norm { i } else { b });
            let k0 = rows[peak].k;
            let k = refine_peak(traj, k0 - grid.step, k0 + grid.step, opts.mask.as_ref(), opts.exec);
            let v = final_average(traj, k);
            DetectedMode { k, norm: norm(&v), v, cell: (rows[s].k, rows[e].k) }
        })
        .collect();

    let horizon = traj.final_time();
    let resolution_ratio = horizon * grid.step;
    let mut warnings = Vec::new();
    if resolution_ratio < 10.0 {
        warnings.push(format!("T·Δk = {resolution_ratio:.2} is small; flags may bleed across grid cells"));
    }
    if resolution_ratio > MAX_CELL_POINTS as f64 {
        warnings.push(format!(
            "T·Δk = {resolution_ratio:.0} exceeds {MAX_CELL_POINTS} sub-grid points per cell; modes between them may be missed"
        ));
    }
    Ok(EmbeddedDetection { grid: *grid, horizon, resolution_ratio, tol_flag, rows, detected, zero_row, warnings })
}

/// Evolves the free problem and scans `grid`.
pub fn detect_embedded(
    op: &LinearOperator,
    f: &[C64],
    grid: &KGrid,
    cfg: &EvolveConfig,
    oracle: Option<&SpectralOracle>,
    opts: &EmbeddedOptions,
) -> Result<EmbeddedDetection> {
    let traj = evolve_free(op, f, cfg, oracle)?;
    detect_embedded_on(&traj, f, grid, opts)
}
