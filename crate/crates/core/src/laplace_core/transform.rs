//! Laplace transforms of sampled trajectories and the identities they obey.

use super::resolvent_solve_p;
use crate::cx::{diff_norm, norm, C64};
use crate::error::{Result, SpectreError};
use crate::operator_lab::LinearOperator;
use crate::par::{map_range, Parallelism};
use crate::wave_engine::WaveTrajectory;
use serde::Serialize;
use std::f64::consts::PI;

/// Required `Re p − growth rate`.
pub const DIVERGENCE_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceEstimate {
    /// Trapezoid value of `∫₀ᵀ e^{−pt} x(t) dt`.
    pub value: Vec<C64>,
    /// Geometric estimate of `‖∫_T^∞ e^{−pt} x(t) dt‖` assuming growth at `growth_rate`.
    pub tail_estimate: f64,
    pub growth_rate: f64,
}

/// Exponential growth rate of `‖x(t)‖` from a log-linear fit of its running
/// maximum on the second half of the horizon (clamped at 0).
fn measured_growth(dt: f64, n: usize, values: &[C64]) -> f64 {
    let steps = values.len() / n - 1;
    let stride = (steps / 2000).max(1);
    let mut running = 0.0f64;
    let mut pts = Vec::new();
    for j in (0..=steps).step_by(stride) {
        running = running.max(norm(&values[j * n..(j + 1) * n]));
        if j >= steps / 2 {
            pts.push((j as f64 * dt, (running + 1e-300).ln()));
        }
    }
    if pts.len() < 2 {
        return 0.0;
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    super::decompose::fit_line(&xs, &ys).0.max(0.0)
}

/// Laplace transform of a series sampled at `t_j = j·dt` (flattened, `n` per step).
pub fn numeric_laplace_series(dt: f64, n: usize, values: &[C64], p: C64) -> Result<LaplaceEstimate> {
    if n == 0 || values.len() < 2 * n || !values.len().is_multiple_of(n) {
        return Err(SpectreError::InsufficientData("need at least two samples".into()));
    }
    let growth_rate = measured_growth(dt, n, values);
    if p.re <= growth_rate + DIVERGENCE_MARGIN {
        return Err(SpectreError::Divergence { re_p: p.re, growth: growth_rate });
    }
    let steps = values.len() / n - 1;
    let step_factor = (-p * dt).exp();
    let mut weight = C64::new(1.0, 0.0);
    let mut acc = vec![C64::new(0.0, 0.0); n];
    for j in 0..=steps {
        // recompute occasionally to keep the recurrence from drifting
        if j % 1024 == 0 {
            weight = (-p * (j as f64 * dt)).exp();
        }
        let w = if j == 0 || j == steps { 0.5 * dt } else { dt };
        for (a, x) in acc.iter_mut().zip(&values[j * n..(j + 1) * n]) {
            *a += weight * w * x;
        }
        weight *= step_factor;
    }
    let t_end = steps as f64 * dt;
    let last = norm(&values[steps * n..]);
    let tail_estimate = last * (-p.re * t_end).exp() / (p.re - growth_rate);
    Ok(LaplaceEstimate { value: acc, tail_estimate, growth_rate })
}

/// `∫₀^∞ e^{−pt} w(t) dt` from the trajectory's full-resolution samples.
pub fn numeric_laplace(traj: &WaveTrajectory, p: C64) -> Result<LaplaceEstimate> {
    let n = traj.dim();
    let flat: Vec<C64> = (0..=traj.steps()).flat_map(|j| traj.fine_w(j).iter().copied()).collect();
    numeric_laplace_series(traj.dt(), n, &flat, p)
}

/// `‖𝓛[∫₀ᵗ w](p) − 𝓛[w](p)/p‖`, both sides numerical.
pub fn integration_rule_check(traj: &WaveTrajectory, p: C64) -> Result<f64> {
    if p.norm() == 0.0 {
        return Err(SpectreError::config("p", "must be nonzero"));
    }
    let cum = traj.fine_cumulative();
    let lhs = numeric_laplace_series(traj.dt(), traj.dim(), &cum, p)?;
    let rhs = numeric_laplace(traj, p)?;
    let rhs: Vec<C64> = rhs.value.iter().map(|x| x / p).collect();
    Ok(diff_norm(&lhs.value, &rhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlancherelResult {
    pub sigma: f64,
    pub tau_max: f64,
    pub line_energy: f64,
    pub time_energy: f64,
    /// `NaN` when both energies vanish.
    pub ratio: f64,
}

/// Compares `∫‖W(σ+iτ)‖² dτ` over `|τ| ≤ τ_max` with `2π ∫₀ᵀ ‖w‖² e^{−2σt} dt`.
pub fn plancherel_check(
    op: &LinearOperator,
    f: &[C64],
    traj: &WaveTrajectory,
    sigma: f64,
    tau_max: f64,
    n_tau: usize,
    exec: Parallelism,
) -> Result<PlancherelResult> {
    if !(sigma > 0.0) {
        return Err(SpectreError::config("plancherel.sigma", "must be positive"));
    }
    if n_tau < 3 || !(tau_max > 0.0) {
        return Err(SpectreError::config("plancherel.n_tau", "need at least 3 nodes and τ_max > 0"));
    }
    let h = 2.0 * tau_max / (n_tau - 1) as f64;
    let line: Vec<Result<f64>> = if norm(f) == 0.0 {
        (0..n_tau).map(|_| Ok(0.0)).collect()
    } else {
        map_range(exec, n_tau, |j| {
            let p = C64::new(sigma, -tau_max + j as f64 * h);
            resolvent_solve_p(op, f, p).map(|w| norm(&w).powi(2))
        })
    };
    let mut line_energy = 0.0;
    for (j, v) in line.into_iter().enumerate() {
        let w = if j == 0 || j == n_tau - 1 { 0.5 } else { 1.0 };
        line_energy += w * h * v?;
    }
    let dt = traj.dt();
    let steps = traj.steps();
    let mut time_energy = 0.0;
    for j in 0..=steps {
        let t = j as f64 * dt;
        let w = if j == 0 || j == steps { 0.5 } else { 1.0 };
        time_energy += w * dt * norm(traj.fine_w(j)).powi(2) * (-2.0 * sigma * t).exp();
    }
    time_energy *= 2.0 * PI;
    let ratio = if line_energy == 0.0 && time_energy == 0.0 { f64::NAN } else { line_energy / time_energy };
    Ok(PlancherelResult { sigma, tau_max, line_energy, time_energy, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_lab::{build_operator, spectral_oracle, OperatorSpec, DEFAULT_TOL_PROJ};
    use crate::wave_engine::{evolve_free, EvolveConfig, Method};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn free(op: &LinearOperator, f: &[C64], t: f64, dt: f64) -> WaveTrajectory {
        let or = spectral_oracle(op, DEFAULT_TOL_PROJ).ok();
        let method = if or.as_ref().is_some_and(|o| o.diagonalizable()) { Method::Spectral } else { Method::Rk4 };
        evolve_free(op, f, &EvolveConfig::new(t, dt, method), or.as_ref()).unwrap()
    }

    #[test]
    fn transform_of_sine() {
        let op = build_operator(&OperatorSpec::diagonal(&[1.0])).unwrap();
        let tr = free(&op, &[c(1.0)], 200.0, 1e-3);
        let l = numeric_laplace(&tr, c(1.0)).unwrap();
        assert!((l.value[0] - c(0.5)).norm() < 1e-6);
        assert!(l.tail_estimate < 1e-80);
    }

    #[test]
    fn transform_of_sinh() {
        let op = build_operator(&OperatorSpec::diagonal(&[-1.0])).unwrap();
        let tr = evolve_free(&op, &[c(1.0)], &EvolveConfig::new(60.0, 1e-3, Method::Rk4), None).unwrap();
        let l = numeric_laplace(&tr, c(2.0)).unwrap();
        assert!(((l.value[0] - c(1.0 / 3.0)).norm() / (1.0 / 3.0)) < 1e-4);
        assert!((l.growth_rate - 1.0).abs() < 0.05);
        assert!(matches!(numeric_laplace(&tr, c(1.05)), Err(SpectreError::Divergence { .. })));
    }

    #[test]
    fn transform_matches_resolvent_on_random_stable() {
        let spec = OperatorSpec::planted(&[c(0.5), c(1.3), c(2.2), c(3.1)], 0.3, 17);
        let op = build_operator(&spec).unwrap();
        let f = vec![c(1.0); 4];
        let tr = free(&op, &f, 300.0, 2e-3);
        let ps = [C64::new(0.7, 0.3), C64::new(1.0, -2.0), c(0.4), C64::new(2.0, 5.0), C64::new(0.5, 1.1)];
        for p in ps {
            let num = numeric_laplace(&tr, p).unwrap();
            let exact = resolvent_solve_p(&op, &f, p).unwrap();
            assert!(diff_norm(&num.value, &exact) < 1e-5, "p={p}: {}", diff_norm(&num.value, &exact));
        }
    }

    #[test]
    fn integration_rule_holds() {
        let op = build_operator(&OperatorSpec::diagonal(&[1.0])).unwrap();
        let tr = free(&op, &[c(1.0)], 60.0, 1e-3);
        assert!(integration_rule_check(&tr, c(1.0)).unwrap() <= 1e-6);
        let op3 = build_operator(&OperatorSpec::planted(&[c(0.8), c(1.7), c(2.9)], 0.3, 5)).unwrap();
        let tr3 = free(&op3, &[c(1.0), c(-0.5), c(0.25)], 60.0, 1e-3);
        assert!(integration_rule_check(&tr3, C64::new(1.0, 1.0)).unwrap() <= 1e-5);
        let tr0 = free(&op3, &[c(0.0); 3], 10.0, 1e-2);
        assert_eq!(integration_rule_check(&tr0, c(1.0)).unwrap(), 0.0);
    }

    #[test]
    fn plancherel_scalar_oscillator() {
        let op = build_operator(&OperatorSpec::diagonal(&[1.0])).unwrap();
        let f = [c(1.0)];
        let tr = free(&op, &f, 50.0, 1e-3);
        let r = plancherel_check(&op, &f, &tr, 0.5, 200.0, 40_001, Parallelism::Parallel).unwrap();
        assert!((r.ratio - 1.0).abs() < 0.05, "{r:?}");
        let z = plancherel_check(&op, &[c(0.0)], &free(&op, &[c(0.0)], 5.0, 1e-2), 0.5, 20.0, 101, Parallelism::Sequential)
            .unwrap();
        assert_eq!(z.line_energy, 0.0);
        assert_eq!(z.time_energy, 0.0);
        assert!(z.ratio.is_nan());
    }

    #[test]
    fn line_energy_decreases_with_sigma() {
        let op = build_operator(&OperatorSpec::diagonal(&[1.0, 4.0])).unwrap();
        let f = [c(1.0), c(1.0)];
        let tr = free(&op, &f, 20.0, 1e-2);
        let mut prev = f64::INFINITY;
        for sigma in [0.2, 0.4, 0.8, 1.6] {
            let r = plancherel_check(&op, &f, &tr, sigma, 400.0, 80_001, Parallelism::Parallel).unwrap();
            assert!(r.line_energy <= prev * (1.0 + 1e-9));
            prev = r.line_energy;
        }
    }
}
