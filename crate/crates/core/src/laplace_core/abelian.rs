//! Long-time averages against small-`p` limits of `p` times the Laplace transform.

use super::resolvent_solve_p;
use crate::cx::C64;
use crate::error::{Result, SpectreError};
use crate::par::{chunked_sum, Parallelism};
use crate::wave_engine::TrajectoryKind;
use serde::Serialize;

/// Quadrature step for both routes.
pub const ABELIAN_STEP: f64 = 0.05;
/// The Laplace integral is truncated at `t = CUTOFF / p`.
const CUTOFF: f64 = 40.0;

pub fn default_p_ladder() -> Vec<f64> {
    vec![1e-2, 1e-3, 1e-4]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbelianResult {
    pub t_final: f64,
    pub time_limit: f64,
    pub p_ladder: Vec<f64>,
    /// `p ∫₀^∞ e^{−pt} h(t) dt` per ladder entry.
    pub laplace_values: Vec<f64>,
    /// Linear extrapolation to `p = 0` from the two smallest `p`.
    pub laplace_limit: f64,
    pub gap: f64,
}

fn trapezoid<H: Fn(f64) -> f64 + Sync>(h: &H, t_end: f64, step: f64, exec: Parallelism) -> f64 {
    let m = (t_end / step).ceil().max(1.0) as usize;
    let dt = t_end / m as f64;
    let inner = chunked_sum(exec, m + 1, |j| {
        let w = if j == 0 || j == m { 0.5 } else { 1.0 };
        w * h(j as f64 * dt)
    });
    inner * dt
}

pub fn abelian_check<H>(h: H, t_final: f64, p_ladder: &[f64], exec: Parallelism) -> Result<AbelianResult>
where
    H: Fn(f64) -> f64 + Sync,
{
    if !(t_final > 0.0) {
        return Err(SpectreError::config("abelian.T", "must be positive"));
    }
    if p_ladder.is_empty() || p_ladder.iter().any(|p| !(*p > 0.0)) {
        return Err(SpectreError::config("abelian.p_ladder", "must be non-empty and positive"));
    }
    let time_limit = trapezoid(&h, t_final, ABELIAN_STEP, exec) / t_final;
    let laplace_values: Vec<f64> = p_ladder
        .iter()
        .map(|&p| p * trapezoid(&|t: f64| (-p * t).exp() * h(t), CUTOFF / p, ABELIAN_STEP, exec))
        .collect();

    let mut order: Vec<usize> = (0..p_ladder.len()).collect();
    order.sort_by(|&a, &b| p_ladder[a].total_cmp(&p_ladder[b]));
    let laplace_limit = if order.len() >= 2 {
        let (i1, i2) = (order[0], order[1]);
        let (p1, p2) = (p_ladder[i1], p_ladder[i2]);
        let (l1, l2) = (laplace_values[i1], laplace_values[i2]);
        if p2 > p1 {
            l1 - p1 * (l2 - l1) / (p2 - p1)
        } else {
            l1
        }
    } else {
        laplace_values[order[0]]
    };
    Ok(AbelianResult {
        t_final,
        time_limit,
        p_ladder: p_ladder.to_vec(),
        laplace_values,
        laplace_limit,
        gap: (time_limit - laplace_limit).abs(),
    })
}

/// `p·𝓛[e^{iks} w](p) = p·W(p − ik)` for the free problem and
/// `p·𝓛[e^{iks} u](p) = W(p − ik)` for the forced one.
pub fn laplace_side_average(
    op: &crate::operator_lab::LinearOperator,
    f: &[C64],
    k: f64,
    p: f64,
    kind: TrajectoryKind,
) -> Result<Vec<C64>> {
    let w = resolvent_solve_p(op, f, C64::new(p, -k))?;
    Ok(match kind {
        TrajectoryKind::Free => w.into_iter().map(|x| x * p).collect(),
        TrajectoryKind::Forced { .. } => w,
    })
}
