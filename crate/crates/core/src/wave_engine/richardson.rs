use super::WaveTrajectory;
use crate::cx::{diff_norm, norm};
use crate::error::{Result, SpectreError};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RichardsonReport {
    pub times: Vec<f64>,
    /// `‖w_dt(t) − w_{dt/2}(t)‖` at the coarse sample times.
    pub abs_diff: Vec<f64>,
    /// Difference relative to `max(‖w_{dt/2}(t)‖, 1)`.
    pub rel_diff: Vec<f64>,
    pub max_abs: f64,
    pub max_rel: f64,
    pub tolerance: f64,
    pub flagged: bool,
}

/// Compares a trajectory with its half-step rerun. `tolerance` applies to
/// the relative difference.
pub fn richardson_refine(coarse: &WaveTrajectory, fine: &WaveTrajectory, tolerance: f64) -> Result<RichardsonReport> {
    let same_kind = coarse.kind() == fine.kind();
    let halved = (coarse.dt() - 2.0 * fine.dt()).abs() <= 1e-12 * coarse.dt();
    if !same_kind || !halved || coarse.dim() != fine.dim() || coarse.config().method != fine.config().method {
        return Err(SpectreError::Usage(
            "richardson_refine needs identical runs with dt halved".into(),
        ));
    }
    let mut rep = RichardsonReport {
        times: Vec::new(),
        abs_diff: Vec::new(),
        rel_diff: Vec::new(),
        max_abs: 0.0,
        max_rel: 0.0,
        tolerance,
        flagged: false,
    };
    for j in coarse.sample_indices() {
        if 2 * j > fine.steps() {
            break;
        }
        let a = coarse.fine_w(j);
        let b = fine.fine_w(2 * j);
        let d = diff_norm(a, b);
        let r = d / norm(b).max(1.0);
        rep.times.push(j as f64 * coarse.dt());
        rep.abs_diff.push(d);
        rep.rel_diff.push(r);
        rep.max_abs = rep.max_abs.max(d);
        rep.max_rel = rep.max_rel.max(r);
    }
    rep.flagged = rep.max_rel > tolerance;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cx::C64;
    use crate::operator_lab::{build_operator, OperatorSpec};
    use crate::wave_engine::{evolve_free, EvolveConfig, Method};

    fn run(z: f64, t: f64, dt: f64) -> WaveTrajectory {
        let op = build_operator(&OperatorSpec::diagonal(&[z])).unwrap();
        evolve_free(&op, &[C64::new(1.0, 0.0)], &EvolveConfig::new(t, dt, Method::Rk4).with_stride(10), None).unwrap()
    }

    #[test]
    fn rk4_step_halving_on_oscillator() {
        let rep = richardson_refine(&run(1.0, 100.0, 0.01), &run(1.0, 100.0, 0.005), 1e-8).unwrap();
        assert!(rep.max_abs <= 1e-8, "{}", rep.max_abs);
        assert!(!rep.flagged);
    }

    #[test]
    fn identical_runs_have_zero_difference() {
        let a = run(1.0, 10.0, 0.01);
        let b = run(1.0, 10.0, 0.005);
        let rep = richardson_refine(&b, &run(1.0, 10.0, 0.0025), 1e-6).unwrap();
        assert!(rep.max_abs > 0.0);
        let same = richardson_refine(&a, &b, 1e-6).unwrap();
        assert!(same.times.len() > 10);
        // exact same data on both sides gives exactly zero
        let tr = WaveTrajectory::from_fine(1, 0.02, b.fine.iter().step_by(2).copied().collect(), b.kind(), 1);
        let zero = richardson_refine(&tr, &WaveTrajectory::from_fine(1, 0.01, b.fine.clone(), b.kind(), 1), 1e-6).unwrap();
        assert_eq!(zero.max_abs, 0.0);
    }

    #[test]
    fn growing_solution_uses_relative_measure() {
        let rep = richardson_refine(&run(-1.0, 30.0, 0.01), &run(-1.0, 30.0, 0.005), 1e-8).unwrap();
        assert!(rep.max_abs > 1e-8);
        assert!(rep.max_rel < 1e-8, "{}", rep.max_rel);
    }

    #[test]
    fn mismatched_configs_rejected() {
        assert!(richardson_refine(&run(1.0, 10.0, 0.01), &run(1.0, 10.0, 0.01), 1e-8).is_err());
    }
}
