//! Long-horizon integration of the free and forced wave problems
//!
//! ```text
//! ẅ + Lw = 0,            w(0) = 0, ẇ(0) = f
//! ü + Lu = f e^{-ikt},   u(0) = 0, u̇(0) = 0
//! ```
//!
//! with running integrals accumulated by the trapezoid rule at full step
//! resolution.

mod average;
mod config;
mod export;
mod richardson;
mod rk4;
mod spectral;
mod trajectory;

pub use average::{
    modulated_average, modulated_average_at_steps, modulated_average_final, modulated_average_scan, Mask,
    ModulatedAverageSeries,
};
pub use config::{dt_max, EvolveConfig, Method};
pub use export::{write_norms_csv, write_trajectory_csv};
pub use richardson::{richardson_refine, RichardsonReport};
pub use spectral::{SpectralEvolver, integral_exp};
pub use trajectory::{TrajectoryKind, WaveTrajectory};

use crate::cx::C64;
use crate::error::{Result, SpectreError};
use crate::operator_lab::{LinearOperator, SpectralOracle};

/// Norm at which integration stops and reports overflow instead of
/// continuing into `inf`.
pub const GROWTH_GUARD: f64 = 1e250;

/// Integrates `ẅ + Lw = 0, w(0) = 0, ẇ(0) = f`.
///
/// `oracle` is required for [`Method::Spectral`] and ignored otherwise.
pub fn evolve_free(
    op: &LinearOperator,
    f: &[C64],
    cfg: &EvolveConfig,
    oracle: Option<&SpectralOracle>,
) -> Result<WaveTrajectory> {
    evolve(op, f, cfg, oracle, TrajectoryKind::Free)
}

/// Integrates `ü + Lu = f e^{-ikt}, u(0) = u̇(0) = 0` with `k = cfg.forcing_k`.
pub fn evolve_forced(
    op: &LinearOperator,
    f: &[C64],
    cfg: &EvolveConfig,
    oracle: Option<&SpectralOracle>,
) -> Result<WaveTrajectory> {
    let k = cfg
        .forcing_k
        .ok_or_else(|| SpectreError::config("evolve.forcing_k", "forced evolution requires forcing_k"))?;
    evolve(op, f, cfg, oracle, TrajectoryKind::Forced { k })
}

fn evolve(
    op: &LinearOperator,
    f: &[C64],
    cfg: &EvolveConfig,
    oracle: Option<&SpectralOracle>,
    kind: TrajectoryKind,
) -> Result<WaveTrajectory> {
    if f.len() != op.dim() {
        return Err(SpectreError::Usage(format!("f has length {}, operator has n = {}", f.len(), op.dim())));
    }
    match cfg.method {
        Method::Rk4 => {
            cfg.validate(Some(op.spectral_radius()))?;
            Ok(rk4::integrate(op, f, cfg, kind))
        }
        Method::Spectral => {
            cfg.validate(None)?;
            let oracle = oracle.ok_or_else(|| {
                SpectreError::Usage("spectral evolution requires a spectral oracle".into())
            })?;
            let ev = SpectralEvolver::new(oracle, f)?;
            Ok(ev.sample(cfg, kind))
        }
    }
}
