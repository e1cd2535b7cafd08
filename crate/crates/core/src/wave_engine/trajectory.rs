use super::EvolveConfig;
use crate::cx::C64;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TrajectoryKind {
    Free,
    Forced { k: f64 },
}

/// Sampled solution on the uniform grid `t_j = j·dt`, `j = 0..=steps`.
///
/// Every step is retained so that running integrals and modulated averages
/// are computed at full resolution; `times`/`samples`/`cumulative` expose the
/// strided view (every `sample_stride`-th step plus the last one).
#[derive(Debug, Clone)]
pub struct WaveTrajectory {
    pub(super) n: usize,
    pub(super) dt: f64,
    pub(super) fine: Vec<C64>,
    pub(super) velocity: Option<Vec<C64>>,
    pub(super) kind: TrajectoryKind,
    pub(super) config: EvolveConfig,
    pub(super) overflow_at: Option<f64>,
}

impl WaveTrajectory {
    /// Wraps externally produced samples on a uniform grid. `fine` holds
    /// `steps + 1` consecutive state vectors of length `n`.
    pub fn from_fine(n: usize, dt: f64, fine: Vec<C64>, kind: TrajectoryKind, sample_stride: usize) -> Self {
        assert!(n > 0 && fine.len().is_multiple_of(n) && fine.len() >= 2 * n, "need at least two samples of length n");
        let steps = fine.len() / n - 1;
        let config = EvolveConfig {
            t_final: steps as f64 * dt,
            dt,
            method: super::Method::Rk4,
            sample_stride: sample_stride.max(1),
            forcing_k: match kind {
                TrajectoryKind::Forced { k } => Some(k),
                TrajectoryKind::Free => None,
            },
        };
        WaveTrajectory { n, dt, fine, velocity: None, kind, config, overflow_at: None }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn kind(&self) -> TrajectoryKind {
        self.kind
    }

    pub fn config(&self) -> &EvolveConfig {
        &self.config
    }

    /// Number of completed steps.
    pub fn steps(&self) -> usize {
        self.fine.len() / self.n - 1
    }

    pub fn final_time(&self) -> f64 {
        self.steps() as f64 * self.dt
    }

    /// Time at which the growth guard stopped the integration.
    pub fn overflow_at(&self) -> Option<f64> {
        self.overflow_at
    }

    pub fn fine_w(&self, j: usize) -> &[C64] {
        &self.fine[j * self.n..(j + 1) * self.n]
    }

    pub fn fine_velocity(&self, j: usize) -> Option<&[C64]> {
        self.velocity.as_ref().map(|v| &v[j * self.n..(j + 1) * self.n])
    }

    pub fn sample_indices(&self) -> Vec<usize> {
        let steps = self.steps();
        let stride = self.config.sample_stride.max(1);
        let mut idx: Vec<usize> = (0..=steps).step_by(stride).collect();
        if *idx.last().unwrap() != steps {
            idx.push(steps);
        }
        idx
    }

    pub fn times(&self) -> Vec<f64> {
        self.sample_indices().into_iter().map(|j| j as f64 * self.dt).collect()
    }

    pub fn samples(&self) -> Vec<Vec<C64>> {
        self.sample_indices().into_iter().map(|j| self.fine_w(j).to_vec()).collect()
    }

    /// Trapezoid running integral `∫₀^{t_j} w` at every step, flattened.
    pub fn fine_cumulative(&self) -> Vec<C64> {
        let n = self.n;
        let mut out = vec![C64::new(0.0, 0.0); self.fine.len()];
        let half = 0.5 * self.dt;
        for j in 1..=self.steps() {
            for i in 0..n {
                out[j * n + i] = out[(j - 1) * n + i] + (self.fine[(j - 1) * n + i] + self.fine[j * n + i]) * half;
            }
        }
        out
    }

    /// `∫₀ᵗ w ds` at the sample times.
    pub fn cumulative(&self) -> Vec<Vec<C64>> {
        let c = self.fine_cumulative();
        let n = self.n;
        self.sample_indices().into_iter().map(|j| c[j * n..(j + 1) * n].to_vec()).collect()
    }

    /// `(t, ‖∫₀ᵗ w‖)` at the sample times.
    pub fn cumulative_norms(&self) -> Vec<(f64, f64)> {
        let c = self.fine_cumulative();
        let n = self.n;
        self.sample_indices()
            .into_iter()
            .map(|j| (j as f64 * self.dt, crate::cx::norm(&c[j * n..(j + 1) * n])))
            .collect()
    }

    /// `(t, ‖w(t)‖)` at the sample times.
    pub fn norms(&self) -> Vec<(f64, f64)> {
        self.sample_indices().into_iter().map(|j| (j as f64 * self.dt, crate::cx::norm(self.fine_w(j)))).collect()
    }
}
