use crate::error::{Result, SpectreError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Rk4,
    Spectral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    #[serde(rename = "T")]
    pub t_final: f64,
    pub dt: f64,
    #[serde(default)]
    pub method: Method,
    #[serde(default = "default_stride")]
    pub sample_stride: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forcing_k: Option<f64>,
}

fn default_stride() -> usize {
    1
}

/// Largest admissible rk4 step, `0.5 / √(ρ + 1)`.
pub fn dt_max(spectral_radius: f64) -> f64 {
    0.5 / (spectral_radius + 1.0).sqrt()
}

impl EvolveConfig {
    pub fn new(t_final: f64, dt: f64, method: Method) -> Self {
        EvolveConfig { t_final, dt, method, sample_stride: 1, forcing_k: None }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.sample_stride = stride;
        self
    }

    pub fn forced(mut self, k: f64) -> Self {
        self.forcing_k = Some(k);
        self
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    /// Checks basic ranges, and the rk4 step bound when `spectral_radius` is given.
    pub fn validate(&self, spectral_radius: Option<f64>) -> Result<()> {
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(SpectreError::config("evolve.T", "must be a positive number"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(SpectreError::config("evolve.dt", "must be a positive number"));
        }
        if self.t_final / self.dt > 1e9 {
            return Err(SpectreError::config("evolve.dt", "T/dt exceeds 1e9 steps"));
        }
        if self.t_final / self.dt < 1.0 {
            return Err(SpectreError::config("evolve.dt", "dt exceeds T"));
        }
        if self.sample_stride == 0 {
            return Err(SpectreError::config("evolve.sample_stride", "must be ≥ 1"));
        }
        if let Some(k) = self.forcing_k {
            if !k.is_finite() {
                return Err(SpectreError::config("evolve.forcing_k", "must be finite"));
            }
        }
        if let (Method::Rk4, Some(rho)) = (self.method, spectral_radius) {
            let bound = dt_max(rho);
            if self.dt > bound {
                return Err(SpectreError::config(
                    "evolve.dt",
                    format!("dt = {} exceeds the rk4 bound 0.5/sqrt(rho+1) = {bound:.6}", self.dt),
                ));
            }
        }
        Ok(())
    }
}
