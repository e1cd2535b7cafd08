//! Exact modal solutions for diagonalizable operators.

use super::{EvolveConfig, TrajectoryKind, WaveTrajectory, GROWTH_GUARD};
use crate::cx::{norm, C64};
use crate::error::{Result, SpectreError};
use crate::operator_lab::{principal_sqrt, SpectralOracle};

/// `w(t) = Σ_i P_i f · sin(√z_i t)/√z_i` and its forced counterpart.
#[derive(Debug, Clone)]
pub struct SpectralEvolver {
    n: usize,
    z: Vec<C64>,
    omega: Vec<C64>,
    phi: Vec<Vec<C64>>,
    tol_real: f64,
}

/// `sin(ωt)/ω`, continuous at `ω = 0`.
fn sin_over(omega: C64, t: f64) -> C64 {
    let x = omega * t;
    if x.norm() < 1e-4 {
        t * (1.0 - x * x / 6.0 + x * x * x * x / 120.0)
    } else {
        (x).sin() / omega
    }
}

/// `∫₀ᵗ e^{ias} ds` for complex `a`.
pub fn integral_exp(a: C64, t: f64) -> C64 {
    let x = C64::i() * a * t;
    if x.norm() < 1e-4 {
        t * (1.0 + x / 2.0 + x * x / 6.0 + x * x * x / 24.0)
    } else {
        (x.exp() - 1.0) / (C64::i() * a)
    }
}

/// `∫₀ᵗ s e^{iks} ds` for real `k`.
fn integral_s_exp(k: f64, t: f64) -> C64 {
    if (k * t).abs() < 1e-6 {
        C64::new(t * t / 2.0, k * t * t * t / 3.0)
    } else {
        let ik = C64::new(0.0, k);
        C64::new(0.0, k * t).exp() * (t / ik + 1.0 / (k * k)) - 1.0 / (k * k)
    }
}

impl SpectralEvolver {
    pub fn new(oracle: &SpectralOracle, f: &[C64]) -> Result<Self> {
        if !oracle.diagonalizable() {
            return Err(SpectreError::Unsupported("spectral evolution needs a diagonalizable operator".into()));
        }
        if f.len() != oracle.dim() {
            return Err(SpectreError::Usage(format!("f has length {}, operator has n = {}", f.len(), oracle.dim())));
        }
        let tol_real = oracle.default_tol_real();
        let z = oracle.eigenvalues().to_vec();
        let omega = z.iter().map(|&zi| principal_sqrt(zi, tol_real)).collect();
        Ok(SpectralEvolver { n: oracle.dim(), z, omega, phi: oracle.project_all(f)?, tol_real })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn combine(&self, coeff: impl Fn(usize) -> C64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.n];
        for (i, phi) in self.phi.iter().enumerate() {
            let c = coeff(i);
            crate::cx::axpy(&mut out, c, phi);
        }
        out
    }

    /// Free solution `w(t)`.
    pub fn w_at(&self, t: f64) -> Vec<C64> {
        self.combine(|i| sin_over(self.omega[i], t))
    }

    /// Free velocity `ẇ(t)`.
    pub fn w_dot_at(&self, t: f64) -> Vec<C64> {
        self.combine(|i| (self.omega[i] * t).cos())
    }

    /// Forced solution `u(t)` of `ü + Lu = f e^{-ikt}` with zero data.
    pub fn u_at(&self, k: f64, t: f64) -> Vec<C64> {
        let k2 = k * k;
        let e = C64::new(0.0, -k * t).exp();
        self.combine(|i| {
            let z = self.z[i];
            let om = self.omega[i];
            if (z - k2).norm() <= self.tol_real * (1.0 + k2) {
                if k.abs() < 1e-12 {
                    C64::new(t * t / 2.0, 0.0)
                } else {
                    C64::new(0.0, 1.0 / (2.0 * k)) * (t * e - (k * t).sin() / k)
                }
            } else {
                (e - (om * t).cos() + C64::new(0.0, k) * sin_over(om, t)) / (z - k2)
            }
        })
    }

    /// Exact `M(k,t) = (1/t) ∫₀ᵗ e^{iks} w(s) ds` for the free solution.
    pub fn modulated_average_at(&self, k: f64, t: f64) -> Vec<C64> {
        if t <= 0.0 {
            return vec![C64::new(0.0, 0.0); self.n];
        }
        let kc = C64::new(k, 0.0);
        self.combine(|i| {
            let om = self.omega[i];
            let integral = if om.norm() * t.max(1.0) < 1e-9 {
                integral_s_exp(k, t)
            } else {
                (integral_exp(kc + om, t) - integral_exp(kc - om, t)) / (2.0 * C64::i() * om)
            };
            integral / t
        })
    }

    /// Samples the exact solution on the uniform grid of `cfg`.
    pub(super) fn sample(&self, cfg: &EvolveConfig, kind: TrajectoryKind) -> WaveTrajectory {
        let steps = cfg.steps();
        let n = self.n;
        let mut fine = Vec::with_capacity((steps + 1) * n);
        let mut overflow_at = None;
        for j in 0..=steps {
            let t = j as f64 * cfg.dt;
            let x = match kind {
                TrajectoryKind::Free => self.w_at(t),
                TrajectoryKind::Forced { k } => self.u_at(k, t),
            };
            if !(norm(&x) <= GROWTH_GUARD) {
                overflow_at = Some(t);
                break;
            }
            fine.extend(x);
        }
        // w(0) = 0 exactly
        fine[..n].iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        WaveTrajectory { n, dt: cfg.dt, fine, velocity: None, kind, config: cfg.clone(), overflow_at }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integral_helpers() {
        let t = 2.3;
        let a = C64::new(0.7, -0.2);
        let direct: C64 = {
            let m = 200_000;
            let h = t / m as f64;
            (0..=m)
                .map(|j| {
                    let w = if j == 0 || j == m { 0.5 } else { 1.0 };
                    w * (C64::i() * a * (j as f64 * h)).exp()
                })
                .sum::<C64>()
                * h
        };
        assert!((integral_exp(a, t) - direct).norm() < 1e-9);
        assert!((integral_exp(C64::new(0.0, 0.0), t) - t).norm() < 1e-15);
        let s_exp = integral_s_exp(1.5, t);
        let h = t / 200_000.0;
        let direct: C64 = (0..=200_000)
            .map(|j| {
                let s = j as f64 * h;
                let w = if j == 0 || j == 200_000 { 0.5 } else { 1.0 };
                w * s * C64::new(0.0, 1.5 * s).exp()
            })
            .sum::<C64>()
            * h;
        assert!((s_exp - direct).norm() < 1e-9);
    }
}
