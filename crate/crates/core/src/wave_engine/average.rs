use super::WaveTrajectory;
use crate::cx::C64;
use crate::par::{map_slice, Parallelism};
use serde::{Deserialize, Serialize};

/// Coordinate mask: the characteristic function of an index set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mask(pub Vec<bool>);

impl Mask {
    pub fn from_indices(n: usize, indices: &[usize]) -> Self {
        let mut m = vec![false; n];
        for &i in indices {
            if i < n {
                m[i] = true;
            }
        }
        Mask(m)
    }

    /// `‖P v‖`
    pub fn norm(&self, v: &[C64]) -> f64 {
        v.iter().zip(&self.0).filter(|(_, &keep)| keep).map(|(z, _)| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

fn masked_norm(mask: Option<&Mask>, v: &[C64]) -> f64 {
    match mask {
        Some(m) => m.norm(v),
        None => crate::cx::norm(v),
    }
}

/// `M(k,t) = (1/t) ∫₀ᵗ e^{iks} w(s) ds` at the positive sample times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulatedAverageSeries {
    pub k: f64,
    pub times: Vec<f64>,
    pub values: Vec<Vec<C64>>,
    pub norms: Vec<f64>,
}

/// Walks the trapezoid accumulation of `e^{iks} w(s)` and calls `record`
/// with `(step, t, running integral)` at each requested step.
fn accumulate(traj: &WaveTrajectory, k: f64, stops: &[usize], mut record: impl FnMut(usize, f64, &[C64])) {
    let n = traj.dim();
    let dt = traj.dt();
    let mut acc = vec![C64::new(0.0, 0.0); n];
    let mut prev = traj.fine_w(0).to_vec();
    let mut stop = stops.iter().peekable();
    while stop.peek().is_some_and(|&&s| s == 0) {
        stop.next();
    }
    let half = 0.5 * dt;
    let rotate = C64::new(0.0, k * dt).exp();
    let mut phase_prev = C64::new(1.0, 0.0);
    for j in 1..=traj.steps() {
        let t = j as f64 * dt;
        // rotate incrementally, re-anchoring periodically against drift
        let phase = if j % 256 == 0 { C64::new(0.0, k * t).exp() } else { phase_prev * rotate };
        let w = traj.fine_w(j);
        for i in 0..n {
            acc[i] += (prev[i] * phase_prev + w[i] * phase) * half;
        }
        prev.copy_from_slice(w);
        phase_prev = phase;
        if stop.peek().is_some_and(|&&s| s == j) {
            stop.next();
            record(j, t, &acc);
        }
    }
}

pub fn modulated_average(traj: &WaveTrajectory, k: f64, mask: Option<&Mask>) -> ModulatedAverageSeries {
    let stops = traj.sample_indices();
    let mut out = ModulatedAverageSeries { k, times: Vec::new(), values: Vec::new(), norms: Vec::new() };
    accumulate(traj, k, &stops, |_, t, acc| {
        let m: Vec<C64> = acc.iter().map(|z| z / t).collect();
        out.norms.push(masked_norm(mask, &m));
        out.times.push(t);
        out.values.push(m);
    });
    out
}

/// `M(k, T)` at the final time only.
pub fn modulated_average_final(traj: &WaveTrajectory, k: f64) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); traj.dim()];
    let last = traj.steps();
    accumulate(traj, k, &[last], |_, t, acc| {
        out = acc.iter().map(|z| z / t).collect();
    });
    out
}

/// `M(k, t_j)` at the given step indices (ascending).
pub fn modulated_average_at_steps(traj: &WaveTrajectory, k: f64, steps: &[usize]) -> Vec<(f64, Vec<C64>)> {
    let mut out = Vec::with_capacity(steps.len());
    accumulate(traj, k, steps, |_, t, acc| out.push((t, acc.iter().map(|z| z / t).collect())));
    out
}

/// Norm-only series for many `k` at once (values are kept only at the
/// final time to bound memory).
pub fn modulated_average_scan(
    traj: &WaveTrajectory,
    ks: &[f64],
    mask: Option<&Mask>,
    exec: Parallelism,
) -> Vec<ModulatedAverageSeries> {
    let stops = traj.sample_indices();
    map_slice(exec, ks, |&k| {
        let mut out = ModulatedAverageSeries { k, times: Vec::new(), values: Vec::new(), norms: Vec::new() };
        let last = traj.steps();
        accumulate(traj, k, &stops, |j, t, acc| {
            let m: Vec<C64> = acc.iter().map(|z| z / t).collect();
            out.times.push(t);
            out.norms.push(masked_norm(mask, &m));
            if j == last {
                out.values.push(m);
            }
        });
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wave_engine::TrajectoryKind;

    fn synthetic(n: usize, dt: f64, steps: usize, w: impl Fn(f64) -> Vec<C64>) -> WaveTrajectory {
        let fine: Vec<C64> = (0..=steps).flat_map(|j| w(j as f64 * dt)).collect();
        WaveTrajectory::from_fine(n, dt, fine, TrajectoryKind::Free, 10)
    }

    #[test]
    fn sine_at_resonant_frequency() {
        let tr = synthetic(1, 0.01, 200_000, |t| vec![C64::new(t.sin(), 0.0)]);
        let m = modulated_average(&tr, 1.0, None);
        let last = m.values.last().unwrap()[0];
        assert!((last - C64::new(0.0, 0.5)).norm() < 1e-3);
    }

    #[test]
    fn sine_off_resonance_decays_like_one_over_t() {
        let tr = synthetic(1, 0.01, 100_000, |t| vec![C64::new(t.sin(), 0.0)]);
        let m = modulated_average(&tr, 0.5, None);
        for (t, nrm) in m.times.iter().zip(&m.norms) {
            // |∫ e^{0.5is} sin s| ≤ 1/0.5 + 1/1.5
            assert!(*nrm <= (2.0 + 2.0 / 3.0) / t + 1e-6, "t={t} |M|={nrm}");
        }
    }

    #[test]
    fn pure_mode_average_is_exact() {
        let v = [C64::new(0.3, -0.4), C64::new(1.0, 0.2)];
        let kj = 1.7;
        let tr = synthetic(2, 0.005, 20_000, |t| {
            let e = C64::new(0.0, -kj * t).exp();
            v.iter().map(|x| x * e).collect()
        });
        let m = modulated_average(&tr, kj, None);
        for val in &m.values {
            assert!(crate::cx::diff_norm(val, &v) < 1e-12);
        }
    }

    #[test]
    fn mask_never_exceeds_full_norm() {
        let tr = synthetic(3, 0.01, 5000, |t| {
            vec![C64::new(t.sin(), 0.0), C64::new(0.0, (2.0 * t).cos()), C64::new(t.cos(), t.sin())]
        });
        let mask = Mask::from_indices(3, &[0, 2]);
        let full = modulated_average(&tr, 1.0, None);
        let part = modulated_average(&tr, 1.0, Some(&mask));
        assert!(full.norms.iter().zip(&part.norms).all(|(a, b)| b <= a));
    }

    #[test]
    fn scan_matches_single_series() {
        let tr = synthetic(1, 0.01, 20_000, |t| vec![C64::new(t.sin(), 0.0)]);
        let ks = [0.5, 1.0, 1.5];
        let scan = modulated_average_scan(&tr, &ks, None, Parallelism::Parallel);
        for (s, &k) in scan.iter().zip(&ks) {
            let single = modulated_average(&tr, k, None);
            assert_eq!(s.norms, single.norms);
            assert_eq!(s.values[0], *single.values.last().unwrap());
            assert_eq!(modulated_average_final(&tr, k), s.values[0]);
        }
    }
}
