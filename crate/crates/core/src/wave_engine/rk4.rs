use super::{EvolveConfig, TrajectoryKind, WaveTrajectory, GROWTH_GUARD};
use crate::cx::{norm, C64};
use crate::operator_lab::LinearOperator;

/// Classical 4-stage Runge–Kutta on `(w, ẇ)' = (ẇ, −Lw + f g(t))` with
/// `g = 0` (free) or `g = e^{-ikt}` (forced), zero initial displacement and
/// `ẇ(0) = f` (free) or `0` (forced).
pub(super) fn integrate(op: &LinearOperator, f: &[C64], cfg: &EvolveConfig, kind: TrajectoryKind) -> WaveTrajectory {
    let n = op.dim();
    let steps = cfg.steps();
    let h = cfg.dt;
    let zero = C64::new(0.0, 0.0);

    let forcing = |t: f64| match kind {
        TrajectoryKind::Free => zero,
        TrajectoryKind::Forced { k } => C64::new(0.0, -k * t).exp(),
    };

    let mut w = vec![zero; n];
    let mut v = match kind {
        TrajectoryKind::Free => f.to_vec(),
        TrajectoryKind::Forced { .. } => vec![zero; n],
    };
    let mut fine = Vec::with_capacity((steps + 1) * n);
    let mut vel = Vec::with_capacity((steps + 1) * n);
    fine.extend_from_slice(&w);
    vel.extend_from_slice(&v);

    let (mut k1w, mut k1v) = (vec![zero; n], vec![zero; n]);
    let (mut k2w, mut k2v) = (vec![zero; n], vec![zero; n]);
    let (mut k3w, mut k3v) = (vec![zero; n], vec![zero; n]);
    let (mut k4w, mut k4v) = (vec![zero; n], vec![zero; n]);
    let (mut tw, mut tv) = (vec![zero; n], vec![zero; n]);

    let accel = |x: &[C64], g: C64, out: &mut [C64]| {
        op.apply_into(x, out);
        for (o, fi) in out.iter_mut().zip(f) {
            *o = -*o + fi * g;
        }
    };

    let mut overflow_at = None;
    for j in 0..steps {
        let t = j as f64 * h;
        let (g0, gh, g1) = (forcing(t), forcing(t + 0.5 * h), forcing(t + h));

        k1w.copy_from_slice(&v);
        accel(&w, g0, &mut k1v);

        for i in 0..n {
            tw[i] = w[i] + k1w[i] * (0.5 * h);
            tv[i] = v[i] + k1v[i] * (0.5 * h);
        }
        k2w.copy_from_slice(&tv);
        accel(&tw, gh, &mut k2v);

        for i in 0..n {
            tw[i] = w[i] + k2w[i] * (0.5 * h);
            tv[i] = v[i] + k2v[i] * (0.5 * h);
        }
        k3w.copy_from_slice(&tv);
        accel(&tw, gh, &mut k3v);

        for i in 0..n {
            tw[i] = w[i] + k3w[i] * h;
            tv[i] = v[i] + k3v[i] * h;
        }
        k4w.copy_from_slice(&tv);
        accel(&tw, g1, &mut k4v);

        let s = h / 6.0;
        for i in 0..n {
            w[i] += (k1w[i] + 2.0 * k2w[i] + 2.0 * k3w[i] + k4w[i]) * s;
            v[i] += (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]) * s;
        }
        let wn = norm(&w);
        if !(wn <= GROWTH_GUARD) {
            overflow_at = Some((j + 1) as f64 * h);
            break;
        }
        fine.extend_from_slice(&w);
        vel.extend_from_slice(&v);
    }

    WaveTrajectory { n, dt: h, fine, velocity: Some(vel), kind, config: cfg.clone(), overflow_at }
}
