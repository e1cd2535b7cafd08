//! Inverse Laplace transform along the vertical line `Re p = σ`.

use super::decompose::fit_line;
use crate::cx::{norm, Cx, C64};
use crate::error::{Result, SpectreError};
use crate::par::{map_range, map_slice, Parallelism};
use serde::Serialize;

/// A vector-valued function of `p`, analytic to the right of the contour.
pub trait LaplaceSampler: Sync {
    fn dim(&self) -> usize;

    fn eval(&self, p: C64) -> Result<Vec<C64>>;

    /// `lim_{p→∞} p F(p)`, when known. Lets the inverter remove the slowly
    /// decaying `c/(p+1)` part analytically.
    fn leading_coefficient(&self) -> Option<Vec<C64>> {
        None
    }

    fn is_identically_zero(&self) -> bool {
        false
    }

    /// Size of the terms that cancel when `eval(p)` is formed as a
    /// difference. Samples within roundoff of it carry no decay information
    /// and are left out of the tail fit.
    fn cancellation_scale(&self, _p: C64) -> f64 {
        0.0
    }
}

impl<F> LaplaceSampler for (usize, F)
where
    F: Fn(C64) -> Vec<C64> + Sync,
{
    fn dim(&self) -> usize {
        self.0
    }

    fn eval(&self, p: C64) -> Result<Vec<C64>> {
        Ok((self.1)(p))
    }
}

/// Relative level below which a cancelled difference is treated as zero.
const ROUNDOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BromwichOptions {
    pub sigma: f64,
    pub tau_max: f64,
    /// Trapezoid nodes on `[−τ_max, τ_max]`.
    pub n_quad: usize,
    /// Subtract `c/(p+1)` before quadrature and add back `c e^{−t}`.
    pub subtract_leading: bool,
    #[serde(skip)]
    pub exec: Parallelism,
}

impl Default for BromwichOptions {
    fn default() -> Self {
        // step 0.05
        BromwichOptions { sigma: 0.1, tau_max: 1e4, n_quad: 400_001, subtract_leading: true, exec: Parallelism::Parallel }
    }
}

impl BromwichOptions {
    pub fn step(&self) -> f64 {
        2.0 * self.tau_max / (self.n_quad - 1) as f64
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(SpectreError::config("bromwich.sigma", "must be positive"));
        }
        if !(self.tau_max > 10.0) || !self.tau_max.is_finite() {
            return Err(SpectreError::config("bromwich.tau_max", "must exceed 10"));
        }
        if self.n_quad < 3 {
            return Err(SpectreError::config("bromwich.n_quad", "need at least 3 nodes"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BromwichResult {
    pub t: f64,
    pub value: Vec<C64>,
    /// Bound on the contribution of `|τ| > τ_max`, both tails.
    pub tail_bound: f64,
    /// Fitted decay `‖F(σ+iτ)‖ ≈ c |τ|^{−γ'}` of the integrand actually
    /// quadratured. `None` when that integrand is at roundoff level.
    pub gamma_fit: Option<f64>,
    pub c_fit: Option<f64>,
    pub subtracted_leading: bool,
}

impl Serialize for BromwichResult {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out {
            t: f64,
            value: Vec<Cx>,
            tail_bound: f64,
            gamma_fit: Option<f64>,
            c_fit: Option<f64>,
            subtracted_leading: bool,
        }
        Out {
            t: self.t,
            value: crate::cx::to_cx(&self.value),
            tail_bound: self.tail_bound,
            gamma_fit: self.gamma_fit,
            c_fit: self.c_fit,
            subtracted_leading: self.subtracted_leading,
        }
        .serialize(s)
    }
}

pub fn bromwich_invert<S: LaplaceSampler + ?Sized>(sampler: &S, t: f64, opts: &BromwichOptions) -> Result<BromwichResult> {
    Ok(bromwich_invert_many(sampler, &[t], opts)?.remove(0))
}

/// Inverts at several times from one set of contour samples.
pub fn bromwich_invert_many<S: LaplaceSampler + ?Sized>(
    sampler: &S,
    times: &[f64],
    opts: &BromwichOptions,
) -> Result<Vec<BromwichResult>> {
    opts.validate()?;
    let n = sampler.dim();
    let zero = C64::new(0.0, 0.0);
    if sampler.is_identically_zero() {
        return Ok(times
            .iter()
            .map(|&t| BromwichResult {
                t,
                value: vec![zero; n],
                tail_bound: 0.0,
                gamma_fit: None,
                c_fit: None,
                subtracted_leading: false,
            })
            .collect());
    }

    let lead = if opts.subtract_leading { sampler.leading_coefficient() } else { None };
    let subtracted = lead.is_some();
    let integrand = |p: C64| -> Result<Vec<C64>> {
        let mut v = sampler.eval(p)?;
        if let Some(c) = &lead {
            let s = 1.0 / (p + 1.0);
            for (x, ci) in v.iter_mut().zip(c) {
                *x -= ci * s;
            }
        }
        Ok(v)
    };

    // decay fit on |τ| ∈ [10, τ_max]
    let m = 48;
    let fit_taus: Vec<f64> = (0..m).map(|i| 10.0 * (opts.tau_max / 10.0).powf(i as f64 / (m - 1) as f64)).collect();
    let mut xs = Vec::with_capacity(2 * m);
    let mut ys = Vec::with_capacity(2 * m);
    let mut peak = 0.0f64;
    for &tau in &fit_taus {
        for s in [1.0, -1.0] {
            let p = C64::new(opts.sigma, s * tau);
            let r = norm(&integrand(p)?);
            if r <= ROUNDOFF * sampler.cancellation_scale(p) {
                continue;
            }
            peak = peak.max(r);
            xs.push(tau.ln());
            ys.push(r.max(f64::MIN_POSITIVE).ln());
        }
    }
    let scale = norm(&sampler.eval(C64::new(opts.sigma + 1.0, 0.0))?).max(f64::MIN_POSITIVE);
    let negligible = xs.len() < 8 || peak <= 1e-13 * scale;
    let (gamma_fit, c_fit) = if negligible {
        (None, None)
    } else {
        let (slope, intercept, _) = fit_line(&xs, &ys);
        // c chosen so the fitted power law dominates every fit sample
        let gamma = -slope;
        let c = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y + gamma * x).exp())
            .fold(intercept.exp(), f64::max);
        if gamma <= 1.0 {
            return Err(SpectreError::AccuracyUnattainable(format!(
                "integrand decays like |τ|^-{gamma:.3}; the truncated Bromwich tail is not integrable"
            )));
        }
        (Some(gamma), Some(c))
    };

    let h = opts.step();
    let nodes = opts.n_quad;
    let samples: Vec<Result<Vec<C64>>> =
        map_range(opts.exec, nodes, |j| integrand(C64::new(opts.sigma, -opts.tau_max + j as f64 * h)));
    let samples: Vec<Vec<C64>> = samples.into_iter().collect::<Result<_>>()?;

    let results = map_slice(opts.exec, times, |&t| {
        let mut acc = vec![zero; n];
        for (j, v) in samples.iter().enumerate() {
            let tau = -opts.tau_max + j as f64 * h;
            let w = if j == 0 || j == nodes - 1 { 0.5 } else { 1.0 };
            let e = C64::from_polar(w, tau * t);
            for (a, x) in acc.iter_mut().zip(v) {
                *a += e * x;
            }
        }
        let pref = (opts.sigma * t).exp() * h / (2.0 * std::f64::consts::PI);
        let mut value: Vec<C64> = acc.into_iter().map(|a| a * pref).collect();
        if let Some(c) = &lead {
            let e = (-t).exp();
            for (x, ci) in value.iter_mut().zip(c) {
                *x += ci * e;
            }
        }
        let tail_bound = match (gamma_fit, c_fit) {
            (Some(g), Some(c)) => {
                2.0 * c / (g - 1.0) * opts.tau_max.powf(1.0 - g) * (opts.sigma * t).exp() / (2.0 * std::f64::consts::PI)
            }
            _ => 0.0,
        };
        BromwichResult { t, value, tail_bound, gamma_fit, c_fit, subtracted_leading: subtracted }
    });
    Ok(results)
}
