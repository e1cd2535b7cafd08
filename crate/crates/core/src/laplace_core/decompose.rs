//! Split of `W(p)` into imaginary-axis poles, right-half-plane poles and an
//! analytic remainder `W₁`.

use super::bromwich::LaplaceSampler;
use super::resolvent_solve_p;
use crate::cx::{norm, Cx, C64};
use crate::error::Result;
use crate::operator_lab::{check_generic, p_plane_poles, LinearOperator, PoleClass, SpectralOracle, DEFAULT_TOL_GEN};
use serde::Serialize;
use std::io::Write;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImagPole {
    /// Pole at `p = −i k`.
    pub k: f64,
    pub v: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RightPole {
    pub kappa: C64,
    pub b: Vec<C64>,
}

/// Least-squares fit `‖W₁(iτ)‖ ≈ c / (1 + |τ|)^γ` over `|τ| ∈ [10, 10⁴]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundFit {
    pub c: f64,
    pub gamma: f64,
    /// Max deviation of `log‖W₁‖` from the fitted line.
    pub residual: f64,
}

impl BoundFit {
    pub fn bound(&self, tau: f64) -> f64 {
        self.c / (1.0 + tau.abs()).powf(self.gamma)
    }
}

/// `W₁(p) = W(p) − Σ v_j/(p + ik_j) − Σ b_m/(p − κ_m)`.
///
/// [`W1Sampler::eval`] computes this by a resolvent solve minus the extracted
/// pole terms; [`W1Sampler::eval_closed`] sums the left-half-plane pole
/// terms, which is algebraically the same function.
#[derive(Debug, Clone)]
pub struct W1Sampler {
    op: LinearOperator,
    f: Vec<C64>,
    imag: Vec<ImagPole>,
    right: Vec<RightPole>,
    left: Vec<(C64, Vec<C64>)>,
    scale: f64,
}

impl W1Sampler {
    pub fn left_poles(&self) -> &[(C64, Vec<C64>)] {
        &self.left
    }

    pub fn eval_closed(&self, p: C64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.f.len()];
        for (p0, r) in &self.left {
            crate::cx::axpy(&mut out, 1.0 / (p - p0), r);
        }
        out
    }

    fn pole_terms(&self, p: C64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.f.len()];
        for ip in &self.imag {
            crate::cx::axpy(&mut out, 1.0 / (p + C64::new(0.0, ip.k)), &ip.v);
        }
        for rp in &self.right {
            crate::cx::axpy(&mut out, 1.0 / (p - rp.kappa), &rp.b);
        }
        out
    }
}

impl LaplaceSampler for W1Sampler {
    fn dim(&self) -> usize {
        self.f.len()
    }

    fn eval(&self, p: C64) -> Result<Vec<C64>> {
        let w = resolvent_solve_p(&self.op, &self.f, p)?;
        let poles = self.pole_terms(p);
        Ok(w.iter().zip(&poles).map(|(a, b)| a - b).collect())
    }

    /// `lim p W₁(p) = Σ` left residues `= −Σ v_j − Σ b_m`.
    fn leading_coefficient(&self) -> Option<Vec<C64>> {
        let mut c = vec![C64::new(0.0, 0.0); self.f.len()];
        for (_, r) in &self.left {
            crate::cx::axpy(&mut c, C64::new(1.0, 0.0), r);
        }
        Some(c)
    }

    fn is_identically_zero(&self) -> bool {
        self.left.iter().all(|(_, r)| norm(r) <= 1e-14 * self.scale)
    }

    /// `‖f‖/|p|² + Σ ‖residue‖/|p − p₀|` over the extracted poles.
    fn cancellation_scale(&self, p: C64) -> f64 {
        let imag: f64 = self.imag.iter().map(|ip| norm(&ip.v) / (p + C64::new(0.0, ip.k)).norm()).sum();
        let right: f64 = self.right.iter().map(|rp| norm(&rp.b) / (p - rp.kappa).norm()).sum();
        norm(&self.f) / p.norm_sqr().max(1.0) + imag + right
    }
}

#[derive(Debug, Clone)]
pub struct DecompositionReport {
    pub imag_poles: Vec<ImagPole>,
    pub right_poles: Vec<RightPole>,
    pub w1_sampler: W1Sampler,
    /// `None` when `W₁ ≡ 0` (no left-half-plane poles).
    pub bound_fit: Option<BoundFit>,
    pub generic_f: bool,
    pub warnings: Vec<String>,
}

impl DecompositionReport {
    pub fn w1_vanishes(&self) -> bool {
        self.bound_fit.is_none()
    }

    /// Assumption A's decay condition `γ > 1/2` (vacuous when `W₁ ≡ 0`).
    pub fn decay_ok(&self) -> bool {
        self.bound_fit.is_none_or(|b| b.gamma > 0.5)
    }

    /// `Σ v_j e^{−ik_j t} + Σ b_m e^{κ_m t}`
    pub fn modes_at(&self, t: f64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.w1_sampler.f.len()];
        for ip in &self.imag_poles {
            crate::cx::axpy(&mut out, C64::new(0.0, -ip.k * t).exp(), &ip.v);
        }
        for rp in &self.right_poles {
            crate::cx::axpy(&mut out, (rp.kappa * t).exp(), &rp.b);
        }
        out
    }
}

fn bound_taus() -> Vec<f64> {
    let m = 96;
    (0..m).map(|i| 10f64 * 1000f64.powf(i as f64 / (m - 1) as f64)).collect()
}

pub fn decompose(op: &LinearOperator, oracle: &SpectralOracle, f: &[C64]) -> Result<DecompositionReport> {
    let tol_real = oracle.default_tol_real();
    let poles = p_plane_poles(oracle, f, tol_real)?;
    let mut warnings = Vec::new();
    let generic_f = match check_generic(oracle, f, DEFAULT_TOL_GEN) {
        Ok(g) => {
            if !g.generic {
                warnings.push("f is not generic: some eigenvalues have P_i f ≈ 0".to_string());
            }
            g.generic
        }
        Err(e) => {
            warnings.push(e.to_string());
            false
        }
    };

    let mut imag = Vec::new();
    let mut right = Vec::new();
    let mut left = Vec::new();
    for p in poles {
        match p.class {
            PoleClass::ImaginaryAxis => imag.push(ImagPole { k: p.k().unwrap_or(0.0), v: p.residue }),
            PoleClass::RightHalf => right.push(RightPole { kappa: p.pole, b: p.residue }),
            PoleClass::LeftHalf => left.push((p.pole, p.residue)),
        }
    }
    let scale = norm(f).max(f64::MIN_POSITIVE)
        + imag.iter().map(|p| norm(&p.v)).sum::<f64>()
        + right.iter().map(|p| norm(&p.b)).sum::<f64>();
    let sampler = W1Sampler { op: op.clone(), f: f.to_vec(), imag: imag.clone(), right: right.clone(), left, scale };

    let bound_fit = if sampler.is_identically_zero() {
        None
    } else {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for tau in bound_taus() {
            for s in [1.0, -1.0] {
                let w = norm(&sampler.eval_closed(C64::new(0.0, s * tau)));
                xs.push((1.0 + tau).ln());
                ys.push(w.max(f64::MIN_POSITIVE).ln());
            }
        }
        let (slope, intercept, residual) = fit_line(&xs, &ys);
        Some(BoundFit { c: intercept.exp(), gamma: -slope, residual })
    };

    Ok(DecompositionReport { imag_poles: imag, right_poles: right, w1_sampler: sampler, bound_fit, generic_f, warnings })
}

/// Least squares `y ≈ slope·x + intercept`; returns the max abs residual too.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let residual = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).abs()).fold(0.0, f64::max);
    (slope, intercept, residual)
}

#[derive(Serialize)]
struct W1Row {
    tau: f64,
    norm_w1: f64,
    fitted_bound: f64,
}

/// `tau,norm_W1,fitted_bound` along the imaginary axis.
pub fn write_w1_csv<W: Write>(report: &DecompositionReport, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["tau", "norm_W1", "fitted_bound"])?;
    for tau in bound_taus() {
        let w = norm(&report.w1_sampler.eval_closed(C64::new(0.0, tau)));
        let b = report.bound_fit.map_or(0.0, |fit| fit.bound(tau));
        let row = W1Row { tau, norm_w1: w, fitted_bound: b };
        wtr.write_record([row.tau.to_string(), row.norm_w1.to_string(), row.fitted_bound.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

impl Serialize for DecompositionReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        #[derive(Serialize)]
        struct Pole {
            k: f64,
            v: Vec<Cx>,
        }
        #[derive(Serialize)]
        struct RPole {
            kappa: Cx,
            b: Vec<Cx>,
        }
        let mut st = s.serialize_struct("DecompositionReport", 5)?;
        st.serialize_field(
            "imag_poles",
            &self.imag_poles.iter().map(|p| Pole { k: p.k, v: crate::cx::to_cx(&p.v) }).collect::<Vec<_>>(),
        )?;
        st.serialize_field(
            "right_poles",
            &self
                .right_poles
                .iter()
                .map(|p| RPole { kappa: p.kappa.into(), b: crate::cx::to_cx(&p.b) })
                .collect::<Vec<_>>(),
        )?;
        st.serialize_field("left_pole_count", &self.w1_sampler.left.len())?;
        st.serialize_field("bound_fit", &self.bound_fit)?;
        st.serialize_field("generic_f", &self.generic_f)?;
        st.end()
    }
}
