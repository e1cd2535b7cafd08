use super::resolvent_solve_k;
use crate::cx::{diff_norm, norm, to_cx, Cx, C64};
use crate::error::Result;
use crate::operator_lab::LinearOperator;
use serde::Serialize;

/// `ε_j = 0.1 · 2^{-j}`, `j = 0..=20`.
pub fn default_ladder() -> Vec<f64> {
    (0..=20).map(|j| 0.1 * 0.5f64.powi(j)).collect()
}

/// Ladder of solves `(L − k² − iε)⁻¹ f` as `ε ↓ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionResult {
    pub k: f64,
    pub ladder: Vec<f64>,
    pub iterates: Vec<Vec<C64>>,
    pub limit: Vec<C64>,
    /// First-order Richardson extrapolation `2 x(ε_N) − x(ε_{N−1})` (ratio-2 ladder).
    pub extrapolated: Vec<C64>,
    pub converged: bool,
    /// `‖x(ε_j) − x(ε_{j+1})‖`
    pub cauchy_norms: Vec<f64>,
    pub tolerance: f64,
    /// Ladder index at which a solve failed, if any.
    pub failure_index: Option<usize>,
}

impl AbsorptionResult {
    /// Slope of `log‖x(ε)‖` against `log ε` (−1 for a pole seen by `f`).
    pub fn norm_slope(&self) -> f64 {
        let xs: Vec<f64> = self.ladder.iter().take(self.iterates.len()).map(|e| e.ln()).collect();
        let ys: Vec<f64> = self.iterates.iter().map(|x| norm(x).max(f64::MIN_POSITIVE).ln()).collect();
        super::decompose::fit_line(&xs, &ys).0
    }
}

pub fn limiting_absorption(op: &LinearOperator, f: &[C64], k: f64, ladder: Option<&[f64]>) -> Result<AbsorptionResult> {
    let ladder: Vec<f64> = ladder.map_or_else(default_ladder, <[f64]>::to_vec);
    if ladder.is_empty() || ladder.iter().any(|e| !(*e > 0.0)) || ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(crate::SpectreError::config("absorption.ladder", "must be strictly decreasing and positive"));
    }
    let tolerance = 1e-6 * norm(f);
    let mut iterates = Vec::with_capacity(ladder.len());
    let mut failure_index = None;
    for (j, &eps) in ladder.iter().enumerate() {
        match resolvent_solve_k(op, f, C64::new(k * k, eps)) {
            Ok(x) => iterates.push(x),
            Err(_) => {
                failure_index = Some(j);
                break;
            }
        }
    }
    if iterates.is_empty() {
        // nothing solved: report the failure with an empty ladder prefix
        return Ok(AbsorptionResult {
            k,
            ladder,
            iterates,
            limit: vec![C64::new(f64::NAN, 0.0); f.len()],
            extrapolated: vec![C64::new(f64::NAN, 0.0); f.len()],
            converged: false,
            cauchy_norms: Vec::new(),
            tolerance,
            failure_index,
        });
    }
    let cauchy_norms: Vec<f64> = iterates.windows(2).map(|w| diff_norm(&w[0], &w[1])).collect();
    let converged = failure_index.is_none() && cauchy_norms.last().is_some_and(|&c| c < tolerance);
    let limit = iterates.last().cloned().unwrap_or_default();
    let extrapolated = match iterates.len() {
        0 | 1 => limit.clone(),
        m => iterates[m - 1].iter().zip(&iterates[m - 2]).map(|(a, b)| 2.0 * a - b).collect(),
    };
    Ok(AbsorptionResult { k, ladder, iterates, limit, extrapolated, converged, cauchy_norms, tolerance, failure_index })
}

impl Serialize for AbsorptionResult {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out<'a> {
            schema: u32,
            k: f64,
            ladder: &'a [f64],
            iterates: Vec<Vec<Cx>>,
            limit: Vec<Cx>,
            extrapolated: Vec<Cx>,
            converged: bool,
            cauchy_norms: &'a [f64],
            tolerance: f64,
            failure_index: Option<usize>,
            norm_slope: f64,
        }
        Out {
            schema: 1,
            k: self.k,
            ladder: &self.ladder,
            iterates: self.iterates.iter().map(|x| to_cx(x)).collect(),
            limit: to_cx(&self.limit),
            extrapolated: to_cx(&self.extrapolated),
            converged: self.converged,
            cauchy_norms: &self.cauchy_norms,
            tolerance: self.tolerance,
            failure_index: self.failure_index,
            norm_slope: self.norm_slope(),
        }
        .serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_lab::{build_operator, OperatorSpec};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn regular_point_converges() {
        let op = build_operator(&OperatorSpec::diagonal(&[1.0, 4.0])).unwrap();
        let r = limiting_absorption(&op, &[c(1.0), c(1.0)], 2f64.sqrt(), None).unwrap();
        assert!(r.converged);
        assert!(diff_norm(&r.limit, &[c(-1.0), c(0.5)]) < 1e-6);
        assert_eq!(r.ladder.len(), 21);
    }

    #[test]
    fn eigenvalue_blows_up_like_inverse_eps() {
        let op = build_operator(&OperatorSpec::diagonal(&[1.0])).unwrap();
        let r = limiting_absorption(&op, &[c(1.0)], 1.0, None).unwrap();
        assert!(!r.converged);
        for (x, eps) in r.iterates.iter().zip(&r.ladder) {
            assert!((norm(x) - 1.0 / eps).abs() <= 1e-9 / eps);
        }
        assert!((r.norm_slope() + 1.0).abs() < 1e-9);
    }

    #[test]
    fn unseen_eigenvalue_converges() {
        let op = build_operator(&OperatorSpec::diagonal(&[1.0, 4.0])).unwrap();
        let r = limiting_absorption(&op, &[c(1.0), c(0.0)], 2.0, None).unwrap();
        assert!(r.converged);
        assert!(diff_norm(&r.limit, &[c(-1.0 / 3.0), c(0.0)]) < 1e-6);
    }

    #[test]
    fn json_has_schema() {
        let op = build_operator(&OperatorSpec::diagonal(&[1.0])).unwrap();
        let r = limiting_absorption(&op, &[c(1.0)], 0.5, Some(&[0.1, 0.05])).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["iterates"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn bad_ladder_rejected() {
        let op = build_operator(&OperatorSpec::diagonal(&[1.0])).unwrap();
        assert!(limiting_absorption(&op, &[c(1.0)], 0.5, Some(&[0.1, 0.2])).is_err());
    }
}
