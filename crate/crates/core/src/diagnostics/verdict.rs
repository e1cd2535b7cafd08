//! Stability detection and comparison of the detectors with the oracle.

use super::amplitude::AmplitudeResult;
use super::embedded::{DetectedMode, EmbeddedDetection, ScanRow, ZeroFrequencyRow};
use super::growth::{default_eps_growth, growth_rate, GrowthEstimate, DEFAULT_WINDOW_FRAC};
use crate::cx::C64;
use crate::error::Result;
use crate::operator_lab::{
    check_generic, classify_spectrum, LinearOperator, SpectralOracle, SpectrumClassification, DEFAULT_TOL_GEN,
};
use crate::wave_engine::{evolve_free, EvolveConfig, WaveTrajectory};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub stable: bool,
    pub growth: GrowthEstimate,
    pub overflow_at: Option<f64>,
    pub warnings: Vec<String>,
}

/// Growth test on the running integral of an existing free trajectory.
pub fn stability_from_trajectory(traj: &WaveTrajectory, spectral_radius: f64) -> Result<StabilityReport> {
    let growth = growth_rate(&traj.cumulative_norms(), DEFAULT_WINDOW_FRAC, default_eps_growth(spectral_radius))?;
    let overflow_at = traj.overflow_at();
    let mut warnings = Vec::new();
    if let Some(t) = overflow_at {
        warnings.push(format!("integration stopped by the growth guard at t = {t}"));
    }
    Ok(StabilityReport { stable: overflow_at.is_none() && !growth.is_exponential(), growth, overflow_at, warnings })
}

/// Evolves the free problem and tests `‖∫₀ᵗ w‖` for exponential growth.
pub fn detect_unstable(
    op: &LinearOperator,
    f: &[C64],
    cfg: &EvolveConfig,
    oracle: Option<&SpectralOracle>,
) -> Result<StabilityReport> {
    let traj = evolve_free(op, f, cfg, oracle)?;
    let mut report = stability_from_trajectory(&traj, op.spectral_radius())?;
    if let Some(o) = oracle {
        match check_generic(o, f, DEFAULT_TOL_GEN) {
            Ok(g) if !g.generic => report.warnings.push("f is not generic; some eigenvalues are invisible to it".into()),
            Err(e) => report.warnings.push(e.to_string()),
            _ => {}
        }
    }
    Ok(report)
}

/// Oracle facts the detectors are judged against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleFacts {
    pub classification: SpectrumClassification,
    pub generic_f: bool,
    /// `(k_d, seen by f)` for every positive eigenvalue.
    pub positive: Vec<(f64, bool)>,
}

impl OracleFacts {
    pub fn new(oracle: &SpectralOracle, f: &[C64]) -> Self {
        let tol_real = oracle.default_tol_real();
        let classification = classify_spectrum(oracle, tol_real);
        let seen = check_generic(oracle, f, DEFAULT_TOL_GEN).ok();
        let generic_f = seen.as_ref().is_some_and(|g| g.generic);
        let positive = oracle
            .eigenvalues()
            .iter()
            .enumerate()
            .filter(|(_, z)| z.re > tol_real && z.im.abs() <= tol_real)
            .map(|(i, z)| (z.re.sqrt(), seen.as_ref().is_none_or(|g| g.seen[i])))
            .collect();
        OracleFacts { classification, generic_f, positive }
    }

    pub fn assumption_a_ok(&self) -> bool {
        self.classification.assumption_a_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleAgreement {
    pub stable: bool,
    /// `None` when the scan did not run.
    pub embedded: Option<bool>,
    /// Seen positive eigenvalues inside the grid with no detection within `Δk`.
    pub missed: Vec<f64>,
    /// Detections with no positive eigenvalue within `Δk`.
    pub spurious: Vec<f64>,
}

impl OracleAgreement {
    pub fn all(&self) -> bool {
        self.stable && self.embedded.unwrap_or(true)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionVerdict {
    pub stable: bool,
    pub growth: GrowthEstimate,
    pub embedded: Vec<ScanRow>,
    pub detected: Vec<DetectedMode>,
    pub zero_row: Option<ZeroFrequencyRow>,
    pub amplitudes: Vec<AmplitudeResult>,
    pub assumption_a_ok: bool,
    pub generic_f: bool,
    pub oracle_agreement: Option<OracleAgreement>,
}

impl DetectionVerdict {
    /// `Some(false)` iff an oracle was supplied, the instance satisfies
    /// assumption A and some detector disagrees with it.
    pub fn agrees(&self) -> Option<bool> {
        self.oracle_agreement.as_ref().map(OracleAgreement::all)
    }
}

impl Serialize for DetectionVerdict {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Growth {
            alpha: f64,
            window: (f64, f64),
            residual: f64,
            verdict: super::growth::GrowthVerdict,
        }
        #[derive(Serialize)]
        struct Entry<'a> {
            k: f64,
            flagged: bool,
            limit_norm: f64,
            v_estimate: &'a Option<Vec<C64>>,
        }
        #[derive(Serialize)]
        struct Out<'a> {
            schema: u32,
            stable: bool,
            growth: Growth,
            embedded: Vec<Entry<'a>>,
            detected: &'a [DetectedMode],
            zero_frequency: Option<&'a ZeroFrequencyRow>,
            amplitudes: &'a [AmplitudeResult],
            assumption_a_ok: bool,
            generic_f: bool,
            oracle_agreement: &'a Option<OracleAgreement>,
        }
        Out {
            schema: 1,
            stable: self.stable,
            growth: Growth {
                alpha: self.growth.alpha,
                window: self.growth.window,
                residual: self.growth.fit_residual,
                verdict: self.growth.verdict,
            },
            embedded: self
                .embedded
                .iter()
                .map(|r| Entry { k: r.k, flagged: r.flagged, limit_norm: r.limit_norm, v_estimate: &r.v_estimate })
                .collect(),
            detected: &self.detected,
            zero_frequency: self.zero_row.as_ref(),
            amplitudes: &self.amplitudes,
            assumption_a_ok: self.assumption_a_ok,
            generic_f: self.generic_f,
            oracle_agreement: &self.oracle_agreement,
        }
        .serialize(s)
    }
}

/// Assembles the verdict and, given oracle facts on an assumption-A
/// instance, compares every detector with them.
pub fn adjudicate(
    stability: &StabilityReport,
    embedded: Option<&EmbeddedDetection>,
    amplitudes: Vec<AmplitudeResult>,
    oracle: Option<&OracleFacts>,
) -> DetectionVerdict {
    let assumption_a_ok = oracle.is_none_or(OracleFacts::assumption_a_ok);
    let generic_f = oracle.is_none_or(|o| o.generic_f);
    let oracle_agreement = oracle.filter(|o| o.assumption_a_ok()).map(|o| {
        let stable = stability.stable == !o.classification.has_unstable();
        let (embedded_ok, missed, spurious) = match embedded {
            None => (None, Vec::new(), Vec::new()),
            Some(e) => {
                let dk = e.grid.step * (1.0 + 1e-9);
                let missed: Vec<f64> = o
                    .positive
                    .iter()
                    .filter(|(k, seen)| *seen && *k >= e.grid.lo && *k <= e.grid.hi)
                    .filter(|(k, _)| !e.detected.iter().any(|d| (d.k - k).abs() <= dk))
                    .map(|(k, _)| *k)
                    .collect();
                let spurious: Vec<f64> = e
                    .detected
                    .iter()
                    .filter(|d| !o.positive.iter().any(|(k, _)| (d.k - k).abs() <= dk))
                    .map(|d| d.k)
                    .collect();
                (Some(missed.is_empty() && spurious.is_empty()), missed, spurious)
            }
        };
        OracleAgreement { stable, embedded: embedded_ok, missed, spurious }
    });
    DetectionVerdict {
        stable: stability.stable,
        growth: stability.growth,
        embedded: embedded.map(|e| e.rows.clone()).unwrap_or_default(),
        detected: embedded.map(|e| e.detected.clone()).unwrap_or_default(),
        zero_row: embedded.map(|e| e.zero_row.clone()),
        amplitudes,
        assumption_a_ok,
        generic_f,
        oracle_agreement,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{detect_embedded_on, EmbeddedOptions, KGrid};
    use crate::operator_lab::{build_operator, spectral_oracle, OperatorSpec, DEFAULT_TOL_PROJ};
    use crate::wave_engine::{dt_max, Method};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn stability(eigs: &[f64], t: f64) -> StabilityReport {
        let op = build_operator(&OperatorSpec::diagonal(eigs)).unwrap();
        let cfg = EvolveConfig::new(t, dt_max(op.spectral_radius()) / 2.0, Method::Rk4);
        detect_unstable(&op, &vec![c(1.0); eigs.len()], &cfg, None).unwrap()
    }

    #[test]
    fn stable_and_unstable_diagonals() {
        assert!(stability(&[1.0, 4.0], 200.0).stable);
        let s = stability(&[1.0, -1.0], 60.0);
        assert!(!s.stable);
        assert!((s.growth.alpha - 1.0).abs() < 0.02);
    }

    #[test]
    fn growth_rate_of_mixed_diagonal() {
        let s = stability(&[-0.25, 1.0], 200.0);
        assert!(!s.stable);
        assert!((s.growth.alpha - 0.5).abs() < 0.01, "{:?}", s.growth);
    }

    #[test]
    fn adjudicate_agrees_on_diag() {
        let op = build_operator(&OperatorSpec::diagonal(&[1.0, 4.0])).unwrap();
        let or = spectral_oracle(&op, DEFAULT_TOL_PROJ).unwrap();
        let f = [c(1.0), c(1.0)];
        let traj = evolve_free(&op, &f, &EvolveConfig::new(2000.0, 0.1, Method::Spectral), Some(&or)).unwrap();
        let st = stability_from_trajectory(&traj, 4.0).unwrap();
        let emb = detect_embedded_on(&traj, &f, &KGrid::new(0.1, 3.0, 0.01), &EmbeddedOptions::default()).unwrap();
        let facts = OracleFacts::new(&or, &f);
        let v = adjudicate(&st, Some(&emb), Vec::new(), Some(&facts));
        assert_eq!(v.agrees(), Some(true), "{:?}", v.oracle_agreement);
        let js = serde_json::to_value(&v).unwrap();
        assert_eq!(js["schema"], 1);
        assert_eq!(js["embedded"].as_array().unwrap().len(), 291);
        assert!(js["growth"]["alpha"].is_number());
    }

    #[test]
    fn planted_embedded_eigenvalue() {
        let spec = OperatorSpec::planted(&[c(2.25), c(0.5), c(3.5)], 0.3, 21);
        let op = build_operator(&spec).unwrap();
        let or = spectral_oracle(&op, DEFAULT_TOL_PROJ).unwrap();
        let f = vec![c(1.0); 3];
        let traj = evolve_free(&op, &f, &EvolveConfig::new(1500.0, 0.05, Method::Spectral), Some(&or)).unwrap();
        let st = stability_from_trajectory(&traj, op.spectral_radius()).unwrap();
        let emb = detect_embedded_on(&traj, &f, &KGrid::new(1.2, 1.8, 0.01), &EmbeddedOptions::default()).unwrap();
        assert!(emb.detected.iter().any(|d| (d.k - 1.5).abs() <= 0.01));
        let v = adjudicate(&st, Some(&emb), Vec::new(), Some(&OracleFacts::new(&or, &f)));
        assert_eq!(v.agrees(), Some(true));
    }

    #[test]
    fn violation_suppresses_agreement() {
        let op = build_operator(&OperatorSpec::Diagonal { eigenvalues: vec![crate::Cx(2.0, 1.0)] }).unwrap();
        let or = spectral_oracle(&op, DEFAULT_TOL_PROJ).unwrap();
        let f = [c(1.0)];
        let cfg = EvolveConfig::new(100.0, 0.05, Method::Rk4);
        let st = detect_unstable(&op, &f, &cfg, Some(&or)).unwrap();
        let v = adjudicate(&st, None, Vec::new(), Some(&OracleFacts::new(&or, &f)));
        assert!(!v.assumption_a_ok);
        assert!(v.oracle_agreement.is_none());
    }
}
