use super::scenario::{Check, Scenario};
use crate::cx::{diff_norm, max_abs, norm, C64};
use crate::diagnostics::{
    adjudicate, detect_embedded_on, limiting_amplitude, stability_from_trajectory,
    AmplitudeGuard, AmplitudeResult, DetectionVerdict, EmbeddedDetection, EmbeddedOptions, OracleFacts,
    StabilityReport,
};
use crate::error::{Result, SpectreError};
use crate::laplace_core::{
    abelian_check, bromwich_invert_many, decompose, default_p_ladder, integration_rule_check, laplace_side_average,
    limiting_absorption, plancherel_check, AbelianResult, AbsorptionResult, BromwichOptions, BromwichResult,
    DecompositionReport, PlancherelResult,
};
use crate::operator_lab::{
    build_operator, check_generic, classify_spectrum, spectral_oracle, GenericityReport, LinearOperator,
    SpectralOracle, SpectrumClassification, DEFAULT_TOL_GEN, DEFAULT_TOL_PROJ,
};
use crate::par::Parallelism;
use crate::wave_engine::{
    evolve_forced, evolve_free, Mask, Method, SpectralEvolver, TrajectoryKind, WaveTrajectory,
};
use serde::Serialize;
use std::path::PathBuf;
use std::time::Instant;

pub const TOOL_NAME: &str = "spectre";
pub const REPORT_SCHEMA: u32 = 1;
const BROMWICH_TIMES: [f64; 3] = [1.0, 5.0, 10.0];
const BROMWICH_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Build,
    Evolve,
    Diagnose,
    Amplitude,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub command: Command,
    /// Overrides the scenario's `output_dir`.
    pub out_dir: Option<PathBuf>,
    pub seed_override: Option<u64>,
    /// Enables exit code 4 on oracle disagreement.
    pub test_mode: bool,
    pub exec: Parallelism,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { command: Command::Diagnose, out_dir: None, seed_override: None, test_mode: false, exec: Parallelism::Parallel }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorSummary {
    pub n: usize,
    pub spectral_radius: f64,
    pub real_symmetric: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    pub eigenvalues: Vec<C64>,
    pub multiplicities: Vec<usize>,
    pub jordan_defect: Vec<usize>,
    pub diagonalizable: bool,
    pub eigen_condition: f64,
    pub completeness_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySummary {
    pub kind: TrajectoryKind,
    pub method: Method,
    pub steps: usize,
    pub final_time: f64,
    pub overflow_at: Option<f64>,
    pub final_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BromwichSummary {
    pub options: BromwichOptions,
    pub results: Vec<BromwichResult>,
    /// Max-norm distance to `w(t) − modes(t)` from the spectral evolver.
    pub reference_errors: Vec<f64>,
    pub tolerance: f64,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbelianSummary {
    pub k: f64,
    pub result: AbelianResult,
    /// `‖M(k,T) − p W(p − ik)‖` at the smallest ladder `p`.
    pub laplace_side_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrationRuleSummary {
    pub p: C64,
    pub gap: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct CheckResults {
    pub operator: Option<OperatorSummary>,
    pub oracle: Option<OracleSummary>,
    pub classification: Option<SpectrumClassification>,
    pub genericity: Option<GenericityReport>,
    pub trajectory: Option<TrajectorySummary>,
    pub verdict: Option<DetectionVerdict>,
    pub absorption: Option<Vec<AbsorptionResult>>,
    pub decompose: Option<DecompositionReport>,
    pub bromwich: Option<BromwichSummary>,
    pub abelian: Option<AbelianSummary>,
    pub plancherel: Option<PlancherelResult>,
    pub integration_rule: Option<IntegrationRuleSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Note {
    pub stage: String,
    pub reason: String,
}

/// Series kept for the CSV writers but not serialized into the report.
#[derive(Debug, Clone, Default)]
pub struct PlotData {
    /// `(t, log ‖∫₀ᵗ w‖)`
    pub growth: Option<Vec<(f64, f64)>>,
    pub trajectory: Option<WaveTrajectory>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Command,
    pub config_hash: String,
    pub scenario: Scenario,
    pub checks: Vec<Check>,
    pub skipped: Vec<Note>,
    pub failures: Vec<Note>,
    pub warnings: Vec<String>,
    pub results: CheckResults,
    pub exit_code: i32,
    #[serde(skip)]
    pub timings: Vec<(String, f64)>,
    #[serde(skip)]
    pub plot: PlotData,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn timings_json(&self) -> String {
        let map: serde_json::Map<String, serde_json::Value> =
            self.timings.iter().map(|(k, v)| (k.clone(), serde_json::Value::from(*v))).collect();
        serde_json::to_string_pretty(&serde_json::json!({ "schema": REPORT_SCHEMA, "seconds": map }))
            .expect("timings serialize")
    }

    /// Exit code from failures, assumption violations and (test mode) disagreements.
    fn finish(&mut self, test_mode: bool) {
        let violation = self.results.classification.as_ref().is_some_and(|c| !c.assumption_a_ok());
        let disagreement = self.results.verdict.as_ref().and_then(DetectionVerdict::agrees) == Some(false)
            || self.results.bromwich.as_ref().is_some_and(|b| !b.agrees);
        self.exit_code = if !self.failures.is_empty() {
            2
        } else if violation {
            3
        } else if test_mode && disagreement {
            4
        } else {
            0
        };
    }
}

struct Timer {
    start: Instant,
    log: Vec<(String, f64)>,
}

impl Timer {
    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.log.push((stage.to_string(), (now - self.start).as_secs_f64()));
        self.start = now;
    }
}

fn is_skip(e: &SpectreError) -> bool {
    matches!(
        e,
        SpectreError::Precondition(_)
            | SpectreError::TheoremInapplicable(_)
            | SpectreError::AmplitudeUndefined { .. }
            | SpectreError::Unsupported(_)
    )
}

/// Runs the scenario and returns the report; writing files is left to
/// [`write_outputs`](super::write_outputs). Configuration errors are returned
/// as `Err` (exit code 1); numerical failures are recorded in the report.
pub fn run_scenario(scenario: Scenario, opts: &RunOptions) -> Result<RunReport> {
    let scenario = match opts.seed_override {
        Some(s) => scenario.with_seed(s),
        None => scenario,
    };
    scenario.validate()?;
    let out_dir = opts.out_dir.clone().unwrap_or_else(|| scenario.output_dir.clone());
    let checks = match opts.command {
        Command::Build | Command::Evolve => Vec::new(),
        Command::Diagnose => scenario.effective_checks(),
        Command::Amplitude => {
            let mut s = scenario.clone();
            s.checks.retain(|c| matches!(c, Check::Amplitude | Check::Absorption));
            s.checks.insert(Check::Amplitude);
            s.effective_checks()
        }
    };
    let mut report = RunReport {
        schema: REPORT_SCHEMA,
        tool: TOOL_NAME,
        version: env!("CARGO_PKG_VERSION"),
        command: opts.command,
        config_hash: scenario.config_hash(),
        scenario: scenario.clone(),
        checks: checks.clone(),
        skipped: Vec::new(),
        failures: Vec::new(),
        warnings: Vec::new(),
        results: CheckResults::default(),
        exit_code: 0,
        timings: Vec::new(),
        plot: PlotData::default(),
        out_dir,
    };
    let mut timer = Timer { start: Instant::now(), log: Vec::new() };
    let has = |c: Check| checks.contains(&c);

    let op = build_operator(&scenario.operator)?;
    let f = scenario.f.realize(op.dim())?;
    let rho = op.spectral_radius();
    report.results.operator =
        Some(OperatorSummary { n: op.dim(), spectral_radius: rho, real_symmetric: op.is_real_symmetric(0.0) });
    if scenario.evolve.method == Method::Rk4 {
        scenario.evolve.validate(Some(rho))?;
    }
    timer.lap("build");

    let oracle = match spectral_oracle(&op, DEFAULT_TOL_PROJ) {
        Ok(o) => Some(o),
        Err(e) if is_skip(&e) => {
            report.skipped.push(Note { stage: "oracle".into(), reason: e.to_string() });
            None
        }
        Err(e) => {
            report.failures.push(Note { stage: "oracle".into(), reason: e.to_string() });
            None
        }
    };
    let facts = oracle.as_ref().map(|o| OracleFacts::new(o, &f));
    if let Some(o) = &oracle {
        report.results.oracle = Some(OracleSummary {
            eigenvalues: o.eigenvalues().to_vec(),
            multiplicities: o.multiplicities().to_vec(),
            jordan_defect: o.jordan_defect().to_vec(),
            diagonalizable: o.diagonalizable(),
            eigen_condition: o.eigen_condition(),
            completeness_error: o.completeness_error().ok(),
        });
        report.results.classification = Some(classify_spectrum(o, o.default_tol_real()));
        match check_generic(o, &f, DEFAULT_TOL_GEN) {
            Ok(g) => {
                if !g.generic {
                    report.warnings.push("f is not generic: some eigenvalues have negligible projections".into());
                }
                report.results.genericity = Some(g);
            }
            Err(e) => report.warnings.push(format!("genericity: {e}")),
        }
    }
    timer.lap("oracle");

    let ctx = Ctx { op: &op, f: &f, oracle: oracle.as_ref(), scenario: &scenario, exec: opts.exec };

    if opts.command == Command::Evolve {
        match ctx.evolve(scenario.evolve.forcing_k) {
            Ok(traj) => {
                report.results.trajectory = Some(summarize(&traj));
                report.plot.trajectory = Some(traj);
            }
            Err(e) => record(&mut report, "evolve", e),
        }
        timer.lap("evolve");
    }

    let needs_free = checks
        .iter()
        .any(|c| matches!(c, Check::Unstable | Check::Embedded | Check::Plancherel | Check::IntegrationRule));
    let free = if needs_free {
        match ctx.evolve(None) {
            Ok(t) => {
                report.results.trajectory = Some(summarize(&t));
                Some(t)
            }
            Err(e) => {
                record(&mut report, "evolve", e);
                None
            }
        }
    } else {
        None
    };
    timer.lap("evolve_free");

    let mut stability: Option<StabilityReport> = None;
    if has(Check::Unstable) {
        if let Some(traj) = &free {
            match stability_from_trajectory(traj, rho) {
                Ok(s) => {
                    report.plot.growth = Some(
                        traj.cumulative_norms().into_iter().map(|(t, v)| (t, (v + 1e-300).ln())).collect(),
                    );
                    report.warnings.extend(s.warnings.iter().cloned());
                    stability = Some(s);
                }
                Err(e) => record(&mut report, "unstable", e),
            }
        }
        timer.lap("unstable");
    }
    let stable = stability.as_ref().map(|s| s.stable);

    let mut embedded: Option<EmbeddedDetection> = None;
    if has(Check::Embedded) {
        match (stable, &free) {
            (Some(true), Some(traj)) => {
                let mask = scenario.projection.as_ref().map(|p| Mask::from_indices(op.dim(), p));
                let eo = EmbeddedOptions { mask, exec: opts.exec, ..Default::default() };
                match detect_embedded_on(traj, &f, &scenario.k_grid, &eo) {
                    Ok(e) => {
                        report.warnings.extend(e.warnings.iter().cloned());
                        embedded = Some(e);
                    }
                    Err(e) => record(&mut report, "embedded", e),
                }
            }
            (Some(false), _) => skip(&mut report, "embedded", "instance is exponentially unstable"),
            _ => skip(&mut report, "embedded", "stability could not be established"),
        }
        timer.lap("embedded");
    }

    let mut amplitudes: Vec<AmplitudeResult> = Vec::new();
    if has(Check::Amplitude) {
        if scenario.amplitude_k.is_empty() {
            skip(&mut report, "amplitude", "no amplitude_k given");
        } else if stable != Some(true) {
            skip(&mut report, "amplitude", "instance is not verified stable");
        } else {
            let detected = embedded.as_ref().map(|e| e.detected.iter().map(|d| d.k).collect()).unwrap_or_default();
            let guard = AmplitudeGuard::from_scan(true, detected, scenario.k_grid.step);
            for &k in &scenario.amplitude_k {
                match limiting_amplitude(&op, &f, k, &scenario.evolve, oracle.as_ref(), &guard) {
                    Ok(a) => amplitudes.push(a),
                    Err(e) => record(&mut report, &format!("amplitude[k={k}]"), e),
                }
            }
        }
        timer.lap("amplitude");
    }

    if let Some(s) = &stability {
        report.results.verdict = Some(adjudicate(s, embedded.as_ref(), amplitudes, facts.as_ref()));
    }

    if has(Check::Absorption) {
        if scenario.amplitude_k.is_empty() {
            skip(&mut report, "absorption", "no amplitude_k given");
        } else {
            let mut out = Vec::new();
            for &k in &scenario.amplitude_k {
                match limiting_absorption(&op, &f, k, None) {
                    Ok(r) => out.push(r),
                    Err(e) => record(&mut report, &format!("absorption[k={k}]"), e),
                }
            }
            report.results.absorption = Some(out);
        }
        timer.lap("absorption");
    }

    let mut decomp: Option<DecompositionReport> = None;
    if has(Check::Decompose) {
        match &oracle {
            Some(o) => match decompose(&op, o, &f) {
                Ok(d) => {
                    report.warnings.extend(d.warnings.iter().cloned());
                    decomp = Some(d);
                }
                Err(e) => record(&mut report, "decompose", e),
            },
            None => skip(&mut report, "decompose", "no spectral oracle"),
        }
        timer.lap("decompose");
    }

    if has(Check::Bromwich) {
        match (&decomp, &oracle) {
            (Some(d), Some(o)) => match ctx.bromwich(d, o) {
                Ok(b) => report.results.bromwich = Some(b),
                Err(e) => record(&mut report, "bromwich", e),
            },
            _ => skip(&mut report, "bromwich", "decomposition unavailable"),
        }
        timer.lap("bromwich");
    }
    report.results.decompose = decomp;

    if has(Check::Abelian) {
        match ctx.abelian(stable, embedded.as_ref()) {
            Ok(a) => report.results.abelian = Some(a),
            Err(e) => record(&mut report, "abelian", e),
        }
        timer.lap("abelian");
    }

    let growth = stability.as_ref().map_or(0.0, |s| s.growth.alpha.max(0.0));
    if has(Check::Plancherel) {
        if let Some(traj) = &free {
            let sigma = if stable == Some(true) { 0.5 } else { growth + 0.5 };
            match plancherel_check(&op, &f, traj, sigma, 200.0, 40_001, opts.exec) {
                Ok(p) => report.results.plancherel = Some(p),
                Err(e) => record(&mut report, "plancherel", e),
            }
        }
        timer.lap("plancherel");
    }

    if has(Check::IntegrationRule) {
        if let Some(traj) = &free {
            let p = C64::new(1.0 + growth, 1.0);
            match integration_rule_check(traj, p) {
                Ok(gap) => report.results.integration_rule = Some(IntegrationRuleSummary { p, gap }),
                Err(e) => record(&mut report, "integration-rule", e),
            }
        }
        timer.lap("integration_rule");
    }

    report.timings = timer.log;
    report.finish(opts.test_mode);
    Ok(report)
}

fn skip(report: &mut RunReport, stage: &str, reason: &str) {
    report.skipped.push(Note { stage: stage.into(), reason: reason.into() });
}

fn record(report: &mut RunReport, stage: &str, e: SpectreError) {
    let note = Note { stage: stage.into(), reason: e.to_string() };
    if is_skip(&e) {
        report.skipped.push(note);
    } else {
        report.failures.push(note);
    }
}

fn summarize(traj: &WaveTrajectory) -> TrajectorySummary {
    TrajectorySummary {
        kind: traj.kind(),
        method: traj.config().method,
        steps: traj.steps(),
        final_time: traj.final_time(),
        overflow_at: traj.overflow_at(),
        final_norm: norm(traj.fine_w(traj.steps())),
    }
}

struct Ctx<'a> {
    op: &'a LinearOperator,
    f: &'a [C64],
    oracle: Option<&'a SpectralOracle>,
    scenario: &'a Scenario,
    exec: Parallelism,
}

impl Ctx<'_> {
    fn evolve(&self, forcing_k: Option<f64>) -> Result<WaveTrajectory> {
        let mut cfg = self.scenario.evolve.clone();
        cfg.forcing_k = forcing_k;
        match forcing_k {
            Some(_) => evolve_forced(self.op, self.f, &cfg, self.oracle),
            None => evolve_free(self.op, self.f, &cfg, self.oracle),
        }
    }

    fn bromwich(&self, d: &DecompositionReport, oracle: &SpectralOracle) -> Result<BromwichSummary> {
        let options = if self.op.dim() <= 8 {
            BromwichOptions { exec: self.exec, ..Default::default() }
        } else {
            BromwichOptions { tau_max: 5e3, n_quad: 100_001, exec: self.exec, ..Default::default() }
        };
        let results = bromwich_invert_many(&d.w1_sampler, &BROMWICH_TIMES, &options)?;
        let ev = SpectralEvolver::new(oracle, self.f)?;
        let reference_errors: Vec<f64> = results
            .iter()
            .map(|r| {
                let w = ev.w_at(r.t);
                let modes = d.modes_at(r.t);
                let expected: Vec<C64> = w.iter().zip(&modes).map(|(a, b)| a - b).collect();
                let diff: Vec<C64> = expected.iter().zip(&r.value).map(|(a, b)| a - b).collect();
                max_abs(&diff)
            })
            .collect();
        let agrees = reference_errors.iter().all(|e| *e <= BROMWICH_TOLERANCE);
        Ok(BromwichSummary { options, results, reference_errors, tolerance: BROMWICH_TOLERANCE, agrees })
    }

    fn abelian(&self, stable: Option<bool>, embedded: Option<&EmbeddedDetection>) -> Result<AbelianSummary> {
        if stable == Some(false) {
            return Err(SpectreError::Precondition("Laplace route diverges on unstable instances".into()));
        }
        let oracle = self
            .oracle
            .filter(|o| o.diagonalizable())
            .ok_or_else(|| SpectreError::Unsupported("closed-form averages need a diagonalizable oracle".into()))?;
        if oracle.eigenvalues().iter().any(|z| z.re < 0.0) {
            return Err(SpectreError::Precondition("Laplace route diverges on unstable instances".into()));
        }
        let k = self
            .scenario
            .amplitude_k
            .first()
            .copied()
            .or_else(|| embedded.and_then(|e| e.detected.first().map(|d| d.k)))
            .unwrap_or(self.scenario.k_grid.lo);
        let ev = SpectralEvolver::new(oracle, self.f)?;
        let h = |t: f64| if t <= 0.0 { 0.0 } else { norm(&ev.modulated_average_at(k, t)) };
        let t_final = self.scenario.evolve.t_final;
        let ladder = default_p_ladder();
        let result = abelian_check(h, t_final, &ladder, self.exec)?;
        let p_min = ladder.iter().copied().fold(f64::INFINITY, f64::min);
        let lap = laplace_side_average(self.op, self.f, k, p_min, TrajectoryKind::Free)?;
        let laplace_side_gap = diff_norm(&ev.modulated_average_at(k, t_final), &lap);
        Ok(AbelianSummary { k, result, laplace_side_gap })
    }
}
