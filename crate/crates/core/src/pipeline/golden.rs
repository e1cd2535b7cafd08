//! Built-in instances with known answers, run by `spectre verify`.

use crate::cx::{diff_norm, max_abs, norm, C64};
use crate::diagnostics::{
    detect_embedded_on, detect_unstable, limiting_amplitude, stability_from_trajectory, AmplitudeGuard,
    EmbeddedOptions, KGrid,
};
use crate::error::Result;
use crate::laplace_core::{
    abelian_check, bromwich_invert, decompose, default_p_ladder, integration_rule_check, limiting_absorption,
    plancherel_check, resolvent_solve_p, BromwichOptions,
};
use crate::operator_lab::{build_operator, spectral_oracle, OperatorSpec, Potential, DEFAULT_TOL_PROJ};
use crate::par::Parallelism;
use crate::wave_engine::{dt_max, evolve_free, EvolveConfig, Method};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldenCheck {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    pub error: Option<String>,
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn at_most(name: &'static str, value: Result<f64>, tolerance: f64) -> GoldenCheck {
    match value {
        Ok(v) => GoldenCheck { name, passed: v <= tolerance, value: v, tolerance, error: None },
        Err(e) => GoldenCheck { name, passed: false, value: f64::NAN, tolerance, error: Some(e.to_string()) },
    }
}

fn oracle_completeness() -> Result<f64> {
    let op = build_operator(&OperatorSpec::planted(&[c(0.5), c(1.0), c(2.0), c(-1.0), c(3.0), c(4.5)], 0.5, 11))?;
    spectral_oracle(&op, DEFAULT_TOL_PROJ)?.completeness_error()
}

fn residue_reconstruction() -> Result<f64> {
    let op = build_operator(&OperatorSpec::planted(&[c(0.7), c(-0.4), c(2.5), c(1.6)], 0.4, 3))?;
    let or = spectral_oracle(&op, DEFAULT_TOL_PROJ)?;
    let f = vec![c(1.0); 4];
    let d = decompose(&op, &or, &f)?;
    let mut worst = 0.0f64;
    for p in [C64::new(0.3, 1.7), C64::new(2.0, -0.5), C64::new(-0.2, 3.0)] {
        let w = resolvent_solve_p(&op, &f, p)?;
        let mut rec = d.w1_sampler.eval_closed(p);
        for ip in &d.imag_poles {
            crate::cx::axpy(&mut rec, 1.0 / (p + C64::new(0.0, ip.k)), &ip.v);
        }
        for rp in &d.right_poles {
            crate::cx::axpy(&mut rec, 1.0 / (p - rp.kappa), &rp.b);
        }
        worst = worst.max(diff_norm(&w, &rec));
    }
    Ok(worst)
}

fn rk4_vs_spectral() -> Result<f64> {
    let op = build_operator(&OperatorSpec::planted(&[c(1.0), c(4.0), c(9.0)], 0.3, 5))?;
    let or = spectral_oracle(&op, DEFAULT_TOL_PROJ)?;
    let f = vec![c(1.0); 3];
    let dt = dt_max(op.spectral_radius()) / 32.0;
    let a = evolve_free(&op, &f, &EvolveConfig::new(100.0, dt, Method::Rk4), None)?;
    let b = evolve_free(&op, &f, &EvolveConfig::new(100.0, dt, Method::Spectral), Some(&or))?;
    let scale = (0..=b.steps()).map(|j| max_abs(b.fine_w(j))).fold(0.0, f64::max);
    let diff = (0..=a.steps()).map(|j| {
        let d: Vec<C64> = a.fine_w(j).iter().zip(b.fine_w(j)).map(|(x, y)| x - y).collect();
        max_abs(&d)
    });
    Ok(diff.fold(0.0, f64::max) / scale)
}

fn energy_drift() -> Result<f64> {
    let spec = OperatorSpec::Schrodinger1d {
        n: 6,
        half_width: 3.0,
        potential: Potential::Gaussian { amplitude: 1.0, width: 1.0 },
        boundary: Default::default(),
    };
    let op = build_operator(&spec)?;
    let f = vec![c(1.0); 6];
    let tr = evolve_free(&op, &f, &EvolveConfig::new(200.0, 0.01, Method::Rk4), None)?;
    let energy = |j: usize| {
        let w = tr.fine_w(j);
        let v = tr.fine_velocity(j).expect("rk4 keeps velocity");
        let lw = op.apply(w);
        norm(v).powi(2) + lw.iter().zip(w).map(|(a, b)| (a * b.conj()).re).sum::<f64>()
    };
    let e0 = energy(0);
    Ok((0..=tr.steps()).map(|j| (energy(j) - e0).abs() / e0).fold(0.0, f64::max))
}

fn stability_detection() -> Result<f64> {
    let stable = build_operator(&OperatorSpec::diagonal(&[1.0, 4.0]))?;
    let unstable = build_operator(&OperatorSpec::diagonal(&[-0.25, 1.0]))?;
    let f = [c(1.0), c(1.0)];
    let a = detect_unstable(&stable, &f, &EvolveConfig::new(200.0, 0.05, Method::Rk4), None)?;
    let b = detect_unstable(&unstable, &f, &EvolveConfig::new(200.0, 0.05, Method::Rk4), None)?;
    let wrong = !a.stable || b.stable;
    Ok(if wrong { f64::INFINITY } else { (b.growth.alpha - 0.5).abs() / 0.5 })
}

fn embedded_detection() -> Result<f64> {
    let op = build_operator(&OperatorSpec::diagonal(&[1.0, 4.0]))?;
    let or = spectral_oracle(&op, DEFAULT_TOL_PROJ)?;
    let f = [c(1.0), c(1.0)];
    let tr = evolve_free(&op, &f, &EvolveConfig::new(2000.0, 0.1, Method::Spectral), Some(&or))?;
    stability_from_trajectory(&tr, 4.0)?;
    let e = detect_embedded_on(&tr, &f, &KGrid::new(0.1, 3.0, 0.01), &EmbeddedOptions::default())?;
    if e.detected.len() != 2 {
        return Ok(f64::INFINITY);
    }
    Ok((e.detected[0].k - 1.0).abs().max((e.detected[1].k - 2.0).abs()))
}

fn amplitude_diag() -> Result<f64> {
    let op = build_operator(&OperatorSpec::diagonal(&[1.0, 4.0]))?;
    let or = spectral_oracle(&op, DEFAULT_TOL_PROJ)?;
    let f = [c(1.0), c(1.0)];
    let r = limiting_amplitude(
        &op,
        &f,
        2f64.sqrt(),
        &EvolveConfig::new(4000.0, 0.1, Method::Spectral),
        Some(&or),
        &AmplitudeGuard::unrestricted(),
    )?;
    Ok(diff_norm(&r.v_avg, &[c(-1.0), c(0.5)]))
}

fn absorption_diag() -> Result<f64> {
    let op = build_operator(&OperatorSpec::diagonal(&[1.0, 4.0]))?;
    let r = limiting_absorption(&op, &[c(1.0), c(1.0)], 2f64.sqrt(), None)?;
    Ok(if r.converged { diff_norm(&r.limit, &[c(-1.0), c(0.5)]) } else { f64::INFINITY })
}

fn bromwich_shifted_pole() -> Result<f64> {
    let op = build_operator(&OperatorSpec::diagonal(&[-1.0]))?;
    let or = spectral_oracle(&op, DEFAULT_TOL_PROJ)?;
    let d = decompose(&op, &or, &[c(1.0)])?;
    let r = bromwich_invert(&d.w1_sampler, 1.0, &BromwichOptions::default())?;
    Ok((r.value[0] - c(-0.5 * (-1f64).exp())).norm())
}

fn plancherel_scalar() -> Result<f64> {
    let op = build_operator(&OperatorSpec::diagonal(&[1.0]))?;
    let or = spectral_oracle(&op, DEFAULT_TOL_PROJ)?;
    let tr = evolve_free(&op, &[c(1.0)], &EvolveConfig::new(50.0, 1e-3, Method::Spectral), Some(&or))?;
    let r = plancherel_check(&op, &[c(1.0)], &tr, 0.5, 200.0, 40_001, Parallelism::Parallel)?;
    Ok((r.ratio - 1.0).abs())
}

fn integration_rule_scalar() -> Result<f64> {
    let op = build_operator(&OperatorSpec::diagonal(&[1.0]))?;
    let or = spectral_oracle(&op, DEFAULT_TOL_PROJ)?;
    let tr = evolve_free(&op, &[c(1.0)], &EvolveConfig::new(60.0, 1e-3, Method::Spectral), Some(&or))?;
    integration_rule_check(&tr, c(1.0))
}

fn abelian_sine() -> Result<f64> {
    Ok(abelian_check(|t: f64| 1.0 + t.sin(), 1e4, &default_p_ladder(), Parallelism::Parallel)?.gap)
}

pub fn golden_suite() -> Vec<GoldenCheck> {
    vec![
        at_most("oracle completeness, planted 6×6", oracle_completeness(), 1e-10),
        at_most("partial-fraction reconstruction, planted 4×4", residue_reconstruction(), 1e-8),
        at_most("rk4 vs spectral, relative max-norm", rk4_vs_spectral(), 1e-6),
        at_most("energy drift, Schrödinger n=6", energy_drift(), 1e-6),
        at_most("growth rate of diag(-0.25, 1), relative", stability_detection(), 0.02),
        at_most("embedded peaks of diag(1, 4)", embedded_detection(), 0.01),
        at_most("limiting amplitude of diag(1, 4) at k=√2", amplitude_diag(), 1e-2),
        at_most("limiting absorption of diag(1, 4) at k=√2", absorption_diag(), 1e-6),
        at_most("Bromwich inverse of -1/2/(p+1) at t=1", bromwich_shifted_pole(), 1e-6),
        at_most("Plancherel ratio, L=[1]", plancherel_scalar(), 0.05),
        at_most("integration rule, L=[1]", integration_rule_scalar(), 1e-6),
        at_most("Abelian gap, 1 + sin t", abelian_sine(), 1e-3),
    ]
}
