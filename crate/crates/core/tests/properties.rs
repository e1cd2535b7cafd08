use proptest::prelude::*;
use spectre_core::cx::diff_norm;
use spectre_core::diagnostics::{amplitude_closed_form, detect_embedded_on, EmbeddedOptions, KGrid};
use spectre_core::laplace_core::{decompose, limiting_absorption, resolvent_solve_k};
use spectre_core::operator_lab::{build_operator, spectral_oracle, OperatorSpec, DEFAULT_TOL_PROJ};
use spectre_core::wave_engine::{
    evolve_free, modulated_average_final, EvolveConfig, Method, SpectralEvolver, TrajectoryKind, WaveTrajectory,
};
use spectre_core::{Parallelism, C64};

fn spectrum(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.3f64..6.0, n).prop_filter("separated", |v| {
        v.iter().enumerate().all(|(i, a)| v[i + 1..].iter().all(|b| (a - b).abs() > 0.2))
    })
}

fn vector(n: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| C64::new(a, b)), n)
        .prop_filter("nonzero", |v| v.iter().any(|z| z.norm() > 0.1))
}

fn min_gap(k: f64, spectrum: &[f64]) -> f64 {
    spectrum.iter().map(|z| (k - z.sqrt()).abs()).fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn resonant_average_recovers_injected_mode(k in 0.2f64..3.0, v in vector(3)) {
        let dt = 0.05;
        let steps = 4000;
        let fine: Vec<C64> = (0..=steps)
            .flat_map(|j| {
                let ph = C64::new(0.0, -k * j as f64 * dt).exp();
                v.iter().map(move |x| x * ph).collect::<Vec<_>>()
            })
            .collect();
        let traj = WaveTrajectory::from_fine(3, dt, fine, TrajectoryKind::Free, 1);
        prop_assert!(diff_norm(&modulated_average_final(&traj, k), &v) < 1e-9);
    }

    #[test]
    fn closed_form_amplitude_solves_shifted_system(
        (eigs, f) in (2usize..5).prop_flat_map(|n| (spectrum(n), vector(n))),
        seed in 0u64..1000,
        k in 0.2f64..2.5,
    ) {
        prop_assume!(min_gap(k, &eigs) > 0.1);
        let planted: Vec<C64> = eigs.iter().map(|&x| C64::new(x, 0.0)).collect();
        let op = build_operator(&OperatorSpec::planted(&planted, 0.3, seed)).unwrap();
        let or = spectral_oracle(&op, DEFAULT_TOL_PROJ).unwrap();
        let closed = amplitude_closed_form(&decompose(&op, &or, &f).unwrap(), k).unwrap();
        let direct = resolvent_solve_k(&op, &f, C64::new(k * k, 0.0)).unwrap();
        let scale = 1.0 + spectre_core::cx::norm(&direct);
        prop_assert!(diff_norm(&closed, &direct) < 1e-8 * scale);
    }

    #[test]
    fn absorption_limit_is_the_real_axis_solve(
        (eigs, f) in (1usize..5).prop_flat_map(|n| (spectrum(n), vector(n))),
        k in 0.2f64..2.5,
    ) {
        prop_assume!(min_gap(k, &eigs) > 0.1);
        let op = build_operator(&OperatorSpec::diagonal(&eigs)).unwrap();
        let r = limiting_absorption(&op, &f, k, None).unwrap();
        // the last Cauchy step is ≈ ε_min ‖(L − k²)⁻² f‖ against an absolute 1e-6 ‖f‖
        if eigs.iter().all(|z| (z - k * k).abs() >= 0.5) {
            prop_assert!(r.converged);
        }
        let exact: Vec<C64> = eigs.iter().zip(&f).map(|(z, fi)| fi / (z - k * k)).collect();
        prop_assert!(diff_norm(&r.limit, &exact) < 1e-5 * (1.0 + spectre_core::cx::norm(&exact)));
    }

    #[test]
    fn free_solution_matches_modal_formula(
        (eigs, f) in (1usize..4).prop_flat_map(|n| (spectrum(n), vector(n))),
        seed in 0u64..1000,
    ) {
        let planted: Vec<C64> = eigs.iter().map(|&x| C64::new(x, 0.0)).collect();
        let op = build_operator(&OperatorSpec::planted(&planted, 0.2, seed)).unwrap();
        let or = spectral_oracle(&op, DEFAULT_TOL_PROJ).unwrap();
        let traj = evolve_free(&op, &f, &EvolveConfig::new(10.0, 0.005, Method::Rk4), None).unwrap();
        let ev = SpectralEvolver::new(&or, &f).unwrap();
        let last = traj.steps();
        let scale = 1.0 + spectre_core::cx::norm(&f);
        prop_assert!(diff_norm(traj.fine_w(last), &ev.w_at(traj.final_time())) < 1e-6 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn scan_is_independent_of_scheduling(eigs in spectrum(2), f in vector(2)) {
        let op = build_operator(&OperatorSpec::diagonal(&eigs)).unwrap();
        let or = spectral_oracle(&op, DEFAULT_TOL_PROJ).unwrap();
        let traj = evolve_free(&op, &f, &EvolveConfig::new(150.0, 0.1, Method::Spectral), Some(&or)).unwrap();
        let grid = KGrid::new(0.2, 2.6, 0.05);
        let seq = EmbeddedOptions { exec: Parallelism::Sequential, ..Default::default() };
        let par = EmbeddedOptions { exec: Parallelism::Parallel, ..Default::default() };
        let a = detect_embedded_on(&traj, &f, &grid, &seq).unwrap();
        let b = detect_embedded_on(&traj, &f, &grid, &par).unwrap();
        prop_assert_eq!(a.rows, b.rows);
        prop_assert_eq!(a.detected, b.detected);
    }
}
