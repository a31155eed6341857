//! Property tests for the invariants that hold across whole input
//! families rather than at fixed points.

use num_complex::Complex;
use proptest::prelude::*;

use zerotemp::measurement::{born_probabilities, project, StateVector};
use zerotemp::processes::{staircase, StepKind};
use zerotemp::spectra::{Level, ParameterDomain, SpectrumModel, TruncationPolicy};
use zerotemp::thermo::{
    entropy, entropy_excess, gibbs_populations, log_entropy_excess, specific_heat, EntropySurface,
};

fn any_model() -> impl Strategy<Value = (SpectrumModel<f64>, &'static str)> {
    let domain = ParameterDomain::new(0.1, 10.0).unwrap();
    prop_oneof![
        Just((SpectrumModel::two_level(domain).unwrap(), "two_level")),
        Just((SpectrumModel::harmonic(domain).unwrap(), "harmonic")),
        Just((SpectrumModel::particle_box(domain).unwrap(), "box")),
        Just((
            SpectrumModel::degenerate_ground(domain, 2).unwrap(),
            "degenerate_ground"
        )),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn levels_sorted_deterministic_ground_zero(
        (model, _) in any_model(),
        x in 0.1f64..10.0,
        count in 2usize..40,
    ) {
        let a = model.levels_at(x, count).unwrap();
        let b = model.levels_at(x, count).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a[0].energy, 0.0);
        for w in a.windows(2) {
            prop_assert!(w[1].energy >= w[0].energy);
        }
    }

    #[test]
    fn gibbs_populations_normalized_nonnegative(
        (model, _) in any_model(),
        x in 0.1f64..10.0,
        t in 0.05f64..50.0,
    ) {
        let levels = model.levels_at(x, model.truncation_count(x, t, &TruncationPolicy::default()).unwrap()).unwrap();
        let state = gibbs_populations(&levels, t).unwrap();
        let total: f64 = state.populations().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        prop_assert!(state.populations().iter().all(|&p| p >= 0.0));
        prop_assert!(entropy(&state) >= 0.0);
    }

    #[test]
    fn entropy_monotone_and_specific_heat_positive(
        (model, _) in any_model(),
        x in 0.2f64..5.0,
    ) {
        // Resolvable grid anchored to the first gap: coarse enough that the
        // excess entropy stays above float noise everywhere on it.
        let gap = model.levels_at(x, 2).unwrap()[1].energy;
        let grid: Vec<f64> = (0..24).map(|k| 0.25 * gap * 1.35f64.powi(k)).collect();
        let t_max = *grid.last().unwrap();
        let surface = EntropySurface::for_model(&model, x, t_max, &TruncationPolicy::default()).unwrap();
        let mut last = surface.zero_temperature_entropy();
        for &t in &grid {
            let s = surface.entropy(t).unwrap();
            prop_assert!(s > last, "S({t}) = {s} vs previous {last}");
            prop_assert!(specific_heat(surface.levels(), t).unwrap() > 0.0);
            last = s;
        }
    }

    #[test]
    fn excess_agrees_with_direct_and_log_form(
        (model, _) in any_model(),
        x in 0.2f64..5.0,
        t in 0.05f64..20.0,
    ) {
        let surface = EntropySurface::for_model(&model, x, 30.0, &TruncationPolicy::default()).unwrap();
        let excess = entropy_excess(surface.levels(), t);
        let direct = surface.entropy(t).unwrap() - surface.zero_temperature_entropy();
        prop_assert!((excess - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
        if excess > 0.0 {
            let lam = log_entropy_excess(surface.levels(), t);
            prop_assert!((lam - excess.ln()).abs() <= 1e-9 * (1.0 + lam.abs()));
        }
    }

    #[test]
    fn staircase_scale_pairs_follow_geometric_law(
        gap in 0.3f64..3.0,
        ratio in 1.2f64..4.0,
    ) {
        let domain = ParameterDomain::new(0.05, 15.0).unwrap();
        let model = SpectrumModel::two_level(domain).unwrap();
        let policy = TruncationPolicy::default();
        let a = EntropySurface::for_model(&model, gap, 10.0, &policy).unwrap();
        let b = EntropySurface::for_model(&model, gap * ratio, 10.0, &policy).unwrap();
        let run = staircase(&a, &b, 1.0, 0.0, 20).unwrap();
        prop_assert!(!run.reached_zero);
        // Two-level entropy depends on gap/T only: each round divides T by
        // the gap ratio.
        let mut n = 0;
        let mut last = 1.0f64;
        for r in &run.trace.records {
            if r.kind == StepKind::Adiabatic {
                n += 1;
                let expected = ratio.powi(-n);
                let t_n = r.temperature.unwrap();
                prop_assert!(((t_n - expected) / expected).abs() < 1e-9,
                    "round {n}: {t_n} vs {expected}");
                prop_assert!(t_n < last);
                last = t_n;
            }
        }
    }

    #[test]
    fn born_probabilities_complete_and_projection_idempotent(
        res in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 5),
        pick in 0usize..3,
    ) {
        let levels = vec![
            Level { energy: 0.0, degeneracy: 2 },
            Level { energy: 1.0, degeneracy: 1 },
            Level { energy: 2.0, degeneracy: 2 },
        ];
        let amps: Vec<Complex<f64>> = res.iter().map(|&(re, im)| Complex::new(re, im)).collect();
        let norm: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
        prop_assume!(norm > 1e-6);
        let psi = StateVector::normalized(levels, amps).unwrap();
        let q = born_probabilities(&psi);
        prop_assert!((q.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assume!(q[pick] > 1e-9);
        let once = project(&psi, pick).unwrap();
        let twice = project(&once, pick).unwrap();
        for (a, b) in once.amplitudes().iter().zip(twice.amplitudes()) {
            prop_assert!((a - b).norm() <= 1e-12);
        }
        // Collapse support: nothing survives outside the measured level.
        let q_post = born_probabilities(&once);
        for (i, &qi) in q_post.iter().enumerate() {
            if i != pick {
                prop_assert_eq!(qi, 0.0);
            }
        }
    }
}
