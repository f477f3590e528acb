use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use personick_core::{
    apply_kraus, apply_ladder, fock_mmse_generic, mmse, pnr_mse, sample_states, InBetweenState,
    PriorPdf, PureState, Transmissivity,
};
use proptest::prelude::*;

fn state_strategy(max_cutoff: usize) -> impl Strategy<Value = PureState> {
    (1..=max_cutoff)
        .prop_flat_map(|cutoff| prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), cutoff + 1))
        .prop_filter_map("zero vector", |pairs| {
            let amps = pairs.into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
            PureState::normalized(amps).ok()
        })
}

fn prior_strategy() -> impl Strategy<Value = PriorPdf> {
    prop_oneof![
        (0.05..0.95f64, 0.02..0.98f64, 0.02..0.98f64)
            .prop_filter("separated atoms", |(_, a, b)| (a - b).abs() > 0.1)
            .prop_map(|(q, a, b)| PriorPdf::two_point(q, a, b).unwrap()),
        (0.5..6.0f64, 0.5..6.0f64).prop_map(|(a, b)| PriorPdf::beta(a, b).unwrap()),
    ]
}

fn tau(t: f64) -> Transmissivity {
    Transmissivity::new(t).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pure_states_are_rank_one(state in state_strategy(6)) {
        let rho = state.to_density();
        let m = rho.matrix();
        prop_assert!((m * m - m).norm() < 1e-12);
        prop_assert!((m.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn channel_routes_agree(state in state_strategy(8), t in 0.0..=1.0f64) {
        let rho = state.to_density();
        let diff = (apply_kraus(&rho, tau(t)).matrix() - apply_ladder(&rho, tau(t)).matrix()).norm();
        prop_assert!(diff < 1e-9, "diff {diff}");
    }

    #[test]
    fn channel_composes(state in state_strategy(6), t1 in 0.0..=1.0f64, t2 in 0.0..=1.0f64) {
        let rho = state.to_density();
        let twice = apply_kraus(&apply_kraus(&rho, tau(t1)), tau(t2));
        let once = apply_kraus(&rho, tau(t1 * t2));
        prop_assert!((twice.matrix() - once.matrix()).norm() < 1e-12);
    }

    #[test]
    fn loss_scales_mean_photon(state in state_strategy(6), t in 0.0..=1.0f64) {
        let out = apply_ladder(&state.to_density(), tau(t));
        prop_assert!((out.mean_photon() - t * state.mean_photon()).abs() < 1e-12);
        prop_assert!((out.matrix().trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fock_inputs_stay_diagonal(n in 0usize..8, t in 0.0..=1.0f64) {
        let out = apply_kraus(&PureState::fock(n, 8).unwrap().to_density(), tau(t));
        prop_assert!(out.max_coherence() < 1e-15);
    }

    #[test]
    fn in_between_amplitudes(nbar in 0.0..20.0f64) {
        let s = InBetweenState::new(nbar).unwrap();
        let (a, c) = (s.lower_amplitude(), s.upper_amplitude());
        prop_assert!((a * a + c * c - 1.0).abs() < 1e-12);
        let state = s.pure(s.upper()).unwrap();
        prop_assert!((state.mean_photon() - nbar).abs() < 1e-10);
    }

    #[test]
    fn lower_bound_below_mmse_below_variance(state in state_strategy(4), prior in prior_strategy()) {
        let r = mmse(&state, &prior).unwrap();
        prop_assert!(r.lower_bound <= r.mmse + 1e-12, "{} > {}", r.lower_bound, r.mmse);
        prop_assert!(r.mmse <= prior.variance() + 1e-12);
        prop_assert!(r.mmse >= -1e-12);
    }

    #[test]
    fn photon_counting_never_beats_mmse(state in state_strategy(4), prior in prior_strategy()) {
        let opt = mmse(&state, &prior).unwrap().mmse;
        let pnr = pnr_mse(&state, &prior).unwrap();
        prop_assert!(pnr >= opt - 1e-12, "pnr {pnr} < mmse {opt}");
        prop_assert!(pnr <= prior.variance() + 1e-12);
    }

    #[test]
    fn fock_mmse_bounded_by_variance(n in 0usize..30, prior in prior_strategy()) {
        let v = fock_mmse_generic(n, &prior).unwrap();
        prop_assert!(v >= 0.0 && v <= prior.variance() + 1e-15);
    }

    #[test]
    fn mmse_ignores_phase_rotation(state in state_strategy(5), prior in prior_strategy(), phi in 0.0..6.3f64) {
        let a = mmse(&state, &prior).unwrap().mmse;
        let b = mmse(&state.phase_rotated(phi), &prior).unwrap().mmse;
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn samples_satisfy_constraints(nbar in 0.0..=4.0f64, seed in any::<u64>()) {
        for s in sample_states(nbar, 4, 20, seed).unwrap() {
            prop_assert!((s.state.mean_photon() - nbar).abs() < 1e-10);
            let norm: f64 = s.state.weights().iter().sum();
            prop_assert!((norm - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn sampler_is_uniform_on_segment() {
    // N = 2, nbar = 1: the polytope is p = ((1-x)/2, x, (1-x)/2) with x uniform on [0, 1].
    let samples = sample_states(1.0, 2, 10_000, 2024).unwrap();
    let mut xs: Vec<f64> = samples.iter().map(|s| s.state.weights()[1]).collect();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let ks = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs()))
        .fold(0.0, f64::max);
    assert!(ks < 0.02, "KS statistic {ks}");
}

#[test]
fn sampler_is_deterministic() {
    let a = sample_states(2.7, 4, 50, 99).unwrap();
    let b = sample_states(2.7, 4, 50, 99).unwrap();
    assert_eq!(a, b);
}

#[test]
fn in_between_amplitude_identity_dense_grid() {
    for i in 0..10_000 {
        let nbar = i as f64 * 1e-3;
        let s = InBetweenState::new(nbar).unwrap();
        let state = s.pure(s.upper()).unwrap();
        assert_abs_diff_eq!(state.mean_photon(), nbar, epsilon = 1e-10);
    }
}
