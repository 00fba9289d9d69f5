use std::f64::consts::PI;

use proptest::prelude::*;
use ringwalk::analysis::{self, Regime};
use ringwalk::classical::{self, WalkState};
use ringwalk::coupler::{self, BendLossTable, CouplerSpec};
use ringwalk::quantum::{self, RoundTripFactor};
use ringwalk::{
    build_chain, classical_transfer_matrix, quantum_transfer_matrix, ChainGeometry, Complex64, RingChainSpec,
};

fn chain(max_rings: usize, lossy: bool) -> impl Strategy<Value = RingChainSpec> {
    (1..=max_rings).prop_flat_map(move |n| {
        let loss = if lossy { 0.5..=1.0 } else { 1.0..=1.0 };
        (
            prop::collection::vec(0.0..=1.0f64, n + 1),
            prop::collection::vec(loss, n),
            prop::collection::vec(0.0..2.0 * PI, n),
        )
            .prop_map(|(k, a, th)| RingChainSpec::new(k, a, th).unwrap())
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn classical_columns_are_stochastic(s in chain(5, true)) {
        let t = classical_transfer_matrix(&build_chain(&s).unwrap());
        for (j, sum) in t.column_sums().into_iter().enumerate() {
            if s.is_lossless() {
                prop_assert!(close(sum, 1.0, 1e-12), "column {} sums to {}", j, sum);
            } else {
                prop_assert!(sum <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn lossless_quantum_step_is_isometric(
        s in chain(4, false),
        seed in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 11),
    ) {
        let t = quantum_transfer_matrix(&build_chain(&s).unwrap());
        let mut a: Vec<Complex64> = (0..t.dim())
            .map(|i| if t.is_absorbing(i) { Complex64::new(0.0, 0.0) } else { Complex64::new(seed[i].0, seed[i].1) })
            .collect();
        let norm: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        a.iter_mut().for_each(|z| *z /= norm);
        let out: f64 = t.apply(&a).iter().map(|z| z.norm_sqr()).sum();
        prop_assert!(close(out, 1.0, 1e-12), "{}", out);
    }

    #[test]
    fn quantum_and_classical_share_support(s in chain(4, true)) {
        let g = build_chain(&s).unwrap();
        prop_assert_eq!(classical_transfer_matrix(&g).support(), quantum_transfer_matrix(&g).support());
    }

    #[test]
    fn geometry_and_explicit_specs_agree(
        k in prop::collection::vec(0.0..=1.0f64, 3),
        r in 5e-6..1e-4f64,
        n_eff in 1.4..2.2f64,
        lambda in 5e-7..1.6e-6f64,
        absorption in 0.0..200.0f64,
    ) {
        let geometry = ChainGeometry {
            radii: vec![r, r],
            n_eff,
            wavelength: lambda,
            coupler_length: 0.0,
            absorption,
            bending_loss: 0.0,
        };
        let from_geo = RingChainSpec::from_geometry(k.clone(), geometry.clone()).unwrap();
        let explicit = RingChainSpec::new(k, geometry.losses().unwrap(), geometry.phases().unwrap()).unwrap();
        let (g1, g2) = (build_chain(&from_geo).unwrap(), build_chain(&explicit).unwrap());
        let (q1, q2) = (quantum_transfer_matrix(&g1), quantum_transfer_matrix(&g2));
        let (c1, c2) = (classical_transfer_matrix(&g1), classical_transfer_matrix(&g2));
        for i in 0..q1.dim() {
            for j in 0..q1.dim() {
                prop_assert!((q1.get(i, j) - q2.get(i, j)).norm() < 1e-12);
                prop_assert!((c1.get(i, j) - c2.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn classical_oracle_matches_markov(s in chain(2, true)) {
        let t = classical_transfer_matrix(&build_chain(&s).unwrap());
        let states = classical::evolve(&t, &WalkState::localized(t.dim(), 0), 20).unwrap();
        for (n, st) in states.iter().enumerate() {
            let o = classical::path_sum_oracle(&s, n).unwrap();
            prop_assert!(close(o.drop, st.values[t.drop_index()], 1e-12), "n={}", n);
            prop_assert!(close(o.thru, st.values[t.thru_index()], 1e-12), "n={}", n);
        }
    }

    #[test]
    fn classical_mass_is_conserved_or_decays(s in chain(4, true)) {
        let t = classical_transfer_matrix(&build_chain(&s).unwrap());
        let states = classical::evolve(&t, &WalkState::localized(t.dim(), 0), 80).unwrap();
        for w in states.windows(2) {
            if s.is_lossless() {
                prop_assert!(close(w[1].mass(), 1.0, 1e-12));
            } else {
                prop_assert!(w[1].mass() <= w[0].mass() + 1e-15);
            }
        }
    }

    #[test]
    fn single_ring_absorption_parity(k1 in 0.0..=1.0f64, k2 in 0.0..=1.0f64, a in 0.5..=1.0f64) {
        let s = RingChainSpec::single(k1, k2, a, 0.0).unwrap();
        let t = classical_transfer_matrix(&build_chain(&s).unwrap());
        let states = classical::evolve(&t, &WalkState::localized(t.dim(), 0), 40).unwrap();
        let (d, th) = (t.drop_index(), t.thru_index());
        for n in 1..=40 {
            let (prev, cur) = (&states[n - 1].values, &states[n].values);
            prop_assert!(cur[d] >= prev[d] && cur[th] >= prev[th]);
            if n % 2 == 1 {
                prop_assert_eq!(cur[d], prev[d]);
            } else {
                prop_assert_eq!(cur[th], prev[th]);
            }
        }
    }

    #[test]
    fn time_resolved_norm_is_conserved(s in chain(4, false)) {
        let t = quantum_transfer_matrix(&build_chain(&s).unwrap());
        let traj = quantum::evolve_amplitudes(&t, &WalkState::localized(t.dim(), 0), 50).unwrap();
        for n in 0..=50 {
            prop_assert!(close(traj.time_resolved_norm_sqr(n), 1.0, 1e-12));
        }
    }

    #[test]
    fn lossy_time_resolved_norm_decays(s in chain(3, true)) {
        let t = quantum_transfer_matrix(&build_chain(&s).unwrap());
        let traj = quantum::evolve_amplitudes(&t, &WalkState::localized(t.dim(), 0), 50).unwrap();
        for n in 1..=50 {
            prop_assert!(traj.time_resolved_norm_sqr(n) <= traj.time_resolved_norm_sqr(n - 1) + 1e-12);
        }
    }

    #[test]
    fn amplitude_oracle_matches_evolution(s in chain(1, true)) {
        let t = quantum_transfer_matrix(&build_chain(&s).unwrap());
        let traj = quantum::evolve_amplitudes(&t, &WalkState::localized(t.dim(), 0), 20).unwrap();
        for n in 0..=20 {
            let o = quantum::path_sum_amplitude_oracle(&s, n).unwrap();
            let a = traj.amplitudes(n);
            prop_assert!((o.drop - a.drop).norm() < 1e-12 && (o.thru - a.thru).norm() < 1e-12, "n={}", n);
        }
    }

    #[test]
    fn quantum_drop_is_symmetric(k1 in 0.0..=1.0f64, k2 in 0.0..=1.0f64, theta in 0.0..2.0 * PI) {
        let g = RoundTripFactor::lossless(theta);
        let a = quantum::steady_amplitudes_single(k1, k2, g).p_drop();
        let b = quantum::steady_amplitudes_single(k2, k1, g).p_drop();
        prop_assert!(close(a, b, 1e-12));
    }

    #[test]
    fn two_ring_lossless_amplitudes_conserve_probability(
        k in prop::collection::vec(0.0..=1.0f64, 3),
        th1 in 0.0..2.0 * PI,
        th2 in 0.0..2.0 * PI,
    ) {
        let r = quantum::steady_amplitudes_double(
            k[0], k[1], k[2], RoundTripFactor::lossless(th1), RoundTripFactor::lossless(th2),
        );
        prop_assume!(r.drop.is_finite() && r.thru.is_finite());
        prop_assert!(close(r.p_drop() + r.p_thru(), 1.0, 1e-9));
    }

    #[test]
    fn coupling_is_periodic_and_bounded(le in 0.0..2e-3f64, lb in 1e-5..1e-3f64) {
        let k = coupler::coupling_coefficient(le, lb);
        prop_assert!((0.0..=1.0).contains(&k));
        prop_assert!(close(coupler::coupling_coefficient(le + 2.0 * lb, lb), k, 1e-12));
    }

    #[test]
    fn effective_length_never_below_straight(
        ls in 0.0..5e-4f64,
        gap in 0.0..4e-6f64,
        dc in 0.0..4e-6f64,
        rw in 0.0..1.5e-6f64,
        rb in 1e-5..1e-3f64,
    ) {
        let s = CouplerSpec {
            wavelength: 635e-9,
            n_eff1: 1.501,
            n_eff2: 1.5,
            gap,
            straight_length: ls,
            coupling_distance: dc,
            ridge_half_width: rw,
            bend_radius: rb,
        };
        if let Ok(le) = s.effective_length() {
            prop_assert!(le >= ls);
            prop_assert_eq!(le == ls, dc == gap - 2.0 * rw);
        }
    }

    #[test]
    fn min_radius_is_monotone_in_threshold(
        steps in prop::collection::vec((1e-6..1e-4f64, 0.0..=1.0f64), 1..12),
        a in 0.0..=1.0f64,
        b in 0.0..=1.0f64,
    ) {
        let mut radius = 0.0;
        let (radii, trans): (Vec<f64>, Vec<f64>) = steps.iter().map(|&(dr, t)| { radius += dr; (radius, t) }).unzip();
        let table = BendLossTable::new(radii, trans, "random").unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let r_lo = coupler::min_radius_for_loss(&table, lo).unwrap();
        let r_hi = coupler::min_radius_for_loss(&table, hi).unwrap();
        match (r_lo, r_hi) {
            (Some(x), Some(y)) => prop_assert!(x <= y),
            (None, Some(_)) => prop_assert!(false, "lower threshold unreachable"),
            _ => {}
        }
    }

    #[test]
    fn hitting_time_brackets_threshold(
        k in 0.05..=1.0f64,
        theta in 0.0..2.0 * PI,
        p_g in 0.05..0.95f64,
        quantum_regime in any::<bool>(),
    ) {
        let regime = if quantum_regime { Regime::Quantum } else { Regime::Classical };
        let s = RingChainSpec::single(k, k, 1.0, theta).unwrap();
        let r = analysis::hitting_time(&s, regime, p_g, 500).unwrap();
        if let Some(n) = r.steps() {
            let series = analysis::drop_series(&s, regime, n).unwrap();
            prop_assert!(n >= 1 && series[n] >= p_g && series[n - 1] < p_g);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn long_evolution_reaches_closed_form(
        k1 in 0.0..=1.0f64,
        k2 in 0.0..=1.0f64,
        alpha in 0.5..=1.0f64,
        theta in 0.0..2.0 * PI,
    ) {
        let ratio = ((1.0 - k1) * (1.0 - k2)).sqrt() * alpha;
        prop_assume!(ratio <= 0.99);
        let s = RingChainSpec::single(k1, k2, alpha, theta).unwrap();
        let t = quantum_transfer_matrix(&build_chain(&s).unwrap());
        let traj = quantum::evolve_amplitudes(&t, &WalkState::localized(t.dim(), 0), 10_000).unwrap();
        let closed = quantum::steady_amplitudes_single(k1, k2, RoundTripFactor::new(alpha, theta));
        prop_assert!(close(traj.p_drop(10_000), closed.p_drop(), 1e-8));
        prop_assert!(close(traj.p_thru(10_000), closed.p_thru(), 1e-8));
    }
}

#[test]
fn single_ring_closed_form_matches_markov_grid() {
    for alpha in [1.0, 0.9] {
        for i in 0..=20 {
            for j in 0..=20 {
                let (k1, k2) = (i as f64 / 20.0, j as f64 / 20.0);
                let s = RingChainSpec::single(k1, k2, alpha, 0.0).unwrap();
                let t = classical_transfer_matrix(&build_chain(&s).unwrap());
                let p = classical::steady_state(&t, &WalkState::localized(t.dim(), 0), 1e-12).unwrap();
                let c = classical::closed_form_single(k1, k2, alpha);
                assert!(close(p.values[t.drop_index()], c.drop, 1e-10), "({k1}, {k2}, {alpha})");
                assert!(close(p.values[t.thru_index()], c.thru, 1e-10), "({k1}, {k2}, {alpha})");
            }
        }
    }
}

#[test]
fn resonance_favours_quantum_at_every_step() {
    for i in 0..=20 {
        let k = i as f64 / 20.0;
        let s = RingChainSpec::single(k, k, 1.0, 0.0).unwrap();
        let q = analysis::drop_series(&s, Regime::Quantum, 100).unwrap();
        let c = analysis::drop_series(&s, Regime::Classical, 100).unwrap();
        for n in 0..=100 {
            assert!(q[n] >= c[n] - 1e-15, "k={k} n={n}: {} < {}", q[n], c[n]);
            if n > 0 {
                assert!(q[n] >= q[n - 1], "k={k}: not monotone at n={n}");
            }
        }
    }
}

#[test]
fn phase_average_converges_with_samples() {
    for &(k1, k2) in &[(0.1, 0.1), (0.05, 0.2), (0.3, 0.7)] {
        let exact = classical::closed_form_single(k1, k2, 1.0).drop;
        let errors: Vec<f64> =
            [8, 16, 32].iter().map(|&n| (analysis::phase_average(k1, k2, 1.0, n).unwrap() - exact).abs()).collect();
        assert!(errors[1] < errors[0] && (errors[2] < errors[1] || errors[2] < 1e-15), "{errors:?}");
    }
}
