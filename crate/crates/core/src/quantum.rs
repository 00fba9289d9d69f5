//! Quantum (coherent) walk: amplitude evolution, closed-form steady-state
//! amplitudes and the single-ring amplitude path sum.
//!
//! Amplitudes reaching an absorbing port accumulate coherently, so the Drop
//! probability after `n` steps is `|a_D(n)|²` of the accumulated amplitude.
//! Because arrivals at different steps add coherently rather than as
//! orthogonal time bins, `‖a(n)‖₂` is not constant. What an isometric step
//! does conserve is the time-resolved norm: transient weight plus the sum of
//! `|arrival|²` over all steps so far, exposed by
//! [`AmplitudeTrajectory::time_resolved_norm_sqr`].

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::classical::{check_dim, WalkState, DEFAULT_TOL, MAX_STEPS};
use crate::error::{Error, Result};
use crate::graph::{QuantumMatrix, RingChainSpec};

pub type AmplitudeState = WalkState<C64>;

/// Round-trip factor `γ = α e^{iθ}` of one ring.
///
/// The phase is kept unreduced so that the half-ring factor
/// `γ^{1/2} = α^{1/2} e^{iθ/2}` is unambiguous.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundTripFactor {
    pub loss: f64,
    pub phase: f64,
}

impl RoundTripFactor {
    pub fn new(loss: f64, phase: f64) -> Self {
        Self { loss, phase }
    }

    pub fn lossless(phase: f64) -> Self {
        Self { loss: 1.0, phase }
    }

    pub fn value(&self) -> C64 {
        C64::from_polar(self.loss, self.phase)
    }

    /// Factor picked up over one half ring.
    pub fn half_step(&self) -> C64 {
        C64::from_polar(self.loss.sqrt(), self.phase / 2.0)
    }

    pub fn is_lossless(&self) -> bool {
        self.loss == 1.0
    }
}

/// Cumulative Drop and Thru amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplitudeResult {
    pub drop: C64,
    pub thru: C64,
}

impl AmplitudeResult {
    pub fn p_drop(&self) -> f64 {
        self.drop.norm_sqr()
    }

    pub fn p_thru(&self) -> f64 {
        self.thru.norm_sqr()
    }
}

/// Output of [`evolve_amplitudes`].
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTrajectory {
    pub states: Vec<AmplitudeState>,
    /// Amplitudes arriving at (Drop, Thru) during each step; entry 0 is zero.
    pub arrivals: Vec<(C64, C64)>,
    drop: usize,
    thru: usize,
    initial_transient: f64,
    transient: Vec<f64>,
}

impl AmplitudeTrajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn amplitudes(&self, step: usize) -> AmplitudeResult {
        let v = &self.states[step].values;
        AmplitudeResult { drop: v[self.drop], thru: v[self.thru] }
    }

    pub fn p_drop(&self, step: usize) -> f64 {
        self.states[step].values[self.drop].norm_sqr()
    }

    pub fn p_thru(&self, step: usize) -> f64 {
        self.states[step].values[self.thru].norm_sqr()
    }

    /// `‖a‖₂²` of the full state vector, absorbing entries included.
    pub fn state_norm_sqr(&self, step: usize) -> f64 {
        self.states[step].values.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Transient weight at `step` plus every `|arrival|²` up to `step`.
    /// Equal to the initial transient weight for lossless chains.
    pub fn time_resolved_norm_sqr(&self, step: usize) -> f64 {
        let emitted: f64 = self.arrivals[..=step]
            .iter()
            .map(|(d, t)| d.norm_sqr() + t.norm_sqr())
            .sum();
        self.transient[step] + emitted
    }

    pub fn initial_transient_weight(&self) -> f64 {
        self.initial_transient
    }
}

/// Amplitude states `T^m a0` for `m = 0..=steps`.
pub fn evolve_amplitudes(
    t: &QuantumMatrix,
    a0: &AmplitudeState,
    steps: usize,
) -> Result<AmplitudeTrajectory> {
    check_dim(t, a0)?;
    let norm: f64 = a0.values.iter().map(|a| a.norm_sqr()).sum();
    if norm > 1.0 + 1e-12 {
        return Err(Error::InvalidArgument(format!("initial amplitude norm² {norm} exceeds 1")));
    }
    let (drop, thru) = (t.drop_index(), t.thru_index());
    let mut states = Vec::with_capacity(steps + 1);
    let mut arrivals = Vec::with_capacity(steps + 1);
    let mut transient = Vec::with_capacity(steps + 1);
    states.push(a0.clone());
    arrivals.push((C64::new(0.0, 0.0), C64::new(0.0, 0.0)));
    transient.push(a0.transient_weight(t));

    let mut current = a0.values.clone();
    let mut next = vec![C64::new(0.0, 0.0); t.dim()];
    for m in 1..=steps {
        let arriving = |port: usize| -> C64 {
            t.row(port)
                .iter()
                .zip(&current)
                .enumerate()
                .filter(|(j, _)| !t.is_absorbing(*j))
                .map(|(_, (&w, &a))| w * a)
                .sum()
        };
        arrivals.push((arriving(drop), arriving(thru)));
        t.apply_into(&current, &mut next);
        std::mem::swap(&mut current, &mut next);
        let state = WalkState::new(a0.step + m, current.clone());
        transient.push(state.transient_weight(t));
        states.push(state);
    }
    Ok(AmplitudeTrajectory { states, arrivals, drop, thru, initial_transient: transient[0], transient })
}

/// Iterate the amplitude chain until the transient weight drops below `tol`.
pub fn steady_by_evolution(t: &QuantumMatrix, a0: &AmplitudeState, tol: f64) -> Result<AmplitudeResult> {
    check_dim(t, a0)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let mut current = a0.values.clone();
    let mut next = vec![C64::new(0.0, 0.0); t.dim()];
    for step in 0..=MAX_STEPS {
        let remaining = WalkState::new(step, current.clone()).transient_weight(t);
        if remaining < tol {
            return Ok(AmplitudeResult { drop: current[t.drop_index()], thru: current[t.thru_index()] });
        }
        if step == MAX_STEPS {
            return Err(Error::NonConvergence { steps: step, remaining });
        }
        t.apply_into(&current, &mut next);
        std::mem::swap(&mut current, &mut next);
    }
    unreachable!("loop returns on the final step")
}

/// Default tolerance for [`steady_by_evolution`], same as the classical one.
pub const DEFAULT_AMPLITUDE_TOL: f64 = DEFAULT_TOL * DEFAULT_TOL;

/// Closed-form single-ring steady-state amplitudes.
///
/// `a_D = -(k1 k2 γ)^{1/2} / (1 - (t1 t2)^{1/2} γ)`,
/// `a_T = (t1^{1/2} - t2^{1/2} γ) / (1 - (t1 t2)^{1/2} γ)`.
/// With `k1 = 0` the walker never enters the ring and `a_T = 1`.
pub fn steady_amplitudes_single(k1: f64, k2: f64, gamma: RoundTripFactor) -> AmplitudeResult {
    if k1 == 0.0 {
        return AmplitudeResult { drop: C64::new(0.0, 0.0), thru: C64::new(1.0, 0.0) };
    }
    let (t1, t2) = (1.0 - k1, 1.0 - k2);
    let g = gamma.value();
    let denom = 1.0 - (t1 * t2).sqrt() * g;
    AmplitudeResult {
        drop: -(k1 * k2).sqrt() * gamma.half_step() / denom,
        thru: (t1.sqrt() - t2.sqrt() * g) / denom,
    }
}

/// Closed-form two-ring steady-state amplitudes.
///
/// `a_D = -(k1 k2 k3 γ1 γ2)^{1/2} / D`,
/// `a_T = (t1^{1/2} - t2^{1/2} γ1 - (t1 t2 t3)^{1/2} γ2 + t3^{1/2} γ1 γ2) / D`,
/// `D = 1 - (t2 t3)^{1/2} γ2 - (t1 t2)^{1/2} γ1 + (t1 t3)^{1/2} γ1 γ2`.
///
/// `k1 = 0` never enters; `k2 = 0` decouples the second ring and reduces to
/// a single ring whose far coupler never lets go.
pub fn steady_amplitudes_double(
    k1: f64,
    k2: f64,
    k3: f64,
    gamma1: RoundTripFactor,
    gamma2: RoundTripFactor,
) -> AmplitudeResult {
    if k1 == 0.0 {
        return AmplitudeResult { drop: C64::new(0.0, 0.0), thru: C64::new(1.0, 0.0) };
    }
    if k2 == 0.0 {
        let single = steady_amplitudes_single(k1, 0.0, gamma1);
        return AmplitudeResult { drop: C64::new(0.0, 0.0), thru: single.thru };
    }
    let (t1, t2, t3) = (1.0 - k1, 1.0 - k2, 1.0 - k3);
    let (g1, g2) = (gamma1.value(), gamma2.value());
    let denom = 1.0 - (t2 * t3).sqrt() * g2 - (t1 * t2).sqrt() * g1 + (t1 * t3).sqrt() * g1 * g2;
    let thru = t1.sqrt() - t2.sqrt() * g1 - (t1 * t2 * t3).sqrt() * g2 + t3.sqrt() * g1 * g2;
    AmplitudeResult {
        drop: -(k1 * k2 * k3).sqrt() * gamma1.half_step() * gamma2.half_step() / denom,
        thru: thru / denom,
    }
}

/// Cumulative single-ring amplitudes after `steps` hops from the truncated
/// amplitude series with ratio `(t1 t2)^{1/2} γ`.
pub fn path_sum_amplitude_oracle(spec: &RingChainSpec, steps: usize) -> Result<AmplitudeResult> {
    spec.validate()?;
    if spec.num_rings() != 1 {
        return Err(Error::Unsupported(format!(
            "amplitude path sum covers a single ring, got {}",
            spec.num_rings()
        )));
    }
    let (k1, k2) = (spec.coupling(0), spec.coupling(1));
    let (t1, t2) = (1.0 - k1, 1.0 - k2);
    let gamma = spec.round_trip(0);
    let ratio = (t1 * t2).sqrt() * gamma.value();
    let first_drop = -(k1 * k2).sqrt() * gamma.half_step();
    let first_return = -k1 * t2.sqrt() * gamma.value();

    let mut drop = C64::new(0.0, 0.0);
    let mut term = first_drop;
    let mut n = 2;
    while n <= steps {
        drop += term;
        term *= ratio;
        n += 2;
    }

    let mut thru = if steps >= 1 { C64::new(t1.sqrt(), 0.0) } else { C64::new(0.0, 0.0) };
    let mut term = first_return;
    let mut n = 3;
    while n <= steps {
        thru += term;
        term *= ratio;
        n += 2;
    }
    Ok(AmplitudeResult { drop, thru })
}

/// Classical-to-quantum substitution `k → k^{1/2} e^{iφ}`, `t → t^{1/2}`,
/// `α → γ`, applied to the single-ring path-sum structure.
#[cfg(test)]
pub(crate) mod substitution {
    use std::ops::{Add, Div, Mul, Sub};

    use num_complex::Complex64 as C64;

    use super::RoundTripFactor;

    /// Single-ring steady state written as a sum over paths, generic over the
    /// weight field. `k_in`, `k_back` and `k_out` are the weights of entering
    /// the ring, leaving it towards Thru and leaving it towards Drop; `half`
    /// is the half-ring factor.
    pub fn single_ring_paths<T>(k_in: T, k_back: T, k_out: T, t1: T, t2: T, half: T) -> (T, T)
    where
        T: Copy + From<f64> + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Div<Output = T>,
    {
        let round = half * half;
        let loops = T::from(1.0) / (T::from(1.0) - t1 * t2 * round);
        let drop = k_in * k_out * half * loops;
        let thru = t1 + k_in * k_back * t2 * round * loops;
        (drop, thru)
    }

    pub fn classical(k1: f64, k2: f64, alpha: f64) -> (f64, f64) {
        single_ring_paths(k1, k1, k2, 1.0 - k1, 1.0 - k2, alpha.sqrt())
    }

    /// The input coupling carries `φ = π`; every other phase is zero.
    pub fn quantum(k1: f64, k2: f64, gamma: RoundTripFactor) -> (C64, C64) {
        let phase_in = C64::from_polar(1.0, std::f64::consts::PI);
        single_ring_paths(
            C64::from(k1.sqrt()) * phase_in,
            C64::from(k1.sqrt()),
            C64::from(k2.sqrt()),
            C64::from((1.0 - k1).sqrt()),
            C64::from((1.0 - k2).sqrt()),
            gamma.half_step(),
        )
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::graph::{build_chain, quantum_transfer_matrix};

    fn matrix(spec: &RingChainSpec) -> QuantumMatrix {
        quantum_transfer_matrix(&build_chain(spec).unwrap())
    }

    fn run(spec: &RingChainSpec, steps: usize) -> AmplitudeTrajectory {
        let t = matrix(spec);
        evolve_amplitudes(&t, &WalkState::localized(t.dim(), 0), steps).unwrap()
    }

    #[test]
    fn resonant_balanced_ring_hits_two_thirds_at_six() {
        let traj = run(&RingChainSpec::single(0.5, 0.5, 1.0, 0.0).unwrap(), 6);
        assert!((traj.p_drop(4) - 0.5625).abs() < 1e-15);
        assert!((traj.p_drop(6) - 0.765625).abs() < 1e-15);
        assert!(traj.p_drop(4) < 2.0 / 3.0 && traj.p_drop(6) >= 2.0 / 3.0);
    }

    #[test]
    fn decoupled_input_goes_straight_through() {
        let traj = run(&RingChainSpec::single(0.0, 0.4, 1.0, 0.3).unwrap(), 5);
        for m in 1..=5 {
            assert_eq!(traj.amplitudes(m).thru, C64::new(1.0, 0.0));
            assert_eq!(traj.states[m].values, traj.states[1].values);
        }
    }

    #[test]
    fn antiresonant_ring_settles_at_one_ninth() {
        let traj = run(&RingChainSpec::single(0.5, 0.5, 1.0, PI).unwrap(), 200);
        assert!((traj.p_drop(200) - 1.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn literal_state_norm_is_not_conserved_but_time_resolved_norm_is() {
        let traj = run(&RingChainSpec::single(0.5, 0.5, 1.0, 0.0).unwrap(), 3);
        assert!((traj.state_norm_sqr(3) - 0.5).abs() < 1e-15);
        for m in 0..=3 {
            assert!((traj.time_resolved_norm_sqr(m) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn evolve_rejects_oversized_state() {
        let t = matrix(&RingChainSpec::single(0.5, 0.5, 1.0, 0.0).unwrap());
        let big = WalkState::new(0, vec![C64::new(1.0, 0.0); 5]);
        assert!(evolve_amplitudes(&t, &big, 2).is_err());
        let short = WalkState::new(0, vec![C64::new(1.0, 0.0); 4]);
        assert!(matches!(evolve_amplitudes(&t, &short, 2), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn single_closed_form_examples() {
        for k in [0.1, 0.5, 0.9] {
            let r = steady_amplitudes_single(k, k, RoundTripFactor::lossless(0.0));
            assert!((r.p_drop() - 1.0).abs() < 1e-12, "k={k}");
        }
        let r = steady_amplitudes_single(0.5, 0.5, RoundTripFactor::lossless(PI));
        assert!((r.p_drop() - 1.0 / 9.0).abs() < 1e-15);
        for theta in [0.0, 1.0, 2.5, PI] {
            let r = steady_amplitudes_single(1.0, 0.3, RoundTripFactor::new(0.64, theta));
            // t1 = 0 leaves a single path: one half ring, then cross.
            assert!((r.p_drop() - 0.3 * 0.64).abs() < 1e-15);
        }
        let r = steady_amplitudes_single(0.0, 0.0, RoundTripFactor::lossless(0.0));
        assert_eq!((r.p_drop(), r.p_thru()), (0.0, 1.0));
    }

    #[test]
    fn single_closed_form_lossless_sum_is_one() {
        for &(k1, k2, th) in &[(0.2, 0.7, 0.3), (0.9, 0.1, 2.0), (0.5, 0.5, PI), (0.33, 0.0, 1.0)] {
            let r = steady_amplitudes_single(k1, k2, RoundTripFactor::lossless(th));
            assert!((r.p_drop() + r.p_thru() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_closed_form_probability_formula_lossless() {
        let (k1, k2, th) = (0.3, 0.6, 1.3);
        let (t1, t2) = (1.0 - k1, 1.0 - k2);
        let r = steady_amplitudes_single(k1, k2, RoundTripFactor::lossless(th));
        let expected = k1 * k2 / (1.0 + t1 * t2 - 2.0 * (t1 * t2).sqrt() * th.cos());
        assert!((r.p_drop() - expected).abs() < 1e-15);
        let thru = (t1 + t2 - 2.0 * (t1 * t2).sqrt() * th.cos())
            / (1.0 + t1 * t2 - 2.0 * (t1 * t2).sqrt() * th.cos());
        assert!((r.p_thru() - thru).abs() < 1e-15);
    }

    #[test]
    fn double_closed_form_examples() {
        for th in [0.0, 0.4, 2.0] {
            let r = steady_amplitudes_double(
                1.0,
                1.0,
                1.0,
                RoundTripFactor::lossless(th),
                RoundTripFactor::lossless(-th),
            );
            assert!((r.p_drop() - 1.0).abs() < 1e-15);
        }
        let g = RoundTripFactor::lossless(0.0);
        let closed = steady_amplitudes_double(0.5, 0.5, 0.5, g, g);
        let t = matrix(&RingChainSpec::uniform(vec![0.5, 0.5, 0.5], 1.0, 0.0).unwrap());
        let traj = evolve_amplitudes(&t, &WalkState::localized(7, 0), 10_000).unwrap();
        assert!((traj.p_drop(10_000) - closed.p_drop()).abs() < 1e-8);
    }

    #[test]
    fn double_closed_form_decoupled_cases() {
        let g1 = RoundTripFactor::lossless(0.7);
        let g2 = RoundTripFactor::lossless(0.0);
        let r = steady_amplitudes_double(0.0, 0.0, 0.0, g1, g2);
        assert_eq!((r.p_drop(), r.p_thru()), (0.0, 1.0));
        let r = steady_amplitudes_double(0.4, 0.0, 0.0, g1, g2);
        assert_eq!(r.p_drop(), 0.0);
        assert!((r.p_thru() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn double_peaked_resonance() {
        let samples = 10_000;
        let p: Vec<f64> = (0..samples)
            .map(|i| {
                let g = RoundTripFactor::lossless(2.0 * PI * i as f64 / samples as f64);
                steady_amplitudes_double(0.5, 0.5, 0.5, g, g).p_drop()
            })
            .collect();
        let maxima = (0..samples)
            .filter(|&i| {
                let prev = p[(i + samples - 1) % samples];
                let next = p[(i + 1) % samples];
                p[i] > prev && p[i] >= next
            })
            .count();
        assert_eq!(maxima, 2);
    }

    #[test]
    fn amplitude_oracle_first_terms() {
        let spec = RingChainSpec::single(0.3, 0.6, 0.8, 1.2).unwrap();
        let r1 = path_sum_amplitude_oracle(&spec, 1).unwrap();
        assert_eq!(r1.drop, C64::new(0.0, 0.0));
        assert_eq!(r1.thru, C64::new(0.7f64.sqrt(), 0.0));
        let r2 = path_sum_amplitude_oracle(&spec, 2).unwrap();
        let gamma = RoundTripFactor::new(0.8, 1.2);
        let expected = -(0.3f64 * 0.6).sqrt() * gamma.half_step();
        assert!((r2.drop - expected).norm() < 1e-16);
    }

    #[test]
    fn amplitude_oracle_converges_to_closed_form() {
        let gamma = RoundTripFactor::new(0.9, 2.2);
        let spec = RingChainSpec::single(0.3, 0.6, gamma.loss, gamma.phase).unwrap();
        let r = path_sum_amplitude_oracle(&spec, 600).unwrap();
        let c = steady_amplitudes_single(0.3, 0.6, gamma);
        assert!((r.drop - c.drop).norm() < 1e-13);
        assert!((r.thru - c.thru).norm() < 1e-13);
    }

    #[test]
    fn amplitude_oracle_rejects_two_rings() {
        let spec = RingChainSpec::uniform(vec![0.5; 3], 1.0, 0.0).unwrap();
        assert!(matches!(path_sum_amplitude_oracle(&spec, 3), Err(Error::Unsupported(_))));
    }

    #[test]
    fn substitution_reproduces_amplitudes() {
        let (ad, at) = substitution::quantum(0.5, 0.5, RoundTripFactor::lossless(0.0));
        let r = steady_amplitudes_single(0.5, 0.5, RoundTripFactor::lossless(0.0));
        assert!((ad - r.drop).norm() < 1e-14);
        assert!((at - r.thru).norm() < 1e-14);

        for &(k1, k2, a, th) in &[(0.3, 0.8, 0.9, 0.4), (0.7, 0.2, 1.0, 2.9), (0.5, 0.5, 0.6, -1.0)] {
            let g = RoundTripFactor::new(a, th);
            let (ad, at) = substitution::quantum(k1, k2, g);
            let r = steady_amplitudes_single(k1, k2, g);
            assert!((ad - r.drop).norm() < 1e-14);
            assert!((at - r.thru).norm() < 1e-14);
        }
    }

    #[test]
    fn substitution_classical_side_is_the_closed_form() {
        let (d, t) = substitution::classical(0.3, 0.8, 0.9);
        let c = crate::classical::closed_form_single(0.3, 0.8, 0.9);
        assert!((d - c.drop).abs() < 1e-15);
        assert!((t - c.thru).abs() < 1e-15);
    }

    #[test]
    fn substitution_at_resonance_matches_probability() {
        let (k1, k2) = (0.3, 0.6);
        let (ad, _) = substitution::quantum(k1, k2, RoundTripFactor::lossless(0.0));
        let (t1, t2) = (1.0 - k1, 1.0 - k2);
        let expected = k1 * k2 / (1.0 + t1 * t2 - 2.0 * (t1 * t2).sqrt());
        assert!((ad.norm_sqr() - expected).abs() < 1e-14);
    }

    #[test]
    fn substitution_unit_stay_is_identity() {
        // t → t^{1/2} leaves t = 1 unchanged; with k1 = 0 both sides give Thru = 1.
        let (_, tc) = substitution::classical(0.0, 0.4, 1.0);
        let (_, tq) = substitution::quantum(0.0, 0.4, RoundTripFactor::lossless(0.3));
        assert_eq!(tc, 1.0);
        assert!((tq - C64::new(1.0, 0.0)).norm() < 1e-15);
    }
}
