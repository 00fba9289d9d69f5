//! Classical walk: Markov-chain evolution, closed-form steady states and a
//! path-enumeration oracle.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{ClassicalMatrix, Entry, MatrixKind, RingChainSpec, TransitionMatrix};

/// Default tolerance on the remaining transient mass.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default cap on the number of steps taken by the iterative steady states.
pub const MAX_STEPS: usize = 1_000_000;

/// Per-node probabilities (classical) or amplitudes (quantum) after `step` hops.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkState<T> {
    pub step: usize,
    pub values: Vec<T>,
}

pub type ClassicalState = WalkState<f64>;

impl<T: Entry> WalkState<T> {
    pub fn new(step: usize, values: Vec<T>) -> Self {
        Self { step, values }
    }

    /// Walker localised on `node` at step 0.
    pub fn localized(dim: usize, node: usize) -> Self {
        let mut values = vec![T::zero(); dim];
        values[node] = T::one();
        Self { step: 0, values }
    }

    pub fn kind(&self) -> MatrixKind {
        T::KIND
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Sum of `|v|²` over nodes the matrix does not absorb.
    pub fn transient_weight(&self, t: &TransitionMatrix<T>) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(i, _)| !t.is_absorbing(*i))
            .map(|(_, v)| v.norm_sqr())
            .sum()
    }
}

impl ClassicalState {
    pub fn mass(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Probability still inside the device.
    pub fn transient_mass(&self, t: &ClassicalMatrix) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(i, _)| !t.is_absorbing(*i))
            .map(|(_, &v)| v)
            .sum()
    }
}

/// Cumulative probabilities of leaving through the Drop and Thru ports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PortProbabilities {
    pub drop: f64,
    pub thru: f64,
}

pub(crate) fn check_dim<T: Entry>(t: &TransitionMatrix<T>, state: &WalkState<T>) -> Result<()> {
    if state.dim() != t.dim() {
        return Err(Error::DimensionMismatch { expected: t.dim(), found: state.dim() });
    }
    Ok(())
}

fn check_distribution(p0: &ClassicalState) -> Result<()> {
    if p0.values.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::InvalidArgument("initial probabilities must be non-negative".into()));
    }
    let mass = p0.mass();
    if mass > 1.0 + 1e-12 {
        return Err(Error::InvalidArgument(format!("initial mass {mass} exceeds 1")));
    }
    Ok(())
}

/// States `T^m p0` for `m = 0..=steps`, by repeated matrix-vector products.
pub fn evolve(t: &ClassicalMatrix, p0: &ClassicalState, steps: usize) -> Result<Vec<ClassicalState>> {
    check_dim(t, p0)?;
    check_distribution(p0)?;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(p0.clone());
    let mut current = p0.values.clone();
    let mut next = vec![0.0; t.dim()];
    for m in 1..=steps {
        t.apply_into(&current, &mut next);
        std::mem::swap(&mut current, &mut next);
        out.push(WalkState::new(p0.step + m, current.clone()));
    }
    Ok(out)
}

/// Iterate until the transient mass drops below `tol`.
pub fn steady_state(t: &ClassicalMatrix, p0: &ClassicalState, tol: f64) -> Result<ClassicalState> {
    steady_state_capped(t, p0, tol, MAX_STEPS)
}

pub fn steady_state_capped(
    t: &ClassicalMatrix,
    p0: &ClassicalState,
    tol: f64,
    max_steps: usize,
) -> Result<ClassicalState> {
    check_dim(t, p0)?;
    check_distribution(p0)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    // Any walker that can leave does so with positive probability within
    // `dim` hops, so a window without progress means it is trapped.
    let window = t.dim();
    let mut current = p0.values.clone();
    let mut next = vec![0.0; t.dim()];
    let mut checkpoint = f64::INFINITY;
    for step in 0..=max_steps {
        let state = WalkState::new(p0.step + step, current.clone());
        let remaining = state.transient_mass(t);
        if remaining < tol {
            return Ok(state);
        }
        if step % window == 0 {
            if remaining >= checkpoint {
                return Err(Error::NonConvergence { steps: step, remaining });
            }
            checkpoint = remaining;
        }
        if step == max_steps {
            return Err(Error::NonConvergence { steps: step, remaining });
        }
        t.apply_into(&current, &mut next);
        std::mem::swap(&mut current, &mut next);
    }
    unreachable!("loop returns on the final step")
}

/// Closed-form single-ring steady state.
///
/// `drop = k1 k2 α^{1/2} / (1 - α t1 t2)`,
/// `thru = (t1 + t2 α - 2 t1 t2 α) / (1 - t1 t2 α)`.
/// The fully decoupled lossless ring (`k1 = k2 = 0`, `α = 1`) is the
/// absorbing-chain limit `(0, 1)`.
pub fn closed_form_single(k1: f64, k2: f64, alpha: f64) -> PortProbabilities {
    let (t1, t2) = (1.0 - k1, 1.0 - k2);
    if alpha == 1.0 && k1 == 0.0 && k2 == 0.0 {
        return PortProbabilities { drop: 0.0, thru: 1.0 };
    }
    let denom = 1.0 - alpha * t1 * t2;
    PortProbabilities {
        drop: k1 * k2 * alpha.sqrt() / denom,
        thru: (t1 + t2 * alpha - 2.0 * t1 * t2 * alpha) / denom,
    }
}

/// Closed-form two-ring steady state with a shared loss `α`.
///
/// The denominator vanishes only for lossless chains the walker either never
/// enters (`k1 = 0`) or whose second ring is unreachable and closed
/// (`k2 = k3 = 0`); both resolve to `(0, 1)`.
pub fn closed_form_double(k1: f64, k2: f64, k3: f64, alpha: f64) -> PortProbabilities {
    let (t1, t2, t3) = (1.0 - k1, 1.0 - k2, 1.0 - k3);
    if alpha == 1.0 && (k1 == 0.0 || (k2 == 0.0 && k3 == 0.0)) {
        return PortProbabilities { drop: 0.0, thru: 1.0 };
    }
    let a2 = alpha * alpha;
    let denom = 1.0 - t1 * t2 * alpha - t2 * t3 * alpha - t1 * t3 * a2 + 2.0 * t1 * t2 * t3 * a2;
    let thru_num = t1 + t2 * alpha
        - 2.0 * t1 * t2 * alpha
        - (t1 * t2 - (1.0 - 2.0 * t1) * (1.0 - 2.0 * t2) * alpha) * t3 * alpha;
    PortProbabilities { drop: k1 * k2 * k3 * alpha / denom, thru: thru_num / denom }
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Cumulative port probabilities after `steps` hops, summed over path classes.
///
/// Single ring: geometric loop series. Two rings: paths are grouped by the
/// number `s` of returns from ring B to ring A and the total loop counts
/// `A`, `B` in each ring; each class has `C(A+s, s)`-style multiplicities.
pub fn path_sum_oracle(spec: &RingChainSpec, steps: usize) -> Result<PortProbabilities> {
    spec.validate()?;
    match spec.num_rings() {
        1 => Ok(single_ring_paths(spec, steps)),
        2 => Ok(double_ring_paths(spec, steps)),
        n => Err(Error::Unsupported(format!(
            "path enumeration covers one and two rings, got {n}"
        ))),
    }
}

fn single_ring_paths(spec: &RingChainSpec, n: usize) -> PortProbabilities {
    let (k1, k2) = (spec.coupling(0), spec.coupling(1));
    let (t1, t2) = (1.0 - k1, 1.0 - k2);
    let alpha = spec.losses[0];
    let loop_weight = t1 * t2 * alpha;

    let mut drop = 0.0;
    // Drop after 2m + 2 hops: enter, m loops, cross out.
    let mut m = 0;
    while 2 * m + 2 <= n {
        drop += k1 * k2 * alpha.sqrt() * loop_weight.powi(m as i32);
        m += 1;
    }

    let mut thru = if n >= 1 { t1 } else { 0.0 };
    // Thru after 2m + 3 hops: enter, m loops, half turn, cross back.
    let mut m = 0;
    while 2 * m + 3 <= n {
        thru += alpha * k1 * k1 * t2 * loop_weight.powi(m as i32);
        m += 1;
    }
    PortProbabilities { drop, thru }
}

fn double_ring_paths(spec: &RingChainSpec, n: usize) -> PortProbabilities {
    let (k1, k2, k3) = (spec.coupling(0), spec.coupling(1), spec.coupling(2));
    let (t1, t2, t3) = (1.0 - k1, 1.0 - k2, 1.0 - k3);
    let (alpha_a, alpha_b) = (spec.losses[0], spec.losses[1]);
    let (ha, hb) = (alpha_a.sqrt(), alpha_b.sqrt());

    // Elementary pieces, starting from P1 (ring A) or P3 (ring B).
    let loop_a = t2 * ha * t1 * ha; // P1 -> P2 -> P1
    let loop_b = t3 * hb * t2 * hb; // P3 -> P4 -> P3
    let to_b = k2 * ha; // P1 -> P3
    let back_to_a = t3 * hb * k2 * hb * t1 * ha; // P3 -> P4 -> P2 -> P1
    let drop_out = k3 * hb; // P3 -> PD
    let exit_a = t2 * ha * k1 * ha; // P1 -> P2 -> PT
    let exit_b = t3 * hb * k2 * hb * k1 * ha; // P3 -> P4 -> P2 -> PT

    let pw = |x: f64, e: usize| x.powi(e as i32);
    let mut drop = 0.0;
    let mut thru = if n >= 1 { t1 } else { 0.0 };

    let mut s = 0;
    while 4 * s + 3 <= n {
        let budget = (n - 4 * s - 3) / 2; // room for A + B loops
        for a in 0..=budget {
            for b in 0..=(budget - a) {
                // Drop: s+1 visits to B, s returns.
                let w = k1
                    * pw(loop_a, a)
                    * pw(loop_b, b)
                    * pw(to_b, s + 1)
                    * pw(back_to_a, s)
                    * drop_out;
                drop += binomial(a + s, s) * binomial(b + s, s) * w;

                // Thru through ring A: s round trips to B, then exit.
                let groups_b = if s == 0 {
                    if b == 0 { 1.0 } else { 0.0 }
                } else {
                    binomial(b + s - 1, s - 1)
                };
                let w = k1 * pw(loop_a, a) * pw(loop_b, b) * pw(to_b, s) * pw(back_to_a, s) * exit_a;
                thru += binomial(a + s, s) * groups_b * w;
            }
        }
        s += 1;
    }

    // Thru from ring B: 5 + 4s + 2(A+B) hops.
    let mut s = 0;
    while 4 * s + 5 <= n {
        let budget = (n - 4 * s - 5) / 2;
        for a in 0..=budget {
            for b in 0..=(budget - a) {
                let w = k1
                    * pw(loop_a, a)
                    * pw(loop_b, b)
                    * pw(to_b, s + 1)
                    * pw(back_to_a, s)
                    * exit_b;
                thru += binomial(a + s, s) * binomial(b + s, s) * w;
            }
        }
        s += 1;
    }
    PortProbabilities { drop, thru }
}
