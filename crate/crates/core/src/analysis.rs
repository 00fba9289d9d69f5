//! Parameter sweeps, phase averaging, goal-hitting times and time-resolved
//! grids built on the two walk engines.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{self, PortProbabilities, WalkState, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::graph::{build_chain, classical_transfer_matrix, quantum_transfer_matrix, RingChainSpec};
use crate::quantum::{self, RoundTripFactor};

/// Default goal probability for hitting times.
pub const DEFAULT_GOAL: f64 = 2.0 / 3.0;
pub const MIN_AXIS_SAMPLES: usize = 2;
pub const MAX_AXIS_SAMPLES: usize = 2001;
pub const MAX_TIME_STEPS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Classical,
    Quantum,
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(Regime::Classical),
            "quantum" => Ok(Regime::Quantum),
            other => Err(Error::InvalidArgument(format!("unknown regime `{other}`"))),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Classical => "classical",
            Regime::Quantum => "quantum",
        })
    }
}

/// Steady-state quantity reported by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Metric {
    ClassicalDrop,
    ClassicalThru,
    QuantumDrop,
    QuantumThru,
    /// Quantum minus classical Drop probability.
    DropDifference,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::ClassicalDrop,
        Metric::ClassicalThru,
        Metric::QuantumDrop,
        Metric::QuantumThru,
        Metric::DropDifference,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::ClassicalDrop => "pcd",
            Metric::ClassicalThru => "pct",
            Metric::QuantumDrop => "pqd",
            Metric::QuantumThru => "pqt",
            Metric::DropDifference => "pqd-pcd",
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown metric `{s}` (expected pcd, pct, pqd, pqt or pqd-pcd)")))
    }
}

impl TryFrom<String> for Metric {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Metric> for String {
    fn from(m: Metric) -> String {
        m.name().to_string()
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Chain parameter a sweep axis can drive.
///
/// Names: `k<i>` (1-based coupler), `k<i>=k<j>=..` (tied couplers),
/// `theta` and `alpha` (all rings), `lambda` and `r` (geometry, all rings).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Param {
    /// 0-based coupler indices set to the same value.
    Couplings(Vec<usize>),
    Phase,
    Loss,
    Wavelength,
    Radius,
}

impl Param {
    pub fn coupling(i: usize) -> Self {
        Param::Couplings(vec![i])
    }

    pub fn tied(indices: &[usize]) -> Self {
        Param::Couplings(indices.to_vec())
    }

    /// Write `value` into a copy of `spec`.
    pub fn apply(&self, spec: &RingChainSpec, value: f64) -> Result<RingChainSpec> {
        let mut out = spec.clone();
        match self {
            Param::Couplings(indices) => {
                for &i in indices {
                    if i >= out.couplings.len() {
                        return Err(Error::InvalidArgument(format!(
                            "k{} does not exist in a chain with {} couplers",
                            i + 1,
                            out.couplings.len()
                        )));
                    }
                    out.couplings[i] = value;
                }
            }
            Param::Phase => {
                out.geometry = None;
                out.phases.iter_mut().for_each(|p| *p = value);
            }
            Param::Loss => {
                out.geometry = None;
                out.losses.iter_mut().for_each(|a| *a = value);
            }
            Param::Wavelength | Param::Radius => {
                let mut geometry = out.geometry.take().ok_or_else(|| {
                    Error::InvalidArgument(format!("sweeping `{self}` needs a chain geometry"))
                })?;
                if *self == Param::Wavelength {
                    geometry.wavelength = value;
                } else {
                    geometry.radii.iter_mut().for_each(|r| *r = value);
                }
                return RingChainSpec::from_geometry(out.couplings, geometry);
            }
        }
        out.validate()?;
        Ok(out)
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theta" => return Ok(Param::Phase),
            "alpha" => return Ok(Param::Loss),
            "lambda" => return Ok(Param::Wavelength),
            "r" => return Ok(Param::Radius),
            _ => {}
        }
        let unknown = || Error::InvalidArgument(format!("unknown sweep parameter `{s}`"));
        let mut indices = Vec::new();
        for part in s.split('=') {
            let digits = part.strip_prefix('k').ok_or_else(unknown)?;
            let i: usize = digits.parse().map_err(|_| unknown())?;
            if i == 0 {
                return Err(unknown());
            }
            indices.push(i - 1);
        }
        Ok(Param::Couplings(indices))
    }
}

impl TryFrom<String> for Param {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Param> for String {
    fn from(p: Param) -> String {
        p.to_string()
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Couplings(indices) => {
                let names: Vec<String> = indices.iter().map(|i| format!("k{}", i + 1)).collect();
                f.write_str(&names.join("="))
            }
            Param::Phase => f.write_str("theta"),
            Param::Loss => f.write_str("alpha"),
            Param::Wavelength => f.write_str("lambda"),
            Param::Radius => f.write_str("r"),
        }
    }
}

/// Sweep axis with inclusive endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: Param,
    pub start: f64,
    pub stop: f64,
    pub samples: usize,
}

impl Axis {
    pub fn new(param: Param, start: f64, stop: f64, samples: usize) -> Self {
        Self { param, start, stop, samples }
    }

    pub fn validate(&self) -> Result<()> {
        if !(MIN_AXIS_SAMPLES..=MAX_AXIS_SAMPLES).contains(&self.samples) {
            return Err(Error::InvalidArgument(format!(
                "axis `{}` needs {MIN_AXIS_SAMPLES}..={MAX_AXIS_SAMPLES} samples, got {}",
                self.param, self.samples
            )));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::InvalidArgument(format!("axis `{}` has a non-finite bound", self.param)));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.samples - 1) as f64;
        (0..self.samples)
            .map(|i| {
                if i + 1 == self.samples {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / last
                }
            })
            .collect()
    }
}

/// Coupling constraint tying the last coupler to the first one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// `k_{N+1} = 1 - k_1`.
    Complement,
    /// `k_{N+1} = k_1`.
    Mirror,
}

impl Scenario {
    pub fn apply(&self, spec: &mut RingChainSpec) {
        let first = spec.couplings[0];
        let last = spec.couplings.len() - 1;
        spec.couplings[last] = match self {
            Scenario::Complement => 1.0 - first,
            Scenario::Mirror => first,
        };
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complement" => Ok(Scenario::Complement),
            "mirror" => Ok(Scenario::Mirror),
            other => Err(Error::InvalidArgument(format!("unknown scenario `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridAxis {
    pub name: String,
    pub values: Vec<f64>,
}

/// Row-major grid of a real metric; rows follow `axis1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepGrid {
    pub axis1: GridAxis,
    pub axis2: GridAxis,
    pub metric: String,
    pub values: Vec<Vec<f64>>,
    /// Template with the swept parameters at their pre-sweep values.
    pub fixed: RingChainSpec,
}

impl SweepGrid {
    pub fn rows(&self) -> usize {
        self.values.len()
    }

    pub fn cols(&self) -> usize {
        self.axis2.values.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[j]).collect()
    }

    /// Smallest value with its (row, column).
    pub fn min(&self) -> (f64, usize, usize) {
        self.extremum(|a, b| a < b)
    }

    pub fn max(&self) -> (f64, usize, usize) {
        self.extremum(|a, b| a > b)
    }

    fn extremum(&self, better: impl Fn(f64, f64) -> bool) -> (f64, usize, usize) {
        let mut best = (self.values[0][0], 0, 0);
        for (i, row) in self.values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if better(v, best.0) {
                    best = (v, i, j);
                }
            }
        }
        best
    }
}

fn uniform_loss(spec: &RingChainSpec) -> Option<f64> {
    let a = spec.losses[0];
    spec.losses.iter().all(|&x| x == a).then_some(a)
}

/// Closed-form steady state when one exists: at most two rings, and for the
/// classical two-ring chain a common loss.
pub fn closed_form_ports(spec: &RingChainSpec, regime: Regime) -> Option<PortProbabilities> {
    let k = &spec.couplings;
    match (regime, spec.num_rings()) {
        (Regime::Classical, 1) => Some(classical::closed_form_single(k[0], k[1], spec.losses[0])),
        (Regime::Classical, 2) => {
            uniform_loss(spec).map(|a| classical::closed_form_double(k[0], k[1], k[2], a))
        }
        (Regime::Quantum, 1) | (Regime::Quantum, 2) => {
            let a = if spec.num_rings() == 1 {
                quantum::steady_amplitudes_single(k[0], k[1], spec.round_trip(0))
            } else {
                quantum::steady_amplitudes_double(k[0], k[1], k[2], spec.round_trip(0), spec.round_trip(1))
            };
            Some(PortProbabilities { drop: a.p_drop(), thru: a.p_thru() })
        }
        _ => None,
    }
}

/// Steady state by iterating the transition matrix until the transient
/// weight is below `tol` (classical) or `tol²` (quantum amplitudes).
pub fn iterated_ports(spec: &RingChainSpec, regime: Regime, tol: f64) -> Result<PortProbabilities> {
    let graph = build_chain(spec)?;
    match regime {
        Regime::Classical => {
            let t = classical_transfer_matrix(&graph);
            let p = classical::steady_state(&t, &WalkState::localized(t.dim(), 0), tol)?;
            Ok(PortProbabilities { drop: p.values[t.drop_index()], thru: p.values[t.thru_index()] })
        }
        Regime::Quantum => {
            let t = quantum_transfer_matrix(&graph);
            let a = quantum::steady_by_evolution(&t, &WalkState::localized(t.dim(), 0), tol * tol)?;
            Ok(PortProbabilities { drop: a.p_drop(), thru: a.p_thru() })
        }
    }
}

/// Steady-state Drop and Thru probabilities, from closed forms when
/// available and iteration otherwise.
pub fn steady_ports(spec: &RingChainSpec, regime: Regime, tol: f64) -> Result<PortProbabilities> {
    spec.validate()?;
    match closed_form_ports(spec, regime) {
        Some(p) => Ok(p),
        None => iterated_ports(spec, regime, tol),
    }
}

pub fn evaluate_metric(spec: &RingChainSpec, metric: Metric, tol: f64) -> Result<f64> {
    Ok(match metric {
        Metric::ClassicalDrop => steady_ports(spec, Regime::Classical, tol)?.drop,
        Metric::ClassicalThru => steady_ports(spec, Regime::Classical, tol)?.thru,
        Metric::QuantumDrop => steady_ports(spec, Regime::Quantum, tol)?.drop,
        Metric::QuantumThru => steady_ports(spec, Regime::Quantum, tol)?.thru,
        Metric::DropDifference => {
            steady_ports(spec, Regime::Quantum, tol)?.drop - steady_ports(spec, Regime::Classical, tol)?.drop
        }
    })
}

fn point(
    template: &RingChainSpec,
    axis1: &Axis,
    v1: f64,
    axis2: &Axis,
    v2: f64,
    scenario: Option<Scenario>,
) -> Result<RingChainSpec> {
    let mut spec = axis2.param.apply(&axis1.param.apply(template, v1)?, v2)?;
    if let Some(s) = scenario {
        s.apply(&mut spec);
        spec.validate()?;
    }
    Ok(spec)
}

/// Steady-state metric over a 2D axis grid. Cells are evaluated in parallel;
/// the result does not depend on the thread count.
pub fn sweep2d(
    template: &RingChainSpec,
    axis1: &Axis,
    axis2: &Axis,
    metric: Metric,
    scenario: Option<Scenario>,
) -> Result<SweepGrid> {
    template.validate()?;
    axis1.validate()?;
    axis2.validate()?;
    let (xs, ys) = (axis1.values(), axis2.values());
    let values = xs
        .par_iter()
        .map(|&x| {
            ys.iter()
                .map(|&y| {
                    let spec = point(template, axis1, x, axis2, y, scenario)?;
                    let v = evaluate_metric(&spec, metric, DEFAULT_TOL)?;
                    if !v.is_finite() {
                        return Err(Error::InvalidArgument(format!(
                            "{metric} is not finite at {}={x}, {}={y}",
                            axis1.param, axis2.param
                        )));
                    }
                    Ok(v)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepGrid {
        axis1: GridAxis { name: axis1.param.to_string(), values: xs },
        axis2: GridAxis { name: axis2.param.to_string(), values: ys },
        metric: metric.name().to_string(),
        values,
        fixed: template.clone(),
    })
}

/// Mean of the lossy single-ring quantum Drop probability over `samples`
/// equally spaced phases in `[0, 2π)`.
pub fn phase_average(k1: f64, k2: f64, alpha: f64, samples: usize) -> Result<f64> {
    if samples < 2 {
        return Err(Error::InvalidArgument(format!("phase average needs at least 2 samples, got {samples}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} is outside (0, 1]")));
    }
    RingChainSpec::single(k1, k2, alpha, 0.0)?;
    let sum: f64 = (0..samples)
        .map(|j| {
            let theta = 2.0 * PI * j as f64 / samples as f64;
            quantum::steady_amplitudes_single(k1, k2, RoundTripFactor::new(alpha, theta)).p_drop()
        })
        .sum();
    Ok(sum / samples as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum HitOutcome {
    Reached { steps: usize },
    /// The steady-state Drop probability is below the goal.
    Unreachable { steady: f64 },
    /// Reachable in the long run but not within the step budget.
    NotWithin { n_max: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HittingResult {
    pub threshold: f64,
    pub outcome: HitOutcome,
    /// `steps · Δt` when the chain carries a geometry with a common radius.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

impl HittingResult {
    pub fn steps(&self) -> Option<usize> {
        match self.outcome {
            HitOutcome::Reached { steps } => Some(steps),
            _ => None,
        }
    }

    pub fn is_unreachable(&self) -> bool {
        matches!(self.outcome, HitOutcome::Unreachable { .. })
    }
}

/// Cumulative Drop probability after every step `0..=n_max`.
pub fn drop_series(spec: &RingChainSpec, regime: Regime, n_max: usize) -> Result<Vec<f64>> {
    let graph = build_chain(spec)?;
    let drop = graph.drop_index();
    let mut out = Vec::with_capacity(n_max + 1);
    match regime {
        Regime::Classical => {
            let t = classical_transfer_matrix(&graph);
            let mut cur = WalkState::<f64>::localized(t.dim(), 0).values;
            let mut next = vec![0.0; t.dim()];
            out.push(cur[drop]);
            for _ in 0..n_max {
                t.apply_into(&cur, &mut next);
                std::mem::swap(&mut cur, &mut next);
                out.push(cur[drop]);
            }
        }
        Regime::Quantum => {
            let t = quantum_transfer_matrix(&graph);
            let mut cur = WalkState::<C64>::localized(t.dim(), 0).values;
            let mut next = vec![C64::new(0.0, 0.0); t.dim()];
            out.push(cur[drop].norm_sqr());
            for _ in 0..n_max {
                t.apply_into(&cur, &mut next);
                std::mem::swap(&mut cur, &mut next);
                out.push(cur[drop].norm_sqr());
            }
        }
    }
    Ok(out)
}

/// Smallest `n <= n_max` with cumulative Drop probability at least `p_g`.
///
/// Classical absorption is monotone, so a steady state below the goal is
/// reported as unreachable before any iteration. Quantum absorption can
/// overshoot its steady state, so the quantum walk is always iterated first.
pub fn hitting_time(spec: &RingChainSpec, regime: Regime, p_g: f64, n_max: usize) -> Result<HittingResult> {
    if !(p_g > 0.0 && p_g < 1.0) {
        return Err(Error::InvalidArgument(format!("goal probability {p_g} is outside (0, 1)")));
    }
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    spec.validate()?;
    let result = |outcome: HitOutcome| {
        let seconds = match outcome {
            HitOutcome::Reached { steps } => spec.step_duration().map(|dt| steps as f64 * dt),
            _ => None,
        };
        HittingResult { threshold: p_g, outcome, seconds }
    };
    let steady = steady_ports(spec, regime, DEFAULT_TOL)?.drop;
    if regime == Regime::Classical && steady < p_g {
        return Ok(result(HitOutcome::Unreachable { steady }));
    }
    let series = drop_series(spec, regime, n_max)?;
    if let Some(n) = series.iter().position(|&p| p >= p_g) {
        return Ok(result(HitOutcome::Reached { steps: n }));
    }
    if steady < p_g {
        Ok(result(HitOutcome::Unreachable { steady }))
    } else {
        Ok(result(HitOutcome::NotWithin { n_max }))
    }
}

/// Hitting time for every sample of `axis`, in axis order.
pub fn hitting_table(
    template: &RingChainSpec,
    axis: &Axis,
    regime: Regime,
    p_g: f64,
    n_max: usize,
) -> Result<Vec<(f64, HittingResult)>> {
    axis.validate()?;
    axis.values()
        .into_par_iter()
        .map(|v| Ok((v, hitting_time(&axis.param.apply(template, v)?, regime, p_g, n_max)?)))
        .collect()
}

/// Cumulative Drop probability over steps `0..=n_max` (rows) and the samples
/// of `axis` (columns).
pub fn time_grid(template: &RingChainSpec, axis: &Axis, n_max: usize, regime: Regime) -> Result<SweepGrid> {
    axis.validate()?;
    match &axis.param {
        Param::Phase => {}
        Param::Couplings(indices) if indices.len() >= 2 => {}
        other => {
            return Err(Error::InvalidArgument(format!(
                "time grids run over theta or tied couplings, not `{other}`"
            )))
        }
    }
    if n_max > MAX_TIME_STEPS {
        return Err(Error::InvalidArgument(format!("n_max {n_max} exceeds {MAX_TIME_STEPS}")));
    }
    template.validate()?;
    let xs = axis.values();
    let columns = xs
        .par_iter()
        .map(|&x| drop_series(&axis.param.apply(template, x)?, regime, n_max))
        .collect::<Result<Vec<_>>>()?;
    let values = (0..=n_max).map(|n| columns.iter().map(|c| c[n]).collect()).collect();
    let label = match regime {
        Regime::Classical => "pcd",
        Regime::Quantum => "pqd",
    };
    Ok(SweepGrid {
        axis1: GridAxis { name: "n".into(), values: (0..=n_max).map(|n| n as f64).collect() },
        axis2: GridAxis { name: axis.param.to_string(), values: xs },
        metric: label.into(),
        values,
        fixed: template.clone(),
    })
}

/// Spread `max - min` of `series[after + 1..]` relative to `steady`.
pub fn relative_fluctuation(series: &[f64], after: usize, steady: f64) -> f64 {
    let tail = &series[(after + 1).min(series.len())..];
    let max = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = tail.iter().copied().fold(f64::INFINITY, f64::min);
    (max - min) / steady
}
