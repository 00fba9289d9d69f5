//! Ring-chain description, the walk graph and its transfer matrices.
//!
//! A chain of `N` series-coupled rings is modelled by `2N + 3` nodes in a
//! fixed order:
//!
//! ```text
//! index   0    1 .. 2N            2N+1   2N+2
//! node    P0   half-ring nodes    PD     PT
//! ```
//!
//! Ring `j` (zero-based) owns nodes `2j + 1` (the half travelling away from
//! the input bus) and `2j + 2` (the half travelling back). Coupler `c`
//! (zero-based, `0..=N`) joins the waveguide above it (the input bus for
//! `c = 0`, ring `c - 1` otherwise) with the waveguide below it (ring `c`, or
//! the drop bus for `c = N`). One walk step is one half-ring traversal.
//!
//! Matrices act on column vectors: `T[to, from]` is the weight of the hop
//! `from -> to`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry;
use crate::quantum::RoundTripFactor;

const GEOMETRY_MATCH_TOL: f64 = 1e-12;

/// Physical layout used to derive phases and losses of every ring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainGeometry {
    /// Ring radii in metres, one per ring.
    pub radii: Vec<f64>,
    pub n_eff: f64,
    /// Vacuum wavelength in metres.
    pub wavelength: f64,
    /// Straight coupler section added to each ring (racetrack), metres.
    #[serde(default)]
    pub coupler_length: f64,
    /// Material absorption, 1/m.
    #[serde(default)]
    pub absorption: f64,
    /// Bending loss, 1/m.
    #[serde(default)]
    pub bending_loss: f64,
}

impl ChainGeometry {
    pub fn phases(&self) -> Result<Vec<f64>> {
        self.radii
            .iter()
            .map(|&r| geometry::phase_from_geometry(r, self.n_eff, self.wavelength))
            .collect()
    }

    pub fn losses(&self) -> Result<Vec<f64>> {
        self.radii
            .iter()
            .map(|&r| {
                geometry::loss_from_geometry(
                    self.absorption,
                    self.bending_loss,
                    2.0 * std::f64::consts::PI * r,
                    self.coupler_length,
                )
            })
            .collect()
    }

    /// Walk step duration, defined only when every ring has the same radius.
    pub fn step_duration(&self) -> Option<f64> {
        let first = *self.radii.first()?;
        if self.radii.iter().all(|&r| r == first) {
            geometry::half_ring_time(first, self.n_eff).ok()
        } else {
            None
        }
    }
}

/// Full parametric description of an `N`-ring series-coupled device.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RingChainSpec {
    /// Hopping probabilities `k_1 .. k_{N+1}`.
    pub couplings: Vec<f64>,
    /// Round-trip transmission `α_j` per ring.
    pub losses: Vec<f64>,
    /// Round-trip phase `θ_j` per ring, unreduced.
    pub phases: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<ChainGeometry>,
}

impl RingChainSpec {
    pub fn new(couplings: Vec<f64>, losses: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        let spec = Self { couplings, losses, phases, geometry: None };
        spec.validate()?;
        Ok(spec)
    }

    /// Every ring shares the same loss and phase.
    pub fn uniform(couplings: Vec<f64>, loss: f64, phase: f64) -> Result<Self> {
        let n = couplings.len().saturating_sub(1);
        Self::new(couplings, vec![loss; n], vec![phase; n])
    }

    pub fn single(k1: f64, k2: f64, loss: f64, phase: f64) -> Result<Self> {
        Self::uniform(vec![k1, k2], loss, phase)
    }

    pub fn from_geometry(couplings: Vec<f64>, geometry: ChainGeometry) -> Result<Self> {
        let spec = Self {
            couplings,
            losses: geometry.losses()?,
            phases: geometry.phases()?,
            geometry: Some(geometry),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Attach geometry to an explicit spec; the derived phases and losses must
    /// agree with the explicit ones.
    pub fn with_geometry(mut self, geometry: ChainGeometry) -> Result<Self> {
        self.geometry = Some(geometry);
        self.validate()?;
        Ok(self)
    }

    pub fn num_rings(&self) -> usize {
        self.losses.len()
    }

    pub fn coupling(&self, i: usize) -> f64 {
        self.couplings[i]
    }

    pub fn stay(&self, i: usize) -> f64 {
        1.0 - self.couplings[i]
    }

    pub fn round_trip(&self, ring: usize) -> RoundTripFactor {
        RoundTripFactor { loss: self.losses[ring], phase: self.phases[ring] }
    }

    pub fn is_lossless(&self) -> bool {
        self.losses.iter().all(|&a| a == 1.0)
    }

    pub fn step_duration(&self) -> Option<f64> {
        self.geometry.as_ref().and_then(ChainGeometry::step_duration)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.losses.len();
        if n == 0 {
            return Err(Error::InvalidChain("a chain needs at least one ring".into()));
        }
        if self.phases.len() != n {
            return Err(Error::InvalidChain(format!(
                "{n} rings but {} phases",
                self.phases.len()
            )));
        }
        if self.couplings.len() != n + 1 {
            return Err(Error::InvalidChain(format!(
                "{n} rings need {} couplings, got {}",
                n + 1,
                self.couplings.len()
            )));
        }
        for (i, &k) in self.couplings.iter().enumerate() {
            if !(0.0..=1.0).contains(&k) {
                return Err(Error::InvalidChain(format!("k{} = {k} is outside [0, 1]", i + 1)));
            }
        }
        for (j, &a) in self.losses.iter().enumerate() {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::InvalidChain(format!(
                    "loss of ring {} = {a} is outside (0, 1]",
                    j + 1
                )));
            }
        }
        for (j, &theta) in self.phases.iter().enumerate() {
            if !theta.is_finite() {
                return Err(Error::InvalidChain(format!("phase of ring {} is not finite", j + 1)));
            }
        }
        if let Some(geometry) = &self.geometry {
            if geometry.radii.len() != n {
                return Err(Error::InvalidChain(format!(
                    "{n} rings but {} radii",
                    geometry.radii.len()
                )));
            }
            let phases = geometry.phases().map_err(|e| Error::InvalidChain(e.to_string()))?;
            let losses = geometry.losses().map_err(|e| Error::InvalidChain(e.to_string()))?;
            let close = |a: f64, b: f64| (a - b).abs() <= GEOMETRY_MATCH_TOL * a.abs().max(1.0);
            for j in 0..n {
                if !close(phases[j], self.phases[j]) {
                    return Err(Error::InvalidChain(format!(
                        "ring {}: explicit phase {} disagrees with geometry ({})",
                        j + 1,
                        self.phases[j],
                        phases[j]
                    )));
                }
                if !close(losses[j], self.losses[j]) {
                    return Err(Error::InvalidChain(format!(
                        "ring {}: explicit loss {} disagrees with geometry ({})",
                        j + 1,
                        self.losses[j],
                        losses[j]
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Half {
    /// Travelling away from the input bus.
    Outbound,
    /// Travelling back towards the input bus.
    Return,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Input,
    HalfRing { ring: usize, half: Half },
    Drop,
    Thru,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hop {
    /// Stay on the same waveguide (`t_c`).
    Straight,
    /// Cross to the other waveguide (`k_c`).
    Cross,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    /// Zero-based coupler index, selects `k_{c+1}`.
    pub coupler: usize,
    pub hop: Hop,
    /// Ring whose half-ring was traversed to reach the coupler, if any.
    pub ring: Option<usize>,
    /// Amplitude sign flip that keeps each coupler unitary.
    pub negative: bool,
}

/// Walk graph of a ring chain.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeGraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    couplings: Vec<f64>,
    losses: Vec<f64>,
    phases: Vec<f64>,
}

impl NodeGraph {
    pub fn num_rings(&self) -> usize {
        self.losses.len()
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn input_index(&self) -> usize {
        0
    }

    pub fn drop_index(&self) -> usize {
        2 * self.num_rings() + 1
    }

    pub fn thru_index(&self) -> usize {
        2 * self.num_rings() + 2
    }

    pub fn index_of(&self, node: Node) -> usize {
        match node {
            Node::Input => 0,
            Node::HalfRing { ring, half: Half::Outbound } => 2 * ring + 1,
            Node::HalfRing { ring, half: Half::Return } => 2 * ring + 2,
            Node::Drop => self.drop_index(),
            Node::Thru => self.thru_index(),
        }
    }

    pub fn is_absorbing(&self, index: usize) -> bool {
        index == self.drop_index() || index == self.thru_index()
    }

    /// `P0`, `P1`, ..., `PD`, `PT`.
    pub fn label(&self, index: usize) -> String {
        node_label(index, self.num_rings())
    }

    /// Classical weight of an edge: `k` or `t`, times `α^{1/2}` after a half ring.
    pub fn classical_weight(&self, edge: &Edge) -> f64 {
        let p = match edge.hop {
            Hop::Cross => self.couplings[edge.coupler],
            Hop::Straight => 1.0 - self.couplings[edge.coupler],
        };
        match edge.ring {
            Some(j) => p * self.losses[j].sqrt(),
            None => p,
        }
    }

    /// Quantum amplitude of an edge: `±√k` or `√t`, times `γ^{1/2}` after a half ring.
    pub fn quantum_weight(&self, edge: &Edge) -> C64 {
        let p = match edge.hop {
            Hop::Cross => self.couplings[edge.coupler],
            Hop::Straight => 1.0 - self.couplings[edge.coupler],
        };
        let sign = if edge.negative { -1.0 } else { 1.0 };
        let base = C64::new(sign * p.sqrt(), 0.0);
        match edge.ring {
            Some(j) => {
                base * RoundTripFactor { loss: self.losses[j], phase: self.phases[j] }.half_step()
            }
            None => base,
        }
    }
}

pub(crate) fn node_label(index: usize, num_rings: usize) -> String {
    if index == 2 * num_rings + 1 {
        "PD".to_string()
    } else if index == 2 * num_rings + 2 {
        "PT".to_string()
    } else {
        format!("P{index}")
    }
}

/// Build the walk graph for a chain.
pub fn build_chain(spec: &RingChainSpec) -> Result<NodeGraph> {
    spec.validate()?;
    let n = spec.num_rings();
    let drop = 2 * n + 1;
    let thru = 2 * n + 2;

    let mut nodes = Vec::with_capacity(2 * n + 3);
    nodes.push(Node::Input);
    for ring in 0..n {
        nodes.push(Node::HalfRing { ring, half: Half::Outbound });
        nodes.push(Node::HalfRing { ring, half: Half::Return });
    }
    nodes.push(Node::Drop);
    nodes.push(Node::Thru);

    let mut edges = Vec::with_capacity(4 * n + 2);
    for c in 0..=n {
        // Ports of coupler c: (node index, ring the walker just traversed).
        let upper_in = if c == 0 { (0, None) } else { (2 * c - 1, Some(c - 1)) };
        let upper_out = if c == 0 { thru } else { 2 * c };
        let lower_out = if c == n { drop } else { 2 * c + 1 };
        let lower_in = if c == n { None } else { Some((2 * c + 2, Some(c))) };

        let (from, ring) = upper_in;
        edges.push(Edge { from, to: upper_out, coupler: c, hop: Hop::Straight, ring, negative: false });
        edges.push(Edge { from, to: lower_out, coupler: c, hop: Hop::Cross, ring, negative: c == 0 });
        if let Some((from, ring)) = lower_in {
            edges.push(Edge { from, to: lower_out, coupler: c, hop: Hop::Straight, ring, negative: false });
            edges.push(Edge { from, to: upper_out, coupler: c, hop: Hop::Cross, ring, negative: c > 0 });
        }
    }

    Ok(NodeGraph {
        nodes,
        edges,
        couplings: spec.couplings.clone(),
        losses: spec.losses.clone(),
        phases: spec.phases.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Classical,
    Quantum,
}

/// Scalar types a transfer matrix can hold.
pub trait Entry:
    Copy + PartialEq + fmt::Debug + Add<Output = Self> + AddAssign + Mul<Output = Self> + Send + Sync
{
    const KIND: MatrixKind;
    fn zero() -> Self;
    fn one() -> Self;
    fn norm_sqr(self) -> f64;
}

impl Entry for f64 {
    const KIND: MatrixKind = MatrixKind::Classical;
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
}

impl Entry for C64 {
    const KIND: MatrixKind = MatrixKind::Quantum;
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn norm_sqr(self) -> f64 {
        C64::norm_sqr(&self)
    }
}

/// Dense square transfer matrix over the nodes of a [`NodeGraph`].
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix<T> {
    dim: usize,
    entries: Vec<T>,
    drop: usize,
    thru: usize,
    num_rings: usize,
}

pub type ClassicalMatrix = TransitionMatrix<f64>;
pub type QuantumMatrix = TransitionMatrix<C64>;

impl<T: Entry> TransitionMatrix<T> {
    fn from_graph(graph: &NodeGraph, weight: impl Fn(&Edge) -> T) -> Self {
        let dim = graph.dim();
        let mut entries = vec![T::zero(); dim * dim];
        for edge in graph.edges() {
            entries[edge.to * dim + edge.from] += weight(edge);
        }
        for a in [graph.drop_index(), graph.thru_index()] {
            entries[a * dim + a] = T::one();
        }
        Self {
            dim,
            entries,
            drop: graph.drop_index(),
            thru: graph.thru_index(),
            num_rings: graph.num_rings(),
        }
    }

    pub fn kind(&self) -> MatrixKind {
        T::KIND
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_rings(&self) -> usize {
        self.num_rings
    }

    pub fn drop_index(&self) -> usize {
        self.drop
    }

    pub fn thru_index(&self) -> usize {
        self.thru
    }

    pub fn is_absorbing(&self, index: usize) -> bool {
        index == self.drop || index == self.thru
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.entries[row * self.dim + col]
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.entries[row * self.dim..(row + 1) * self.dim]
    }

    pub fn column(&self, col: usize) -> Vec<T> {
        (0..self.dim).map(|r| self.get(r, col)).collect()
    }

    pub fn label(&self, index: usize) -> String {
        node_label(index, self.num_rings)
    }

    /// `out = T v`. Lengths must equal [`dim`](Self::dim).
    pub fn apply_into(&self, v: &[T], out: &mut [T]) {
        debug_assert_eq!(v.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        for (row, o) in self.entries.chunks_exact(self.dim).zip(out.iter_mut()) {
            let mut acc = T::zero();
            for (&m, &x) in row.iter().zip(v) {
                acc += m * x;
            }
            *o = acc;
        }
    }

    pub fn apply(&self, v: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim];
        self.apply_into(v, &mut out);
        out
    }

    /// Positions of non-zero entries, row-major.
    pub fn support(&self) -> Vec<bool> {
        self.entries.iter().map(|&e| e != T::zero()).collect()
    }
}

impl ClassicalMatrix {
    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.dim).map(|c| self.column(c).iter().sum()).collect()
    }
}

impl QuantumMatrix {
    /// Gram matrix `G[i][j] = <col_i, col_j>` over the given source columns.
    pub fn gram(&self, sources: &[usize]) -> Vec<Vec<C64>> {
        sources
            .iter()
            .map(|&i| {
                sources
                    .iter()
                    .map(|&j| (0..self.dim).map(|r| self.get(r, i).conj() * self.get(r, j)).sum())
                    .collect()
            })
            .collect()
    }
}

pub fn classical_transfer_matrix(graph: &NodeGraph) -> ClassicalMatrix {
    TransitionMatrix::from_graph(graph, |e| graph.classical_weight(e))
}

pub fn quantum_transfer_matrix(graph: &NodeGraph) -> QuantumMatrix {
    TransitionMatrix::from_graph(graph, |e| graph.quantum_weight(e))
}
