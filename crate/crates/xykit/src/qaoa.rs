//! Weighted MaxCut QAOA: circuit construction, routing to a line of qubits
//! with the {CZ} or {CZ, XY(π)} gate set, exact gate counting, and landscape
//! evaluation over (γ, β_mix).
//!
//! Cost convention: each edge (u, v, w) contributes the phase gadget
//! `CNOT(u,v) · RZ(γ w) on v · CNOT(u,v)`, i.e. a ZZ rotation
//! `diag(e^{-iγw/2}, e^{+iγw/2}, e^{+iγw/2}, e^{-iγw/2})`; the mixer applies
//! `RX(2 β_mix)` per qubit. Landscapes are 2π-periodic in γ for integer
//! weights under this convention.
//!
//! Routing: complete interaction graphs compile through the canonical
//! odd-even transposition swap network (every brick carries a cost gadget
//! fused with its swap; the final gadget needs no swap). Sparse graphs go
//! through a small exact search that minimizes the two-qubit gate count for
//! the active gate set. Fused gadget+swap blocks cost 3 CZ, or 1 CZ + 1
//! XY(π) when the XY gate is available.

use crate::error::XyError;
use crate::linalg::CMatrix;
use crate::qcore::{distance_global_phase, Circuit, Gate, QuditSpace, Unitary};
use crate::rng::Streams;
use num_complex::Complex64 as C64;
use rand::Rng;
use rayon::prelude::*;
use std::collections::{BinaryHeap, HashMap};
use std::f64::consts::{FRAC_PI_2, PI};

/// Undirected weighted graph with normalized edges (u < v, no self-loops).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WeightedGraph {
    n_vertices: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    pub fn new(n_vertices: usize, edges: &[(usize, usize, f64)]) -> Result<Self, XyError> {
        let mut normalized = Vec::with_capacity(edges.len());
        for &(u, v, w) in edges {
            if u == v {
                return Err(XyError::InvalidParameter(format!("self-loop at vertex {u}")));
            }
            if u >= n_vertices || v >= n_vertices {
                return Err(XyError::SiteOutOfRange { site: u.max(v), sites: n_vertices });
            }
            if !w.is_finite() {
                return Err(XyError::InvalidParameter("non-finite edge weight".into()));
            }
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            if normalized.iter().any(|&(x, y, _)| (x, y) == (a, b)) {
                return Err(XyError::InvalidParameter(format!("duplicate edge ({a},{b})")));
            }
            normalized.push((a, b, w));
        }
        Ok(Self { n_vertices, edges: normalized })
    }

    /// Four vertices in a ring, unit weights.
    pub fn ring4() -> Self {
        Self::new(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)]).expect("valid")
    }

    /// Complete graph on four vertices, unit weights.
    pub fn complete4() -> Self {
        Self::new(
            4,
            &[
                (0, 1, 1.0),
                (0, 2, 1.0),
                (0, 3, 1.0),
                (1, 2, 1.0),
                (1, 3, 1.0),
                (2, 3, 1.0),
            ],
        )
        .expect("valid")
    }

    /// Replace the weights with uniform draws from [0, 1) using the seeded
    /// stream (reproducible stand-in for "chosen at random").
    pub fn with_random_weights(mut self, streams: &Streams) -> Self {
        let mut rng = streams.stream(0);
        for e in &mut self.edges {
            e.2 = rng.gen_range(0.0..1.0);
        }
        self
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }

    pub fn is_complete(&self) -> bool {
        self.edges.len() == self.n_vertices * (self.n_vertices - 1) / 2
    }

    /// Cut value of a bitstring (bit i = partition of vertex i).
    pub fn cut_value(&self, bits: usize) -> f64 {
        self.edges
            .iter()
            .map(|&(u, v, w)| {
                let bu = (bits >> (self.n_vertices - 1 - u)) & 1;
                let bv = (bits >> (self.n_vertices - 1 - v)) & 1;
                if bu != bv {
                    w
                } else {
                    0.0
                }
            })
            .sum()
    }
}

/// Physical qubit connectivity (a line by default).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DeviceTopology {
    n_qubits: usize,
}

impl DeviceTopology {
    pub fn line(n_qubits: usize) -> Result<Self, XyError> {
        if n_qubits < 2 {
            return Err(XyError::InvalidParameter("need at least two qubits".into()));
        }
        Ok(Self { n_qubits })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }
}

/// QAOA angles; the mixer angle is named `beta_mix` to keep clear of the XY
/// interaction phase β.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QaoaAngles {
    pub gamma: f64,
    pub beta_mix: f64,
}

/// Gate sets the router can target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateSet {
    CzOnly,
    CzAndXy,
}

/// Logical p = 1 QAOA circuit over CNOTs (Hadamard layer, per-edge phase
/// gadgets, RX mixer layer).
pub fn build_qaoa_circuit(
    graph: &WeightedGraph,
    angles: QaoaAngles,
    p: usize,
) -> Result<Circuit, XyError> {
    if p != 1 {
        return Err(XyError::InvalidParameter("only p = 1 is supported".into()));
    }
    let n = graph.n_vertices();
    let space = QuditSpace::qubits(n);
    let mut c = Circuit::new(space);
    for q in 0..n {
        c.push(Gate::H, &[q]);
    }
    for &(u, v, w) in graph.edges() {
        c.push(Gate::Cnot, &[u, v]);
        c.push(Gate::Rz(angles.gamma * w), &[v]);
        c.push(Gate::Cnot, &[u, v]);
    }
    for q in 0..n {
        c.push(Gate::Rx(2.0 * angles.beta_mix), &[q]);
    }
    Ok(c)
}

// --- routing -------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
enum Block {
    /// Cost gadget ZZ(φ) between adjacent physical qubits (p, p+1).
    Plain { phys: usize, phi: f64 },
    /// Gadget combined with a SWAP of the pair.
    FusedSwap { phys: usize, phi: f64 },
    /// Routing SWAP with no gadget.
    PureSwap { phys: usize },
}

/// Compiled circuit over native gates with the final logical→physical map.
#[derive(Debug, Clone)]
pub struct CompiledCircuit {
    pub circuit: Circuit,
    /// `final_permutation[logical] = physical position after the circuit`.
    pub final_permutation: Vec<usize>,
    /// Two-qubit gate totals per kind ("CZ", "XY").
    pub counts: HashMap<String, usize>,
    pub gateset: GateSet,
}

fn block_gate_cost(block: &Block, gateset: GateSet) -> (usize, usize) {
    // (cz, xy)
    match (block, gateset) {
        (Block::Plain { .. }, _) => (2, 0),
        (Block::FusedSwap { .. }, GateSet::CzOnly) => (3, 0),
        (Block::FusedSwap { .. }, GateSet::CzAndXy) => (1, 1),
        (Block::PureSwap { .. }, GateSet::CzOnly) => (3, 0),
        (Block::PureSwap { .. }, GateSet::CzAndXy) => (1, 1),
    }
}

/// Plan for a complete interaction graph: the canonical odd-even
/// transposition network. Every brick meets a fresh pair, carries its cost
/// gadget, and swaps; the final gadget stays in place.
fn plan_swap_network(
    n: usize,
    mut pending: HashMap<(usize, usize), f64>,
) -> (Vec<Block>, Vec<usize>) {
    let mut perm: Vec<usize> = (0..n).collect(); // perm[phys] = logical
    let mut blocks = Vec::new();
    let mut layer = 0usize;
    while !pending.is_empty() && layer < 4 * n {
        let start = layer % 2;
        let mut phys = start;
        while phys + 1 < n {
            let (la, lb) = (perm[phys], perm[phys + 1]);
            let key = (la.min(lb), la.max(lb));
            if let Some(phi) = pending.remove(&key) {
                if pending.is_empty() {
                    blocks.push(Block::Plain { phys, phi });
                } else {
                    blocks.push(Block::FusedSwap { phys, phi });
                    perm.swap(phys, phys + 1);
                }
            }
            phys += 2;
        }
        layer += 1;
    }
    debug_assert!(pending.is_empty(), "swap network must cover a complete graph");
    (blocks, perm)
}

/// Exact minimal-gate-count plan for sparse graphs by uniform-cost search
/// over (permutation, remaining-edge-set) states.
fn plan_search(
    n: usize,
    pending: &HashMap<(usize, usize), f64>,
    gateset: GateSet,
) -> Result<(Vec<Block>, Vec<usize>), XyError> {
    if n > 6 {
        return Err(XyError::Unroutable("search router handles up to 6 qubits".into()));
    }
    let edge_list: Vec<(usize, usize)> = {
        let mut v: Vec<_> = pending.keys().cloned().collect();
        v.sort();
        v
    };
    let edge_idx: HashMap<(usize, usize), usize> =
        edge_list.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let full_mask: u32 = (1u32 << edge_list.len()) - 1;

    type StateKey = (Vec<usize>, u32);
    let start: StateKey = ((0..n).collect(), 0);
    // cost = gates * 1024 + swaps (prefer fewer swap units among equal-gate plans)
    let mut best: HashMap<StateKey, u64> = HashMap::new();
    let mut parent: HashMap<StateKey, (StateKey, Block)> = HashMap::new();
    let mut heap: BinaryHeap<std::cmp::Reverse<(u64, u64, StateKey)>> = BinaryHeap::new();
    let mut counter = 0u64;
    best.insert(start.clone(), 0);
    heap.push(std::cmp::Reverse((0, counter, start.clone())));

    let mut goal: Option<StateKey> = None;
    while let Some(std::cmp::Reverse((cost, _, state))) = heap.pop() {
        if best.get(&state).map_or(true, |&c| c < cost) {
            continue;
        }
        if state.1 == full_mask {
            goal = Some(state);
            break;
        }
        let (perm, done) = &state;
        for phys in 0..n - 1 {
            let (la, lb) = (perm[phys], perm[phys + 1]);
            let key = (la.min(lb), la.max(lb));
            let edge = edge_idx.get(&key).copied();
            let mut actions: Vec<Block> = Vec::new();
            if let Some(e) = edge {
                if done & (1 << e) == 0 {
                    let phi = pending[&key];
                    actions.push(Block::Plain { phys, phi });
                    actions.push(Block::FusedSwap { phys, phi });
                }
            }
            actions.push(Block::PureSwap { phys });
            for action in actions {
                let (cz, xy) = block_gate_cost(&action, gateset);
                let swaps = matches!(action, Block::FusedSwap { .. } | Block::PureSwap { .. });
                let step_cost = (cz + xy) as u64 * 1024 + swaps as u64;
                let mut nperm = perm.clone();
                let mut ndone = *done;
                match action {
                    Block::Plain { .. } => {
                        ndone |= 1 << edge.unwrap();
                    }
                    Block::FusedSwap { .. } => {
                        ndone |= 1 << edge.unwrap();
                        nperm.swap(phys, phys + 1);
                    }
                    Block::PureSwap { .. } => {
                        nperm.swap(phys, phys + 1);
                    }
                }
                let nstate: StateKey = (nperm, ndone);
                let ncost = cost + step_cost;
                if best.get(&nstate).map_or(true, |&c| ncost < c) {
                    best.insert(nstate.clone(), ncost);
                    parent.insert(nstate.clone(), (state.clone(), action));
                    counter += 1;
                    heap.push(std::cmp::Reverse((ncost, counter, nstate)));
                }
            }
        }
    }

    let goal = goal.ok_or_else(|| XyError::Unroutable("no routing plan found".into()))?;
    let final_perm = goal.0.clone();
    let mut blocks = Vec::new();
    let mut cur = goal;
    while let Some((prev, block)) = parent.get(&cur) {
        blocks.push(*block);
        cur = prev.clone();
    }
    blocks.reverse();
    Ok((blocks, final_perm))
}

/// Emit the native circuit for one block. Application order; `a` is the
/// lower physical index of the pair.
fn synthesize_block(c: &mut Circuit, block: &Block, gateset: GateSet) {
    let cnot = |c: &mut Circuit, ctl: usize, tgt: usize| {
        c.push(Gate::H, &[tgt]);
        c.push(Gate::Cz, &[ctl, tgt]);
        c.push(Gate::H, &[tgt]);
    };
    match (*block, gateset) {
        (Block::Plain { phys, phi }, _) => {
            let (a, b) = (phys, phys + 1);
            cnot(c, a, b);
            c.push(Gate::Rz(phi), &[b]);
            cnot(c, a, b);
        }
        (Block::FusedSwap { phys, phi }, GateSet::CzOnly) => {
            // SWAP · ZZ(φ) = CNOT(a,b) · CNOT(b,a) · RZ_b(φ) · CNOT(a,b)
            // as matrices; circuit order below
            let (a, b) = (phys, phys + 1);
            cnot(c, a, b);
            c.push(Gate::Rz(phi), &[b]);
            cnot(c, b, a);
            cnot(c, a, b);
        }
        (Block::FusedSwap { phys, phi }, GateSet::CzAndXy) => {
            // SWAP·ZZ(φ) = e^{iπ} (rz(3π) ⊗ rz(11π/4) ry(π/2) rz(−π/2)) ·
            //   CZ · (I ⊗ ry(π−φ)) · iSWAP · (ry(−π/2) rz(π/4) ⊗ rz(3π/2))
            let (a, b) = (phys, phys + 1);
            c.push(Gate::Rz(PI / 4.0), &[a]);
            c.push(Gate::Ry(-FRAC_PI_2), &[a]);
            c.push(Gate::Rz(1.5 * PI), &[b]);
            c.push(Gate::Iswap, &[a, b]);
            c.push(Gate::Ry(PI - phi), &[b]);
            c.push(Gate::Cz, &[a, b]);
            c.push(Gate::Rz(3.0 * PI), &[a]);
            c.push(Gate::Rz(-FRAC_PI_2), &[b]);
            c.push(Gate::Ry(FRAC_PI_2), &[b]);
            c.push(Gate::Rz(2.75 * PI), &[b]);
        }
        (Block::PureSwap { phys }, GateSet::CzOnly) => {
            let (a, b) = (phys, phys + 1);
            cnot(c, a, b);
            cnot(c, b, a);
            cnot(c, a, b);
        }
        (Block::PureSwap { phys }, GateSet::CzAndXy) => {
            // SWAP = iSWAP · (S† ⊗ S†) · CZ up to a global phase
            let (a, b) = (phys, phys + 1);
            c.push(Gate::Cz, &[a, b]);
            c.push(Gate::Rz(-FRAC_PI_2), &[a]);
            c.push(Gate::Rz(-FRAC_PI_2), &[b]);
            c.push(Gate::Iswap, &[a, b]);
        }
    }
}

/// Route a logical p = 1 QAOA circuit onto a line topology.
///
/// The circuit must have the `build_qaoa_circuit` shape (Hadamard layer,
/// CNOT-RZ-CNOT gadgets, RX mixer); anything else is reported unroutable.
pub fn route(
    circuit: &Circuit,
    topology: &DeviceTopology,
    gateset: GateSet,
) -> Result<CompiledCircuit, XyError> {
    let parsed = parse_qaoa_circuit(circuit)?;
    if parsed.n != topology.n_qubits() {
        return Err(XyError::Unroutable("qubit count does not match topology".into()));
    }
    route_parsed(&parsed, gateset)
}

struct ParsedQaoa {
    n: usize,
    gadgets: Vec<(usize, usize, f64)>, // (u, v, phi)
    mixer: f64,                        // rx angle
}

fn parse_qaoa_circuit(circuit: &Circuit) -> Result<ParsedQaoa, XyError> {
    let n = circuit.space().sites();
    let ops = circuit.ops();
    let bad = || XyError::Unroutable("circuit does not have the p = 1 QAOA shape".into());
    if ops.len() < 2 * n {
        return Err(bad());
    }
    for (q, op) in ops.iter().take(n).enumerate() {
        if op.gate != Gate::H || op.sites != vec![q] {
            return Err(bad());
        }
    }
    let mut gadgets = Vec::new();
    let mut i = n;
    while i + 2 < ops.len() && matches!(ops[i].gate, Gate::Cnot) {
        let (c1, rzop, c2) = (&ops[i], &ops[i + 1], &ops[i + 2]);
        let phi = match rzop.gate {
            Gate::Rz(p) => p,
            _ => return Err(bad()),
        };
        if c2.gate != Gate::Cnot || c1.sites != c2.sites || rzop.sites[0] != c1.sites[1] {
            return Err(bad());
        }
        gadgets.push((c1.sites[0], c1.sites[1], phi));
        i += 3;
    }
    let mixer_ops = &ops[i..];
    if mixer_ops.len() != n {
        return Err(bad());
    }
    let mut mixer = None;
    for (q, op) in mixer_ops.iter().enumerate() {
        match op.gate {
            Gate::Rx(x) if op.sites == vec![q] => {
                if *mixer.get_or_insert(x) != x {
                    return Err(bad());
                }
            }
            _ => return Err(bad()),
        }
    }
    Ok(ParsedQaoa { n, gadgets, mixer: mixer.unwrap_or(0.0) })
}

fn route_parsed(parsed: &ParsedQaoa, gateset: GateSet) -> Result<CompiledCircuit, XyError> {
    let n = parsed.n;
    let mut pending: HashMap<(usize, usize), f64> = HashMap::new();
    for &(u, v, phi) in &parsed.gadgets {
        pending.insert((u.min(v), u.max(v)), phi);
    }
    let complete = pending.len() == n * (n - 1) / 2;
    let (blocks, perm) = if complete {
        plan_swap_network(n, pending)
    } else {
        plan_search(n, &pending, gateset)?
    };

    let space = QuditSpace::qubits(n);
    let mut c = Circuit::new(space);
    for q in 0..n {
        c.push(Gate::H, &[q]);
    }
    for b in &blocks {
        synthesize_block(&mut c, b, gateset);
    }
    // mixer at the final physical position of each logical qubit
    for phys in 0..n {
        c.push(Gate::Rx(parsed.mixer), &[phys]);
    }

    let mut counts = HashMap::new();
    let (mut cz, mut xy) = (0usize, 0usize);
    for op in c.ops() {
        match op.gate {
            Gate::Cz => cz += 1,
            Gate::Iswap => xy += 1,
            _ => {}
        }
    }
    counts.insert("CZ".to_string(), cz);
    counts.insert("XY".to_string(), xy);

    // perm[phys] = logical; report logical → physical
    let mut final_permutation = vec![0usize; n];
    for (phys, &logical) in perm.iter().enumerate() {
        final_permutation[logical] = phys;
    }
    Ok(CompiledCircuit { circuit: c, final_permutation, counts, gateset })
}

/// Permutation unitary placing logical qubit `l`'s bit at physical position
/// `π(l)`.
fn permutation_unitary(perm: &[usize]) -> Unitary {
    let n = perm.len();
    let d = 1usize << n;
    let mut m = CMatrix::zeros(d, d);
    for col in 0..d {
        let mut row = 0usize;
        for l in 0..n {
            let bit = (col >> (n - 1 - l)) & 1;
            row |= bit << (n - 1 - perm[l]);
        }
        m[(row, col)] = C64::new(1.0, 0.0);
    }
    Unitary::from_matrix(QuditSpace::qubits(n), m).expect("permutation")
}

/// Distance between the compiled circuit and the logical circuit modulo the
/// recorded output permutation and a global phase.
pub fn verify_compiled(
    compiled: &CompiledCircuit,
    graph: &WeightedGraph,
    angles: QaoaAngles,
) -> Result<f64, XyError> {
    let logical = build_qaoa_circuit(graph, angles, 1)?.unitary()?;
    let u_compiled = compiled.circuit.unitary()?;
    let p = permutation_unitary(&compiled.final_permutation);
    let target = p.then_after(&logical)?;
    distance_global_phase(&u_compiled, &target)
}

// --- expectation values & landscapes ---------------------------------------------

/// Exact ⟨C⟩ by statevector simulation and enumeration over bitstring cuts.
pub fn expected_cut(graph: &WeightedGraph, angles: QaoaAngles) -> Result<f64, XyError> {
    let circuit = build_qaoa_circuit(graph, angles, 1)?;
    let u = circuit.unitary()?;
    let d = u.dim();
    let mut state = vec![C64::new(0.0, 0.0); d];
    state[0] = C64::new(1.0, 0.0);
    let state = u.apply(&state);
    Ok(state
        .iter()
        .enumerate()
        .map(|(z, amp)| amp.norm_sqr() * graph.cut_value(z))
        .sum())
}

/// ⟨C⟩ estimated from `shots` samples of the output distribution.
pub fn sampled_cut(
    graph: &WeightedGraph,
    angles: QaoaAngles,
    shots: u64,
    rng: &mut impl Rng,
) -> Result<f64, XyError> {
    let circuit = build_qaoa_circuit(graph, angles, 1)?;
    let u = circuit.unitary()?;
    let d = u.dim();
    let mut state = vec![C64::new(0.0, 0.0); d];
    state[0] = C64::new(1.0, 0.0);
    let state = u.apply(&state);
    let probs: Vec<f64> = state.iter().map(|a| a.norm_sqr()).collect();
    let mut acc = 0.0;
    for _ in 0..shots {
        let mut x: f64 = rng.gen();
        let mut z = d - 1;
        for (i, &p) in probs.iter().enumerate() {
            if x < p {
                z = i;
                break;
            }
            x -= p;
        }
        acc += graph.cut_value(z);
    }
    Ok(acc / shots as f64)
}

/// Landscape evaluation mode.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum LandscapeMode {
    Exact,
    /// Seeded sampling with this many shots per angle pair.
    Shots(u64),
}

/// ⟨C⟩ over a (γ, β_mix) grid. Grid points are independent; parallel
/// evaluation is bit-identical to sequential because each point owns a
/// stream indexed by its grid position.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Landscape {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    /// Row-major: `values[i_gamma][i_beta]`.
    pub values: Vec<Vec<f64>>,
}

pub fn landscape(
    graph: &WeightedGraph,
    gammas: &[f64],
    betas: &[f64],
    mode: LandscapeMode,
    streams: &Streams,
) -> Result<Landscape, XyError> {
    if gammas.is_empty() || betas.is_empty() {
        return Err(XyError::InvalidParameter("empty landscape grid".into()));
    }
    let nb = betas.len();
    let values: Result<Vec<Vec<f64>>, XyError> = gammas
        .par_iter()
        .enumerate()
        .map(|(gi, &gamma)| {
            betas
                .iter()
                .enumerate()
                .map(|(bi, &beta_mix)| {
                    let angles = QaoaAngles { gamma, beta_mix };
                    match mode {
                        LandscapeMode::Exact => expected_cut(graph, angles),
                        LandscapeMode::Shots(shots) => {
                            let mut rng = streams.stream((gi * nb + bi) as u64);
                            sampled_cut(graph, angles, shots, &mut rng)
                        }
                    }
                })
                .collect()
        })
        .collect();
    Ok(Landscape { gammas: gammas.to_vec(), betas: betas.to_vec(), values: values? })
}

/// Landscape maximizer from the exact grid plus local quadratic refinement.
pub fn landscape_maximum(l: &Landscape, graph: &WeightedGraph) -> (f64, f64, f64) {
    let (mut gi, mut bi, mut best) = (0, 0, f64::NEG_INFINITY);
    for (i, row) in l.values.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v > best {
                best = v;
                gi = i;
                bi = j;
            }
        }
    }
    let refine = |grid: &[f64], idx: usize, eval: &dyn Fn(f64) -> f64| -> f64 {
        if idx == 0 || idx + 1 >= grid.len() {
            return grid[idx];
        }
        let h = grid[idx + 1] - grid[idx];
        let (ym, y0, yp) = (eval(grid[idx - 1]), eval(grid[idx]), eval(grid[idx + 1]));
        let denom = ym - 2.0 * y0 + yp;
        if denom.abs() < 1e-15 {
            grid[idx]
        } else {
            grid[idx] + 0.5 * (ym - yp) / denom * h
        }
    };
    let beta0 = l.betas[bi];
    let gamma_star = refine(&l.gammas, gi, &|g| {
        expected_cut(graph, QaoaAngles { gamma: g, beta_mix: beta0 }).unwrap_or(f64::NEG_INFINITY)
    });
    let beta_star = refine(&l.betas, bi, &|b| {
        expected_cut(graph, QaoaAngles { gamma: gamma_star, beta_mix: b })
            .unwrap_or(f64::NEG_INFINITY)
    });
    let value = expected_cut(graph, QaoaAngles { gamma: gamma_star, beta_mix: beta_star })
        .unwrap_or(best);
    (gamma_star, beta_star, value)
}
