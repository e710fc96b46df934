//! Vertex ordering and the graph sweep that turns a network into an ordered
//! list of register-wired unitaries.
//!
//! Each bond is its own register. When vertex `v` is processed, its bonds to
//! already processed neighbours (and input-side boundary bonds) form the
//! input bundle and the remaining bonds the output bundle. The site acts on
//! the touched space `T = [input bonds] ⊗ [output bonds] ⊗ P_v`; input bonds
//! arrive carrying data and leave in `|0⟩`, output bonds arrive in `|0⟩` and
//! leave carrying data. The pad and drop factors of the core fit inside the
//! idle halves of the bond registers, so no extra pad registers exist.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dilation::{unitary_svd, PadPolicy, SiteFactors};
use crate::error::{Error, Result};
use crate::linalg::log_base;
use crate::network::{pad_bonds_to_power, validate_network, Side, TensorNetwork, Unfolding};
use crate::operator::{space_dim, RegisterDesc, RegisterId};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegisterKind {
    Physical,
    Bond,
    Boundary,
    Flag,
    Pad,
}

/// One register of the global space. Non-physical registers are prepared in
/// `prepare` and post-selected on `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutRegister {
    pub id: RegisterId,
    pub kind: RegisterKind,
    pub dim: usize,
    pub postselect: bool,
    /// Initial state; empty for physical registers.
    pub prepare: Vec<C64>,
    /// Post-selection bra (stored as the ket it projects onto); empty for
    /// physical registers.
    pub target: Vec<C64>,
}

impl LayoutRegister {
    fn physical(v: usize, d: usize) -> Self {
        Self { id: RegisterId::Physical(v), kind: RegisterKind::Physical, dim: d, postselect: false, prepare: Vec::new(), target: Vec::new() }
    }

    fn ancilla(id: RegisterId, kind: RegisterKind, prepare: Vec<C64>, target: Vec<C64>) -> Self {
        Self { id, kind, dim: prepare.len(), postselect: true, prepare, target }
    }

    pub fn desc(&self) -> RegisterDesc {
        RegisterDesc::new(self.id, self.dim)
    }
}

/// Global register order: physical registers by vertex id, then bonds by
/// edge id, then flags in creation order. The first register is the most
/// significant factor of the global index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RegisterLayout {
    pub registers: Vec<LayoutRegister>,
}

impl RegisterLayout {
    pub fn get(&self, id: RegisterId) -> Option<&LayoutRegister> {
        self.registers.iter().find(|r| r.id == id)
    }

    pub fn total_dim(&self) -> usize {
        self.registers.iter().map(|r| r.dim).product()
    }

    pub fn physical(&self) -> impl Iterator<Item = &LayoutRegister> {
        self.registers.iter().filter(|r| r.kind == RegisterKind::Physical)
    }

    pub fn physical_dim(&self) -> usize {
        self.physical().map(|r| r.dim).product()
    }
}

fn basis0(dim: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); dim];
    v[0] = C64::new(1.0, 0.0);
    v
}

fn build_layout(tn: &TensorNetwork, flags: &[usize]) -> RegisterLayout {
    let mut registers: Vec<LayoutRegister> = tn.vertex_ids().into_iter().map(|v| LayoutRegister::physical(v, tn.d)).collect();
    let mut edges: Vec<_> = tn.edges.iter().collect();
    edges.sort_by_key(|e| e.id);
    for e in edges {
        let id = RegisterId::Bond(e.id);
        if e.is_external() {
            let b = tn.boundary_of(e);
            let (prep, target) = match b.side {
                Side::In => (b.state, basis0(e.dim)),
                Side::Out => (basis0(e.dim), b.state),
            };
            registers.push(LayoutRegister::ancilla(id, RegisterKind::Boundary, prep, target));
        } else {
            registers.push(LayoutRegister::ancilla(id, RegisterKind::Bond, basis0(e.dim), basis0(e.dim)));
        }
    }
    for &v in flags {
        registers.push(LayoutRegister::ancilla(RegisterId::Flag(v), RegisterKind::Flag, basis0(2), basis0(2)));
    }
    RegisterLayout { registers }
}

/// Layout of a network processed in `order`, with one flag per vertex.
pub fn layout_registers(tn: &TensorNetwork, order: &[usize]) -> RegisterLayout {
    build_layout(tn, order)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpRole {
    /// `V†` on the input bundle.
    Vh,
    /// Flag-dilated core on the flag and the touched space.
    Core,
    /// `U` on the output bundle.
    U,
    /// `U·Π·V†` of a site whose core is trivial; no flag.
    Merged,
}

/// A square unitary acting on `registers` (first most significant).
#[derive(Debug, Clone, PartialEq)]
pub struct WiredOp {
    pub vertex: usize,
    pub role: OpRole,
    pub registers: Vec<RegisterDesc>,
    pub matrix: DMatrix<C64>,
}

impl WiredOp {
    pub fn register_ids(&self) -> Vec<RegisterId> {
        self.registers.iter().map(|r| r.id).collect()
    }
}

/// Per-site shapes and spectral data recorded during the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteMeta {
    pub vertex: usize,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub p: usize,
    pub q: usize,
    pub beta: f64,
    pub trivial: bool,
    /// Input-bundle bonds, by edge id.
    pub in_edges: Vec<usize>,
    /// Output-bundle bonds, by edge id.
    pub out_edges: Vec<usize>,
    pub s_k: Vec<f64>,
    pub angles: Vec<(f64, usize)>,
    /// `None` when the site matrix is rank-deficient.
    pub condition_number: Option<f64>,
}

impl SiteMeta {
    /// The unfolding the sweep used for this vertex.
    pub fn unfolding(&self, tn: &TensorNetwork) -> Result<Unfolding> {
        let site = tn.vertex(self.vertex).ok_or_else(|| Error::InvalidArgument(format!("no vertex {}", self.vertex)))?;
        Unfolding::by_edges(site, |e| self.in_edges.contains(&e))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompilationResult {
    pub d: usize,
    pub ops: Vec<WiredOp>,
    pub layout: RegisterLayout,
    pub gamma: f64,
    pub order: Vec<usize>,
    /// `β_v` in processing order.
    pub betas: Vec<f64>,
    /// Per-site data in processing order.
    pub sites: Vec<SiteMeta>,
}

impl CompilationResult {
    /// `Σ log_d χ_e` over the internal bonds that are live while each vertex
    /// is processed: bonds cut before or after the step.
    pub fn coupling_widths(&self) -> Vec<f64> {
        let step: BTreeMap<usize, usize> = self.order.iter().enumerate().map(|(t, &v)| (v, t)).collect();
        let mut span: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        for s in &self.sites {
            let t = step[&s.vertex];
            for &e in &s.out_edges {
                span.entry(e).or_insert((t, t)).0 = t;
            }
            for &e in &s.in_edges {
                span.entry(e).or_insert((t, t)).1 = t;
            }
        }
        (0..self.order.len())
            .map(|t| {
                self.layout
                    .registers
                    .iter()
                    .filter(|r| r.kind == RegisterKind::Bond)
                    .filter_map(|r| match r.id {
                        RegisterId::Bond(e) => span.get(&e).map(|&(b, d)| (b, d, r.dim)),
                        _ => None,
                    })
                    .filter(|&(birth, death, _)| birth <= t && t <= death)
                    .map(|(_, _, dim)| log_base(dim, self.d))
                    .sum()
            })
            .collect()
    }

    /// Peak coupling width rounded up to whole qudits.
    pub fn peak_coupling_qudits(&self) -> usize {
        let peak = self.coupling_widths().into_iter().fold(0.0, f64::max);
        (peak - 1e-9).ceil().max(0.0) as usize
    }

    /// Operator indices grouped by vertex, in execution order.
    pub fn ops_by_vertex(&self) -> Vec<(usize, std::ops::Range<usize>)> {
        let mut out: Vec<(usize, std::ops::Range<usize>)> = Vec::new();
        for (i, op) in self.ops.iter().enumerate() {
            match out.last_mut() {
                Some((v, range)) if *v == op.vertex => range.end = i + 1,
                _ => out.push((op.vertex, i..i + 1)),
            }
        }
        out
    }
}

/// Outcome of a sweep: either a block-encoding, or the report that a site is
/// identically zero (`Γ = 0`).
#[derive(Debug, Clone, PartialEq)]
pub enum SweepOutcome {
    Encoded(CompilationResult),
    ZeroOperator { vertex: usize, order: Vec<usize> },
}

impl SweepOutcome {
    pub fn gamma(&self) -> f64 {
        match self {
            Self::Encoded(r) => r.gamma,
            Self::ZeroOperator { .. } => 0.0,
        }
    }

    pub fn encoded(self) -> Option<CompilationResult> {
        match self {
            Self::Encoded(r) => Some(r),
            Self::ZeroOperator { .. } => None,
        }
    }
}

/// Chooses the next vertex to process.
pub trait VertexOracle {
    fn next(&mut self, processed: &BTreeSet<usize>, remaining: &BTreeSet<usize>, tn: &TensorNetwork) -> Result<usize>;
}

/// Minimises the net change in live bond size, then degree, then id.
#[derive(Debug, Clone, Copy, Default)]
pub struct Greedy;

impl VertexOracle for Greedy {
    fn next(&mut self, processed: &BTreeSet<usize>, remaining: &BTreeSet<usize>, tn: &TensorNetwork) -> Result<usize> {
        next_vertex(processed, remaining, tn).ok_or_else(|| Error::BadOrder("no vertices left".into()))
    }
}

/// Replays a given order.
#[derive(Debug, Clone)]
pub struct FixedOrder {
    order: Vec<usize>,
    pos: usize,
}

impl FixedOrder {
    pub fn new(order: Vec<usize>) -> Self {
        Self { order, pos: 0 }
    }
}

impl VertexOracle for FixedOrder {
    fn next(&mut self, _processed: &BTreeSet<usize>, remaining: &BTreeSet<usize>, _tn: &TensorNetwork) -> Result<usize> {
        let v = *self
            .order
            .get(self.pos)
            .ok_or_else(|| Error::BadOrder(format!("order {:?} is too short", self.order)))?;
        if !remaining.contains(&v) {
            return Err(Error::BadOrder(format!("vertex {v} is unknown or repeated in {:?}", self.order)));
        }
        self.pos += 1;
        Ok(v)
    }
}

/// Net change of the live bond size if `v` were processed next:
/// `Σ_{w ∈ N(v) ∩ B} log_d χ − Σ_{w ∈ N(v) ∩ A} log_d χ`. External bonds
/// count for neither side.
pub fn delta(v: usize, processed: &BTreeSet<usize>, remaining: &BTreeSet<usize>, tn: &TensorNetwork) -> f64 {
    tn.neighbors(v)
        .into_iter()
        .map(|(w, e)| {
            let size = log_base(e.dim, tn.d);
            if remaining.contains(&w) {
                size
            } else if processed.contains(&w) {
                -size
            } else {
                0.0
            }
        })
        .sum()
}

/// Greedy choice: smallest `Δ_v` (within `1e-12`), then smallest degree,
/// then lowest id. `None` when `remaining` is empty.
pub fn next_vertex(processed: &BTreeSet<usize>, remaining: &BTreeSet<usize>, tn: &TensorNetwork) -> Option<usize> {
    let mut best: Option<(f64, usize, usize)> = None;
    for &v in remaining {
        let cand = (delta(v, processed, remaining, tn), tn.degree(v), v);
        best = match best {
            None => Some(cand),
            Some(b) => {
                let better = cand.0 < b.0 - 1e-12 || ((cand.0 - b.0).abs() <= 1e-12 && cand.1 < b.1);
                Some(if better { cand } else { b })
            }
        };
    }
    best.map(|b| b.2)
}

#[derive(Debug, Clone)]
pub struct CompileOptions {
    pub policy: PadPolicy,
    /// Zero-pad every bond to a power of `d` before sweeping.
    pub pad_bonds: bool,
    /// Processing order; the greedy oracle when `None`.
    pub order: Option<Vec<usize>>,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self { policy: PadPolicy::Identity, pad_bonds: true, order: None }
    }
}

/// Validates, optionally pads, and sweeps a network.
pub fn compile(tn: &TensorNetwork, opts: &CompileOptions) -> Result<SweepOutcome> {
    validate_network(tn).into_result()?;
    let padded;
    let tn = if opts.pad_bonds {
        padded = pad_bonds_to_power(tn, tn.d);
        &padded
    } else {
        tn
    };
    match &opts.order {
        Some(order) => graph_sweep(tn, &mut FixedOrder::new(order.clone()), opts.policy),
        None => graph_sweep(tn, &mut Greedy, opts.policy),
    }
}

/// Processes every vertex once in the order chosen by `oracle`, emitting
/// `V†`, core and `U` per site (or one merged operator for trivial cores).
pub fn graph_sweep(tn: &TensorNetwork, oracle: &mut dyn VertexOracle, policy: PadPolicy) -> Result<SweepOutcome> {
    validate_network(tn).into_result()?;
    if let Some(e) = tn.edges.iter().find(|e| e.cyclic) {
        return Err(Error::UnsupportedTopology(format!("edge {} is a traced (cyclic) bond", e.id)));
    }

    let mut processed = BTreeSet::new();
    let mut remaining: BTreeSet<usize> = tn.vertex_ids().into_iter().collect();
    let mut order = Vec::new();
    let mut ops = Vec::new();
    let mut sites = Vec::new();
    let mut flags = Vec::new();

    while !remaining.is_empty() {
        let v = oracle.next(&processed, &remaining, tn)?;
        let site = tn.vertex(v).expect("validated");
        let unfolding = Unfolding::by_edges(site, |e| {
            let edge = tn.edge(e).expect("validated");
            match edge.other(v) {
                Some(w) => processed.contains(&w),
                None => tn.boundary_of(edge).side == Side::In,
            }
        })?;
        order.push(v);
        let factors = match unitary_svd(site, &unfolding, policy) {
            Ok(f) => f,
            Err(Error::ZeroOperator { .. }) => return Ok(SweepOutcome::ZeroOperator { vertex: v, order }),
            Err(e) => return Err(e),
        };

        let bond_regs = |axes: &[usize]| -> Vec<RegisterDesc> {
            axes[..axes.len() - 1].iter().map(|&a| RegisterDesc::new(site.leg_register(a), site.legs[a].dim)).collect()
        };
        let wiring = SiteWiring::new(v, tn.d, bond_regs(&unfolding.in_axes), bond_regs(&unfolding.out_axes), &factors);
        if factors.trivial {
            ops.push(wiring.merged(&factors));
        } else {
            ops.extend(wiring.triple(&factors));
            flags.push(v);
        }

        let edge_ids = |regs: &[RegisterDesc]| -> Vec<usize> {
            regs.iter().filter_map(|r| if let RegisterId::Bond(e) = r.id { Some(e) } else { None }).collect()
        };
        let s_min = factors.svd.s.iter().cloned().fold(f64::INFINITY, f64::min);
        sites.push(SiteMeta {
            vertex: v,
            m: factors.m(),
            n: factors.n(),
            k: factors.core.k,
            p: factors.core.p,
            q: factors.core.q,
            beta: factors.beta,
            trivial: factors.trivial,
            in_edges: edge_ids(&wiring.in_regs),
            out_edges: edge_ids(&wiring.out_regs),
            s_k: factors.core.s_k.clone(),
            angles: factors.core.angles.clone(),
            condition_number: (s_min > 0.0).then(|| factors.beta / s_min),
        });

        remaining.remove(&v);
        processed.insert(v);
    }

    let betas: Vec<f64> = sites.iter().map(|s| s.beta).collect();
    Ok(SweepOutcome::Encoded(CompilationResult {
        d: tn.d,
        ops,
        layout: build_layout(tn, &flags),
        gamma: betas.iter().product(),
        order,
        betas,
        sites,
    }))
}

/// Embedding of one site's factors into its touched space
/// `T = [in bonds] ⊗ [out bonds] ⊗ P_v`.
struct SiteWiring {
    vertex: usize,
    d: usize,
    in_regs: Vec<RegisterDesc>,
    out_regs: Vec<RegisterDesc>,
    chi_in: usize,
    chi_out: usize,
    /// `in_embed[c]`: T-index of input core index `c`, for `c < k`, followed
    /// by the unused T-indices in ascending order.
    in_map: Vec<usize>,
    out_map: Vec<usize>,
}

impl SiteWiring {
    fn new(vertex: usize, d: usize, in_regs: Vec<RegisterDesc>, out_regs: Vec<RegisterDesc>, f: &SiteFactors) -> Self {
        let chi_in = space_dim(&in_regs);
        let chi_out = space_dim(&out_regs);
        let (m, n, k) = (f.m(), f.n(), f.core.k);
        let t_dim = chi_in * chi_out * d;
        let index = |ib: usize, ob: usize, ph: usize| (ib * chi_out + ob) * d + ph;

        let complete = |mut used: Vec<usize>| {
            let taken: BTreeSet<usize> = used.iter().copied().collect();
            used.extend((0..t_dim).filter(|t| !taken.contains(t)));
            used
        };
        // input core index c = a·n + j: the pad level a sits in the (idle)
        // output bonds
        let in_map = complete((0..k).map(|c| index((c % n) / d, c / n, c % d)).collect());
        // output core index c = b·m + i: the drop level b sits in the (idle)
        // input bonds
        let out_map = complete((0..k).map(|c| index(c / m, (c % m) / d, c % d)).collect());
        Self { vertex, d, in_regs, out_regs, chi_in, chi_out, in_map, out_map }
    }

    fn t_regs(&self) -> Vec<RegisterDesc> {
        let phys = RegisterDesc::new(RegisterId::Physical(self.vertex), self.d);
        self.in_regs.iter().chain(&self.out_regs).copied().chain(std::iter::once(phys)).collect()
    }

    fn t_dim(&self) -> usize {
        self.chi_in * self.chi_out * self.d
    }

    fn bundle(&self, regs: &[RegisterDesc]) -> Vec<RegisterDesc> {
        let phys = RegisterDesc::new(RegisterId::Physical(self.vertex), self.d);
        regs.iter().copied().chain(std::iter::once(phys)).collect()
    }

    fn triple(&self, f: &SiteFactors) -> Vec<WiredOp> {
        let t = self.t_dim();
        let k = f.core.k;
        let mut core = DMatrix::<C64>::zeros(2 * t, 2 * t);
        for fo in 0..2 {
            for fi in 0..2 {
                for c_out in 0..k {
                    for c_in in 0..k {
                        let z = f.core.c[(fo * k + c_out, fi * k + c_in)];
                        if z != C64::new(0.0, 0.0) {
                            core[(fo * t + self.out_map[c_out], fi * t + self.in_map[c_in])] = z;
                        }
                    }
                }
            }
            for x in k..t {
                core[(fo * t + self.out_map[x], fo * t + self.in_map[x])] = C64::new(1.0, 0.0);
            }
        }
        let flag = RegisterDesc::new(RegisterId::Flag(self.vertex), 2);
        vec![
            WiredOp { vertex: self.vertex, role: OpRole::Vh, registers: self.bundle(&self.in_regs), matrix: f.svd.vh.clone() },
            WiredOp {
                vertex: self.vertex,
                role: OpRole::Core,
                registers: std::iter::once(flag).chain(self.t_regs()).collect(),
                matrix: core,
            },
            WiredOp { vertex: self.vertex, role: OpRole::U, registers: self.bundle(&self.out_regs), matrix: f.svd.u.clone() },
        ]
    }

    fn merged(&self, f: &SiteFactors) -> WiredOp {
        let t = self.t_dim();
        let (d, chi_out) = (self.d, self.chi_out);
        let split = |x: usize| ((x / d) / chi_out, (x / d) % chi_out, x % d);
        let vh_t = DMatrix::from_fn(t, t, |r, c| {
            let ((ib, ob, ph), (ib2, ob2, ph2)) = (split(r), split(c));
            if ob == ob2 { f.svd.vh[(ib * d + ph, ib2 * d + ph2)] } else { C64::new(0.0, 0.0) }
        });
        let u_t = DMatrix::from_fn(t, t, |r, c| {
            let ((ib, ob, ph), (ib2, ob2, ph2)) = (split(r), split(c));
            if ib == ib2 { f.svd.u[(ob * d + ph, ob2 * d + ph2)] } else { C64::new(0.0, 0.0) }
        });
        let mut pi = DMatrix::<C64>::zeros(t, t);
        for x in 0..t {
            pi[(self.out_map[x], self.in_map[x])] = C64::new(1.0, 0.0);
        }
        WiredOp { vertex: self.vertex, role: OpRole::Merged, registers: self.t_regs(), matrix: u_t * pi * vh_t }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Edge, Leg, SiteTensor};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn graph(n: usize, edges: &[(usize, usize, usize)]) -> TensorNetwork {
        let mut tn = TensorNetwork::new(2);
        for v in 0..n {
            let mut legs = Vec::new();
            for (id, &(a, b, dim)) in edges.iter().enumerate() {
                if a == v || b == v {
                    legs.push(Leg::bond(id, dim));
                }
            }
            legs.push(Leg::phys_out(2));
            legs.push(Leg::phys_in(2));
            let size: usize = legs.iter().map(|l| l.dim).product();
            tn.vertices.push(SiteTensor::new(v, legs, vec![c(1.0); size]));
        }
        for (id, &(a, b, dim)) in edges.iter().enumerate() {
            tn.edges.push(Edge::internal(id, a, b, dim));
        }
        tn
    }

    fn set(xs: &[usize]) -> BTreeSet<usize> {
        xs.iter().copied().collect()
    }

    #[test]
    fn path_prefers_the_neighbour() {
        let tn = graph(4, &[(1, 2, 2), (2, 3, 2)]);
        let tn = TensorNetwork { vertices: tn.vertices.into_iter().filter(|s| s.id > 0).collect(), ..tn };
        assert_eq!(delta(2, &set(&[1]), &set(&[2, 3]), &tn), 0.0);
        assert_eq!(delta(3, &set(&[1]), &set(&[2, 3]), &tn), 1.0);
        assert_eq!(next_vertex(&set(&[1]), &set(&[2, 3]), &tn), Some(2));
    }

    #[test]
    fn star_starts_at_a_leaf() {
        let tn = graph(4, &[(3, 0, 2), (3, 1, 2), (3, 2, 2)]);
        assert_eq!(delta(3, &set(&[]), &set(&[0, 1, 2, 3]), &tn), 3.0);
        assert_eq!(next_vertex(&set(&[]), &set(&[0, 1, 2, 3]), &tn), Some(0));
    }

    #[test]
    fn single_vertex_is_chosen() {
        let tn = graph(1, &[]);
        assert_eq!(next_vertex(&set(&[]), &set(&[0]), &tn), Some(0));
    }

    #[test]
    fn layout_orders_registers() {
        let tn = graph(2, &[(0, 1, 2)]);
        let ids: Vec<String> = layout_registers(&tn, &[1, 0]).registers.iter().map(|r| r.id.to_string()).collect();
        assert_eq!(ids, ["P0", "P1", "X0", "F1", "F0"]);
    }

    #[test]
    fn pauli_x_compiles_to_one_merged_op() {
        let mut tn = TensorNetwork::new(2);
        tn.vertices.push(SiteTensor::new(0, vec![Leg::phys_out(2), Leg::phys_in(2)], vec![c(0.0), c(1.0), c(1.0), c(0.0)]));
        let r = compile(&tn, &CompileOptions::default()).unwrap().encoded().unwrap();
        assert_eq!(r.ops.len(), 1);
        assert!((r.gamma - 1.0).abs() < 1e-14);
        assert_eq!(r.order, vec![0]);
    }

    #[test]
    fn chain_coupling_width() {
        let tn = graph(3, &[(0, 1, 2), (1, 2, 4)]);
        let opts = CompileOptions { order: Some(vec![0, 1, 2]), ..Default::default() };
        let r = compile(&tn, &opts).unwrap().encoded().unwrap();
        assert_eq!(r.coupling_widths(), vec![1.0, 3.0, 2.0]);
        assert_eq!(r.peak_coupling_qudits(), 3);
    }

    #[test]
    fn cyclic_edges_are_rejected() {
        let mut tn = graph(2, &[(0, 1, 1)]);
        tn.edges[0].cyclic = true;
        assert!(matches!(compile(&tn, &CompileOptions::default()), Err(Error::UnsupportedTopology(_))));
    }

    #[test]
    fn bad_fixed_order_is_rejected() {
        let tn = graph(2, &[(0, 1, 1)]);
        let opts = CompileOptions { order: Some(vec![0, 0]), ..Default::default() };
        assert!(matches!(compile(&tn, &opts), Err(Error::BadOrder(_))));
    }

    #[test]
    fn zero_site_reports_zero_operator() {
        let mut tn = graph(2, &[(0, 1, 2)]);
        tn.vertices[1].data.iter_mut().for_each(|z| *z = c(0.0));
        let out = compile(&tn, &CompileOptions { order: Some(vec![0, 1]), ..Default::default() }).unwrap();
        assert_eq!(out, SweepOutcome::ZeroOperator { vertex: 1, order: vec![0, 1] });
        assert_eq!(out.gamma(), 0.0);
    }
}
