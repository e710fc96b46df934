//! Tensor-network data model: site tensors, bonds, boundary states, and the
//! unfolding of a site into a matrix.
//!
//! Site data is a dense row-major tensor with one axis per leg, in leg order.
//! Every site is an operator site: it has exactly one `PhysIn` and one
//! `PhysOut` leg of the network's physical dimension `d`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{self, is_power_of, next_power, permute_axes, ravel, unravel};
use crate::operator::{DenseOperator, RegisterDesc, RegisterId};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LegKind {
    PhysIn,
    PhysOut,
    Bond(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Leg {
    pub kind: LegKind,
    pub dim: usize,
}

impl Leg {
    pub fn phys_in(d: usize) -> Self {
        Self { kind: LegKind::PhysIn, dim: d }
    }

    pub fn phys_out(d: usize) -> Self {
        Self { kind: LegKind::PhysOut, dim: d }
    }

    pub fn bond(edge: usize, dim: usize) -> Self {
        Self { kind: LegKind::Bond(edge), dim }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiteTensor {
    pub id: usize,
    pub legs: Vec<Leg>,
    pub data: Vec<C64>,
}

impl SiteTensor {
    pub fn new(id: usize, legs: Vec<Leg>, data: Vec<C64>) -> Self {
        Self { id, legs, data }
    }

    pub fn dims(&self) -> Vec<usize> {
        self.legs.iter().map(|l| l.dim).collect()
    }

    pub fn axis_of(&self, kind: LegKind) -> Option<usize> {
        self.legs.iter().position(|l| l.kind == kind)
    }

    /// Edge ids of the bond legs, in leg order.
    pub fn bond_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.legs.iter().filter_map(|l| match l.kind {
            LegKind::Bond(e) => Some(e),
            _ => None,
        })
    }

    /// The register a leg lives on once the site is placed in a circuit.
    pub fn leg_register(&self, axis: usize) -> RegisterId {
        match self.legs[axis].kind {
            LegKind::PhysIn | LegKind::PhysOut => RegisterId::Physical(self.id),
            LegKind::Bond(e) => RegisterId::Bond(e),
        }
    }
}

/// A bond. `v == None` marks an external bond that ends on a boundary state.
/// A `cyclic` edge closes a trace (only the dense oracle understands it).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub id: usize,
    pub u: usize,
    pub v: Option<usize>,
    pub dim: usize,
    pub cyclic: bool,
}

impl Edge {
    pub fn internal(id: usize, u: usize, v: usize, dim: usize) -> Self {
        Self { id, u, v: Some(v), dim, cyclic: false }
    }

    pub fn external(id: usize, u: usize, dim: usize) -> Self {
        Self { id, u, v: None, dim, cyclic: false }
    }

    pub fn cyclic(id: usize, u: usize, v: usize, dim: usize) -> Self {
        Self { id, u, v: Some(v), dim, cyclic: true }
    }

    pub fn is_external(&self) -> bool {
        self.v.is_none()
    }

    /// The endpoint opposite `x`, for internal edges.
    pub fn other(&self, x: usize) -> Option<usize> {
        let v = self.v?;
        if self.u == x {
            Some(v)
        } else if v == x {
            Some(self.u)
        } else {
            None
        }
    }
}

/// Which side of the encoded operator a boundary vector sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    /// Prepared as a ket `|r⟩` on the bond register before the sweep.
    In,
    /// Post-selected as a bra `⟨l|` after the sweep.
    Out,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Boundary {
    pub side: Side,
    pub state: Vec<C64>,
}

impl Boundary {
    /// `|0⟩` prepared on the input side.
    pub fn zero(dim: usize) -> Self {
        Self::basis(Side::In, dim, 0)
    }

    pub fn basis(side: Side, dim: usize, index: usize) -> Self {
        let mut state = vec![C64::new(0.0, 0.0); dim];
        state[index] = C64::new(1.0, 0.0);
        Self { side, state }
    }

    /// Coefficients used when this boundary is contracted into its bond:
    /// the ket itself on the input side, the conjugated bra on the output side.
    pub fn contraction_weights(&self) -> Vec<C64> {
        match self.side {
            Side::In => self.state.clone(),
            Side::Out => self.state.iter().map(|z| z.conj()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorNetwork {
    pub d: usize,
    pub vertices: Vec<SiteTensor>,
    pub edges: Vec<Edge>,
    /// Boundary states of external edges, by edge id. Missing entries mean
    /// `|0⟩` on the input side.
    pub boundary: BTreeMap<usize, Boundary>,
}

impl TensorNetwork {
    pub fn new(d: usize) -> Self {
        Self { d, vertices: Vec::new(), edges: Vec::new(), boundary: BTreeMap::new() }
    }

    pub fn vertex(&self, id: usize) -> Option<&SiteTensor> {
        self.vertices.iter().find(|s| s.id == id)
    }

    pub fn vertex_mut(&mut self, id: usize) -> Option<&mut SiteTensor> {
        self.vertices.iter_mut().find(|s| s.id == id)
    }

    pub fn edge(&self, id: usize) -> Option<&Edge> {
        self.edges.iter().find(|e| e.id == id)
    }

    /// Vertex ids in ascending order.
    pub fn vertex_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.vertices.iter().map(|s| s.id).collect();
        ids.sort_unstable();
        ids
    }

    pub fn boundary_of(&self, edge: &Edge) -> Boundary {
        self.boundary.get(&edge.id).cloned().unwrap_or_else(|| Boundary::zero(edge.dim))
    }

    /// Non-cyclic internal edges incident to `v`, as `(neighbor, edge)`.
    pub fn neighbors(&self, v: usize) -> Vec<(usize, &Edge)> {
        self.edges
            .iter()
            .filter(|e| !e.cyclic)
            .filter_map(|e| e.other(v).filter(|&w| w != v).map(|w| (w, e)))
            .collect()
    }

    /// Number of distinct neighbours over non-cyclic internal edges.
    pub fn degree(&self, v: usize) -> usize {
        self.neighbors(v).iter().map(|(w, _)| *w).collect::<BTreeSet<_>>().len()
    }

    pub fn has_cyclic_edges(&self) -> bool {
        self.edges.iter().any(|e| e.cyclic)
    }

    /// Product of physical dimensions, `d^|V|`.
    pub fn physical_dim(&self) -> usize {
        self.d.saturating_pow(self.vertices.len() as u32)
    }
}

/// One problem found by [`validate_network`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    BadPhysicalDim { d: usize },
    DuplicateVertex { vertex: usize },
    DuplicateEdge { edge: usize },
    PhysicalLegs { vertex: usize },
    DataLength { vertex: usize, expected: usize, actual: usize },
    DanglingEdge { vertex: usize, edge: usize },
    UnknownEndpoint { edge: usize, vertex: usize },
    LegNotEndpoint { vertex: usize, edge: usize },
    LegCount { vertex: usize, edge: usize, expected: usize, found: usize },
    DimMismatch { vertex: usize, edge: usize, leg_dim: usize, edge_dim: usize },
    ZeroBondDim { edge: usize },
    SelfLoop { edge: usize },
    MultiEdge { u: usize, v: usize, edges: Vec<usize> },
    BoundaryUnknownEdge { edge: usize },
    BoundaryOnInternalEdge { edge: usize },
    BoundaryLength { edge: usize, expected: usize, actual: usize },
    BoundaryNorm { edge: usize, norm: f64 },
    NonPowerBond { edge: usize, dim: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            BadPhysicalDim { d } => write!(f, "physical dimension {d} must be at least 2"),
            DuplicateVertex { vertex } => write!(f, "duplicate vertex id {vertex}"),
            DuplicateEdge { edge } => write!(f, "duplicate edge id {edge}"),
            PhysicalLegs { vertex } => {
                write!(f, "vertex {vertex} needs exactly one phys_in and one phys_out leg of dimension d")
            }
            DataLength { vertex, expected, actual } => {
                write!(f, "vertex {vertex} has {actual} data entries, legs require {expected}")
            }
            DanglingEdge { vertex, edge } => write!(f, "dangling edge {edge} referenced by vertex {vertex}"),
            UnknownEndpoint { edge, vertex } => write!(f, "edge {edge} names unknown vertex {vertex}"),
            LegNotEndpoint { vertex, edge } => {
                write!(f, "vertex {vertex} has a leg on edge {edge} but is not one of its endpoints")
            }
            LegCount { vertex, edge, expected, found } => {
                write!(f, "vertex {vertex} has {found} legs on edge {edge}, expected {expected}")
            }
            DimMismatch { vertex, edge, leg_dim, edge_dim } => {
                write!(f, "vertex {vertex} leg on edge {edge} has dim {leg_dim}, edge has dim {edge_dim}")
            }
            ZeroBondDim { edge } => write!(f, "edge {edge} has zero dimension"),
            SelfLoop { edge } => write!(f, "self-loop on edge {edge} must be marked cyclic"),
            MultiEdge { u, v, edges } => write!(f, "multi-edge between vertices {u} and {v} (edges {edges:?})"),
            BoundaryUnknownEdge { edge } => write!(f, "boundary state for unknown edge {edge}"),
            BoundaryOnInternalEdge { edge } => write!(f, "boundary state on internal edge {edge}"),
            BoundaryLength { edge, expected, actual } => {
                write!(f, "boundary state on edge {edge} has length {actual}, expected {expected}")
            }
            BoundaryNorm { edge, norm } => write!(f, "boundary state on edge {edge} has norm {norm}, expected 1"),
            NonPowerBond { edge, dim } => write!(f, "edge {edge} has dimension {dim}, not a power of d"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidNetwork(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Structural validation. Never fails; an empty report means valid.
pub fn validate_network(tn: &TensorNetwork) -> ValidationReport {
    validate_network_with(tn, false)
}

/// [`validate_network`], optionally also requiring every bond dimension to be
/// a power of `d` (the state after [`pad_bonds_to_power`]).
pub fn validate_network_with(tn: &TensorNetwork, require_power_bonds: bool) -> ValidationReport {
    use Violation::*;
    let mut out = Vec::new();
    if tn.d < 2 {
        out.push(BadPhysicalDim { d: tn.d });
    }

    let mut seen = BTreeSet::new();
    for s in &tn.vertices {
        if !seen.insert(s.id) {
            out.push(DuplicateVertex { vertex: s.id });
        }
    }
    let mut edges: BTreeMap<usize, &Edge> = BTreeMap::new();
    for e in &tn.edges {
        if edges.insert(e.id, e).is_some() {
            out.push(DuplicateEdge { edge: e.id });
        }
    }

    for s in &tn.vertices {
        let n_in = s.legs.iter().filter(|l| l.kind == LegKind::PhysIn).count();
        let n_out = s.legs.iter().filter(|l| l.kind == LegKind::PhysOut).count();
        let phys_dims_ok = s
            .legs
            .iter()
            .filter(|l| matches!(l.kind, LegKind::PhysIn | LegKind::PhysOut))
            .all(|l| l.dim == tn.d);
        if n_in != 1 || n_out != 1 || !phys_dims_ok {
            out.push(PhysicalLegs { vertex: s.id });
        }
        let expected: usize = s.dims().iter().product();
        if expected != s.data.len() {
            out.push(DataLength { vertex: s.id, expected, actual: s.data.len() });
        }
        for leg in &s.legs {
            if let LegKind::Bond(e) = leg.kind {
                match edges.get(&e) {
                    None => out.push(DanglingEdge { vertex: s.id, edge: e }),
                    Some(edge) => {
                        if edge.u != s.id && edge.v != Some(s.id) {
                            out.push(LegNotEndpoint { vertex: s.id, edge: e });
                        }
                        if leg.dim != edge.dim {
                            out.push(DimMismatch { vertex: s.id, edge: e, leg_dim: leg.dim, edge_dim: edge.dim });
                        }
                    }
                }
            }
        }
    }

    let mut pairs: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for e in &tn.edges {
        if e.dim == 0 {
            out.push(ZeroBondDim { edge: e.id });
        }
        let endpoints: Vec<usize> = std::iter::once(e.u).chain(e.v).collect();
        for &x in &endpoints {
            if tn.vertex(x).is_none() {
                out.push(UnknownEndpoint { edge: e.id, vertex: x });
            }
        }
        // legs expected per endpoint: two on a self-loop, one otherwise
        let mut expected: BTreeMap<usize, usize> = BTreeMap::new();
        for &x in &endpoints {
            *expected.entry(x).or_default() += 1;
        }
        for (&x, &want) in &expected {
            if let Some(s) = tn.vertex(x) {
                let found = s.bond_edges().filter(|&b| b == e.id).count();
                if found != want {
                    out.push(LegCount { vertex: x, edge: e.id, expected: want, found });
                }
            }
        }
        if let Some(v) = e.v {
            if v == e.u && !e.cyclic {
                out.push(SelfLoop { edge: e.id });
            }
            if !e.cyclic && v != e.u {
                pairs.entry((e.u.min(v), e.u.max(v))).or_default().push(e.id);
            }
        }
        if require_power_bonds && !is_power_of(e.dim, tn.d.max(2)) {
            out.push(NonPowerBond { edge: e.id, dim: e.dim });
        }
    }
    for ((u, v), ids) in pairs {
        if ids.len() > 1 {
            out.push(MultiEdge { u, v, edges: ids });
        }
    }

    for (&id, b) in &tn.boundary {
        match edges.get(&id) {
            None => out.push(BoundaryUnknownEdge { edge: id }),
            Some(e) if !e.is_external() => out.push(BoundaryOnInternalEdge { edge: id }),
            Some(e) => {
                if b.state.len() != e.dim {
                    out.push(BoundaryLength { edge: id, expected: e.dim, actual: b.state.len() });
                } else {
                    let norm = b.state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    if (norm - 1.0).abs() > 1e-10 {
                        out.push(BoundaryNorm { edge: id, norm });
                    }
                }
            }
        }
    }

    ValidationReport { violations: out }
}

/// A partition of a site's axes into an output (row) bundle and an input
/// (column) bundle. The physical leg is the last, least significant, axis of
/// each bundle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unfolding {
    pub out_axes: Vec<usize>,
    pub in_axes: Vec<usize>,
    pub m: usize,
    pub n: usize,
}

impl Unfolding {
    pub fn new(site: &SiteTensor, out_axes: Vec<usize>, in_axes: Vec<usize>) -> Result<Self> {
        let rank = site.legs.len();
        let mut seen = vec![false; rank];
        for &a in out_axes.iter().chain(&in_axes) {
            if a >= rank || seen[a] {
                return Err(Error::BadUnfolding(format!(
                    "axes {out_axes:?} | {in_axes:?} are not a partition of {rank} legs"
                )));
            }
            seen[a] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::BadUnfolding(format!(
                "axes {out_axes:?} | {in_axes:?} do not cover all {rank} legs"
            )));
        }
        let last_is = |axes: &[usize], kind: LegKind| axes.last().map(|&a| site.legs[a].kind) == Some(kind);
        if !last_is(&out_axes, LegKind::PhysOut) || !last_is(&in_axes, LegKind::PhysIn) {
            return Err(Error::BadUnfolding(
                "physical legs must close their bundles (phys_out last in rows, phys_in last in columns)".into(),
            ));
        }
        let m = out_axes.iter().map(|&a| site.legs[a].dim).product();
        let n = in_axes.iter().map(|&a| site.legs[a].dim).product();
        Ok(Self { out_axes, in_axes, m, n })
    }

    /// Bond legs for which `is_input(edge)` holds go to the column bundle, the
    /// rest to the row bundle; bonds within a bundle are ordered by edge id.
    pub fn by_edges(site: &SiteTensor, is_input: impl Fn(usize) -> bool) -> Result<Self> {
        let mut bonds: Vec<(usize, usize)> = site
            .legs
            .iter()
            .enumerate()
            .filter_map(|(a, l)| match l.kind {
                LegKind::Bond(e) => Some((e, a)),
                _ => None,
            })
            .collect();
        bonds.sort_unstable();
        let (mut in_axes, mut out_axes) = (Vec::new(), Vec::new());
        for (e, a) in bonds {
            if is_input(e) {
                in_axes.push(a);
            } else {
                out_axes.push(a);
            }
        }
        let phys_out = site
            .axis_of(LegKind::PhysOut)
            .ok_or_else(|| Error::BadUnfolding(format!("vertex {} has no phys_out leg", site.id)))?;
        let phys_in = site
            .axis_of(LegKind::PhysIn)
            .ok_or_else(|| Error::BadUnfolding(format!("vertex {} has no phys_in leg", site.id)))?;
        out_axes.push(phys_out);
        in_axes.push(phys_in);
        Self::new(site, out_axes, in_axes)
    }

    fn perm(&self) -> Vec<usize> {
        self.out_axes.iter().chain(&self.in_axes).copied().collect()
    }
}

/// Reshapes a site into its `m × n` matrix: axes permuted to
/// `(out_axes, in_axes)` then read row-major.
pub fn unfold_site(site: &SiteTensor, unfolding: &Unfolding) -> Result<DenseOperator> {
    let rank = site.legs.len();
    if unfolding.out_axes.len() + unfolding.in_axes.len() != rank {
        return Err(Error::BadUnfolding(format!("unfolding does not match the {rank} legs of vertex {}", site.id)));
    }
    let dims = site.dims();
    if dims.iter().product::<usize>() != site.data.len() {
        return Err(Error::ShapeMismatch(format!("vertex {} data does not match its legs", site.id)));
    }
    let data = permute_axes(&site.data, &dims, &unfolding.perm());
    let matrix = linalg::matrix_from_row_major(unfolding.m, unfolding.n, &data);
    let desc = |axes: &[usize]| -> Vec<RegisterDesc> {
        axes.iter().map(|&a| RegisterDesc::new(site.leg_register(a), site.legs[a].dim)).collect()
    };
    DenseOperator::new(matrix, desc(&unfolding.out_axes), desc(&unfolding.in_axes))
}

/// Inverse of [`unfold_site`]: writes an `m × n` matrix back into the legs of
/// `site`.
pub fn fold_site(matrix: &nalgebra::DMatrix<C64>, site: &SiteTensor, unfolding: &Unfolding) -> Result<SiteTensor> {
    if matrix.nrows() != unfolding.m || matrix.ncols() != unfolding.n {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} matrix for a {}x{} unfolding",
            matrix.nrows(),
            matrix.ncols(),
            unfolding.m,
            unfolding.n
        )));
    }
    let perm = unfolding.perm();
    let dims = site.dims();
    let permuted_dims: Vec<usize> = perm.iter().map(|&a| dims[a]).collect();
    let data = permute_axes(&linalg::row_major(matrix), &permuted_dims, &linalg::invert_permutation(&perm));
    Ok(SiteTensor { id: site.id, legs: site.legs.clone(), data })
}

/// Zero-pads every bond to the next power of `d`. The contraction is
/// unchanged: new slices are zero and boundary vectors get zero components.
pub fn pad_bonds_to_power(tn: &TensorNetwork, d: usize) -> TensorNetwork {
    let new_dim: BTreeMap<usize, usize> = tn.edges.iter().map(|e| (e.id, next_power(e.dim, d))).collect();
    if tn.edges.iter().all(|e| new_dim[&e.id] == e.dim) {
        return tn.clone();
    }

    let mut out = tn.clone();
    for e in &mut out.edges {
        e.dim = new_dim[&e.id];
    }
    for site in &mut out.vertices {
        let old_dims = site.dims();
        for leg in &mut site.legs {
            if let LegKind::Bond(e) = leg.kind {
                if let Some(&nd) = new_dim.get(&e) {
                    leg.dim = nd;
                }
            }
        }
        let dims = site.dims();
        if dims == old_dims {
            continue;
        }
        let mut data = vec![C64::new(0.0, 0.0); dims.iter().product()];
        for (i, &z) in site.data.iter().enumerate() {
            data[ravel(&unravel(i, &old_dims), &dims)] = z;
        }
        site.data = data;
    }
    for (id, b) in &mut out.boundary {
        if let Some(&nd) = new_dim.get(id) {
            b.state.resize(nd, C64::new(0.0, 0.0));
        }
    }
    out
}
