//! Ising Hamiltonians `c·I + Σ l_i Z_i + Σ α_ij Z_i Z_j` and three ways of
//! writing them as tensor networks: a register-sweep MPO, a traced
//! tensor-sum MPO, and a tensor graph that follows the coupling graph.
//!
//! Qubit `i` is vertex `i`; in dense matrices qubit 0 is the most significant
//! bit.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::network::{Boundary, Edge, Leg, Side, SiteTensor, TensorNetwork};
use crate::operator::{DenseOperator, RegisterDesc, RegisterId};
use crate::{C64, DEFAULT_DENSE_LIMIT};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Qubo {
    pub n: usize,
    pub c_const: f64,
    pub linear: Vec<f64>,
    /// `α_ij` keyed by `(i, j)` with `i < j`; zero couplings are not stored.
    pub quadratic: BTreeMap<(usize, usize), f64>,
}

impl Qubo {
    pub fn new(n: usize) -> Self {
        Self { n, c_const: 0.0, linear: vec![0.0; n], quadratic: BTreeMap::new() }
    }

    /// Adds `α` to the coupling of `i` and `j` (in either order).
    pub fn add_coupling(&mut self, i: usize, j: usize, alpha: f64) -> Result<()> {
        if i == j {
            return Err(Error::InvalidArgument(format!("self-coupling on qubit {i}")));
        }
        if i.max(j) >= self.n {
            return Err(Error::InvalidArgument(format!("coupling ({i}, {j}) outside {} qubits", self.n)));
        }
        let key = (i.min(j), i.max(j));
        let value = self.quadratic.get(&key).copied().unwrap_or(0.0) + alpha;
        if value == 0.0 {
            self.quadratic.remove(&key);
        } else {
            self.quadratic.insert(key, value);
        }
        Ok(())
    }

    pub fn alpha(&self, i: usize, j: usize) -> f64 {
        self.quadratic.get(&(i.min(j), i.max(j))).copied().unwrap_or(0.0)
    }

    /// Coupling neighbours of every qubit.
    pub fn adjacency(&self) -> Vec<BTreeSet<usize>> {
        let mut adj = vec![BTreeSet::new(); self.n];
        for &(i, j) in self.quadratic.keys() {
            adj[i].insert(j);
            adj[j].insert(i);
        }
        adj
    }

    /// Energy of a bit string (`z[i] ∈ {0, 1}`).
    pub fn energy(&self, z: &[u8]) -> f64 {
        let sign = |i: usize| if z[i] == 0 { 1.0 } else { -1.0 };
        self.c_const
            + self.linear.iter().enumerate().map(|(i, l)| l * sign(i)).sum::<f64>()
            + self.quadratic.iter().map(|(&(i, j), a)| a * sign(i) * sign(j)).sum::<f64>()
    }

    /// Converts the binary form `offset + Σ_{i≤j} Q_ij x_i x_j` (upper
    /// triangle of `q`, `x ∈ {0, 1}`) through `x = (1 − Z)/2`.
    pub fn from_binary_matrix(q: &[Vec<f64>], offset: f64) -> Result<Self> {
        let n = q.len();
        if let Some(row) = q.iter().find(|r| r.len() != n) {
            return Err(Error::ShapeMismatch(format!("row of length {} in a {n}x{n} matrix", row.len())));
        }
        let mut out = Self::new(n);
        out.c_const = offset;
        for i in 0..n {
            for j in 0..n {
                let a = q[i][j];
                if a == 0.0 {
                    continue;
                }
                if j < i {
                    return Err(Error::InvalidArgument(format!("entry ({i}, {j}) below the diagonal")));
                }
                if i == j {
                    // x = (1 − Z)/2
                    out.c_const += a / 2.0;
                    out.linear[i] -= a / 2.0;
                } else {
                    // x_i x_j = (1 − Z_i − Z_j + Z_i Z_j)/4
                    out.c_const += a / 4.0;
                    out.linear[i] -= a / 4.0;
                    out.linear[j] -= a / 4.0;
                    out.add_coupling(i, j, a / 4.0)?;
                }
            }
        }
        Ok(out)
    }

    fn check(&self) -> Result<()> {
        if self.linear.len() != self.n {
            return Err(Error::ShapeMismatch(format!("{} linear terms for {} qubits", self.linear.len(), self.n)));
        }
        for &(i, j) in self.quadratic.keys() {
            if i >= j || j >= self.n {
                return Err(Error::InvalidArgument(format!("bad coupling key ({i}, {j})")));
            }
        }
        Ok(())
    }
}

/// The diagonal `2^n × 2^n` matrix of the Hamiltonian.
pub fn qubo_dense(q: &Qubo) -> Result<DenseOperator> {
    qubo_dense_with_limit(q, DEFAULT_DENSE_LIMIT)
}

pub fn qubo_dense_with_limit(q: &Qubo, limit: usize) -> Result<DenseOperator> {
    q.check()?;
    let dim = 1usize.checked_shl(q.n as u32).filter(|&d| d <= limit).ok_or(Error::OracleTooLarge {
        dim: 1usize.checked_shl(q.n as u32).unwrap_or(usize::MAX),
        limit,
    })?;
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    let mut z = vec![0u8; q.n];
    for x in 0..dim {
        for (i, bit) in z.iter_mut().enumerate() {
            *bit = ((x >> (q.n - 1 - i)) & 1) as u8;
        }
        m[(x, x)] = C64::new(q.energy(&z), 0.0);
    }
    let regs: Vec<RegisterDesc> = (0..q.n).map(|v| RegisterDesc::new(RegisterId::Physical(v), 2)).collect();
    DenseOperator::square(m, regs)
}

/// Slot usage of the register sweep along an order.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotPlan {
    pub order: Vec<usize>,
    /// Most qubits stored at once.
    pub s: usize,
    /// Slot (0-based) of every qubit that is stored for a later partner.
    pub slots: BTreeMap<usize, usize>,
}

fn check_order(order: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &v in order {
        if v >= n || seen[v] {
            return Err(Error::BadOrder(format!("{order:?} is not a permutation of 0..{n}")));
        }
        seen[v] = true;
    }
    if order.len() != n {
        return Err(Error::BadOrder(format!("{order:?} is not a permutation of 0..{n}")));
    }
    Ok(())
}

/// Per-position range during which a qubit occupies a slot: from its own
/// position up to (excluding) the position of its last later partner.
fn storage_spans(q: &Qubo, order: &[usize]) -> Vec<Option<(usize, usize)>> {
    let mut pos = vec![0; q.n];
    for (t, &v) in order.iter().enumerate() {
        pos[v] = t;
    }
    let adj = q.adjacency();
    (0..q.n)
        .map(|i| {
            let last = adj[i].iter().map(|&j| pos[j]).filter(|&p| p > pos[i]).max()?;
            Some((pos[i], last))
        })
        .collect()
}

/// Counts how many qubits must be held in slots across each cut of the
/// order and assigns slots, reusing freed slots lowest first.
pub fn slot_requirement(q: &Qubo, order: &[usize]) -> Result<SlotPlan> {
    q.check()?;
    check_order(order, q.n)?;
    let spans = storage_spans(q, order);
    let mut slots = BTreeMap::new();
    let mut in_use: BTreeMap<usize, usize> = BTreeMap::new(); // slot -> qubit
    let mut s = 0;
    for (t, &v) in order.iter().enumerate() {
        in_use.retain(|_, &mut i| spans[i].is_some_and(|(_, last)| last > t));
        if spans[v].is_some() {
            let free = (0..).find(|x| !in_use.contains_key(x)).expect("unbounded");
            in_use.insert(free, v);
            slots.insert(v, free);
        }
        s = s.max(in_use.len());
    }
    Ok(SlotPlan { order: order.to_vec(), s, slots })
}

type Op2 = [[f64; 2]; 2];
const I2: Op2 = [[1.0, 0.0], [0.0, 1.0]];
const Z2: Op2 = [[1.0, 0.0], [0.0, -1.0]];

fn lin(a: f64, x: Op2, b: f64, y: Op2) -> Op2 {
    let mut out = [[0.0; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a * x[r][c] + b * y[r][c];
        }
    }
    out
}

fn scaled(a: f64, x: Op2) -> Op2 {
    lin(a, x, 0.0, x)
}

/// Site tensor with legs `[bonds..., phys_out, phys_in]` from a function of
/// the bond multi-index.
fn operator_site(id: usize, bonds: &[(usize, usize)], f: impl Fn(&[usize]) -> Option<Op2>) -> SiteTensor {
    let mut legs: Vec<Leg> = bonds.iter().map(|&(e, dim)| Leg::bond(e, dim)).collect();
    legs.push(Leg::phys_out(2));
    legs.push(Leg::phys_in(2));
    let dims: Vec<usize> = bonds.iter().map(|b| b.1).collect();
    let count: usize = dims.iter().product();
    let mut data = Vec::with_capacity(count * 4);
    for x in 0..count {
        let idx = crate::linalg::unravel(x, &dims);
        let op = f(&idx).unwrap_or([[0.0; 2]; 2]);
        for row in op {
            data.extend(row.iter().map(|&v| C64::new(v, 0.0)));
        }
    }
    SiteTensor::new(id, legs, data)
}

/// Chain MPO that sweeps the order once, holding `Z_i` of qubits that still
/// await a coupling partner in dedicated slots.
///
/// Bond channels: `0` means every factor of the term is placed, `1..=s` hold
/// a stored `Z_i`, and `s + 1` means nothing has been placed yet. The
/// position-0 site only has the row of its left boundary `|0⟩` (filled with
/// the content of the `s + 1` row) and the last site only keeps column `0`,
/// so both external bonds close on `|0⟩`. Edge `0` is the left external bond,
/// edges `1..n` link consecutive positions and edge `n` is the right external
/// bond.
pub fn register_sweep_mpo(q: &Qubo, order: &[usize]) -> Result<TensorNetwork> {
    let plan = slot_requirement(q, order)?;
    let n = q.n;
    let s = plan.s;
    let dim = s + 2;
    let spans = storage_spans(q, order);
    let mut pos = vec![0; n];
    for (t, &v) in order.iter().enumerate() {
        pos[v] = t;
    }

    let mut tn = TensorNetwork::new(2);
    for (t, &x) in order.iter().enumerate() {
        // generic block W[l][r]
        let w = |l: usize, r: usize| -> Option<Op2> {
            let start = s + 1;
            let slot_of = |i: usize| plan.slots.get(&i).map(|&k| k + 1);
            if l == 0 && r == 0 {
                return Some(I2);
            }
            if l == start {
                if r == start {
                    return Some(I2);
                }
                if r == 0 {
                    let c = if t == 0 { q.c_const } else { 0.0 };
                    return Some(lin(c, I2, q.linear[x], Z2));
                }
                if spans[x].is_some() && slot_of(x) == Some(r) {
                    return Some(Z2);
                }
                return None;
            }
            // l is a slot: which stored qubit is in it on the left bond?
            let i = (0..n).find(|&i| {
                slot_of(i) == Some(l) && spans[i].is_some_and(|(first, last)| first < t && t <= last)
            })?;
            if r == 0 {
                let a = q.alpha(i, x);
                return (a != 0.0).then(|| scaled(a, Z2));
            }
            if r == l && spans[i].is_some_and(|(_, last)| last > t) {
                return Some(I2);
            }
            None
        };

        let first = t == 0;
        let last = t + 1 == n;
        let site = operator_site(x, &[(t, dim), (t + 1, dim)], |idx| {
            let (l, r) = (idx[0], idx[1]);
            if last && r != 0 {
                return None;
            }
            if first {
                // only the boundary row, carrying the "nothing placed" row
                return if l == 0 { w(s + 1, r) } else { None };
            }
            w(l, r)
        });
        tn.vertices.push(site);
    }
    tn.edges.push(Edge::external(0, order[0], dim));
    for t in 1..n {
        tn.edges.push(Edge::internal(t, order[t - 1], order[t], dim));
    }
    tn.edges.push(Edge::external(n, order[n - 1], dim));
    tn.boundary.insert(n, Boundary::basis(Side::Out, dim, 0));
    Ok(tn)
}

/// The nonzero Pauli strings of the Hamiltonian, constant first, then linear
/// terms by site, then couplings in lexicographic order. Each string is the
/// set of qubits carrying `Z` plus its coefficient.
pub fn pauli_terms(q: &Qubo) -> Vec<(Vec<usize>, f64)> {
    let mut terms = Vec::new();
    if q.c_const != 0.0 {
        terms.push((Vec::new(), q.c_const));
    }
    for (i, &l) in q.linear.iter().enumerate() {
        if l != 0.0 {
            terms.push((vec![i], l));
        }
    }
    for (&(i, j), &a) in &q.quadratic {
        terms.push((vec![i, j], a));
    }
    terms
}

/// Block-diagonal chain MPO: bond index `j` selects term `j`, site 0 carries
/// its coefficient, and the bond is closed into a trace by a cyclic edge
/// between the last and the first site.
pub fn tensor_sum_mpo(q: &Qubo) -> Result<TensorNetwork> {
    q.check()?;
    if q.n == 0 {
        return Err(Error::EmptyOperator);
    }
    let terms = pauli_terms(q);
    let l = terms.len();
    if l == 0 {
        return Err(Error::EmptyOperator);
    }
    let n = q.n;
    let mut tn = TensorNetwork::new(2);
    for t in 0..n {
        let left = if t == 0 { n - 1 } else { t - 1 };
        let right = t.min(n - 1);
        let site = operator_site(t, &[(left, l), (right, l)], |idx| {
            if idx[0] != idx[1] {
                return None;
            }
            let (support, coeff) = &terms[idx[0]];
            let p = if support.contains(&t) { Z2 } else { I2 };
            Some(if t == 0 { scaled(*coeff, p) } else { p })
        });
        tn.vertices.push(site);
    }
    for t in 0..n.saturating_sub(1) {
        tn.edges.push(Edge::internal(t, t, t + 1, l));
    }
    tn.edges.push(Edge::cyclic(n - 1, n - 1, 0, l));
    Ok(tn)
}

/// Network on the coupling graph itself.
///
/// Every coupling `(i, j)` gets a dimension-2 request bond, and consecutive
/// sites are linked by a dimension-2 accumulator bit that flips from 0 to 1
/// at exactly one emitting site. The emitter contributes either
/// `c_t I + l_t Z` or, by raising the request to one later neighbour `v`,
/// `α_tv Z`; the neighbour answers a single incoming request with `Z`. When
/// an accumulator link joins two coupled sites the two bits share one bond
/// of dimension 4 (accumulator bit most significant). Edges are numbered
/// links first (`t` joins `t` and `t + 1`), then the remaining couplings in
/// lexicographic order.
///
/// `split` gives the per-site constants `c_t`; `None` spreads `c_const`
/// evenly.
pub fn tensor_graph(q: &Qubo, split: Option<&[f64]>, limit: usize) -> Result<TensorNetwork> {
    q.check()?;
    let n = q.n;
    if n == 0 {
        return Err(Error::EmptyOperator);
    }
    let consts: Vec<f64> = match split {
        Some(c) => {
            if c.len() != n {
                return Err(Error::ShapeMismatch(format!("{} constants for {n} sites", c.len())));
            }
            let total: f64 = c.iter().sum();
            if (total - q.c_const).abs() > 1e-12 * q.c_const.abs().max(1.0) {
                return Err(Error::InvalidArgument(format!("constants sum to {total}, expected {}", q.c_const)));
            }
            c.to_vec()
        }
        None => vec![q.c_const / n as f64; n],
    };

    // edge id -> (u, v, has accumulator, has request)
    let mut edges: Vec<(usize, usize, bool, bool)> = Vec::new();
    for t in 0..n.saturating_sub(1) {
        edges.push((t, t + 1, true, q.alpha(t, t + 1) != 0.0));
    }
    for &(i, j) in q.quadratic.keys() {
        if j != i + 1 {
            edges.push((i, j, false, true));
        }
    }
    let dim_of = |e: &(usize, usize, bool, bool)| if e.2 && e.3 { 4 } else { 2 };

    let mut tn = TensorNetwork::new(2);
    for t in 0..n {
        let incident: Vec<usize> = (0..edges.len()).filter(|&e| edges[e].0 == t || edges[e].1 == t).collect();
        let bonds: Vec<(usize, usize)> = incident.iter().map(|&e| (e, dim_of(&edges[e]))).collect();
        let size: usize = bonds.iter().map(|b| b.1).product::<usize>() * 2;
        if size > limit {
            return Err(Error::OracleTooLarge { dim: size, limit });
        }
        let site = operator_site(t, &bonds, |idx| {
            let mut a_in = 0;
            let mut a_out = if t + 1 == n { 1 } else { 0 };
            let mut earlier = Vec::new(); // request bits from earlier neighbours
            let mut later = Vec::new(); // (neighbour, request bit) for later neighbours
            for (&e, &x) in incident.iter().zip(idx) {
                let (u, v, acc, req) = edges[e];
                let (acc_bit, req_bit) = match (acc, req) {
                    (true, true) => (x / 2, x % 2),
                    (true, false) => (x, 0),
                    _ => (0, x),
                };
                let other = if u == t { v } else { u };
                if acc {
                    if other < t {
                        a_in = acc_bit;
                    } else {
                        a_out = acc_bit;
                    }
                }
                if req {
                    if other < t {
                        earlier.push(req_bit);
                    } else {
                        later.push((other, req_bit));
                    }
                }
            }
            let raised_later: Vec<usize> = later.iter().filter(|l| l.1 == 1).map(|l| l.0).collect();
            let raised_earlier = earlier.iter().filter(|&&b| b == 1).count();
            match (a_in, a_out) {
                (0, 1) => {
                    if raised_earlier > 0 {
                        return None;
                    }
                    match raised_later.as_slice() {
                        [] => Some(lin(consts[t], I2, q.linear[t], Z2)),
                        [v] => Some(scaled(q.alpha(t, *v), Z2)),
                        _ => None,
                    }
                }
                (a, b) if a == b => {
                    if !raised_later.is_empty() {
                        return None;
                    }
                    match raised_earlier {
                        0 => Some(I2),
                        1 => Some(Z2),
                        _ => None,
                    }
                }
                _ => None,
            }
        });
        tn.vertices.push(site);
    }
    for (id, e) in edges.iter().enumerate() {
        tn.edges.push(Edge::internal(id, e.0, e.1, dim_of(e)));
    }
    Ok(tn)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderHeuristic {
    Natural,
    MinDegree,
    MinFill,
}

impl std::str::FromStr for OrderHeuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "natural" => Ok(Self::Natural),
            "min_degree" => Ok(Self::MinDegree),
            "min_fill" => Ok(Self::MinFill),
            _ => Err(Error::InvalidArgument(format!("unknown order heuristic {s:?}"))),
        }
    }
}

/// Elimination order of the coupling graph. Eliminating a vertex joins its
/// remaining neighbours; ties go to the lowest id.
pub fn suggest_order(q: &Qubo, heuristic: OrderHeuristic) -> Vec<usize> {
    if heuristic == OrderHeuristic::Natural {
        return (0..q.n).collect();
    }
    let mut adj = q.adjacency();
    let mut alive: BTreeSet<usize> = (0..q.n).collect();
    let mut order = Vec::with_capacity(q.n);
    while !alive.is_empty() {
        let score = |v: usize| -> usize {
            match heuristic {
                OrderHeuristic::MinDegree => adj[v].len(),
                _ => {
                    let nb: Vec<usize> = adj[v].iter().copied().collect();
                    let mut missing = 0;
                    for (a, &x) in nb.iter().enumerate() {
                        for &y in &nb[a + 1..] {
                            if !adj[x].contains(&y) {
                                missing += 1;
                            }
                        }
                    }
                    missing
                }
            }
        };
        let v = *alive.iter().min_by_key(|&&v| (score(v), v)).expect("non-empty");
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        for &x in &nb {
            adj[x].remove(&v);
            for &y in &nb {
                if x != y {
                    adj[x].insert(y);
                }
            }
        }
        adj[v].clear();
        alive.remove(&v);
        order.push(v);
    }
    order
}
