//! Brute-force dense contraction of a whole network. This is the reference
//! every compiled block-encoding is checked against.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{self, permute_axes};
use crate::network::{validate_network, LegKind, SiteTensor, TensorNetwork};
use crate::operator::{DenseOperator, RegisterDesc, RegisterId};
use crate::{C64, DEFAULT_DENSE_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Label {
    Out(usize),
    In(usize),
    Bond(usize),
}

/// A dense tensor with one label per axis, row-major.
#[derive(Debug, Clone)]
struct Labeled {
    labels: Vec<Label>,
    dims: Vec<usize>,
    data: Vec<C64>,
}

impl Labeled {
    fn scalar(z: C64) -> Self {
        Self { labels: Vec::new(), dims: Vec::new(), data: vec![z] }
    }

    fn from_site(site: &SiteTensor) -> Self {
        let labels = site
            .legs
            .iter()
            .map(|l| match l.kind {
                LegKind::PhysOut => Label::Out(site.id),
                LegKind::PhysIn => Label::In(site.id),
                LegKind::Bond(e) => Label::Bond(e),
            })
            .collect();
        Self { labels, dims: site.dims(), data: site.data.clone() }
    }

    fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            labels: perm.iter().map(|&a| self.labels[a]).collect(),
            dims: perm.iter().map(|&a| self.dims[a]).collect(),
            data: permute_axes(&self.data, &self.dims, perm),
        }
    }

    /// Contracts axis `axis` with the vector `w`.
    fn absorb_vector(&self, axis: usize, w: &[C64]) -> Self {
        let mut perm: Vec<usize> = (0..self.labels.len()).filter(|&a| a != axis).collect();
        perm.push(axis);
        let t = self.permuted(&perm);
        let dim = self.dims[axis];
        let data = t.data.chunks(dim).map(|row| row.iter().zip(w).map(|(a, b)| a * b).sum()).collect();
        Self { labels: t.labels[..t.labels.len() - 1].to_vec(), dims: t.dims[..t.dims.len() - 1].to_vec(), data }
    }

    /// Fixes axis `axis` to `index`, dropping it.
    fn fix(&self, axis: usize, index: usize) -> Self {
        let mut perm = vec![axis];
        perm.extend((0..self.labels.len()).filter(|&a| a != axis));
        let t = self.permuted(&perm);
        let stride = t.data.len() / self.dims[axis];
        Self {
            labels: t.labels[1..].to_vec(),
            dims: t.dims[1..].to_vec(),
            data: t.data[index * stride..(index + 1) * stride].to_vec(),
        }
    }

    /// Sums the diagonal of two axes carrying the same bond (a self-loop).
    fn trace_pair(&self, a: usize, b: usize) -> Self {
        let mut perm: Vec<usize> = (0..self.labels.len()).filter(|&x| x != a && x != b).collect();
        perm.push(a);
        perm.push(b);
        let t = self.permuted(&perm);
        let dim = self.dims[a];
        let data = t.data.chunks(dim * dim).map(|block| (0..dim).map(|i| block[i * dim + i]).sum()).collect();
        let keep = t.labels.len() - 2;
        Self { labels: t.labels[..keep].to_vec(), dims: t.dims[..keep].to_vec(), data }
    }

    /// Pairwise contraction over every bond label the two tensors share.
    fn contract(&self, other: &Self) -> Self {
        let shared: Vec<Label> = self.labels.iter().filter(|l| other.labels.contains(l)).copied().collect();
        let pos = |t: &Self, l: Label| t.labels.iter().position(|&x| x == l).expect("label present");
        let free_a: Vec<usize> = (0..self.labels.len()).filter(|&a| !shared.contains(&self.labels[a])).collect();
        let free_b: Vec<usize> = (0..other.labels.len()).filter(|&a| !shared.contains(&other.labels[a])).collect();

        let perm_a: Vec<usize> = free_a.iter().copied().chain(shared.iter().map(|&l| pos(self, l))).collect();
        let perm_b: Vec<usize> = shared.iter().map(|&l| pos(other, l)).chain(free_b.iter().copied()).collect();
        let a = self.permuted(&perm_a);
        let b = other.permuted(&perm_b);

        let k: usize = shared.iter().map(|&l| self.dims[pos(self, l)]).product();
        let rows: usize = free_a.iter().map(|&x| self.dims[x]).product();
        let cols: usize = free_b.iter().map(|&x| other.dims[x]).product();
        let ma = linalg::matrix_from_row_major(rows, k, &a.data);
        let mb = linalg::matrix_from_row_major(k, cols, &b.data);
        let prod = ma * mb;

        Self {
            labels: free_a.iter().map(|&x| self.labels[x]).chain(free_b.iter().map(|&x| other.labels[x])).collect(),
            dims: free_a.iter().map(|&x| self.dims[x]).chain(free_b.iter().map(|&x| other.dims[x])).collect(),
            data: linalg::row_major(&prod),
        }
    }
}

/// Contracts the network into a `d^|V| × d^|V|` matrix, rows indexed by the
/// output physical legs and columns by the input physical legs, vertices in
/// ascending id order (lowest id most significant). External bonds are
/// closed with their boundary states and cyclic bonds are traced.
pub fn contract_dense(tn: &TensorNetwork) -> Result<DenseOperator> {
    contract_dense_with_limit(tn, DEFAULT_DENSE_LIMIT)
}

pub fn contract_dense_with_limit(tn: &TensorNetwork, limit: usize) -> Result<DenseOperator> {
    validate_network(tn).into_result()?;
    let ids = tn.vertex_ids();
    let dim = tn.d.checked_pow(ids.len() as u32).unwrap_or(usize::MAX);
    if dim > limit {
        return Err(Error::OracleTooLarge { dim, limit });
    }

    let boundary: BTreeMap<usize, Vec<C64>> = tn
        .edges
        .iter()
        .filter(|e| e.is_external())
        .map(|e| (e.id, tn.boundary_of(e).contraction_weights()))
        .collect();

    // each site with its input leg fixed to every basis value
    let mut slices: Vec<Vec<Labeled>> = Vec::with_capacity(ids.len());
    for &v in &ids {
        let site = tn.vertex(v).expect("validated");
        let mut t = Labeled::from_site(site);
        while let Some(axis) = t.labels.iter().position(|l| matches!(l, Label::Bond(e) if boundary.contains_key(e))) {
            let Label::Bond(e) = t.labels[axis] else { unreachable!() };
            t = t.absorb_vector(axis, &boundary[&e]);
        }
        while let Some((a, b)) = self_loop(&t.labels) {
            t = t.trace_pair(a, b);
        }
        let axis = t.labels.iter().position(|&l| l == Label::In(v)).expect("validated");
        slices.push((0..tn.d).map(|x| t.fix(axis, x)).collect());
    }

    let order = contraction_order(&slices);

    // one input basis column at a time keeps intermediates free of input legs
    let mut matrix = nalgebra::DMatrix::<C64>::zeros(dim, dim);
    for col in 0..dim {
        let digits = linalg::unravel(col, &vec![tn.d; ids.len()]);
        let mut acc = Labeled::scalar(C64::new(1.0, 0.0));
        for &i in &order {
            acc = acc.contract(&slices[i][digits[i]]);
        }
        let perm: Vec<usize> = ids
            .iter()
            .map(|&v| acc.labels.iter().position(|&l| l == Label::Out(v)).expect("physical legs survive"))
            .collect();
        for (row, z) in permute_axes(&acc.data, &acc.dims, &perm).into_iter().enumerate() {
            matrix[(row, col)] = z;
        }
    }
    let regs: Vec<RegisterDesc> = ids.iter().map(|&v| RegisterDesc::new(RegisterId::Physical(v), tn.d)).collect();
    DenseOperator::new(matrix, regs.clone(), regs)
}

/// Greedy site order: each step takes the site that leaves the fewest open
/// bond entries, ties to the earliest site.
fn contraction_order(slices: &[Vec<Labeled>]) -> Vec<usize> {
    let mut open: Vec<(Label, usize)> = Vec::new();
    let mut left: Vec<usize> = (0..slices.len()).collect();
    let mut order = Vec::with_capacity(slices.len());
    while !left.is_empty() {
        let after = |i: usize| -> Vec<(Label, usize)> {
            let t = &slices[i][0];
            let mut next: Vec<(Label, usize)> = open.iter().filter(|(l, _)| !t.labels.contains(l)).copied().collect();
            for (l, &dim) in t.labels.iter().zip(&t.dims) {
                if matches!(l, Label::Bond(_)) && !open.iter().any(|(x, _)| x == l) {
                    next.push((*l, dim));
                }
            }
            next
        };
        let size = |bonds: &[(Label, usize)]| bonds.iter().map(|b| b.1 as f64).product::<f64>();
        let (pos, _) = left
            .iter()
            .enumerate()
            .map(|(pos, &i)| (pos, size(&after(i))))
            .fold((0, f64::INFINITY), |best, cand| if cand.1 < best.1 { cand } else { best });
        let i = left.remove(pos);
        open = after(i);
        order.push(i);
    }
    order
}

fn self_loop(labels: &[Label]) -> Option<(usize, usize)> {
    for a in 0..labels.len() {
        if let Label::Bond(_) = labels[a] {
            if let Some(b) = (a + 1..labels.len()).find(|&b| labels[b] == labels[a]) {
                return Some((a, b));
            }
        }
    }
    None
}
