#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tnbe::{Boundary, Edge, Leg, LegKind, Side, SiteTensor, TensorNetwork, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_c(rng: &mut impl Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn rand_unit(rng: &mut impl Rng, dim: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..dim).map(|_| rand_c(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

pub fn rand_matrix(rng: &mut impl Rng, m: usize, n: usize) -> DMatrix<C64> {
    DMatrix::from_fn(m, n, |_, _| rand_c(rng))
}

/// `(u, Some(v), dim)` for internal bonds, `(u, None, dim)` for external
/// ones. Legs are shuffled so unfoldings must permute axes.
pub fn random_network(rng: &mut impl Rng, n: usize, edges: &[(usize, Option<usize>, usize)]) -> TensorNetwork {
    let mut tn = TensorNetwork::new(2);
    for v in 0..n {
        let mut legs = vec![Leg::phys_out(2), Leg::phys_in(2)];
        for (id, &(a, b, dim)) in edges.iter().enumerate() {
            if a == v || b == Some(v) {
                legs.push(Leg::bond(id, dim));
            }
        }
        legs.shuffle(rng);
        let size: usize = legs.iter().map(|l| l.dim).product();
        let data = (0..size).map(|_| rand_c(rng)).collect();
        tn.vertices.push(SiteTensor::new(v, legs, data));
    }
    for (id, &(a, b, dim)) in edges.iter().enumerate() {
        tn.edges.push(Edge { id, u: a, v: b, dim, cyclic: false });
        if b.is_none() {
            let side = if rng.random_bool(0.5) { Side::In } else { Side::Out };
            tn.boundary.insert(id, Boundary { side, state: rand_unit(rng, dim) });
        }
    }
    tn
}

pub fn chain_edges(dims: &[usize]) -> Vec<(usize, Option<usize>, usize)> {
    dims.iter().enumerate().map(|(i, &dim)| (i, Some(i + 1), dim)).collect()
}

/// `H[out, in] = Σ over every bond index of Π_v A_v`, by explicit loops.
pub fn nested_loop_contract(tn: &TensorNetwork) -> DMatrix<C64> {
    let d = tn.d;
    let mut ids: Vec<usize> = tn.vertices.iter().map(|s| s.id).collect();
    ids.sort();
    let nv = ids.len();
    let dim = d.pow(nv as u32);
    let edge_dims: Vec<usize> = tn.edges.iter().map(|e| e.dim).collect();
    let bond_count: usize = edge_dims.iter().product();
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    for row in 0..dim {
        for col in 0..dim {
            let digit = |x: usize, v: usize| {
                let pos = ids.iter().position(|&i| i == v).unwrap();
                (x / d.pow((nv - 1 - pos) as u32)) % d
            };
            let mut acc = C64::new(0.0, 0.0);
            for b in 0..bond_count {
                // bond index per edge, first edge most significant
                let mut rest = b;
                let mut bond = vec![0; edge_dims.len()];
                for (slot, &ed) in bond.iter_mut().zip(&edge_dims).rev() {
                    *slot = rest % ed;
                    rest /= ed;
                }
                let mut term = C64::new(1.0, 0.0);
                for (ei, e) in tn.edges.iter().enumerate() {
                    if e.v.is_none() {
                        let bnd = tn.boundary.get(&e.id).cloned().unwrap_or_else(|| Boundary::zero(e.dim));
                        let w = bnd.state[bond[ei]];
                        term *= if bnd.side == Side::In { w } else { w.conj() };
                    }
                }
                for site in &tn.vertices {
                    let mut flat = 0;
                    for leg in &site.legs {
                        let x = match leg.kind {
                            LegKind::PhysOut => digit(row, site.id),
                            LegKind::PhysIn => digit(col, site.id),
                            LegKind::Bond(e) => bond[tn.edges.iter().position(|x| x.id == e).unwrap()],
                        };
                        flat = flat * leg.dim + x;
                    }
                    term *= site.data[flat];
                }
                acc += term;
            }
            h[(row, col)] = acc;
        }
    }
    h
}

pub fn spectral(m: &DMatrix<C64>) -> f64 {
    m.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}
