mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use tnbe::qubo::{qubo_dense, register_sweep_mpo, slot_requirement, suggest_order, tensor_graph, tensor_sum_mpo, OrderHeuristic};
use tnbe::{compile, contract_dense, verify_block_encoding, CompileOptions, Error, Qubo, TensorNetwork, DEFAULT_DENSE_LIMIT};

fn random_qubo(r: &mut impl Rng, n: usize, density: f64) -> Qubo {
    let mut q = Qubo::new(n);
    q.c_const = r.random_range(-1.0..1.0);
    q.linear = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
    for i in 0..n {
        for j in i + 1..n {
            if r.random_bool(density) {
                q.add_coupling(i, j, r.random_range(-1.0..1.0)).unwrap();
            }
        }
    }
    q
}

/// Energies of every bit string, qubit 0 most significant.
fn energies(q: &Qubo) -> Vec<f64> {
    (0..1usize << q.n)
        .map(|x| {
            let z: Vec<u8> = (0..q.n).map(|i| ((x >> (q.n - 1 - i)) & 1) as u8).collect();
            q.energy(&z)
        })
        .collect()
}

fn assert_diagonal(tn: &TensorNetwork, q: &Qubo) {
    let h = contract_dense(tn).unwrap().matrix;
    let e = energies(q);
    for r in 0..h.nrows() {
        for c in 0..h.ncols() {
            let want = if r == c { e[r] } else { 0.0 };
            assert!((h[(r, c)].re - want).abs() < 1e-12 && h[(r, c)].im.abs() < 1e-12, "entry ({r}, {c})");
        }
    }
}

fn random_order(r: &mut impl Rng, n: usize) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(r);
    order
}

/// Largest number of qubits stored across any cut, by direct counting.
fn stored_peak(q: &Qubo, order: &[usize]) -> usize {
    let mut pos = vec![0; q.n];
    for (t, &v) in order.iter().enumerate() {
        pos[v] = t;
    }
    let adj = q.adjacency();
    (0..q.n)
        .map(|t| {
            (0..q.n)
                .filter(|&i| pos[i] <= t && adj[i].iter().any(|&j| pos[j] > t))
                .count()
        })
        .max()
        .unwrap_or(0)
}

#[test]
fn dense_qubo_matches_energies() {
    let mut r = rng(40);
    let q = random_qubo(&mut r, 4, 0.5);
    let h = qubo_dense(&q).unwrap().matrix;
    for (x, e) in energies(&q).into_iter().enumerate() {
        assert!((h[(x, x)].re - e).abs() < 1e-12);
    }
}

#[test]
fn binary_form_matches_direct_evaluation() {
    let m = vec![vec![1.0, -2.0, 0.5], vec![0.0, 3.0, 1.0], vec![0.0, 0.0, -1.5]];
    let q = Qubo::from_binary_matrix(&m, 0.25).unwrap();
    for x in 0..8usize {
        let bits: Vec<u8> = (0..3).map(|i| ((x >> (2 - i)) & 1) as u8).collect();
        let mut direct = 0.25;
        for i in 0..3 {
            for j in i..3 {
                direct += m[i][j] * (bits[i] * bits[j]) as f64;
            }
        }
        assert!((q.energy(&bits) - direct).abs() < 1e-12);
    }
}

#[test]
fn register_sweep_matches_energies() {
    let mut r = rng(41);
    for n in 1..6 {
        for _ in 0..3 {
            let q = random_qubo(&mut r, n, 0.6);
            let order = random_order(&mut r, n);
            let tn = register_sweep_mpo(&q, &order).unwrap();
            assert_diagonal(&tn, &q);
            let s = slot_requirement(&q, &order).unwrap().s;
            assert_eq!(s, stored_peak(&q, &order));
            for e in tn.edges.iter().filter(|e| e.v.is_some()) {
                assert_eq!(e.dim, s + 2);
            }
        }
    }
}

#[test]
fn register_sweep_is_order_invariant() {
    let mut r = rng(42);
    let q = random_qubo(&mut r, 5, 0.5);
    let reference = contract_dense(&register_sweep_mpo(&q, &[0, 1, 2, 3, 4]).unwrap()).unwrap().matrix;
    for _ in 0..5 {
        let order = random_order(&mut r, 5);
        let h = contract_dense(&register_sweep_mpo(&q, &order).unwrap()).unwrap().matrix;
        assert!(spectral(&(h - &reference)) < 1e-12);
    }
}

#[test]
fn tensor_sum_matches_energies() {
    let mut r = rng(43);
    for n in 1..5 {
        let q = random_qubo(&mut r, n, 0.7);
        assert_diagonal(&tensor_sum_mpo(&q).unwrap(), &q);
    }
    assert!(matches!(tensor_sum_mpo(&Qubo::new(0)), Err(Error::EmptyOperator)));
}

#[test]
fn tensor_graph_matches_energies() {
    let mut r = rng(44);
    for n in 1..6 {
        let q = random_qubo(&mut r, n, 0.6);
        assert_diagonal(&tensor_graph(&q, None, DEFAULT_DENSE_LIMIT).unwrap(), &q);
        let split: Vec<f64> = (0..n).map(|t| if t == 0 { q.c_const } else { 0.0 }).collect();
        assert_diagonal(&tensor_graph(&q, Some(&split), DEFAULT_DENSE_LIMIT).unwrap(), &q);
    }
}

#[test]
fn tensor_graph_rejects_oversized_sites() {
    let mut q = Qubo::new(12);
    for j in 1..12 {
        q.add_coupling(0, j, 1.0).unwrap();
    }
    assert!(matches!(tensor_graph(&q, None, 64), Err(Error::OracleTooLarge { .. })));
}

#[test]
fn register_sweep_compiles_and_verifies() {
    let mut r = rng(45);
    for n in 2..5 {
        let q = random_qubo(&mut r, n, 0.7);
        let order = suggest_order(&q, OrderHeuristic::MinFill);
        let tn = register_sweep_mpo(&q, &order).unwrap();
        let res = compile(&tn, &CompileOptions::default()).unwrap().encoded().unwrap();
        assert!(verify_block_encoding(&tn, &res, 1e-10).unwrap().pass);
    }
}

#[test]
fn tensor_graph_compiles_and_verifies() {
    let mut r = rng(46);
    for n in 2..5 {
        let q = random_qubo(&mut r, n, 0.7);
        let tn = tensor_graph(&q, None, DEFAULT_DENSE_LIMIT).unwrap();
        let res = compile(&tn, &CompileOptions::default()).unwrap().encoded().unwrap();
        assert!(verify_block_encoding(&tn, &res, 1e-10).unwrap().pass);
    }
}

#[test]
fn orders_are_permutations() {
    let mut r = rng(47);
    let q = random_qubo(&mut r, 7, 0.4);
    for h in [OrderHeuristic::Natural, OrderHeuristic::MinDegree, OrderHeuristic::MinFill] {
        let mut order = suggest_order(&q, h);
        order.sort();
        assert_eq!(order, (0..7).collect::<Vec<_>>());
    }
    // leaves go first until the hub ties with the last leaf
    let mut star = Qubo::new(4);
    for j in 1..4 {
        star.add_coupling(0, j, 1.0).unwrap();
    }
    assert_eq!(suggest_order(&star, OrderHeuristic::MinDegree), vec![1, 2, 0, 3]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn slot_count_matches_cut_count(seed in any::<u64>(), n in 1usize..9, density in 0.0f64..1.0) {
        let mut r = rng(seed);
        let q = random_qubo(&mut r, n, density);
        let order = random_order(&mut r, n);
        let plan = slot_requirement(&q, &order).unwrap();
        prop_assert_eq!(plan.s, stored_peak(&q, &order));
        prop_assert!(plan.slots.values().all(|&x| x < plan.s.max(1)));
    }
}
