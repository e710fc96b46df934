//! Dense checks of a compiled sequence: global composition, post-selected
//! block extraction, comparison with the contraction oracle, success
//! probabilities, the local-error bound, and the block-product check for
//! sequential flag dilation.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::contract::contract_dense_with_limit;
use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, unitarity_error, unravel};
use crate::network::TensorNetwork;
use crate::operator::{DenseOperator, RegisterDesc, RegisterId};
use crate::sim::Sim;
use crate::sweep::{CompilationResult, RegisterKind, RegisterLayout};
use crate::{C64, DEFAULT_DENSE_LIMIT};

/// Default pass threshold for block and unitarity errors.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Upper bound on the number of amplitudes the simulator may hold at once,
/// relative to the dense limit (`limit²`, i.e. a full dense operator).
fn amplitude_budget(limit: usize) -> usize {
    limit.saturating_mul(limit)
}

/// Product of all operators on the full register space, identity on
/// untouched registers. Fails when the space exceeds `limit`.
pub fn compose_global(result: &CompilationResult) -> Result<DenseOperator> {
    compose_global_with_limit(result, DEFAULT_DENSE_LIMIT)
}

pub fn compose_global_with_limit(result: &CompilationResult, limit: usize) -> Result<DenseOperator> {
    let regs: Vec<(RegisterId, usize)> = result.layout.registers.iter().map(|r| (r.id, r.dim)).collect();
    let total: usize = regs.iter().map(|r| r.1).product();
    if total > limit {
        return Err(Error::OracleTooLarge { dim: total, limit });
    }
    let mut sim = Sim::identity(regs, total)?;
    for op in &result.ops {
        sim.apply(&op.register_ids(), &op.matrix)?;
    }
    let ids: Vec<RegisterId> = result.layout.registers.iter().map(|r| r.id).collect();
    let descs: Vec<RegisterDesc> = result.layout.registers.iter().map(|r| r.desc()).collect();
    DenseOperator::square(sim.into_matrix(&ids)?, descs)
}

/// `B = (⟨targets| ⊗ I) U (|prepared⟩ ⊗ I)` on the physical registers.
pub fn project_encoded_block(u: &DenseOperator, layout: &RegisterLayout) -> Result<DenseOperator> {
    let dims: Vec<usize> = layout.registers.iter().map(|r| r.dim).collect();
    let total: usize = dims.iter().product();
    if u.matrix.nrows() != total || u.matrix.ncols() != total {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} operator for a layout of size {total}",
            u.matrix.nrows(),
            u.matrix.ncols()
        )));
    }
    let phys: Vec<RegisterDesc> = layout.physical().map(|r| r.desc()).collect();
    let n_phys: usize = phys.iter().map(|r| r.dim).product();

    // for each global index: (physical index, ancilla weight on each side)
    let split = |g: usize, ket: bool| -> (usize, C64) {
        let digits = unravel(g, &dims);
        let mut p = 0;
        let mut w = C64::new(1.0, 0.0);
        for (r, &x) in layout.registers.iter().zip(&digits) {
            if r.kind == RegisterKind::Physical {
                p = p * r.dim + x;
            } else if ket {
                w *= r.prepare[x];
            } else {
                w *= r.target[x].conj();
            }
        }
        (p, w)
    };
    let rows: Vec<(usize, C64)> = (0..total).map(|g| split(g, false)).collect();
    let cols: Vec<(usize, C64)> = (0..total).map(|g| split(g, true)).collect();

    let mut b = DMatrix::<C64>::zeros(n_phys, n_phys);
    for (gc, &(pc, wc)) in cols.iter().enumerate() {
        if wc == C64::new(0.0, 0.0) {
            continue;
        }
        for (gr, &(pr, wr)) in rows.iter().enumerate() {
            if wr != C64::new(0.0, 0.0) {
                b[(pr, pc)] += wr * u.matrix[(gr, gc)] * wc;
            }
        }
    }
    DenseOperator::square(b, phys)
}

/// Index of the last operator touching each register.
fn last_touch(result: &CompilationResult) -> Vec<(RegisterId, Option<usize>)> {
    result
        .layout
        .registers
        .iter()
        .map(|r| (r.id, result.ops.iter().rposition(|op| op.registers.iter().any(|x| x.id == r.id))))
        .collect()
}

/// The encoded block computed by applying the operators to every physical
/// basis state at once, preparing ancillas just before first use and
/// post-selecting them right after last use.
pub fn encoded_block(result: &CompilationResult, limit: usize) -> Result<DenseOperator> {
    let layout = &result.layout;
    let phys: Vec<(RegisterId, usize)> = layout.physical().map(|r| (r.id, r.dim)).collect();
    let n_phys: usize = phys.iter().map(|r| r.1).product();
    if n_phys > limit {
        return Err(Error::OracleTooLarge { dim: n_phys, limit });
    }
    let last = last_touch(result);
    let mut sim = Sim::identity(phys.clone(), amplitude_budget(limit))?;
    let mut scale = C64::new(1.0, 0.0);

    for (i, op) in result.ops.iter().enumerate() {
        for id in op.register_ids() {
            if !sim.is_live(id) {
                let r = layout.get(id).ok_or_else(|| Error::InvalidArgument(format!("register {id} is not in the layout")))?;
                sim.add_register(id, &r.prepare)?;
            }
        }
        sim.apply(&op.register_ids(), &op.matrix)?;
        for &(id, l) in &last {
            let r = layout.get(id).expect("from layout");
            if l == Some(i) && r.postselect {
                sim.project(id, &r.target)?;
            }
        }
    }
    // registers no operator touches only contribute ⟨target|prepare⟩
    for (id, l) in last {
        let r = layout.get(id).expect("from layout");
        if l.is_none() && r.postselect {
            scale *= r.target.iter().zip(&r.prepare).map(|(t, p)| t.conj() * p).sum::<C64>();
        }
    }
    let ids: Vec<RegisterId> = phys.iter().map(|r| r.0).collect();
    let b = sim.into_matrix(&ids)? * scale;
    DenseOperator::square(b, layout.physical().map(|r| r.desc()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessProbability {
    /// `‖Bψ‖²`.
    pub probability: f64,
    /// `‖B‖₂²`, the largest probability over all input states.
    pub bound: f64,
}

/// Post-selection success probability `‖Bψ‖²` for a unit-norm `ψ`.
pub fn success_probability(b: &DMatrix<C64>, psi: &[C64]) -> Result<SuccessProbability> {
    if psi.len() != b.ncols() {
        return Err(Error::ShapeMismatch(format!("state of length {} for a block with {} columns", psi.len(), b.ncols())));
    }
    let v = DVector::from_column_slice(psi);
    let norm = v.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(norm));
    }
    let bound = spectral_norm(b).powi(2);
    Ok(SuccessProbability { probability: (b * v).norm_squared(), bound })
}

/// Success probability from a full coherent state-vector run: every register
/// is prepared up front, all operators are applied, and only then are the
/// ancillas projected onto their targets.
pub fn simulate_success_probability(result: &CompilationResult, psi: &[C64], limit: usize) -> Result<f64> {
    let layout = &result.layout;
    let total = layout.total_dim();
    if total > limit.saturating_mul(limit) {
        return Err(Error::OracleTooLarge { dim: total, limit });
    }
    let phys: Vec<(RegisterId, usize)> = layout.physical().map(|r| (r.id, r.dim)).collect();
    let mut sim = Sim::state(phys, psi, total)?;
    for r in layout.registers.iter().filter(|r| r.postselect) {
        sim.add_register(r.id, &r.prepare)?;
    }
    for op in &result.ops {
        sim.apply(&op.register_ids(), &op.matrix)?;
    }
    for r in layout.registers.iter().filter(|r| r.postselect) {
        sim.project(r.id, &r.target)?;
    }
    let ids: Vec<RegisterId> = layout.physical().map(|r| r.id).collect();
    Ok(sim.into_matrix(&ids)?.norm_squared())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    /// `‖Γ·B − H‖₂`.
    pub block_error: f64,
    /// `‖M†M − I‖₂` per operator, in execution order.
    pub unitarity_errors: Vec<f64>,
    pub gamma: f64,
    pub tolerance: f64,
    pub success: Vec<SuccessProbability>,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub tol: f64,
    pub dense_limit: usize,
    /// Physical input states to report success probabilities for.
    pub states: Vec<Vec<C64>>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, dense_limit: DEFAULT_DENSE_LIMIT, states: Vec::new() }
    }
}

/// Compares `Γ·B` with the dense contraction of `tn`.
pub fn verify_block_encoding(tn: &TensorNetwork, result: &CompilationResult, tol: f64) -> Result<VerificationReport> {
    verify_block_encoding_with(tn, result, &VerifyOptions { tol, ..Default::default() })
}

pub fn verify_block_encoding_with(
    tn: &TensorNetwork,
    result: &CompilationResult,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let h = contract_dense_with_limit(tn, opts.dense_limit)?;
    let b = encoded_block(result, opts.dense_limit)?;
    if h.rows != b.rows {
        return Err(Error::ShapeMismatch(format!(
            "network physical registers {:?} differ from the compiled ones {:?}",
            h.rows.iter().map(|r| r.id.to_string()).collect::<Vec<_>>(),
            b.rows.iter().map(|r| r.id.to_string()).collect::<Vec<_>>()
        )));
    }
    let block_error = spectral_norm(&(&b.matrix * C64::new(result.gamma, 0.0) - &h.matrix));
    let unitarity_errors: Vec<f64> = result.ops.iter().map(|op| unitarity_error(&op.matrix)).collect();
    let success = opts.states.iter().map(|psi| success_probability(&b.matrix, psi)).collect::<Result<Vec<_>>>()?;
    let pass = block_error <= opts.tol && unitarity_errors.iter().all(|&e| e <= opts.tol);
    Ok(VerificationReport { block_error, unitarity_errors, gamma: result.gamma, tolerance: opts.tol, success, pass })
}

/// `(Γ·(Π(1 + ε_l/β_l) − 1), Γ·Σ ε_l/β_l)`: exact and first-order bounds on
/// `‖H − Ĥ‖₂` when each site is perturbed by at most `ε_l` in spectral norm.
pub fn error_bound(betas: &[f64], epsilons: &[f64]) -> Result<(f64, f64)> {
    if betas.len() != epsilons.len() {
        return Err(Error::ShapeMismatch(format!("{} scales and {} perturbations", betas.len(), epsilons.len())));
    }
    if let Some(&b) = betas.iter().find(|&&b| !(b > 0.0)) {
        return Err(Error::InvalidArgument(format!("site scale {b} must be positive")));
    }
    if let Some(&e) = epsilons.iter().find(|&&e| !(e >= 0.0)) {
        return Err(Error::InvalidArgument(format!("perturbation {e} must be non-negative")));
    }
    let gamma: f64 = betas.iter().product();
    let product: f64 = betas.iter().zip(epsilons).map(|(b, e)| 1.0 + e / b).product();
    let first: f64 = betas.iter().zip(epsilons).map(|(b, e)| e / b).sum();
    Ok((gamma * (product - 1.0), gamma * first))
}

/// Deviation between the product of per-site flag-projected blocks and the
/// flag-projected product of all operators, on the space of every non-flag
/// register. Measured in the Frobenius norm, an upper bound on the spectral
/// norm that stays cheap at the full dense limit.
pub fn chaining_error(result: &CompilationResult, limit: usize) -> Result<f64> {
    let layout = &result.layout;
    let space: Vec<(RegisterId, usize)> =
        layout.registers.iter().filter(|r| r.kind != RegisterKind::Flag).map(|r| (r.id, r.dim)).collect();
    let ids: Vec<RegisterId> = space.iter().map(|r| r.0).collect();
    let dim: usize = space.iter().map(|r| r.1).product();
    if dim > limit {
        return Err(Error::OracleTooLarge { dim, limit });
    }

    // product of blocks: each site's operators are collapsed into one
    // flag-projected (generally non-unitary) matrix first
    let mut blocks = Sim::identity(space.clone(), dim * 2)?;
    for (v, range) in result.ops_by_vertex() {
        let ops = &result.ops[range];
        let mut regs: Vec<(RegisterId, usize)> = Vec::new();
        for r in ops.iter().flat_map(|op| &op.registers) {
            if r.id != RegisterId::Flag(v) && !regs.iter().any(|x| x.0 == r.id) {
                regs.push((r.id, r.dim));
            }
        }
        let mut local = Sim::identity(regs.clone(), amplitude_budget(limit))?;
        let flag = ops.iter().any(|op| op.registers.iter().any(|r| r.id == RegisterId::Flag(v)));
        let zero = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        if flag {
            local.add_register(RegisterId::Flag(v), &zero)?;
        }
        for op in ops {
            local.apply(&op.register_ids(), &op.matrix)?;
        }
        if flag {
            local.project(RegisterId::Flag(v), &zero)?;
        }
        let reg_ids: Vec<RegisterId> = regs.iter().map(|r| r.0).collect();
        blocks.apply(&reg_ids, &local.into_matrix(&reg_ids)?)?;
    }
    let lhs = blocks.into_matrix(&ids)?;

    // block of the product: every flag stays coherent until the end
    let mut global = Sim::identity(space, amplitude_budget(limit))?;
    for r in layout.registers.iter().filter(|r| r.kind == RegisterKind::Flag) {
        global.add_register(r.id, &r.prepare)?;
    }
    for op in &result.ops {
        global.apply(&op.register_ids(), &op.matrix)?;
    }
    for r in layout.registers.iter().filter(|r| r.kind == RegisterKind::Flag) {
        global.project(r.id, &r.target)?;
    }
    let rhs = global.into_matrix(&ids)?;
    Ok((lhs - rhs).norm())
}

/// [`chaining_error`] within [`DEFAULT_TOL`].
pub fn verify_chaining(result: &CompilationResult) -> Result<bool> {
    Ok(chaining_error(result, DEFAULT_DENSE_LIMIT)? <= DEFAULT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_bound_examples() {
        assert_eq!(error_bound(&[1.0, 2.0], &[0.0, 0.0]).unwrap(), (0.0, 0.0));
        let (exact, first) = error_bound(&[1.0, 1.0], &[0.1, 0.1]).unwrap();
        assert!((exact - 0.21).abs() < 1e-15);
        assert!((first - 0.2).abs() < 1e-15);
        assert!(error_bound(&[0.0], &[0.1]).is_err());
    }

    #[test]
    fn success_probability_examples() {
        let id = DMatrix::<C64>::identity(2, 2);
        let psi = [C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        assert!((success_probability(&id, &psi).unwrap().probability - 1.0).abs() < 1e-15);

        let z_half = DMatrix::from_diagonal(&nalgebra::dvector![C64::new(0.5, 0.0), C64::new(-0.5, 0.0)]);
        let p = success_probability(&z_half, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        assert!((p.probability - 0.25).abs() < 1e-15);
        assert!((p.bound - 0.25).abs() < 1e-15);

        assert!(matches!(success_probability(&id, &[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]), Err(Error::NotNormalized(_))));
    }
}
