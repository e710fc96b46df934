//! Dense simulation of register-wired operators on a growing set of live
//! registers.
//!
//! The state is a batch of `ncols` vectors over the product of the live
//! registers (first live register most significant). Registers can be
//! prepared lazily just before their first use and projected onto a target
//! bra right after their last use, which keeps the working set far smaller
//! than the full register space.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operator::RegisterId;
use crate::C64;

#[derive(Debug, Clone)]
pub(crate) struct Sim {
    regs: Vec<(RegisterId, usize)>,
    ncols: usize,
    /// Column-major: vector `c` occupies `data[c·N .. (c+1)·N]`.
    data: Vec<C64>,
    limit: usize,
}

impl Sim {
    /// Identity on the product of `regs`: column `c` is basis state `c`.
    pub fn identity(regs: Vec<(RegisterId, usize)>, limit: usize) -> Result<Self> {
        let n: usize = regs.iter().map(|r| r.1).product();
        check(n, limit)?;
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        for c in 0..n {
            data[c * n + c] = C64::new(1.0, 0.0);
        }
        Ok(Self { regs, ncols: n, data, limit })
    }

    /// A single state vector over `regs`.
    pub fn state(regs: Vec<(RegisterId, usize)>, psi: &[C64], limit: usize) -> Result<Self> {
        let n: usize = regs.iter().map(|r| r.1).product();
        check(n, limit)?;
        if psi.len() != n {
            return Err(Error::ShapeMismatch(format!("state of length {} on a space of size {n}", psi.len())));
        }
        Ok(Self { regs, ncols: 1, data: psi.to_vec(), limit })
    }

    pub fn len(&self) -> usize {
        self.regs.iter().map(|r| r.1).product()
    }

    pub fn is_live(&self, id: RegisterId) -> bool {
        self.regs.iter().any(|r| r.0 == id)
    }

    /// Appends a register (least significant) prepared in `prep`.
    pub fn add_register(&mut self, id: RegisterId, prep: &[C64]) -> Result<()> {
        let dim = prep.len();
        let n = self.len();
        check(n * dim, self.limit)?;
        let mut data = Vec::with_capacity(n * dim * self.ncols);
        for &z in &self.data {
            data.extend(prep.iter().map(|p| z * p));
        }
        self.data = data;
        self.regs.push((id, dim));
        Ok(())
    }

    /// Contracts a live register with `conj(target)` and removes it.
    pub fn project(&mut self, id: RegisterId, target: &[C64]) -> Result<()> {
        let pos = self.position(id)?;
        let dim = self.regs[pos].1;
        if target.len() != dim {
            return Err(Error::ShapeMismatch(format!("target of length {} for register {id}", target.len())));
        }
        let inner: usize = self.regs[pos + 1..].iter().map(|r| r.1).product();
        let n = self.len();
        let outer = n / (dim * inner);
        let mut data = Vec::with_capacity(n / dim * self.ncols);
        for col in self.data.chunks(n) {
            for o in 0..outer {
                for i in 0..inner {
                    let mut acc = C64::new(0.0, 0.0);
                    for (x, t) in target.iter().enumerate() {
                        acc += t.conj() * col[(o * dim + x) * inner + i];
                    }
                    data.push(acc);
                }
            }
        }
        self.data = data;
        self.regs.remove(pos);
        Ok(())
    }

    /// Applies `matrix` to the product of `regs` (all live; first most
    /// significant in the matrix index), identity elsewhere.
    pub fn apply(&mut self, regs: &[RegisterId], matrix: &DMatrix<C64>) -> Result<()> {
        let positions = regs.iter().map(|&id| self.position(id)).collect::<Result<Vec<_>>>()?;
        let n = self.len();
        let strides = self.strides();
        let op_dims: Vec<usize> = positions.iter().map(|&p| self.regs[p].1).collect();
        let d_op: usize = op_dims.iter().product();
        if matrix.nrows() != d_op || matrix.ncols() != d_op {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} operator on registers of total size {d_op}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }

        let sub_offsets = offsets(&op_dims, &positions.iter().map(|&p| strides[p]).collect::<Vec<_>>());
        let rest: Vec<usize> = (0..self.regs.len()).filter(|p| !positions.contains(p)).collect();
        let rest_offsets = offsets(
            &rest.iter().map(|&p| self.regs[p].1).collect::<Vec<_>>(),
            &rest.iter().map(|&p| strides[p]).collect::<Vec<_>>(),
        );

        // row-major copy of the operator for cache-friendly access
        let mat: Vec<C64> = crate::linalg::row_major(matrix);
        let nonzero_cols: Vec<Vec<(usize, C64)>> = (0..d_op)
            .map(|r| (0..d_op).filter_map(|c| Some((c, mat[r * d_op + c])).filter(|(_, z)| *z != C64::new(0.0, 0.0))).collect())
            .collect();

        let mut gathered = vec![C64::new(0.0, 0.0); d_op];
        for col in self.data.chunks_mut(n) {
            for &base in &rest_offsets {
                for (g, &off) in gathered.iter_mut().zip(&sub_offsets) {
                    *g = col[base + off];
                }
                for (r, &off) in sub_offsets.iter().enumerate() {
                    col[base + off] = nonzero_cols[r].iter().map(|&(c, z)| z * gathered[c]).sum();
                }
            }
        }
        Ok(())
    }

    /// Moves the live registers into `order` (which must be a permutation of
    /// them) and returns the `N × ncols` matrix.
    pub fn into_matrix(self, order: &[RegisterId]) -> Result<DMatrix<C64>> {
        if order.len() != self.regs.len() {
            return Err(Error::ShapeMismatch("register order does not cover the live registers".into()));
        }
        let positions = order.iter().map(|&id| self.position(id)).collect::<Result<Vec<_>>>()?;
        let strides = self.strides();
        let n = self.len();
        let offs = offsets(
            &positions.iter().map(|&p| self.regs[p].1).collect::<Vec<_>>(),
            &positions.iter().map(|&p| strides[p]).collect::<Vec<_>>(),
        );
        Ok(DMatrix::from_fn(n, self.ncols, |r, c| self.data[c * n + offs[r]]))
    }

    fn position(&self, id: RegisterId) -> Result<usize> {
        self.regs
            .iter()
            .position(|r| r.0 == id)
            .ok_or_else(|| Error::InvalidArgument(format!("register {id} is not live")))
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.regs.len()];
        for p in (0..self.regs.len().saturating_sub(1)).rev() {
            s[p] = s[p + 1] * self.regs[p + 1].1;
        }
        s
    }
}

fn check(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        Err(Error::OracleTooLarge { dim: n, limit })
    } else {
        Ok(())
    }
}

/// Linear offsets of every multi-index over `dims` (first most significant)
/// given per-axis strides.
fn offsets(dims: &[usize], strides: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for (&d, &s) in dims.iter().zip(strides) {
        out = out.iter().flat_map(|&o| (0..d).map(move |x| o + x * s)).collect();
    }
    out
}
