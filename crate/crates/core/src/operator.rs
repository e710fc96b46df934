//! Register-labelled dense matrices.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::C64;

/// Identity of a quantum register. The payload is the owning vertex or edge id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RegisterId {
    /// Physical site register of a vertex.
    Physical(usize),
    /// Coupling register of an edge (internal or boundary).
    Bond(usize),
    /// Dilation flag of a vertex.
    Flag(usize),
    /// Input-side padding factor `p` of a vertex's core.
    Pad(usize),
    /// Output-side drop factor `q` of a vertex's core.
    Drop(usize),
}

impl fmt::Display for RegisterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegisterId::Physical(v) => write!(f, "P{v}"),
            RegisterId::Bond(e) => write!(f, "X{e}"),
            RegisterId::Flag(v) => write!(f, "F{v}"),
            RegisterId::Pad(v) => write!(f, "A{v}"),
            RegisterId::Drop(v) => write!(f, "D{v}"),
        }
    }
}

impl FromStr for RegisterId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad register id {s:?}"));
        let mut chars = s.chars();
        let tag = chars.next().ok_or_else(bad)?;
        let n: usize = chars.as_str().parse().map_err(|_| bad())?;
        Ok(match tag {
            'P' => RegisterId::Physical(n),
            'X' => RegisterId::Bond(n),
            'F' => RegisterId::Flag(n),
            'A' => RegisterId::Pad(n),
            'D' => RegisterId::Drop(n),
            _ => return Err(bad()),
        })
    }
}

impl Serialize for RegisterId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RegisterId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterDesc {
    pub id: RegisterId,
    pub dim: usize,
}

impl RegisterDesc {
    pub fn new(id: RegisterId, dim: usize) -> Self {
        Self { id, dim }
    }
}

pub(crate) fn space_dim(regs: &[RegisterDesc]) -> usize {
    regs.iter().map(|r| r.dim).product()
}

/// A dense matrix whose row and column indices are products of registers,
/// first register most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    pub matrix: DMatrix<C64>,
    pub rows: Vec<RegisterDesc>,
    pub cols: Vec<RegisterDesc>,
}

impl DenseOperator {
    pub fn new(matrix: DMatrix<C64>, rows: Vec<RegisterDesc>, cols: Vec<RegisterDesc>) -> Result<Self> {
        if matrix.nrows() != space_dim(&rows) || matrix.ncols() != space_dim(&cols) {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} matrix for register spaces of size {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                space_dim(&rows),
                space_dim(&cols)
            )));
        }
        Ok(Self { matrix, rows, cols })
    }

    /// Square operator acting on `regs`.
    pub fn square(matrix: DMatrix<C64>, regs: Vec<RegisterDesc>) -> Result<Self> {
        Self::new(matrix, regs.clone(), regs)
    }
}
