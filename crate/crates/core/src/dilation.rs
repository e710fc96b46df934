//! Per-site factory: SVD of the unfolded site, normalisation by the largest
//! singular value, square padding or dimension dropping, and the flag
//! dilation `C = [[S, D], [D, −S]]` of the singular core.
//!
//! Index conventions for the `k`-dimensional core space (`k = lcm(m, n)`):
//! on the input side `c = a·n + j` where `a < p` is the pad level and `j` the
//! column of the unfolded matrix; on the output side `c = b·m + i` where
//! `b < q` is the drop level and `i` the row. The flag is the most
//! significant index of `C`, so `C[(f·k + c), (f'·k + c')]`.

use nalgebra::DMatrix;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::kron;
use crate::network::{unfold_site, SiteTensor, Unfolding};
use crate::operator::{DenseOperator, RegisterDesc, RegisterId};
use crate::C64;

/// Absolute tolerance for treating a normalised singular value as one.
pub const TRIVIAL_TOL: f64 = 1e-12;

/// Tolerance when grouping equal rotation angles.
pub const ANGLE_TOL: f64 = 1e-12;

/// How the extra diagonal entries of a padded core are filled when the
/// output bundle is at least as large as the input bundle.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PadPolicy {
    /// Extra entries are 1, so the padding acts as an identity.
    #[default]
    Identity,
    /// Extra entries cycle through the existing singular values, adding no
    /// new rotation angles.
    Symmetry,
}

impl std::str::FromStr for PadPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Self::Identity),
            "symmetry" => Ok(Self::Symmetry),
            _ => Err(Error::InvalidArgument(format!("unknown pad policy {s:?}"))),
        }
    }
}

/// Full SVD `A = U·diag(s)·Vh` with square unitary factors.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactors {
    pub u: DMatrix<C64>,
    /// Non-increasing, length `min(m, n)`.
    pub s: Vec<f64>,
    pub vh: DMatrix<C64>,
    pub beta: f64,
}

impl SvdFactors {
    /// Computes the factors with a fixed phase convention: the first
    /// component of magnitude above `1e-12` in each column of `U` is real and
    /// non-negative (and likewise for each row of `Vh` that is not tied to a
    /// singular value).
    pub fn new(a: &DMatrix<C64>) -> Self {
        let (m, n) = a.shape();
        let r = m.min(n);
        // nalgebra's SVD can return wrong factors for rank-deficient complex
        // input, so the factorization goes through faer.
        let svd = faer::Mat::<C64>::from_fn(m, n, |i, j| a[(i, j)]).svd().expect("SVD converges");
        let (fu, fv, fs) = (svd.U(), svd.V(), svd.S().column_vector());

        let mut idx: Vec<usize> = (0..r).collect();
        idx.sort_by(|&x, &y| fs[y].re.total_cmp(&fs[x].re).then(x.cmp(&y)));
        let s: Vec<f64> = idx.iter().map(|&i| fs[i].re.max(0.0)).collect();
        let order = |i: usize| if i < r { idx[i] } else { i };
        let mut u = DMatrix::from_fn(m, m, |row, col| fu[(row, order(col))]);
        let mut v = DMatrix::from_fn(n, n, |row, col| fv[(row, order(col))]);
        for col in 0..m {
            let phase = leading_phase(u.column(col).iter());
            for x in u.column_mut(col).iter_mut() {
                *x *= phase;
            }
            if col < r {
                // u_i·v_i† must not change
                for x in v.column_mut(col).iter_mut() {
                    *x *= phase;
                }
            }
        }
        for col in r..n {
            let phase = leading_phase(v.column(col).iter());
            for x in v.column_mut(col).iter_mut() {
                *x *= phase;
            }
        }
        let beta = s.first().copied().unwrap_or(0.0);
        Self { u, s, vh: v.adjoint(), beta }
    }

    pub fn reconstruct(&self) -> DMatrix<C64> {
        let (m, n) = (self.u.nrows(), self.vh.nrows());
        let mut sigma = DMatrix::<C64>::zeros(m, n);
        for (i, &x) in self.s.iter().enumerate() {
            sigma[(i, i)] = C64::new(x, 0.0);
        }
        &self.u * sigma * &self.vh
    }

    /// `s_max / s_min` over the singular values; infinite when rank-deficient.
    pub fn condition_number(&self) -> f64 {
        let min = self.s.iter().cloned().fold(f64::INFINITY, f64::min);
        if min <= 0.0 {
            f64::INFINITY
        } else {
            self.beta / min
        }
    }
}

/// Phase that rotates the first non-negligible component onto the
/// non-negative real axis.
fn leading_phase<'a>(mut xs: impl Iterator<Item = &'a C64>) -> C64 {
    match xs.find(|x| x.norm() > 1e-12) {
        Some(x) => x.conj() / x.norm(),
        None => C64::new(1.0, 0.0),
    }
}

/// Result of scaling singular values by their maximum.
#[derive(Debug, Clone, PartialEq)]
pub enum NormalizedCore {
    Scaled { beta: f64, s: Vec<f64> },
    /// All singular values are zero: the site, and the whole network, is the
    /// zero operator.
    Zero,
}

pub fn normalize_core(s: &[f64]) -> Result<NormalizedCore> {
    if s.is_empty() {
        return Err(Error::InvalidArgument("no singular values".into()));
    }
    if let Some(&bad) = s.iter().find(|x| !(**x >= 0.0)) {
        return Err(Error::InvalidArgument(format!("negative singular value {bad}")));
    }
    let beta = s.iter().cloned().fold(0.0, f64::max);
    if beta == 0.0 {
        return Ok(NormalizedCore::Zero);
    }
    let mut scaled: Vec<f64> = s.iter().map(|x| x / beta).collect();
    for (x, &orig) in scaled.iter_mut().zip(s) {
        if orig == beta {
            *x = 1.0;
        }
    }
    Ok(NormalizedCore::Scaled { beta, s: scaled })
}

/// Flag-dilated core of a padded singular diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DilatedCore {
    /// `2k × 2k` unitary, flag most significant.
    pub c: DMatrix<C64>,
    pub k: usize,
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub s_k: Vec<f64>,
    /// Distinct `arccos(s)` over `s_k`, in order of first appearance, with
    /// multiplicities.
    pub angles: Vec<(f64, usize)>,
}

impl DilatedCore {
    /// Whether every entry of `S_k` is one to within [`TRIVIAL_TOL`].
    pub fn is_trivial(&self) -> bool {
        self.s_k.iter().all(|&x| (x - 1.0).abs() <= TRIVIAL_TOL)
    }
}

pub fn pad_and_form_core(s: &[f64], m: usize, n: usize, policy: PadPolicy) -> Result<DilatedCore> {
    if m == 0 || n == 0 {
        return Err(Error::ShapeMismatch(format!("core of a {m}x{n} matrix")));
    }
    let r = m.min(n);
    if s.len() != r {
        return Err(Error::ShapeMismatch(format!("{} singular values for a {m}x{n} matrix", s.len())));
    }
    if let Some(&bad) = s.iter().find(|&&x| !(-TRIVIAL_TOL..=1.0 + TRIVIAL_TOL).contains(&x)) {
        return Err(Error::UnnormalizedCore { value: bad });
    }
    let k = m.lcm(&n);
    let mut s_k: Vec<f64> = s.iter().map(|x| x.clamp(0.0, 1.0)).collect();
    for i in r..k {
        let fill = if n > m {
            0.0
        } else {
            match policy {
                PadPolicy::Identity => 1.0,
                PadPolicy::Symmetry => s_k[(i - r) % r],
            }
        };
        s_k.push(fill);
    }

    let mut c = DMatrix::<C64>::zeros(2 * k, 2 * k);
    for (i, &x) in s_k.iter().enumerate() {
        let dx = (1.0 - x * x).max(0.0).sqrt();
        c[(i, i)] = C64::new(x, 0.0);
        c[(i, k + i)] = C64::new(dx, 0.0);
        c[(k + i, i)] = C64::new(dx, 0.0);
        c[(k + i, k + i)] = C64::new(-x, 0.0);
    }

    Ok(DilatedCore { c, k, m, n, p: k / n, q: k / m, angles: distinct_angles(&s_k), s_k })
}

fn distinct_angles(s_k: &[f64]) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    for &x in s_k {
        let theta = x.clamp(0.0, 1.0).acos();
        match out.iter_mut().find(|(t, _)| (t - theta).abs() <= ANGLE_TOL) {
            Some((_, count)) => *count += 1,
            None => out.push((theta, 1)),
        }
    }
    out
}

/// The dilated factors of one site, wired to registers.
///
/// `vh_op` acts on the input bundle and `u_op` on the output bundle. `core_op`
/// maps `[flag, pad, input bundle]` to `[flag, drop, output bundle]`; the pad
/// register has dimension `p` and the drop register dimension `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteFactors {
    pub vertex: usize,
    pub beta: f64,
    pub svd: SvdFactors,
    pub core: DilatedCore,
    /// All singular values are one and no rows are dropped, so the core is
    /// replaced by the identity.
    pub trivial: bool,
    pub vh_op: DenseOperator,
    pub core_op: DenseOperator,
    pub u_op: DenseOperator,
}

impl SiteFactors {
    /// Factors an explicit `m × n` matrix whose rows live on `rows` and
    /// columns on `cols`.
    pub fn from_matrix(
        vertex: usize,
        a: &DMatrix<C64>,
        rows: Vec<RegisterDesc>,
        cols: Vec<RegisterDesc>,
        policy: PadPolicy,
    ) -> Result<Self> {
        let (m, n) = a.shape();
        let svd = SvdFactors::new(a);
        let s = match normalize_core(&svd.s)? {
            NormalizedCore::Zero => return Err(Error::ZeroOperator { vertex: Some(vertex) }),
            NormalizedCore::Scaled { s, .. } => s,
        };
        let mut core = pad_and_form_core(&s, m, n, policy)?;
        let trivial = core.is_trivial();
        if trivial {
            core.c = DMatrix::identity(2 * core.k, 2 * core.k);
        }

        let flag = RegisterDesc::new(RegisterId::Flag(vertex), 2);
        let pad = RegisterDesc::new(RegisterId::Pad(vertex), core.p);
        let drop = RegisterDesc::new(RegisterId::Drop(vertex), core.q);
        let core_rows = [flag, drop].into_iter().chain(rows.iter().copied()).collect();
        let core_cols = [flag, pad].into_iter().chain(cols.iter().copied()).collect();

        Ok(Self {
            vertex,
            beta: svd.beta,
            vh_op: DenseOperator::square(svd.vh.clone(), cols)?,
            core_op: DenseOperator::new(core.c.clone(), core_rows, core_cols)?,
            u_op: DenseOperator::square(svd.u.clone(), rows)?,
            svd,
            core,
            trivial,
        })
    }

    pub fn m(&self) -> usize {
        self.core.m
    }

    pub fn n(&self) -> usize {
        self.core.n
    }

    /// The flag-`|0⟩`, pad-`|0⟩` block of the site unitary: a `k × n` matrix
    /// equal to `A/β` stacked on zero rows.
    pub fn projected_block(&self) -> DMatrix<C64> {
        let q = assemble_site_unitary(self).expect("factors are well formed").matrix;
        q.view((0, 0), (self.core.k, self.n())).into_owned()
    }

    /// Distinct rotation angles of the core; a trivial core has none beyond
    /// `arccos 1 = 0`.
    pub fn angles(&self) -> &[(f64, usize)] {
        &self.core.angles
    }
}

/// Unfolds `site` and builds its dilated factors.
pub fn unitary_svd(site: &SiteTensor, unfolding: &Unfolding, policy: PadPolicy) -> Result<SiteFactors> {
    let a = unfold_site(site, unfolding)?;
    SiteFactors::from_matrix(site.id, &a.matrix, a.rows, a.cols, policy)
}

/// Dense `Q = (I₂ ⊗ I_q ⊗ U)·C·(I₂ ⊗ I_p ⊗ Vh)`, a `2k × 2k` unitary.
pub fn assemble_site_unitary(f: &SiteFactors) -> Result<DenseOperator> {
    let core = &f.core;
    if f.u_op.matrix.nrows() != core.m || f.vh_op.matrix.nrows() != core.n || core.c.nrows() != 2 * core.k {
        return Err(Error::ShapeMismatch(format!(
            "factors {}x{}, {}x{} and core of size {} are inconsistent",
            f.u_op.matrix.nrows(),
            f.u_op.matrix.ncols(),
            f.vh_op.matrix.nrows(),
            f.vh_op.matrix.ncols(),
            core.c.nrows()
        )));
    }
    let left = kron(&DMatrix::identity(2 * core.q, 2 * core.q), &f.u_op.matrix);
    let right = kron(&DMatrix::identity(2 * core.p, 2 * core.p), &f.vh_op.matrix);
    DenseOperator::new(left * &core.c * right, f.core_op.rows.clone(), f.core_op.cols.clone())
}
