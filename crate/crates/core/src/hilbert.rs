// Copyright 2026 The gatefid Authors
// SPDX-License-Identifier: Apache-2.0

//! Hilbert-space bookkeeping: multi-level subsystems, Kronecker embedding,
//! the qubit (computational) subspace and tensor-product Pauli bases.
//!
//! Subsystem 0 is the leftmost Kronecker factor. The computational subspace is
//! spanned by one designated pair of levels per subsystem; its basis is ordered
//! lexicographically in subsystem order with the first designated level before
//! the second, so for two subsystems the order is |00⟩, |01⟩, |10⟩, |11⟩.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, ONE, ZERO};

/// Default upper bound on the qubit count accepted by [`pauli_basis`].
pub const DEFAULT_PAULI_CAP: usize = 6;

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LayoutSpec", into = "LayoutSpec")]
pub struct SystemLayout {
    dims: Vec<usize>,
    cmp_levels: Vec<[usize; 2]>,
    strides: Vec<usize>,
    full_dim: usize,
    cmp_indices: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct LayoutSpec {
    dims: Vec<usize>,
    cmp_levels: Vec<[usize; 2]>,
}

impl TryFrom<LayoutSpec> for SystemLayout {
    type Error = Error;
    fn try_from(spec: LayoutSpec) -> Result<Self> {
        SystemLayout::compose(&spec.dims, Some(&spec.cmp_levels))
    }
}

impl From<SystemLayout> for LayoutSpec {
    fn from(layout: SystemLayout) -> Self {
        LayoutSpec {
            dims: layout.dims,
            cmp_levels: layout.cmp_levels,
        }
    }
}

impl fmt::Debug for SystemLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemLayout")
            .field("dims", &self.dims)
            .field("cmp_levels", &self.cmp_levels)
            .finish()
    }
}

impl SystemLayout {
    /// Validates subsystem dimensions and computational levels. `cmp_levels`
    /// defaults to `(0, 1)` on every subsystem.
    pub fn compose(dims: &[usize], cmp_levels: Option<&[[usize; 2]]>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Validation("layout needs at least one subsystem".into()));
        }
        let levels: Vec<[usize; 2]> = match cmp_levels {
            Some(l) => {
                if l.len() != dims.len() {
                    return Err(Error::Validation(format!(
                        "{} computational level pairs given for {} subsystems",
                        l.len(),
                        dims.len()
                    )));
                }
                l.to_vec()
            }
            None => vec![[0, 1]; dims.len()],
        };
        for (i, (&d, pair)) in dims.iter().zip(&levels).enumerate() {
            if d < 2 {
                return Err(Error::Validation(format!(
                    "subsystem {i} has {d} levels; at least 2 are required"
                )));
            }
            if pair[0] == pair[1] {
                return Err(Error::Validation(format!(
                    "subsystem {i}: computational levels must be distinct, got {pair:?}"
                )));
            }
            if pair[0] >= d || pair[1] >= d {
                return Err(Error::Validation(format!(
                    "subsystem {i}: computational levels {pair:?} out of range for {d} levels"
                )));
            }
        }
        let full_dim = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::Validation("full dimension overflows usize".into()))?;
        let mut strides = vec![1usize; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        let n = dims.len();
        let cmp_indices = (0..1usize << n)
            .map(|bits| {
                (0..n)
                    .map(|site| {
                        let b = (bits >> (n - 1 - site)) & 1;
                        levels[site][b] * strides[site]
                    })
                    .sum()
            })
            .collect();
        Ok(SystemLayout {
            dims: dims.to_vec(),
            cmp_levels: levels,
            strides,
            full_dim,
            cmp_indices,
        })
    }

    /// `n` plain qubits.
    pub fn qubits(n: usize) -> Result<Self> {
        Self::compose(&vec![2; n], None)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn cmp_levels(&self) -> &[[usize; 2]] {
        &self.cmp_levels
    }

    pub fn n_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn full_dim(&self) -> usize {
        self.full_dim
    }

    /// d = 2^N, independent of how many levels each subsystem carries.
    pub fn cmp_dim(&self) -> usize {
        1 << self.dims.len()
    }

    /// Full-space index of the product state with the given per-subsystem levels.
    pub fn index_of(&self, levels: &[usize]) -> Result<usize> {
        if levels.len() != self.dims.len() {
            return Err(Error::Validation(format!(
                "{} levels given for {} subsystems",
                levels.len(),
                self.dims.len()
            )));
        }
        let mut idx = 0;
        for (site, (&l, &d)) in levels.iter().zip(&self.dims).enumerate() {
            if l >= d {
                return Err(Error::Validation(format!(
                    "subsystem {site}: level {l} out of range for {d} levels"
                )));
            }
            idx += l * self.strides[site];
        }
        Ok(idx)
    }

    pub fn levels_of(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (site, &s) in self.strides.iter().enumerate() {
            out[site] = idx / s;
            idx %= s;
        }
        out
    }

    /// Full-space indices of the computational basis, in subspace order.
    pub fn cmp_indices(&self) -> &[usize] {
        &self.cmp_indices
    }

    /// The full_dim × d isometry whose columns are the computational basis states.
    pub fn cmp_isometry(&self) -> Mat {
        let mut p = Mat::zeros(self.full_dim, self.cmp_dim());
        for (col, &row) in self.cmp_indices.iter().enumerate() {
            p[(row, col)] = ONE;
        }
        p
    }

    /// Tensor composition `self ⊗ other`.
    pub fn concat(&self, other: &SystemLayout) -> Result<SystemLayout> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let mut levels = self.cmp_levels.clone();
        levels.extend_from_slice(&other.cmp_levels);
        SystemLayout::compose(&dims, Some(&levels))
    }

    fn block_dim(&self, first: usize, len: usize) -> usize {
        self.dims[first..first + len].iter().product()
    }
}

/// Dense operator on the full Hilbert space of a layout.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    layout: Arc<SystemLayout>,
    data: Mat,
}

impl PartialEq for OperatorMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.layout == other.layout && self.data == other.data
    }
}

impl OperatorMatrix {
    pub fn new(layout: Arc<SystemLayout>, data: Mat) -> Result<Self> {
        let n = layout.full_dim();
        if data.nrows() != n || data.ncols() != n {
            return Err(Error::Validation(format!(
                "operator is {}x{}, layout requires {n}x{n}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(OperatorMatrix { layout, data })
    }

    pub fn identity(layout: Arc<SystemLayout>) -> Self {
        let n = layout.full_dim();
        OperatorMatrix {
            layout,
            data: linalg::identity(n),
        }
    }

    pub fn zeros(layout: Arc<SystemLayout>) -> Self {
        let n = layout.full_dim();
        OperatorMatrix {
            layout,
            data: linalg::zeros(n),
        }
    }

    /// Σ coeff · |ket⟩⟨bra| over product states given as per-subsystem levels.
    pub fn from_outer_products(
        layout: Arc<SystemLayout>,
        terms: &[(Complex64, &[usize], &[usize])],
    ) -> Result<Self> {
        let mut op = Self::zeros(layout);
        for &(coeff, ket, bra) in terms {
            let i = op.layout.index_of(ket)?;
            let j = op.layout.index_of(bra)?;
            op.data[(i, j)] += coeff;
        }
        Ok(op)
    }

    /// Places a d × d computational-subspace matrix into the full space,
    /// zero elsewhere.
    pub fn from_cmp(layout: Arc<SystemLayout>, m: &Mat) -> Result<Self> {
        let d = layout.cmp_dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::Validation(format!(
                "matrix is {}x{}, expected {d}x{d}",
                m.nrows(),
                m.ncols()
            )));
        }
        let mut op = Self::zeros(layout);
        let idx = op.layout.cmp_indices().to_vec();
        for (a, &r) in idx.iter().enumerate() {
            for (b, &c) in idx.iter().enumerate() {
                op.data[(r, c)] = m[(a, b)];
            }
        }
        Ok(op)
    }

    pub fn layout(&self) -> &Arc<SystemLayout> {
        &self.layout
    }

    pub fn data(&self) -> &Mat {
        &self.data
    }

    pub fn into_data(self) -> Mat {
        self.data
    }

    pub fn with_data(&self, data: Mat) -> Result<Self> {
        Self::new(self.layout.clone(), data)
    }

    pub fn dagger(&self) -> Self {
        OperatorMatrix {
            layout: self.layout.clone(),
            data: self.data.adjoint(),
        }
    }

    pub fn matmul(&self, other: &OperatorMatrix) -> Result<Self> {
        self.check_same_layout(other)?;
        Ok(OperatorMatrix {
            layout: self.layout.clone(),
            data: &self.data * &other.data,
        })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        OperatorMatrix {
            layout: self.layout.clone(),
            data: self.data.map(|z| z * s),
        }
    }

    pub fn check_same_layout(&self, other: &OperatorMatrix) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::Validation(format!(
                "layout mismatch: {:?} vs {:?}",
                self.layout.dims(),
                other.layout.dims()
            )));
        }
        Ok(())
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.data)
    }

    pub fn trace_full(&self) -> Complex64 {
        linalg::trace(&self.data)
    }

    /// P·op·P restricted to the computational subspace (d × d).
    pub fn project_cmp(&self) -> Mat {
        let idx = self.layout.cmp_indices();
        let d = idx.len();
        Mat::from_fn(d, d, |a, b| self.data[(idx[a], idx[b])])
    }

    /// Tr_cmp[op] = Tr[P op P].
    pub fn trace_cmp(&self) -> Complex64 {
        self.layout
            .cmp_indices()
            .iter()
            .map(|&i| self.data[(i, i)])
            .sum()
    }

    /// Whether op maps the computational subspace into itself, to `tol`.
    pub fn preserves_cmp(&self, tol: f64) -> bool {
        let idx = self.layout.cmp_indices();
        let n = self.layout.full_dim();
        let mut in_cmp = vec![false; n];
        for &i in idx {
            in_cmp[i] = true;
        }
        idx.iter().all(|&col| {
            (0..n).all(|row| in_cmp[row] || self.data[(row, col)].norm() <= tol)
        })
    }
}

/// Kronecker embedding 1 ⊗ … ⊗ op ⊗ … ⊗ 1 of a single-subsystem operator.
pub fn embed(op: &Mat, site: usize, layout: &Arc<SystemLayout>) -> Result<OperatorMatrix> {
    embed_block(op, site, 1, layout)
}

/// Embeds an operator acting on the contiguous subsystems
/// `first .. first + len` of `layout`.
pub fn embed_block(
    op: &Mat,
    first: usize,
    len: usize,
    layout: &Arc<SystemLayout>,
) -> Result<OperatorMatrix> {
    let n_sub = layout.n_subsystems();
    if len == 0 || first + len > n_sub {
        return Err(Error::Validation(format!(
            "subsystems {first}..{} out of range for {n_sub} subsystems",
            first + len
        )));
    }
    let block = layout.block_dim(first, len);
    if op.nrows() != block || op.ncols() != block {
        return Err(Error::Validation(format!(
            "operator for subsystem {first} is {}x{}, expected {block}x{block}",
            op.nrows(),
            op.ncols()
        )));
    }
    let left = layout.block_dim(0, first);
    let right = layout.block_dim(first + len, n_sub - first - len);
    let data = linalg::kron(&linalg::kron(&linalg::identity(left), op), &linalg::identity(right));
    OperatorMatrix::new(layout.clone(), data)
}

/// One element f_i of the tensor-product Pauli basis on the computational subspace.
#[derive(Debug, Clone)]
pub struct BasisElement {
    pub index: usize,
    pub matrix: Mat,
}

pub fn pauli(k: usize) -> Mat {
    let z = ZERO;
    let o = ONE;
    let i = linalg::I;
    match k {
        0 => Mat::from_row_slice(2, 2, &[o, z, z, o]),
        1 => Mat::from_row_slice(2, 2, &[z, o, o, z]),
        2 => Mat::from_row_slice(2, 2, &[z, -i, i, z]),
        3 => Mat::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => panic!("Pauli index {k} out of range 0..4"),
    }
}

pub fn pauli_basis(n_qubits: usize) -> Result<Vec<BasisElement>> {
    pauli_basis_with_cap(n_qubits, DEFAULT_PAULI_CAP)
}

/// f_i with combined index i = i₁ + 4 i₂ + … + 4^{N−1} i_N, where i_k selects
/// the Pauli factor on qubit k (qubit 1 leftmost).
pub fn pauli_basis_with_cap(n_qubits: usize, cap: usize) -> Result<Vec<BasisElement>> {
    if n_qubits == 0 {
        return Err(Error::Validation("Pauli basis needs at least one qubit".into()));
    }
    if n_qubits > cap {
        return Err(Error::Validation(format!(
            "Pauli basis for {n_qubits} qubits exceeds the cap of {cap}"
        )));
    }
    let paulis: Vec<Mat> = (0..4).map(pauli).collect();
    Ok((0..1usize << (2 * n_qubits))
        .map(|index| {
            let mut m = linalg::identity(1);
            for q in 0..n_qubits {
                let k = (index >> (2 * q)) & 3;
                m = linalg::kron(&m, &paulis[k]);
            }
            BasisElement { index, matrix: m }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs_diff};

    fn transmon_lowering() -> Mat {
        let mut l = linalg::zeros(3);
        l[(0, 1)] = ONE;
        l[(1, 2)] = c(2f64.sqrt(), 0.0);
        l
    }

    #[test]
    fn compose_examples() {
        let l = SystemLayout::compose(&[3, 3], None).unwrap();
        assert_eq!((l.full_dim(), l.cmp_dim()), (9, 4));
        let l = SystemLayout::compose(&[2], None).unwrap();
        assert_eq!((l.full_dim(), l.cmp_dim()), (2, 2));
        let l = SystemLayout::compose(&[4, 4], Some(&[[0, 1], [0, 1]])).unwrap();
        assert_eq!((l.full_dim(), l.cmp_dim()), (16, 4));
    }

    #[test]
    fn compose_rejects_bad_input_naming_subsystem() {
        let err = SystemLayout::compose(&[3, 1], None).unwrap_err().to_string();
        assert!(err.contains("subsystem 1"), "{err}");
        let err = SystemLayout::compose(&[3, 3], Some(&[[0, 1], [2, 2]]))
            .unwrap_err()
            .to_string();
        assert!(err.contains("subsystem 1"), "{err}");
        let err = SystemLayout::compose(&[3, 3], Some(&[[0, 3], [0, 1]]))
            .unwrap_err()
            .to_string();
        assert!(err.contains("subsystem 0"), "{err}");
        assert!(SystemLayout::compose(&[3, 3], Some(&[[0, 1]])).is_err());
    }

    #[test]
    fn cmp_indices_follow_level_choice() {
        let l = SystemLayout::compose(&[3, 4], Some(&[[0, 2], [1, 3]])).unwrap();
        // |q1 q2⟩ with q1 ∈ {0,2}, q2 ∈ {1,3}
        assert_eq!(l.cmp_indices(), &[1, 3, 9, 11]);
    }

    #[test]
    fn embed_transmon_relaxation_on_first_site() {
        let layout = Arc::new(SystemLayout::compose(&[3, 3], None).unwrap());
        let l = embed(&transmon_lowering(), 0, &layout).unwrap();
        let s2 = c(2f64.sqrt(), 0.0);
        let mut terms = Vec::new();
        for q2 in 0..3 {
            terms.push((ONE, [0, q2], [1, q2]));
            terms.push((s2, [1, q2], [2, q2]));
        }
        let refs: Vec<(Complex64, &[usize], &[usize])> =
            terms.iter().map(|(z, k, b)| (*z, &k[..], &b[..])).collect();
        let expected = OperatorMatrix::from_outer_products(layout.clone(), &refs).unwrap();
        assert!(max_abs_diff(l.data(), expected.data()) < 1e-15);
    }

    #[test]
    fn embed_identity_gives_identity() {
        let layout = Arc::new(SystemLayout::compose(&[3, 2, 4], None).unwrap());
        for site in 0..3 {
            let d = layout.dims()[site];
            let e = embed(&linalg::identity(d), site, &layout).unwrap();
            assert_eq!(e.data(), &linalg::identity(24));
        }
    }

    #[test]
    fn embed_rydberg_sink_on_first_atom() {
        // levels 0, 1, r = 2, O = 3
        let layout = Arc::new(SystemLayout::compose(&[4, 4], None).unwrap());
        let l = embed(&linalg::dyad(4, 3, 2), 0, &layout).unwrap();
        let expected = OperatorMatrix::from_outer_products(
            layout.clone(),
            &[
                (ONE, &[3, 0], &[2, 0]),
                (ONE, &[3, 1], &[2, 1]),
                (ONE, &[3, 2], &[2, 2]),
                (ONE, &[3, 3], &[2, 3]),
            ],
        )
        .unwrap();
        assert_eq!(l, expected);
    }

    #[test]
    fn embed_size_mismatch_is_rejected() {
        let layout = Arc::new(SystemLayout::compose(&[3, 3], None).unwrap());
        assert!(embed(&linalg::identity(2), 0, &layout).is_err());
        assert!(embed(&linalg::identity(3), 2, &layout).is_err());
    }

    #[test]
    fn projection_examples() {
        let layout = Arc::new(SystemLayout::compose(&[3, 3], None).unwrap());
        let id = OperatorMatrix::identity(layout.clone());
        assert_eq!(id.project_cmp(), linalg::identity(4));
        assert_eq!(id.trace_cmp(), c(4.0, 0.0));
        let leak = OperatorMatrix::from_outer_products(layout, &[(ONE, &[2, 0], &[1, 1])]).unwrap();
        assert_eq!(leak.project_cmp(), linalg::zeros(4));
        assert!(!leak.preserves_cmp(1e-12));
    }

    #[test]
    fn pauli_single_qubit_set() {
        let basis = pauli_basis(1).unwrap();
        assert_eq!(basis.len(), 4);
        for (k, f) in basis.iter().enumerate() {
            assert_eq!(f.matrix, pauli(k));
        }
    }

    #[test]
    fn pauli_index_is_little_endian() {
        let basis = pauli_basis(2).unwrap();
        assert_eq!(basis[0].matrix, linalg::identity(4));
        // i = 1 + 4·3 → σ_x on qubit 1, σ_z on qubit 2
        assert_eq!(basis[13].matrix, linalg::kron(&pauli(1), &pauli(3)));
    }

    #[test]
    fn pauli_cap_enforced() {
        assert!(pauli_basis(7).is_err());
        assert!(pauli_basis_with_cap(3, 2).is_err());
        assert!(pauli_basis(0).is_err());
    }
}
