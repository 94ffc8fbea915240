// Copyright 2026 The gatefid Authors
// SPDX-License-Identifier: Apache-2.0

//! Small dense complex linear-algebra helpers shared by the physics modules.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>` (column-major). Hermitian
//! eigendecompositions are delegated to nalgebra; everything else here is
//! elementary.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type Mat = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> Mat {
    Mat::identity(n, n)
}

pub fn zeros(n: usize) -> Mat {
    Mat::zeros(n, n)
}

pub fn dagger(m: &Mat) -> Mat {
    m.adjoint()
}

/// Largest entry modulus, ‖M‖_max.
pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn hermiticity_defect(m: &Mat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// ‖U†U − 1‖_max.
pub fn unitarity_defect(u: &Mat) -> f64 {
    let n = u.nrows();
    max_abs_diff(&(u.adjoint() * u), &identity(n))
}

pub fn trace(m: &Mat) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

/// |i⟩⟨j| in an `n`-dimensional space.
pub fn dyad(n: usize, i: usize, j: usize) -> Mat {
    let mut m = zeros(n);
    m[(i, j)] = ONE;
    m
}

/// Hermitian eigendecomposition `H = V diag(E) V†`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

impl HermitianEigen {
    pub fn new(h: &Mat) -> Self {
        // Symmetrize so tiny asymmetries from callers do not leak into nalgebra.
        let sym = (h + h.adjoint()).scale(0.5);
        let eig = SymmetricEigen::new(sym);
        HermitianEigen {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        }
    }

    /// exp(−i H t)
    pub fn evolve(&self, t: f64) -> Mat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, e) in self.values.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, -e * t);
            for r in 0..n {
                scaled[(r, k)] *= phase;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// exp(−i H t) · W without forming the full propagator.
    pub fn evolve_apply(&self, t: f64, vdag_w: &Mat) -> Mat {
        // vdag_w = V† W, precomputed by the caller.
        let mut tmp = vdag_w.clone();
        for (k, e) in self.values.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, -e * t);
            for col in 0..tmp.ncols() {
                tmp[(k, col)] *= phase;
            }
        }
        &self.vectors * tmp
    }

    pub fn spectral_spread(&self) -> f64 {
        let lo = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if self.values.is_empty() {
            0.0
        } else {
            hi - lo
        }
    }
}

/// Triplet list of the nonzero entries of a matrix, used on the hot path of the
/// master-equation integrator where jump operators and gate Hamiltonians are
/// mostly zeros.
#[derive(Debug, Clone)]
pub struct SparseOp {
    n: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseOp {
    pub fn from_dense(m: &Mat) -> Self {
        let n = m.nrows();
        let mut entries = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..n {
                let v = m[(i, j)];
                if v != ZERO {
                    entries.push((i, j, v));
                }
            }
        }
        SparseOp { n, entries }
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// out ← out + alpha · A·B
    pub fn mul_add(&self, b: &Mat, alpha: Complex64, out: &mut Mat) {
        let n = self.n;
        let bs = b.as_slice();
        let os = out.as_mut_slice();
        for j in 0..b.ncols() {
            let bcol = &bs[j * n..(j + 1) * n];
            let ocol = &mut os[j * n..(j + 1) * n];
            for &(r, k, v) in &self.entries {
                ocol[r] += alpha * v * bcol[k];
            }
        }
    }

    /// out ← out + alpha · A·B†
    pub fn mul_adjoint_add(&self, b: &Mat, alpha: Complex64, out: &mut Mat) {
        let n = self.n;
        let bs = b.as_slice();
        let os = out.as_mut_slice();
        for j in 0..n {
            let ocol = &mut os[j * n..(j + 1) * n];
            for &(r, k, v) in &self.entries {
                // (B†)[k, j] = conj(B[j, k])
                ocol[r] += alpha * v * bs[k * n + j].conj();
            }
        }
    }
}

/// y ← y + a·x for equally shaped matrices.
pub fn axpy(y: &mut Mat, a: Complex64, x: &Mat) {
    for (yi, xi) in y.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *yi += a * xi;
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order.max(1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(10);
        // ∫_{-1}^{1} x^18 dx = 2/19
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((q - 2.0 / 19.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn sparse_kernels_match_dense_products() {
        let a = Mat::from_fn(5, 5, |i, j| {
            if (i + 2 * j) % 3 == 0 {
                c(i as f64 - 1.0, j as f64 * 0.5)
            } else {
                ZERO
            }
        });
        let b = Mat::from_fn(5, 5, |i, j| c((i * j) as f64 * 0.1 + 1.0, i as f64 - j as f64));
        let sa = SparseOp::from_dense(&a);
        let mut out = zeros(5);
        sa.mul_add(&b, ONE, &mut out);
        assert!(max_abs_diff(&out, &(&a * &b)) < 1e-12);
        let mut out = zeros(5);
        sa.mul_adjoint_add(&b, c(0.0, 2.0), &mut out);
        assert!(max_abs_diff(&out, &(&a * b.adjoint()).scale(1.0).map(|z| z * c(0.0, 2.0))) < 1e-12);
    }

    #[test]
    fn hermitian_exponential_is_unitary() {
        let h = Mat::from_fn(4, 4, |i, j| c((i + j) as f64, i as f64 - j as f64));
        let eig = HermitianEigen::new(&h);
        let u = eig.evolve(0.37);
        assert!(unitarity_defect(&u) < 1e-12);
    }
}
