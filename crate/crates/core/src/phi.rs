//! Measurement operator for the sounding model.
//!
//! The equivalent measurement matrix is a column permutation of a Kronecker
//! product, Φ = (A ⊗ B)·P. The dense form is kept for generic use, and the
//! factors are kept alongside it because the Bayesian estimators repeatedly
//! need two expensive primitives that collapse to small GEMMs under the
//! product structure: weighted Grams Φ·diag(w)·Φᴴ and the diagonal of
//! Φᴴ·S⁻¹·Φ. Operators built from a plain dense matrix fall back to direct
//! evaluation; both routes are interchangeable and tested against each
//! other.

use ndarray::prelude::*;
use num_complex::Complex64 as C64;

use crate::config::{Error, Result};
use crate::linalg::{hconj, C_ZERO};

#[derive(Debug, Clone)]
struct KronFactors {
    /// Transmit-side factor, n1 x m1.
    a: Array2<C64>,
    /// Receive-side factor, n2 x m2.
    b: Array2<C64>,
    /// Column map: operator column j equals Kronecker column perm[j].
    perm: Vec<usize>,
    /// Kronecker column index -> operator column index.
    inv_perm: Vec<usize>,
    /// akr[(r1*n1 + c1), j1] = a[r1,j1] * conj(a[c1,j1]).
    akr: Array2<C64>,
    /// Conjugate transpose of `akr`.
    akr_h: Array2<C64>,
    /// bkr[j2, (r2*n2 + c2)] = b[r2,j2] * conj(b[c2,j2]).
    bkr: Array2<C64>,
    /// Conjugate transpose of `bkr`.
    bkr_h: Array2<C64>,
    /// aᴴa.
    gram_a: Array2<C64>,
    /// bᴴb.
    gram_b: Array2<C64>,
}

/// The measurement operator Φ (N rows, M columns).
#[derive(Debug, Clone)]
pub struct PhiOperator {
    dense: Array2<C64>,
    kron: Option<KronFactors>,
}

impl PhiOperator {
    /// Wraps an arbitrary dense measurement matrix.
    pub fn from_dense(dense: Array2<C64>) -> Self {
        Self { dense, kron: None }
    }

    /// Builds the operator from Kronecker factors and a column permutation:
    /// column j of the operator is a[:, perm[j]/m2] ⊗ b[:, perm[j] % m2].
    pub fn from_kron(a: Array2<C64>, b: Array2<C64>, perm: Vec<usize>) -> Result<Self> {
        let (n1, m1) = a.dim();
        let (n2, m2) = b.dim();
        if perm.len() != m1 * m2 {
            return Err(Error::ShapeMismatch(format!(
                "permutation length {} does not match {} Kronecker columns",
                perm.len(),
                m1 * m2
            )));
        }
        let mut inv_perm = vec![usize::MAX; perm.len()];
        for (j, &v) in perm.iter().enumerate() {
            if v >= perm.len() || inv_perm[v] != usize::MAX {
                return Err(Error::ShapeMismatch(
                    "column map is not a permutation".into(),
                ));
            }
            inv_perm[v] = j;
        }
        let mut dense = Array2::zeros((n1 * n2, perm.len()));
        for (j, &v) in perm.iter().enumerate() {
            let (j1, j2) = (v / m2, v % m2);
            let (ca, cb) = (a.column(j1), b.column(j2));
            let mut col = dense.column_mut(j);
            for r1 in 0..n1 {
                for r2 in 0..n2 {
                    col[r1 * n2 + r2] = ca[r1] * cb[r2];
                }
            }
        }
        let akr = Array2::from_shape_fn((n1 * n1, m1), |(rc, j1)| {
            a[[rc / n1, j1]] * a[[rc % n1, j1]].conj()
        });
        let bkr = Array2::from_shape_fn((m2, n2 * n2), |(j2, rc)| {
            b[[rc / n2, j2]] * b[[rc % n2, j2]].conj()
        });
        let gram_a = hconj(&a).dot(&a);
        let gram_b = hconj(&b).dot(&b);
        Ok(Self {
            dense,
            kron: Some(KronFactors {
                akr_h: hconj(&akr),
                bkr_h: hconj(&bkr),
                akr,
                bkr,
                gram_a,
                gram_b,
                inv_perm,
                perm,
                a,
                b,
            }),
        })
    }

    pub fn nrows(&self) -> usize {
        self.dense.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.dense.ncols()
    }

    pub fn dense(&self) -> &Array2<C64> {
        &self.dense
    }

    /// True when the operator carries Kronecker factors (O(1) Gram lookups).
    pub fn has_kron_factors(&self) -> bool {
        self.kron.is_some()
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, C64> {
        self.dense.column(j)
    }

    /// Gathers a dense submatrix of the selected columns.
    pub fn columns_dense(&self, idx: &[usize]) -> Array2<C64> {
        let mut out = Array2::zeros((self.nrows(), idx.len()));
        for (p, &j) in idx.iter().enumerate() {
            out.column_mut(p).assign(&self.dense.column(j));
        }
        out
    }

    /// Returns a copy of the operator scaled by a real factor.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        match &self.kron {
            Some(k) => {
                let a = k.a.mapv(|z| z * factor);
                Self::from_kron(a, k.b.clone(), k.perm.clone())
            }
            None => Ok(Self::from_dense(self.dense.mapv(|z| z * factor))),
        }
    }

    /// Φ x.
    pub fn matvec(&self, x: &Array1<C64>) -> Array1<C64> {
        self.dense.dot(x)
    }

    /// Φ restricted to the given columns applied to coefficients.
    pub fn matvec_subset(&self, idx: &[usize], coeffs: &Array1<C64>) -> Array1<C64> {
        let mut out = Array1::zeros(self.nrows());
        for (p, &j) in idx.iter().enumerate() {
            let cj = coeffs[p];
            if cj != C_ZERO {
                out.scaled_add(cj, &self.dense.column(j));
            }
        }
        out
    }

    /// Φᴴ v.
    pub fn rmatvec(&self, v: &Array1<C64>) -> Array1<C64> {
        match &self.kron {
            Some(k) => {
                let (n1, m1) = k.a.dim();
                let (n2, m2) = k.b.dim();
                let vm = Array2::from_shape_fn((n2, n1), |(r2, r1)| v[r1 * n2 + r2]);
                let w = hconj(&k.b).dot(&vm).dot(&k.a.mapv(|z| z.conj()));
                Array1::from_shape_fn(m1 * m2, |j| {
                    let v = k.perm[j];
                    w[[v % m2, v / m2]]
                })
            }
            None => {
                let conj_v = v.mapv(|z| z.conj());
                self.dense.t().dot(&conj_v).mapv(|z| z.conj())
            }
        }
    }

    /// φ_iᴴ φ_j.
    pub fn gram_entry(&self, i: usize, j: usize) -> C64 {
        match &self.kron {
            Some(k) => {
                let m2 = k.b.ncols();
                let (vi, vj) = (k.perm[i], k.perm[j]);
                k.gram_a[[vi / m2, vj / m2]] * k.gram_b[[vi % m2, vj % m2]]
            }
            None => {
                let (ci, cj) = (self.dense.column(i), self.dense.column(j));
                ci.iter().zip(cj.iter()).map(|(x, y)| x.conj() * y).sum()
            }
        }
    }

    /// ‖φ_j‖².
    pub fn col_norm_sq(&self, j: usize) -> f64 {
        self.gram_entry(j, j).re
    }

    /// Full Hermitian Gram with non-negative column weights: Φ·diag(w)·Φᴴ.
    pub fn gram_weighted(&self, w: &[f64]) -> Array2<C64> {
        assert_eq!(w.len(), self.ncols());
        match &self.kron {
            Some(k) => {
                let (n1, m1) = k.a.dim();
                let (n2, m2) = k.b.dim();
                let wmat = Array2::from_shape_fn((m1, m2), |(j1, j2)| {
                    C64::new(w[k.inv_perm[j1 * m2 + j2]], 0.0)
                });
                // per-j1 receive-side Grams, then the transmit-side combine
                let mg = wmat.dot(&k.bkr); // m1 x n2²
                let s2 = k.akr.dot(&mg); // n1² x n2²
                let n = n1 * n2;
                let mut s = Array2::zeros((n, n));
                for r1 in 0..n1 {
                    for c1 in 0..n1 {
                        let src = s2.row(r1 * n1 + c1);
                        for r2 in 0..n2 {
                            let mut dst =
                                s.slice_mut(s![r1 * n2 + r2, c1 * n2..(c1 + 1) * n2]);
                            dst.assign(&src.slice(s![r2 * n2..(r2 + 1) * n2]));
                        }
                    }
                }
                s
            }
            None => {
                let mut scaled = self.dense.clone();
                for (j, mut col) in scaled.columns_mut().into_iter().enumerate() {
                    col.mapv_inplace(|z| z * w[j]);
                }
                scaled.dot(&hconj(&self.dense))
            }
        }
    }

    /// Diagonal entries φ_jᴴ·S·φ_j of the congruence with a Hermitian S,
    /// evaluated for every column.
    pub fn quad_diag(&self, s: &Array2<C64>) -> Vec<f64> {
        assert_eq!(s.dim(), (self.nrows(), self.nrows()));
        match &self.kron {
            Some(k) => {
                let (n1, m1) = k.a.dim();
                let (n2, m2) = k.b.dim();
                let mut s2 = Array2::zeros((n1 * n1, n2 * n2));
                for r1 in 0..n1 {
                    for c1 in 0..n1 {
                        let mut dst = s2.row_mut(r1 * n1 + c1);
                        for r2 in 0..n2 {
                            let src = s.slice(s![r1 * n2 + r2, c1 * n2..(c1 + 1) * n2]);
                            dst.slice_mut(s![r2 * n2..(r2 + 1) * n2]).assign(&src);
                        }
                    }
                }
                let m_all = k.akr_h.dot(&s2); // m1 x n2²
                let d = m_all.dot(&k.bkr_h); // m1 x m2
                (0..m1 * m2)
                    .map(|j| {
                        let v = k.perm[j];
                        d[[v / m2, v % m2]].re
                    })
                    .collect()
            }
            None => {
                let t = s.dot(&self.dense);
                (0..self.ncols())
                    .map(|j| {
                        self.dense
                            .column(j)
                            .iter()
                            .zip(t.column(j).iter())
                            .map(|(p, q)| (p.conj() * q).re)
                            .sum()
                    })
                    .collect()
            }
        }
    }

    /// Total coherence: Σ_{k≠l} |φ_kᴴ φ_l|².
    ///
    /// Under the Kronecker structure this reduces to sums over the factor
    /// Grams (Gram(A⊗B) = Gram(A) ⊗ Gram(B), and column permutations leave
    /// the set of inner products unchanged).
    pub fn total_coherence(&self) -> f64 {
        match &self.kron {
            Some(k) => {
                let all_a: f64 = k.gram_a.iter().map(|z| z.norm_sqr()).sum();
                let all_b: f64 = k.gram_b.iter().map(|z| z.norm_sqr()).sum();
                let diag_a: f64 = k.gram_a.diag().iter().map(|z| z.norm_sqr()).sum();
                let diag_b: f64 = k.gram_b.diag().iter().map(|z| z.norm_sqr()).sum();
                all_a * all_b - diag_a * diag_b
            }
            None => crate::sounding::total_coherence(&self.dense),
        }
    }
}
