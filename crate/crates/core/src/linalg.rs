//! Complex linear-algebra helpers shared across the crate.
//!
//! Everything here is a thin layer over ndarray + LAPACK: Kronecker
//! products, Hermitian solves with a ridge fallback, minimum-norm least
//! squares with a relative rank tolerance, and small utilities for unitary
//! DFT matrices and eigenvector phase conventions.

use ndarray::prelude::*;
use ndarray_linalg::{CholeskyFactorized, Eigh, FactorizeC, InverseC, SolveC, UPLO, SVD};
use num_complex::Complex64 as C64;

use crate::config::{Error, Result};

pub const C_ZERO: C64 = C64::new(0.0, 0.0);
pub const C_ONE: C64 = C64::new(1.0, 0.0);

/// Relative singular-value cutoff used by every pseudo-inverse solve.
pub const PINV_RTOL: f64 = 1e-10;

/// Classical n-point unitary DFT matrix, entries exp(-2πi·l·k/n)/√n.
pub fn dft_matrix(n: usize) -> Array2<C64> {
    let scale = 1.0 / (n as f64).sqrt();
    Array2::from_shape_fn((n, n), |(l, k)| {
        let phase = -2.0 * std::f64::consts::PI * (l as f64) * (k as f64) / n as f64;
        C64::from_polar(scale, phase)
    })
}

/// Moves the columns of `a` to the right by `shift` positions, circularly.
pub fn circshift_cols(a: &Array2<C64>, shift: usize) -> Array2<C64> {
    let n = a.ncols();
    let s = shift % n;
    let mut out = Array2::zeros(a.raw_dim());
    for c in 0..n {
        out.column_mut(c).assign(&a.column((c + n - s) % n));
    }
    out
}

/// Kronecker product a ⊗ b.
pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let v = a[[i, j]];
            if v != C_ZERO {
                let mut block = out.slice_mut(s![i * br..(i + 1) * br, j * bc..(j + 1) * bc]);
                block.assign(&b.mapv(|x| x * v));
            }
        }
    }
    out
}

/// Conjugate transpose.
pub fn hconj(a: &Array2<C64>) -> Array2<C64> {
    let mut out = Array2::zeros((a.ncols(), a.nrows()));
    for ((i, j), v) in a.indexed_iter() {
        out[[j, i]] = v.conj();
    }
    out
}

pub fn frob_norm_sq(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

pub fn vec_norm_sq(v: &Array1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Column-major vectorization.
pub fn vec_of(a: &Array2<C64>) -> Array1<C64> {
    let (r, c) = a.dim();
    let mut out = Array1::zeros(r * c);
    for j in 0..c {
        for i in 0..r {
            out[j * r + i] = a[[i, j]];
        }
    }
    out
}

/// Inverse of [`vec_of`] for a known row count.
pub fn unvec(v: &Array1<C64>, rows: usize) -> Array2<C64> {
    let cols = v.len() / rows;
    Array2::from_shape_fn((rows, cols), |(i, j)| v[j * rows + i])
}

/// Factorized Hermitian positive-definite system.
///
/// Falls back to a trace-scaled ridge when the Cholesky factorization
/// reports a non-positive pivot.
pub struct HermSolver {
    factor: CholeskyFactorized<ndarray::OwnedRepr<C64>>,
}

impl HermSolver {
    pub fn new(s: &Array2<C64>) -> Result<Self> {
        match s.factorizec(UPLO::Lower) {
            Ok(factor) => Ok(Self { factor }),
            Err(_) => {
                let n = s.nrows();
                let tr: f64 = (0..n).map(|i| s[[i, i]].re).sum();
                let ridge = 1e-12 * (tr.abs() / n as f64).max(1.0);
                let mut sr = s.clone();
                for i in 0..n {
                    sr[[i, i]] += C64::new(ridge, 0.0);
                }
                let factor = sr
                    .factorizec(UPLO::Lower)
                    .map_err(|e| Error::Numerical(format!("cholesky failed after ridge: {e}")))?;
                Ok(Self { factor })
            }
        }
    }

    pub fn solve_vec(&self, b: &Array1<C64>) -> Result<Array1<C64>> {
        self.factor
            .solvec(b)
            .map_err(|e| Error::Numerical(format!("hermitian solve failed: {e}")))
    }

    pub fn solve_mat(&self, b: &Array2<C64>) -> Result<Array2<C64>> {
        let mut out = Array2::zeros(b.raw_dim());
        for (j, col) in b.columns().into_iter().enumerate() {
            let x = self.solve_vec(&col.to_owned())?;
            out.column_mut(j).assign(&x);
        }
        Ok(out)
    }

    /// Explicit inverse (zpotri path).
    pub fn inverse(&self) -> Result<Array2<C64>> {
        self.factor
            .invc()
            .map_err(|e| Error::Numerical(format!("hermitian inverse failed: {e}")))
    }
}

/// Solve an HPD system with the ridge fallback in one call.
pub fn herm_solve(s: &Array2<C64>, b: &Array1<C64>) -> Result<Array1<C64>> {
    HermSolver::new(s)?.solve_vec(b)
}

/// Minimum-norm least-squares solution of `a x = b` via SVD.
///
/// Singular values below `PINV_RTOL` times the largest are treated as zero,
/// so rank-deficient systems quietly fall back to the minimum-norm answer.
pub fn lstsq_min_norm(a: &Array2<C64>, b: &Array1<C64>) -> Result<Array1<C64>> {
    if a.nrows() != b.len() {
        return Err(Error::ShapeMismatch(format!(
            "lstsq: matrix has {} rows but rhs has {}",
            a.nrows(),
            b.len()
        )));
    }
    let (u, sv, vt) = a
        .svd(true, true)
        .map_err(|e| Error::Numerical(format!("svd failed: {e}")))?;
    let u = u.expect("svd requested u");
    let vt = vt.expect("svd requested vt");
    let smax = sv.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = smax * PINV_RTOL;
    let mut x = Array1::zeros(a.ncols());
    for (i, &s) in sv.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            let coeff: C64 = u.column(i).iter().zip(b.iter()).map(|(ui, bi)| ui.conj() * bi).sum();
            let scaled = coeff / C64::new(s, 0.0);
            for (j, vj) in vt.row(i).iter().enumerate() {
                x[j] += vj.conj() * scaled;
            }
        }
    }
    Ok(x)
}

/// Principal eigenpair of a Hermitian matrix.
///
/// The eigenvector is normalized so its largest-modulus entry is real and
/// positive, making the output independent of the eigensolver's phase
/// convention.
pub fn principal_eigvec_hermitian(t: &Array2<C64>) -> Result<(f64, Array1<C64>)> {
    let (vals, vecs) = t
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e}")))?;
    let last = vals.len() - 1;
    let mut v = vecs.column(last).to_owned();
    let mut best = 0usize;
    let mut best_mag = -1.0;
    for (i, z) in v.iter().enumerate() {
        let m = z.norm_sqr();
        if m > best_mag {
            best_mag = m;
            best = i;
        }
    }
    let anchor = v[best];
    if anchor.norm() > 0.0 {
        let rot = anchor.conj() / anchor.norm();
        v.mapv_inplace(|z| z * rot);
    }
    Ok((vals[last], v))
}

/// log2 |det(I + a)| for a matrix whose eigenvalues are real and >= 0.
pub fn log2_det_i_plus(a: &Array2<C64>) -> Result<f64> {
    use ndarray_linalg::Determinant;
    let n = a.nrows();
    let mut m = a.clone();
    for i in 0..n {
        m[[i, i]] += C_ONE;
    }
    let det = m
        .det()
        .map_err(|e| Error::Numerical(format!("determinant failed: {e}")))?;
    Ok(det.norm().ln() / std::f64::consts::LN_2)
}

/// Water-filling power allocation.
///
/// Maximizes Σ log(1 + c_i p_i) subject to Σ p_i = total, p_i ≥ 0, for
/// positive coefficients c_i; entries with c_i = 0 receive no power.
pub fn water_fill(coeffs: &[f64], total: f64) -> Vec<f64> {
    let n = coeffs.len();
    let mut powers = vec![0.0; n];
    if total <= 0.0 {
        return powers;
    }
    let mut order: Vec<usize> = (0..n).filter(|&i| coeffs[i] > 0.0).collect();
    if order.is_empty() {
        return powers;
    }
    // Sort by inverse coefficient ascending; the active set is a prefix.
    order.sort_by(|&a, &b| {
        (1.0 / coeffs[a])
            .partial_cmp(&(1.0 / coeffs[b]))
            .expect("finite coefficients")
    });
    let mut active = order.len();
    loop {
        let inv_sum: f64 = order[..active].iter().map(|&i| 1.0 / coeffs[i]).sum();
        let level = (total + inv_sum) / active as f64;
        let worst = order[active - 1];
        if level - 1.0 / coeffs[worst] >= 0.0 || active == 1 {
            for &i in &order[..active] {
                powers[i] = (level - 1.0 / coeffs[i]).max(0.0);
            }
            break;
        }
        active -= 1;
    }
    powers
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn dft_is_unitary() {
        for n in [1usize, 2, 3, 8, 10] {
            let f = dft_matrix(n);
            let g = hconj(&f).dot(&f);
            let mut err = 0.0f64;
            for ((i, j), v) in g.indexed_iter() {
                let want = if i == j { C_ONE } else { C_ZERO };
                err += (v - want).norm_sqr();
            }
            assert!(err.sqrt() < 1e-12, "n={n} err={err}");
        }
    }

    #[test]
    fn circshift_zero_is_identity() {
        let f = dft_matrix(4);
        let s = circshift_cols(&f, 0);
        assert_eq!(f, s);
        // shifting right by 1 moves column 0 to position 1
        let s1 = circshift_cols(&f, 1);
        assert_eq!(s1.column(1), f.column(0));
        assert_eq!(s1.column(0), f.column(3));
    }

    #[test]
    fn kron_matches_identity_block() {
        let i2 = Array2::<C64>::eye(2);
        let b = dft_matrix(3);
        let k = kron(&i2, &b);
        assert_eq!(k.dim(), (6, 6));
        assert_eq!(k[[0, 0]], b[[0, 0]]);
        assert_eq!(k[[3, 3]], b[[0, 0]]);
        assert_eq!(k[[0, 3]], C_ZERO);
    }

    #[test]
    fn lstsq_solves_and_handles_rank_deficiency() {
        // full-rank 3x2
        let a = ndarray::array![
            [C64::new(1.0, 0.0), C64::new(0.0, 1.0)],
            [C64::new(0.0, 0.0), C64::new(2.0, 0.0)],
            [C64::new(1.0, -1.0), C64::new(0.0, 0.0)],
        ];
        let x_true = ndarray::array![C64::new(0.5, -0.25), C64::new(-1.0, 2.0)];
        let b = a.dot(&x_true);
        let x = lstsq_min_norm(&a, &b).unwrap();
        for (xi, ti) in x.iter().zip(x_true.iter()) {
            assert!((xi - ti).norm() < 1e-10);
        }
        // rank-deficient: duplicated column -> minimum-norm splits evenly
        let (r, _c) = a.dim();
        let mut ad = Array2::zeros((r, 2));
        ad.column_mut(0).assign(&a.column(0));
        ad.column_mut(1).assign(&a.column(0));
        let b2 = a.column(0).to_owned();
        let x2 = lstsq_min_norm(&ad, &b2).unwrap();
        assert!((x2[0] - C64::new(0.5, 0.0)).norm() < 1e-10);
        assert!((x2[1] - C64::new(0.5, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn principal_eigvec_anchors_phase() {
        let v = ndarray::array![C64::new(0.0, 0.8), C64::new(0.6, 0.0)];
        let mut t = Array2::zeros((2, 2));
        for i in 0..2 {
            for j in 0..2 {
                t[[i, j]] = v[i] * v[j].conj() * 3.0;
            }
        }
        let (lam, u) = principal_eigvec_hermitian(&t).unwrap();
        assert_abs_diff_eq!(lam, 3.0, epsilon = 1e-10);
        // largest-modulus entry is real positive
        assert!(u[0].im.abs() < 1e-12 && u[0].re > 0.0);
        let align = u
            .iter()
            .zip(v.iter())
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .norm();
        assert_abs_diff_eq!(align, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn water_fill_two_level_closed_form() {
        // high budget: both active, p_i = level - 1/c_i
        let c = [4.0, 1.0];
        let p = water_fill(&c, 2.0);
        let level = (2.0 + 0.25 + 1.0) / 2.0;
        assert_abs_diff_eq!(p[0], level - 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], level - 1.0, epsilon = 1e-12);
        // tiny budget: only the strong mode is active
        let p = water_fill(&c, 0.1);
        assert_abs_diff_eq!(p[0], 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.iter().sum::<f64>(), 0.1, epsilon = 1e-12);
    }

    #[test]
    fn herm_solver_applies_ridge_on_singular_input() {
        let s = Array2::<C64>::zeros((3, 3));
        let b = ndarray::array![C_ONE, C_ONE, C_ONE];
        // all-zero matrix is not PD; ridge makes it solvable
        let x = herm_solve(&s, &b).unwrap();
        assert!(x.iter().all(|z| z.is_finite()));
    }
}
