//! Shared posterior-covariance solves for the Bayesian estimators.
//!
//! Both SBL variants repeatedly need, for Σ = shift·I + Φ·diag(w)·Φᴴ with
//! non-negative weights w:
//!   - Φᴴ·Σ⁻¹·y (the weighted posterior mean divided by the weights), and
//!   - selected diagonal entries of Φᴴ·Σ⁻¹·Φ (posterior variances).
//!
//! When few weights are nonzero it is cheaper to go through the Gram of the
//! active columns (matrix-inversion-lemma form) than to factor the N×N
//! matrix, so both routes are provided and chosen by active-set size. The
//! routes agree to solver precision and are cross-tested.

use ndarray::prelude::*;
use ndarray_linalg::{Cholesky, Diag, InverseC, SolveTriangular, UPLO};
use num_complex::Complex64 as C64;

use crate::config::{Error, Result};
use crate::linalg::hconj;
use crate::phi::PhiOperator;

pub(crate) fn active_set(w: &[f64]) -> Vec<usize> {
    (0..w.len()).filter(|&j| w[j] > 0.0).collect()
}

/// Lower Cholesky factor with a trace-scaled ridge retry.
pub(crate) struct LowerChol {
    l: Array2<C64>,
    lh: Array2<C64>,
}

impl LowerChol {
    pub fn new(s: &Array2<C64>) -> Result<Self> {
        let l = match s.cholesky(UPLO::Lower) {
            Ok(l) => l,
            Err(_) => {
                let n = s.nrows();
                let tr: f64 = (0..n).map(|i| s[[i, i]].re).sum();
                let ridge = 1e-12 * (tr.abs() / n as f64).max(1.0);
                let mut sr = s.clone();
                for i in 0..n {
                    sr[[i, i]] += C64::new(ridge, 0.0);
                }
                sr.cholesky(UPLO::Lower)
                    .map_err(|e| Error::Numerical(format!("cholesky failed after ridge: {e}")))?
            }
        };
        let lh = hconj(&l);
        Ok(Self { l, lh })
    }

    /// Full solve S⁻¹ b.
    pub fn solve_vec(&self, b: &Array1<C64>) -> Result<Array1<C64>> {
        let z = self
            .l
            .solve_triangular(UPLO::Lower, Diag::NonUnit, b)
            .map_err(|e| Error::Numerical(format!("forward substitution failed: {e}")))?;
        self.lh
            .solve_triangular(UPLO::Upper, Diag::NonUnit, &z)
            .map_err(|e| Error::Numerical(format!("back substitution failed: {e}")))
    }

    /// Half solve L⁻¹ B for multiple right-hand sides.
    pub fn half_solve(&self, b: &Array2<C64>) -> Result<Array2<C64>> {
        self.l
            .solve_triangular(UPLO::Lower, Diag::NonUnit, b)
            .map_err(|e| Error::Numerical(format!("triangular solve failed: {e}")))
    }
}

/// Hermitian PD inverse with the same ridge retry.
pub(crate) fn herm_inverse(s: &Array2<C64>) -> Result<Array2<C64>> {
    match s.invc() {
        Ok(inv) => Ok(inv),
        Err(_) => {
            let n = s.nrows();
            let tr: f64 = (0..n).map(|i| s[[i, i]].re).sum();
            let ridge = 1e-12 * (tr.abs() / n as f64).max(1.0);
            let mut sr = s.clone();
            for i in 0..n {
                sr[[i, i]] += C64::new(ridge, 0.0);
            }
            sr.invc()
                .map_err(|e| Error::Numerical(format!("inverse failed after ridge: {e}")))
        }
    }
}

fn use_gram_route(phi: &PhiOperator, active: usize, force: Option<bool>) -> bool {
    match force {
        Some(f) => f,
        // Gram-entry lookups are O(1) only under the Kronecker structure.
        None => phi.has_kron_factors() && 2 * active <= phi.nrows(),
    }
}

/// Gram of the active columns plus shift/w on the diagonal.
fn active_capacitance(
    phi: &PhiOperator,
    w: &[f64],
    shift: f64,
    active: &[usize],
) -> Array2<C64> {
    let a = active.len();
    let mut c = Array2::zeros((a, a));
    for (p, &jp) in active.iter().enumerate() {
        for (q, &jq) in active.iter().enumerate() {
            c[[p, q]] = phi.gram_entry(jp, jq);
        }
        c[[p, p]] += C64::new(shift / w[jp], 0.0);
    }
    c
}

/// Φᴴ Σ⁻¹ y for Σ = shift·I + Φ·diag(w)·Φᴴ.
pub(crate) fn sigma_phz(
    phi: &PhiOperator,
    w: &[f64],
    shift: f64,
    y: &Array1<C64>,
    force_gram_route: Option<bool>,
) -> Result<Array1<C64>> {
    debug_assert!(shift > 0.0);
    let active = active_set(w);
    let phy = phi.rmatvec(y);
    if active.is_empty() {
        return Ok(phy.mapv(|z| z / shift));
    }
    if use_gram_route(phi, active.len(), force_gram_route) {
        let c = active_capacitance(phi, w, shift, &active);
        let chol = LowerChol::new(&c)?;
        let t = Array1::from_iter(active.iter().map(|&j| phy[j]));
        let u = chol.solve_vec(&t)?;
        let m = phi.ncols();
        let mut phz = Array1::zeros(m);
        for j in 0..m {
            let corr: C64 = active
                .iter()
                .enumerate()
                .map(|(p, &jp)| phi.gram_entry(j, jp) * u[p])
                .sum();
            phz[j] = (phy[j] - corr) / shift;
        }
        Ok(phz)
    } else {
        let mut s = phi.gram_weighted(w);
        for i in 0..s.nrows() {
            s[[i, i]] += C64::new(shift, 0.0);
        }
        let chol = LowerChol::new(&s)?;
        let z = chol.solve_vec(y)?;
        Ok(phi.rmatvec(&z))
    }
}

/// Diagonal entries φ_jᴴ Σ⁻¹ φ_j at the requested indices, for
/// Σ = shift·I + Φ·diag(w)·Φᴴ.
pub(crate) fn sigma_inv_diag(
    phi: &PhiOperator,
    w: &[f64],
    shift: f64,
    idx: &[usize],
    force_gram_route: Option<bool>,
) -> Result<Vec<f64>> {
    debug_assert!(shift > 0.0);
    let active = active_set(w);
    if active.is_empty() {
        return Ok(idx.iter().map(|&j| phi.col_norm_sq(j) / shift).collect());
    }
    if use_gram_route(phi, active.len(), force_gram_route) {
        let c = active_capacitance(phi, w, shift, &active);
        let chol = LowerChol::new(&c)?;
        let a = active.len();
        let mut gm = Array2::zeros((a, idx.len()));
        for (t, &j) in idx.iter().enumerate() {
            for (p, &jp) in active.iter().enumerate() {
                gm[[p, t]] = phi.gram_entry(jp, j);
            }
        }
        let x = chol.half_solve(&gm)?;
        Ok(idx
            .iter()
            .enumerate()
            .map(|(t, &j)| {
                let reduced: f64 = x.column(t).iter().map(|z| z.norm_sqr()).sum();
                (phi.col_norm_sq(j) - reduced) / shift
            })
            .collect())
    } else {
        let mut s = phi.gram_weighted(w);
        for i in 0..s.nrows() {
            s[[i, i]] += C64::new(shift, 0.0);
        }
        let sinv = herm_inverse(&s)?;
        let full = phi.quad_diag(&sinv);
        Ok(idx.iter().map(|&j| full[j]).collect())
    }
}
