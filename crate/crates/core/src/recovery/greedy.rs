//! Greedy matching-pursuit estimators.
//!
//! [`jomp`] runs two phases: groups of equi-spaced columns (one position per
//! block) are selected first to pin down the common support, then plain OMP
//! over the leftover single columns fills in the individual entries. Both
//! loops stop when either the iteration budget runs out or the residual
//! energy drops below its threshold. [`omp`] is the unstructured baseline.

use ndarray::prelude::*;
use num_complex::Complex64 as C64;

use crate::config::{Error, Result, SystemConfig};
use crate::linalg::{lstsq_min_norm, vec_norm_sq};
use crate::phi::PhiOperator;
use crate::recovery::solver::LowerChol;
use crate::recovery::{finalize_estimate, SparseEstimate};

/// Incremental least-squares projection onto a growing support.
///
/// The coefficients come from the normal equations (refactored per step —
/// supports stay small); a rank-deficient Gram falls back to a minimum-norm
/// SVD solve on the gathered columns.
struct SupportLs<'a> {
    phi: &'a PhiOperator,
    y: &'a Array1<C64>,
    phy: Array1<C64>,
    support: Vec<usize>,
    gram: Array2<C64>,
    coeffs: Array1<C64>,
    residual: Array1<C64>,
    rss: f64,
}

impl<'a> SupportLs<'a> {
    fn new(phi: &'a PhiOperator, y: &'a Array1<C64>) -> Self {
        Self {
            phi,
            y,
            phy: phi.rmatvec(y),
            support: Vec::new(),
            gram: Array2::zeros((0, 0)),
            coeffs: Array1::zeros(0),
            residual: y.clone(),
            rss: vec_norm_sq(y),
        }
    }

    fn contains(&self, j: usize) -> bool {
        self.support.contains(&j)
    }

    fn add(&mut self, idx: &[usize]) -> Result<()> {
        let old = self.support.len();
        self.support.extend_from_slice(idx);
        let new = self.support.len();
        let mut gram = Array2::zeros((new, new));
        gram.slice_mut(s![0..old, 0..old]).assign(&self.gram);
        for p in old..new {
            for q in 0..=p {
                let v = self.phi.gram_entry(self.support[q], self.support[p]);
                gram[[q, p]] = v;
                gram[[p, q]] = v.conj();
            }
        }
        self.gram = gram;
        let rhs = Array1::from_iter(self.support.iter().map(|&j| self.phy[j]));
        self.coeffs = match LowerChol::new(&self.gram).and_then(|c| c.solve_vec(&rhs)) {
            Ok(x) => x,
            Err(_) => lstsq_min_norm(&self.phi.columns_dense(&self.support), self.y)?,
        };
        self.residual = self.y - &self.phi.matvec_subset(&self.support, &self.coeffs);
        self.rss = vec_norm_sq(&self.residual);
        Ok(())
    }
}

/// Joint orthogonal matching pursuit.
///
/// Phase one greedily selects whole column groups {b, B+b, …, (K−1)B+b}
/// by their aggregate correlation with the residual (at most `t1_max`
/// groups, stopping early once ‖r‖² ≤ `delta1`); phase two continues with
/// single columns from the complement under (`t2_max`, `delta2`). The
/// output is the pseudo-inverse least-squares fit on the final support.
pub fn jomp(
    phi: &PhiOperator,
    y: &Array1<C64>,
    t1_max: usize,
    t2_max: usize,
    delta1: f64,
    delta2: f64,
    cfg: &SystemConfig,
) -> Result<SparseEstimate> {
    let b = cfg.block_size();
    let k = cfg.pair_count();
    if phi.ncols() != b * k {
        return Err(Error::ShapeMismatch(format!(
            "operator has {} columns, expected B·K = {}",
            phi.ncols(),
            b * k
        )));
    }
    if t1_max < 1 {
        return Err(Error::InvalidConfig("jomp requires t1 >= 1".into()));
    }
    if delta1 < 0.0 || delta2 < 0.0 {
        return Err(Error::InvalidConfig("jomp thresholds must be >= 0".into()));
    }

    let mut ls = SupportLs::new(phi, y);
    let mut common_blocks: Vec<usize> = Vec::new();
    let mut t1 = 1usize;
    while t1 <= t1_max && ls.rss > delta1 {
        let corr = phi.rmatvec(&ls.residual);
        let mut best: Option<(usize, f64)> = None;
        for blk in 0..b {
            if common_blocks.contains(&blk) {
                continue;
            }
            let energy: f64 = (0..k).map(|kk| corr[kk * b + blk].norm_sqr()).sum();
            if best.map_or(true, |(_, e)| energy > e) {
                best = Some((blk, energy));
            }
        }
        match best {
            Some((blk, energy)) if energy > 1e-28 => {
                common_blocks.push(blk);
                let group: Vec<usize> = (0..k).map(|kk| kk * b + blk).collect();
                ls.add(&group)?;
            }
            _ => break,
        }
        t1 += 1;
    }
    let support_common: Vec<usize> = ls.support.clone();

    let mut t2 = 1usize;
    while t2 <= t2_max && ls.rss > delta2 {
        let corr = phi.rmatvec(&ls.residual);
        let mut best: Option<(usize, f64)> = None;
        for j in 0..b * k {
            if ls.contains(j) {
                continue;
            }
            let energy = corr[j].norm_sqr();
            if best.map_or(true, |(_, e)| energy > e) {
                best = Some((j, energy));
            }
        }
        match best {
            Some((j, energy)) if energy > 1e-28 => ls.add(&[j])?,
            _ => break,
        }
        t2 += 1;
    }

    let mut support = ls.support.clone();
    support.sort_unstable();
    let mut x_hat = Array1::zeros(b * k);
    if !support.is_empty() {
        let coeffs = lstsq_min_norm(&phi.columns_dense(&support), y)?;
        for (p, &j) in support.iter().enumerate() {
            x_hat[j] = coeffs[p];
        }
    }
    finalize_estimate(
        phi,
        y,
        x_hat,
        support_common,
        support,
        (t1 - 1) + (t2 - 1),
        cfg,
    )
}

/// Plain orthogonal matching pursuit over single columns.
pub fn omp(
    phi: &PhiOperator,
    y: &Array1<C64>,
    t_max: usize,
    delta: f64,
    cfg: &SystemConfig,
) -> Result<SparseEstimate> {
    if phi.ncols() != cfg.unknown_count() {
        return Err(Error::ShapeMismatch(format!(
            "operator has {} columns, expected {}",
            phi.ncols(),
            cfg.unknown_count()
        )));
    }
    if delta < 0.0 {
        return Err(Error::InvalidConfig("omp threshold must be >= 0".into()));
    }
    let mut ls = SupportLs::new(phi, y);
    let mut t = 1usize;
    while t <= t_max && ls.rss > delta {
        let corr = phi.rmatvec(&ls.residual);
        let mut best: Option<(usize, f64)> = None;
        for j in 0..phi.ncols() {
            if ls.contains(j) {
                continue;
            }
            let energy = corr[j].norm_sqr();
            if best.map_or(true, |(_, e)| energy > e) {
                best = Some((j, energy));
            }
        }
        match best {
            Some((j, energy)) if energy > 1e-28 => ls.add(&[j])?,
            _ => break,
        }
        t += 1;
    }
    let mut support = ls.support.clone();
    support.sort_unstable();
    let mut x_hat = Array1::zeros(phi.ncols());
    if !support.is_empty() {
        let coeffs = lstsq_min_norm(&phi.columns_dense(&support), y)?;
        for (p, &j) in support.iter().enumerate() {
            x_hat[j] = coeffs[p];
        }
    }
    finalize_estimate(phi, y, x_hat, Vec::new(), support, t - 1, cfg)
}
