//! Sparse Bayesian estimators.
//!
//! [`sbl`] is the classic type-II scheme: Gaussian prior with per-element
//! variances, fixed-point updates γ_j ← |μ_j|² + [Σ_x]_jj. [`jsbl_l2`]
//! decomposes the unknown into an element-sparse part s and a row-sparse
//! part c (rows shared across blocks), carries separate hyperparameter
//! vectors γ^s (length B·K) and γ^c (length B), and alternates closed-form
//! minimizers of an upper-bounded cost with ℓ2-reweighted hyperparameter
//! updates.
//!
//! Hyperparameters that fall below 1e-12 of their vector's maximum are
//! frozen at exactly zero; zero is an absorbing state of both fixed-point
//! maps, so this only truncates float dust while keeping the active set
//! small enough for the Gram-route solves.

use ndarray::prelude::*;
use num_complex::Complex64 as C64;

use crate::config::{Error, Result, SystemConfig};
use crate::linalg::{vec_norm_sq, C_ZERO};
use crate::phi::PhiOperator;
use crate::recovery::solver::{sigma_inv_diag, sigma_phz};
use crate::recovery::{finalize_estimate, SparseEstimate};

const PRUNE_REL: f64 = 1e-12;
/// Relative hyperparameter threshold used only to report support estimates.
const SUPPORT_REL: f64 = 1e-6;

fn prune(gamma: &mut [f64]) {
    let max = gamma.iter().cloned().fold(0.0f64, f64::max);
    if max > 0.0 {
        let floor = max * PRUNE_REL;
        for g in gamma.iter_mut() {
            if *g < floor {
                *g = 0.0;
            }
        }
    }
}

fn support_above(gamma: &[f64], rel: f64) -> Vec<usize> {
    let max = gamma.iter().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    (0..gamma.len()).filter(|&j| gamma[j] > rel * max).collect()
}

/// Classic sparse Bayesian learning baseline.
///
/// Iterates the posterior moments of x under the prior CN(0, diag(γ)) and
/// the fixed-point update γ_j ← |μ_j|² + [Σ_x]_jj, stopping when the
/// largest hyperparameter change drops below `eps` or after `t_max`
/// iterations. Returns the posterior mean under the final hyperparameters.
pub fn sbl(
    phi: &PhiOperator,
    y: &Array1<C64>,
    lambda: f64,
    t_max: usize,
    eps: f64,
    cfg: &SystemConfig,
) -> Result<SparseEstimate> {
    if lambda <= 0.0 {
        return Err(Error::InvalidConfig("sbl requires lambda > 0".into()));
    }
    let m = phi.ncols();
    let mut gamma = vec![1.0f64; m];
    let mut iterations = 0;
    for t in 1..=t_max {
        iterations = t;
        let phz = sigma_phz(phi, &gamma, lambda, y, None)?;
        let active: Vec<usize> = (0..m).filter(|&j| gamma[j] > 0.0).collect();
        let diag = sigma_inv_diag(phi, &gamma, lambda, &active, None)?;
        let mut max_delta = 0.0f64;
        for (p, &j) in active.iter().enumerate() {
            let mu = gamma[j] * phz[j];
            let post_var = (gamma[j] - gamma[j] * gamma[j] * diag[p]).max(0.0);
            let updated = mu.norm_sqr() + post_var;
            max_delta = max_delta.max((updated - gamma[j]).abs());
            gamma[j] = updated;
        }
        prune(&mut gamma);
        if max_delta < eps {
            break;
        }
    }
    let phz = sigma_phz(phi, &gamma, lambda, y, None)?;
    let x_hat = Array1::from_shape_fn(m, |j| phz[j] * gamma[j]);
    let full = support_above(&gamma, SUPPORT_REL);
    finalize_estimate(phi, y, x_hat, Vec::new(), full, iterations, cfg)
}

/// Iteration state of [`jsbl_l2`]: hyperparameters, the two signal
/// components, and the reweighting variables.
#[derive(Debug, Clone)]
pub struct SblState {
    /// Individual hyperparameters, length B·K.
    pub gamma_s: Vec<f64>,
    /// Common (row) hyperparameters, length B.
    pub gamma_c: Vec<f64>,
    /// Element-sparse component.
    pub s: Array1<C64>,
    /// Row-sparse component.
    pub c: Array1<C64>,
    /// Reweighting variables for the individual part, length B·K.
    pub z_s: Vec<f64>,
    /// Reweighting variables for the common part, length B.
    pub z_c: Vec<f64>,
}

/// Surrogate-cost samples around one iteration, taken at that iteration's
/// reweighting variables: before any update, after the (s, c) refresh, and
/// after the hyperparameter refresh.
#[derive(Debug, Clone, Copy)]
pub struct SurrogateTrace {
    pub before: f64,
    pub after_sc: f64,
    pub after_gamma: f64,
}

fn expand_row_weights(gamma_c: &[f64], k: usize) -> Vec<f64> {
    let b = gamma_c.len();
    let mut w = vec![0.0; b * k];
    for kk in 0..k {
        w[kk * b..(kk + 1) * b].copy_from_slice(gamma_c);
    }
    w
}

/// Upper-bound cost with the conjugate terms dropped (they depend only on
/// the fixed reweighting variables).
#[allow(clippy::too_many_arguments)]
fn surrogate_cost(
    phi: &PhiOperator,
    y: &Array1<C64>,
    lambda: f64,
    beta: f64,
    s: &Array1<C64>,
    c: &Array1<C64>,
    gamma_s: &[f64],
    gamma_c: &[f64],
    z_s: &[f64],
    z_c: &[f64],
    k: usize,
) -> f64 {
    let b = gamma_c.len();
    let x = s + c;
    let fit = vec_norm_sq(&(y - &phi.matvec(&x)));
    let mut t_s = 0.0;
    for (j, &g) in gamma_s.iter().enumerate() {
        if g > 0.0 {
            t_s += (s[j].norm_sqr() + beta * z_s[j]) / g + beta * g.ln();
        }
    }
    let mut t_c = 0.0;
    for (bi, &g) in gamma_c.iter().enumerate() {
        if g > 0.0 {
            let row_energy: f64 = (0..k).map(|kk| c[kk * b + bi].norm_sqr()).sum();
            t_c += (row_energy + z_c[bi]) / g + k as f64 * g.ln();
        }
    }
    fit + lambda * (t_s + t_c)
}

#[allow(clippy::too_many_arguments)]
fn jsbl_core(
    phi: &PhiOperator,
    y: &Array1<C64>,
    lambda: f64,
    beta: f64,
    t_max: usize,
    eps: f64,
    cfg: &SystemConfig,
    prune_enabled: bool,
    mut trace: Option<&mut Vec<SurrogateTrace>>,
) -> Result<(SparseEstimate, SblState)> {
    if lambda <= 0.0 || beta <= 0.0 {
        return Err(Error::InvalidConfig(
            "jsbl_l2 requires lambda > 0 and beta > 0".into(),
        ));
    }
    let m = phi.ncols();
    let b = cfg.block_size();
    let k = cfg.pair_count();
    if m != b * k {
        return Err(Error::ShapeMismatch(format!(
            "operator has {m} columns, expected B·K = {}",
            b * k
        )));
    }
    let half = lambda / 2.0;
    let mut gamma_s = vec![1.0f64; m];
    let mut gamma_c = vec![1.0f64; b];
    let mut s_vec: Array1<C64> = Array1::zeros(m);
    let mut c_vec: Array1<C64> = Array1::zeros(m);
    let mut z_s = vec![0.0f64; m];
    let mut z_c = vec![0.0f64; b];
    let mut iterations = 0;

    for t in 1..=t_max {
        iterations = t;
        let s_old = s_vec.clone();
        let c_old = c_vec.clone();
        let gamma_s_old = trace.is_some().then(|| gamma_s.clone());
        let gamma_c_old = trace.is_some().then(|| gamma_c.clone());

        // (s, c) refresh from the combined covariance
        let w_c = expand_row_weights(&gamma_c, k);
        let w_sc: Vec<f64> = (0..m).map(|j| gamma_s[j] + w_c[j]).collect();
        let phz = sigma_phz(phi, &w_sc, lambda, y, None)?;
        for j in 0..m {
            s_vec[j] = phz[j] * gamma_s[j];
            c_vec[j] = phz[j] * w_c[j];
        }

        // reweighting variables (posterior variances of each component)
        let active_s: Vec<usize> = (0..m).filter(|&j| gamma_s[j] > 0.0).collect();
        let d_s = sigma_inv_diag(phi, &gamma_s, half, &active_s, None)?;
        z_s.iter_mut().for_each(|z| *z = 0.0);
        for (p, &j) in active_s.iter().enumerate() {
            z_s[j] = (gamma_s[j] - gamma_s[j] * gamma_s[j] * d_s[p]).max(0.0);
        }
        let active_c: Vec<usize> = (0..m).filter(|&j| w_c[j] > 0.0).collect();
        let d_c = sigma_inv_diag(phi, &w_c, half, &active_c, None)?;
        let mut d_c_full = vec![0.0f64; m];
        for (p, &j) in active_c.iter().enumerate() {
            d_c_full[j] = d_c[p];
        }
        for bi in 0..b {
            let g = gamma_c[bi];
            z_c[bi] = if g > 0.0 {
                (0..k)
                    .map(|kk| (g - g * g * d_c_full[kk * b + bi]).max(0.0))
                    .sum()
            } else {
                0.0
            };
        }

        // hyperparameter refresh
        for j in 0..m {
            if gamma_s[j] > 0.0 {
                gamma_s[j] = s_vec[j].norm_sqr() / beta + z_s[j];
            }
        }
        for bi in 0..b {
            if gamma_c[bi] > 0.0 {
                let row_energy: f64 = (0..k).map(|kk| c_vec[kk * b + bi].norm_sqr()).sum();
                gamma_c[bi] = (row_energy + z_c[bi]) / k as f64;
            }
        }
        if prune_enabled {
            prune(&mut gamma_s);
            prune(&mut gamma_c);
        }

        if let Some(tr) = trace.as_deref_mut() {
            let gs_old = gamma_s_old.as_ref().expect("saved with trace");
            let gc_old = gamma_c_old.as_ref().expect("saved with trace");
            tr.push(SurrogateTrace {
                before: surrogate_cost(
                    phi, y, lambda, beta, &s_old, &c_old, gs_old, gc_old, &z_s, &z_c, k,
                ),
                after_sc: surrogate_cost(
                    phi, y, lambda, beta, &s_vec, &c_vec, gs_old, gc_old, &z_s, &z_c, k,
                ),
                after_gamma: surrogate_cost(
                    phi, y, lambda, beta, &s_vec, &c_vec, &gamma_s, &gamma_c, &z_s, &z_c, k,
                ),
            });
        }

        let change = vec_norm_sq(&(&(&s_vec + &c_vec) - &(&s_old + &c_old)));
        if change <= eps {
            break;
        }
    }

    // final estimate under the final hyperparameters
    let w_c = expand_row_weights(&gamma_c, k);
    let w_sc: Vec<f64> = (0..m).map(|j| gamma_s[j] + w_c[j]).collect();
    let phz = sigma_phz(phi, &w_sc, lambda, y, None)?;
    let x_hat = Array1::from_shape_fn(m, |j| phz[j] * w_sc[j]);

    let common_rows = support_above(&gamma_c, SUPPORT_REL);
    let mut support_common: Vec<usize> = Vec::with_capacity(common_rows.len() * k);
    for kk in 0..k {
        support_common.extend(common_rows.iter().map(|&bi| kk * b + bi));
    }
    let full = support_above(&w_sc, SUPPORT_REL);
    let state = SblState {
        gamma_s,
        gamma_c,
        s: s_vec,
        c: c_vec,
        z_s,
        z_c,
    };
    let est = finalize_estimate(phi, y, x_hat, support_common, full, iterations, cfg)?;
    Ok((est, state))
}

/// Joint sparse Bayesian learning with ℓ2 reweighting.
pub fn jsbl_l2(
    phi: &PhiOperator,
    y: &Array1<C64>,
    lambda: f64,
    beta: f64,
    t_max: usize,
    eps: f64,
    cfg: &SystemConfig,
) -> Result<SparseEstimate> {
    Ok(jsbl_core(phi, y, lambda, beta, t_max, eps, cfg, true, None)?.0)
}

/// [`jsbl_l2`] returning the final iteration state as well.
pub fn jsbl_l2_with_state(
    phi: &PhiOperator,
    y: &Array1<C64>,
    lambda: f64,
    beta: f64,
    t_max: usize,
    eps: f64,
    cfg: &SystemConfig,
) -> Result<(SparseEstimate, SblState)> {
    jsbl_core(phi, y, lambda, beta, t_max, eps, cfg, true, None)
}

/// Test hook: runs without pruning and records the surrogate cost around
/// every update, so coordinate-descent monotonicity can be asserted.
#[allow(clippy::too_many_arguments)]
pub fn jsbl_l2_traced(
    phi: &PhiOperator,
    y: &Array1<C64>,
    lambda: f64,
    beta: f64,
    t_max: usize,
    eps: f64,
    cfg: &SystemConfig,
) -> Result<(SparseEstimate, SblState, Vec<SurrogateTrace>)> {
    let mut trace = Vec::new();
    let (est, state) = jsbl_core(phi, y, lambda, beta, t_max, eps, cfg, false, Some(&mut trace))?;
    Ok((est, state, trace))
}

/// Numerical check of the dual-space identity behind the JSBL-ℓ2 cost.
///
/// The left side evaluates yᴴ (λI + Φ(Γ^s + I⊗Γ^c) Φᴴ)⁻¹ y directly; the
/// right side minimizes (1/λ)‖y − Φ(c+s)‖² + sᴴ(Γ^s)⁻¹s + cᴴ(I⊗Γ^c)⁻¹c by
/// substituting the closed-form minimizers over c and then x = s + c.
/// Returns the relative gap between the two evaluations.
pub fn dual_identity_residual(
    phi: &PhiOperator,
    y: &Array1<C64>,
    gamma_s: &[f64],
    gamma_c: &[f64],
    lambda: f64,
) -> Result<f64> {
    let m = phi.ncols();
    let b = gamma_c.len();
    if b == 0 || m % b != 0 || gamma_s.len() != m {
        return Err(Error::ShapeMismatch(
            "hyperparameter lengths must be B·K and B".into(),
        ));
    }
    if lambda <= 0.0
        || gamma_s.iter().any(|&g| g <= 0.0)
        || gamma_c.iter().any(|&g| g <= 0.0)
    {
        return Err(Error::InvalidConfig(
            "identity check requires strictly positive lambda and hyperparameters".into(),
        ));
    }
    let w: Vec<f64> = (0..m).map(|j| gamma_s[j] + gamma_c[j % b]).collect();

    // left side
    let mut sigma = phi.gram_weighted(&w);
    for i in 0..sigma.nrows() {
        sigma[[i, i]] += C64::new(lambda, 0.0);
    }
    let solver = crate::recovery::solver::LowerChol::new(&sigma)?;
    let siy = solver.solve_vec(y)?;
    let lhs: f64 = y.iter().zip(siy.iter()).map(|(a, b)| (a.conj() * b).re).sum();

    // right side: x* minimizes (1/λ)‖y − Φx‖² + xᴴ diag(1/w) x
    let dense = phi.dense();
    let mut normal = crate::linalg::hconj(dense).dot(dense);
    for j in 0..m {
        normal[[j, j]] += C64::new(lambda / w[j], 0.0);
    }
    let phy = phi.rmatvec(y);
    let x_star = crate::recovery::solver::LowerChol::new(&normal)?.solve_vec(&phy)?;
    let mut c_star: Array1<C64> = Array1::zeros(m);
    let mut s_star: Array1<C64> = Array1::zeros(m);
    for j in 0..m {
        let frac = gamma_c[j % b] / w[j];
        c_star[j] = x_star[j] * frac;
        s_star[j] = x_star[j] - c_star[j];
    }
    let fit = vec_norm_sq(&(y - &phi.matvec(&x_star))) / lambda;
    let pen_s: f64 = (0..m).map(|j| s_star[j].norm_sqr() / gamma_s[j]).sum();
    let pen_c: f64 = (0..m).map(|j| c_star[j].norm_sqr() / gamma_c[j % b]).sum();
    let rhs = fit + pen_s + pen_c;
    Ok((lhs - rhs).abs() / lhs.abs().max(1e-300))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{draw_channel, draw_supports};
    use crate::sounding::{design_pilots, sound_channel};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn cfg_full() -> SystemConfig {
        SystemConfig {
            m_t: 2,
            m_r: 2,
            n_t_sub: 4,
            n_r_sub: 4,
            n_t_beam: 8,
            n_r_beam: 8,
            n_s: 1,
            l_indiv: 2,
            l_common: 1,
            var_los: 1.0,
            var_nlos: 10f64.powf(-0.5),
            pilot_power: 1.0,
            data_power: 1.0,
            noise_var: 0.0,
            seed: 51,
        }
    }

    #[test]
    fn zero_observation_gives_zero_estimates() {
        let cfg = cfg_full();
        let plan = design_pilots(&cfg).unwrap();
        let y = Array1::zeros(cfg.measurement_count());
        let est = sbl(&plan.phi, &y, 1e-6, 30, 1e-8, &cfg).unwrap();
        assert!(est.x_hat.iter().all(|z| z.norm() < 1e-12));
        let est = jsbl_l2(&plan.phi, &y, 1e-6, 3.3, 30, 1e-8, &cfg).unwrap();
        assert!(est.x_hat.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn sbl_single_column_fixed_point() {
        // phi = unit column, noiseless y = a·phi: estimate converges to a
        let cfg = SystemConfig {
            m_t: 1,
            m_r: 1,
            n_t_sub: 1,
            n_r_sub: 1,
            n_t_beam: 1,
            n_r_beam: 1,
            n_s: 1,
            l_indiv: 1,
            l_common: 1,
            ..cfg_full()
        };
        let mut col = Array2::zeros((3, 1));
        col[[0, 0]] = C64::new(0.6, 0.0);
        col[[1, 0]] = C64::new(0.0, 0.8);
        // a 3x1 operator is not a sounding operator; bypass shape checks by
        // a direct dense wrap (B·K = 1 matches its single column)
        let phi = PhiOperator::from_dense(col.clone());
        let a = C64::new(2.0, -1.0);
        let y = col.column(0).mapv(|v| v * a);
        let est = sbl(&phi, &y, 1e-10, 200, 1e-14, &cfg).unwrap();
        assert!(
            (est.x_hat[0] - a).norm() < 1e-4 * a.norm(),
            "got {} want {}",
            est.x_hat[0],
            a
        );
    }

    #[test]
    fn noiseless_recovery_small_instance() {
        let cfg = cfg_full();
        let plan = design_pilots(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = draw_supports(&cfg, &mut rng);
        let ch = draw_channel(&cfg, &s, &mut rng).unwrap();
        let obs = sound_channel(&ch.h, &plan, &cfg, &mut rng).unwrap();
        let phi_s = plan.phi.scaled(cfg.pilot_power.sqrt()).unwrap();

        let est = sbl(&phi_s, &obs.y, 1e-10, 100, 1e-6, &cfg).unwrap();
        let nmse = crate::recovery::nmse_db(&ch.h, &est.h_hat).unwrap();
        assert!(nmse < -40.0, "sbl nmse {nmse}");

        let (est, state) = jsbl_l2_with_state(&phi_s, &obs.y, 1e-10, 3.3, 100, 1e-10, &cfg).unwrap();
        let nmse = crate::recovery::nmse_db(&ch.h, &est.h_hat).unwrap();
        assert!(nmse < -50.0, "jsbl nmse {nmse}");
        // estimated row support covers the true common support
        let max_gc = state.gamma_c.iter().cloned().fold(0.0f64, f64::max);
        for &bi in &ch.supports.common {
            assert!(
                state.gamma_c[bi] > 1e-6 * max_gc,
                "common row {bi} not detected"
            );
        }
    }

    #[test]
    fn surrogate_is_monotone_per_step() {
        let mut cfg = cfg_full();
        cfg.noise_var = 0.05;
        let plan = design_pilots(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = draw_supports(&cfg, &mut rng);
        let ch = draw_channel(&cfg, &s, &mut rng).unwrap();
        let obs = sound_channel(&ch.h, &plan, &cfg, &mut rng).unwrap();
        let phi_s = plan.phi.scaled(cfg.pilot_power.sqrt()).unwrap();
        let (_, _, trace) =
            jsbl_l2_traced(&phi_s, &obs.y, cfg.noise_var, 3.3, 15, 0.0, &cfg).unwrap();
        assert!(trace.len() >= 10);
        for (i, t) in trace.iter().enumerate() {
            let scale = t.before.abs().max(1.0);
            assert!(
                t.after_sc <= t.before + 1e-8 * scale,
                "iteration {i}: s/c update raised the surrogate ({} -> {})",
                t.before,
                t.after_sc
            );
            assert!(
                t.after_gamma <= t.after_sc + 1e-8 * scale,
                "iteration {i}: gamma update raised the surrogate ({} -> {})",
                t.after_sc,
                t.after_gamma
            );
        }
    }

    #[test]
    fn identity_holds_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let n = 8;
            let b = 4;
            let k = 3;
            let dense = Array2::from_shape_fn((n, b * k), |_| {
                C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            let phi = PhiOperator::from_dense(dense);
            let y = Array1::from_shape_fn(n, |_| {
                C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            let gs: Vec<f64> = (0..b * k).map(|_| 0.1 + rng.random::<f64>()).collect();
            let gc: Vec<f64> = (0..b).map(|_| 0.1 + rng.random::<f64>()).collect();
            let r = dual_identity_residual(&phi, &y, &gs, &gc, 0.37).unwrap();
            assert!(r < 1e-10, "residual {r}");
            // scaling lambda leaves the identity intact
            let r = dual_identity_residual(&phi, &y, &gs, &gc, 3.7).unwrap();
            assert!(r < 1e-10, "residual {r}");
        }
    }

    #[test]
    fn identity_vanishing_common_reduces_to_standard_sbl() {
        // γ^c → 0 forces c → 0; the value approaches the standard SBL
        // identity evaluated with Γ = Γ^s
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = 8;
        let b = 4;
        let k = 3;
        let dense = Array2::from_shape_fn((n, b * k), |_| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let phi = PhiOperator::from_dense(dense);
        let y = Array1::from_shape_fn(n, |_| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let gs: Vec<f64> = (0..b * k).map(|_| 0.2 + rng.random::<f64>()).collect();
        let gc = vec![1e-8; b];
        let lambda = 0.5;
        let mut sigma = phi.gram_weighted(&gs);
        for i in 0..n {
            sigma[[i, i]] += C64::new(lambda, 0.0);
        }
        let siy = crate::recovery::solver::LowerChol::new(&sigma)
            .unwrap()
            .solve_vec(&y)
            .unwrap();
        let standard: f64 = y.iter().zip(siy.iter()).map(|(a, b)| (a.conj() * b).re).sum();

        let mut w: Vec<f64> = gs.clone();
        for (j, wj) in w.iter_mut().enumerate() {
            *wj += gc[j % b];
        }
        let mut sigma_sc = phi.gram_weighted(&w);
        for i in 0..n {
            sigma_sc[[i, i]] += C64::new(lambda, 0.0);
        }
        let siy = crate::recovery::solver::LowerChol::new(&sigma_sc)
            .unwrap()
            .solve_vec(&y)
            .unwrap();
        let lhs: f64 = y.iter().zip(siy.iter()).map(|(a, b)| (a.conj() * b).re).sum();
        assert!(
            (lhs - standard).abs() / standard.abs() < 1e-6,
            "limit gap {}",
            (lhs - standard).abs() / standard.abs()
        );
        // and the two-component identity itself still holds there
        let r = dual_identity_residual(&phi, &y, &gs, &gc, lambda).unwrap();
        assert!(r < 1e-10);
    }
}
