//! Deterministic open-loop pilot beam patterns and channel sounding.
//!
//! Both ends build their training beams from per-subarray DFT codewords:
//! within RF block p̄, subarray i applies column p̄ of the circularly
//! shifted DFT matrix circshift(F, i), so every subarray probes a different
//! direction at any instant while the block set still covers all of them.
//! Baseband blocks are truncated unitary DFT products, which keeps every
//! composite pilot column unit-norm, makes the composite matrices column
//! orthonormal, and leaves the post-combining noise white.

use ndarray::prelude::*;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::{Error, Result, SystemConfig};
use crate::linalg::{circshift_cols, dft_matrix, hconj};
use crate::model::{beam_transform, block_to_vec_index};
use crate::phi::PhiOperator;

/// Pilot matrices for both link ends plus the equivalent measurement
/// operator. `phi` is unscaled: phi·x equals Q·vec(G) for the block-ordered
/// unknown x, with pilot power applied at sounding time.
#[derive(Debug, Clone)]
pub struct PilotPlan {
    /// RF training beams at the transmitter, n_t_tot x n_t_tot.
    pub f_rf: Array2<C64>,
    /// Block-diagonal baseband precoder, n_t_tot x n_t_beam.
    pub f_bb: Array2<C64>,
    /// Composite transmit pilots F = F_RF·F_BB.
    pub f: Array2<C64>,
    /// RF combining beams at the receiver, n_r_tot x n_r_tot.
    pub w_rf: Array2<C64>,
    /// Block-diagonal baseband combiner, n_r_tot x n_r_beam.
    pub w_bb: Array2<C64>,
    /// Composite receive pilots W = W_RF·W_BB.
    pub w: Array2<C64>,
    /// Equivalent measurement operator, (n_t_beam·n_r_beam) x (B·K).
    pub phi: PhiOperator,
    pub cfg: SystemConfig,
}

/// One noisy sounding of a channel.
#[derive(Debug, Clone)]
pub struct SoundingObservation {
    /// Stacked measurements, length n_t_beam·n_r_beam.
    pub y: Array1<C64>,
    /// Variance of the post-combining noise (white for designed pilots).
    pub noise_var_effective: f64,
}

fn design_end(
    subarrays: usize,
    n_sub: usize,
    n_beam: usize,
) -> Result<(Array2<C64>, Array2<C64>, Array2<C64>)> {
    if n_beam % n_sub != 0 {
        return Err(Error::InvalidConfig(format!(
            "beam count {n_beam} is not a multiple of the RF block count {n_sub}"
        )));
    }
    let per_block = n_beam / n_sub;
    if per_block > subarrays {
        return Err(Error::InvalidConfig(format!(
            "{per_block} beams per block exceed the {subarrays} subarrays"
        )));
    }
    let n_tot = subarrays * n_sub;
    let base = dft_matrix(n_sub);
    let mut rf = Array2::zeros((n_tot, n_tot));
    for block in 0..n_sub {
        for sub in 0..subarrays {
            let shifted = circshift_cols(&base, sub);
            let col = block * subarrays + sub;
            rf.slice_mut(s![sub * n_sub..(sub + 1) * n_sub, col])
                .assign(&shifted.column(block));
        }
    }
    // baseband block: truncated product of unitary DFT matrices
    let u = dft_matrix(subarrays);
    let v = dft_matrix(per_block);
    let block_bb = u.slice(s![.., 0..per_block]).dot(&hconj(&v));
    let mut bb = Array2::zeros((n_tot, n_beam));
    for block in 0..n_sub {
        bb.slice_mut(s![
            block * subarrays..(block + 1) * subarrays,
            block * per_block..(block + 1) * per_block
        ])
        .assign(&block_bb);
    }
    let composite = rf.dot(&bb);
    Ok((rf, bb, composite))
}

/// Transmit pilot design: returns (F_RF, F_BB, F).
pub fn design_tx_pilots(cfg: &SystemConfig) -> Result<(Array2<C64>, Array2<C64>, Array2<C64>)> {
    design_end(cfg.m_t, cfg.n_t_sub, cfg.n_t_beam)
}

/// Receive pilot design: returns (W_RF, W_BB, W).
pub fn design_rx_pilots(cfg: &SystemConfig) -> Result<(Array2<C64>, Array2<C64>, Array2<C64>)> {
    design_end(cfg.m_r, cfg.n_r_sub, cfg.n_r_beam)
}

/// Builds the measurement operator from designed composite pilots:
/// Q = (Fᵀ A_t^*) ⊗ (Wᴴ A_r) with columns permuted into the block order.
pub fn measurement_matrix(
    f: &Array2<C64>,
    w: &Array2<C64>,
    cfg: &SystemConfig,
) -> Result<PhiOperator> {
    if f.dim() != (cfg.n_t_tot(), cfg.n_t_beam) || w.dim() != (cfg.n_r_tot(), cfg.n_r_beam) {
        return Err(Error::ShapeMismatch(
            "pilot matrices do not match the configuration".into(),
        ));
    }
    let a_t = beam_transform(cfg.m_t, cfg.n_t_sub)?;
    let a_r = beam_transform(cfg.m_r, cfg.n_r_sub)?;
    let tx_factor = hconj(&a_t).dot(f).t().to_owned(); // n_t_beam x n_t_tot
    let rx_factor = hconj(w).dot(&a_r); // n_r_beam x n_r_tot
    PhiOperator::from_kron(tx_factor, rx_factor, block_to_vec_index(cfg))
}

/// Designs both pilot ends and assembles the full plan.
pub fn design_pilots(cfg: &SystemConfig) -> Result<PilotPlan> {
    cfg.validate()
        .map_err(|e| Error::InvalidConfig(format!("pilot design: {e}")))?;
    let (f_rf, f_bb, f) = design_tx_pilots(cfg)?;
    let (w_rf, w_bb, w) = design_rx_pilots(cfg)?;
    let phi = measurement_matrix(&f, &w, cfg)?;
    Ok(PilotPlan {
        f_rf,
        f_bb,
        f,
        w_rf,
        w_bb,
        w,
        phi,
        cfg: cfg.clone(),
    })
}

/// Total coherence of a dense matrix: Σ_{k≠l} |m_kᴴ m_l|².
pub fn total_coherence(m: &Array2<C64>) -> f64 {
    let gram = hconj(m).dot(m);
    let mut acc = 0.0;
    for ((i, j), v) in gram.indexed_iter() {
        if i != j {
            acc += v.norm_sqr();
        }
    }
    acc
}

/// Sounds a spatial channel through the plan: the receiver sees each
/// transmit beam through m_r simultaneous patterns per snapshot, with fresh
/// antenna noise per snapshot passed through that snapshot's combiners.
pub fn sound_channel<R: Rng + ?Sized>(
    h: &Array2<C64>,
    plan: &PilotPlan,
    cfg: &SystemConfig,
    rng: &mut R,
) -> Result<SoundingObservation> {
    if h.dim() != (cfg.n_r_tot(), cfg.n_t_tot()) {
        return Err(Error::ShapeMismatch(format!(
            "channel is {}x{}, expected {}x{}",
            h.nrows(),
            h.ncols(),
            cfg.n_r_tot(),
            cfg.n_t_tot()
        )));
    }
    let groups = cfg.n_r_beam / cfg.m_r;
    let sqrt_pp = cfg.pilot_power.sqrt();
    let sigma = (cfg.noise_var / 2.0).sqrt();
    let wh = hconj(&plan.w);
    let mut y = Array1::zeros(cfg.measurement_count());
    let mut z = Array1::<C64>::zeros(cfg.n_r_tot());
    for p in 0..cfg.n_t_beam {
        let hf = h.dot(&plan.f.column(p));
        let signal = wh.dot(&hf);
        for qbar in 0..groups {
            for zi in z.iter_mut() {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                *zi = C64::new(re * sigma, im * sigma);
            }
            for sub in 0..cfg.m_r {
                let q = qbar * cfg.m_r + sub;
                let noise: C64 = plan
                    .w
                    .column(q)
                    .iter()
                    .zip(z.iter())
                    .map(|(wq, zi)| wq.conj() * zi)
                    .sum();
                y[p * cfg.n_r_beam + q] = signal[q] * sqrt_pp + noise;
            }
        }
    }
    Ok(SoundingObservation {
        y,
        noise_var_effective: cfg.noise_var,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, vec_of, vec_norm_sq, C_ONE, C_ZERO};
    use crate::model::{draw_channel, draw_supports, vectorize_blocks};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn cfg_small() -> SystemConfig {
        SystemConfig {
            m_t: 2,
            m_r: 2,
            n_t_sub: 2,
            n_r_sub: 2,
            n_t_beam: 4,
            n_r_beam: 4,
            n_s: 1,
            l_indiv: 2,
            l_common: 1,
            var_los: 1.0,
            var_nlos: 0.5,
            pilot_power: 2.0,
            data_power: 1.0,
            noise_var: 0.3,
            seed: 5,
        }
    }

    fn cfg_partial() -> SystemConfig {
        SystemConfig {
            m_t: 4,
            m_r: 4,
            n_t_sub: 4,
            n_r_sub: 4,
            n_t_beam: 8,
            n_r_beam: 8,
            n_s: 1,
            l_indiv: 3,
            l_common: 2,
            var_los: 1.0,
            var_nlos: 0.5,
            pilot_power: 1.0,
            data_power: 1.0,
            noise_var: 1.0,
            seed: 9,
        }
    }

    fn ortho_err(m: &Array2<C64>) -> f64 {
        let g = hconj(m).dot(m);
        let mut err: f64 = 0.0;
        for ((i, j), v) in g.indexed_iter() {
            let want = if i == j { C_ONE } else { C_ZERO };
            err += (v - want).norm_sqr();
        }
        err.sqrt()
    }

    #[test]
    fn composite_pilots_have_orthonormal_columns() {
        for cfg in [cfg_small(), cfg_partial()] {
            let plan = design_pilots(&cfg).unwrap();
            assert!(ortho_err(&plan.f) < 1e-12, "F columns");
            assert!(ortho_err(&plan.w) < 1e-12, "W columns");
            assert_eq!(plan.w.ncols(), cfg.n_r_beam);
            assert_eq!(plan.f.dim(), (cfg.n_t_tot(), cfg.n_t_beam));
        }
    }

    #[test]
    fn rf_blocks_are_constant_modulus() {
        let cfg = cfg_partial();
        let plan = design_pilots(&cfg).unwrap();
        let want = 1.0 / (cfg.n_t_sub as f64).sqrt();
        for col in 0..cfg.n_t_tot() {
            let sub = col % cfg.m_t;
            for row in 0..cfg.n_t_tot() {
                let v = plan.f_rf[[row, col]];
                if row / cfg.n_t_sub == sub {
                    assert!((v.norm() - want).abs() < 1e-12);
                } else {
                    assert_eq!(v, C_ZERO);
                }
            }
        }
    }

    #[test]
    fn full_training_baseband_block_is_unitary() {
        // n_beam/n_block = m_t: the truncation keeps the whole unitary product
        let cfg = cfg_small();
        let (_, f_bb, _) = design_tx_pilots(&cfg).unwrap();
        let block = f_bb.slice(s![0..cfg.m_t, 0..cfg.m_t]).to_owned();
        assert!(ortho_err(&block) < 1e-12);
    }

    #[test]
    fn rejects_non_divisible_beam_count() {
        assert!(design_end(4, 4, 6).is_err());
        assert!(design_end(2, 4, 16).is_err()); // 4 per block > 2 subarrays
    }

    #[test]
    fn phi_is_exactly_q_for_single_pair() {
        let cfg = SystemConfig {
            m_t: 1,
            m_r: 1,
            n_t_sub: 3,
            n_r_sub: 3,
            n_t_beam: 3,
            n_r_beam: 3,
            n_s: 1,
            l_indiv: 2,
            l_common: 1,
            ..cfg_small()
        };
        let plan = design_pilots(&cfg).unwrap();
        let a_t = beam_transform(1, 3).unwrap();
        let a_r = beam_transform(1, 3).unwrap();
        let q = kron(
            &hconj(&a_t).dot(&plan.f).t().to_owned(),
            &hconj(&plan.w).dot(&a_r),
        );
        let err: f64 = (plan.phi.dense() - &q).iter().map(|z| z.norm_sqr()).sum();
        assert!(err.sqrt() < 1e-12);
    }

    #[test]
    fn permutation_consistency_on_random_channels() {
        let cfg = cfg_small();
        let plan = design_pilots(&cfg).unwrap();
        let a_t = beam_transform(cfg.m_t, cfg.n_t_sub).unwrap();
        let a_r = beam_transform(cfg.m_r, cfg.n_r_sub).unwrap();
        let q = kron(
            &hconj(&a_t).dot(&plan.f).t().to_owned(),
            &hconj(&plan.w).dot(&a_r),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let s = draw_supports(&cfg, &mut rng);
            let ch = draw_channel(&cfg, &s, &mut rng).unwrap();
            let lhs = plan.phi.matvec(&vectorize_blocks(&ch.g, &cfg).unwrap());
            let rhs = q.dot(&vec_of(&ch.g));
            let err = (&lhs - &rhs).iter().map(|z| z.norm()).fold(0.0f64, f64::max);
            assert!(err < 1e-12);
        }
    }

    #[test]
    fn total_coherence_examples() {
        // orthonormal columns -> zero
        let f = dft_matrix(4);
        assert!(total_coherence(&f) < 1e-20);
        // duplicated unit column -> two off-diagonal unit entries
        let v = array![[C64::new(0.6, 0.0)], [C64::new(0.0, 0.8)]];
        let mut dup = Array2::zeros((2, 2));
        dup.column_mut(0).assign(&v.column(0));
        dup.column_mut(1).assign(&v.column(0));
        assert!((total_coherence(&dup) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn total_coherence_matches_double_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let m = Array2::from_shape_fn((5, 3), |_| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let mut oracle = 0.0;
        for k in 0..3 {
            for l in 0..3 {
                if k != l {
                    let inner: C64 = m
                        .column(k)
                        .iter()
                        .zip(m.column(l).iter())
                        .map(|(a, b)| a.conj() * b)
                        .sum();
                    oracle += inner.norm_sqr();
                }
            }
        }
        assert!((total_coherence(&m) - oracle).abs() < 1e-12);
    }

    #[test]
    fn coherence_factorization_identity() {
        // μtot(A⊗B) = μtot(A)·μtot(B) + D_A·μtot(B) + D_B·μtot(A)
        let cfg = cfg_partial();
        let plan = design_pilots(&cfg).unwrap();
        let a_t = beam_transform(cfg.m_t, cfg.n_t_sub).unwrap();
        let a_r = beam_transform(cfg.m_r, cfg.n_r_sub).unwrap();
        let fa = hconj(&a_t).dot(&plan.f).t().to_owned();
        let fb = hconj(&plan.w).dot(&a_r);
        let mu_a = total_coherence(&fa);
        let mu_b = total_coherence(&fb);
        let d_a: f64 = (0..fa.ncols())
            .map(|j| fa.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().powi(2))
            .sum();
        let d_b: f64 = (0..fb.ncols())
            .map(|j| fb.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().powi(2))
            .sum();
        let expect = mu_a * mu_b + d_a * mu_b + d_b * mu_a;
        let direct = total_coherence(plan.phi.dense());
        assert!(
            (direct - expect).abs() <= 1e-9 * expect.max(1.0),
            "direct {direct} vs factored {expect}"
        );
        // and the operator's fast path agrees with the dense definition
        assert!((plan.phi.total_coherence() - direct).abs() <= 1e-9 * direct.max(1.0));
    }

    #[test]
    fn noiseless_sounding_matches_operator() {
        let mut cfg = cfg_small();
        cfg.noise_var = 0.0;
        let plan = design_pilots(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let s = draw_supports(&cfg, &mut rng);
        let ch = draw_channel(&cfg, &s, &mut rng).unwrap();
        let obs = sound_channel(&ch.h, &plan, &cfg, &mut rng).unwrap();
        let expect = plan.phi.matvec(&ch.x_true) * C64::new(cfg.pilot_power.sqrt(), 0.0);
        let err = (&obs.y - &expect)
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-10, "max deviation {err}");
    }

    #[test]
    fn doubling_pilot_power_doubles_signal_energy() {
        let mut cfg = cfg_small();
        cfg.noise_var = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let s = draw_supports(&cfg, &mut rng);
        let ch = draw_channel(&cfg, &s, &mut rng).unwrap();
        let plan = design_pilots(&cfg).unwrap();
        let y1 = sound_channel(&ch.h, &plan, &cfg, &mut rng).unwrap();
        let mut cfg2 = cfg.clone();
        cfg2.pilot_power *= 2.0;
        let plan2 = design_pilots(&cfg2).unwrap();
        let y2 = sound_channel(&ch.h, &plan2, &cfg2, &mut rng).unwrap();
        let e1 = vec_norm_sq(&y1.y);
        let e2 = vec_norm_sq(&y2.y);
        assert!((e2 - 2.0 * e1).abs() < 1e-9 * e1.max(1.0));
    }

    #[test]
    fn pure_noise_sounding_is_white() {
        // P_p = 0: sample covariance of y approaches σ²·I
        let mut cfg = cfg_small();
        cfg.pilot_power = 0.0;
        cfg.noise_var = 0.7;
        let plan = design_pilots(&cfg).unwrap();
        let h = Array2::zeros((cfg.n_r_tot(), cfg.n_t_tot()));
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let n = cfg.measurement_count();
        let trials = 2000;
        let mut cov = Array2::<C64>::zeros((n, n));
        for _ in 0..trials {
            let obs = sound_channel(&h, &plan, &cfg, &mut rng).unwrap();
            for i in 0..n {
                for j in 0..n {
                    cov[[i, j]] += obs.y[i] * obs.y[j].conj();
                }
            }
        }
        cov.mapv_inplace(|z| z / trials as f64);
        let bound = 5.0 * cfg.noise_var / (trials as f64).sqrt();
        for ((i, j), v) in cov.indexed_iter() {
            let want = if i == j {
                C64::new(cfg.noise_var, 0.0)
            } else {
                C_ZERO
            };
            assert!(
                (v - want).norm() < bound,
                "cov[{i},{j}] = {v}, want {want}, bound {bound}"
            );
        }
    }
}
