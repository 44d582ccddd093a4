//! Joint-sparse beam-domain channel synthesis.
//!
//! Channels are generated directly in the beam domain: every subarray pair
//! (m, n) gets a sparse beam-domain block G_{m,n} whose support contains a
//! common part shared by all pairs plus individual entries, and the spatial
//! channel follows as H = A_r G A_tᴴ with A_t = I ⊗ U_t, A_r = I ⊗ U_r.

use ndarray::prelude::*;
use num_complex::Complex64 as C64;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::{Error, Result, SystemConfig};
use crate::linalg::{hconj, kron, vec_of, C_ZERO};

/// Array response of an n-antenna uniform linear array toward spatial
/// direction `psi`, over the symmetric index set {l - (n-1)/2}.
pub fn array_response(psi: f64, n: usize) -> Result<Array1<C64>> {
    if n == 0 {
        return Err(Error::InvalidDimension(
            "array response needs at least one antenna".into(),
        ));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let offset = (n as f64 - 1.0) / 2.0;
    Ok(Array1::from_shape_fn(n, |l| {
        let u = l as f64 - offset;
        C64::from_polar(scale, -2.0 * std::f64::consts::PI * psi * u)
    }))
}

/// Unitary beam dictionary: column i holds the array response of the i-th
/// of n uniformly spaced orthogonal spatial directions.
pub fn beam_dictionary(n: usize) -> Result<Array2<C64>> {
    if n == 0 {
        return Err(Error::InvalidDimension(
            "beam dictionary needs at least one antenna".into(),
        ));
    }
    let mut u = Array2::zeros((n, n));
    for i in 1..=n {
        let psi = (i as f64 - (n as f64 + 1.0) / 2.0) / n as f64;
        u.column_mut(i - 1).assign(&array_response(psi, n)?);
    }
    Ok(u)
}

/// Beam-domain transform for one end of the link: I_{subarrays} ⊗ U_{sub}.
pub fn beam_transform(subarrays: usize, antennas_per_sub: usize) -> Result<Array2<C64>> {
    let eye = Array2::<C64>::eye(subarrays);
    Ok(kron(&eye, &beam_dictionary(antennas_per_sub)?))
}

/// Support sets of one channel realization. Indices are 0-based positions
/// into the column-major vectorization of a beam-domain block, i.e. they
/// live in {0, .., B-1} with B = n_t_sub * n_r_sub.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportSet {
    /// Indices shared by every subarray pair, sorted.
    pub common: Vec<usize>,
    /// Per-pair indices, each sorted and containing `common`. Pair k
    /// corresponds to TX subarray n = k / m_r and RX subarray m = k % m_r.
    pub individual: Vec<Vec<usize>>,
}

impl SupportSet {
    pub fn validate(&self, cfg: &SystemConfig) -> Result<()> {
        if self.common.len() != cfg.l_common {
            return Err(Error::ShapeMismatch(format!(
                "common support has {} entries, expected {}",
                self.common.len(),
                cfg.l_common
            )));
        }
        if self.individual.len() != cfg.pair_count() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} individual supports, got {}",
                cfg.pair_count(),
                self.individual.len()
            )));
        }
        let b = cfg.block_size();
        for (k, set) in self.individual.iter().enumerate() {
            if set.len() != cfg.l_indiv {
                return Err(Error::ShapeMismatch(format!(
                    "individual support {k} has {} entries, expected {}",
                    set.len(),
                    cfg.l_indiv
                )));
            }
            if set.iter().any(|&i| i >= b) {
                return Err(Error::ShapeMismatch(format!(
                    "individual support {k} has an index outside 0..{b}"
                )));
            }
            for c in &self.common {
                if !set.contains(c) {
                    return Err(Error::ShapeMismatch(format!(
                        "individual support {k} does not contain common index {c}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One channel realization: beam-domain G, spatial H, the supports that
/// generated them, and the block-reordered unknown vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Beam-domain channel, (m_r * n_r_sub) x (m_t * n_t_sub).
    pub g: Array2<C64>,
    /// Spatial channel of the same shape, h = A_r g A_tᴴ.
    pub h: Array2<C64>,
    pub supports: SupportSet,
    /// Block-reordered vec(G): block k holds vec(G_{m,n}) with k = n*m_r + m.
    pub x_true: Array1<C64>,
}

/// Draws the common support uniformly without replacement, then extends it
/// independently per subarray pair.
pub fn draw_supports<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> SupportSet {
    let b = cfg.block_size();
    let mut common: Vec<usize> = sample(rng, b, cfg.l_common).into_iter().collect();
    common.sort_unstable();
    let rest: Vec<usize> = (0..b).filter(|i| !common.contains(i)).collect();
    let extra = cfg.l_indiv - cfg.l_common;
    let individual = (0..cfg.pair_count())
        .map(|_| {
            let mut set = common.clone();
            set.extend(sample(rng, rest.len(), extra).into_iter().map(|i| rest[i]));
            set.sort_unstable();
            set
        })
        .collect();
    SupportSet { common, individual }
}

fn draw_cn<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    let s = (variance / 2.0).sqrt();
    C64::new(re * s, im * s)
}

/// Draws beam-domain gains on the given supports and assembles G, H and the
/// block-reordered unknown vector.
///
/// Common-support entries use the LoS variance, individual-only entries the
/// NLoS variance, and both carry the per-pair power scaling
/// n_t_sub * n_r_sub / l_indiv.
pub fn draw_channel<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    supports: &SupportSet,
    rng: &mut R,
) -> Result<ChannelRealization> {
    supports.validate(cfg)?;
    let b = cfg.block_size();
    let scale = (cfg.n_t_sub * cfg.n_r_sub) as f64 / cfg.l_indiv as f64;
    let mut g = Array2::zeros((cfg.n_r_tot(), cfg.n_t_tot()));
    for (k, set) in supports.individual.iter().enumerate() {
        let n = k / cfg.m_r;
        let m = k % cfg.m_r;
        for &idx in set {
            debug_assert!(idx < b);
            let var = if supports.common.contains(&idx) {
                cfg.var_los * scale
            } else {
                cfg.var_nlos * scale
            };
            let row = m * cfg.n_r_sub + idx % cfg.n_r_sub;
            let col = n * cfg.n_t_sub + idx / cfg.n_r_sub;
            g[[row, col]] = draw_cn(rng, var);
        }
    }
    let a_t = beam_transform(cfg.m_t, cfg.n_t_sub)?;
    let a_r = beam_transform(cfg.m_r, cfg.n_r_sub)?;
    let h = a_r.dot(&g).dot(&hconj(&a_t));
    let x_true = vectorize_blocks(&g, cfg)?;
    Ok(ChannelRealization {
        g,
        h,
        supports: supports.clone(),
        x_true,
    })
}

/// Index map from block-reordered positions to vec(G) positions: entry j of
/// the reordered vector is entry `map[j]` of plain column-major vec(G).
pub fn block_to_vec_index(cfg: &SystemConfig) -> Vec<usize> {
    let b = cfg.block_size();
    let rows = cfg.n_r_tot();
    let mut map = Vec::with_capacity(b * cfg.pair_count());
    for k in 0..cfg.pair_count() {
        let n = k / cfg.m_r;
        let m = k % cfg.m_r;
        for j in 0..b {
            let row = m * cfg.n_r_sub + j % cfg.n_r_sub;
            let col = n * cfg.n_t_sub + j / cfg.n_r_sub;
            map.push(col * rows + row);
        }
    }
    map
}

/// Reorders vec(G) into equal-length per-pair blocks: block k (k = n*m_r + m)
/// holds the column-major vectorization of the (m, n) subarray block of `g`.
pub fn vectorize_blocks(g: &Array2<C64>, cfg: &SystemConfig) -> Result<Array1<C64>> {
    if g.dim() != (cfg.n_r_tot(), cfg.n_t_tot()) {
        return Err(Error::ShapeMismatch(format!(
            "expected a {}x{} beam-domain matrix, got {}x{}",
            cfg.n_r_tot(),
            cfg.n_t_tot(),
            g.nrows(),
            g.ncols()
        )));
    }
    let flat = vec_of(g);
    let map = block_to_vec_index(cfg);
    Ok(Array1::from_iter(map.into_iter().map(|v| flat[v])))
}

/// Inverse of [`vectorize_blocks`].
pub fn unvectorize_blocks(x: &Array1<C64>, cfg: &SystemConfig) -> Result<Array2<C64>> {
    if x.len() != cfg.unknown_count() {
        return Err(Error::ShapeMismatch(format!(
            "expected a length-{} vector, got {}",
            cfg.unknown_count(),
            x.len()
        )));
    }
    let rows = cfg.n_r_tot();
    let map = block_to_vec_index(cfg);
    let mut g = Array2::zeros((rows, cfg.n_t_tot()));
    for (j, &v) in map.iter().enumerate() {
        g[[v % rows, v / rows]] = x[j];
    }
    Ok(g)
}

/// Rebuilds the spatial channel from a beam-domain matrix.
pub fn spatial_from_beam(g: &Array2<C64>, cfg: &SystemConfig) -> Result<Array2<C64>> {
    let a_t = beam_transform(cfg.m_t, cfg.n_t_sub)?;
    let a_r = beam_transform(cfg.m_r, cfg.n_r_sub)?;
    Ok(a_r.dot(g).dot(&hconj(&a_t)))
}
