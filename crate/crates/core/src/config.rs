//! Link configuration and the crate-wide error type.

use serde::{Deserialize, Serialize};

/// Errors produced by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("degenerate least-squares system: {0}")]
    DegenerateLs(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path}: {msg}")]
    Parse { path: String, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

/// All dimensional and statistical parameters of one simulated link.
///
/// Powers and variances are linear (not dB). `seed` is the master seed from
/// which per-trial RNG streams are derived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Transmit subarray count.
    pub m_t: usize,
    /// Receive subarray count.
    pub m_r: usize,
    /// Antennas per transmit subarray.
    pub n_t_sub: usize,
    /// Antennas per receive subarray.
    pub n_r_sub: usize,
    /// Transmit training beams.
    pub n_t_beam: usize,
    /// Receive training beams.
    pub n_r_beam: usize,
    /// Data streams.
    pub n_s: usize,
    /// Beam-domain paths per subarray pair (individual support size).
    pub l_indiv: usize,
    /// Paths shared by every subarray pair (common support size).
    pub l_common: usize,
    /// Variance of common-path (LoS) gains.
    pub var_los: f64,
    /// Variance of individual-path (NLoS) gains.
    pub var_nlos: f64,
    /// Pilot power per training transmission.
    pub pilot_power: f64,
    /// Total data transmit power.
    pub data_power: f64,
    /// Per-antenna noise variance.
    pub noise_var: f64,
    /// Master RNG seed.
    pub seed: u64,
}

impl SystemConfig {
    /// Total transmit antennas.
    pub fn n_t_tot(&self) -> usize {
        self.m_t * self.n_t_sub
    }

    /// Total receive antennas.
    pub fn n_r_tot(&self) -> usize {
        self.m_r * self.n_r_sub
    }

    /// Beam-domain block size B = n_t_sub * n_r_sub.
    pub fn block_size(&self) -> usize {
        self.n_t_sub * self.n_r_sub
    }

    /// Subarray pair count K = m_t * m_r.
    pub fn pair_count(&self) -> usize {
        self.m_t * self.m_r
    }

    /// Measurement count N = n_t_beam * n_r_beam.
    pub fn measurement_count(&self) -> usize {
        self.n_t_beam * self.n_r_beam
    }

    /// Unknown count B * K = n_t_tot * n_r_tot.
    pub fn unknown_count(&self) -> usize {
        self.block_size() * self.pair_count()
    }

    /// Checks every structural invariant, returning the first violation.
    ///
    /// Variances and powers are accepted at zero so that noiseless and
    /// pilot-free corner cases remain expressible.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.m_t == 0 || self.m_r == 0 || self.n_t_sub == 0 || self.n_r_sub == 0 {
            return fail("subarray counts and sizes must be at least 1".into());
        }
        if self.l_common < 1 {
            return fail("l_common must be at least 1".into());
        }
        if self.l_common > self.l_indiv {
            return fail(format!(
                "l_common ({}) must not exceed l_indiv ({})",
                self.l_common, self.l_indiv
            ));
        }
        if self.l_indiv > self.block_size() {
            return fail(format!(
                "l_indiv ({}) must not exceed the block size {}",
                self.l_indiv,
                self.block_size()
            ));
        }
        if self.n_t_beam == 0 || self.n_r_beam == 0 {
            return fail("beam counts must be at least 1".into());
        }
        if self.n_t_beam > self.n_t_tot() {
            return fail(format!(
                "n_t_beam ({}) exceeds total transmit antennas ({})",
                self.n_t_beam,
                self.n_t_tot()
            ));
        }
        if self.n_r_beam > self.n_r_tot() {
            return fail(format!(
                "n_r_beam ({}) exceeds total receive antennas ({})",
                self.n_r_beam,
                self.n_r_tot()
            ));
        }
        if self.n_r_beam % self.m_r != 0 {
            return fail(format!(
                "n_r_beam ({}) must be a multiple of m_r ({}): the receiver \
                 sounds m_r patterns per snapshot",
                self.n_r_beam, self.m_r
            ));
        }
        if self.n_t_beam % self.n_t_sub != 0 {
            return fail(format!(
                "n_t_beam ({}) must be a multiple of n_t_sub ({}): transmit \
                 pilots are built from n_t_sub RF blocks",
                self.n_t_beam, self.n_t_sub
            ));
        }
        if self.n_r_beam % self.n_r_sub != 0 {
            return fail(format!(
                "n_r_beam ({}) must be a multiple of n_r_sub ({}): receive \
                 pilots are built from n_r_sub RF blocks",
                self.n_r_beam, self.n_r_sub
            ));
        }
        if self.n_t_beam / self.n_t_sub > self.m_t {
            return fail(format!(
                "n_t_beam/n_t_sub ({}) must not exceed m_t ({})",
                self.n_t_beam / self.n_t_sub,
                self.m_t
            ));
        }
        if self.n_r_beam / self.n_r_sub > self.m_r {
            return fail(format!(
                "n_r_beam/n_r_sub ({}) must not exceed m_r ({})",
                self.n_r_beam / self.n_r_sub,
                self.m_r
            ));
        }
        if self.n_s == 0 || self.n_s > self.m_t.min(self.m_r) {
            return fail(format!(
                "n_s ({}) must be between 1 and min(m_t, m_r) = {}",
                self.n_s,
                self.m_t.min(self.m_r)
            ));
        }
        for (name, v) in [
            ("var_los", self.var_los),
            ("var_nlos", self.var_nlos),
            ("pilot_power", self.pilot_power),
            ("data_power", self.data_power),
            ("noise_var", self.noise_var),
        ] {
            if !v.is_finite() || v < 0.0 {
                return fail(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        Ok(())
    }
}
