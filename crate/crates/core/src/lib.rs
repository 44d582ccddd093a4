//! Simulation library for distributed-phased-array (DPA) MIMO links.
//!
//! A DPA-MIMO link uses several widely separated phased subarrays at each
//! end, one RF chain per subarray. The beam-domain channel of such a link is
//! jointly sparse: every transmit/receive subarray pair shares a common set
//! of beam directions (LoS plus common scatterers) on top of its own
//! individual ones. This crate provides the pieces needed to simulate the
//! full estimation-and-precoding chain for one narrowband link:
//!
//! - [`model`] — joint-sparse beam-domain channel synthesis and the DFT
//!   dictionary machinery relating the beam and spatial domains.
//! - [`sounding`] — deterministic open-loop pilot beam patterns, the
//!   equivalent measurement matrix, and noisy channel sounding.
//! - [`recovery`] — structured sparse estimators (JOMP, JSBL-ℓ2) with OMP
//!   and SBL baselines, plus the NMSE metric.
//! - [`precoding`] — Group-SIC hybrid precoders/combiners, a fully digital
//!   water-filling baseline, and the spectral-efficiency metric.
//! - [`textmat`] — a plain-text interchange format for pilot plans and
//!   channel realizations.
//!
//! All randomness flows through caller-supplied RNGs; identical seeds give
//! bit-identical results.

pub mod config;
pub mod linalg;
pub mod model;
pub mod phi;
pub mod precoding;
pub mod recovery;
pub mod sounding;
pub mod textmat;

pub use config::{Error, Result, SystemConfig};
pub use num_complex::Complex64;
