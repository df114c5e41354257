//! Deterministic simulator for RIS-assisted indoor RSS fingerprint databases.
//!
//! The crate models a room with a multi-antenna transmitter, a reconfigurable
//! intelligent surface, and a movable receiver. The channel at every survey
//! position is the sum of four path families (direct, RIS-reflected,
//! single-bounced via Tx-side clusters, double-bounced via the RIS and
//! RIS-side clusters) with spatially consistent blockage, shadow fading, and
//! cluster layouts. On top of the generated databases a KNN baseline measures
//! localization quality.
//!
//! Everything is reproducible from one master seed: maps, cluster draws, the
//! train/test split, and the emitted files.

pub mod channel;
pub mod clusters;
pub mod config;
pub mod error;
pub mod fingerprint;
pub mod geometry;
pub mod io;
pub mod localize;
pub mod pipeline;
pub mod propagation;
pub mod radiation;
pub mod rng;
pub mod scene;
pub mod spatial;

pub use error::{Error, Result};
