//! Evaluation metrics for grammatical error correction.
//!
//! Reference-based metrics ([`gleu`], [`maxmatch`], [`imeasure`]) compare a
//! system's output against human corrections. Reference-less metrics
//! ([`grammaticality`], [`lfm`]) judge the output alone. The [`analysis`]
//! module interpolates the two families and measures how well any metric
//! agrees with a human ranking of systems.

pub mod align;
pub mod analysis;
pub mod corpus;
pub mod error;
pub mod formats;
pub mod gleu;
pub mod grammaticality;
pub mod imeasure;
pub mod lfm;
pub mod maxmatch;
pub mod scoring;
pub mod util;

pub use error::{Error, Result};
