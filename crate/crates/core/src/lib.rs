//! Thin-film thickness estimation from simulated interference fringes.
//!
//! A plane reference wave and a diverging spherical wave reflected from a
//! film of thickness `T` form concentric fringes whose phase is shifted by
//! `4 pi T / lambda`. This crate synthesizes radial line profiles of that
//! pattern ([`optics`]), corrupts them with detector shot noise
//! ([`detector`]), reduces them to 40-sample feature vectors ([`dataset`]),
//! and trains a 40-64-64-20 sigmoid network to recognise the thickness
//! ([`ann`]). [`harness`] ties the stages into a reproducible experiment.
//!
//! ```no_run
//! use fringe::harness::{run_pipeline, RunConfig};
//!
//! let cfg = RunConfig { output_dir: "out".into(), ..RunConfig::default() };
//! let outcome = run_pipeline(&cfg)?;
//! for d in &outcome.manifest.detectors {
//!     println!("{}-bit: argmax RMS {:.2} nm", d.bit_depth, d.rms_argmax_nm);
//! }
//! # Ok::<(), fringe::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ann;
pub mod dataset;
pub mod detector;
mod error;
pub mod harness;
pub mod optics;

pub use error::{Error, Result};
