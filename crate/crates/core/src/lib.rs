//! Boundary-driven symmetric zero-range process: exact steady states,
//! a continuous-time simulator, fluctuation-field observables, Sturm-Liouville
//! spectra and a hydrodynamic solver.
// `!(x >= 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod engine;
pub mod ensemble;
pub mod error;
pub mod fenwick;
pub mod fields;
pub mod harness;
pub mod hydro;
pub mod measure;
pub mod rate;
pub mod rng;
pub mod singlesite;
pub mod spectral;
pub mod stats;
pub mod steady;
pub mod testfn;

pub use error::{Error, Result};
pub use rate::{JumpRate, TailRule};
pub use steady::{AsymptoticProfiles, ModelParams, Regime, SteadyState};
