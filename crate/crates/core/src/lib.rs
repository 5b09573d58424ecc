//! Mean-field O(N) spin model with the one-spin exchangeable pair.
//!
//! The crate covers the Bessel-ratio machinery behind the model constants,
//! uniform and von Mises–Fisher sampling on the sphere, heat-bath dynamics,
//! Stein-pair diagnostics, an exact radial oracle for the law of the total
//! spin length, and a small experiment runner.
//!
//! ```
//! use mfon::{DerivedConstants, ModelParams};
//!
//! let c = DerivedConstants::new(ModelParams::new(3, 5.0, 100)?)?;
//! assert!((c.b - 3.629_409_935_955_998).abs() < 1e-12);
//! # Ok::<(), mfon::Error>(())
//! ```
// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gibbs;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod rng;
pub mod runner;
pub mod special;
pub mod sphere;
pub mod stats;
pub mod stein;

pub use error::{Error, Result};
pub use gibbs::{
    run_chain, run_chains, Chain, ChainRecord, ChainSettings, HeatBath, InitialState, PairSample,
    SpinConfiguration,
};
pub use model::{DerivedConstants, ModelParams};
pub use oracle::{exact_kolmogorov_to_normal, RadialGrid, RadialLaw};
pub use rng::{seed_stream, ChainRng};
pub use sphere::{UnitVector, VmfLaw, VmfSampler};
pub use stein::{RateRow, RateTable, SteinTerms};
