//! Change detection for co-registered bi-temporal SAR images.
//!
//! The pipeline builds a deep difference image from distance-weighted
//! pooling ([`ddi`]), derives changed / unchanged / intermediate
//! pseudo-labels with two parallel FCM runs ([`pfcmc`]), and resolves the
//! intermediate pixels with a two-stage PCANet feature extractor
//! ([`pcanet`]) feeding a linear SVM ([`svm`]). [`metrics`] scores a map
//! against ground truth and [`synth`] produces speckled test scenes.
//!
//! All numeric code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar for the common cases.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ddi;
pub mod error;
pub mod metrics;
pub mod pcanet;
pub mod pfcmc;
pub mod pipeline;
pub mod raster;
pub mod scalar;
pub mod svm;
pub mod synth;

pub use error::{Error, Result};
pub use raster::{BinaryMap, Raster};
pub use scalar::Real;

pub type Raster32 = Raster<f32>;
pub type Raster64 = Raster<f64>;
pub type PoolKernel64 = ddi::PoolKernel<f64>;
pub type FeatureSet64 = pfcmc::FeatureSet<f64>;
pub type FcmResult64 = pfcmc::FcmResult<f64>;
pub type PcanetModel32 = pcanet::PcanetModel<f32>;
pub type PcanetModel64 = pcanet::PcanetModel<f64>;
pub type SvmModel32 = svm::SvmModel<f32>;
pub type SvmModel64 = svm::SvmModel<f64>;
pub type PipelineOutput64 = pipeline::PipelineOutput<f64>;
