//! Fourier neural operators with incremental spectral learning.
//!
//! The crate bundles everything needed to run operator-learning experiments
//! on a laptop: dense tensors with FFTs and a small reverse-mode tape
//! ([`tensor`], [`autodiff`]), the Fourier convolution layer ([`spectral`]),
//! the full operator ([`model`]), mode-growth schedulers ([`scheduler`]), PDE
//! data generation ([`data`]), training ([`train`]), and the experiment
//! driver behind the `ifno` binary ([`experiment`], [`plot`]).

// `!(x > 0.0)` is how config checks reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod autodiff;
pub mod checkpoint;
mod codec;
pub mod data;
pub mod error;
pub mod experiment;
pub mod gradcheck;
pub mod model;
pub mod plot;
pub mod scheduler;
pub mod spectral;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
