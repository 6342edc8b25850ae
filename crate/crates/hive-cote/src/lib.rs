//! A time series classification toolkit built around a heterogeneous
//! ensemble.
//!
//! Four component classifiers each look at a different representation of
//! the data: random intervals in the time domain ([`tsf`]), spectral
//! features of random intervals ([`rise`]), histograms of symbolic words
//! ([`boss`]), and distances to discovered phase-independent subsequences
//! ([`stc`]). The [`ensemble`] module combines their probability estimates
//! with accuracy-based weighting, supports time contracts and resumable
//! builds ([`checkpoint`]), and can be reassembled later from stored
//! prediction files ([`from_file`], [`results`]). The [`experiments`]
//! module drives batch runs from the command line.

pub mod boss;
pub mod checkpoint;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod experiments;
pub mod from_file;
pub mod results;
pub mod rise;
pub mod rotation_forest;
pub mod stc;
pub mod synthetic;
pub mod trees;
pub mod tsf;
pub mod util;
