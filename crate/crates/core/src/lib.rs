//! Dataset restyling for unsupervised domain adaptation.
//!
//! Labelled source images are matched to unlabelled style images by the
//! Hamming distance between 64-bit DCT perceptual hashes, each source is
//! restyled with its K nearest styles using a photometric transfer, and the
//! restyled images are merged with the sources into an enriched training set.
//!
//! The modules mirror the processing stages:
//!
//! * [`imgcore`] - decoding, resizing, grayscale and color-space transforms
//! * [`phash`] - DCT perceptual hash and Hamming distance
//! * [`matcher`] - exact Hamming K-NN and seeded random style selection
//! * [`restyle`] - photometric transfer backends
//! * [`metrics`] - domain-gap and structure-preservation diagnostics
//! * [`pipeline`] - ingest, hash, match, restyle, merge, verify

pub mod bench;
pub mod imgcore;
pub mod matcher;
pub mod metrics;
pub mod phash;
pub mod pipeline;
pub mod restyle;
pub mod synth;
