//! Spectral analysis of Kirchhoff Laplacians on radially symmetric metric
//! antitrees.
//!
//! - [`model`]: generators, truncated weight profiles, series verdicts.
//! - [`criteria`]: closed-form spectral criteria and the diagnostics report.
//! - [`spectra`]: eigenvalues of the decomposed Sturm–Liouville blocks.
//! - [`graph_oracle`]: finite-element reference solver on the full graph.
//! - [`report`]: run configuration and machine-readable outputs.

// `!(x > 0.0)` style tests also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod criteria;
pub mod graph_oracle;
pub mod model;
pub mod numeric;
pub mod report;
pub mod spectra;
