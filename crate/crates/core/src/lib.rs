//! Locates the source files responsible for unreproducible builds.
//!
//! A package that fails to rebuild bit-for-bit leaves two traces behind: the
//! textual diff between the two binaries and the build log. This crate turns
//! those traces into a ranked list of suspect source files:
//!
//! * [`corpus`] ingests the source tree into a tokenized document collection,
//! * [`logparse`] extracts the query from the binary-diff log and splits the
//!   build log into per-directory command segments,
//! * [`vsm`] provides TF-IDF weighting and cosine-similarity ranking,
//! * [`rules`] scans files against heuristic patterns for constructs known to
//!   break reproducibility (timestamps, locale-dependent ordering, ...),
//! * [`ranker`] fuses retrieval similarity and rule hits into one ranking,
//! * [`eval`] measures rankings against ground truth (A@N, P@N, R@N, MAP),
//!   sweeps the fusion weight, and compares variants statistically.

pub mod corpus;
pub mod eval;
pub mod logparse;
pub mod ranker;
pub mod rules;
pub mod vsm;
