//! Search for minimal recognizable video configurations.
//!
//! A *minimal video* is a short, tiny frame sequence that an oracle (human
//! subjects or a model) recognizes, while
//! every one-step reduction of it, in space or in time, is no longer
//! recognized. This crate provides:
//!
//! - [`config`], [`frame`], [`geometry`]: stimulus configurations with exact
//!   rational crops and canonical keys, rendered deterministically.
//! - [`reduction`]: the one-step reductions (four corner crops, a resolution
//!   step, single-frame removal).
//! - [`oracle`]: the recognition-oracle contract with answer adjudication,
//!   plus synthetic oracles and ones backed by remote models or people.
//! - [`search`]: the recursive reduction search, resumable from checkpoints
//!   and bounded by a query budget.
//! - [`study`]: the human-study job queue and its HTTP service.
//! - [`eval`]: recognition-gap statistics and human/model comparison, plus
//!   the ranking metrics used to assemble datasets.
//! - [`io`]: session manifests, with clip import and GIF loop export.
//!
//! Runnable walkthroughs of each capability live in `examples/`.

pub mod config;
pub mod eval;
pub mod frame;
pub mod geometry;
pub mod io;
pub mod oracle;
pub mod reduction;
pub mod search;
pub mod study;

pub use config::{canonical_key, make_root, render, ConfigKey, VideoConfig};
pub use frame::{FrameGrid, SourceClip};
pub use geometry::{Corner, CropRect, Rational};
pub use oracle::{Oracle, OracleHandle, RecognitionRecord};
pub use reduction::{expand, ReductionEdge};
pub use search::{minimal_set, resume, run_search, sub_minimal_set, SearchParams, SearchTree};
