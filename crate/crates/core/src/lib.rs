//! Differentiable weighted finite-state transducers over the log semiring,
//! with CTC and Star Temporal Classification (STC) losses for learning from
//! partially labeled, unsegmented sequences.
//!
//! The building blocks are small: [`graph::Graph`], [`compose::compose`],
//! [`forward::forward_score`] and an [`autograd::Tape`] that differentiates
//! a scalar loss with respect to arc weights. The [`loss`] module assembles
//! emission and label graphs into the CTC, selfless-CTC and STC criteria.
//! [`model`], [`data`] and [`train`] provide a desk-scale harness for
//! training frame classifiers on synthetic weakly labeled data.

pub mod autograd;
pub mod bench;
pub mod cli;
pub mod compose;
pub mod data;
pub mod error;
pub mod forward;
pub mod graph;
pub mod label;
pub mod loss;
pub mod model;
pub mod semiring;
pub mod text;
pub mod train;

pub use error::{Error, Result};
pub use graph::{Arc, Graph};
pub use label::{Label, Symbol, Token};
pub use semiring::LogWeight;
