//! CTC, selfless-CTC and STC losses built from graph operations: compose a
//! label graph with an emission graph, take the forward score, negate.

mod emissions;
mod labels;
mod penalty;

pub use emissions::{
    frame_stars, scatter_frame_stars, EmissionGraph, Emissions, FrameStars,
    NORMALIZATION_TOLERANCE,
};
pub use labels::{CtcLabelGraph, StcLabelGraph};
pub use penalty::PenaltySchedule;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::autograd::Tape;
use crate::error::Result;
use crate::graph::Graph;
use crate::label::Token;

/// Loss value and its gradient with respect to the `T x K` log-probabilities.
#[derive(Clone, Debug)]
pub struct LossOutput {
    pub loss: f64,
    pub grad: Array2<f64>,
}

/// Which emission arcs STC builds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphabetMode {
    /// Every vocabulary token gets an arc per frame.
    Full,
    /// Only the label's tokens, the blank and the star arcs. Gradients for
    /// the other tokens still arrive through the star arcs.
    #[default]
    Reduced,
}

/// Runs `-forward_score(label ∘ emission)` on a tape and maps the emission
/// arc gradients back onto the log-probability matrix.
pub fn lattice_loss(label: Graph, emission: &EmissionGraph, em: &Emissions) -> Result<LossOutput> {
    let mut tape = Tape::new();
    let mut label = label;
    label.set_grad_enabled(false);
    let l = tape.leaf(label);
    let e = tape.leaf(emission.graph().clone());
    let lattice = tape.compose(l, e);
    let score = tape.forward_score(lattice)?;
    let loss = tape.negate(score);
    let value = tape.value(loss);
    let arc_grads = tape.backward(loss).take(e).unwrap_or_default();
    let grad = if value.is_finite() {
        emission.scatter(em, &arc_grads)
    } else {
        Array2::zeros((em.frames(), em.classes()))
    };
    Ok(LossOutput { loss: value, grad })
}

/// `-log sum over CTC alignments of prod_t P(pi_t | x)`.
///
/// Only the target's tokens and the blank can appear in a CTC alignment, so
/// the emission graph is built over those columns alone.
pub fn ctc_loss(em: &Emissions, target: &[Token]) -> Result<LossOutput> {
    let label = CtcLabelGraph::build(target)?;
    let emission = EmissionGraph::build_reduced(em, target)?;
    lattice_loss(label.into_graph(), &emission, em)
}

/// CTC without token self-loops; each label token uses exactly one frame.
pub fn selfless_ctc_loss(em: &Emissions, target: &[Token]) -> Result<LossOutput> {
    let label = CtcLabelGraph::build_selfless(target)?;
    let emission = EmissionGraph::build_reduced(em, target)?;
    lattice_loss(label.into_graph(), &emission, em)
}

/// Star Temporal Classification loss for a partial label.
///
/// `+inf` means no alignment exists, e.g. more label tokens than frames.
pub fn stc_loss(
    em: &Emissions,
    partial: &[Token],
    penalty: f64,
    mode: AlphabetMode,
) -> Result<LossOutput> {
    em.check_tokens(partial)?;
    let label = StcLabelGraph::build(partial, penalty)?;
    let emission = match mode {
        AlphabetMode::Full => EmissionGraph::build(em),
        AlphabetMode::Reduced => EmissionGraph::build_reduced(em, partial)?,
    };
    let emission = emission.augment_stars(em, partial)?;
    lattice_loss(label.into_graph(), &emission, em)
}

/// A training criterion with its hyperparameters resolved for one step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Criterion {
    Ctc,
    SelflessCtc,
    Stc { penalty: f64, mode: AlphabetMode },
}

impl Criterion {
    pub fn loss(&self, em: &Emissions, label: &[Token]) -> Result<LossOutput> {
        match *self {
            Criterion::Ctc => ctc_loss(em, label),
            Criterion::SelflessCtc => selfless_ctc_loss(em, label),
            Criterion::Stc { penalty, mode } => stc_loss(em, label, penalty, mode),
        }
    }
}
