//! Builds two small transducers, composes them, and differentiates the
//! forward score of the result with respect to the arc weights of both
//! inputs.
//!
//! Usage: cargo run --example graph_basics

use stc::autograd::Tape;
use stc::compose::compose;
use stc::forward::forward;
use stc::text::to_text;
use stc::{Graph, Label};

fn main() {
    let (a, b) = (Label::token(1), Label::token(2));

    // Accepts "a" or "ab", with probabilities 0.6 and 0.4.
    let mut left = Graph::with_grad();
    let s0 = left.add_state(true, false);
    let s1 = left.add_state(false, true);
    let s2 = left.add_state(false, false);
    left.add_accept_arc(s0, s1, a, 0.6f64.ln());
    left.add_accept_arc(s0, s2, a, 0.4f64.ln());
    left.add_accept_arc(s2, s1, b, 0.0);

    // Maps a to itself and b to nothing (epsilon output).
    let mut right = Graph::with_grad();
    let r = right.add_state(true, true);
    right.add_arc(r, r, a, a, 0.0);
    right.add_arc(r, r, b, Label::EPSILON, (0.5f64).ln());

    let composed = compose(&left, &right);
    println!("composition:\n{}", to_text(&composed.graph));
    let pass = forward(&composed.graph).expect("acyclic");
    println!("forward score {:.6} (expected ln(0.6 + 0.4 * 0.5) = {:.6})", pass.score(), 0.8f64.ln());

    let mut tape = Tape::new();
    let l = tape.leaf(left);
    let rr = tape.leaf(right);
    let c = tape.compose(l, rr);
    let score = tape.forward_score(c).expect("acyclic");
    let grads = tape.backward(score);
    // Gradients of a forward score are arc posteriors.
    println!("d score / d left arcs  {:?}", grads.graph(l).unwrap());
    println!("d score / d right arcs {:?}", grads.graph(rr).unwrap());
}
