//! Forward score (log-semiring shortest distance) over acyclic graphs, and
//! its derivative with respect to arc weights.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::{Graph, StateId};
use crate::semiring::{log_add, LogWeight};

/// States in topological order, considering only arcs with finite weight.
/// Arcs weighted `-inf` carry no mass, so cycles made only of them are fine.
pub fn topological_order(g: &Graph) -> Result<Vec<StateId>> {
    let n = g.num_states();
    let mut indegree = vec![0usize; n];
    for a in g.arcs().iter().filter(|a| a.weight.is_finite()) {
        indegree[a.dst] += 1;
    }
    let mut queue: VecDeque<StateId> = (0..n).filter(|&s| indegree[s] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(s) = queue.pop_front() {
        order.push(s);
        for &id in g.out_arcs(s) {
            let a = g.arc(id);
            if a.weight.is_finite() {
                indegree[a.dst] -= 1;
                if indegree[a.dst] == 0 {
                    queue.push_back(a.dst);
                }
            }
        }
    }
    if order.len() != n {
        return Err(Error::UnsupportedGraph(
            "graph has a cycle with finite weight; forward score would diverge".into(),
        ));
    }
    Ok(order)
}

/// Cached results of a forward sweep: the state order and `alpha`, the
/// log-sum-exp of all partial path scores from any start state.
#[derive(Clone, Debug)]
pub struct ForwardPass {
    order: Vec<StateId>,
    alpha: Vec<f64>,
    score: f64,
}

pub fn forward(g: &Graph) -> Result<ForwardPass> {
    let order = topological_order(g)?;
    let mut alpha = vec![f64::NEG_INFINITY; g.num_states()];
    for &s in g.starts() {
        alpha[s] = 0.0;
    }
    for &s in &order {
        let from = alpha[s];
        if from == f64::NEG_INFINITY {
            continue;
        }
        for &id in g.out_arcs(s) {
            let a = g.arc(id);
            if a.weight.is_finite() {
                alpha[a.dst] = log_add(alpha[a.dst], from + a.weight);
            }
        }
    }
    let score = g
        .finals()
        .iter()
        .fold(f64::NEG_INFINITY, |acc, &f| log_add(acc, alpha[f]));
    Ok(ForwardPass {
        order,
        alpha,
        score,
    })
}

/// Log-sum-exp over every start-to-final path. `-inf` for the empty language.
pub fn forward_score(g: &Graph) -> Result<LogWeight> {
    forward(g).map(|p| LogWeight(p.score))
}

impl ForwardPass {
    pub fn score(&self) -> f64 {
        self.score
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// `beta[s]`: log-sum-exp of path scores from `s` to any final state.
    pub fn beta(&self, g: &Graph) -> Vec<f64> {
        let mut beta = vec![f64::NEG_INFINITY; g.num_states()];
        for &s in self.order.iter().rev() {
            let mut acc = if g.is_final(s) { 0.0 } else { f64::NEG_INFINITY };
            for &id in g.out_arcs(s) {
                let a = g.arc(id);
                if a.weight.is_finite() {
                    acc = log_add(acc, a.weight + beta[a.dst]);
                }
            }
            beta[s] = acc;
        }
        beta
    }

    /// `upstream * d(score)/d(w_e)` for every arc: the arc's posterior
    /// occupancy, `exp(alpha[src] + w + beta[dst] - score)`.
    pub fn arc_gradients(&self, g: &Graph, upstream: f64) -> Vec<f64> {
        if self.score == f64::NEG_INFINITY || upstream == 0.0 {
            return vec![0.0; g.num_arcs()];
        }
        let beta = self.beta(g);
        g.arcs()
            .iter()
            .map(|a| {
                let path = self.alpha[a.src] + a.weight + beta[a.dst];
                if path == f64::NEG_INFINITY || !a.weight.is_finite() {
                    0.0
                } else {
                    upstream * (path - self.score).exp()
                }
            })
            .collect()
    }
}
