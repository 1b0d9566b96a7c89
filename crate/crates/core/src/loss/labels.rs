//! Label graphs: the acceptors of all frame alignments consistent with a
//! (possibly partial) target sequence.
//!
//! All three share one layout. For a target of length `U` there are
//! `2U + 1` states: even state `2i` is the blank segment before token `i`
//! (or after the last token when `i == U`), odd state `2i + 1` is "token `i`
//! was just emitted". State 0 is the only start state; the last two states
//! are final.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::label::{Label, Token};

fn validate_tokens(tokens: &[Token]) -> Result<()> {
    if let Some(t) = tokens.iter().find(|&&t| t == 0) {
        return Err(Error::Alphabet(format!("token id {t} is reserved for blank")));
    }
    Ok(())
}

fn chain(target: &[Token], token_self_loops: bool, mandatory_blank: bool) -> Graph {
    let mut g = Graph::new();
    let n = 2 * target.len() + 1;
    for s in 0..n {
        g.add_state(s == 0, s + 1 == n || (!target.is_empty() && s + 2 == n));
    }
    for s in 0..n {
        let is_token = s % 2 == 1;
        let label = if is_token {
            Label::token(target[s / 2])
        } else {
            Label::BLANK
        };
        if !is_token || token_self_loops {
            g.add_accept_arc(s, s, label, 0.0);
        }
        if s + 1 < n {
            let next = if is_token {
                Label::BLANK
            } else {
                Label::token(target[s / 2])
            };
            g.add_accept_arc(s, s + 1, next, 0.0);
        }
        if is_token && s + 2 < n {
            let (cur, next) = (target[s / 2], target[s / 2 + 1]);
            if !(mandatory_blank && cur == next) {
                g.add_accept_arc(s, s + 2, Label::token(next), 0.0);
            }
        }
    }
    g
}

/// CTC label graph: accepts every alignment that the CTC collapse (merge
/// repeats, then drop blanks) maps to `target`.
#[derive(Clone, Debug)]
pub struct CtcLabelGraph {
    graph: Graph,
    target: Vec<Token>,
}

impl CtcLabelGraph {
    /// An empty target yields the blank-only acceptor.
    pub fn build(target: &[Token]) -> Result<Self> {
        validate_tokens(target)?;
        Ok(CtcLabelGraph {
            graph: chain(target, true, true),
            target: target.to_vec(),
        })
    }

    /// Variant without token self-loops: each token occupies exactly one
    /// frame, and only blanks are removed when collapsing.
    pub fn build_selfless(target: &[Token]) -> Result<Self> {
        validate_tokens(target)?;
        Ok(CtcLabelGraph {
            graph: chain(target, false, false),
            target: target.to_vec(),
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn into_graph(self) -> Graph {
        self.graph
    }

    pub fn target(&self) -> &[Token] {
        &self.target
    }
}

/// STC label graph for a partial label.
///
/// This is the selfless-CTC graph plus, for every blank segment `i`, a
/// star self-loop and a star arc entering it from the previous token. The
/// star before token `i` is `<s>\y_i`, the one after the last token is the
/// plain `<s>`. Every star arc costs `penalty`. A penalty of `-inf` removes
/// the star arcs entirely.
///
/// The graph is deterministic, so no alignment is counted twice.
#[derive(Clone, Debug)]
pub struct StcLabelGraph {
    graph: Graph,
    partial: Vec<Token>,
    penalty: f64,
}

impl StcLabelGraph {
    pub fn build(partial: &[Token], penalty: f64) -> Result<Self> {
        validate_tokens(partial)?;
        if penalty.is_nan() || penalty > 0.0 {
            return Err(Error::Domain(format!(
                "token insertion penalty must be <= 0 or -inf, got {penalty}"
            )));
        }
        let mut graph = chain(partial, false, false);
        if penalty != f64::NEG_INFINITY {
            let u = partial.len();
            for i in 0..=u {
                let star = match partial.get(i) {
                    Some(&t) => Label::not_token(t),
                    None => Label::STAR,
                };
                let seg = 2 * i;
                graph.add_accept_arc(seg, seg, star, penalty);
                if i > 0 {
                    graph.add_accept_arc(seg - 1, seg, star, penalty);
                }
            }
        }
        Ok(StcLabelGraph {
            graph,
            partial: partial.to_vec(),
            penalty,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn into_graph(self) -> Graph {
        self.graph
    }

    pub fn partial(&self) -> &[Token] {
        &self.partial
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }
}
