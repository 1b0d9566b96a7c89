//! Transducer composition in the log semiring.
//!
//! Epsilons are handled with a sequencing filter: between two matched
//! transitions a composed path first takes the left graph's output-epsilon
//! moves, then the right graph's input-epsilon moves, never interleaved.
//! Every pair of component paths therefore maps to exactly one composed path.

use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};

use crate::graph::{ArcId, Graph, StateId};
use crate::label::Label;
use crate::semiring::log_mul;

/// Which component arcs produced a composed arc. A side is `None` when that
/// graph stayed put during an epsilon move.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ArcSource {
    pub lhs: Option<ArcId>,
    pub rhs: Option<ArcId>,
}

#[derive(Clone, Debug)]
pub struct Composed {
    pub graph: Graph,
    /// Parallel to `graph.arcs()`.
    pub sources: Vec<ArcSource>,
}

// Filter state: 0 allows left epsilons, 1 means a right epsilon was taken.
type Key = (StateId, StateId, u8);

/// Composes `lhs` (output side) with `rhs` (input side).
pub fn compose(lhs: &Graph, rhs: &Graph) -> Composed {
    let rhs_index = InputIndex::new(rhs);
    let mut out = Graph::new();
    out.set_grad_enabled(lhs.grad_enabled() || rhs.grad_enabled());
    let mut sources = Vec::new();
    let mut ids: HashMap<Key, StateId> = HashMap::new();
    let mut queue: VecDeque<Key> = VecDeque::new();

    let mut state_for = |key: Key, out: &mut Graph, queue: &mut VecDeque<Key>| -> StateId {
        match ids.entry(key) {
            Entry::Occupied(e) => *e.get(),
            Entry::Vacant(e) => {
                let id = out.add_state(false, lhs.is_final(key.0) && rhs.is_final(key.1));
                queue.push_back(key);
                *e.insert(id)
            }
        }
    };

    for &s1 in lhs.starts() {
        for &s2 in rhs.starts() {
            let id = state_for((s1, s2, 0), &mut out, &mut queue);
            out.set_start(id);
        }
    }

    while let Some(key @ (q1, q2, filter)) = queue.pop_front() {
        let src = state_for(key, &mut out, &mut queue);
        for &id1 in lhs.out_arcs(q1) {
            let a1 = lhs.arc(id1);
            if a1.olabel.is_epsilon() {
                if filter == 0 {
                    let dst = state_for((a1.dst, q2, 0), &mut out, &mut queue);
                    out.add_arc(src, dst, a1.ilabel, Label::EPSILON, a1.weight);
                    sources.push(ArcSource {
                        lhs: Some(id1),
                        rhs: None,
                    });
                }
                continue;
            }
            for &id2 in rhs_index.matching(q2, a1.olabel) {
                let a2 = rhs.arc(id2);
                let dst = state_for((a1.dst, a2.dst, 0), &mut out, &mut queue);
                out.add_arc(src, dst, a1.ilabel, a2.olabel, log_mul(a1.weight, a2.weight));
                sources.push(ArcSource {
                    lhs: Some(id1),
                    rhs: Some(id2),
                });
            }
        }
        for &id2 in rhs_index.matching(q2, Label::EPSILON) {
            let a2 = rhs.arc(id2);
            let dst = state_for((q1, a2.dst, 1), &mut out, &mut queue);
            out.add_arc(src, dst, Label::EPSILON, a2.olabel, a2.weight);
            sources.push(ArcSource {
                lhs: None,
                rhs: Some(id2),
            });
        }
    }

    Composed {
        graph: out,
        sources,
    }
}

impl Composed {
    /// Scatters composed-arc gradients onto the component graphs. A composed
    /// weight is `w_lhs + w_rhs`, so each side receives the full gradient.
    pub fn backward(&self, grad: &[f64], lhs_arcs: usize, rhs_arcs: usize) -> (Vec<f64>, Vec<f64>) {
        scatter(&self.sources, grad, lhs_arcs, rhs_arcs)
    }
}

pub(crate) fn scatter(
    sources: &[ArcSource],
    grad: &[f64],
    lhs_arcs: usize,
    rhs_arcs: usize,
) -> (Vec<f64>, Vec<f64>) {
    let mut gl = vec![0.0; lhs_arcs];
    let mut gr = vec![0.0; rhs_arcs];
    for (src, &g) in sources.iter().zip(grad) {
        if let Some(i) = src.lhs {
            gl[i] += g;
        }
        if let Some(i) = src.rhs {
            gr[i] += g;
        }
    }
    (gl, gr)
}

/// Per-state arc lists sorted by input label, for matching by binary search.
struct InputIndex {
    by_state: Vec<Vec<(Label, ArcId)>>,
}

impl InputIndex {
    fn new(g: &Graph) -> Self {
        let by_state = (0..g.num_states())
            .map(|s| {
                let mut v: Vec<(Label, ArcId)> =
                    g.out_arcs(s).iter().map(|&a| (g.arc(a).ilabel, a)).collect();
                v.sort_by_key(|&(l, _)| l);
                v
            })
            .collect();
        InputIndex { by_state }
    }

    fn matching(&self, s: StateId, label: Label) -> impl Iterator<Item = &ArcId> {
        let arcs = &self.by_state[s];
        let lo = arcs.partition_point(|&(l, _)| l < label);
        let hi = lo + arcs[lo..].partition_point(|&(l, _)| l == label);
        arcs[lo..hi].iter().map(|(_, a)| a)
    }
}
