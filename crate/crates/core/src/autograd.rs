//! Reverse-mode differentiation through graph operations.
//!
//! A [`Tape`] owns every graph and scalar produced during a computation.
//! Operations append records in execution order, so the record list is
//! already topologically sorted and `backward` simply walks it in reverse.

use crate::compose::{compose, scatter, ArcSource};
use crate::error::Result;
use crate::forward::{forward, ForwardPass};
use crate::graph::Graph;
use crate::semiring::negate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GraphId(usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ScalarId(usize);

#[derive(Debug)]
enum Record {
    Leaf(Graph),
    Compose {
        lhs: GraphId,
        rhs: GraphId,
        out: Graph,
        sources: Vec<ArcSource>,
    },
    ForwardScore {
        input: GraphId,
        pass: ForwardPass,
    },
    Negate {
        input: ScalarId,
        value: f64,
    },
}

#[derive(Debug, Default)]
pub struct Tape {
    records: Vec<Record>,
}

/// Accumulated arc gradients, one vector per graph that required them.
#[derive(Debug)]
pub struct GradStore {
    graphs: Vec<Option<Vec<f64>>>,
}

impl GradStore {
    /// Gradients for a graph created with gradients enabled, or `None`.
    pub fn graph(&self, id: GraphId) -> Option<&[f64]> {
        self.graphs.get(id.0).and_then(|g| g.as_deref())
    }

    pub fn take(&mut self, id: GraphId) -> Option<Vec<f64>> {
        self.graphs.get_mut(id.0).and_then(Option::take)
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records an input graph. Only graphs with `grad_enabled` accumulate
    /// gradients.
    pub fn leaf(&mut self, g: Graph) -> GraphId {
        self.records.push(Record::Leaf(g));
        GraphId(self.records.len() - 1)
    }

    pub fn graph(&self, id: GraphId) -> &Graph {
        match &self.records[id.0] {
            Record::Leaf(g) | Record::Compose { out: g, .. } => g,
            _ => panic!("record {} is not a graph", id.0),
        }
    }

    pub fn value(&self, id: ScalarId) -> f64 {
        match &self.records[id.0] {
            Record::ForwardScore { pass, .. } => pass.score(),
            Record::Negate { value, .. } => *value,
            _ => panic!("record {} is not a scalar", id.0),
        }
    }

    pub fn compose(&mut self, lhs: GraphId, rhs: GraphId) -> GraphId {
        let composed = compose(self.graph(lhs), self.graph(rhs));
        self.records.push(Record::Compose {
            lhs,
            rhs,
            out: composed.graph,
            sources: composed.sources,
        });
        GraphId(self.records.len() - 1)
    }

    pub fn forward_score(&mut self, input: GraphId) -> Result<ScalarId> {
        let pass = forward(self.graph(input))?;
        self.records.push(Record::ForwardScore { input, pass });
        Ok(ScalarId(self.records.len() - 1))
    }

    pub fn negate(&mut self, input: ScalarId) -> ScalarId {
        let value = negate(self.value(input));
        self.records.push(Record::Negate { input, value });
        ScalarId(self.records.len() - 1)
    }

    /// Gradients of `output` with respect to the arc weights of every
    /// gradient-enabled graph.
    pub fn backward(&self, output: ScalarId) -> GradStore {
        self.backward_with(output, 1.0)
    }

    /// As [`Tape::backward`], seeding the output gradient with `upstream`.
    pub fn backward_with(&self, output: ScalarId, upstream: f64) -> GradStore {
        let n = self.records.len();
        let needs: Vec<bool> = self.requires_grad();
        let mut scalar_grads = vec![0.0f64; n];
        let mut graph_grads: Vec<Option<Vec<f64>>> = vec![None; n];
        scalar_grads[output.0] = upstream;

        for i in (0..=output.0).rev() {
            match &self.records[i] {
                Record::Leaf(_) => {}
                Record::Negate { input, .. } => {
                    scalar_grads[input.0] -= scalar_grads[i];
                }
                Record::ForwardScore { input, pass } => {
                    if !needs[input.0] {
                        continue;
                    }
                    let g = self.graph(*input);
                    let grads = pass.arc_gradients(g, scalar_grads[i]);
                    accumulate(&mut graph_grads[input.0], grads);
                }
                Record::Compose {
                    lhs, rhs, sources, ..
                } => {
                    let Some(out_grad) = graph_grads[i].take() else {
                        continue;
                    };
                    let (nl, nr) = (self.graph(*lhs).num_arcs(), self.graph(*rhs).num_arcs());
                    let (gl, gr) = scatter(sources, &out_grad, nl, nr);
                    if needs[lhs.0] {
                        accumulate(&mut graph_grads[lhs.0], gl);
                    }
                    if needs[rhs.0] {
                        accumulate(&mut graph_grads[rhs.0], gr);
                    }
                }
            }
        }

        // Only user-visible leaves keep their gradients.
        for (i, slot) in graph_grads.iter_mut().enumerate() {
            let keep = matches!(&self.records[i], Record::Leaf(g) if g.grad_enabled());
            if !keep {
                *slot = None;
            } else if slot.is_none() {
                *slot = Some(vec![0.0; self.graph(GraphId(i)).num_arcs()]);
            }
        }
        GradStore {
            graphs: graph_grads,
        }
    }

    fn requires_grad(&self) -> Vec<bool> {
        let mut needs = Vec::with_capacity(self.records.len());
        for r in &self.records {
            let v = match r {
                Record::Leaf(g) => g.grad_enabled(),
                Record::Compose { lhs, rhs, .. } => needs[lhs.0] || needs[rhs.0],
                Record::ForwardScore { input, .. } => needs[input.0],
                Record::Negate { input, .. } => needs[input.0],
            };
            needs.push(v);
        }
        needs
    }
}

fn accumulate(slot: &mut Option<Vec<f64>>, grads: Vec<f64>) {
    match slot {
        Some(existing) => {
            for (e, g) in existing.iter_mut().zip(grads) {
                *e += g;
            }
        }
        None => *slot = Some(grads),
    }
}

/// Result of comparing autograd against central finite differences.
#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// Arc with the largest error, if any arc was checked.
    pub worst_arc: Option<usize>,
    pub checked: usize,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error <= self.tolerance
    }
}

/// Relative error with a unit floor: `|a - b| / max(1, |a|, |b|)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Checks the tape gradient of `f` against central differences with step
/// `h`, perturbing every finite arc weight of `g`.
pub fn grad_check<F>(f: F, g: &Graph, h: f64, tol: f64) -> Result<GradCheckReport>
where
    F: Fn(&mut Tape, GraphId) -> Result<ScalarId>,
{
    let eval = |graph: &Graph| -> Result<f64> {
        let mut tape = Tape::new();
        let id = tape.leaf(graph.clone());
        let out = f(&mut tape, id)?;
        Ok(tape.value(out))
    };

    let mut input = g.clone();
    input.set_grad_enabled(true);
    let mut tape = Tape::new();
    let id = tape.leaf(input.clone());
    let out = f(&mut tape, id)?;
    let analytic = tape.backward(out).take(id).unwrap_or_default();

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_arc: None,
        checked: 0,
        tolerance: tol,
    };
    for (i, &grad) in analytic.iter().enumerate() {
        let w = input.arc(i).weight;
        if !w.is_finite() {
            continue;
        }
        input.set_weight(i, w + h);
        let plus = eval(&input)?;
        input.set_weight(i, w - h);
        let minus = eval(&input)?;
        input.set_weight(i, w);
        let numeric = (plus - minus) / (2.0 * h);
        let err = relative_error(grad, numeric);
        report.checked += 1;
        if err > report.max_rel_error || report.worst_arc.is_none() {
            report.max_rel_error = report.max_rel_error.max(err);
            report.worst_arc = Some(i);
        }
    }
    Ok(report)
}

/// Central-difference gradient of a scalar function of a flat parameter
/// vector.
pub fn numeric_gradient<F>(f: F, x: &[f64], h: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let v = probe[i];
            probe[i] = v + h;
            let plus = f(&probe);
            probe[i] = v - h;
            let minus = f(&probe);
            probe[i] = v;
            (plus - minus) / (2.0 * h)
        })
        .collect()
}
