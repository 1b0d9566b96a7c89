//! Weighted finite-state transducers with log-semiring arc weights.

use crate::label::Label;

pub type StateId = usize;
pub type ArcId = usize;

#[derive(Clone, Debug, PartialEq)]
pub struct Arc {
    pub src: StateId,
    pub dst: StateId,
    pub ilabel: Label,
    pub olabel: Label,
    /// Log-domain score. Finite, or `-inf` for a forbidden transition.
    pub weight: f64,
}

/// A WFST. Arcs keep insertion order, both globally and per source state,
/// so every traversal and floating-point reduction is deterministic.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Graph {
    arcs: Vec<Arc>,
    out_arcs: Vec<Vec<ArcId>>,
    starts: Vec<StateId>,
    finals: Vec<StateId>,
    is_start: Vec<bool>,
    is_final: Vec<bool>,
    grad_enabled: bool,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// An empty graph whose arc weights will receive gradients.
    pub fn with_grad() -> Self {
        Graph {
            grad_enabled: true,
            ..Self::default()
        }
    }

    pub fn set_grad_enabled(&mut self, enabled: bool) {
        self.grad_enabled = enabled;
    }

    pub fn grad_enabled(&self) -> bool {
        self.grad_enabled
    }

    pub fn add_state(&mut self, start: bool, accept: bool) -> StateId {
        let id = self.out_arcs.len();
        self.out_arcs.push(Vec::new());
        self.is_start.push(false);
        self.is_final.push(false);
        if start {
            self.set_start(id);
        }
        if accept {
            self.set_final(id);
        }
        id
    }

    pub fn set_start(&mut self, s: StateId) {
        if !self.is_start[s] {
            self.is_start[s] = true;
            self.starts.push(s);
        }
    }

    pub fn set_final(&mut self, s: StateId) {
        if !self.is_final[s] {
            self.is_final[s] = true;
            self.finals.push(s);
        }
    }

    /// Adds a transducer arc and returns its index.
    ///
    /// Panics if either endpoint does not exist or the weight is `NaN`/`+inf`.
    pub fn add_arc(
        &mut self,
        src: StateId,
        dst: StateId,
        ilabel: Label,
        olabel: Label,
        weight: f64,
    ) -> ArcId {
        assert!(
            src < self.num_states() && dst < self.num_states(),
            "arc {src}->{dst} references a missing state (have {})",
            self.num_states()
        );
        assert!(
            weight.is_finite() || weight == f64::NEG_INFINITY,
            "arc weight must be finite or -inf, got {weight}"
        );
        let id = self.arcs.len();
        self.arcs.push(Arc {
            src,
            dst,
            ilabel,
            olabel,
            weight,
        });
        self.out_arcs[src].push(id);
        id
    }

    /// Adds an acceptor arc (`ilabel == olabel`).
    pub fn add_accept_arc(&mut self, src: StateId, dst: StateId, label: Label, weight: f64) -> ArcId {
        self.add_arc(src, dst, label, label, weight)
    }

    pub fn num_states(&self) -> usize {
        self.out_arcs.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, id: ArcId) -> &Arc {
        &self.arcs[id]
    }

    pub fn out_arcs(&self, s: StateId) -> &[ArcId] {
        &self.out_arcs[s]
    }

    pub fn starts(&self) -> &[StateId] {
        &self.starts
    }

    pub fn finals(&self) -> &[StateId] {
        &self.finals
    }

    pub fn is_start(&self, s: StateId) -> bool {
        self.is_start[s]
    }

    pub fn is_final(&self, s: StateId) -> bool {
        self.is_final[s]
    }

    pub fn is_acceptor(&self) -> bool {
        self.arcs.iter().all(|a| a.ilabel == a.olabel)
    }

    pub fn weights(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        self.arcs.iter().map(|a| a.weight)
    }

    pub fn set_weight(&mut self, id: ArcId, weight: f64) {
        assert!(weight.is_finite() || weight == f64::NEG_INFINITY);
        self.arcs[id].weight = weight;
    }

    /// Copy of the graph keeping only arcs for which `keep` holds.
    /// States, start and final sets are unchanged.
    pub fn filter_arcs(&self, keep: impl Fn(&Arc) -> bool) -> Graph {
        let mut out = self.empty_like();
        for a in self.arcs.iter().filter(|a| keep(a)) {
            out.add_arc(a.src, a.dst, a.ilabel, a.olabel, a.weight);
        }
        out
    }

    /// Copy restricted to states that lie on some start-to-final path.
    /// Surviving states keep their relative order.
    pub fn trim(&self) -> Graph {
        let n = self.num_states();
        let mut forward = vec![false; n];
        let mut stack: Vec<StateId> = self.starts.clone();
        for &s in &self.starts {
            forward[s] = true;
        }
        while let Some(s) = stack.pop() {
            for &a in &self.out_arcs[s] {
                let d = self.arcs[a].dst;
                if !forward[d] {
                    forward[d] = true;
                    stack.push(d);
                }
            }
        }
        let mut incoming: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for a in &self.arcs {
            incoming[a.dst].push(a.src);
        }
        let mut backward = vec![false; n];
        let mut stack: Vec<StateId> = self.finals.clone();
        for &s in &self.finals {
            backward[s] = true;
        }
        while let Some(s) = stack.pop() {
            for &p in &incoming[s] {
                if !backward[p] {
                    backward[p] = true;
                    stack.push(p);
                }
            }
        }
        let mut remap = vec![usize::MAX; n];
        let mut out = Graph {
            grad_enabled: self.grad_enabled,
            ..Graph::default()
        };
        for s in 0..n {
            if forward[s] && backward[s] {
                remap[s] = out.add_state(false, false);
            }
        }
        for &s in &self.starts {
            if remap[s] != usize::MAX {
                out.set_start(remap[s]);
            }
        }
        for &s in &self.finals {
            if remap[s] != usize::MAX {
                out.set_final(remap[s]);
            }
        }
        for a in &self.arcs {
            if remap[a.src] != usize::MAX && remap[a.dst] != usize::MAX {
                out.add_arc(remap[a.src], remap[a.dst], a.ilabel, a.olabel, a.weight);
            }
        }
        out
    }

    fn empty_like(&self) -> Graph {
        Graph {
            arcs: Vec::new(),
            out_arcs: vec![Vec::new(); self.num_states()],
            starts: self.starts.clone(),
            finals: self.finals.clone(),
            is_start: self.is_start.clone(),
            is_final: self.is_final.clone(),
            grad_enabled: self.grad_enabled,
        }
    }
}

/// Single-state transducer with a zero-weight `l:l` self-loop per label.
pub fn identity(labels: impl IntoIterator<Item = Label>) -> Graph {
    let mut g = Graph::new();
    let s = g.add_state(true, true);
    for l in labels {
        g.add_accept_arc(s, s, l, 0.0);
    }
    g
}

/// Linear acceptor for a label sequence, all weights zero.
pub fn linear_acceptor(labels: &[Label]) -> Graph {
    let mut g = Graph::new();
    let mut prev = g.add_state(true, labels.is_empty());
    for (i, &l) in labels.iter().enumerate() {
        let next = g.add_state(false, i + 1 == labels.len());
        g.add_accept_arc(prev, next, l, 0.0);
        prev = next;
    }
    g
}
