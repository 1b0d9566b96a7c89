//! Frame-wise log-probabilities and the linear-chain emission graph built
//! from them, including the star and star-complement arcs.

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::label::{Label, Symbol, Token};
use crate::semiring::log_sum_exp;

/// Rows must normalize to this tolerance in probability space.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

/// A `T x K` matrix of log-probabilities. Column 0 is the blank, column `t`
/// is token `t`, so the vocabulary is `1..K`.
#[derive(Clone, Debug, PartialEq)]
pub struct Emissions {
    log_probs: Array2<f64>,
}

impl Emissions {
    /// Validates shape, values and per-row normalization.
    pub fn new(log_probs: Array2<f64>) -> Result<Self> {
        let (frames, classes) = log_probs.dim();
        if frames == 0 {
            return Err(Error::EmptyInput("emissions have zero frames".into()));
        }
        if classes < 2 {
            return Err(Error::shape("at least 2 columns (blank + 1 token)", classes));
        }
        for (t, row) in log_probs.outer_iter().enumerate() {
            if let Some(v) = row.iter().find(|v| v.is_nan() || **v == f64::INFINITY) {
                return Err(Error::Contract(format!("frame {t} contains {v}")));
            }
            let mass = log_sum_exp(row.as_slice().expect("standard layout")).exp();
            if (mass - 1.0).abs() > NORMALIZATION_TOLERANCE {
                return Err(Error::Contract(format!(
                    "frame {t} has total probability {mass}, expected 1"
                )));
            }
        }
        Ok(Emissions { log_probs })
    }

    /// Skips normalization checks. Finite-difference probes need this.
    pub fn unchecked(log_probs: Array2<f64>) -> Self {
        Emissions {
            log_probs: log_probs.as_standard_layout().into_owned(),
        }
    }

    pub fn frames(&self) -> usize {
        self.log_probs.nrows()
    }

    /// Blank plus vocabulary.
    pub fn classes(&self) -> usize {
        self.log_probs.ncols()
    }

    pub fn vocab_size(&self) -> usize {
        self.classes() - 1
    }

    pub fn row(&self, t: usize) -> ArrayView1<'_, f64> {
        self.log_probs.row(t)
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.log_probs
    }

    pub(crate) fn check_tokens(&self, tokens: &[Token]) -> Result<()> {
        match tokens.iter().find(|&&t| t == 0 || t as usize >= self.classes()) {
            Some(t) => Err(Error::Alphabet(format!(
                "token {t} outside vocabulary 1..={}",
                self.vocab_size()
            ))),
            None => Ok(()),
        }
    }
}

/// Star weights of one frame: `<s>` and each requested `<s>\t`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameStars {
    pub star: f64,
    pub not: Vec<f64>,
}

/// Log-probabilities of `<s>` (all tokens, blank excluded) and of `<s>\t`
/// for each `t` in `complements`, for one frame.
///
/// Complements are computed as `star - p_t` in a max-shifted domain, which
/// is stable for every `t` except the argmax; that one is summed directly.
pub fn frame_stars(row: &[f64], complements: &[Token]) -> FrameStars {
    let tokens = &row[1..];
    let (argmax, max) = tokens
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    if max == f64::NEG_INFINITY {
        return FrameStars {
            star: f64::NEG_INFINITY,
            not: vec![f64::NEG_INFINITY; complements.len()],
        };
    }
    let shifted: f64 = tokens.iter().map(|v| (v - max).exp()).sum();
    let star = max + shifted.ln();
    let not = complements
        .iter()
        .map(|&t| {
            let idx = t as usize - 1;
            if idx == argmax {
                let rest = tokens
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != idx)
                    .map(|(_, &v)| v);
                crate::semiring::log_sum_exp_iter(rest.collect::<Vec<_>>())
            } else {
                max + (shifted - (tokens[idx] - max).exp()).ln()
            }
        })
        .collect();
    FrameStars { star, not }
}

/// Adds `d loss / d <s>` and `d loss / d <s>\t` back onto the token columns
/// of one gradient row through the log-sum-exp chain rule.
pub fn scatter_frame_stars(
    row: &[f64],
    stars: &FrameStars,
    complements: &[Token],
    star_grad: f64,
    not_grads: &[f64],
    grad_row: &mut [f64],
) {
    let tokens = &row[1..];
    let max = tokens.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return;
    }
    // Terms whose normalizer is at least `max` share one O(K) pass.
    let mut coeff = 0.0;
    if star_grad != 0.0 {
        coeff += star_grad * (max - stars.star).exp();
    }
    let mut direct = Vec::new();
    for (k, (&t, &g)) in complements.iter().zip(not_grads).enumerate() {
        let norm = stars.not[k];
        if g == 0.0 || norm == f64::NEG_INFINITY {
            continue;
        }
        if norm >= max {
            coeff += g * (max - norm).exp();
        } else {
            direct.push((t, g, norm));
        }
    }
    if coeff != 0.0 {
        for (g, &v) in grad_row[1..].iter_mut().zip(tokens) {
            if v != f64::NEG_INFINITY {
                *g += coeff * (v - max).exp();
            }
        }
        for (k, (&t, &g)) in complements.iter().zip(not_grads).enumerate() {
            let norm = stars.not[k];
            if g != 0.0 && norm != f64::NEG_INFINITY && norm >= max {
                let v = row[t as usize];
                if v != f64::NEG_INFINITY {
                    grad_row[t as usize] -= g * (v - norm).exp();
                }
            }
        }
    }
    for (t, g, norm) in direct {
        for (i, &v) in tokens.iter().enumerate() {
            if i + 1 != t as usize && v != f64::NEG_INFINITY {
                grad_row[i + 1] += g * (v - norm).exp();
            }
        }
    }
}

/// A linear-chain acceptor with `T + 1` states. Each frame contributes one
/// arc per emitted symbol, weighted by that symbol's log-probability.
#[derive(Clone, Debug)]
pub struct EmissionGraph {
    graph: Graph,
    frames: usize,
    /// Emission column of each plain arc (blank or token), `None` for stars.
    columns: Vec<Option<usize>>,
    stars: Option<StarArcs>,
}

#[derive(Clone, Debug)]
struct StarArcs {
    complements: Vec<Token>,
    frames: Vec<FrameStars>,
    /// For each star arc index: (frame, position) where position 0 is `<s>`
    /// and `k + 1` is the k-th complement.
    arcs: Vec<(usize, usize, usize)>,
}

impl EmissionGraph {
    /// Emission graph over the blank and every vocabulary token.
    pub fn build(em: &Emissions) -> Self {
        let columns: Vec<usize> = (0..em.classes()).collect();
        Self::over_columns(em, &columns)
    }

    /// Emission graph over the blank and the given tokens only.
    pub fn build_reduced(em: &Emissions, tokens: &[Token]) -> Result<Self> {
        em.check_tokens(tokens)?;
        let mut columns: Vec<usize> = std::iter::once(0)
            .chain(tokens.iter().map(|&t| t as usize))
            .collect();
        columns.sort_unstable();
        columns.dedup();
        Ok(Self::over_columns(em, &columns))
    }

    fn over_columns(em: &Emissions, columns: &[usize]) -> Self {
        let frames = em.frames();
        let mut graph = Graph::with_grad();
        for t in 0..=frames {
            graph.add_state(t == 0, t == frames);
        }
        let mut arc_columns = Vec::with_capacity(frames * columns.len());
        for t in 0..frames {
            let row = em.row(t);
            for &c in columns {
                let label = if c == 0 { Label::BLANK } else { Label::token(c as Token) };
                graph.add_accept_arc(t, t + 1, label, row[c]);
                arc_columns.push(Some(c));
            }
        }
        EmissionGraph {
            graph,
            frames,
            columns: arc_columns,
            stars: None,
        }
    }

    /// Adds per frame one `<s>` arc and one `<s>\t` arc for each `t` in
    /// `complements`, weighted by the summed token probabilities.
    pub fn augment_stars(mut self, em: &Emissions, complements: &[Token]) -> Result<Self> {
        em.check_tokens(complements)?;
        if self.stars.is_some() {
            return Err(Error::Alphabet("emission graph already has star arcs".into()));
        }
        let mut complements = complements.to_vec();
        complements.sort_unstable();
        complements.dedup();
        let mut frames = Vec::with_capacity(self.frames);
        let mut arcs = Vec::with_capacity(self.frames * (complements.len() + 1));
        for t in 0..self.frames {
            let row = em.row(t);
            let stars = frame_stars(row.as_slice().expect("standard layout"), &complements);
            let id = self.graph.add_accept_arc(t, t + 1, Label::STAR, stars.star);
            arcs.push((id, t, 0));
            for (k, &c) in complements.iter().enumerate() {
                let id = self.graph.add_accept_arc(t, t + 1, Label::not_token(c), stars.not[k]);
                arcs.push((id, t, k + 1));
            }
            frames.push(stars);
        }
        self.columns.resize(self.graph.num_arcs(), None);
        self.stars = Some(StarArcs {
            complements,
            frames,
            arcs,
        });
        Ok(self)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn into_graph(self) -> Graph {
        self.graph
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    /// Maps arc gradients back to a `T x K` gradient over the emissions.
    pub fn scatter(&self, em: &Emissions, arc_grads: &[f64]) -> Array2<f64> {
        let mut grad = Array2::<f64>::zeros((em.frames(), em.classes()));
        for (id, col) in self.columns.iter().enumerate() {
            if let Some(c) = col {
                let t = self.graph.arc(id).src;
                grad[[t, *c]] += arc_grads[id];
            }
        }
        if let Some(stars) = &self.stars {
            let n = stars.complements.len();
            let mut per_frame = vec![0.0; self.frames * (n + 1)];
            for &(id, t, pos) in &stars.arcs {
                per_frame[t * (n + 1) + pos] += arc_grads[id];
            }
            for t in 0..self.frames {
                let g = &per_frame[t * (n + 1)..(t + 1) * (n + 1)];
                if g.iter().all(|&x| x == 0.0) {
                    continue;
                }
                let row = em.row(t);
                let mut grad_row = grad.row_mut(t);
                scatter_frame_stars(
                    row.as_slice().expect("standard layout"),
                    &stars.frames[t],
                    &stars.complements,
                    g[0],
                    &g[1..],
                    grad_row.as_slice_mut().expect("standard layout"),
                );
            }
        }
        grad
    }

    /// Symbol carried by each arc, for inspection.
    pub fn arc_symbol(&self, id: usize) -> Symbol {
        self.graph.arc(id).ilabel.symbol()
    }
}
