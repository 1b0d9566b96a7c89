//! Independent reference implementations used as test oracles. None of
//! these go through composition or the forward sweep.
#![allow(dead_code)]

use std::collections::HashMap;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stc::loss::Emissions;
use stc::{Graph, Label};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn lse(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// One start-to-final path.
#[derive(Clone, Debug)]
pub struct Path {
    pub arcs: Vec<usize>,
    pub input: Vec<Label>,
    pub output: Vec<Label>,
    pub weight: f64,
}

/// Every start-to-final path of an acyclic graph, by depth-first search.
/// Epsilons are dropped from the label sequences.
pub fn enumerate_paths(g: &Graph) -> Vec<Path> {
    fn walk(g: &Graph, s: usize, cur: &mut Vec<usize>, out: &mut Vec<Path>) {
        if g.is_final(s) {
            let arcs = cur.clone();
            let input = arcs
                .iter()
                .map(|&a| g.arc(a).ilabel)
                .filter(|l| !l.is_epsilon())
                .collect();
            let output = arcs
                .iter()
                .map(|&a| g.arc(a).olabel)
                .filter(|l| !l.is_epsilon())
                .collect();
            let weight = arcs.iter().map(|&a| g.arc(a).weight).sum();
            out.push(Path {
                arcs,
                input,
                output,
                weight,
            });
        }
        for &a in g.out_arcs(s) {
            cur.push(a);
            walk(g, g.arc(a).dst, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for &s in g.starts() {
        walk(g, s, &mut Vec::new(), &mut out);
    }
    out
}

pub fn brute_forward(g: &Graph) -> f64 {
    let w: Vec<f64> = enumerate_paths(g).iter().map(|p| p.weight).collect();
    lse(&w)
}

/// Composed relation by pairing paths whose middle sequences agree:
/// (input, output) -> log-sum-exp of w1 + w2 over all such pairs.
pub fn brute_compose(g1: &Graph, g2: &Graph) -> HashMap<(Vec<Label>, Vec<Label>), f64> {
    let p1 = enumerate_paths(g1);
    let p2 = enumerate_paths(g2);
    let mut rel: HashMap<(Vec<Label>, Vec<Label>), Vec<f64>> = HashMap::new();
    for a in &p1 {
        for b in &p2 {
            if a.output == b.input {
                rel.entry((a.input.clone(), b.output.clone()))
                    .or_default()
                    .push(a.weight + b.weight);
            }
        }
    }
    rel.into_iter().map(|(k, v)| (k, lse(&v))).collect()
}

/// Relation of a graph: (input, output) -> log-sum-exp weight.
pub fn relation(g: &Graph) -> HashMap<(Vec<Label>, Vec<Label>), f64> {
    let mut rel: HashMap<(Vec<Label>, Vec<Label>), Vec<f64>> = HashMap::new();
    for p in enumerate_paths(g) {
        rel.entry((p.input, p.output)).or_default().push(p.weight);
    }
    rel.into_iter().map(|(k, v)| (k, lse(&v))).collect()
}

/// Random DAG: arcs only go from lower to higher state ids. Labels are
/// drawn from `labels`; with `eps_in`/`eps_out` some sides become epsilon.
pub fn random_dag(
    rng: &mut ChaCha8Rng,
    states: usize,
    arcs: usize,
    labels: &[Label],
    eps_in: f64,
    eps_out: f64,
) -> Graph {
    let mut g = Graph::new();
    for s in 0..states {
        g.add_state(s == 0 || rng.random_bool(0.15), s + 1 == states || rng.random_bool(0.2));
    }
    for _ in 0..arcs {
        let src = rng.random_range(0..states - 1);
        let dst = rng.random_range(src + 1..states);
        let pick = |rng: &mut ChaCha8Rng, eps: f64| {
            if rng.random_bool(eps) {
                Label::EPSILON
            } else {
                labels[rng.random_range(0..labels.len())]
            }
        };
        let i = pick(rng, eps_in);
        let o = pick(rng, eps_out);
        g.add_arc(src, dst, i, o, rng.random_range(-2.0..1.0));
    }
    g
}

/// Random normalized `T x K` emissions.
pub fn random_emissions(rng: &mut ChaCha8Rng, frames: usize, classes: usize) -> Emissions {
    let mut lp = Array2::from_shape_fn((frames, classes), |_| rng.random_range(-3.0..3.0));
    for mut row in lp.outer_iter_mut() {
        let z = lse(row.as_slice().unwrap());
        row.mapv_inplace(|v| v - z);
    }
    Emissions::new(lp).unwrap()
}

pub fn uniform_emissions(frames: usize, classes: usize) -> Emissions {
    Emissions::new(Array2::from_elem((frames, classes), -(classes as f64).ln())).unwrap()
}

/// Classic CTC forward-backward over the blank-extended target, in log
/// space. Returns the loss and `d loss / d log_probs`.
pub fn dp_ctc(log_probs: &Array2<f64>, target: &[u32]) -> (f64, Array2<f64>) {
    let (t_len, k) = log_probs.dim();
    let mut ext = vec![0u32];
    for &t in target {
        ext.push(t);
        ext.push(0);
    }
    let s_len = ext.len();
    let ninf = f64::NEG_INFINITY;
    let la = |a: f64, b: f64| lse(&[a, b]);
    let mut alpha = Array2::from_elem((t_len, s_len), ninf);
    alpha[[0, 0]] = log_probs[[0, 0]];
    if s_len > 1 {
        alpha[[0, 1]] = log_probs[[0, ext[1] as usize]];
    }
    for t in 1..t_len {
        for s in 0..s_len {
            let mut acc = alpha[[t - 1, s]];
            if s >= 1 {
                acc = la(acc, alpha[[t - 1, s - 1]]);
            }
            if s >= 2 && ext[s] != 0 && ext[s] != ext[s - 2] {
                acc = la(acc, alpha[[t - 1, s - 2]]);
            }
            alpha[[t, s]] = acc + log_probs[[t, ext[s] as usize]];
        }
    }
    let mut beta = Array2::from_elem((t_len, s_len), ninf);
    beta[[t_len - 1, s_len - 1]] = log_probs[[t_len - 1, ext[s_len - 1] as usize]];
    if s_len > 1 {
        beta[[t_len - 1, s_len - 2]] = log_probs[[t_len - 1, ext[s_len - 2] as usize]];
    }
    for t in (0..t_len - 1).rev() {
        for s in 0..s_len {
            let mut acc = beta[[t + 1, s]];
            if s + 1 < s_len {
                acc = la(acc, beta[[t + 1, s + 1]]);
            }
            if s + 2 < s_len && ext[s] != 0 && ext[s] != ext[s + 2] {
                acc = la(acc, beta[[t + 1, s + 2]]);
            }
            beta[[t, s]] = acc + log_probs[[t, ext[s] as usize]];
        }
    }
    let mut finals = vec![alpha[[t_len - 1, s_len - 1]]];
    if s_len > 1 {
        finals.push(alpha[[t_len - 1, s_len - 2]]);
    }
    let log_p = lse(&finals);
    let mut grad = Array2::zeros((t_len, k));
    if log_p == ninf {
        return (f64::INFINITY, grad);
    }
    for t in 0..t_len {
        let mut per_class: Vec<Vec<f64>> = vec![Vec::new(); k];
        for s in 0..s_len {
            // alpha and beta both include frame t's emission once
            let v = alpha[[t, s]] + beta[[t, s]] - log_probs[[t, ext[s] as usize]];
            per_class[ext[s] as usize].push(v);
        }
        for c in 0..k {
            if !per_class[c].is_empty() {
                grad[[t, c]] = -(lse(&per_class[c]) - log_p).exp();
            }
        }
    }
    (-log_p, grad)
}

/// All length-`frames` strings over `0..classes` (0 is blank).
pub fn all_strings(frames: usize, classes: usize) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..frames {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..classes as u32).map(move |c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    out
}

fn is_subsequence(sub: &[u32], seq: &[u32]) -> bool {
    let mut it = seq.iter();
    sub.iter().all(|s| it.any(|x| x == s))
}

/// STC loss by enumerating every frame-level alignment. An alignment is
/// admissible when the partial label is a subsequence of its blank-free
/// form; every non-blank token beyond the partial label's length pays the
/// insertion penalty once.
pub fn brute_stc(em: &Emissions, partial: &[u32], penalty: f64) -> f64 {
    let lp = em.as_array();
    let mut scores = Vec::new();
    for pi in all_strings(em.frames(), em.classes()) {
        let tokens: Vec<u32> = pi.iter().copied().filter(|&c| c != 0).collect();
        if !is_subsequence(partial, &tokens) {
            continue;
        }
        let inserted = tokens.len() - partial.len();
        let pen = if inserted == 0 { 0.0 } else { penalty * inserted as f64 };
        let w: f64 = pi.iter().enumerate().map(|(t, &c)| lp[[t, c as usize]]).sum();
        scores.push(w + pen);
    }
    -lse(&scores)
}

/// CTC loss by enumeration: merge repeats, drop blanks, compare.
pub fn brute_ctc(em: &Emissions, target: &[u32], selfless: bool) -> f64 {
    let lp = em.as_array();
    let mut scores = Vec::new();
    for pi in all_strings(em.frames(), em.classes()) {
        let mut out = Vec::new();
        let mut prev = None;
        for &c in &pi {
            if c != 0 && (selfless || prev != Some(c)) {
                out.push(c);
            }
            prev = Some(c);
        }
        if out == target {
            scores.push(pi.iter().enumerate().map(|(t, &c)| lp[[t, c as usize]]).sum());
        }
    }
    -lse(&scores)
}

/// Central differences of a loss over every emission entry.
pub fn numeric_emission_grad<F>(em: &Emissions, h: f64, f: F) -> Array2<f64>
where
    F: Fn(&Emissions) -> f64,
{
    let base = em.as_array().clone();
    let mut grad = Array2::zeros(base.dim());
    for idx in ndarray::indices(base.dim()) {
        let mut p = base.clone();
        p[idx] += h;
        let plus = f(&Emissions::unchecked(p.clone()));
        p[idx] -= 2.0 * h;
        let minus = f(&Emissions::unchecked(p));
        grad[idx] = (plus - minus) / (2.0 * h);
    }
    grad
}

pub fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_rel_error(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| stc::autograd::relative_error(x, y))
        .fold(0.0, f64::max)
}
