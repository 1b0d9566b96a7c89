mod common;

use common::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stc::autograd::{grad_check, Tape};
use stc::compose::compose;
use stc::forward::{forward, forward_score};
use stc::graph::linear_acceptor;
use stc::text::{parse_text, to_dot, to_text};
use stc::{Error, Graph, Label};

fn labels(n: i32) -> Vec<Label> {
    (1..=n).map(|t| Label::token(t as u32)).collect()
}

fn assert_same_relation(got: &Graph, g1: &Graph, g2: &Graph) {
    let expected = brute_compose(g1, g2);
    let actual = relation(got);
    assert_eq!(
        expected.keys().collect::<std::collections::BTreeSet<_>>(),
        actual.keys().collect::<std::collections::BTreeSet<_>>()
    );
    for (k, v) in &expected {
        assert!(close(actual[k], *v, 1e-9), "{k:?}: {} vs {v}", actual[k]);
    }
}

#[test]
fn composition_matches_path_pairs() {
    let mut rng = rng(1);
    let ls = labels(2);
    for _ in 0..40 {
        let g1 = random_dag(&mut rng, 4, 6, &ls, 0.0, 0.0);
        let g2 = random_dag(&mut rng, 4, 6, &ls, 0.0, 0.0);
        let c = compose(&g1, &g2);
        assert_same_relation(&c.graph, &g1, &g2);
        let expected = lse(&brute_compose(&g1, &g2).values().copied().collect::<Vec<_>>());
        let got = forward_score(&c.graph).unwrap().value();
        assert!(close(got, expected, 1e-9) || (got.is_infinite() && expected.is_infinite()));
    }
}

#[test]
fn epsilon_paths_are_counted_once() {
    let mut rng = rng(2);
    let ls = labels(2);
    for _ in 0..40 {
        let g1 = random_dag(&mut rng, 4, 6, &ls, 0.1, 0.3);
        let g2 = random_dag(&mut rng, 4, 6, &ls, 0.3, 0.1);
        let c = compose(&g1, &g2);
        assert_same_relation(&c.graph, &g1, &g2);
    }
}

#[test]
fn epsilon_interleavings_do_not_multiply() {
    // x:eps then eps:y matches by one interleaving only.
    let mut g1 = Graph::new();
    g1.add_state(true, false);
    g1.add_state(false, true);
    g1.add_arc(0, 1, Label::token(1), Label::EPSILON, -0.5);
    let mut g2 = Graph::new();
    g2.add_state(true, false);
    g2.add_state(false, true);
    g2.add_arc(0, 1, Label::EPSILON, Label::token(2), -0.25);
    let c = compose(&g1, &g2);
    let paths = enumerate_paths(&c.graph);
    assert_eq!(paths.len(), 1);
    assert!(close(paths[0].weight, -0.75, 1e-15));
}

#[test]
fn forward_score_matches_enumeration() {
    let mut rng = rng(3);
    let ls = labels(3);
    for _ in 0..100 {
        let g = random_dag(&mut rng, 6, 12, &ls, 0.2, 0.2);
        let expected = brute_forward(&g);
        let got = forward_score(&g).unwrap().value();
        assert!(close(got, expected, 1e-9) || (got.is_infinite() && expected.is_infinite()));
    }
}

#[test]
fn posteriors_form_cuts() {
    // In a linear chain every path crosses each position exactly once, so
    // the arc posteriors at each position sum to one.
    let mut rng = rng(4);
    let mut g = Graph::new();
    for s in 0..5 {
        g.add_state(s == 0, s == 4);
    }
    for s in 0..4 {
        for t in 1..=3 {
            g.add_accept_arc(s, s + 1, Label::token(t), rng.random_range(-2.0..0.0));
        }
    }
    let pass = forward(&g).unwrap();
    let grads = pass.arc_gradients(&g, 1.0);
    for s in 0..4 {
        let mass: f64 = g.out_arcs(s).iter().map(|&a| grads[a]).sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }
    assert!(grads.iter().all(|&p| (0.0..=1.0 + 1e-12).contains(&p)));
}

#[test]
fn finite_cycles_are_rejected() {
    let mut g = Graph::new();
    g.add_state(true, false);
    g.add_state(false, true);
    g.add_accept_arc(0, 1, Label::token(1), 0.0);
    g.add_accept_arc(1, 0, Label::token(1), -1.0);
    assert!(matches!(forward_score(&g), Err(Error::UnsupportedGraph(_))));
    // A cycle closed only by impossible arcs is fine.
    let mut h = Graph::new();
    h.add_state(true, false);
    h.add_state(false, true);
    h.add_accept_arc(0, 1, Label::token(1), 0.0);
    h.add_accept_arc(1, 0, Label::token(1), f64::NEG_INFINITY);
    assert_eq!(forward_score(&h).unwrap().value(), 0.0);
}

#[test]
fn graphs_without_accepting_paths_score_zero_probability() {
    let mut g = Graph::new();
    g.add_state(true, false);
    g.add_state(false, false);
    g.add_accept_arc(0, 1, Label::token(1), 0.0);
    assert_eq!(forward_score(&g).unwrap().value(), f64::NEG_INFINITY);
    let a = linear_acceptor(&[Label::token(1)]);
    let b = linear_acceptor(&[Label::token(2)]);
    assert_eq!(forward_score(&compose(&a, &b).graph).unwrap().value(), f64::NEG_INFINITY);
}

#[test]
fn autograd_matches_finite_differences() {
    let mut rng = rng(5);
    let ls = labels(2);
    for _ in 0..10 {
        let g = random_dag(&mut rng, 5, 9, &ls, 0.2, 0.2);
        let report = grad_check(
            |tape: &mut Tape, id| {
                let s = tape.forward_score(id)?;
                Ok(tape.negate(s))
            },
            &g,
            1e-5,
            1e-4,
        )
        .unwrap();
        assert!(report.passed(), "{report:?}");

        let other = random_dag(&mut rng, 4, 7, &ls, 0.2, 0.2);
        let report = grad_check(
            |tape: &mut Tape, id| {
                let o = tape.leaf(other.clone());
                let c = tape.compose(id, o);
                let s = tape.forward_score(c)?;
                Ok(tape.negate(s))
            },
            &g,
            1e-5,
            1e-4,
        )
        .unwrap();
        assert!(report.passed(), "{report:?}");
    }
}

#[test]
fn text_format_round_trips() {
    let mut rng = rng(6);
    for _ in 0..20 {
        let g = random_dag(&mut rng, 5, 8, &[Label::BLANK, Label::STAR, Label::not_token(2), Label::token(3)], 0.2, 0.2);
        let back = parse_text(&to_text(&g)).unwrap();
        assert_eq!(back, g);
    }
    let dot = to_dot(&linear_acceptor(&[Label::token(1), Label::STAR]));
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("doublecircle"));
}

#[test]
fn malformed_text_names_the_line() {
    let err = parse_text("states 2\nstart 0\nfinal 1\n0 1 x 1 0.0\n").unwrap_err();
    match err {
        Error::Parse { line, .. } => assert_eq!(line, 4),
        other => panic!("unexpected {other:?}"),
    }
}

fn permuted(g: &Graph, rng: &mut ChaCha8Rng) -> Graph {
    let mut order: Vec<usize> = (0..g.num_arcs()).collect();
    order.shuffle(rng);
    let mut out = Graph::new();
    for s in 0..g.num_states() {
        out.add_state(g.is_start(s), g.is_final(s));
    }
    for i in order {
        let a = g.arc(i);
        out.add_arc(a.src, a.dst, a.ilabel, a.olabel, a.weight);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn compose_is_invariant_to_arc_order(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ls = labels(2);
        let g1 = random_dag(&mut rng, 4, 7, &ls, 0.2, 0.2);
        let g2 = random_dag(&mut rng, 4, 7, &ls, 0.2, 0.2);
        let base = forward_score(&compose(&g1, &g2).graph).unwrap().value();
        let shuffled = forward_score(&compose(&permuted(&g1, &mut rng), &permuted(&g2, &mut rng)).graph)
            .unwrap()
            .value();
        prop_assert!(close(base, shuffled, 1e-6) || (base.is_infinite() && shuffled.is_infinite()));
    }

    #[test]
    fn forward_score_agrees_with_enumeration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_dag(&mut rng, 6, 10, &labels(3), 0.3, 0.3);
        let expected = brute_forward(&g);
        let got = forward_score(&g).unwrap().value();
        prop_assert!(close(got, expected, 1e-9) || (got.is_infinite() && expected.is_infinite()));
    }

    #[test]
    fn arc_posteriors_lie_in_unit_interval(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_dag(&mut rng, 6, 10, &labels(2), 0.2, 0.2);
        let pass = forward(&g).unwrap();
        if pass.score().is_finite() {
            let grads = pass.arc_gradients(&g, 1.0);
            prop_assert!(grads.iter().all(|&p| (-1e-12..=1.0 + 1e-9).contains(&p)));
            // Expected path length equals the sum of arc posteriors.
            let paths = enumerate_paths(&g);
            let z = pass.score();
            let expected_len: f64 = paths.iter().map(|p| (p.weight - z).exp() * p.arcs.len() as f64).sum();
            prop_assert!(close(grads.iter().sum::<f64>(), expected_len, 1e-9));
        }
    }
}
