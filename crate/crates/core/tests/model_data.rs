mod common;

use common::*;
use ndarray::Array2;
use rand::Rng;
use stc::autograd::{numeric_gradient, relative_error};
use stc::data::{
    apply_drop, generate_synthetic, read_corpus_from, retention_histogram, write_corpus_to,
    DropConfig, DropStrategy, SyntheticConfig,
};
use stc::loss::{ctc_loss, stc_loss, AlphabetMode, Emissions};
use stc::model::{ClassifierConfig, FrameClassifier, LetterToWordEncoder};
use stc::train::{LossKind, RunConfig, Trainer};
use stc::Error;

fn loss_of(model: &FrameClassifier, x: &Array2<f64>, f: &dyn Fn(&Emissions) -> f64) -> f64 {
    f(&Emissions::unchecked(model.forward(x.view()).unwrap()))
}

fn check_model_gradient(model: FrameClassifier, x: Array2<f64>, f: &dyn Fn(&Emissions) -> (f64, Array2<f64>)) {
    let cache = model.forward_cached(x.view()).unwrap();
    let (_, grad_lp) = f(&Emissions::unchecked(cache.log_probs().clone()));
    let analytic = model.backward(&cache, grad_lp.view());
    let params = model.params().to_vec();
    let numeric = numeric_gradient(
        |p| {
            let mut probe = model.clone();
            probe.params_mut().copy_from_slice(p);
            loss_of(&probe, &x, &|e| f(e).0)
        },
        &params,
        1e-5,
    );
    let worst = analytic
        .iter()
        .zip(&numeric)
        .map(|(&a, &n)| relative_error(a, n))
        .fold(0.0, f64::max);
    assert!(worst < 1e-4, "max relative error {worst}");
}

fn random_input(seed: u64, frames: usize, dim: usize) -> Array2<f64> {
    let mut rng = rng(seed);
    Array2::from_shape_fn((frames, dim), |_| rng.random_range(-1.0..1.0))
}

#[test]
fn classifier_gradients_through_ctc_and_stc() {
    for hidden in [None, Some(4)] {
        let cfg = ClassifierConfig { input_dim: 3, context: 1, hidden, classes: 4 };
        let model = FrameClassifier::random(cfg, None, 5).unwrap();
        let x = random_input(6, 5, 3);
        check_model_gradient(model.clone(), x.clone(), &|e| {
            let o = ctc_loss(e, &[1, 3]).unwrap();
            (o.loss, o.grad)
        });
        check_model_gradient(model, x, &|e| {
            let o = stc_loss(e, &[2], -0.6, AlphabetMode::Reduced).unwrap();
            (o.loss, o.grad)
        });
    }
}

#[test]
fn end_to_end_through_word_encoder_and_stars() {
    let enc = LetterToWordEncoder::new(&['a', 'b', 'c'], &["a", "cab", "ca"], 3).unwrap();
    let cfg = ClassifierConfig { input_dim: 4, context: 0, hidden: Some(3), classes: 0 };
    let model = FrameClassifier::random(cfg, Some(enc), 9).unwrap();
    assert_eq!(model.classes(), 4);
    let x = random_input(10, 4, 4);
    for mode in [AlphabetMode::Full, AlphabetMode::Reduced] {
        check_model_gradient(model.clone(), x.clone(), &|e| {
            let o = stc_loss(e, &[2], -0.3, mode).unwrap();
            (o.loss, o.grad)
        });
    }
}

#[test]
fn encoder_is_linear() {
    let enc = LetterToWordEncoder::new(&['a', 'b', 'c'], &["a", "cab", "ca"], 3).unwrap();
    let s1 = random_input(1, 2, enc.input_dim());
    let s2 = random_input(2, 2, enc.input_dim());
    let alpha = 0.375;
    let lhs = enc.encode((&s1 * alpha + &s2).view()).unwrap();
    let rhs = enc.encode(s1.view()).unwrap() * alpha + enc.encode(s2.view()).unwrap();
    assert!(max_abs_diff(&lhs, &rhs) < 1e-15);
}

#[test]
fn synthetic_label_lengths_cover_the_configured_range() {
    let cfg = SyntheticConfig {
        vocab_size: 6,
        num_samples: 10_000,
        len_range: (2, 5),
        frames_per_token: (1, 1),
        noise: 0.0,
        ..SyntheticConfig::default()
    };
    let samples = generate_synthetic(&cfg).unwrap();
    let mut counts = [0usize; 6];
    for s in &samples {
        counts[s.full_label.len()] += 1;
        assert_eq!(s.frames.nrows(), s.full_label.len());
    }
    assert_eq!(counts[0] + counts[1], 0);
    // Uniform over 4 lengths: each within 4 sigma of 2500.
    let sigma = (10_000.0f64 * 0.25 * 0.75).sqrt();
    for &c in &counts[2..] {
        assert!((c as f64 - 2500.0).abs() < 4.0 * sigma, "{counts:?}");
    }
}

#[test]
fn noise_free_single_frame_data_is_linearly_separable() {
    let cfg = SyntheticConfig {
        vocab_size: 5,
        num_samples: 50,
        frames_per_token: (1, 1),
        noise: 0.0,
        ..SyntheticConfig::default()
    };
    let samples = generate_synthetic(&cfg).unwrap();
    // Identity weights classify every frame by its one-hot position.
    for s in &samples {
        for (row, &t) in s.frames.outer_iter().zip(&s.full_label) {
            let argmax = row.iter().enumerate().fold(0, |b, (i, &v)| if v > row[b] { i } else { b });
            assert_eq!(argmax + 1, t as usize);
        }
    }
}

#[test]
fn dropping_rate_matches_binomial() {
    let cfg = SyntheticConfig { vocab_size: 10, num_samples: 20_000, noise: 0.0, ..SyntheticConfig::default() };
    let samples = generate_synthetic(&cfg).unwrap();
    let total: usize = samples.iter().map(|s| s.full_label.len()).sum();
    assert!(total >= 100_000);
    // Pruned samples kept zero tokens, so summing survivors is exact.
    let dropped = apply_drop(&samples, &DropConfig::uniform(0.4, 3)).unwrap();
    let kept: usize = dropped.iter().map(|s| s.partial_label.len()).sum();
    let p = kept as f64 / total as f64;
    let sigma = (0.6 * 0.4 / total as f64).sqrt();
    assert!((p - 0.6).abs() < 3.0 * sigma, "retained {p}");
    for s in &dropped {
        assert!(!s.partial_label.is_empty());
        assert!(stc::data::is_subsequence(&s.partial_label, &s.full_label));
    }
}

#[test]
fn retention_histograms_have_the_expected_shape() {
    let cfg = SyntheticConfig { vocab_size: 10, num_samples: 6000, len_range: (15, 25), noise: 0.0, ..SyntheticConfig::default() };
    let samples = generate_synthetic(&cfg).unwrap();

    let none = apply_drop(&samples, &DropConfig::uniform(0.0, 1)).unwrap();
    let h = retention_histogram(&none, 10);
    assert_eq!(h.counts[9], none.len());

    let uni = retention_histogram(&apply_drop(&samples, &DropConfig::uniform(0.4, 1)).unwrap(), 10);
    let peak = (0..10).max_by_key(|&i| uni.counts[i]).unwrap();
    assert!((5..=6).contains(&peak), "{:?}", uni.counts);
    assert_eq!(local_maxima(&uni.counts), 1, "{:?}", uni.counts);

    let split = DropConfig { strategy: DropStrategy::PerSampleSplit, p_drop: vec![0.1, 0.4, 0.7], seed: 1 };
    let tri = retention_histogram(&apply_drop(&samples, &split).unwrap(), 20);
    assert_eq!(local_maxima(&tri.counts), 3, "{:?}", tri.counts);
}

/// Peaks that dominate their neighbourhood by a clear margin.
fn local_maxima(counts: &[usize]) -> usize {
    let total: usize = counts.iter().sum();
    (0..counts.len())
        .filter(|&i| {
            let lo = i.saturating_sub(2);
            let hi = (i + 3).min(counts.len());
            counts[i] * 50 > total && (lo..hi).all(|j| j == i || counts[j] < counts[i])
        })
        .count()
}

#[test]
fn per_token_split_drops_by_vocabulary_part() {
    let cfg = SyntheticConfig { vocab_size: 8, num_samples: 3000, noise: 0.0, ..SyntheticConfig::default() };
    let samples = generate_synthetic(&cfg).unwrap();
    let split = DropConfig { strategy: DropStrategy::PerTokenSplit, p_drop: vec![0.0, 1.0], seed: 4 };
    let out = apply_drop(&samples, &split).unwrap();
    // Every token is either always kept or always dropped.
    let mut kept = [false; 9];
    let mut seen = [false; 9];
    for s in &samples {
        for &t in &s.full_label {
            seen[t as usize] = true;
        }
    }
    for s in &out {
        for &t in &s.partial_label {
            kept[t as usize] = true;
        }
    }
    for s in &out {
        let expected: Vec<u32> = s.full_label.iter().copied().filter(|&t| kept[t as usize]).collect();
        assert_eq!(s.partial_label, expected);
    }
    assert!(kept.iter().any(|&k| k) && (1..9).any(|t| seen[t] && !kept[t]));
}

#[test]
fn corpus_round_trip_and_errors() {
    let cfg = SyntheticConfig { vocab_size: 4, num_samples: 20, ..SyntheticConfig::default() };
    let samples = apply_drop(&generate_synthetic(&cfg).unwrap(), &DropConfig::uniform(0.3, 2)).unwrap();
    let mut buf = Vec::new();
    write_corpus_to(&samples, &mut buf).unwrap();
    assert_eq!(read_corpus_from(buf.as_slice()).unwrap(), samples);
    assert!(read_corpus_from(&b""[..]).unwrap().is_empty());

    let mut text = String::from_utf8(buf).unwrap();
    text.push_str("{\"id\":\"x\",\"frames\":[[1.0]],\"full_label\":[1],\"partial_label\":[2]}\n");
    let line = samples.len() + 1;
    match read_corpus_from(text.as_bytes()).unwrap_err() {
        Error::Parse { line: l, .. } => assert_eq!(l, line),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn noise_free_ctc_training_reaches_low_error() {
    let data = SyntheticConfig { vocab_size: 8, num_samples: 300, noise: 0.0, ..SyntheticConfig::default() };
    let train = generate_synthetic(&data).unwrap();
    let valid = generate_synthetic(&SyntheticConfig { seed: 2, num_samples: 100, id_prefix: "v".into(), ..data }).unwrap();
    let cfg = RunConfig { loss: LossKind::Ctc, epochs: 8, ..RunConfig::default() };
    let mut trainer = Trainer::new(cfg, 8, 9).unwrap();
    for _ in 0..8 {
        trainer.train_epoch(&train).unwrap();
    }
    let eval = trainer.evaluate(&valid).unwrap();
    assert!(eval.ter < 0.05, "ter {}", eval.ter);
}

#[test]
fn resuming_reproduces_the_next_epoch_exactly() {
    let data = SyntheticConfig { vocab_size: 6, num_samples: 120, ..SyntheticConfig::default() };
    let train = apply_drop(&generate_synthetic(&data).unwrap(), &DropConfig::uniform(0.3, 5)).unwrap();
    let cfg = RunConfig { half_life: 50.0, batch_size: 8, workers: 2, ..RunConfig::default() };
    let mut a = Trainer::new(cfg, 6, 7).unwrap();
    a.train_epoch(&train).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ckpt.json");
    a.checkpoint().save(&path).unwrap();
    let next_a = a.train_epoch(&train).unwrap();

    let mut b = Trainer::from_checkpoint(stc::train::Checkpoint::load(&path).unwrap()).unwrap();
    let next_b = b.train_epoch(&train).unwrap();
    assert_eq!(next_a.loss.to_bits(), next_b.loss.to_bits());
    assert_eq!(next_a.lambda.to_bits(), next_b.lambda.to_bits());
    assert_eq!(a.model().params(), b.model().params());
}

#[test]
fn stc_lambda_follows_the_schedule() {
    let data = SyntheticConfig { vocab_size: 4, num_samples: 32, ..SyntheticConfig::default() };
    let train = generate_synthetic(&data).unwrap();
    let cfg = RunConfig { half_life: 4.0, batch_size: 8, ..RunConfig::default() };
    let mut t = Trainer::new(cfg, 4, 5).unwrap();
    assert!((t.lambda() - 0.5f64.ln()).abs() < 1e-12);
    let stats = t.train_epoch(&train).unwrap();
    assert_eq!(t.step(), 4);
    assert!((stats.lambda - 0.7f64.ln()).abs() < 1e-12);
}
