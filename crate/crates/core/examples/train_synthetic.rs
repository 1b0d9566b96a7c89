//! Trains three models on synthetic data and compares their token error
//! rates: CTC on full labels, CTC on partial labels and STC on partial
//! labels.
//!
//! Usage: cargo run --release --example train_synthetic -- [p_drop] [epochs]

use stc::data::{apply_drop, generate_synthetic, DropConfig, Sample, SyntheticConfig};
use stc::train::{LossKind, RunConfig, Trainer};

fn run(name: &str, cfg: RunConfig, train: &[Sample], valid: &[Sample], vocab: usize) -> f64 {
    let mut trainer = Trainer::new(cfg.clone(), vocab, vocab + 1).expect("valid config");
    for _ in 0..cfg.epochs {
        let stats = trainer.train_epoch(train).expect("training");
        let eval = trainer.evaluate(valid).expect("evaluation");
        println!(
            "{name:>12} epoch {:>2} loss {:>8.4} lambda {:>8.4} valid ter {:.4} ({:.2}s)",
            stats.epoch, stats.loss, stats.lambda, eval.ter, stats.seconds
        );
    }
    trainer.evaluate(valid).expect("evaluation").ter
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let p_drop: f64 = args.get(1).map_or(0.5, |s| s.parse().expect("p_drop"));
    let epochs: usize = args.get(2).map_or(10, |s| s.parse().expect("epochs"));
    let vocab = 30;

    let train = generate_synthetic(&SyntheticConfig {
        vocab_size: vocab,
        num_samples: 2000,
        seed: 1,
        id_prefix: "train".into(),
        ..SyntheticConfig::default()
    })
    .expect("synthetic data");
    let valid = generate_synthetic(&SyntheticConfig {
        vocab_size: vocab,
        num_samples: 300,
        seed: 2,
        id_prefix: "valid".into(),
        ..SyntheticConfig::default()
    })
    .expect("synthetic data");
    let weak = apply_drop(&train, &DropConfig::uniform(p_drop, 7)).expect("drop");
    println!("{} of {} samples keep a non-empty label", weak.len(), train.len());

    let base = RunConfig {
        epochs,
        ..RunConfig::default()
    };
    let full = run("ctc-full", RunConfig { loss: LossKind::Ctc, ..base.clone() }, &train, &valid, vocab);
    let ctc_weak = run("ctc-partial", RunConfig { loss: LossKind::Ctc, ..base.clone() }, &weak, &valid, vocab);
    let stc_weak = run("stc-partial", base, &weak, &valid, vocab);
    println!("ter ctc-full {full:.4} ctc-partial {ctc_weak:.4} stc-partial {stc_weak:.4}");
}
