//! Generates synthetic sequences, drops label tokens three ways and prints
//! the resulting retention histograms.
//!
//! Usage: cargo run --example weak_labels

use stc::data::{
    apply_drop, generate_synthetic, retention_histogram, DropConfig, DropStrategy, SyntheticConfig,
};

fn show(name: &str, cfg: &DropConfig, data: &[stc::data::Sample]) {
    let weak = apply_drop(data, cfg).unwrap();
    let hist = retention_histogram(&weak, 10);
    println!("{name} ({} of {} samples kept)", weak.len(), data.len());
    let max = *hist.counts.iter().max().unwrap_or(&1).max(&1);
    for (i, c) in hist.counts.iter().enumerate() {
        println!("  {:>3}-{:>3}% {:>5} {}", i * 10, i * 10 + 10, c, "#".repeat(c * 50 / max));
    }
}

fn main() {
    let data = generate_synthetic(&SyntheticConfig {
        len_range: (15, 25),
        ..SyntheticConfig::default()
    })
    .unwrap();
    let s = &data[0];
    println!("sample {}: {} frames, label {:?}", s.id, s.frames.nrows(), s.full_label);

    show("uniform p=0.5", &DropConfig::uniform(0.5, 1), &data);
    let split = |strategy| DropConfig { strategy, p_drop: vec![0.1, 0.5, 0.9], seed: 1 };
    show("three sample groups p=0.1/0.5/0.9", &split(DropStrategy::PerSampleSplit), &data);
    show("three token groups p=0.1/0.5/0.9", &split(DropStrategy::PerTokenSplit), &data);
}
