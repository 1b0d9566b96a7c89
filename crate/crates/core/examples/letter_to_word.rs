//! Maps per-position letter scores to word scores with the fixed 0/1
//! letter-to-word matrix, then trains a tiny word model through it.
//!
//! Usage: cargo run --example letter_to_word

use ndarray::{array, Array2};
use stc::loss::{stc_loss, AlphabetMode, Emissions};
use stc::model::{Adagrad, ClassifierConfig, FrameClassifier, LetterToWordEncoder};

fn main() {
    let enc = LetterToWordEncoder::new(&['a', 'b', 'c'], &["a", "cab", "ca"], 3).unwrap();
    println!("E ({} word rows x {} letter columns):\n{}", enc.output_dim(), enc.input_dim(), enc.matrix());

    // Three position blocks over (a, b, c, blank, pad).
    let scores = array![[
        0.9, -0.4, 0.2, 1.8, -0.1, //
        -0.4, 1.2, -1.3, 0.1, 1.2, //
        2.1, -0.8, -1.4, 0.0, 0.1
    ]];
    let words = enc.encode(scores.view()).unwrap();
    println!("<b>  {:.1}", words[[0, 0]]);
    for w in enc.words() {
        println!("{w:<4} {:.1}", words[[0, enc.word_column(w).unwrap()]]);
    }

    // Teach a classifier on 6 frames to emit "cab" somewhere, given only a
    // partial label, with gradients flowing back through E.
    let cfg = ClassifierConfig { input_dim: 2, context: 0, hidden: Some(4), classes: 0 };
    let mut model = FrameClassifier::random(cfg, Some(enc.clone()), 1).unwrap();
    let x = Array2::from_shape_fn((6, 2), |(t, d)| ((t * 2 + d) as f64).sin());
    let cab = enc.word_column("cab").unwrap() as u32;
    let mut opt = Adagrad::new(model.param_count(), 0.3);
    for step in 0..=60 {
        let cache = model.forward_cached(x.view()).unwrap();
        let out = stc_loss(&Emissions::unchecked(cache.log_probs().clone()), &[cab], 0.5f64.ln(), AlphabetMode::Reduced).unwrap();
        if step % 20 == 0 {
            println!("step {step:>2} stc loss {:.4}", out.loss);
        }
        let grads = model.backward(&cache, out.grad.view());
        opt.step(model.params_mut(), &grads);
    }
}
