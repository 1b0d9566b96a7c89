//! CTC and selfless CTC on a tiny emission matrix, with a greedy decode of
//! the same frames.
//!
//! Usage: cargo run --example ctc_loss

use ndarray::array;
use stc::loss::{ctc_loss, selfless_ctc_loss, Emissions};
use stc::model::{greedy_decode, CollapseMode};

fn main() {
    // Four frames over {<b>, a, b}.
    let probs = array![
        [0.1, 0.8, 0.1],
        [0.2, 0.7, 0.1],
        [0.7, 0.2, 0.1],
        [0.1, 0.1, 0.8],
    ];
    let em = Emissions::new(probs.mapv(f64::ln)).expect("normalized rows");
    let target = [1, 2];

    let ctc = ctc_loss(&em, &target).expect("valid target");
    println!("ctc loss {:.6}", ctc.loss);
    println!("d loss / d log p (rows sum to -1):\n{:.4}", ctc.grad);

    // Without self-loops each token takes exactly one frame, so "a" cannot
    // stretch across frames 0 and 1.
    let selfless = selfless_ctc_loss(&em, &target).expect("valid target");
    println!("selfless ctc loss {:.6}", selfless.loss);

    let lp = em.as_array().view();
    println!("greedy ctc decode {:?}", greedy_decode(lp, CollapseMode::Ctc));
    println!("greedy stc decode {:?}", greedy_decode(lp, CollapseMode::Stc));
}
