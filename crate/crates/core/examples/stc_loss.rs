//! STC loss on a partial label across a range of insertion penalties, in
//! both emission alphabet modes.
//!
//! Usage: cargo run --example stc_loss

use stc::bench::random_emissions;
use stc::loss::{selfless_ctc_loss, stc_loss, AlphabetMode};

fn main() {
    let em = random_emissions(12, 8, 3);
    let full = [3, 1, 4, 1, 5];
    let partial = [3, 4, 5];

    println!("selfless ctc on the full label: {:.4}", selfless_ctc_loss(&em, &full).unwrap().loss);
    println!("{:>8} {:>10} {:>10}", "p", "full", "reduced");
    for p in [1.0, 0.9, 0.5, 0.1, 0.0f64] {
        let penalty = p.ln();
        let f = stc_loss(&em, &partial, penalty, AlphabetMode::Full).unwrap();
        let r = stc_loss(&em, &partial, penalty, AlphabetMode::Reduced).unwrap();
        println!("{p:>8.2} {:>10.4} {:>10.4}", f.loss, r.loss);
    }
    // With p = 0 no insertions are allowed, so only alignments with
    // exactly the partial label remain: the loss is selfless CTC on it.
    println!(
        "selfless ctc on the partial label: {:.4}",
        selfless_ctc_loss(&em, &partial).unwrap().loss
    );
}
