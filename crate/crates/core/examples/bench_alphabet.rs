//! Times the STC loss with the full and the reduced emission alphabet over
//! growing vocabularies, and checks that both give the same numbers.
//!
//! Usage: cargo run --release --example bench_alphabet

use stc::bench::time_alphabets;

fn main() {
    println!("{:>6} {:>10} {:>10} {:>7} {:>10}", "vocab", "full s", "reduced s", "ratio", "grad diff");
    for vocab in [10, 100, 1000, 5000] {
        let t = time_alphabets(vocab, 50, 5, 5, 1).unwrap();
        println!(
            "{vocab:>6} {:>10.5} {:>10.5} {:>7.3} {:>10.1e}",
            t.full,
            t.reduced,
            t.ratio(),
            t.max_grad_diff
        );
    }
}
