//! Synthetic unsegmented sequences and weak-label generation.

mod corpus;
mod drop;
mod synthetic;

pub use corpus::{read_corpus, read_corpus_from, write_corpus, write_corpus_to};
pub use drop::{apply_drop, retention_histogram, DropConfig, DropStrategy, Histogram};
pub use synthetic::{generate_synthetic, SyntheticConfig};

use ndarray::Array2;

use crate::label::Token;

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub id: String,
    /// `T x d` input features.
    pub frames: Array2<f64>,
    pub full_label: Vec<Token>,
    /// Order-preserving subsequence of `full_label`.
    pub partial_label: Vec<Token>,
}

/// Whether `sub` can be obtained from `seq` by deleting elements.
pub fn is_subsequence(sub: &[Token], seq: &[Token]) -> bool {
    let mut it = seq.iter();
    sub.iter().all(|s| it.any(|x| x == s))
}

/// Deterministic uniform draw in `[0, 1)` keyed by `(seed, key, tag, index)`,
/// independent of iteration order.
pub(crate) fn keyed_unit(seed: u64, key: &str, tag: u64, index: u64) -> f64 {
    // FNV-1a over the key, then splitmix64 finalization of the mixed words.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in key.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut x = splitmix(seed ^ splitmix(h ^ splitmix(tag ^ splitmix(index))));
    x = splitmix(x);
    (x >> 11) as f64 / (1u64 << 53) as f64
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
