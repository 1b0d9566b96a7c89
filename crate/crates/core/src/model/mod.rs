//! The trainable side: frame classifier, letter-to-word encoder, Adagrad,
//! greedy decoding and token error rate.

mod adagrad;
mod classifier;
mod decode;
mod encoder;

pub use adagrad::Adagrad;
pub use classifier::{log_softmax, ClassifierConfig, ForwardCache, FrameClassifier};
pub use decode::{best_path, collapse, edit_distance, edit_distance_rate, greedy_decode, CollapseMode};
pub use encoder::{LetterToWordEncoder, DEFAULT_MAX_WORD_LEN};
