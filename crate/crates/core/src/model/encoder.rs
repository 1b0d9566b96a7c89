//! Fixed letter-to-word encoder.
//!
//! A word of at most `l_max` letters is padded with `c_pad` to exactly
//! `l_max` letters; the blank is `c_blank` followed by padding. The encoder
//! matrix `E` has one row per output class and one column per
//! (position, letter) pair, with a single 1 in each position block. Word
//! scores are `E · letter_scores`, so a word's score is the sum of its
//! letters' scores at their positions.
//!
//! Output column 0 is the blank and column `i` is the `i`-th word
//! (1-based), matching the emission layout used by the losses.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_MAX_WORD_LEN: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LetterToWordEncoder {
    letters: Vec<char>,
    words: Vec<String>,
    max_len: usize,
    /// For each output row, the score column read at each position.
    rows: Vec<Vec<usize>>,
}

impl LetterToWordEncoder {
    /// `letters` excludes the blank and pad letters, which are appended.
    pub fn new<S: AsRef<str>>(letters: &[char], words: &[S], max_len: usize) -> Result<Self> {
        if max_len == 0 {
            return Err(Error::Config("l_max must be positive".into()));
        }
        let blank = letters.len();
        let pad = letters.len() + 1;
        let alphabet = letters.len() + 2;
        let spell = |letter_ids: Vec<usize>| -> Vec<usize> {
            (0..max_len)
                .map(|j| j * alphabet + letter_ids.get(j).copied().unwrap_or(pad))
                .collect()
        };
        let mut rows = vec![spell(vec![blank])];
        for w in words {
            let w = w.as_ref();
            let ids = w
                .chars()
                .map(|c| {
                    letters.iter().position(|&l| l == c).ok_or_else(|| {
                        Error::Alphabet(format!("letter {c:?} of word {w:?} not in letter set"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if ids.is_empty() || ids.len() > max_len {
                return Err(Error::Alphabet(format!(
                    "word {w:?} must have 1..={max_len} letters"
                )));
            }
            rows.push(spell(ids));
        }
        Ok(LetterToWordEncoder {
            letters: letters.to_vec(),
            words: words.iter().map(|w| w.as_ref().to_string()).collect(),
            max_len,
            rows,
        })
    }

    /// Letter alphabet size including blank and pad.
    pub fn letter_count(&self) -> usize {
        self.letters.len() + 2
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Width of the letter-score input.
    pub fn input_dim(&self) -> usize {
        self.letter_count() * self.max_len
    }

    /// Number of output classes: words plus blank.
    pub fn output_dim(&self) -> usize {
        self.rows.len()
    }

    pub fn word_column(&self, word: &str) -> Option<usize> {
        self.words.iter().position(|w| w == word).map(|i| i + 1)
    }

    /// Dense `E`, rows ordered blank first, then words.
    pub fn matrix(&self) -> Array2<f64> {
        let mut e = Array2::zeros((self.output_dim(), self.input_dim()));
        for (r, cols) in self.rows.iter().enumerate() {
            for &c in cols {
                e[[r, c]] = 1.0;
            }
        }
        e
    }

    /// `T x input_dim` letter scores to `T x output_dim` word scores.
    pub fn encode(&self, scores: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if scores.ncols() != self.input_dim() {
            return Err(Error::shape(
                format!("{} letter-score columns", self.input_dim()),
                scores.ncols(),
            ));
        }
        let mut out = Array2::zeros((scores.nrows(), self.output_dim()));
        for (t, row) in scores.outer_iter().enumerate() {
            for (r, cols) in self.rows.iter().enumerate() {
                out[[t, r]] = cols.iter().map(|&c| row[c]).sum();
            }
        }
        Ok(out)
    }

    /// Gradient with respect to the letter scores: `grad · E`.
    pub fn backward(&self, grad: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = Array2::zeros((grad.nrows(), self.input_dim()));
        for (t, row) in grad.outer_iter().enumerate() {
            for (r, cols) in self.rows.iter().enumerate() {
                for &c in cols {
                    out[[t, c]] += row[r];
                }
            }
        }
        out
    }
}
