//! Line-delimited JSON corpus files. One sample per line:
//!
//! ```text
//! {"id":"s-0","frames":[[0.9,0.1],[0.2,1.1]],"full_label":[1,2],"partial_label":[2]}
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{is_subsequence, Sample};
use crate::error::{Error, Result};
use crate::label::Token;

#[derive(Serialize, Deserialize)]
struct Record {
    id: String,
    frames: Vec<Vec<f64>>,
    full_label: Vec<Token>,
    partial_label: Vec<Token>,
}

impl From<&Sample> for Record {
    fn from(s: &Sample) -> Self {
        Record {
            id: s.id.clone(),
            frames: s.frames.outer_iter().map(|r| r.to_vec()).collect(),
            full_label: s.full_label.clone(),
            partial_label: s.partial_label.clone(),
        }
    }
}

impl Record {
    fn into_sample(self) -> std::result::Result<Sample, String> {
        let dim = self.frames.first().map_or(0, Vec::len);
        if self.frames.iter().any(|r| r.len() != dim) {
            return Err("frames have unequal widths".into());
        }
        if self.full_label.contains(&0) || self.partial_label.contains(&0) {
            return Err("token id 0 is reserved for blank".into());
        }
        if !is_subsequence(&self.partial_label, &self.full_label) {
            return Err("partial_label is not a subsequence of full_label".into());
        }
        let rows = self.frames.len();
        let flat: Vec<f64> = self.frames.into_iter().flatten().collect();
        let frames = Array2::from_shape_vec((rows, dim), flat).map_err(|e| e.to_string())?;
        Ok(Sample {
            id: self.id,
            frames,
            full_label: self.full_label,
            partial_label: self.partial_label,
        })
    }
}

pub fn write_corpus_to<W: Write>(samples: &[Sample], mut w: W) -> Result<()> {
    for s in samples {
        serde_json::to_writer(&mut w, &Record::from(s)).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_corpus(samples: &[Sample], path: impl AsRef<Path>) -> Result<()> {
    write_corpus_to(samples, BufWriter::new(File::create(path)?))
}

pub fn read_corpus_from<R: Read>(r: R) -> Result<Vec<Sample>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(r).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            line: i + 1,
            message,
        };
        let record: Record = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        out.push(record.into_sample().map_err(parse_err)?);
    }
    Ok(out)
}

pub fn read_corpus(path: impl AsRef<Path>) -> Result<Vec<Sample>> {
    read_corpus_from(File::open(path)?)
}
