//! Pre-trained word embeddings in the word2vec text and binary formats.
//!
//! Both formats start with an ASCII header `"<vocab_count> <dim>\n"`. In the
//! binary format each entry is the word's bytes, a single space, then `dim`
//! little-endian `f32`s, optionally followed by a newline. In the text format
//! each entry is a line `word v1 ... vdim`.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, ErrorKind, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DenseVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingFormat {
    Text,
    Binary,
}

impl FromStr for EmbeddingFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" | "txt" => Ok(EmbeddingFormat::Text),
            "binary" | "bin" => Ok(EmbeddingFormat::Binary),
            other => Err(Error::InvalidConfig(format!("unknown embedding format `{other}`"))),
        }
    }
}

/// Word vectors stored row-major in one `f32` buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f32>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionZero);
        }
        Ok(EmbeddingTable {
            dim,
            words: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
        })
    }

    /// Appends an entry. A repeated word keeps its first vector for lookups
    /// but still counts as an entry.
    pub fn push(&mut self, word: String, vector: &[f32]) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: vector.len(),
            });
        }
        self.index.entry(word.clone()).or_insert(self.words.len());
        self.words.push(word);
        self.data.extend_from_slice(vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab_count(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.index
            .get(word)
            .map(|&row| &self.data[row * self.dim..(row + 1) * self.dim])
    }

    pub fn load(path: &Path, format: EmbeddingFormat) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        let mut reader = BufReader::with_capacity(1 << 20, file);
        match format {
            EmbeddingFormat::Text => Self::read_text(&mut reader),
            EmbeddingFormat::Binary => Self::read_binary(&mut reader),
        }
    }

    pub fn read_binary<R: BufRead>(reader: &mut R) -> Result<Self> {
        let (count, dim) = read_header(reader)?;
        let mut table = EmbeddingTable::new(dim)?;
        table.reserve(count);
        let mut word = Vec::new();
        let mut raw = vec![0u8; dim * 4];
        let mut vector = vec![0f32; dim];
        for read in 0..count {
            word.clear();
            reader.read_until(b' ', &mut word)?;
            if word.last() != Some(&b' ') {
                return Err(Error::TruncatedFile(read));
            }
            word.pop();
            // tolerate the newline some writers put after each vector
            let start = word.iter().position(|&b| b != b'\n').unwrap_or(word.len());
            let text = String::from_utf8_lossy(&word[start..]).into_owned();
            match reader.read_exact(&mut raw) {
                Ok(()) => {}
                Err(e) if e.kind() == ErrorKind::UnexpectedEof => return Err(Error::TruncatedFile(read)),
                Err(e) => return Err(e.into()),
            }
            for (v, chunk) in vector.iter_mut().zip(raw.chunks_exact(4)) {
                *v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
            }
            table.push(text, &vector)?;
        }
        Ok(table)
    }

    pub fn read_text<R: BufRead>(reader: &mut R) -> Result<Self> {
        let (count, dim) = read_header(reader)?;
        let mut table = EmbeddingTable::new(dim)?;
        table.reserve(count);
        let mut line = String::new();
        let mut vector = Vec::with_capacity(dim);
        let mut read = 0;
        while read < count {
            line.clear();
            if reader.read_line(&mut line)? == 0 {
                return Err(Error::TruncatedFile(read));
            }
            let mut parts = line.split_ascii_whitespace();
            let Some(word) = parts.next() else { continue };
            vector.clear();
            for p in parts {
                vector.push(
                    p.parse::<f32>()
                        .map_err(|_| Error::format("embedding entry", format!("bad value `{p}` for `{word}`")))?,
                );
            }
            if vector.len() != dim {
                return Err(Error::format(
                    "embedding entry",
                    format!("`{word}` has {} values, expected {dim}", vector.len()),
                ));
            }
            table.push(word.to_owned(), &vector)?;
            read += 1;
        }
        Ok(table)
    }

    fn reserve(&mut self, count: usize) {
        // headers can lie; cap the up-front allocation
        let count = count.min(1 << 22);
        self.words.reserve(count);
        self.data.reserve(count.saturating_mul(self.dim).min(1 << 28));
    }

    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{} {}", self.vocab_count(), self.dim)?;
        for (row, word) in self.words.iter().enumerate() {
            w.write_all(word.as_bytes())?;
            w.write_all(b" ")?;
            for v in &self.data[row * self.dim..(row + 1) * self.dim] {
                w.write_all(&v.to_le_bytes())?;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn write_text<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{} {}", self.vocab_count(), self.dim)?;
        for (row, word) in self.words.iter().enumerate() {
            write!(w, "{word}")?;
            for v in &self.data[row * self.dim..(row + 1) * self.dim] {
                write!(w, " {v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Unweighted mean of the vectors of in-table tokens; the zero vector when
    /// no token is found.
    pub fn embed<S: AsRef<str>>(&self, doc: &[S]) -> DenseVector {
        let mut sum = vec![0f64; self.dim];
        let mut hits = 0usize;
        for tok in doc {
            if let Some(v) = self.get(tok.as_ref()) {
                for (s, &x) in sum.iter_mut().zip(v) {
                    *s += x as f64;
                }
                hits += 1;
            }
        }
        if hits > 0 {
            let n = hits as f64;
            sum.iter_mut().for_each(|s| *s /= n);
        }
        DenseVector::new(sum)
    }
}

fn read_header<R: BufRead>(reader: &mut R) -> Result<(usize, usize)> {
    let mut line = Vec::new();
    reader.read_until(b'\n', &mut line)?;
    let text = String::from_utf8_lossy(&line);
    let mut parts = text.split_ascii_whitespace();
    let parse = |p: Option<&str>| -> Result<usize> {
        p.and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedHeader(text.trim_end().to_string()))
    };
    let count = parse(parts.next())?;
    let dim = parse(parts.next())?;
    if parts.next().is_some() {
        return Err(Error::MalformedHeader(text.trim_end().to_string()));
    }
    if dim == 0 {
        return Err(Error::DimensionZero);
    }
    Ok((count, dim))
}
