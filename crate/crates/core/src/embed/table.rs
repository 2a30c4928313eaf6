use std::collections::HashMap;
use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use super::EmbedError;

/// Token vectors of a fixed dimension, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    tokens: Vec<String>,
    vectors: Vec<f32>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct JsonHeader {
    dim: usize,
    vocab_size: usize,
}

#[derive(Serialize, Deserialize)]
struct JsonRow {
    token: String,
    vector: Vec<f32>,
}

impl EmbeddingTable {
    pub fn new(dim: usize, tokens: Vec<String>, vectors: Vec<f32>) -> Result<Self, EmbedError> {
        if dim == 0 || vectors.len() != dim * tokens.len() {
            return Err(EmbedError::Format(format!("{} values for {} tokens of dim {dim}", vectors.len(), tokens.len())));
        }
        if vectors.iter().any(|x| !x.is_finite()) {
            return Err(EmbedError::Format("non-finite value".into()));
        }
        let index: HashMap<String, usize> = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        if index.len() != tokens.len() {
            return Err(EmbedError::Format("duplicate token".into()));
        }
        Ok(EmbeddingTable { dim, tokens, vectors, index })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn get(&self, token: &str) -> Option<&[f32]> {
        self.index_of(token).map(|i| self.row(i))
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn cosine(&self, a: &str, b: &str) -> Option<f64> {
        let (x, y) = (self.get(a)?, self.get(b)?);
        let dot: f64 = x.iter().zip(y).map(|(p, q)| *p as f64 * *q as f64).sum();
        let nx: f64 = x.iter().map(|p| (*p as f64).powi(2)).sum::<f64>().sqrt();
        let ny: f64 = y.iter().map(|p| (*p as f64).powi(2)).sum::<f64>().sqrt();
        Some(dot / (nx * ny).max(f64::MIN_POSITIVE))
    }

    /// Header `dim`, `vocab_size` as little-endian u32, then per token a u32
    /// byte length, the UTF-8 bytes and `dim` little-endian f32 values.
    pub fn write_binary(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(&(self.dim as u32).to_le_bytes())?;
        w.write_all(&(self.tokens.len() as u32).to_le_bytes())?;
        for (i, t) in self.tokens.iter().enumerate() {
            w.write_all(&(t.len() as u32).to_le_bytes())?;
            w.write_all(t.as_bytes())?;
            for x in self.row(i) {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary(r: &mut impl Read) -> Result<Self, EmbedError> {
        let io = |e: std::io::Error| EmbedError::Format(e.to_string());
        let mut u32buf = [0u8; 4];
        let mut next_u32 = |r: &mut dyn Read| -> Result<u32, EmbedError> {
            r.read_exact(&mut u32buf).map_err(io)?;
            Ok(u32::from_le_bytes(u32buf))
        };
        let dim = next_u32(r)? as usize;
        let n = next_u32(r)? as usize;
        let mut tokens = Vec::with_capacity(n.min(1 << 20));
        let mut vectors = Vec::with_capacity((n * dim).min(1 << 24));
        for _ in 0..n {
            let len = next_u32(r)? as usize;
            let mut bytes = vec![0u8; len];
            r.read_exact(&mut bytes).map_err(io)?;
            tokens.push(String::from_utf8(bytes).map_err(|e| EmbedError::Format(e.to_string()))?);
            for _ in 0..dim {
                let mut b = [0u8; 4];
                r.read_exact(&mut b).map_err(io)?;
                vectors.push(f32::from_le_bytes(b));
            }
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest).map_err(io)? != 0 {
            return Err(EmbedError::Format("trailing bytes".into()));
        }
        EmbeddingTable::new(dim, tokens, vectors)
    }

    /// Header line `{"dim", "vocab_size"}` then one `{"token", "vector"}` per line.
    pub fn write_jsonl(&self, w: &mut impl Write) -> std::io::Result<()> {
        serde_json::to_writer(&mut *w, &JsonHeader { dim: self.dim, vocab_size: self.len() })?;
        writeln!(w)?;
        for (i, t) in self.tokens.iter().enumerate() {
            serde_json::to_writer(&mut *w, &JsonRow { token: t.clone(), vector: self.row(i).to_vec() })?;
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_jsonl(r: impl BufRead) -> Result<Self, EmbedError> {
        let fmt = |e: &dyn std::fmt::Display| EmbedError::Format(e.to_string());
        let mut lines = r.lines();
        let head: JsonHeader = match lines.next() {
            Some(l) => serde_json::from_str(&l.map_err(|e| fmt(&e))?).map_err(|e| fmt(&e))?,
            None => return Err(EmbedError::Format("empty file".into())),
        };
        let mut tokens = Vec::new();
        let mut vectors = Vec::new();
        for l in lines {
            let l = l.map_err(|e| fmt(&e))?;
            if l.trim().is_empty() {
                continue;
            }
            let row: JsonRow = serde_json::from_str(&l).map_err(|e| fmt(&e))?;
            if row.vector.len() != head.dim {
                return Err(EmbedError::Format(format!("vector of {} for dim {}", row.vector.len(), head.dim)));
            }
            tokens.push(row.token);
            vectors.extend(row.vector);
        }
        if tokens.len() != head.vocab_size {
            return Err(EmbedError::Format(format!("{} rows for vocab_size {}", tokens.len(), head.vocab_size)));
        }
        EmbeddingTable::new(head.dim, tokens, vectors)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Pooled {
    pub vector: Vec<f32>,
    pub used: usize,
    pub oov: usize,
}

/// Mean of the vectors of in-vocabulary tokens. Rows are summed in table
/// order, so the result does not depend on the order of `tokens`.
pub fn mean_pool<S: AsRef<str>>(tokens: &[S], table: &EmbeddingTable) -> Result<Pooled, EmbedError> {
    let mut rows: Vec<usize> = Vec::with_capacity(tokens.len());
    let mut oov = 0;
    for t in tokens {
        match table.index_of(t.as_ref()) {
            Some(i) => rows.push(i),
            None => oov += 1,
        }
    }
    if rows.is_empty() {
        return Err(EmbedError::AllOOV);
    }
    rows.sort_unstable();
    let mut acc = vec![0.0f64; table.dim()];
    for &i in &rows {
        for (a, x) in acc.iter_mut().zip(table.row(i)) {
            *a += *x as f64;
        }
    }
    let n = rows.len() as f64;
    Ok(Pooled { vector: acc.into_iter().map(|a| (a / n) as f32).collect(), used: rows.len(), oov })
}
