use crate::Result;

pub const DEFAULT_EMBEDDING_DIM: usize = 256;

pub trait Embedder: Send + Sync {
    /// One fixed-dimension vector per input text.
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>>;
}

/// Local embedding backend: hashed bag-of-words term frequencies, L2-normalized.
///
/// Words are lowercase alphanumeric runs, hashed with 64-bit FNV-1a into `dim` buckets.
/// Deterministic across runs and platforms; never fails.
#[derive(Debug, Clone, Copy)]
pub struct HashedBagOfWords {
    dim: usize,
}

impl Default for HashedBagOfWords {
    fn default() -> Self {
        HashedBagOfWords {
            dim: DEFAULT_EMBEDDING_DIM,
        }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

impl HashedBagOfWords {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        HashedBagOfWords { dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bucket(&self, word: &str) -> usize {
        (fnv1a(word.as_bytes()) % self.dim as u64) as usize
    }

    pub fn embed_one(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        let lowered = text.to_lowercase();
        for word in lowered
            .split(|c: char| !c.is_alphanumeric())
            .filter(|w| !w.is_empty())
        {
            v[self.bucket(word)] += 1.0;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}

impl Embedder for HashedBagOfWords {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>> {
        if texts.is_empty() {
            return Err(crate::LlmError::InvalidRequest("no texts to embed".into()));
        }
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}
