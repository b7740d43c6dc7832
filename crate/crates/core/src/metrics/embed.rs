use super::rationale::tfidf_tokens;
use super::MetricError;
use crate::util::fnv1a64;

pub type EmbedError = Box<dyn std::error::Error + Send + Sync>;

/// Text to fixed-length vector.
pub trait EmbeddingProvider {
    fn embed(&self, text: &str) -> Result<Vec<f64>, EmbedError>;

    /// Whether `embed` may be called from several threads at once. Callers
    /// serialize access to providers that return false.
    fn supports_concurrent(&self) -> bool {
        true
    }
}

/// Bag-of-words embedder: each token adds 1 to bucket `fnv1a64(token) % dim`.
#[derive(Debug, Clone, Copy)]
pub struct HashingEmbedder {
    pub dim: usize,
}

impl Default for HashingEmbedder {
    fn default() -> Self {
        HashingEmbedder { dim: 256 }
    }
}

impl EmbeddingProvider for HashingEmbedder {
    fn embed(&self, text: &str) -> Result<Vec<f64>, EmbedError> {
        if self.dim == 0 {
            return Err("hashing embedder needs dim > 0".into());
        }
        let mut v = vec![0.0; self.dim];
        for t in tfidf_tokens(text) {
            v[(fnv1a64(t.as_bytes()) % self.dim as u64) as usize] += 1.0;
        }
        Ok(v)
    }
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

pub fn semantic_similarity(
    rationale: &str,
    cm_spans: &[String],
    si_spans: &[String],
    embedder: &dyn EmbeddingProvider,
) -> Result<f64, MetricError> {
    let spans = cm_spans
        .iter()
        .chain(si_spans)
        .map(String::as_str)
        .collect::<Vec<_>>()
        .join(" ");
    let embed = |what: &str, text: &str| {
        embedder.embed(text).map_err(|source| MetricError::EmbedderFailure {
            context: what.to_string(),
            source,
        })
    };
    let a = embed("spans", &spans)?;
    let b = embed("rationale", rationale)?;
    if a.len() != b.len() {
        return Err(MetricError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(cosine(&a, &b))
}
