//! Deterministic hashing embedder and cosine similarity.

use std::collections::BTreeMap;

use super::text::tokenize;
use super::CorpusError;

/// Embedding dimensionality.
pub const EMBED_DIM: usize = 768;

/// Default seed for the bundled embedder.
pub const DEFAULT_EMBED_SEED: u64 = 0x6970_7636_6363;

/// A unit-norm embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector(pub Vec<f32>);

impl EmbeddingVector {
    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn norm(&self) -> f32 {
        self.0.iter().map(|x| x * x).sum::<f32>().sqrt()
    }
}

/// Anything that turns text into a fixed-dimension embedding. The trait is
/// the seam where an external embedding provider can replace the bundled
/// hashing embedder.
pub trait Embedder: Send + Sync {
    fn embed(&self, text: &str) -> EmbeddingVector;
    fn dim(&self) -> usize {
        EMBED_DIM
    }
}

/// Seeded feature-hashing bag-of-tokens embedder with sublinear term
/// weighting, L2-normalized. Identical input produces identical output in
/// every process: the hash is fixed, not the platform default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HashEmbedder {
    pub seed: u64,
}

impl Default for HashEmbedder {
    fn default() -> Self {
        HashEmbedder { seed: DEFAULT_EMBED_SEED }
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x100_0000_01b3;

fn fnv1a(seed: u64, bytes: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET ^ seed;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

impl Embedder for HashEmbedder {
    fn embed(&self, text: &str) -> EmbeddingVector {
        let mut counts: BTreeMap<String, u32> = BTreeMap::new();
        for token in tokenize(text) {
            *counts.entry(token).or_default() += 1;
        }
        let mut components = vec![0.0f32; EMBED_DIM];
        if counts.is_empty() {
            components[0] = 1.0;
            return EmbeddingVector(components);
        }
        for (token, tf) in counts {
            let hash = fnv1a(self.seed, token.as_bytes());
            let bin = (hash % EMBED_DIM as u64) as usize;
            let sign = if hash >> 63 == 0 { 1.0 } else { -1.0 };
            let weight = 1.0 + (tf as f32).ln();
            components[bin] += sign * weight;
        }
        let norm = components.iter().map(|x| x * x).sum::<f32>().sqrt();
        if norm > 0.0 {
            for c in &mut components {
                *c /= norm;
            }
        } else {
            components[0] = 1.0;
        }
        EmbeddingVector(components)
    }
}

/// Cosine similarity of two vectors; zero vectors have no direction.
pub fn cosine_similarity(a: &[f32], b: &[f32]) -> Result<f32, CorpusError> {
    if a.len() != b.len() {
        return Err(CorpusError::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for (x, y) in a.iter().zip(b) {
        dot += f64::from(*x) * f64::from(*y);
        na += f64::from(*x) * f64::from(*x);
        nb += f64::from(*y) * f64::from(*y);
    }
    if na == 0.0 || nb == 0.0 {
        return Err(CorpusError::UndefinedSimilarity);
    }
    Ok((dot / (na.sqrt() * nb.sqrt())) as f32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embeddings_are_unit_norm() {
        let embedder = HashEmbedder::default();
        let mut state = 0x9E3779B97F4A7C15u64;
        for i in 0..100 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let text = format!("token{} field{} value{}", state % 97, state % 31, i);
            let v = embedder.embed(&text);
            assert!((v.norm() - 1.0).abs() < 1e-6, "norm {} for {text:?}", v.norm());
            assert_eq!(v.as_slice().len(), EMBED_DIM);
        }
    }

    #[test]
    fn self_similarity_is_one() {
        let embedder = HashEmbedder::default();
        let v = embedder.embed("hop limit must be in range");
        assert!((cosine_similarity(v.as_slice(), v.as_slice()).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn embedding_is_deterministic() {
        let a = HashEmbedder::default().embed("payload length exceeds the frame");
        let b = HashEmbedder::default().embed("payload length exceeds the frame");
        assert_eq!(a, b);
    }

    #[test]
    fn token_overlap_orders_similarity() {
        let embedder = HashEmbedder::default();
        let base = embedder.embed("hop limit must be in range");
        let near = embedder.embed("hop limit range");
        let far = embedder.embed("checksum polynomial");
        let sim_near = cosine_similarity(base.as_slice(), near.as_slice()).unwrap();
        let sim_far = cosine_similarity(base.as_slice(), far.as_slice()).unwrap();
        assert!(sim_near > sim_far, "{sim_near} vs {sim_far}");
    }

    #[test]
    fn cosine_reference_points() {
        let e1 = [1.0f32, 0.0, 0.0];
        let e2 = [0.0f32, 1.0, 0.0];
        let neg = [-1.0f32, 0.0, 0.0];
        assert!((cosine_similarity(&e1, &e1).unwrap() - 1.0).abs() < 1e-7);
        assert!(cosine_similarity(&e1, &e2).unwrap().abs() < 1e-7);
        assert!((cosine_similarity(&e1, &neg).unwrap() + 1.0).abs() < 1e-7);
    }

    #[test]
    fn zero_vector_similarity_is_an_error() {
        let z = [0.0f32; 3];
        let e = [1.0f32, 0.0, 0.0];
        assert!(matches!(
            cosine_similarity(&z, &e),
            Err(CorpusError::UndefinedSimilarity)
        ));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = [1.0f32; 3];
        let b = [1.0f32; 4];
        assert!(matches!(
            cosine_similarity(&a, &b),
            Err(CorpusError::DimensionMismatch { .. })
        ));
    }
}
