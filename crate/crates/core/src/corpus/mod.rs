//! Standards-text store: chunking, embeddings, HNSW retrieval, and
//! document-grouped section reconstruction.

mod embed;
mod hnsw;
mod store;
mod text;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use embed::{cosine_similarity, Embedder, EmbeddingVector, HashEmbedder, DEFAULT_EMBED_SEED, EMBED_DIM};
pub use hnsw::{HnswIndex, HnswParams};
pub use store::{CorpusStore, StoreBuilder};
pub use text::{chunk_document, preprocess, token_count, tokenize};

/// Default retrieval fan-out.
pub const DEFAULT_TOP_K: usize = 50;
/// Default similarity threshold for retrieval filtering.
pub const DEFAULT_TAU: f32 = 0.60;
/// Default chunk budget in tokens.
pub const DEFAULT_MAX_TOKENS: usize = 512;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("vector dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cosine similarity is undefined for a zero vector")]
    UndefinedSimilarity,
    #[error("store has no chunks")]
    EmptyStore,
    #[error("store directory is missing {0}")]
    MissingFile(String),
    #[error("corrupt store file {file}: {message}")]
    Corrupt { file: String, message: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// One contiguous piece of a document, at most `max_tokens` tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub doc_name: String,
    /// Position within the source document.
    pub ordinal: usize,
    pub text: String,
    pub token_count: usize,
}

/// Retrieved chunks of one document, re-joined in ordinal order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructedSection {
    pub doc_name: String,
    pub text: String,
    /// Ordinals of the retained chunks, strictly increasing.
    pub chunk_ids: Vec<usize>,
    pub best_similarity: f32,
}
