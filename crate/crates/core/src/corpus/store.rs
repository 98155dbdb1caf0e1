//! Sealed corpus store: build once, query concurrently, persist to a
//! self-contained directory.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use super::embed::{Embedder, HashEmbedder};
use super::hnsw::{HnswIndex, HnswParams};
use super::text::chunk_document;
use super::{Chunk, CorpusError, ReconstructedSection, DEFAULT_MAX_TOKENS};
use crate::oracle::ViolationKind;

/// Phrases that mark a document as covering a violation topic. Tagging is
/// deliberately generous: an over-tagged section only widens the fields an
/// oracle-grounded agent may judge, all of which stay truth-grounded.
const TOPIC_KEYWORDS: [(ViolationKind, &[&str]); 11] = [
    (ViolationKind::Version, &["version field", "ipv6 version"]),
    (ViolationKind::LengthField, &["payload length", "udp length", "jumbogram"]),
    (
        ViolationKind::AddressFormat,
        &["colon-hexadecimal", "address notation", "16-bit groups"],
    ),
    (ViolationKind::HopLimit, &["hop limit"]),
    (
        ViolationKind::TransportOverlap,
        &["one transport header group", "transport overlap", "simultaneously populate"],
    ),
    (ViolationKind::FlowLabel, &["flow label", "flowlabel"]),
    (ViolationKind::Dscp, &["dscp", "differentiated services"]),
    (ViolationKind::Ecn, &["ecn", "congestion notification"]),
    (
        ViolationKind::ProtocolMismatch,
        &["declared transport", "protocol mismatch", "match the populated"],
    ),
    (ViolationKind::NextHeader, &["next header"]),
    (ViolationKind::Icmpv6Code, &["icmpv6 type", "icmpv6 code", "icmpv6 message"]),
];

/// Violation topics a document's text covers, by keyword scan.
pub fn tag_topics(text: &str) -> BTreeSet<ViolationKind> {
    let lower = text.to_lowercase();
    TOPIC_KEYWORDS
        .iter()
        .filter(|(_, phrases)| phrases.iter().any(|p| lower.contains(p)))
        .map(|(kind, _)| *kind)
        .collect()
}

/// Accumulates documents before the index is built. Queries are only
/// possible on the sealed [`CorpusStore`].
#[derive(Debug, Clone)]
pub struct StoreBuilder {
    seed: u64,
    params: HnswParams,
    embedder: HashEmbedder,
    max_tokens: usize,
    chunks: Vec<Chunk>,
    doc_topics: BTreeMap<String, BTreeSet<ViolationKind>>,
}

impl StoreBuilder {
    pub fn new(seed: u64) -> Self {
        StoreBuilder {
            seed,
            params: HnswParams::default(),
            embedder: HashEmbedder::default(),
            max_tokens: DEFAULT_MAX_TOKENS,
            chunks: Vec::new(),
            doc_topics: BTreeMap::new(),
        }
    }

    pub fn with_params(mut self, params: HnswParams) -> Self {
        self.params = params;
        self
    }

    pub fn with_max_tokens(mut self, max_tokens: usize) -> Self {
        self.max_tokens = max_tokens;
        self
    }

    /// Chunk and stage one document; returns how many chunks it produced.
    pub fn add_document(&mut self, doc_name: &str, text: &str) -> usize {
        let chunks = chunk_document(doc_name, text, self.max_tokens);
        let n = chunks.len();
        if n > 0 {
            self.doc_topics.insert(doc_name.to_string(), tag_topics(text));
            self.chunks.extend(chunks);
        }
        n
    }

    /// Ingest every `.txt` file of a directory (sorted by name); the file
    /// stem becomes the document name.
    pub fn ingest_dir(&mut self, dir: &Path) -> Result<usize, CorpusError> {
        let mut paths: Vec<_> = fs::read_dir(dir)?
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .map(|e| e.path())
            .filter(|p| p.extension().map(|e| e == "txt").unwrap_or(false))
            .collect();
        paths.sort();
        let mut total = 0;
        for path in paths {
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().to_string())
                .unwrap_or_default();
            let text = fs::read_to_string(&path)?;
            total += self.add_document(&name, &text);
        }
        Ok(total)
    }

    /// Embed all chunks, build the index, and seal the store.
    pub fn build(self) -> Result<CorpusStore, CorpusError> {
        if self.chunks.is_empty() {
            return Err(CorpusError::EmptyStore);
        }
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        let mut index = HnswIndex::new(self.embedder.dim(), self.params);
        for (id, chunk) in self.chunks.iter().enumerate() {
            let vector = self.embedder.embed(&chunk.text);
            index.insert(id, vector.0, &mut rng)?;
        }
        Ok(CorpusStore {
            seed: self.seed,
            embedder: self.embedder,
            chunks: self.chunks,
            doc_topics: self.doc_topics,
            index,
        })
    }
}

/// Immutable, query-ready store. Safe to share across threads.
#[derive(Debug, Clone)]
pub struct CorpusStore {
    seed: u64,
    embedder: HashEmbedder,
    chunks: Vec<Chunk>,
    doc_topics: BTreeMap<String, BTreeSet<ViolationKind>>,
    index: HnswIndex,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    dim: usize,
    seed: u64,
    embedder_seed: u64,
    m: usize,
    ef_construction: usize,
    ef_search: usize,
    count: usize,
    entry: Option<u32>,
    max_layer: usize,
    ids: Vec<usize>,
    doc_topics: BTreeMap<String, BTreeSet<ViolationKind>>,
}

impl CorpusStore {
    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    pub fn chunk(&self, id: usize) -> Option<&Chunk> {
        self.chunks.get(id)
    }

    pub fn chunks(&self) -> &[Chunk] {
        &self.chunks
    }

    pub fn index(&self) -> &HnswIndex {
        &self.index
    }

    pub fn embedder(&self) -> &HashEmbedder {
        &self.embedder
    }

    /// Violation topics per document, assigned at ingest.
    pub fn doc_topics(&self) -> &BTreeMap<String, BTreeSet<ViolationKind>> {
        &self.doc_topics
    }

    /// Raw ranked retrieval: top-k chunk ids with similarities.
    pub fn query_chunks(&self, query_text: &str, k: usize) -> Result<Vec<(usize, f32)>, CorpusError> {
        let q = self.embedder.embed(query_text);
        self.index.query(q.as_slice(), k)
    }

    /// Embed the query, take top-k, drop hits below `tau`, group the
    /// survivors by document, and re-join each group in ordinal order.
    /// Sections come back sorted by best similarity, best first.
    pub fn retrieve_sections(
        &self,
        query_text: &str,
        k: usize,
        tau: f32,
    ) -> Result<Vec<ReconstructedSection>, CorpusError> {
        let hits = self.query_chunks(query_text, k)?;
        let mut groups: BTreeMap<&str, Vec<(usize, f32)>> = BTreeMap::new();
        for (id, sim) in hits {
            if sim < tau {
                continue;
            }
            let chunk = &self.chunks[id];
            groups.entry(&chunk.doc_name).or_default().push((id, sim));
        }
        let mut sections: Vec<ReconstructedSection> = groups
            .into_iter()
            .map(|(doc_name, mut members)| {
                members.sort_by_key(|(id, _)| self.chunks[*id].ordinal);
                let text = members
                    .iter()
                    .map(|(id, _)| self.chunks[*id].text.as_str())
                    .collect::<Vec<_>>()
                    .join(" ");
                let chunk_ids = members.iter().map(|(id, _)| self.chunks[*id].ordinal).collect();
                let best_similarity =
                    members.iter().map(|(_, s)| *s).fold(f32::NEG_INFINITY, f32::max);
                ReconstructedSection {
                    doc_name: doc_name.to_string(),
                    text,
                    chunk_ids,
                    best_similarity,
                }
            })
            .collect();
        sections.sort_by(|a, b| {
            b.best_similarity
                .total_cmp(&a.best_similarity)
                .then_with(|| a.doc_name.cmp(&b.doc_name))
        });
        Ok(sections)
    }

    /// Persist to a directory: manifest, vectors (little-endian f32,
    /// row-major), adjacency, and chunks (JSON Lines).
    pub fn save(&self, dir: &Path) -> Result<(), CorpusError> {
        fs::create_dir_all(dir)?;
        let manifest = Manifest {
            dim: self.index.dim(),
            seed: self.seed,
            embedder_seed: self.embedder.seed,
            m: self.index.params.m,
            ef_construction: self.index.params.ef_construction,
            ef_search: self.index.params.ef_search,
            count: self.chunks.len(),
            entry: self.index.entry,
            max_layer: self.index.max_layer,
            ids: self.index.ids.clone(),
            doc_topics: self.doc_topics.clone(),
        };
        let mut manifest_json =
            serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        manifest_json.push('\n');
        fs::write(dir.join("manifest.json"), manifest_json)?;

        let mut vectors = Vec::with_capacity(self.index.vectors.len() * self.index.dim() * 4);
        for row in &self.index.vectors {
            for value in row {
                vectors.extend_from_slice(&value.to_le_bytes());
            }
        }
        fs::write(dir.join("vectors.bin"), vectors)?;

        let mut graph = serde_json::to_string(&self.index.links).expect("links serialize");
        graph.push('\n');
        fs::write(dir.join("graph.json"), graph)?;

        let mut chunks = String::new();
        for chunk in &self.chunks {
            chunks.push_str(&serde_json::to_string(chunk).expect("chunk serializes"));
            chunks.push('\n');
        }
        fs::write(dir.join("chunks.jsonl"), chunks)?;
        Ok(())
    }

    /// Load a store persisted by [`CorpusStore::save`].
    pub fn load(dir: &Path) -> Result<CorpusStore, CorpusError> {
        let read = |name: &str| -> Result<Vec<u8>, CorpusError> {
            fs::read(dir.join(name)).map_err(|_| CorpusError::MissingFile(name.to_string()))
        };
        let manifest: Manifest = serde_json::from_slice(&read("manifest.json")?)
            .map_err(|e| CorpusError::Corrupt { file: "manifest.json".into(), message: e.to_string() })?;
        let links: Vec<Vec<Vec<u32>>> = serde_json::from_slice(&read("graph.json")?)
            .map_err(|e| CorpusError::Corrupt { file: "graph.json".into(), message: e.to_string() })?;

        let raw = read("vectors.bin")?;
        let expected = manifest.count * manifest.dim * 4;
        if raw.len() != expected {
            return Err(CorpusError::Corrupt {
                file: "vectors.bin".into(),
                message: format!("expected {expected} bytes, found {}", raw.len()),
            });
        }
        let mut vectors = Vec::with_capacity(manifest.count);
        let mut norms = Vec::with_capacity(manifest.count);
        for row in raw.chunks_exact(manifest.dim * 4) {
            let v: Vec<f32> = row
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                .collect();
            norms.push(v.iter().map(|x| x * x).sum::<f32>().sqrt());
            vectors.push(v);
        }

        let mut chunks = Vec::with_capacity(manifest.count);
        let chunk_text = String::from_utf8_lossy(&read("chunks.jsonl")?).to_string();
        for line in chunk_text.lines().filter(|l| !l.trim().is_empty()) {
            let chunk: Chunk = serde_json::from_str(line).map_err(|e| CorpusError::Corrupt {
                file: "chunks.jsonl".into(),
                message: e.to_string(),
            })?;
            chunks.push(chunk);
        }
        if chunks.len() != manifest.count || links.len() != manifest.count {
            return Err(CorpusError::Corrupt {
                file: "manifest.json".into(),
                message: "count disagrees with stored chunks or adjacency".into(),
            });
        }

        let params = HnswParams {
            m: manifest.m,
            ef_construction: manifest.ef_construction,
            ef_search: manifest.ef_search,
        };
        let mut index = HnswIndex::new(manifest.dim, params);
        index.ids = manifest.ids;
        index.vectors = vectors;
        index.norms = norms;
        index.links = links;
        index.entry = manifest.entry;
        index.max_layer = manifest.max_layer;

        Ok(CorpusStore {
            seed: manifest.seed,
            embedder: HashEmbedder { seed: manifest.embedder_seed },
            chunks,
            doc_topics: manifest.doc_topics,
            index,
        })
    }
}
