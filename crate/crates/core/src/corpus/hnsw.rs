//! Layered proximity graph for approximate nearest-neighbor search under
//! cosine distance.
//!
//! Nodes are inserted at a geometrically distributed top layer
//! (normalization `1/ln(M)`); upper layers give long-range hops, layer 0
//! holds the dense neighborhood graph. Queries greedily descend the layers
//! and run a best-first beam of width `ef_search` at layer 0.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use super::CorpusError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HnswParams {
    pub m: usize,
    pub ef_construction: usize,
    pub ef_search: usize,
}

impl Default for HnswParams {
    fn default() -> Self {
        HnswParams { m: 16, ef_construction: 200, ef_search: 100 }
    }
}

/// Distance ordered with a node tie-break so heap behavior is deterministic.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Scored {
    dist: f32,
    node: u32,
}

impl Eq for Scored {}

impl Ord for Scored {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then_with(|| self.node.cmp(&other.node))
    }
}

impl PartialOrd for Scored {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone)]
pub struct HnswIndex {
    pub params: HnswParams,
    pub(super) dim: usize,
    /// External ids, indexed by internal node index.
    pub(super) ids: Vec<usize>,
    pub(super) vectors: Vec<Vec<f32>>,
    pub(super) norms: Vec<f32>,
    /// links[node][layer] = neighbor node indices; a node present at layer
    /// `l` has link lists for all layers `<= l`.
    pub(super) links: Vec<Vec<Vec<u32>>>,
    pub(super) entry: Option<u32>,
    pub(super) max_layer: usize,
}

impl HnswIndex {
    pub fn new(dim: usize, params: HnswParams) -> Self {
        HnswIndex {
            params,
            dim,
            ids: Vec::new(),
            vectors: Vec::new(),
            norms: Vec::new(),
            links: Vec::new(),
            entry: None,
            max_layer: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn distance_to(&self, query: &[f32], query_norm: f32, node: u32) -> f32 {
        let v = &self.vectors[node as usize];
        let mut dot = 0.0f32;
        for (a, b) in query.iter().zip(v) {
            dot += a * b;
        }
        let denom = query_norm * self.norms[node as usize];
        if denom == 0.0 {
            return 1.0;
        }
        1.0 - dot / denom
    }

    fn max_links(&self, layer: usize) -> usize {
        if layer == 0 {
            self.params.m * 2
        } else {
            self.params.m
        }
    }

    /// Best-first beam search within one layer; ascending by distance.
    fn search_layer(
        &self,
        query: &[f32],
        query_norm: f32,
        entry: u32,
        layer: usize,
        ef: usize,
    ) -> Vec<Scored> {
        let mut visited = vec![false; self.len()];
        visited[entry as usize] = true;
        let start = Scored { dist: self.distance_to(query, query_norm, entry), node: entry };
        let mut candidates: BinaryHeap<Reverse<Scored>> = BinaryHeap::new();
        let mut results: BinaryHeap<Scored> = BinaryHeap::new();
        candidates.push(Reverse(start));
        results.push(start);

        while let Some(Reverse(current)) = candidates.pop() {
            let worst = results.peek().expect("results non-empty").dist;
            if current.dist > worst && results.len() >= ef {
                break;
            }
            for &neighbor in &self.links[current.node as usize][layer] {
                if visited[neighbor as usize] {
                    continue;
                }
                visited[neighbor as usize] = true;
                let scored =
                    Scored { dist: self.distance_to(query, query_norm, neighbor), node: neighbor };
                let worst = results.peek().expect("results non-empty");
                if results.len() < ef || scored < *worst {
                    candidates.push(Reverse(scored));
                    results.push(scored);
                    if results.len() > ef {
                        results.pop();
                    }
                }
            }
        }
        let mut out = results.into_vec();
        out.sort();
        out
    }

    fn greedy_descend(&self, query: &[f32], query_norm: f32, from_layer: usize, to_layer: usize) -> u32 {
        let mut ep = self.entry.expect("non-empty index");
        let mut layer = from_layer;
        while layer > to_layer {
            ep = self.search_layer(query, query_norm, ep, layer, 1)[0].node;
            layer -= 1;
        }
        ep
    }

    /// Insert a vector under an external id. Layer assignment draws from the
    /// caller's seeded generator so index builds are reproducible.
    pub fn insert(
        &mut self,
        id: usize,
        vector: Vec<f32>,
        rng: &mut ChaCha12Rng,
    ) -> Result<(), CorpusError> {
        if vector.len() != self.dim {
            return Err(CorpusError::DimensionMismatch { expected: self.dim, got: vector.len() });
        }
        let norm = vector.iter().map(|x| x * x).sum::<f32>().sqrt();
        let unit: f64 = 1.0 - rng.gen::<f64>();
        let level = (-unit.ln() * (1.0 / (self.params.m as f64).ln())).floor() as usize;

        let node = self.len() as u32;
        self.ids.push(id);
        self.norms.push(norm);
        self.links.push(vec![Vec::new(); level + 1]);

        let Some(_) = self.entry else {
            self.vectors.push(vector);
            self.entry = Some(node);
            self.max_layer = level;
            return Ok(());
        };

        let query_norm = norm;
        let top = self.max_layer;
        let mut ep = if top > level {
            self.greedy_descend(&vector, query_norm, top, level + 1)
        } else {
            self.entry.expect("non-empty")
        };

        for layer in (0..=level.min(top)).rev() {
            let found =
                self.search_layer(&vector, query_norm, ep, layer, self.params.ef_construction);
            let neighbors: Vec<u32> =
                found.iter().take(self.params.m).map(|s| s.node).collect();
            self.links[node as usize][layer] = neighbors.clone();
            for n in neighbors {
                self.links[n as usize][layer].push(node);
                let cap = self.max_links(layer);
                if self.links[n as usize][layer].len() > cap {
                    self.prune(n, layer, cap, &vector, node);
                }
            }
            ep = found[0].node;
        }

        self.vectors.push(vector);
        if level > self.max_layer {
            self.max_layer = level;
            self.entry = Some(node);
        }
        Ok(())
    }

    /// Keep the `cap` closest links of node `n` at `layer`. The freshly
    /// inserted vector is passed separately because it is not stored yet.
    fn prune(&mut self, n: u32, layer: usize, cap: usize, pending: &[f32], pending_node: u32) {
        let base = self.vectors[n as usize].clone();
        let base_norm = self.norms[n as usize];
        let mut scored: Vec<Scored> = self.links[n as usize][layer]
            .iter()
            .map(|&other| {
                let dist = if other == pending_node {
                    let mut dot = 0.0f32;
                    for (a, b) in base.iter().zip(pending) {
                        dot += a * b;
                    }
                    let pending_norm = pending.iter().map(|x| x * x).sum::<f32>().sqrt();
                    let denom = base_norm * pending_norm;
                    if denom == 0.0 { 1.0 } else { 1.0 - dot / denom }
                } else {
                    self.distance_to(&base, base_norm, other)
                };
                Scored { dist, node: other }
            })
            .collect();
        scored.sort();
        self.links[n as usize][layer] = scored.into_iter().take(cap).map(|s| s.node).collect();
    }

    /// Ranked top-k by descending cosine similarity.
    pub fn query(&self, query: &[f32], k: usize) -> Result<Vec<(usize, f32)>, CorpusError> {
        if query.len() != self.dim {
            return Err(CorpusError::DimensionMismatch { expected: self.dim, got: query.len() });
        }
        if self.is_empty() || k == 0 {
            return Ok(Vec::new());
        }
        let query_norm = query.iter().map(|x| x * x).sum::<f32>().sqrt();
        let ep = self.greedy_descend(query, query_norm, self.max_layer, 0);
        let ef = self.params.ef_search.max(k);
        let found = self.search_layer(query, query_norm, ep, 0, ef);
        Ok(found
            .into_iter()
            .take(k)
            .map(|s| (self.ids[s.node as usize], 1.0 - s.dist))
            .collect())
    }

    /// Exhaustive scan over all stored vectors; the exact reference the
    /// approximate query is measured against.
    pub fn exhaustive_query(&self, query: &[f32], k: usize) -> Result<Vec<(usize, f32)>, CorpusError> {
        if query.len() != self.dim {
            return Err(CorpusError::DimensionMismatch { expected: self.dim, got: query.len() });
        }
        let query_norm = query.iter().map(|x| x * x).sum::<f32>().sqrt();
        let mut scored: Vec<Scored> = (0..self.len() as u32)
            .map(|node| Scored { dist: self.distance_to(query, query_norm, node), node })
            .collect();
        scored.sort();
        Ok(scored
            .into_iter()
            .take(k)
            .map(|s| (self.ids[s.node as usize], 1.0 - s.dist))
            .collect())
    }

    /// Nodes reachable from the entry point over layer-0 links.
    pub fn reachable_from_entry(&self) -> usize {
        let Some(entry) = self.entry else {
            return 0;
        };
        let mut seen = vec![false; self.len()];
        let mut queue = vec![entry];
        seen[entry as usize] = true;
        let mut count = 0;
        while let Some(node) = queue.pop() {
            count += 1;
            for &n in &self.links[node as usize][0] {
                if !seen[n as usize] {
                    seen[n as usize] = true;
                    queue.push(n);
                }
            }
        }
        count
    }

    /// Top layer of each node, aligned with internal node order.
    pub fn node_layers(&self) -> Vec<usize> {
        self.links.iter().map(|l| l.len() - 1).collect()
    }
}
