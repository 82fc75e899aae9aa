//! Similarity graphs: the flat sentence graph used by the baseline
//! summarizer and the temporal alignment event graph (TAEG).
//!
//! TAEG nodes are event versions, i.e. the sentences one document
//! contributes to one canonical event. Directed BEFORE edges chain
//! consecutive versions within a document; undirected SAME_EVENT edges
//! connect all versions of one event into a clique, weighted by the cosine
//! of their TF-IDF vectors with a small floor that keeps cliques connected
//! even for lexically disjoint retellings.

use std::collections::HashMap;

use thiserror::Error;

use crate::corpus::{Alignment, Document, EventIndex, Sentence, SentenceId, Timeline};
use crate::textproc::{cosine, tokenize, vectorize, SparseVector, TokenList, VectorSpace};

/// Minimum SAME_EVENT edge weight.
pub const SAME_EVENT_FLOOR: f64 = 0.05;

/// Errors from graph construction.
#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("corpus contains no sentences")]
    EmptyCorpus,
    #[error("timeline contains no events")]
    EmptyTimeline,
    #[error("alignment produced no event versions")]
    NoVersions,
    #[error("similarity threshold {0} is outside [0, 1)")]
    InvalidThreshold(f64),
}

/// Undirected sentence similarity graph over one corpus. Node ids are the
/// global sentence ids; edges keep cosine weights at or above the threshold.
#[derive(Debug, Clone)]
pub struct SemanticGraph {
    node_count: usize,
    threshold: f64,
    edges: Vec<(usize, usize, f64)>,
}

impl SemanticGraph {
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Edges as (i, j, weight) with i < j, each undirected pair stored once.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn degree(&self, node: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b, _)| a == node || b == node)
            .count()
    }
}

/// Builds the baseline sentence graph: an edge wherever the cosine of two
/// sentence vectors is positive and at least `threshold`.
pub fn build_semantic_graph(
    docs: &[Document],
    space: &VectorSpace,
    threshold: f64,
) -> Result<SemanticGraph, GraphError> {
    if !(0.0..1.0).contains(&threshold) {
        return Err(GraphError::InvalidThreshold(threshold));
    }
    let vectors: Vec<SparseVector> = docs
        .iter()
        .flat_map(|d| d.sentences.iter())
        .map(|s| vectorize(&tokenize(&s.text), space))
        .collect();
    if vectors.is_empty() {
        return Err(GraphError::EmptyCorpus);
    }
    let mut edges = Vec::new();
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            let c = cosine(&vectors[i], &vectors[j]);
            if c > 0.0 && c >= threshold {
                edges.push((i, j, c));
            }
        }
    }
    Ok(SemanticGraph {
        node_count: vectors.len(),
        threshold,
        edges,
    })
}

/// One document's retelling of one canonical event.
#[derive(Debug, Clone)]
pub struct EventVersionNode {
    pub id: usize,
    pub event: EventIndex,
    pub doc_id: String,
    /// Sentence ids in document order.
    pub sentence_ids: Vec<SentenceId>,
    /// The version's sentences joined by single spaces.
    pub text: String,
    pub vector: SparseVector,
}

/// The temporal alignment event graph.
///
/// Nodes are ordered by (timeline position, document declaration order), so
/// ids are deterministic for a given corpus and timeline.
#[derive(Debug, Clone)]
pub struct Taeg {
    pub nodes: Vec<EventVersionNode>,
    /// Directed (earlier, later) pairs chaining a document's versions in
    /// timeline order, weight 1.0 by convention.
    pub before_edges: Vec<(usize, usize)>,
    /// Undirected within-event clique edges with floored cosine weights.
    pub same_event_edges: Vec<(usize, usize, f64)>,
}

impl Taeg {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Node ids belonging to one event.
    pub fn nodes_of_event(&self, event: EventIndex) -> Vec<usize> {
        self.nodes
            .iter()
            .filter(|n| n.event == event)
            .map(|n| n.id)
            .collect()
    }
}

fn sentence_table(docs: &[Document]) -> Vec<&Sentence> {
    docs.iter().flat_map(|d| d.sentences.iter()).collect()
}

fn version_text(table: &[&Sentence], ids: &[SentenceId]) -> String {
    let texts: Vec<&str> = ids.iter().map(|id| table[id.0].text.as_str()).collect();
    texts.join(" ")
}

/// Token lists of every event version, for fitting the TAEG vector space.
/// Versions are enumerated in (event, document id) order.
pub fn version_token_units(docs: &[Document], alignment: &Alignment) -> Vec<TokenList> {
    let table = sentence_table(docs);
    alignment
        .event_versions
        .values()
        .map(|ids| tokenize(&version_text(&table, ids)))
        .collect()
}

/// Builds the TAEG for an aligned corpus.
pub fn build_taeg(
    docs: &[Document],
    timeline: &Timeline,
    alignment: &Alignment,
    space: &VectorSpace,
) -> Result<Taeg, GraphError> {
    if timeline.is_empty() {
        return Err(GraphError::EmptyTimeline);
    }
    let table = sentence_table(docs);
    let mut nodes = Vec::new();
    for event in &timeline.events {
        for doc in docs {
            let Some(ids) = alignment.event_versions.get(&(event.index, doc.id.clone())) else {
                continue;
            };
            let text = version_text(&table, ids);
            let vector = vectorize(&tokenize(&text), space);
            nodes.push(EventVersionNode {
                id: nodes.len(),
                event: event.index,
                doc_id: doc.id.clone(),
                sentence_ids: ids.clone(),
                text,
                vector,
            });
        }
    }
    if nodes.is_empty() {
        return Err(GraphError::NoVersions);
    }

    // Versions of one document already appear in timeline order, so a
    // document's BEFORE chain is just its nodes taken consecutively.
    let mut per_doc: HashMap<&str, Vec<usize>> = HashMap::new();
    for node in &nodes {
        per_doc.entry(node.doc_id.as_str()).or_default().push(node.id);
    }
    let mut before_edges = Vec::new();
    for doc in docs {
        if let Some(chain) = per_doc.get(doc.id.as_str()) {
            before_edges.extend(chain.windows(2).map(|w| (w[0], w[1])));
        }
    }

    let mut per_event: HashMap<EventIndex, Vec<usize>> = HashMap::new();
    for node in &nodes {
        per_event.entry(node.event).or_default().push(node.id);
    }
    let mut same_event_edges = Vec::new();
    for event in &timeline.events {
        let Some(ids) = per_event.get(&event.index) else {
            continue;
        };
        for (k, &a) in ids.iter().enumerate() {
            for &b in &ids[k + 1..] {
                let w = cosine(&nodes[a].vector, &nodes[b].vector).max(SAME_EVENT_FLOOR);
                same_event_edges.push((a, b, w));
            }
        }
    }

    Ok(Taeg {
        nodes,
        before_edges,
        same_event_edges,
    })
}
