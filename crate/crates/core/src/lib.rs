//! Narrative consolidation over multi-perspective corpora.
//!
//! The library turns several documents that retell the same underlying story
//! into one chronologically ordered narrative. A canonical timeline of events
//! anchors the ordering; per-document retellings of each event become nodes of
//! a temporal alignment event graph (TAEG), LexRank centrality scores the
//! competing versions, and the consolidated narrative keeps the best version
//! of every event in timeline order.
//!
//! Module map:
//!
//! * [`corpus`]: document/timeline loading and sentence-to-event alignment
//! * [`textproc`]: tokenization, Porter stemming, TF-IDF vector spaces
//! * [`graph`]: semantic sentence graphs and the TAEG itself
//! * [`centrality`]: damped power iteration (LexRank / PageRank)
//! * [`consolidate`]: narrative assembly from scored graphs
//! * [`eval`]: ROUGE, METEOR, and Kendall's tau against a reference
//! * [`synth`]: seeded synthetic corpus generation and timeline degradation

pub mod centrality;
pub mod consolidate;
pub mod corpus;
pub mod eval;
pub mod graph;
pub mod synth;
pub mod textproc;
