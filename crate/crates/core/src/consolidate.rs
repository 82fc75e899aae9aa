//! Narrative assembly: timeline-ordered selection over the TAEG, plus the
//! flat sentence-graph summarizer used as a baseline for comparison.
//!
//! Both paths produce a [`Narrative`] of [`Segment`]s. The TAEG path picks,
//! for each canonical event in timeline order, the version with the highest
//! centrality score, so its segment event indices are strictly increasing by
//! construction. The baseline path ranks raw sentences on a cosine graph and
//! keeps the top k, with no ordering guarantee at all.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::centrality::{
    lexrank, taeg_scores, to_stochastic, CentralityError, CentralityScores, LexrankScope,
    PowerIterationConfig,
};
use crate::corpus::{Alignment, Document, EventIndex, SentenceId, Timeline};
use crate::graph::{
    build_semantic_graph, build_taeg, version_token_units, GraphError, SemanticGraph, Taeg,
};
use crate::textproc::{fit_space, tokenize, TokenList};

/// Errors surfaced while assembling a narrative or baseline summary.
#[derive(Debug, Error)]
pub enum ConsolidateError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Centrality(#[from] CentralityError),
    #[error("scores cover {got} nodes but the graph has {expected}")]
    MissingScore { expected: usize, got: usize },
    #[error("k = {k} exceeds the corpus sentence count {sentences}")]
    KTooLarge { k: usize, sentences: usize },
}

/// One unit of narrative output, with provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Segment {
    /// The joined text of `sentence_ids`.
    pub text: String,
    /// The canonical event this segment realizes, when known.
    pub event_index: Option<EventIndex>,
    /// Document the text came from.
    pub doc_id: String,
    /// Global ids of the sentences in this segment, in order.
    pub sentence_ids: Vec<SentenceId>,
    /// Centrality score that won this segment its place.
    pub score: f64,
}

/// Which summarizer produced a narrative, with its full settings. This is
/// the parameters snapshot written to provenance sidecars.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum MethodParams {
    Taeg(ConsolidationConfig),
    Baseline(BaselineConfig),
    /// Text ingested from outside the library, with no known settings.
    External,
}

impl MethodParams {
    pub fn method(&self) -> &'static str {
        match self {
            MethodParams::Taeg(_) => "taeg",
            MethodParams::Baseline(_) => "baseline",
            MethodParams::External => "external",
        }
    }
}

/// An ordered sequence of segments plus the settings that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Narrative {
    pub segments: Vec<Segment>,
    pub params: MethodParams,
}

impl Narrative {
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn method(&self) -> &'static str {
        self.params.method()
    }

    /// The narrative text: segment texts joined by single newlines.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, segment) in self.segments.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str(&segment.text);
        }
        out
    }
}

/// Parameters of the TAEG consolidation path.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct ConsolidationConfig {
    pub power: PowerIterationConfig,
    pub scope: LexrankScope,
}

/// Everything the consolidation run produced, for reporting.
#[derive(Debug)]
pub struct ConsolidationOutcome {
    pub taeg: Taeg,
    pub scores: CentralityScores,
    pub narrative: Narrative,
}

/// Picks one version per event from precomputed scores. Ties go to the
/// higher score, then the lexicographically smaller document id, then the
/// smaller node id. Events with no version are skipped.
pub fn consolidate_taeg(
    taeg: &Taeg,
    timeline: &Timeline,
    scores: &CentralityScores,
    config: &ConsolidationConfig,
) -> Result<Narrative, ConsolidateError> {
    if scores.len() != taeg.node_count() {
        return Err(ConsolidateError::MissingScore {
            expected: taeg.node_count(),
            got: scores.len(),
        });
    }
    let mut segments = Vec::new();
    for event in &timeline.events {
        let winner = taeg
            .nodes_of_event(event.index)
            .into_iter()
            .map(|id| &taeg.nodes[id])
            .min_by(|a, b| {
                scores
                    .score(b.id)
                    .partial_cmp(&scores.score(a.id))
                    .expect("centrality scores are finite")
                    .then_with(|| a.doc_id.cmp(&b.doc_id))
                    .then_with(|| a.id.cmp(&b.id))
            });
        if let Some(node) = winner {
            segments.push(Segment {
                text: node.text.clone(),
                event_index: Some(node.event),
                doc_id: node.doc_id.clone(),
                sentence_ids: node.sentence_ids.clone(),
                score: scores.score(node.id),
            });
        }
    }
    Ok(Narrative {
        segments,
        params: MethodParams::Taeg(*config),
    })
}

/// Full TAEG pipeline: graph construction, centrality, selection.
pub fn run_consolidation(
    documents: &[Document],
    timeline: &Timeline,
    alignment: &Alignment,
    config: &ConsolidationConfig,
) -> Result<ConsolidationOutcome, ConsolidateError> {
    if timeline.is_empty() {
        return Err(GraphError::EmptyTimeline.into());
    }
    let units = version_token_units(documents, alignment);
    let space = fit_space(&units).map_err(|_| GraphError::NoVersions)?;
    let taeg = build_taeg(documents, timeline, alignment, &space)?;
    let scores = taeg_scores(&taeg, &config.power, config.scope)?;
    let narrative = consolidate_taeg(&taeg, timeline, &scores, config)?;
    Ok(ConsolidationOutcome {
        taeg,
        scores,
        narrative,
    })
}

/// How the baseline arranges its selected sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineOrder {
    /// Highest score first.
    #[default]
    ByScore,
    /// Document declaration order, then sentence position.
    BySource,
}

impl fmt::Display for BaselineOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaselineOrder::ByScore => "by-score",
            BaselineOrder::BySource => "by-source",
        })
    }
}

impl FromStr for BaselineOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "by-score" => Ok(BaselineOrder::ByScore),
            "by-source" => Ok(BaselineOrder::BySource),
            other => Err(format!(
                "unknown baseline order `{other}` (expected `by-score` or `by-source`)"
            )),
        }
    }
}

/// Parameters of the baseline summarizer.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BaselineConfig {
    /// Cosine threshold for sentence-graph edges.
    pub threshold: f64,
    /// Number of sentences to keep.
    pub k: usize,
    pub ordering: BaselineOrder,
    pub power: PowerIterationConfig,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            threshold: 0.1,
            k: 750,
            ordering: BaselineOrder::default(),
            power: PowerIterationConfig::default(),
        }
    }
}

/// Everything the baseline run produced, for reporting.
#[derive(Debug)]
pub struct BaselineOutcome {
    pub graph: SemanticGraph,
    pub scores: CentralityScores,
    pub narrative: Narrative,
}

/// Keeps the top `k` sentences by score. `by-score` emits them in
/// descending score order (ties to the earlier sentence); `by-source`
/// emits them in document declaration order, then position. Event indices
/// are filled from the alignment when one is supplied.
pub fn summarize_baseline(
    documents: &[Document],
    graph: &SemanticGraph,
    scores: &CentralityScores,
    alignment: Option<&Alignment>,
    config: &BaselineConfig,
) -> Result<Narrative, ConsolidateError> {
    assert!(config.k >= 1, "k must be positive");
    let sentences: Vec<&crate::corpus::Sentence> =
        documents.iter().flat_map(|d| d.sentences.iter()).collect();
    if scores.len() != sentences.len() || graph.node_count() != sentences.len() {
        return Err(ConsolidateError::MissingScore {
            expected: sentences.len(),
            got: scores.len(),
        });
    }
    if config.k > sentences.len() {
        return Err(ConsolidateError::KTooLarge {
            k: config.k,
            sentences: sentences.len(),
        });
    }

    let mut ranked: Vec<usize> = (0..sentences.len()).collect();
    ranked.sort_by(|&a, &b| {
        scores
            .score(b)
            .partial_cmp(&scores.score(a))
            .expect("centrality scores are finite")
            .then_with(|| a.cmp(&b))
    });
    ranked.truncate(config.k);
    if config.ordering == BaselineOrder::BySource {
        // Global sentence ids already encode (document, position) order.
        ranked.sort_unstable();
    }

    let segments = ranked
        .into_iter()
        .map(|id| {
            let s = sentences[id];
            debug_assert_eq!(s.id.0, id);
            Segment {
                text: s.text.clone(),
                event_index: alignment.and_then(|a| a.event_of(s.id)),
                doc_id: s.doc_id.clone(),
                sentence_ids: vec![s.id],
                score: scores.score(id),
            }
        })
        .collect();
    Ok(Narrative {
        segments,
        params: MethodParams::Baseline(*config),
    })
}

/// Full baseline pipeline: sentence graph, centrality, top-k selection.
pub fn run_baseline(
    documents: &[Document],
    alignment: Option<&Alignment>,
    config: &BaselineConfig,
) -> Result<BaselineOutcome, ConsolidateError> {
    let units: Vec<TokenList> = documents
        .iter()
        .flat_map(|d| d.sentences.iter())
        .map(|s| tokenize(&s.text))
        .collect();
    let space = fit_space(&units).map_err(|_| GraphError::EmptyCorpus)?;
    let graph = build_semantic_graph(documents, &space, config.threshold)?;
    let matrix = to_stochastic(graph.node_count(), graph.edges())?;
    let scores = lexrank(&matrix, &config.power)?;
    let narrative = summarize_baseline(documents, &graph, &scores, alignment, config)?;
    Ok(BaselineOutcome {
        graph,
        scores,
        narrative,
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::corpus::{align, build_documents, timeline_from_json};

    fn doc(
        id: &str,
        sentences: Vec<(&str, &str, &str)>,
    ) -> (String, String, Vec<(String, String, String)>) {
        (
            id.to_string(),
            format!("Book of {id}"),
            sentences
                .into_iter()
                .map(|(t, s, e)| (t.to_string(), s.to_string(), e.to_string()))
                .collect(),
        )
    }

    fn timeline(json: &str) -> Timeline {
        timeline_from_json(json).unwrap()
    }

    fn taeg_of(documents: &[Document], tl: &Timeline, alignment: &Alignment) -> Taeg {
        let units = version_token_units(documents, alignment);
        let space = fit_space(&units).unwrap();
        build_taeg(documents, tl, alignment, &space).unwrap()
    }

    /// Two documents, three events; `beta` skips the middle event.
    fn fixture() -> (Vec<Document>, Timeline, Alignment) {
        let documents = build_documents(vec![
            doc(
                "alpha",
                vec![
                    ("the king rode north", "alpha:1:1", "alpha:1:1"),
                    ("a storm scattered the fleet", "alpha:1:2", "alpha:1:2"),
                    ("the city gates fell at dawn", "alpha:1:3", "alpha:1:3"),
                ],
            ),
            doc(
                "beta",
                vec![
                    ("the king went north with riders", "beta:1:1", "beta:1:1"),
                    ("at dawn the gates of the city fell", "beta:1:2", "beta:1:2"),
                ],
            ),
        ])
        .unwrap();
        let tl = timeline(
            r#"{
              "format_version": 1,
              "events": [
                {"index": 1, "title": "Departure", "spans": {"alpha": {"start": "alpha:1:1", "end": "alpha:1:1"}, "beta": {"start": "beta:1:1", "end": "beta:1:1"}}},
                {"index": 2, "title": "Storm", "spans": {"alpha": {"start": "alpha:1:2", "end": "alpha:1:2"}}},
                {"index": 3, "title": "Siege", "spans": {"alpha": {"start": "alpha:1:3", "end": "alpha:1:3"}, "beta": {"start": "beta:1:2", "end": "beta:1:2"}}}
              ]
            }"#,
        );
        let alignment = align(&documents, &tl).unwrap();
        (documents, tl, alignment)
    }

    #[test]
    fn segments_follow_timeline_order_with_one_per_covered_event() {
        let (documents, tl, alignment) = fixture();
        let outcome = run_consolidation(
            &documents,
            &tl,
            &alignment,
            &ConsolidationConfig::default(),
        )
        .unwrap();
        let narrative = &outcome.narrative;
        assert_eq!(narrative.method(), "taeg");
        let events: Vec<u32> = narrative
            .segments
            .iter()
            .map(|s| s.event_index.unwrap().0)
            .collect();
        assert_eq!(events, vec![1, 2, 3]);
        assert!(events.windows(2).all(|w| w[0] < w[1]));
        // The storm event has a single version, owned by alpha.
        assert_eq!(narrative.segments[1].doc_id, "alpha");
        assert_eq!(narrative.segments[1].text, "a storm scattered the fleet");
        // The winner's score is maximal among its event's versions.
        let e1_ids = outcome.taeg.nodes_of_event(crate::corpus::EventIndex(1));
        let best = narrative.segments[0].score;
        assert!(e1_ids.iter().all(|&id| outcome.scores.score(id) <= best));
    }

    #[test]
    fn selection_takes_the_highest_scoring_version() {
        let (documents, tl, alignment) = fixture();
        let taeg = taeg_of(&documents, &tl, &alignment);
        // Nodes: 0 = (e1, alpha), 1 = (e1, beta), 2 = (e2, alpha),
        // 3 = (e3, alpha), 4 = (e3, beta).
        let scores = CentralityScores::from_scores(vec![0.1, 0.4, 0.2, 0.2, 0.1]);
        let narrative =
            consolidate_taeg(&taeg, &tl, &scores, &ConsolidationConfig::default()).unwrap();
        assert_eq!(narrative.segments[0].doc_id, "beta");
        assert_eq!(narrative.segments[2].doc_id, "alpha");
    }

    #[test]
    fn score_ties_break_toward_the_smaller_document_id() {
        let (documents, tl, alignment) = fixture();
        let taeg = taeg_of(&documents, &tl, &alignment);
        let scores = CentralityScores::from_scores(vec![0.2, 0.2, 0.1, 0.25, 0.25]);
        let narrative =
            consolidate_taeg(&taeg, &tl, &scores, &ConsolidationConfig::default()).unwrap();
        assert_eq!(narrative.segments[0].doc_id, "alpha");
        assert_eq!(narrative.segments[2].doc_id, "alpha");
    }

    #[test]
    fn short_score_vectors_are_rejected() {
        let (documents, tl, alignment) = fixture();
        let taeg = taeg_of(&documents, &tl, &alignment);
        let scores = CentralityScores::from_scores(vec![0.5, 0.5]);
        let err =
            consolidate_taeg(&taeg, &tl, &scores, &ConsolidationConfig::default()).unwrap_err();
        assert!(matches!(
            err,
            ConsolidateError::MissingScore { expected: 5, got: 2 }
        ));
    }

    #[test]
    fn render_joins_segments_with_newlines() {
        let (documents, tl, alignment) = fixture();
        let outcome = run_consolidation(
            &documents,
            &tl,
            &alignment,
            &ConsolidationConfig::default(),
        )
        .unwrap();
        let text = outcome.narrative.render();
        assert_eq!(text.lines().count(), 3);
        assert!(!text.ends_with('\n'));
        let empty = Narrative {
            segments: Vec::new(),
            params: MethodParams::Taeg(ConsolidationConfig::default()),
        };
        assert_eq!(empty.render(), "");
    }

    #[test]
    fn identical_versions_share_their_event_score() {
        // Both documents phrase every event identically, so within each
        // event the two versions are exchangeable and must score equally.
        let documents = build_documents(vec![
            doc(
                "alpha",
                vec![
                    ("fire on the mountain", "alpha:1:1", "alpha:1:1"),
                    ("rain in the valley", "alpha:1:2", "alpha:1:2"),
                ],
            ),
            doc(
                "beta",
                vec![
                    ("fire on the mountain", "beta:1:1", "beta:1:1"),
                    ("rain in the valley", "beta:1:2", "beta:1:2"),
                ],
            ),
        ])
        .unwrap();
        let tl = timeline(
            r#"{
              "format_version": 1,
              "events": [
                {"index": 1, "title": "Fire", "spans": {"alpha": {"start": "alpha:1:1", "end": "alpha:1:1"}, "beta": {"start": "beta:1:1", "end": "beta:1:1"}}},
                {"index": 2, "title": "Rain", "spans": {"alpha": {"start": "alpha:1:2", "end": "alpha:1:2"}, "beta": {"start": "beta:1:2", "end": "beta:1:2"}}}
              ]
            }"#,
        );
        let alignment = align(&documents, &tl).unwrap();
        let taeg = taeg_of(&documents, &tl, &alignment);
        for scope in [LexrankScope::Global, LexrankScope::PerEvent] {
            let scores = taeg_scores(&taeg, &PowerIterationConfig::default(), scope).unwrap();
            let total: f64 = scores.as_slice().iter().sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
            // Versions of the same event are symmetric under relabeling.
            assert_abs_diff_eq!(scores.score(0), scores.score(1), epsilon = 1e-9);
            assert_abs_diff_eq!(scores.score(2), scores.score(3), epsilon = 1e-9);
            // Equal scores fall back to the smaller document id.
            let config = ConsolidationConfig { scope, ..Default::default() };
            let narrative = consolidate_taeg(&taeg, &tl, &scores, &config).unwrap();
            assert!(narrative.segments.iter().all(|s| s.doc_id == "alpha"));
        }
    }

    #[test]
    fn baseline_with_k_equal_to_corpus_reproduces_source_order() {
        let (documents, _, alignment) = fixture();
        let config = BaselineConfig {
            k: 5,
            ordering: BaselineOrder::BySource,
            ..Default::default()
        };
        let outcome = run_baseline(&documents, Some(&alignment), &config).unwrap();
        assert_eq!(outcome.narrative.method(), "baseline");
        let ids: Vec<usize> = outcome
            .narrative
            .segments
            .iter()
            .map(|s| s.sentence_ids[0].0)
            .collect();
        assert_eq!(ids, vec![0, 1, 2, 3, 4]);
        // With full alignment, every segment carries its event index.
        let events: Vec<u32> = outcome
            .narrative
            .segments
            .iter()
            .map(|s| s.event_index.unwrap().0)
            .collect();
        assert_eq!(events, vec![1, 2, 3, 1, 3]);
    }

    #[test]
    fn baseline_by_score_sorts_descending() {
        let (documents, _, _) = fixture();
        let config = BaselineConfig { k: 5, ..Default::default() };
        let outcome = run_baseline(&documents, None, &config).unwrap();
        let scores: Vec<f64> = outcome.narrative.segments.iter().map(|s| s.score).collect();
        assert!(scores.windows(2).all(|w| w[0] >= w[1]));
        // Without an alignment, no segment has an event index.
        assert!(outcome.narrative.segments.iter().all(|s| s.event_index.is_none()));
    }

    #[test]
    fn baseline_truncates_to_the_top_k_scores() {
        let (documents, _, _) = fixture();
        let all = run_baseline(&documents, None, &BaselineConfig { k: 5, ..Default::default() })
            .unwrap();
        let top = run_baseline(&documents, None, &BaselineConfig { k: 2, ..Default::default() })
            .unwrap();
        assert_eq!(top.narrative.len(), 2);
        let expected: Vec<usize> = all.narrative.segments[..2]
            .iter()
            .map(|s| s.sentence_ids[0].0)
            .collect();
        let kept: Vec<usize> = top
            .narrative
            .segments
            .iter()
            .map(|s| s.sentence_ids[0].0)
            .collect();
        assert_eq!(kept, expected);
    }

    #[test]
    fn baseline_rejects_k_beyond_the_corpus() {
        let (documents, _, _) = fixture();
        let config = BaselineConfig { k: 6, ..Default::default() };
        let err = run_baseline(&documents, None, &config).unwrap_err();
        assert!(matches!(err, ConsolidateError::KTooLarge { k: 6, sentences: 5 }));
    }

    #[test]
    fn baseline_rejects_an_out_of_range_threshold() {
        let (documents, _, _) = fixture();
        let config = BaselineConfig { threshold: 1.0, k: 2, ..Default::default() };
        let err = run_baseline(&documents, None, &config).unwrap_err();
        assert!(matches!(
            err,
            ConsolidateError::Graph(GraphError::InvalidThreshold(_))
        ));
    }

    #[test]
    fn narrative_sidecar_round_trips_through_json() {
        let (documents, tl, alignment) = fixture();
        let outcome = run_consolidation(
            &documents,
            &tl,
            &alignment,
            &ConsolidationConfig::default(),
        )
        .unwrap();
        let json = serde_json::to_string_pretty(&outcome.narrative).unwrap();
        assert!(json.contains("\"method\": \"taeg\""));
        let back: Narrative = serde_json::from_str(&json).unwrap();
        assert_eq!(back.len(), outcome.narrative.len());
        assert_eq!(back.render(), outcome.narrative.render());
        assert_eq!(back.method(), "taeg");
    }

    #[test]
    fn order_and_scope_parse_round_trip() {
        for ordering in [BaselineOrder::ByScore, BaselineOrder::BySource] {
            assert_eq!(ordering.to_string().parse::<BaselineOrder>().unwrap(), ordering);
        }
        for scope in [LexrankScope::Global, LexrankScope::PerEvent] {
            assert_eq!(scope.to_string().parse::<LexrankScope>().unwrap(), scope);
        }
        assert!("upside-down".parse::<BaselineOrder>().is_err());
    }
}
