//! Corpus and timeline handling: file formats, validation, and the
//! containment-based alignment of sentences to canonical events.
//!
//! A corpus is an ordered list of documents, each an ordered list of sentences
//! carrying `book:chapter:verse` spans. A timeline is an ordered list of
//! canonical events, each declaring (per document) the verse range it covers.
//! Alignment assigns a sentence to an event exactly when the sentence's span
//! lies fully inside the event's span for that document.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Version tag expected in corpus and timeline files.
pub const FORMAT_VERSION: u32 = 1;

/// Corpus-unique sentence identifier, assigned in (document, position) order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SentenceId(pub usize);

impl fmt::Display for SentenceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

/// 1-based position of a canonical event. Indices stay strictly increasing
/// within a timeline but may be sparse, e.g. after degradation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EventIndex(pub u32);

impl fmt::Display for EventIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// A single `book:chapter:verse` reference.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VerseRef {
    pub book: String,
    pub chapter: u32,
    pub verse: u32,
}

impl VerseRef {
    /// Ordering key within one book.
    pub fn pos(&self) -> (u32, u32) {
        (self.chapter, self.verse)
    }
}

impl fmt::Display for VerseRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.book, self.chapter, self.verse)
    }
}

impl FromStr for VerseRef {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, CorpusError> {
        parse_verse_ref(s)
    }
}

/// Parses a `book:chapter:verse` reference. Whitespace around the three
/// fields is tolerated; book names are case-sensitive and must not contain
/// colons.
pub fn parse_verse_ref(input: &str) -> Result<VerseRef, CorpusError> {
    let malformed = |reason: &str| CorpusError::MalformedRef {
        input: input.to_owned(),
        reason: reason.to_owned(),
    };
    let fields: Vec<&str> = input.split(':').map(str::trim).collect();
    if fields.len() != 3 {
        return Err(malformed(&format!("expected 3 colon-separated fields, got {}", fields.len())));
    }
    let book = fields[0];
    if book.is_empty() {
        return Err(malformed("empty book name"));
    }
    let number = |field: &str, what: &str| -> Result<u32, CorpusError> {
        let value: u32 = field
            .parse()
            .map_err(|_| malformed(&format!("{what} `{field}` is not a positive integer")))?;
        if value == 0 {
            return Err(malformed(&format!("{what} must be >= 1")));
        }
        Ok(value)
    };
    Ok(VerseRef {
        book: book.to_owned(),
        chapter: number(fields[1], "chapter")?,
        verse: number(fields[2], "verse")?,
    })
}

/// An inclusive verse range within a single book.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerseRange {
    start: VerseRef,
    end: VerseRef,
}

impl VerseRange {
    pub fn new(start: VerseRef, end: VerseRef) -> Result<Self, CorpusError> {
        if start.book != end.book {
            return Err(CorpusError::Invariant(format!(
                "range `{start}`..`{end}` crosses books"
            )));
        }
        if start.pos() > end.pos() {
            return Err(CorpusError::Invariant(format!(
                "range start `{start}` is after end `{end}`"
            )));
        }
        Ok(Self { start, end })
    }

    pub fn start(&self) -> &VerseRef {
        &self.start
    }

    pub fn end(&self) -> &VerseRef {
        &self.end
    }

    /// True when `other` lies fully inside `self` (same book, containment on
    /// both endpoints).
    pub fn contains(&self, other: &VerseRange) -> bool {
        self.start.book == other.start.book
            && self.start.pos() <= other.start.pos()
            && other.end.pos() <= self.end.pos()
    }

    /// True when the two ranges share at least one verse.
    pub fn overlaps(&self, other: &VerseRange) -> bool {
        self.start.book == other.start.book
            && self.start.pos() <= other.end.pos()
            && other.start.pos() <= self.end.pos()
    }
}

impl fmt::Display for VerseRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

/// A sentence with its verse span and corpus-unique id.
#[derive(Debug, Clone, PartialEq)]
pub struct Sentence {
    pub id: SentenceId,
    pub doc_id: String,
    /// 0-based position within the owning document.
    pub position: usize,
    pub text: String,
    pub span: VerseRange,
}

/// One perspective document of the corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub title: String,
    pub sentences: Vec<Sentence>,
}

/// One canonical event of the timeline with its per-document spans.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalEvent {
    pub index: EventIndex,
    pub title: String,
    pub spans: BTreeMap<String, VerseRange>,
}

/// Ordered list of canonical events with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Timeline {
    pub events: Vec<CanonicalEvent>,
}

impl Timeline {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// Result of aligning a corpus against a timeline.
///
/// Every sentence id appears in `sentence_to_event`, mapped to `None` when no
/// event span contains it. `event_versions` groups the assigned sentences per
/// (event, document) pair, in document order.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub sentence_to_event: BTreeMap<SentenceId, Option<EventIndex>>,
    pub event_versions: BTreeMap<(EventIndex, String), Vec<SentenceId>>,
}

impl Alignment {
    /// Event assignment for one sentence (`None` for unassigned or unknown).
    pub fn event_of(&self, id: SentenceId) -> Option<EventIndex> {
        self.sentence_to_event.get(&id).copied().flatten()
    }

    /// Total number of event versions, i.e. populated (event, document) pairs.
    pub fn version_count(&self) -> usize {
        self.event_versions.len()
    }
}

/// Errors for corpus and timeline loading, validation, and alignment.
#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed verse reference `{input}`: {reason}")]
    MalformedRef { input: String, reason: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("sentence {sentence} of document `{doc_id}` is contained in events {first} and {second}")]
    Overlap {
        sentence: SentenceId,
        doc_id: String,
        first: EventIndex,
        second: EventIndex,
    },
    #[error("timeline event {event} declares a span for unknown document `{doc_id}`")]
    UnknownDocument { event: EventIndex, doc_id: String },
}

impl CorpusError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        CorpusError::Io {
            path: path.to_owned(),
            source,
        }
    }
}

// On-disk schema. Domain types carry derived fields (ids, positions) that the
// files deliberately omit, so (de)serialization goes through these mirrors.
mod file {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Serialize};

    #[derive(Serialize, Deserialize)]
    pub struct CorpusFile {
        pub format_version: u32,
        pub documents: Vec<DocumentFile>,
    }

    #[derive(Serialize, Deserialize)]
    pub struct DocumentFile {
        pub id: String,
        pub title: String,
        pub sentences: Vec<SentenceFile>,
    }

    #[derive(Serialize, Deserialize)]
    pub struct SentenceFile {
        pub text: String,
        pub start: String,
        pub end: String,
    }

    #[derive(Serialize, Deserialize)]
    pub struct TimelineFile {
        pub format_version: u32,
        pub events: Vec<EventFile>,
    }

    #[derive(Serialize, Deserialize)]
    pub struct EventFile {
        pub index: u32,
        pub title: String,
        pub spans: BTreeMap<String, RangeFile>,
    }

    #[derive(Serialize, Deserialize)]
    pub struct RangeFile {
        pub start: String,
        pub end: String,
    }
}

fn check_format_version(found: u32, what: &str) -> Result<(), CorpusError> {
    if found != FORMAT_VERSION {
        return Err(CorpusError::Schema(format!(
            "{what} has format_version {found}, expected {FORMAT_VERSION}"
        )));
    }
    Ok(())
}

/// One raw sentence: (text, start verse, end verse), references unparsed.
pub type SentenceSpec = (String, String, String);
/// One raw document: (id, title, sentences).
pub type DocumentSpec = (String, String, Vec<SentenceSpec>);

/// Builds validated documents from raw sentence specs, assigning sentence
/// ids globally in (document, position) order.
pub fn build_documents(raw: Vec<DocumentSpec>) -> Result<Vec<Document>, CorpusError> {
    let mut seen = HashSet::new();
    let mut documents = Vec::with_capacity(raw.len());
    let mut next_id = 0usize;
    for (id, title, sentences) in raw {
        if !seen.insert(id.clone()) {
            return Err(CorpusError::Schema(format!("duplicate document id `{id}`")));
        }
        let mut out = Vec::with_capacity(sentences.len());
        let mut prev: Option<VerseRange> = None;
        for (position, (text, start, end)) in sentences.into_iter().enumerate() {
            if text.is_empty() {
                return Err(CorpusError::Invariant(format!(
                    "document `{id}` sentence {position} has empty text"
                )));
            }
            if text.contains('\n') {
                return Err(CorpusError::Invariant(format!(
                    "document `{id}` sentence {position} contains a newline"
                )));
            }
            let span = VerseRange::new(parse_verse_ref(&start)?, parse_verse_ref(&end)?)?;
            if span.start().book != id {
                return Err(CorpusError::Schema(format!(
                    "document `{id}` sentence {position} spans book `{}`",
                    span.start().book
                )));
            }
            if let Some(prev) = &prev {
                if span.start().pos() < prev.start().pos() || span.end().pos() < prev.end().pos() {
                    return Err(CorpusError::Invariant(format!(
                        "document `{id}` sentence {position} span {span} precedes {prev}"
                    )));
                }
            }
            prev = Some(span.clone());
            out.push(Sentence {
                id: SentenceId(next_id),
                doc_id: id.clone(),
                position,
                text,
                span,
            });
            next_id += 1;
        }
        documents.push(Document {
            id,
            title,
            sentences: out,
        });
    }
    Ok(documents)
}

/// Loads and validates a corpus file.
pub fn load_corpus(path: &Path) -> Result<Vec<Document>, CorpusError> {
    let data = std::fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    corpus_from_json(&data)
}

/// Parses and validates a corpus from its JSON representation.
pub fn corpus_from_json(data: &str) -> Result<Vec<Document>, CorpusError> {
    let parsed: file::CorpusFile =
        serde_json::from_str(data).map_err(|e| CorpusError::Schema(e.to_string()))?;
    check_format_version(parsed.format_version, "corpus")?;
    build_documents(
        parsed
            .documents
            .into_iter()
            .map(|d| {
                let sentences = d
                    .sentences
                    .into_iter()
                    .map(|s| (s.text, s.start, s.end))
                    .collect();
                (d.id, d.title, sentences)
            })
            .collect(),
    )
}

/// Serializes a corpus back to its file format.
pub fn corpus_to_json(documents: &[Document]) -> String {
    let out = file::CorpusFile {
        format_version: FORMAT_VERSION,
        documents: documents
            .iter()
            .map(|d| file::DocumentFile {
                id: d.id.clone(),
                title: d.title.clone(),
                sentences: d
                    .sentences
                    .iter()
                    .map(|s| file::SentenceFile {
                        text: s.text.clone(),
                        start: s.span.start().to_string(),
                        end: s.span.end().to_string(),
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut json = serde_json::to_string_pretty(&out).expect("corpus serialization cannot fail");
    json.push('\n');
    json
}

/// Writes a corpus to disk in the versioned JSON format.
pub fn save_corpus(documents: &[Document], path: &Path) -> Result<(), CorpusError> {
    std::fs::write(path, corpus_to_json(documents)).map_err(|e| CorpusError::io(path, e))
}

/// Loads and validates a timeline file.
pub fn load_timeline(path: &Path) -> Result<Timeline, CorpusError> {
    let data = std::fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    timeline_from_json(&data)
}

/// Parses and validates a timeline from its JSON representation.
pub fn timeline_from_json(data: &str) -> Result<Timeline, CorpusError> {
    let parsed: file::TimelineFile =
        serde_json::from_str(data).map_err(|e| CorpusError::Schema(e.to_string()))?;
    check_format_version(parsed.format_version, "timeline")?;
    let mut events = Vec::with_capacity(parsed.events.len());
    let mut prev: Option<u32> = None;
    for event in parsed.events {
        if let Some(prev) = prev {
            if event.index <= prev {
                return Err(CorpusError::Invariant(format!(
                    "event index {} does not increase after {prev}",
                    event.index
                )));
            }
        }
        if event.index == 0 {
            return Err(CorpusError::Invariant("event index must be >= 1".into()));
        }
        prev = Some(event.index);
        let mut spans = BTreeMap::new();
        for (doc_id, range) in event.spans {
            let span = VerseRange::new(parse_verse_ref(&range.start)?, parse_verse_ref(&range.end)?)?;
            if span.start().book != doc_id {
                return Err(CorpusError::Schema(format!(
                    "event {} span for `{doc_id}` references book `{}`",
                    event.index,
                    span.start().book
                )));
            }
            spans.insert(doc_id, span);
        }
        if spans.is_empty() {
            log::warn!("event {} (`{}`) is covered by no document", event.index, event.title);
        }
        events.push(CanonicalEvent {
            index: EventIndex(event.index),
            title: event.title,
            spans,
        });
    }
    Ok(Timeline { events })
}

/// Serializes a timeline back to its file format.
pub fn timeline_to_json(timeline: &Timeline) -> String {
    let out = file::TimelineFile {
        format_version: FORMAT_VERSION,
        events: timeline
            .events
            .iter()
            .map(|e| file::EventFile {
                index: e.index.0,
                title: e.title.clone(),
                spans: e
                    .spans
                    .iter()
                    .map(|(doc_id, span)| {
                        (
                            doc_id.clone(),
                            file::RangeFile {
                                start: span.start().to_string(),
                                end: span.end().to_string(),
                            },
                        )
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut json = serde_json::to_string_pretty(&out).expect("timeline serialization cannot fail");
    json.push('\n');
    json
}

/// Writes a timeline to disk in the versioned JSON format.
pub fn save_timeline(timeline: &Timeline, path: &Path) -> Result<(), CorpusError> {
    std::fs::write(path, timeline_to_json(timeline)).map_err(|e| CorpusError::io(path, e))
}

/// Assigns sentences to canonical events by span containment.
///
/// A sentence belongs to an event exactly when the event's span for the
/// sentence's document fully contains the sentence's span. Sentences inside
/// two events are an error; partial overlaps and uncovered sentences stay
/// unassigned (with a warning for partial overlaps). Declared spans that end
/// up with zero sentences are warned about but tolerated.
pub fn align(docs: &[Document], timeline: &Timeline) -> Result<Alignment, CorpusError> {
    let declared: HashMap<&str, &Document> = docs.iter().map(|d| (d.id.as_str(), d)).collect();
    for event in &timeline.events {
        for doc_id in event.spans.keys() {
            if !declared.contains_key(doc_id.as_str()) {
                return Err(CorpusError::UnknownDocument {
                    event: event.index,
                    doc_id: doc_id.clone(),
                });
            }
        }
    }

    let mut sentence_to_event = BTreeMap::new();
    let mut event_versions: BTreeMap<(EventIndex, String), Vec<SentenceId>> = BTreeMap::new();
    for doc in docs {
        let spans: Vec<(EventIndex, &VerseRange)> = timeline
            .events
            .iter()
            .filter_map(|e| e.spans.get(&doc.id).map(|r| (e.index, r)))
            .collect();
        for sentence in &doc.sentences {
            let mut containing = spans.iter().filter(|(_, r)| r.contains(&sentence.span));
            let assigned = match (containing.next(), containing.next()) {
                (Some((first, _)), Some((second, _))) => {
                    return Err(CorpusError::Overlap {
                        sentence: sentence.id,
                        doc_id: doc.id.clone(),
                        first: *first,
                        second: *second,
                    });
                }
                (Some((event, _)), None) => Some(*event),
                (None, _) => {
                    if spans.iter().any(|(_, r)| r.overlaps(&sentence.span)) {
                        log::warn!(
                            "sentence {} ({}) partially overlaps an event span; left unassigned",
                            sentence.id,
                            sentence.span
                        );
                    }
                    None
                }
            };
            sentence_to_event.insert(sentence.id, assigned);
            if let Some(event) = assigned {
                event_versions
                    .entry((event, doc.id.clone()))
                    .or_default()
                    .push(sentence.id);
            }
        }
        for (event, _) in &spans {
            if !event_versions.contains_key(&(*event, doc.id.clone())) {
                log::warn!("event {event} span in document `{}` contains no sentences", doc.id);
            }
        }
    }
    Ok(Alignment {
        sentence_to_event,
        event_versions,
    })
}
