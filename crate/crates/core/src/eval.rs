//! Evaluation metrics: ROUGE-1/2/L, METEOR (exact + stem matching), and
//! Kendall's tau-b over the narrative's event order.
//!
//! All metric functions are pure and operate on pre-tokenized input;
//! [`evaluate`] bundles them into one report for a narrative against a
//! reference text.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::consolidate::Narrative;
use crate::textproc::{stem, tokenize, TokenList};

/// METEOR's harmonic-mean weight toward recall.
const METEOR_ALPHA: f64 = 0.9;
/// METEOR's fragmentation-penalty exponent.
const METEOR_BETA: i32 = 3;
/// METEOR's fragmentation-penalty weight.
const METEOR_GAMMA: f64 = 0.5;

/// Errors from report assembly.
#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("reference text contains no tokens")]
    EmptyReference,
}

/// Precision / recall / F1 triple; F1 is the plain harmonic mean, 0 when
/// both sides are empty of matches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrfScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl PrfScore {
    fn from_counts(matched: f64, candidate_total: f64, reference_total: f64) -> Self {
        let precision = if candidate_total > 0.0 {
            (matched / candidate_total).min(1.0)
        } else {
            0.0
        };
        let recall = if reference_total > 0.0 {
            (matched / reference_total).min(1.0)
        } else {
            0.0
        };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self { precision, recall, f1 }
    }

    pub const fn zero() -> Self {
        Self { precision: 0.0, recall: 0.0, f1: 0.0 }
    }
}

/// Clipped n-gram overlap between two token streams.
pub fn rouge_n(candidate: &[String], reference: &[String], n: usize) -> PrfScore {
    assert!(n >= 1, "n-gram order must be positive");
    let cand_total = candidate.len().saturating_sub(n - 1);
    let ref_total = reference.len().saturating_sub(n - 1);
    if cand_total == 0 || ref_total == 0 {
        return PrfScore::zero();
    }
    let mut ref_counts: HashMap<&[String], usize> = HashMap::new();
    for gram in reference.windows(n) {
        *ref_counts.entry(gram).or_insert(0) += 1;
    }
    let mut cand_counts: HashMap<&[String], usize> = HashMap::new();
    for gram in candidate.windows(n) {
        *cand_counts.entry(gram).or_insert(0) += 1;
    }
    let matched: usize = cand_counts
        .iter()
        .map(|(gram, &count)| count.min(ref_counts.get(gram).copied().unwrap_or(0)))
        .sum();
    PrfScore::from_counts(matched as f64, cand_total as f64, ref_total as f64)
}

/// How ROUGE-L aggregates the longest common subsequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RougeLMode {
    /// Per reference sentence, the union of LCS matches against every
    /// candidate sentence.
    #[default]
    Summary,
    /// One LCS over both token streams flattened.
    Corpus,
}

impl fmt::Display for RougeLMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RougeLMode::Summary => "summary",
            RougeLMode::Corpus => "corpus",
        })
    }
}

impl FromStr for RougeLMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "summary" => Ok(RougeLMode::Summary),
            "corpus" => Ok(RougeLMode::Corpus),
            other => Err(format!(
                "unknown rouge-l mode `{other}` (expected `summary` or `corpus`)"
            )),
        }
    }
}

/// Interns tokens as dense integers so LCS comparisons are word-level
/// integer compares rather than string compares.
fn intern(sentences: &[TokenList], table: &mut HashMap<String, u32>) -> Vec<Vec<u32>> {
    sentences
        .iter()
        .map(|sentence| {
            sentence
                .iter()
                .map(|token| {
                    let next = table.len() as u32;
                    *table.entry(token.clone()).or_insert(next)
                })
                .collect()
        })
        .collect()
}

/// LCS length in linear space: only two DP rows live at a time, so this
/// handles corpus-scale inputs.
fn lcs_len(a: &[u32], b: &[u32]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    // Keep the shorter sequence on the row axis to bound memory.
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut prev = vec![0usize; short.len() + 1];
    let mut curr = vec![0usize; short.len() + 1];
    for &x in long {
        for (i, &y) in short.iter().enumerate() {
            curr[i + 1] = if x == y {
                prev[i] + 1
            } else {
                prev[i + 1].max(curr[i])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[short.len()]
}

/// Marks which positions of `reference` participate in one canonical LCS
/// with `candidate`. Quadratic table; used only on single sentences.
fn mark_lcs_positions(reference: &[u32], candidate: &[u32], hit: &mut [bool]) {
    let (m, n) = (reference.len(), candidate.len());
    if m == 0 || n == 0 {
        return;
    }
    let mut dp = vec![vec![0usize; n + 1]; m + 1];
    for i in 1..=m {
        for j in 1..=n {
            dp[i][j] = if reference[i - 1] == candidate[j - 1] {
                dp[i - 1][j - 1] + 1
            } else {
                dp[i - 1][j].max(dp[i][j - 1])
            };
        }
    }
    let (mut i, mut j) = (m, n);
    while i > 0 && j > 0 {
        if reference[i - 1] == candidate[j - 1] && dp[i][j] == dp[i - 1][j - 1] + 1 {
            hit[i - 1] = true;
            i -= 1;
            j -= 1;
        } else if dp[i - 1][j] >= dp[i][j - 1] {
            i -= 1;
        } else {
            j -= 1;
        }
    }
}

/// Longest-common-subsequence overlap, per-sentence or over flat streams.
pub fn rouge_l(candidate: &[TokenList], reference: &[TokenList], mode: RougeLMode) -> PrfScore {
    let mut table = HashMap::new();
    let cand = intern(candidate, &mut table);
    let refr = intern(reference, &mut table);
    let cand_total: usize = cand.iter().map(Vec::len).sum();
    let ref_total: usize = refr.iter().map(Vec::len).sum();
    if cand_total == 0 || ref_total == 0 {
        return PrfScore::zero();
    }
    let matched = match mode {
        RougeLMode::Corpus => {
            let cand_flat: Vec<u32> = cand.concat();
            let ref_flat: Vec<u32> = refr.concat();
            lcs_len(&cand_flat, &ref_flat)
        }
        RougeLMode::Summary => {
            let mut total = 0;
            for ref_sentence in &refr {
                let mut hit = vec![false; ref_sentence.len()];
                for cand_sentence in &cand {
                    mark_lcs_positions(ref_sentence, cand_sentence, &mut hit);
                }
                total += hit.iter().filter(|&&h| h).count();
            }
            total
        }
    };
    PrfScore::from_counts(matched as f64, cand_total as f64, ref_total as f64)
}

/// Collects in-order matches between unused tokens that share a key.
fn match_stage(
    candidate: &[String],
    reference: &[String],
    cand_used: &mut [bool],
    ref_used: &mut [bool],
    pairs: &mut Vec<(usize, usize)>,
    key: impl Fn(&str) -> String,
) {
    let mut groups: HashMap<String, (Vec<usize>, Vec<usize>)> = HashMap::new();
    for (i, token) in candidate.iter().enumerate() {
        if !cand_used[i] {
            groups.entry(key(token)).or_default().0.push(i);
        }
    }
    for (j, token) in reference.iter().enumerate() {
        if !ref_used[j] {
            groups.entry(key(token)).or_default().1.push(j);
        }
    }
    for (cands, refs) in groups.into_values() {
        for (i, j) in cands.into_iter().zip(refs) {
            cand_used[i] = true;
            ref_used[j] = true;
            pairs.push((i, j));
        }
    }
}

/// Alignment-based score with a fragmentation penalty. Stage one matches
/// identical tokens; stage two matches leftover tokens whose stems agree.
/// Within each equivalence class, tokens pair up in positional order, which
/// keeps runs contiguous and so holds the chunk count down.
pub fn meteor(candidate: &[String], reference: &[String]) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let mut cand_used = vec![false; candidate.len()];
    let mut ref_used = vec![false; reference.len()];
    let mut pairs = Vec::new();
    match_stage(candidate, reference, &mut cand_used, &mut ref_used, &mut pairs, |t| {
        t.to_string()
    });
    match_stage(candidate, reference, &mut cand_used, &mut ref_used, &mut pairs, stem);
    let m = pairs.len();
    if m == 0 {
        return 0.0;
    }
    let precision = m as f64 / candidate.len() as f64;
    let recall = m as f64 / reference.len() as f64;
    let f_mean =
        (precision * recall) / (METEOR_ALPHA * precision + (1.0 - METEOR_ALPHA) * recall);
    pairs.sort_unstable();
    let mut chunks = 1usize;
    for w in pairs.windows(2) {
        if !(w[1].0 == w[0].0 + 1 && w[1].1 == w[0].1 + 1) {
            chunks += 1;
        }
    }
    let penalty = METEOR_GAMMA * (chunks as f64 / m as f64).powi(METEOR_BETA);
    f_mean * (1.0 - penalty)
}

/// Event indices in output order, extracted from a narrative's segments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderSequence(Vec<u32>);

impl OrderSequence {
    pub fn new(values: Vec<u32>) -> Self {
        Self(values)
    }

    /// Extracts the sequence, skipping segments without an event index and
    /// reporting how many were skipped.
    pub fn from_narrative(narrative: &Narrative) -> (Self, usize) {
        let mut values = Vec::with_capacity(narrative.len());
        let mut skipped = 0;
        for segment in &narrative.segments {
            match segment.event_index {
                Some(event) => values.push(event.0),
                None => skipped += 1,
            }
        }
        (Self(values), skipped)
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Merge sort that counts strict inversions (pairs out of order).
fn sort_counting_inversions(values: &mut [u32], buf: &mut Vec<u32>) -> u64 {
    let n = values.len();
    if n <= 1 {
        return 0;
    }
    let mid = n / 2;
    let mut inversions = sort_counting_inversions(&mut values[..mid], buf)
        + sort_counting_inversions(&mut values[mid..], buf);
    buf.clear();
    {
        let (left, right) = values.split_at(mid);
        let (mut i, mut j) = (0, 0);
        while i < left.len() && j < right.len() {
            if left[i] <= right[j] {
                buf.push(left[i]);
                i += 1;
            } else {
                inversions += (left.len() - i) as u64;
                buf.push(right[j]);
                j += 1;
            }
        }
        buf.extend_from_slice(&left[i..]);
        buf.extend_from_slice(&right[j..]);
    }
    values.copy_from_slice(buf);
    inversions
}

fn tied_pairs(values: &[u32]) -> u64 {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let mut ties = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            ties += run * (run - 1) / 2;
            run = 1;
        }
    }
    ties + run * (run - 1) / 2
}

/// Tau-b rank correlation between the observed sequence and its sorted
/// order. Positions are never tied, so only the value-side tie term enters
/// the denominator. Sequences shorter than two, or fully tied, carry no
/// ordering signal and score 1.0 (with a warning).
pub fn kendall_tau(observed: &[u32]) -> f64 {
    let n = observed.len();
    if n < 2 {
        log::warn!("kendall_tau: sequence of length {n} carries no ordering signal; scoring 1.0");
        return 1.0;
    }
    let n0 = (n as u64) * (n as u64 - 1) / 2;
    let ty = tied_pairs(observed);
    if ty == n0 {
        log::warn!("kendall_tau: all values tied; scoring 1.0");
        return 1.0;
    }
    let mut scratch = observed.to_vec();
    let mut buf = Vec::with_capacity(n);
    let discordant = sort_counting_inversions(&mut scratch, &mut buf);
    let concordant = n0 - ty - discordant;
    // Tau-b: positions contribute no tie term, values contribute ty.
    (concordant as f64 - discordant as f64) / (((n0 - ty) as f64) * (n0 as f64)).sqrt()
}

/// One narrative's full scorecard against a reference.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub rouge1: PrfScore,
    pub rouge2: PrfScore,
    pub rouge_l: PrfScore,
    pub rouge_l_mode: RougeLMode,
    pub meteor: f64,
    pub kendall_tau: f64,
    pub candidate_chars: usize,
    pub reference_chars: usize,
    /// Segments that carried no event index and were left out of the
    /// order sequence.
    pub unaligned_segments: usize,
    /// Reserved for scores computed by external model-based tooling; this
    /// crate never fills it.
    pub bertscore: Option<f64>,
}

/// Scores a narrative against reference sentences (one string per
/// reference sentence; the reference text is their newline join).
pub fn evaluate(
    candidate: &Narrative,
    reference_sentences: &[String],
    mode: RougeLMode,
) -> Result<EvalReport, EvalError> {
    let ref_tokens: Vec<TokenList> = reference_sentences.iter().map(|s| tokenize(s)).collect();
    let ref_flat: TokenList = ref_tokens.concat();
    if ref_flat.is_empty() {
        return Err(EvalError::EmptyReference);
    }
    let cand_tokens: Vec<TokenList> = candidate
        .segments
        .iter()
        .map(|s| tokenize(&s.text))
        .collect();
    let cand_flat: TokenList = cand_tokens.concat();

    let (order, unaligned_segments) = OrderSequence::from_narrative(candidate);
    Ok(EvalReport {
        rouge1: rouge_n(&cand_flat, &ref_flat, 1),
        rouge2: rouge_n(&cand_flat, &ref_flat, 2),
        rouge_l: rouge_l(&cand_tokens, &ref_tokens, mode),
        rouge_l_mode: mode,
        meteor: meteor(&cand_flat, &ref_flat),
        kendall_tau: kendall_tau(order.values()),
        candidate_chars: candidate.render().chars().count(),
        reference_chars: reference_sentences.join("\n").chars().count(),
        unaligned_segments,
        bertscore: None,
    })
}

/// Metric rows of the comparison table, in print order.
const TABLE_ROWS: [&str; 6] = [
    "ROUGE-1 F1",
    "ROUGE-2 F1",
    "ROUGE-L F1",
    "METEOR",
    "Kendall's Tau",
    "Length (chars)",
];

fn table_cell(report: &EvalReport, row: usize) -> String {
    match row {
        0 => format!("{:.3}", report.rouge1.f1),
        1 => format!("{:.3}", report.rouge2.f1),
        2 => format!("{:.3}", report.rouge_l.f1),
        3 => format!("{:.3}", report.meteor),
        4 => format!("{:.3}", report.kendall_tau),
        5 => report.candidate_chars.to_string(),
        _ => unreachable!(),
    }
}

/// Fixed-width comparison table: one column per labeled report, one row
/// per metric.
pub fn comparison_table(reports: &[(String, EvalReport)]) -> String {
    let label_width = TABLE_ROWS
        .iter()
        .map(|r| r.len())
        .max()
        .unwrap()
        .max("Metric".len());
    let col_widths: Vec<usize> = reports
        .iter()
        .map(|(label, report)| {
            (0..TABLE_ROWS.len())
                .map(|row| table_cell(report, row).len())
                .max()
                .unwrap_or(0)
                .max(label.len())
                .max(5)
        })
        .collect();
    let mut out = String::new();
    out.push_str(&format!("{:<label_width$}", "Metric"));
    for ((label, _), width) in reports.iter().zip(&col_widths) {
        out.push_str(&format!("  {label:>width$}"));
    }
    out.push('\n');
    let total = label_width + col_widths.iter().map(|w| w + 2).sum::<usize>();
    out.push_str(&"-".repeat(total));
    out.push('\n');
    for (row, label) in TABLE_ROWS.iter().enumerate() {
        out.push_str(&format!("{label:<label_width$}"));
        for ((_, report), width) in reports.iter().zip(&col_widths) {
            let cell = table_cell(report, row);
            out.push_str(&format!("  {cell:>width$}"));
        }
        out.push('\n');
    }
    out
}

/// Header line matching [`EvalReport::csv_row`].
pub fn csv_header() -> String {
    [
        "run",
        "rouge1_precision",
        "rouge1_recall",
        "rouge1_f1",
        "rouge2_precision",
        "rouge2_recall",
        "rouge2_f1",
        "rougel_precision",
        "rougel_recall",
        "rougel_f1",
        "rouge_l_mode",
        "meteor",
        "kendall_tau",
        "candidate_chars",
        "reference_chars",
        "unaligned_segments",
    ]
    .join(",")
}

impl EvalReport {
    /// One CSV data row; the label is quoted so arbitrary run names stay
    /// one field.
    pub fn csv_row(&self, label: &str) -> String {
        format!(
            "\"{}\",{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            label.replace('"', "\"\""),
            self.rouge1.precision,
            self.rouge1.recall,
            self.rouge1.f1,
            self.rouge2.precision,
            self.rouge2.recall,
            self.rouge2.f1,
            self.rouge_l.precision,
            self.rouge_l.recall,
            self.rouge_l.f1,
            self.rouge_l_mode,
            self.meteor,
            self.kendall_tau,
            self.candidate_chars,
            self.reference_chars,
            self.unaligned_segments,
        )
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::consolidate::{ConsolidationConfig, MethodParams, Segment};
    use crate::corpus::{EventIndex, SentenceId};

    fn toks(words: &[&str]) -> TokenList {
        words.iter().map(|w| w.to_string()).collect()
    }

    fn narrative(segments: Vec<(&str, Option<u32>)>) -> Narrative {
        Narrative {
            segments: segments
                .into_iter()
                .enumerate()
                .map(|(i, (text, event))| Segment {
                    text: text.to_string(),
                    event_index: event.map(EventIndex),
                    doc_id: "doc".to_string(),
                    sentence_ids: vec![SentenceId(i)],
                    score: 0.0,
                })
                .collect(),
            params: MethodParams::Taeg(ConsolidationConfig::default()),
        }
    }

    #[test]
    fn rouge_n_is_one_on_identical_inputs() {
        let t = toks(&["the", "cat", "sat", "down"]);
        for n in 1..=2 {
            let score = rouge_n(&t, &t, n);
            assert_abs_diff_eq!(score.f1, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn rouge_1_counts_two_of_three_unigrams() {
        let score = rouge_n(&toks(&["a", "b", "c"]), &toks(&["a", "x", "c"]), 1);
        assert_abs_diff_eq!(score.precision, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(score.recall, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(score.f1, 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn rouge_2_is_zero_on_disjoint_bigrams() {
        let score = rouge_n(&toks(&["a", "b"]), &toks(&["c", "d"]), 2);
        assert_eq!(score, PrfScore::zero());
    }

    #[test]
    fn rouge_n_clips_repeated_grams() {
        let score = rouge_n(&toks(&["a", "a", "a"]), &toks(&["a"]), 1);
        assert_abs_diff_eq!(score.precision, 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(score.recall, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(score.f1, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn rouge_n_is_zero_when_a_side_is_too_short() {
        assert_eq!(rouge_n(&toks(&["a"]), &toks(&["a", "b"]), 2), PrfScore::zero());
        assert_eq!(rouge_n(&[], &toks(&["a"]), 1), PrfScore::zero());
    }

    /// Plain recursive LCS, exponential but obviously correct, for tiny
    /// cross-checks of the linear-space version.
    fn brute_lcs(a: &[u32], b: &[u32]) -> usize {
        match (a.split_last(), b.split_last()) {
            (Some((&x, ra)), Some((&y, rb))) if x == y => 1 + brute_lcs(ra, rb),
            (Some((_, ra)), Some((_, rb))) => brute_lcs(ra, b).max(brute_lcs(a, rb)),
            _ => 0,
        }
    }

    #[test]
    fn lcs_matches_the_brute_force_on_the_fixture() {
        let a = [0u32, 1, 2, 3];
        let b = [0u32, 2, 1, 3];
        assert_eq!(brute_lcs(&a, &b), 3);
        assert_eq!(lcs_len(&a, &b), 3);
    }

    #[test]
    fn rouge_l_corpus_scores_the_swapped_pair() {
        let score = rouge_l(
            &[toks(&["a", "b", "c", "d"])],
            &[toks(&["a", "c", "b", "d"])],
            RougeLMode::Corpus,
        );
        assert_abs_diff_eq!(score.precision, 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(score.recall, 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(score.f1, 0.75, epsilon = 1e-12);
    }

    #[test]
    fn rouge_l_is_one_on_identical_inputs_in_both_modes() {
        let sentences = vec![toks(&["a", "b", "c"]), toks(&["d", "e"])];
        for mode in [RougeLMode::Summary, RougeLMode::Corpus] {
            let score = rouge_l(&sentences, &sentences, mode);
            assert_abs_diff_eq!(score.f1, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn rouge_l_summary_takes_the_union_over_candidate_sentences() {
        // Reference "a b c"; candidate sentences "a b" and "b c" each cover
        // two reference positions, and together they cover all three.
        let score = rouge_l(
            &[toks(&["a", "b"]), toks(&["b", "c"])],
            &[toks(&["a", "b", "c"])],
            RougeLMode::Summary,
        );
        assert_abs_diff_eq!(score.recall, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(score.precision, 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(score.f1, 2.0 * 0.75 / 1.75, epsilon = 1e-12);
    }

    #[test]
    fn rouge_l_is_zero_for_an_empty_candidate() {
        let score = rouge_l(&[], &[toks(&["a"])], RougeLMode::Summary);
        assert_eq!(score, PrfScore::zero());
    }

    #[test]
    fn meteor_scores_identical_ten_token_texts() {
        let t: TokenList = (0..10).map(|i| format!("tok{i}")).collect();
        assert_abs_diff_eq!(meteor(&t, &t), 0.9995, epsilon = 1e-12);
    }

    #[test]
    fn meteor_scores_a_three_token_identity() {
        let t = toks(&["the", "cat", "sat"]);
        assert_abs_diff_eq!(meteor(&t, &t), 1.0 - 0.5 / 27.0, epsilon = 1e-12);
    }

    #[test]
    fn meteor_is_zero_without_any_match() {
        assert_eq!(meteor(&toks(&["alpha"]), &toks(&["omega"])), 0.0);
        assert_eq!(meteor(&[], &toks(&["a"])), 0.0);
    }

    #[test]
    fn meteor_matches_through_stems_in_stage_two() {
        // "running" and "runs" differ as tokens but share the stem "run".
        let score = meteor(&toks(&["running"]), &toks(&["runs"]));
        assert_abs_diff_eq!(score, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn meteor_penalizes_fragmentation() {
        let ordered = meteor(&toks(&["a", "b"]), &toks(&["a", "b"]));
        let swapped = meteor(&toks(&["b", "a"]), &toks(&["a", "b"]));
        // One chunk versus two: 1 - 0.5 * (1/2)^3 against 1 - 0.5 * 1^3.
        assert_abs_diff_eq!(ordered, 0.9375, epsilon = 1e-12);
        assert_abs_diff_eq!(swapped, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn meteor_weights_recall_over_precision() {
        // All of the candidate matches, but only half of the reference.
        let score = meteor(&toks(&["runs"]), &toks(&["runs", "walked"]));
        let f_mean = (1.0 * 0.5) / (0.9 * 1.0 + 0.1 * 0.5);
        assert_abs_diff_eq!(score, f_mean * 0.5, epsilon = 1e-12);
    }

    /// O(n^2) pair counting; same final expression as the implementation
    /// so agreement is exact, not approximate.
    fn brute_tau(observed: &[u32]) -> f64 {
        let n = observed.len();
        if n < 2 {
            return 1.0;
        }
        let (mut c, mut d, mut ty) = (0u64, 0u64, 0u64);
        for i in 0..n {
            for j in i + 1..n {
                match observed[i].cmp(&observed[j]) {
                    std::cmp::Ordering::Less => c += 1,
                    std::cmp::Ordering::Greater => d += 1,
                    std::cmp::Ordering::Equal => ty += 1,
                }
            }
        }
        let n0 = (n as u64) * (n as u64 - 1) / 2;
        if ty == n0 {
            return 1.0;
        }
        (c as f64 - d as f64) / (((n0 - ty) as f64) * (n0 as f64)).sqrt()
    }

    #[test]
    fn tau_is_one_on_sorted_and_minus_one_on_reversed() {
        assert_eq!(kendall_tau(&[1, 2, 3, 4]), 1.0);
        assert_eq!(kendall_tau(&[4, 3, 2, 1]), -1.0);
    }

    #[test]
    fn tau_counts_the_single_swap() {
        assert_eq!(kendall_tau(&[1, 3, 2]), 1.0 / 3.0);
    }

    #[test]
    fn tau_applies_the_tie_correction() {
        // C=2, D=0, one tied pair: 2 / sqrt(2 * 3).
        assert_eq!(kendall_tau(&[1, 1, 2]), 2.0 / 6.0f64.sqrt());
    }

    #[test]
    fn degenerate_sequences_score_one() {
        assert_eq!(kendall_tau(&[]), 1.0);
        assert_eq!(kendall_tau(&[7]), 1.0);
        assert_eq!(kendall_tau(&[5, 5, 5]), 1.0);
    }

    #[test]
    fn tau_matches_the_oracle_on_all_short_permutations() {
        // Heap's algorithm over 1..=n for n up to 6.
        fn permutations(k: usize, values: &mut Vec<u32>, visit: &mut impl FnMut(&[u32])) {
            if k <= 1 {
                visit(values);
                return;
            }
            for i in 0..k {
                permutations(k - 1, values, visit);
                if k.is_multiple_of(2) {
                    values.swap(i, k - 1);
                } else {
                    values.swap(0, k - 1);
                }
            }
        }
        for n in 2..=6usize {
            let mut values: Vec<u32> = (1..=n as u32).collect();
            let mut count = 0usize;
            permutations(n, &mut values, &mut |p| {
                count += 1;
                assert_eq!(kendall_tau(p), brute_tau(p), "permutation {p:?}");
            });
            assert_eq!(count, (1..=n).product::<usize>());
        }
    }

    #[test]
    fn evaluate_scores_a_narrative_against_itself_perfectly() {
        let n = narrative(vec![
            ("the king rode north", Some(1)),
            ("a storm scattered the fleet", Some(2)),
            ("the city fell", Some(3)),
        ]);
        let reference: Vec<String> =
            n.segments.iter().map(|s| s.text.clone()).collect();
        let report = evaluate(&n, &reference, RougeLMode::Summary).unwrap();
        assert_abs_diff_eq!(report.rouge1.f1, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.rouge2.f1, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.rouge_l.f1, 1.0, epsilon = 1e-12);
        assert_eq!(report.kendall_tau, 1.0);
        assert_eq!(report.unaligned_segments, 0);
        assert_eq!(report.candidate_chars, report.reference_chars);
        assert_eq!(report.bertscore, None);
    }

    #[test]
    fn evaluate_counts_unaligned_segments() {
        let n = narrative(vec![
            ("one", Some(2)),
            ("loose text", None),
            ("two", Some(1)),
        ]);
        let report =
            evaluate(&n, &["one two loose".to_string()], RougeLMode::Summary).unwrap();
        assert_eq!(report.unaligned_segments, 1);
        assert_eq!(report.kendall_tau, -1.0);
    }

    #[test]
    fn evaluate_rejects_an_empty_reference() {
        let n = narrative(vec![("text", Some(1))]);
        assert_eq!(
            evaluate(&n, &[" .,; ".to_string()], RougeLMode::Summary).unwrap_err(),
            EvalError::EmptyReference
        );
    }

    #[test]
    fn comparison_table_lines_up_labels_and_rows() {
        let n = narrative(vec![("alpha beta", Some(1))]);
        let report = evaluate(&n, &["alpha beta".to_string()], RougeLMode::Summary).unwrap();
        let table = comparison_table(&[
            ("taeg".to_string(), report.clone()),
            ("baseline-750".to_string(), report),
        ]);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 2 + TABLE_ROWS.len());
        assert!(lines[0].starts_with("Metric"));
        assert!(lines[0].contains("taeg"));
        assert!(lines[0].contains("baseline-750"));
        assert!(lines[2].starts_with("ROUGE-1 F1"));
        assert!(lines[2].contains("1.000"));
        // All rows align to the same width.
        assert!(lines[2..].iter().all(|l| l.len() == lines[1].len()));
    }

    #[test]
    fn csv_row_has_as_many_fields_as_the_header() {
        let n = narrative(vec![("alpha beta", Some(1))]);
        let report = evaluate(&n, &["alpha beta".to_string()], RougeLMode::Summary).unwrap();
        let header_fields = csv_header().split(',').count();
        let row = report.csv_row("run 1");
        assert_eq!(row.split(',').count(), header_fields);
        assert!(row.starts_with("\"run 1\""));
    }

    #[test]
    fn report_round_trips_through_json() {
        let n = narrative(vec![("alpha beta", Some(1)), ("gamma", Some(2))]);
        let report = evaluate(&n, &["alpha beta gamma".to_string()], RougeLMode::Corpus).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        let back: EvalReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.rouge1, report.rouge1);
        assert_eq!(back.rouge_l_mode, RougeLMode::Corpus);
        assert_eq!(back.kendall_tau, report.kendall_tau);
    }

    proptest! {
        /// Linear-space LCS equals the brute force on small random inputs.
        #[test]
        fn lcs_matches_brute_force(
            a in proptest::collection::vec(0u32..4, 0..9),
            b in proptest::collection::vec(0u32..4, 0..9),
        ) {
            prop_assert_eq!(lcs_len(&a, &b), brute_lcs(&a, &b));
        }

        /// The merge-sort tau equals the O(n^2) oracle bit for bit,
        /// including tied sequences.
        #[test]
        fn tau_matches_brute_force(values in proptest::collection::vec(0u32..10, 2..11)) {
            prop_assert_eq!(kendall_tau(&values), brute_tau(&values));
        }

        /// Metric outputs stay in range on arbitrary token streams.
        #[test]
        fn metrics_stay_in_declared_ranges(
            cand in proptest::collection::vec("[a-d]{1,3}", 0..12),
            refr in proptest::collection::vec("[a-d]{1,3}", 0..12),
        ) {
            for n in 1..=2 {
                let s = rouge_n(&cand, &refr, n);
                prop_assert!((0.0..=1.0).contains(&s.precision));
                prop_assert!((0.0..=1.0).contains(&s.recall));
                prop_assert!((0.0..=1.0).contains(&s.f1));
            }
            let sentences_c = vec![cand.clone()];
            let sentences_r = vec![refr.clone()];
            for mode in [RougeLMode::Summary, RougeLMode::Corpus] {
                let s = rouge_l(&sentences_c, &sentences_r, mode);
                prop_assert!((0.0..=1.0).contains(&s.f1));
            }
            let m = meteor(&cand, &refr);
            prop_assert!((0.0..=1.0).contains(&m));
        }

        /// Tau of a reversed sequence is the exact negation (when any
        /// ordering signal exists at all).
        #[test]
        fn tau_negates_under_reversal(values in proptest::collection::vec(0u32..6, 2..12)) {
            prop_assume!(values.iter().collect::<std::collections::HashSet<_>>().len() > 1);
            let mut reversed = values.clone();
            reversed.reverse();
            prop_assert_eq!(kendall_tau(&reversed), -kendall_tau(&values));
        }
    }
}
