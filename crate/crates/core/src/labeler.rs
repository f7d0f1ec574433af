//! Weak labeling of records with fields of study.
//!
//! A field is assigned to a record when its keywords occur often enough in the
//! title and abstract. Occurrences are counted token-wise: every keyword token
//! must match a consecutive text token within a Levenshtein distance cap, so
//! spelling variants such as "summarisation" still count for "summarization".
//! Counts are summed over a field's keywords, with each text span counted for
//! at most one keyword of the field.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{LabelSet, PaperRecord, Provenance};
use crate::error::{Error, Result};
use crate::eval::LabelMap;
use crate::taxonomy::Taxonomy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMode {
    /// Threshold applies to the summed count over all of a field's keywords.
    PerField,
    /// Threshold applies to each keyword on its own.
    PerKeyword,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatcherConfig {
    pub occurrence_threshold: u32,
    /// Per-token edit-distance cap.
    pub fuzzy_max_distance: u32,
    /// Match whole tokens only. When off, a keyword token may match inside a longer text token.
    pub token_boundary: bool,
    /// Keyword tokens shorter than this (in chars) must match exactly.
    pub fuzzy_min_token_len: usize,
    pub threshold_mode: ThresholdMode,
    pub title_weight: u32,
    pub abstract_weight: u32,
}

impl Default for MatcherConfig {
    fn default() -> Self {
        MatcherConfig {
            occurrence_threshold: 2,
            fuzzy_max_distance: 1,
            token_boundary: true,
            fuzzy_min_token_len: 4,
            threshold_mode: ThresholdMode::PerField,
            title_weight: 1,
            abstract_weight: 1,
        }
    }
}

impl MatcherConfig {
    pub fn exact() -> Self {
        MatcherConfig {
            fuzzy_max_distance: 0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.occurrence_threshold < 1 {
            return Err(Error::Config("occurrence_threshold must be >= 1".into()));
        }
        Ok(())
    }
}

/// One aggregated keyword hit for a record and field.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MatchReport {
    pub record_id: String,
    pub field_id: String,
    pub keyword: String,
    pub surface: String,
    pub title_count: u32,
    pub abstract_count: u32,
    pub distance: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Occurrence {
    /// Index of the first matched text token.
    pub token_index: usize,
    /// Matched text tokens, lowercased and joined by single spaces.
    pub surface: String,
    /// Largest per-token edit distance within the occurrence.
    pub distance: u32,
}

/// Lowercased runs of alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Smallest edit distance between `pattern` and any substring of `text`.
fn substring_distance(pattern: &[char], text: &[char]) -> usize {
    let mut prev: Vec<usize> = (0..=pattern.len()).collect();
    let mut best = prev[pattern.len()];
    for &tc in text {
        let mut cur = vec![0; pattern.len() + 1];
        for (i, &pc) in pattern.iter().enumerate() {
            let sub = prev[i] + usize::from(pc != tc);
            cur[i + 1] = sub.min(prev[i + 1] + 1).min(cur[i] + 1);
        }
        best = best.min(cur[pattern.len()]);
        prev = cur;
    }
    best
}

fn token_distance(keyword: &str, text: &str, cfg: &MatcherConfig) -> Option<u32> {
    let kw_len = keyword.chars().count();
    let cap = if kw_len < cfg.fuzzy_min_token_len {
        0
    } else {
        cfg.fuzzy_max_distance as usize
    };
    let d = if cfg.token_boundary {
        if keyword == text {
            return Some(0);
        }
        if cap == 0 || kw_len.abs_diff(text.chars().count()) > cap {
            return None;
        }
        strsim::levenshtein(keyword, text)
    } else {
        let k: Vec<char> = keyword.chars().collect();
        let t: Vec<char> = text.chars().collect();
        substring_distance(&k, &t)
    };
    (d <= cap).then_some(d as u32)
}

/// Largest per-token distance when `keyword_tokens` matches `tokens` starting at `start`.
fn match_at(tokens: &[String], start: usize, keyword_tokens: &[String], cfg: &MatcherConfig) -> Option<u32> {
    let window = tokens.get(start..start + keyword_tokens.len())?;
    let mut worst = 0;
    for (kw, tok) in keyword_tokens.iter().zip(window) {
        worst = worst.max(token_distance(kw, tok, cfg)?);
    }
    Some(worst)
}

/// Non-overlapping keyword occurrences in an already tokenised text, scanned left to right.
pub fn find_occurrences(tokens: &[String], keyword_tokens: &[String], cfg: &MatcherConfig) -> Vec<Occurrence> {
    let k = keyword_tokens.len();
    let mut out = Vec::new();
    if k == 0 {
        return out;
    }
    let mut i = 0;
    while i + k <= tokens.len() {
        match match_at(tokens, i, keyword_tokens, cfg) {
            Some(distance) => {
                out.push(Occurrence {
                    token_index: i,
                    surface: tokens[i..i + k].join(" "),
                    distance,
                });
                i += k;
            }
            None => i += 1,
        }
    }
    out
}

/// Occurrences of a field's keywords in one text, as `(keyword, occurrence)`.
///
/// Spans never overlap, so nested or near-identical keywords ("translation",
/// "machine translation") share a single mention instead of counting it twice.
/// Candidates are taken by start position, longest span first, then smallest
/// distance and keyword order.
fn field_occurrences<'k>(
    tokens: &[String],
    keywords: &[(&'k str, Vec<String>)],
    cfg: &MatcherConfig,
) -> Vec<(&'k str, Occurrence)> {
    let mut candidates: Vec<(usize, usize, u32, &'k str)> = Vec::new();
    for (kw, kw_tokens) in keywords {
        if kw_tokens.is_empty() {
            continue;
        }
        for start in 0..tokens.len() {
            if let Some(d) = match_at(tokens, start, kw_tokens, cfg) {
                candidates.push((start, kw_tokens.len(), d, kw));
            }
        }
    }
    candidates.sort_by(|a, b| (a.0, b.1, a.2, a.3).cmp(&(b.0, a.1, b.2, b.3)));
    let mut out = Vec::new();
    let mut free_from = 0;
    for (start, len, distance, kw) in candidates {
        if start < free_from {
            continue;
        }
        free_from = start + len;
        out.push((
            kw,
            Occurrence {
                token_index: start,
                surface: tokens[start..start + len].join(" "),
                distance,
            },
        ));
    }
    out
}

/// Counts fuzzy occurrences of `keyword` in `text`.
pub fn fuzzy_match_count(text: &str, keyword: &str, cfg: &MatcherConfig) -> Vec<Occurrence> {
    find_occurrences(&tokenize(text), &tokenize(keyword), cfg)
}

/// Heuristic labels for one record, with a report for every contributing match.
pub fn keyword_label(
    record: &PaperRecord,
    taxonomy: &Taxonomy,
    cfg: &MatcherConfig,
) -> (LabelSet, Vec<MatchReport>) {
    let title = tokenize(&record.title);
    let abstract_tokens = tokenize(&record.abstract_text);
    let mut labels = LabelSet::new();
    let mut reports = Vec::new();

    for field in taxonomy.nodes() {
        let keywords: Vec<(&str, Vec<String>)> = field
            .keywords
            .iter()
            .map(String::as_str)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(|kw| (kw, tokenize(kw)))
            .collect();
        // (keyword, surface, distance) -> (title, abstract)
        let mut hits: BTreeMap<(&str, String, u32), (u32, u32)> = BTreeMap::new();
        for (kw, occ) in field_occurrences(&title, &keywords, cfg) {
            hits.entry((kw, occ.surface, occ.distance)).or_default().0 += 1;
        }
        for (kw, occ) in field_occurrences(&abstract_tokens, &keywords, cfg) {
            hits.entry((kw, occ.surface, occ.distance)).or_default().1 += 1;
        }
        if hits.is_empty() {
            continue;
        }
        let weighted = |(t, a): (u32, u32)| t * cfg.title_weight + a * cfg.abstract_weight;
        let contributing: Vec<_> = match cfg.threshold_mode {
            ThresholdMode::PerField => {
                let total: u32 = hits.values().map(|&c| weighted(c)).sum();
                if total >= cfg.occurrence_threshold {
                    hits.into_iter().collect()
                } else {
                    Vec::new()
                }
            }
            ThresholdMode::PerKeyword => {
                let mut per_kw: BTreeMap<&str, u32> = BTreeMap::new();
                for ((kw, _, _), &c) in &hits {
                    *per_kw.entry(kw).or_default() += weighted(c);
                }
                hits.into_iter()
                    .filter(|((kw, _, _), _)| per_kw[kw] >= cfg.occurrence_threshold)
                    .collect()
            }
        };
        if contributing.is_empty() {
            continue;
        }
        let exact = contributing.iter().all(|((_, _, d), _)| *d == 0);
        labels.insert(
            field.id.clone(),
            if exact {
                Provenance::KeywordMatch
            } else {
                Provenance::FuzzyMatch
            },
        );
        for ((kw, surface, distance), (t, a)) in contributing {
            reports.push(MatchReport {
                record_id: record.id.clone(),
                field_id: field.id.clone(),
                keyword: kw.to_string(),
                surface,
                title_count: t,
                abstract_count: a,
                distance,
            });
        }
    }
    (labels, reports)
}

/// Adds every ancestor of every labeled field with provenance `ancestor-propagation`.
pub fn propagate_ancestors(labels: &LabelSet, taxonomy: &Taxonomy) -> Result<LabelSet> {
    let mut out = labels.clone();
    for id in labels.ids() {
        for a in taxonomy.ancestors(id)? {
            out.insert(a, Provenance::AncestorPropagation);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Default)]
pub struct LabeledCorpus {
    pub records: Vec<PaperRecord>,
    pub reports: Vec<MatchReport>,
}

/// Re-labels every record: gold and imported labels are kept, earlier heuristic
/// labels are replaced by fresh ones. Record order is preserved.
pub fn label_corpus(
    records: Vec<PaperRecord>,
    taxonomy: &Taxonomy,
    cfg: &MatcherConfig,
    propagate: bool,
) -> Result<LabeledCorpus> {
    cfg.validate()?;
    let labeled: Vec<(PaperRecord, Vec<MatchReport>)> = records
        .into_par_iter()
        .map(|mut r| {
            r.labels.retain(|_, p| p.is_external());
            if let Some(bad) = r.labels.ids().find(|id| !taxonomy.contains(id)) {
                return Err(Error::UnknownField(bad.to_string()));
            }
            let (heuristic, reports) = keyword_label(&r, taxonomy, cfg);
            r.labels.union_with(&heuristic);
            if propagate {
                r.labels = propagate_ancestors(&r.labels, taxonomy)?;
            }
            Ok((r, reports))
        })
        .collect::<Result<_>>()?;
    let mut out = LabeledCorpus::default();
    for (r, reports) in labeled {
        out.records.push(r);
        out.reports.extend(reports);
    }
    Ok(out)
}

#[derive(Deserialize)]
struct PredictionLine {
    id: String,
    #[serde(default)]
    labels: Vec<String>,
}

/// Reads `{"id": ..., "labels": [...]}` lines; other keys are ignored, so a
/// labeled corpus file is also accepted. Repeated ids must carry identical sets.
pub fn parse_label_map<R: Read>(mut reader: R) -> Result<LabelMap> {
    let mut buf = Vec::new();
    reader.read_to_end(&mut buf)?;
    let src = std::str::from_utf8(&buf).map_err(|e| Error::Encoding {
        offset: e.valid_up_to(),
    })?;
    let mut map = LabelMap::new();
    let mut conflicts = BTreeSet::new();
    for (i, line) in src.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let p: PredictionLine = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: i + 1,
            column: e.column(),
            message: e.to_string(),
        })?;
        let set: BTreeSet<String> = p.labels.into_iter().collect();
        match map.get(&p.id) {
            Some(existing) if *existing != set => {
                conflicts.insert(p.id);
            }
            Some(_) => {}
            None => {
                map.insert(p.id, set);
            }
        }
    }
    if conflicts.is_empty() {
        Ok(map)
    } else {
        Err(Error::ConflictingPredictions(conflicts.into_iter().collect()))
    }
}

#[derive(Debug, Clone, Default)]
pub struct ImportOutcome {
    pub records: Vec<PaperRecord>,
    /// Prediction ids with no matching record.
    pub unmatched: Vec<String>,
}

/// Extends record labels with `imported` entries from a prediction map.
pub fn import_predictions(records: Vec<PaperRecord>, predictions: &LabelMap) -> ImportOutcome {
    let mut used = BTreeSet::new();
    let records = records
        .into_iter()
        .map(|mut r| {
            if let Some(fields) = predictions.get(&r.id) {
                used.insert(r.id.clone());
                for f in fields {
                    r.labels.insert(f.clone(), Provenance::Imported);
                }
            }
            r
        })
        .collect();
    let unmatched = predictions
        .keys()
        .filter(|id| !used.contains(*id))
        .cloned()
        .collect();
    ImportOutcome { records, unmatched }
}

pub fn import_predictions_from<R: Read>(records: Vec<PaperRecord>, stream: R) -> Result<ImportOutcome> {
    let map = parse_label_map(stream)?;
    Ok(import_predictions(records, &map))
}

pub fn write_match_reports<W: Write>(reports: &[MatchReport], writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(["record_id", "field_id", "keyword", "surface", "title_count", "abstract_count", "distance"])?;
    for r in reports {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
