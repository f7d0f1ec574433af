//! Bibliographic records: parsing, title normalisation, deduplication,
//! research filtering and corpus statistics.
//!
//! Two input formats are supported. The canonical one is line-delimited JSON,
//! one object per line:
//!
//! ```text
//! {"id":"r1","title":"...","abstract":"...","year":2020,"venue":null,"language":"en","labels":["a"],"provenance":{"a":"gold"}}
//! ```
//!
//! Every key except `title` and `year` is optional on input. `labels` without a
//! `provenance` entry are treated as gold. Output always writes all eight keys in
//! the order shown above, so serialized corpora are byte-stable.
//!
//! The second format is BibTeX/BibLaTeX: the entry key becomes the id and the
//! `title`, `year` (or `date`), `abstract`, `booktitle`/`journal` and
//! `language` fields are read.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use biblatex::{Bibliography, ChunksExt};
use chrono::Datelike;
use regex::Regex;
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{line_col, Error, Result};
use crate::taxonomy::Taxonomy;

/// Where a label came from. Variants are ordered by merge priority, lowest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    AncestorPropagation,
    FuzzyMatch,
    KeywordMatch,
    Imported,
    Gold,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::AncestorPropagation => "ancestor-propagation",
            Provenance::FuzzyMatch => "fuzzy-match",
            Provenance::KeywordMatch => "keyword-match",
            Provenance::Imported => "imported",
            Provenance::Gold => "gold",
        }
    }

    /// Labels that survive re-labeling: they were not produced by the heuristic.
    pub fn is_external(self) -> bool {
        matches!(self, Provenance::Imported | Provenance::Gold)
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// At most one provenance per field id; inserts keep the higher-priority one.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelSet(BTreeMap<String, Provenance>);

impl LabelSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, field: impl Into<String>, provenance: Provenance) {
        let slot = self.0.entry(field.into()).or_insert(provenance);
        if provenance > *slot {
            *slot = provenance;
        }
    }

    pub fn union_with(&mut self, other: &LabelSet) {
        for (f, &p) in &other.0 {
            self.insert(f.clone(), p);
        }
    }

    pub fn get(&self, field: &str) -> Option<Provenance> {
        self.0.get(field).copied()
    }

    pub fn contains(&self, field: &str) -> bool {
        self.0.contains_key(field)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Provenance)> {
        self.0.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn retain(&mut self, mut keep: impl FnMut(&str, Provenance) -> bool) {
        self.0.retain(|k, v| keep(k, *v));
    }

    pub fn id_set(&self) -> BTreeSet<String> {
        self.0.keys().cloned().collect()
    }
}

impl<S: Into<String>> FromIterator<(S, Provenance)> for LabelSet {
    fn from_iter<I: IntoIterator<Item = (S, Provenance)>>(iter: I) -> Self {
        let mut set = LabelSet::new();
        for (f, p) in iter {
            set.insert(f, p);
        }
        set
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaperRecord {
    pub id: String,
    pub title: String,
    pub abstract_text: String,
    pub year: i32,
    pub venue: Option<String>,
    pub language: Option<String>,
    pub labels: LabelSet,
}

impl PaperRecord {
    pub fn new(id: impl Into<String>, title: impl Into<String>, year: i32) -> Self {
        PaperRecord {
            id: id.into(),
            title: title.into(),
            abstract_text: String::new(),
            year,
            venue: None,
            language: None,
            labels: LabelSet::new(),
        }
    }

    pub fn with_abstract(mut self, text: impl Into<String>) -> Self {
        self.abstract_text = text.into();
        self
    }

    pub fn with_labels<I, S>(mut self, labels: I, provenance: Provenance) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        for l in labels {
            self.labels.insert(l, provenance);
        }
        self
    }

    pub fn with_language(mut self, language: impl Into<String>) -> Self {
        self.language = Some(language.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordFormat {
    JsonLines,
    Bibtex,
}

impl RecordFormat {
    /// `.bib` files are BibTeX; everything else is read as line-delimited JSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("bib") => RecordFormat::Bibtex,
            _ => RecordFormat::JsonLines,
        }
    }
}

/// A single rejected input entry. `index` is the 1-based entry number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntryError {
    pub index: usize,
    pub id: Option<String>,
    pub message: String,
}

impl fmt::Display for EntryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.id {
            Some(id) => write!(f, "entry {} ({id}): {}", self.index, self.message),
            None => write!(f, "entry {}: {}", self.index, self.message),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParseOutcome {
    pub records: Vec<PaperRecord>,
    pub errors: Vec<EntryError>,
}

#[derive(Serialize, Deserialize)]
struct RecordLine {
    #[serde(default)]
    id: Option<String>,
    #[serde(default)]
    title: Option<String>,
    #[serde(default, rename = "abstract")]
    abstract_text: Option<String>,
    #[serde(default)]
    year: Option<i64>,
    #[serde(default)]
    venue: Option<String>,
    #[serde(default)]
    language: Option<String>,
    #[serde(default)]
    labels: Vec<String>,
    #[serde(default)]
    provenance: BTreeMap<String, Provenance>,
}

fn max_year() -> i32 {
    chrono::Utc::now().year() + 1
}

fn synthesized_id(index: usize) -> String {
    format!("r{index:05}")
}

fn check_record(title: &str, year: i64, max_year: i32) -> std::result::Result<i32, String> {
    if normalize_title(title).is_empty() {
        return Err("title is empty".into());
    }
    if year < 1900 || year > i64::from(max_year) {
        return Err(format!("year {year} outside 1900..={max_year}"));
    }
    Ok(year as i32)
}

/// Parses records, collecting per-entry errors. Only undecodable input aborts.
pub fn parse_records<R: Read>(mut reader: R, format: RecordFormat) -> Result<ParseOutcome> {
    let mut buf = Vec::new();
    reader.read_to_end(&mut buf)?;
    let src = std::str::from_utf8(&buf).map_err(|e| Error::Encoding {
        offset: e.valid_up_to(),
    })?;
    match format {
        RecordFormat::JsonLines => Ok(parse_json_lines(src)),
        RecordFormat::Bibtex => parse_bibtex(src),
    }
}

fn parse_json_lines(src: &str) -> ParseOutcome {
    let max_year = max_year();
    let mut out = ParseOutcome::default();
    let mut index = 0;
    for line in src.lines() {
        if line.trim().is_empty() {
            continue;
        }
        index += 1;
        let rec: RecordLine = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                out.errors.push(EntryError {
                    index,
                    id: None,
                    message: format!("malformed entry: {e}"),
                });
                continue;
            }
        };
        let id = rec.id.clone().unwrap_or_else(|| synthesized_id(index));
        let fail = |message: String| EntryError {
            index,
            id: Some(id.clone()),
            message,
        };
        let Some(title) = rec.title.filter(|t| !t.trim().is_empty()) else {
            out.errors.push(fail("missing title".into()));
            continue;
        };
        let Some(year) = rec.year else {
            out.errors.push(fail("missing year".into()));
            continue;
        };
        let year = match check_record(&title, year, max_year) {
            Ok(y) => y,
            Err(m) => {
                out.errors.push(fail(m));
                continue;
            }
        };
        let mut labels = LabelSet::new();
        for l in rec.labels {
            let p = rec.provenance.get(&l).copied().unwrap_or(Provenance::Gold);
            labels.insert(l, p);
        }
        out.records.push(PaperRecord {
            id,
            title,
            abstract_text: rec.abstract_text.unwrap_or_default(),
            year,
            venue: rec.venue,
            language: rec.language,
            labels,
        });
    }
    out
}

fn parse_bibtex(src: &str) -> Result<ParseOutcome> {
    let bib = Bibliography::parse(src).map_err(|e| {
        let (line, column) = line_col(src, e.span.start);
        Error::Parse {
            line,
            column,
            message: e.kind.to_string(),
        }
    })?;
    let max_year = max_year();
    let mut out = ParseOutcome::default();
    for (i, entry) in bib.iter().enumerate() {
        let index = i + 1;
        let field = |name: &str| {
            entry
                .get(name)
                .map(|c| c.format_verbatim().trim().to_string())
                .filter(|s| !s.is_empty())
        };
        let fail = |message: String| EntryError {
            index,
            id: Some(entry.key.clone()),
            message,
        };
        let Some(title) = field("title") else {
            out.errors.push(fail("missing title".into()));
            continue;
        };
        let year_text = field("year").or_else(|| field("date"));
        let Some(year) = year_text.as_deref().and_then(leading_year) else {
            out.errors.push(fail("missing or unreadable year".into()));
            continue;
        };
        let year = match check_record(&title, year, max_year) {
            Ok(y) => y,
            Err(m) => {
                out.errors.push(fail(m));
                continue;
            }
        };
        out.records.push(PaperRecord {
            id: entry.key.clone(),
            title,
            abstract_text: field("abstract").unwrap_or_default(),
            year,
            venue: field("booktitle")
                .or_else(|| field("journal"))
                .or_else(|| field("journaltitle")),
            language: field("language").or_else(|| field("langid")),
            labels: LabelSet::new(),
        });
    }
    Ok(out)
}

fn leading_year(s: &str) -> Option<i64> {
    let digits: String = s.trim().chars().take_while(char::is_ascii_digit).collect();
    if digits.len() == 4 {
        digits.parse().ok()
    } else {
        None
    }
}

/// Writes records in the canonical line-delimited format.
pub fn write_records<W: Write>(records: &[PaperRecord], mut writer: W) -> Result<()> {
    for r in records {
        let line = RecordLine {
            id: Some(r.id.clone()),
            title: Some(r.title.clone()),
            abstract_text: Some(r.abstract_text.clone()),
            year: Some(i64::from(r.year)),
            venue: r.venue.clone(),
            language: r.language.clone(),
            labels: r.labels.ids().map(String::from).collect(),
            provenance: r.labels.iter().map(|(k, v)| (k.to_string(), v)).collect(),
        };
        serde_json::to_writer(&mut writer, &line)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Lowercases, folds accents, replaces punctuation with spaces and collapses whitespace.
pub fn normalize_title(s: &str) -> String {
    let folded: String = s
        .nfkd()
        .filter(|c| !unicode_normalization::char::is_combining_mark(*c))
        .flat_map(char::to_lowercase)
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    folded.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Merges records sharing a normalised title.
///
/// Within a group, members are ordered by (year, id, title, abstract); the
/// merged record takes the first member's id and title, the earliest year, the
/// first non-empty abstract and the union of all labels. Output is sorted by
/// (year, normalised title), so the result does not depend on input order.
pub fn deduplicate(records: Vec<PaperRecord>) -> Vec<PaperRecord> {
    let mut groups: BTreeMap<String, Vec<PaperRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(normalize_title(&r.title)).or_default().push(r);
    }
    let mut merged: Vec<(i32, String, PaperRecord)> = groups
        .into_iter()
        .map(|(key, mut members)| {
            members.sort_by(|a, b| {
                (a.year, &a.id, &a.title, &a.abstract_text, &a.venue, &a.language)
                    .cmp(&(b.year, &b.id, &b.title, &b.abstract_text, &b.venue, &b.language))
            });
            let mut iter = members.into_iter();
            let mut base = iter.next().expect("groups are non-empty");
            for other in iter {
                if base.abstract_text.is_empty() && !other.abstract_text.is_empty() {
                    base.abstract_text = other.abstract_text;
                }
                base.venue = base.venue.or(other.venue);
                base.language = base.language.or(other.language);
                base.labels.union_with(&other.labels);
            }
            (base.year, key, base)
        })
        .collect();
    merged.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    merged.into_iter().map(|(_, _, r)| r).collect()
}

/// Title patterns of non-research front matter, matched against normalised titles.
pub const DEFAULT_NON_RESEARCH_PATTERNS: &[&str] = &[
    r"^preface\b",
    r"^foreword\b",
    r"^front ?matter\b",
    r"^table of contents$",
    r"^contents$",
    r"^author index$",
    r"^index$",
    r"^proceedings of\b",
    r"^message from\b",
    r"^(organizing|program) committee$",
    r"^introduction to the special issue\b",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    pub non_research_patterns: Vec<String>,
    pub drop_non_english: bool,
    pub drop_all_leaves: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            non_research_patterns: DEFAULT_NON_RESEARCH_PATTERNS
                .iter()
                .map(|s| s.to_string())
                .collect(),
            drop_non_english: true,
            drop_all_leaves: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DropReason {
    NonResearch,
    NonEnglish,
    AllLeaves,
}

#[derive(Debug, Clone, Default)]
pub struct FilterOutcome {
    pub kept: Vec<PaperRecord>,
    pub dropped: Vec<(String, DropReason)>,
}

/// English if the tag is `en`, `eng`, `english` or a regional `en-*` variant.
pub fn is_english_tag(tag: &str) -> bool {
    let t = tag.trim().to_ascii_lowercase();
    matches!(t.as_str(), "en" | "eng" | "english")
        || t.starts_with("en-")
        || t.starts_with("en_")
}

/// Splits records into research articles and dropped ones with a reason each.
pub fn classify_research(
    records: Vec<PaperRecord>,
    taxonomy: &Taxonomy,
    cfg: &FilterConfig,
) -> Result<FilterOutcome> {
    let patterns = cfg
        .non_research_patterns
        .iter()
        .map(|p| Regex::new(p).map_err(|e| Error::Config(format!("bad pattern `{p}`: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    let leaves = taxonomy.leaves();
    let mut out = FilterOutcome::default();
    for r in records {
        let title = normalize_title(&r.title);
        let reason = if patterns.iter().any(|p| p.is_match(&title)) {
            Some(DropReason::NonResearch)
        } else if cfg.drop_non_english
            && r.language.as_deref().is_some_and(|l| !is_english_tag(l))
        {
            Some(DropReason::NonEnglish)
        } else if cfg.drop_all_leaves
            && !leaves.is_empty()
            && leaves.iter().all(|l| r.labels.contains(l))
        {
            Some(DropReason::AllLeaves)
        } else {
            None
        };
        match reason {
            Some(reason) => out.dropped.push((r.id, reason)),
            None => out.kept.push(r),
        }
    }
    Ok(out)
}

/// Drops front matter, tagged non-English records and records labeled with every leaf.
pub fn filter_research(
    records: Vec<PaperRecord>,
    taxonomy: &Taxonomy,
    cfg: &FilterConfig,
) -> Result<Vec<PaperRecord>> {
    classify_research(records, taxonomy, cfg).map(|o| o.kept)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCount {
    pub field: String,
    pub count: u64,
}

/// Means are `None` when their denominator is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_records: usize,
    pub mean_labels_per_record: Option<f64>,
    pub per_class_counts: BTreeMap<String, u64>,
    pub min_class: Option<ClassCount>,
    pub max_class: Option<ClassCount>,
    pub mean_class: Option<f64>,
}

impl CorpusStats {
    pub fn to_text(&self) -> String {
        let fmt_opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.2}"));
        let fmt_class = |c: &Option<ClassCount>| {
            c.as_ref()
                .map_or_else(|| "n/a".to_string(), |c| format!("{} ({})", c.field, c.count))
        };
        let mut s = String::new();
        s.push_str(&format!("records:                 {}\n", self.n_records));
        s.push_str(&format!(
            "mean labels per record:  {}\n",
            fmt_opt(self.mean_labels_per_record)
        ));
        s.push_str(&format!("classes:                 {}\n", self.per_class_counts.len()));
        s.push_str(&format!("mean records per class:  {}\n", fmt_opt(self.mean_class)));
        s.push_str(&format!("most frequent class:     {}\n", fmt_class(&self.max_class)));
        s.push_str(&format!("least frequent class:    {}\n", fmt_class(&self.min_class)));
        s
    }
}

/// Per-class figures cover classes with at least one record; ties pick the smallest id.
pub fn corpus_stats(records: &[PaperRecord]) -> CorpusStats {
    let n = records.len();
    let mut per_class: BTreeMap<String, u64> = BTreeMap::new();
    let mut total_labels = 0usize;
    for r in records {
        total_labels += r.labels.len();
        for id in r.labels.ids() {
            *per_class.entry(id.to_string()).or_default() += 1;
        }
    }
    let class_count = |(f, &c): (&String, &u64)| ClassCount {
        field: f.clone(),
        count: c,
    };
    let max_class = per_class
        .iter()
        .fold(None::<(&String, &u64)>, |best, cur| match best {
            Some(b) if b.1 >= cur.1 => Some(b),
            _ => Some(cur),
        })
        .map(class_count);
    let min_class = per_class
        .iter()
        .fold(None::<(&String, &u64)>, |best, cur| match best {
            Some(b) if b.1 <= cur.1 => Some(b),
            _ => Some(cur),
        })
        .map(class_count);
    let mean_class = if per_class.is_empty() {
        None
    } else {
        Some(per_class.values().sum::<u64>() as f64 / per_class.len() as f64)
    };
    CorpusStats {
        n_records: n,
        mean_labels_per_record: (n > 0).then(|| total_labels as f64 / n as f64),
        per_class_counts: per_class,
        min_class,
        max_class,
        mean_class,
    }
}
