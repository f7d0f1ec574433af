//! The pipeline stages. Each command reads its inputs, writes its outputs into
//! the configured directory and finishes with a manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use fieldscope_core::corpus::{
    classify_research, corpus_stats, deduplicate, parse_records, write_records, DropReason, EntryError,
    RecordFormat,
};
use fieldscope_core::eval::EvalReport;
use fieldscope_core::labeler::{import_predictions, label_corpus, parse_label_map, write_match_reports};
use fieldscope_core::plot::{lifecycle_svg, matrix_svg};
use fieldscope_core::trends::lifecycle::write_lifecycle_csv;
use fieldscope_core::trends::matrix::write_matrix_csv;
use fieldscope_core::trends::{
    annual_counts, growth_share_matrix, lifecycle_components, lifecycle_points_with_base, rank_totals,
    read_counts, series_totals, write_ranking_csv, write_series_csv,
};
use fieldscope_core::{CorpusStats, PaperRecord, Provenance, Taxonomy};
use serde::Serialize;

use crate::config::RunConfig;
use crate::manifest::Manifest;

#[derive(Debug, Clone, Serialize)]
pub struct IngestStats {
    pub input_records: usize,
    pub rejected_entries: usize,
    pub deduplicated_records: usize,
    pub merged_duplicates: usize,
    pub stats: CorpusStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct DroppedRecord {
    pub id: String,
    pub reason: DropReason,
}

#[derive(Debug, Clone, Serialize)]
pub struct LabelReport {
    pub input_records: usize,
    pub output_records: usize,
    pub labels_by_provenance: BTreeMap<Provenance, usize>,
    pub dropped: Vec<DroppedRecord>,
    pub unmatched_predictions: Vec<String>,
}

fn records_from(data: &[u8], path: &Path, allow_invalid: bool) -> Result<(Vec<PaperRecord>, Vec<EntryError>)> {
    let outcome = parse_records(data, RecordFormat::from_path(path))
        .with_context(|| format!("cannot parse {}", path.display()))?;
    if !outcome.errors.is_empty() && !allow_invalid {
        let mut msg = format!("{} invalid entries in {}:", outcome.errors.len(), path.display());
        for e in outcome.errors.iter().take(20) {
            let _ = write!(msg, "\n  - {e}");
        }
        if outcome.errors.len() > 20 {
            let _ = write!(msg, "\n  - ... and {} more", outcome.errors.len() - 20);
        }
        bail!(msg);
    }
    Ok((outcome.records, outcome.errors))
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

fn check_known_labels(records: &[PaperRecord], taxonomy: &Taxonomy) -> Result<()> {
    let unknown: std::collections::BTreeSet<&str> = records
        .iter()
        .flat_map(|r| r.labels.ids())
        .filter(|id| !taxonomy.contains(id))
        .collect();
    if !unknown.is_empty() {
        bail!(
            "labels not in the taxonomy: {}",
            unknown.into_iter().collect::<Vec<_>>().join(", ")
        );
    }
    Ok(())
}

/// Parses and deduplicates a raw corpus into `corpus.jsonl` plus ingest statistics.
pub fn ingest(cfg: &RunConfig) -> Result<()> {
    cfg.require(&[("corpus", &cfg.corpus)])?;
    cfg.prepare_out_dir()?;
    let corpus = cfg.corpus.as_deref().expect("checked");
    let mut manifest = Manifest::new("ingest", cfg);
    let data = manifest.read_input("corpus", corpus)?;
    let (records, errors) = records_from(&data, corpus, cfg.allow_invalid)?;

    let input_records = records.len();
    let deduped = deduplicate(records);
    let stats = IngestStats {
        input_records,
        rejected_entries: errors.len(),
        deduplicated_records: deduped.len(),
        merged_duplicates: input_records - deduped.len(),
        stats: corpus_stats(&deduped),
    };

    let out = &cfg.out_dir;
    let mut buf = Vec::new();
    write_records(&deduped, &mut buf)?;
    manifest.write_output(out, "corpus.jsonl", &buf)?;
    manifest.write_output(out, "ingest_stats.json", &json_bytes(&stats)?)?;
    let mut text = format!(
        "input records:           {}\nrejected entries:        {}\nafter deduplication:     {}\n",
        stats.input_records, stats.rejected_entries, stats.deduplicated_records
    );
    text.push_str(&stats.stats.to_text());
    manifest.write_output(out, "ingest_stats.txt", text.as_bytes())?;
    if !errors.is_empty() {
        let mut log = Vec::new();
        for e in &errors {
            serde_json::to_writer(&mut log, e)?;
            log.push(b'\n');
        }
        manifest.write_output(out, "ingest_errors.jsonl", &log)?;
    }
    manifest.finish(out)?;
    Ok(())
}

/// Weak-labels an ingested corpus, optionally importing predictions, then filters it.
pub fn label(cfg: &RunConfig) -> Result<()> {
    cfg.require(&[("corpus", &cfg.corpus)])?;
    if let Some(p) = &cfg.predictions {
        cfg.require(&[("predictions", &Some(p.clone()))])?;
    }
    cfg.matcher.validate()?;
    let taxonomy = cfg.load_taxonomy()?;
    cfg.prepare_out_dir()?;
    let corpus = cfg.corpus.as_deref().expect("checked");
    let mut manifest = Manifest::new("label", cfg);
    manifest.record_taxonomy(cfg)?;
    let data = manifest.read_input("corpus", corpus)?;
    let (mut records, _) = records_from(&data, corpus, cfg.allow_invalid)?;
    let input_records = records.len();

    let mut unmatched = Vec::new();
    if let Some(p) = &cfg.predictions {
        let data = manifest.read_input("predictions", p)?;
        let predictions = parse_label_map(data.as_slice()).with_context(|| format!("predictions {}", p.display()))?;
        let outcome = import_predictions(records, &predictions);
        records = outcome.records;
        unmatched = outcome.unmatched;
    }
    check_known_labels(&records, &taxonomy)?;

    let labeled = label_corpus(records, &taxonomy, &cfg.matcher, cfg.propagate_labels)?;
    let (kept, dropped) = if cfg.apply_filter {
        let outcome = classify_research(labeled.records, &taxonomy, &cfg.filter)?;
        (outcome.kept, outcome.dropped)
    } else {
        (labeled.records, Vec::new())
    };
    let dropped_ids: std::collections::BTreeSet<&str> = dropped.iter().map(|(id, _)| id.as_str()).collect();
    let reports: Vec<_> = labeled
        .reports
        .into_iter()
        .filter(|r| !dropped_ids.contains(r.record_id.as_str()))
        .collect();

    let mut by_provenance = BTreeMap::new();
    for r in &kept {
        for (_, p) in r.labels.iter() {
            *by_provenance.entry(p).or_insert(0) += 1;
        }
    }
    let report = LabelReport {
        input_records,
        output_records: kept.len(),
        labels_by_provenance: by_provenance,
        dropped: dropped
            .into_iter()
            .map(|(id, reason)| DroppedRecord { id, reason })
            .collect(),
        unmatched_predictions: unmatched,
    };

    let out = &cfg.out_dir;
    let mut buf = Vec::new();
    write_records(&kept, &mut buf)?;
    manifest.write_output(out, "labeled.jsonl", &buf)?;
    let mut buf = Vec::new();
    write_match_reports(&reports, &mut buf)?;
    manifest.write_output(out, "matches.csv", &buf)?;
    manifest.write_output(out, "label_report.json", &json_bytes(&report)?)?;
    manifest.finish(out)?;
    Ok(())
}

/// Micro and per-class precision, recall and F1 of predictions against gold labels.
pub fn eval(cfg: &RunConfig) -> Result<()> {
    cfg.require(&[("gold", &cfg.gold), ("predictions", &cfg.predictions)])?;
    cfg.prepare_out_dir()?;
    let mut manifest = Manifest::new("eval", cfg);
    let gold_path = cfg.gold.as_deref().expect("checked");
    let pred_path = cfg.predictions.as_deref().expect("checked");
    let gold = parse_label_map(manifest.read_input("gold", gold_path)?.as_slice())
        .with_context(|| format!("gold labels {}", gold_path.display()))?;
    let pred = parse_label_map(manifest.read_input("predictions", pred_path)?.as_slice())
        .with_context(|| format!("predictions {}", pred_path.display()))?;
    let report = EvalReport::compute(&gold, &pred)?;

    let out = &cfg.out_dir;
    manifest.write_output(out, "eval.txt", report.to_text().as_bytes())?;
    manifest.write_output(out, "eval.json", &json_bytes(&report)?)?;
    manifest.finish(out)?;
    Ok(())
}

/// Annual series, life-cycle positions, the growth-share matrix and their plots.
pub fn trends(cfg: &RunConfig) -> Result<()> {
    cfg.require(&[("corpus", &cfg.corpus)])?;
    let taxonomy = cfg.load_taxonomy()?;
    cfg.window.validate()?;
    cfg.prepare_out_dir()?;
    let corpus = cfg.corpus.as_deref().expect("checked");
    let mut manifest = Manifest::new("trends", cfg);
    manifest.record_taxonomy(cfg)?;
    let data = manifest.read_input("corpus", corpus)?;
    let (records, _) = records_from(&data, corpus, cfg.allow_invalid)?;
    check_known_labels(&records, &taxonomy)?;

    let series = annual_counts(&records, &taxonomy, &cfg.window, cfg.propagate_counts)?;
    let components = lifecycle_components(&series, &cfg.window, cfg.growth)?;
    let lifecycle = lifecycle_points_with_base(&components, cfg.log_base)?;
    let matrix = growth_share_matrix(&series, &cfg.window, cfg.growth, cfg.split, &cfg.yj_bounds())?;
    let ranking: Vec<_> = rank_totals(&series_totals(&series, None))
        .into_iter()
        .filter(|(_, c)| *c > 0)
        .collect();

    let out = &cfg.out_dir;
    let mut buf = Vec::new();
    write_series_csv(&series, &mut buf)?;
    manifest.write_output(out, "series.csv", &buf)?;
    let mut buf = Vec::new();
    write_ranking_csv(&ranking, &mut buf)?;
    manifest.write_output(out, "ranking.csv", &buf)?;
    let mut buf = Vec::new();
    write_matrix_csv(&matrix.points, &mut buf)?;
    manifest.write_output(out, "matrix.csv", &buf)?;
    let mut buf = Vec::new();
    write_lifecycle_csv(&lifecycle, &mut buf)?;
    manifest.write_output(out, "lifecycle.csv", &buf)?;
    manifest.write_output(out, "matrix.svg", matrix_svg(&matrix).as_bytes())?;
    manifest.write_output(out, "lifecycle.svg", lifecycle_svg(&lifecycle).as_bytes())?;
    let params = serde_json::json!({
        "growth_lambda": matrix.growth_params.lambda,
        "total_lambda": matrix.total_params.lambda,
        "growth_split": matrix.growth_split,
        "total_split": matrix.total_split,
    });
    manifest.write_output(out, "matrix_params.json", &json_bytes(&params)?)?;
    manifest.finish(out)?;
    Ok(())
}

/// Ranks fields of a pre-aggregated counts file. Returns the ranking it wrote.
pub fn rank(cfg: &RunConfig) -> Result<Vec<(String, u64)>> {
    cfg.require(&[("counts", &cfg.counts)])?;
    cfg.prepare_out_dir()?;
    let counts_path = cfg.counts.as_deref().expect("checked");
    let mut manifest = Manifest::new("rank", cfg);
    let data = manifest.read_input("counts", counts_path)?;
    let totals = read_counts(data.as_slice()).with_context(|| format!("counts {}", counts_path.display()))?;
    let mut ranking = rank_totals(&totals);
    if let Some(n) = cfg.top {
        ranking.truncate(n);
    }
    let mut buf = Vec::new();
    write_ranking_csv(&ranking, &mut buf)?;
    manifest.write_output(&cfg.out_dir, "ranking.csv", &buf)?;
    manifest.finish(&cfg.out_dir)?;
    Ok(ranking)
}
