//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use fieldscope_core::corpus::{classify_research, deduplicate, parse_records, DropReason, RecordFormat};
use fieldscope_core::eval::{micro_prf, per_class_prf};
use fieldscope_core::labeler::{fuzzy_match_count, keyword_label, label_corpus, tokenize};
use fieldscope_core::trends::lifecycle::{lifecycle_components, lifecycle_points, lifecycle_points_with_base, LogBase};
use fieldscope_core::trends::{
    annual_counts, classify_axes, fit_lambda, growth_share_matrix, yeo_johnson, GrowthFormula, SplitRule,
};
use fieldscope_core::{
    FieldOfStudy, FilterConfig, LabelMap, MatcherConfig, PaperRecord, Provenance, Quadrant, Taxonomy, WindowSpec,
    YjParams,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, LogNormal, Normal, Uniform};

type Outcome = Result<String, String>;

macro_rules! check {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn corpus_fixture() -> PathBuf {
    workspace_root().join("crates/core/tests/fixtures/corpus200.jsonl")
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("{what} took {elapsed:?}, limit {limit:?}"))
    }
}

// ---------------------------------------------------------------------------
// 1. Yeo-Johnson transform

fn yeo_johnson_correctness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let dist = Uniform::new_inclusive(-1000.0, 1000.0);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let y: f64 = dist.sample(&mut rng);
        worst = worst.max((yeo_johnson(y, 1.0) - y).abs());
    }
    check!(worst <= 1e-12, "identity error {worst:e}");

    let mut cont = 0.0f64;
    for i in 0..=200 {
        let y = i as f64 * 0.5;
        for l in [1e-8, -1e-8] {
            cont = cont.max((yeo_johnson(y, l) - (y + 1.0).ln()).abs());
            cont = cont.max((yeo_johnson(-y, 2.0 + l) + (y + 1.0).ln()).abs());
        }
    }
    check!(cont <= 1e-6, "continuity error {cont:e}");

    let ys: Vec<f64> = (0..100).map(|i| -50.0 + i as f64 * (100.0 / 99.0)).collect();
    let lambdas: Vec<f64> = (0..21).map(|j| -5.0 + 0.5 * j as f64).collect();
    for &l in &lambdas {
        for w in ys.windows(2) {
            let (a, b) = (yeo_johnson(w[0], l), yeo_johnson(w[1], l));
            check!(a < b, "not strictly increasing at lambda {l}: psi({}) = {a}, psi({}) = {b}", w[0], w[1]);
        }
    }
    within(start.elapsed(), Duration::from_secs(1), "criterion 1")?;
    Ok(format!("identity max err {worst:.1e}, continuity max err {cont:.1e}, 100x21 grid monotone"))
}

// ---------------------------------------------------------------------------
// 2. Lambda fitting

/// Transform and profile log-likelihood written out directly from their definitions.
fn oracle_psi(y: f64, l: f64) -> f64 {
    if y >= 0.0 {
        if l == 0.0 {
            (y + 1.0).ln()
        } else {
            ((y + 1.0).powf(l) - 1.0) / l
        }
    } else if l == 2.0 {
        -(1.0 - y).ln()
    } else {
        -((1.0 - y).powf(2.0 - l) - 1.0) / (2.0 - l)
    }
}

fn oracle_loglik(data: &[f64], l: f64) -> f64 {
    let m = data.len() as f64;
    let t: Vec<f64> = data.iter().map(|&y| oracle_psi(y, l)).collect();
    let mean = t.iter().sum::<f64>() / m;
    let var = t.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m;
    let jac: f64 = data.iter().map(|&y| y.signum() * (y.abs() + 1.0).ln()).sum();
    -m / 2.0 * var.ln() + (l - 1.0) * jac
}

fn grid_oracle(data: &[f64]) -> f64 {
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 0..=10_000 {
        let l = -5.0 + i as f64 * 1e-3;
        let v = oracle_loglik(data, l);
        if v > best.0 {
            best = (v, l);
        }
    }
    best.1
}

fn seeded_dataset(rng: &mut ChaCha8Rng, i: usize) -> Vec<f64> {
    let m = rng.gen_range(20..=80);
    match i % 5 {
        0 => (0..m).map(|_| LogNormal::new(1.0, 0.8).unwrap().sample(rng)).collect(),
        1 => (0..m).map(|_| Exp::new(0.3).unwrap().sample(rng)).collect(),
        2 => (0..m).map(|_| Normal::new(2.0, 3.0).unwrap().sample(rng)).collect(),
        3 => (0..m).map(|_| rng.gen_range(0..400) as f64).collect(),
        _ => (0..m).map(|_| -LogNormal::new(0.5, 0.6).unwrap().sample(rng)).collect(),
    }
}

fn lambda_fitting() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let datasets: Vec<Vec<f64>> = (0..50).map(|i| seeded_dataset(&mut rng, i)).collect();
    let start = Instant::now();
    let fitted: Vec<f64> = datasets
        .iter()
        .map(|d| fit_lambda(d, &YjParams::default()).map(|p| p.lambda))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let normal = Normal::new(0.0, 1.0).unwrap();
    let sample: Vec<f64> = (0..2000).map(|_| normal.sample(&mut rng)).collect();
    let normal_lambda = fit_lambda(&sample, &YjParams::default()).map_err(|e| e.to_string())?.lambda;
    let fit_time = start.elapsed();

    let mut worst = 0.0f64;
    for (d, &l) in datasets.iter().zip(&fitted) {
        let oracle = grid_oracle(d);
        let diff = (oracle - l).abs();
        check!(diff <= 2e-3, "fit {l} vs grid {oracle}");
        worst = worst.max(diff);
    }
    check!((0.75..=1.25).contains(&normal_lambda), "standard normal lambda {normal_lambda}");
    within(fit_time, Duration::from_secs(10), "criterion 2 fitting")?;
    Ok(format!(
        "max |fit - grid| {worst:.1e} over 50 datasets, normal-sample lambda {normal_lambda:.4}, fits {fit_time:.2?}"
    ))
}

// ---------------------------------------------------------------------------
// 3. Life-cycle positions

fn three_field_corpus() -> (Taxonomy, Vec<PaperRecord>, WindowSpec) {
    let taxonomy = Taxonomy::new(
        vec![
            FieldOfStudy::new("alpha", "Alpha", ["alpha"]),
            FieldOfStudy::new("beta", "Beta", ["beta"]),
            FieldOfStudy::new("gamma", "Gamma", ["gamma"]),
        ],
        Vec::new(),
    );
    let window = WindowSpec::new(2022, 5, 2000).unwrap();
    // (field, year, papers)
    let plan: &[(&str, i32, usize)] = &[
        ("alpha", 2003, 6),
        ("alpha", 2018, 2),
        ("alpha", 2020, 3),
        ("alpha", 2022, 9),
        ("beta", 2010, 20),
        ("beta", 2018, 8),
        ("beta", 2021, 5),
        ("beta", 2022, 4),
        ("gamma", 2016, 1),
        ("gamma", 2018, 3),
        ("gamma", 2019, 2),
        ("gamma", 2022, 3),
    ];
    let mut records = Vec::new();
    for &(field, year, n) in plan {
        for i in 0..n {
            records.push(PaperRecord::new(format!("{field}-{year}-{i}"), format!("{field} {year} {i}"), year).with_labels([field], Provenance::Gold));
        }
    }
    (taxonomy, records, window)
}

struct Expected {
    g: f64,
    h: f64,
    k: f64,
    x: f64,
    x_norm: f64,
    y: f64,
}

fn brute_force_lifecycle(records: &[PaperRecord], window: &WindowSpec, fields: &[&str]) -> BTreeMap<String, Expected> {
    let (t, n) = (window.end_year, window.length as i32);
    let count = |f: &str, pred: &dyn Fn(i32) -> bool| {
        records.iter().filter(|r| r.labels.contains(f) && pred(r.year)).count() as f64
    };
    let mut rate = BTreeMap::new();
    let mut in_window = BTreeMap::new();
    let mut all_time = BTreeMap::new();
    for &f in fields {
        let c_start = count(f, &|y| y == t - n + 1);
        let c_end = count(f, &|y| y == t);
        rate.insert(f, (c_end - c_start) / c_start.max(1.0));
        in_window.insert(f, count(f, &|y| y > t - n && y <= t));
        all_time.insert(f, count(f, &|y| y >= window.observation_start && y <= t));
    }
    let window_all: f64 = in_window.values().sum();
    let (rmin, rmax) = rate.values().fold((f64::MAX, f64::MIN), |(a, b), &r| (a.min(r), b.max(r)));
    let mut xs = BTreeMap::new();
    let mut comps = BTreeMap::new();
    for &f in fields {
        let g = 1e-10 + (rate[f] - rmin) / (rmax - rmin) * (1.0 - 1e-10);
        let h = (in_window[f] / all_time[f]).max(1e-10);
        let k = (in_window[f] / window_all).max(1e-10);
        let x = ((1.0 / g) * (1.0 / h) * k).ln();
        xs.insert(f, x);
        comps.insert(f, (g, h, k, x));
    }
    let (xmin, xmax) = xs.values().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
    comps
        .into_iter()
        .map(|(f, (g, h, k, x))| {
            let x_norm = -5.0 + 10.0 * (x - xmin) / (xmax - xmin);
            let y = 1.0 / (1.0 + (-x_norm).exp());
            (f.to_string(), Expected { g, h, k, x, x_norm, y })
        })
        .collect()
}

fn lifecycle_positions() -> Outcome {
    let (taxonomy, records, window) = three_field_corpus();
    let series = annual_counts(&records, &taxonomy, &window, false).map_err(|e| e.to_string())?;
    let comps = lifecycle_components(&series, &window, GrowthFormula::Relative).map_err(|e| e.to_string())?;
    let points = lifecycle_points(&comps).map_err(|e| e.to_string())?;
    let expected = brute_force_lifecycle(&records, &window, &["alpha", "beta", "gamma"]);
    check!(points.len() == 3, "expected 3 points, got {}", points.len());
    let mut worst = 0.0f64;
    for p in &points {
        let e = &expected[&p.field_id];
        for (got, want, what) in [
            (p.g, e.g, "g"),
            (p.h, e.h, "h"),
            (p.k, e.k, "k"),
            (p.x, e.x, "x"),
            (p.x_norm, e.x_norm, "x_norm"),
            (p.y, e.y, "y"),
        ] {
            let d = (got - want).abs();
            check!(d <= 1e-9, "{} {what}: got {got}, want {want}", p.field_id);
            worst = worst.max(d);
        }
    }
    let low = 1.0 / (1.0 + 5f64.exp());
    let high = 1.0 / (1.0 + (-5f64).exp());
    let ymin = points.iter().map(|p| p.y).fold(f64::MAX, f64::min);
    let ymax = points.iter().map(|p| p.y).fold(f64::MIN, f64::max);
    check!((ymin - low).abs() <= 1e-9, "min y {ymin} vs {low}");
    check!((ymax - high).abs() <= 1e-9, "max y {ymax} vs {high}");

    let ten = lifecycle_points_with_base(&comps, LogBase::Ten).map_err(|e| e.to_string())?;
    for (a, b) in points.iter().zip(&ten) {
        check!((a.x_norm - b.x_norm).abs() <= 1e-9, "x_norm moved under log10 for {}", a.field_id);
        check!((a.y - b.y).abs() <= 1e-9, "y moved under log10 for {}", a.field_id);
    }
    Ok(format!("3 fields match brute force (max err {worst:.1e}); extremes at y = 1/(1+e^-/+5); log10 invariant"))
}

// ---------------------------------------------------------------------------
// 4. Growth-share quadrants

/// Quadrants from raw values by rank: with distinct values, "above the median"
/// is the top half of the ranking on each axis.
fn median_oracle(growth: &[f64], totals: &[f64]) -> Vec<Quadrant> {
    let above = |v: &[f64]| {
        let mut sorted = v.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let med = if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
        v.iter().map(|&x| x > med).collect::<Vec<_>>()
    };
    let (g, t) = (above(growth), above(totals));
    g.into_iter().zip(t).map(|(g, t)| Quadrant::from_split(g, t)).collect()
}

fn growth_share_quadrants() -> Outcome {
    let window = WindowSpec::new(2022, 5, 2000).unwrap();
    let taxonomy = Taxonomy::new(
        ["star", "anchor", "rising", "quiet"].iter().map(|id| FieldOfStudy::new(*id, *id, [*id])).collect(),
        Vec::new(),
    );
    // per-year window counts 2018..=2022
    let plan: &[(&str, [usize; 5])] = &[
        ("star", [10, 14, 20, 28, 40]),
        ("anchor", [30, 31, 30, 29, 30]),
        ("rising", [1, 2, 3, 4, 6]),
        ("quiet", [3, 3, 2, 2, 2]),
    ];
    let build = |scale: usize| {
        let mut records = Vec::new();
        for (field, counts) in plan {
            for (j, &c) in counts.iter().enumerate() {
                for i in 0..c * scale {
                    records.push(PaperRecord::new(format!("{field}{j}-{i}"), "t", 2018 + j as i32).with_labels([*field], Provenance::Gold));
                }
            }
        }
        records
    };
    let matrix_for = |scale| -> Result<BTreeMap<String, (f64, f64, Quadrant)>, String> {
        let series = annual_counts(&build(scale), &taxonomy, &window, false).map_err(|e| e.to_string())?;
        let m = growth_share_matrix(&series, &window, GrowthFormula::Relative, SplitRule::Median, &YjParams::default())
            .map_err(|e| e.to_string())?;
        Ok(m.points.into_iter().map(|p| (p.field_id, (p.raw_growth, p.raw_total as f64, p.quadrant))).collect())
    };

    let base = matrix_for(1)?;
    let growth: Vec<f64> = base.values().map(|v| v.0).collect();
    let totals: Vec<f64> = base.values().map(|v| v.1).collect();
    let got: Vec<Quadrant> = base.values().map(|v| v.2).collect();
    check!(got == median_oracle(&growth, &totals), "quadrants {got:?} differ from direct median split");
    let named: BTreeMap<&str, Quadrant> = base.iter().map(|(k, v)| (k.as_str(), v.2)).collect();
    check!(named["star"] == Quadrant::TrendingStar, "star is {:?}", named["star"]);
    check!(named["anchor"] == Quadrant::Foundational, "anchor is {:?}", named["anchor"]);
    check!(named["rising"] == Quadrant::RisingQuestionMark, "rising is {:?}", named["rising"]);
    check!(named["quiet"] == Quadrant::Niche, "quiet is {:?}", named["quiet"]);

    // Scaling every count keeps growth and multiplies totals: quadrants must not move.
    let scaled = matrix_for(3)?;
    let scaled_q: Vec<Quadrant> = scaled.values().map(|v| v.2).collect();
    check!(scaled_q == got, "scaled corpus quadrants {scaled_q:?} vs {got:?}");

    // Strictly increasing re-scalings of a raw axis, then re-fitting.
    let maps: [(&str, fn(f64) -> f64); 4] = [
        ("affine", |v| 7.0 * v + 3.0),
        ("cube", |v| v * v * v),
        ("log1p", |v| (v.abs() + 1.0).ln() * v.signum()),
        ("exp", |v| (v / 10.0).exp()),
    ];
    let bounds = YjParams::default();
    for (name, f) in maps {
        let g2: Vec<f64> = growth.iter().map(|&v| f(v)).collect();
        let t2: Vec<f64> = totals.iter().map(|&v| f(v)).collect();
        for (ga, ta) in [(&g2, &totals), (&growth, &t2), (&g2, &t2)] {
            let axes = classify_axes(ga, ta, SplitRule::Median, &bounds).map_err(|e| e.to_string())?;
            check!(axes.quadrants == got, "{name} re-scaling moved quadrants: {:?}", axes.quadrants);
        }
    }
    Ok("4-field fixture matches direct median split; scaling and 4 monotone re-scalings keep quadrants".into())
}

// ---------------------------------------------------------------------------
// 5. Micro metrics

fn random_instance(rng: &mut ChaCha8Rng) -> (LabelMap, LabelMap, usize) {
    let n_records = rng.gen_range(0..=50);
    let n_classes = rng.gen_range(1..=10);
    let mut gold = LabelMap::new();
    let mut pred = LabelMap::new();
    for r in 0..n_records {
        let density = rng.gen_range(0.0..0.6);
        let mut draw = || -> BTreeSet<String> {
            (0..n_classes).filter(|_| rng.gen_bool(density)).map(|c| format!("c{c}")).collect()
        };
        let g = draw();
        let p = draw();
        gold.insert(format!("r{r}"), g);
        pred.insert(format!("r{r}"), p);
    }
    (gold, pred, n_classes)
}

fn micro_metrics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..100 {
        let (gold, pred, n_classes) = random_instance(&mut rng);
        let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
        for (id, g) in &gold {
            for c in 0..n_classes {
                let label = format!("c{c}");
                match (g.contains(&label), pred[id].contains(&label)) {
                    (true, true) => tp += 1,
                    (false, true) => fp += 1,
                    (true, false) => fn_ += 1,
                    (false, false) => {}
                }
            }
        }
        let p = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
        let r = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
        let f1 = if 2 * tp + fp + fn_ == 0 { 0.0 } else { 2.0 * tp as f64 / (2 * tp + fp + fn_) as f64 };

        let micro = micro_prf(&gold, &pred).map_err(|e| e.to_string())?;
        check!((micro.tp, micro.fp, micro.fn_) == (tp, fp, fn_), "case {case}: counts {:?} vs {:?}", (micro.tp, micro.fp, micro.fn_), (tp, fp, fn_));
        check!(micro.precision == p && micro.recall == r, "case {case}: P/R differ");
        check!((micro.f1 - f1).abs() <= 1e-12, "case {case}: F1 {} vs {f1}", micro.f1);

        let per_class = per_class_prf(&gold, &pred).map_err(|e| e.to_string())?;
        let pooled = per_class.values().fold((0, 0, 0), |a, c| (a.0 + c.tp, a.1 + c.fp, a.2 + c.fn_));
        check!(pooled == (tp, fp, fn_), "case {case}: pooled per-class counts {pooled:?}");
    }
    Ok("100 random instances match pair enumeration; pooled per-class counts equal micro counts".into())
}

// ---------------------------------------------------------------------------
// 6. Weak labeler

fn exact_scan(text: &str, keyword: &str) -> usize {
    let t = tokenize(text);
    let k = tokenize(keyword);
    let (mut i, mut n) = (0, 0);
    while !k.is_empty() && i + k.len() <= t.len() {
        if t[i..i + k.len()] == k[..] {
            n += 1;
            i += k.len();
        } else {
            i += 1;
        }
    }
    n
}

fn weak_labeler() -> Outcome {
    let taxonomy = Taxonomy::default_nlp();
    let cfg = MatcherConfig::default();
    let twice = PaperRecord::new("twice", "Question answering over tables", 2021)
        .with_abstract("We revisit question answering with a new benchmark.");
    let once = PaperRecord::new("once", "Question answering over tables", 2021)
        .with_abstract("We release a new benchmark.");
    check!(keyword_label(&twice, &taxonomy, &cfg).0.contains("question-answering"), "two mentions not labeled");
    check!(!keyword_label(&once, &taxonomy, &cfg).0.contains("question-answering"), "one mention labeled");

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let vocab = ["graph", "neural", "parsing", "model", "of", "the", "Parsing", "graphs", "model.", "neural-graph"];
    let exact = MatcherConfig::exact();
    for case in 0..200 {
        let len = rng.gen_range(0..30);
        let text: Vec<&str> = (0..len).map(|_| *vocab.choose(&mut rng).unwrap()).collect();
        let text = text.join(if rng.gen_bool(0.5) { " " } else { ", " });
        let kw_len = rng.gen_range(1..=3);
        let kw: Vec<&str> = (0..kw_len).map(|_| *vocab.choose(&mut rng).unwrap()).collect();
        let kw = kw.join(" ");
        let got = fuzzy_match_count(&text, &kw, &exact).len();
        let want = exact_scan(&text, &kw);
        check!(got == want, "case {case}: `{kw}` in `{text}`: {got} vs {want}");
    }

    let parsed = parse_records(fs::read(corpus_fixture()).map_err(|e| e.to_string())?.as_slice(), RecordFormat::JsonLines)
        .map_err(|e| e.to_string())?;
    let heuristic = |threshold: u32| -> Result<Vec<BTreeSet<String>>, String> {
        let cfg = MatcherConfig { occurrence_threshold: threshold, ..MatcherConfig::default() };
        Ok(label_corpus(parsed.records.clone(), &taxonomy, &cfg, false)
            .map_err(|e| e.to_string())?
            .records
            .iter()
            .map(|r| r.labels.iter().filter(|(_, p)| !p.is_external()).map(|(f, _)| f.to_string()).collect())
            .collect())
    };
    let levels: Vec<_> = (1..=5).map(heuristic).collect::<Result<_, _>>()?;
    for (t, pair) in levels.windows(2).enumerate() {
        for (hi, lo) in pair[1].iter().zip(&pair[0]) {
            check!(hi.is_subset(lo), "threshold {} labels not within threshold {}", t + 2, t + 1);
        }
    }
    let sizes: Vec<usize> = levels.iter().map(|l| l.iter().map(BTreeSet::len).sum()).collect();
    Ok(format!("threshold-2 rule holds; 200 distance-0 counts match exact scan; heuristic labels by threshold 1..5: {sizes:?}"))
}

// ---------------------------------------------------------------------------
// 7. Pipeline determinism

fn run_cli(cwd: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_fieldscope"))
        .current_dir(cwd)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("fieldscope {args:?} failed: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn full_run(cwd: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let corpus = corpus_fixture();
    let corpus = corpus.to_str().unwrap();
    run_cli(cwd, &["ingest", "--corpus", corpus, "--out", "run"])?;
    run_cli(cwd, &["label", "--corpus", "run/corpus.jsonl", "--out", "run"])?;
    run_cli(cwd, &["trends", "--corpus", "run/labeled.jsonl", "--out", "run"])?;
    let mut files = BTreeMap::new();
    for entry in fs::read_dir(cwd.join("run")).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        files.insert(path.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&path).map_err(|e| e.to_string())?);
    }
    Ok(files)
}

fn pipeline_determinism() -> Outcome {
    let start = Instant::now();
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = full_run(a.path())?;
    let second = full_run(b.path())?;
    let elapsed = start.elapsed();
    for required in [
        "series.csv",
        "matrix.csv",
        "lifecycle.csv",
        "matches.csv",
        "matrix.svg",
        "lifecycle.svg",
        "ingest.manifest.json",
        "label.manifest.json",
        "trends.manifest.json",
    ] {
        check!(first.contains_key(required), "missing output {required}");
    }
    check!(first.keys().eq(second.keys()), "runs wrote different file sets");
    for (name, bytes) in &first {
        check!(second[name] == *bytes, "{name} differs between runs");
    }
    within(elapsed, Duration::from_secs(30), "criterion 7")?;
    Ok(format!("{} output files byte-identical across two runs ({elapsed:.2?} for both)", first.len()))
}

// ---------------------------------------------------------------------------
// 8. Ranking of per-field totals from the published table

fn paper_ranking() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let counts = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/table1_counts.csv");
    run_cli(dir.path(), &["rank", "--counts", counts.to_str().unwrap(), "--out", "rank"])?;
    let text = fs::read_to_string(dir.path().join("rank/ranking.csv")).map_err(|e| e.to_string())?;
    let rows: Vec<&str> = text.lines().skip(1).take(3).collect();
    let want = [
        "1,machine-translation,12922",
        "2,language-models,11005",
        "3,representation-learning,6370",
    ];
    check!(rows == want, "top three {rows:?}");
    Ok(format!("top three: {}", rows.join(" | ")))
}

// ---------------------------------------------------------------------------
// 9. Deduplication and filtering laws

fn dedup_and_filter() -> Outcome {
    let parsed = parse_records(fs::read(corpus_fixture()).map_err(|e| e.to_string())?.as_slice(), RecordFormat::JsonLines)
        .map_err(|e| e.to_string())?;
    let records = parsed.records;
    let reference = deduplicate(records.clone());
    check!(reference.len() < records.len(), "fixture has no duplicates");
    check!(deduplicate(reference.clone()) == reference, "deduplicate is not idempotent");
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..100 {
        let mut shuffled = records.clone();
        shuffled.shuffle(&mut rng);
        let d = deduplicate(shuffled);
        check!(d == reference, "permutation {i} changed the result");
        check!(deduplicate(d.clone()) == d, "permutation {i}: not idempotent");
    }

    let taxonomy = Taxonomy::default_nlp();
    let preface = PaperRecord::new("preface", "Preface", 2020).with_language("en");
    let all_leaves = PaperRecord::new("everything", "A model for every task", 2020)
        .with_labels(taxonomy.leaves(), Provenance::Imported);
    let normal = PaperRecord::new("normal", "Neural machine translation for low-resource languages", 2020)
        .with_labels(["machine-translation"], Provenance::Gold);
    let outcome = classify_research(vec![preface, all_leaves, normal], &taxonomy, &FilterConfig::default())
        .map_err(|e| e.to_string())?;
    let kept: Vec<&str> = outcome.kept.iter().map(|r| r.id.as_str()).collect();
    check!(kept == ["normal"], "kept {kept:?}");
    let dropped: BTreeMap<&str, DropReason> = outcome.dropped.iter().map(|(id, r)| (id.as_str(), *r)).collect();
    check!(dropped.get("preface") == Some(&DropReason::NonResearch), "preface: {:?}", dropped.get("preface"));
    check!(dropped.get("everything") == Some(&DropReason::AllLeaves), "all-leaf: {:?}", dropped.get("everything"));
    Ok(format!(
        "{} -> {} records, idempotent and order-insensitive over 100 permutations; preface and all-leaf dropped, normal kept",
        records.len(),
        reference.len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("yeo-johnson correctness", yeo_johnson_correctness),
        ("lambda fitting", lambda_fitting),
        ("life-cycle positions", lifecycle_positions),
        ("growth-share quadrants", growth_share_quadrants),
        ("micro metrics", micro_metrics),
        ("weak labeler", weak_labeler),
        ("pipeline determinism", pipeline_determinism),
        ("published ranking", paper_ranking),
        ("dedup/filter laws", dedup_and_filter),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {} [{name}]: PASS ({elapsed:.2?}) {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} [{name}]: FAIL ({elapsed:.2?}) {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
