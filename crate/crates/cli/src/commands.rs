use std::io::{self, BufRead, Write};
use std::path::Path;

use anyhow::{Context, Result};
use gecmetric::analysis::{
    ablate_references, correlate, gaming_check, rank_systems, sweep_lambda, AggregationMode, CorrelationReport,
    MetricScores,
};
use gecmetric::corpus::{ReferenceSet, Sentence};
use gecmetric::formats::{read_report, write_report, RankingEntry, Report, SystemEntry};
use gecmetric::gleu::MultiRefMode;
use gecmetric::grammaticality::ErrorSpan;
use gecmetric::lfm::{featurize, rescale_1_to_4, train_lfm, FeatureVector, FEATURE_NAMES};
use gecmetric::scoring::Metric;
use rayon::prelude::*;
use serde::Serialize;

use crate::inputs::{
    detector_suite, read_human, read_sentences, read_text, read_wordlist, train_lm, LoadedCorpus, Resources,
};
use crate::table::{optional, real, Table};
use crate::{
    usage, AblateArgs, CheckArgs, Cli, Command, CorrelateArgs, GamingArgs, GlobalArgs, MetricArgs, RankArgs, ScoreArgs,
    SweepArgs, TrainLfmArgs,
};

pub fn run(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.global.jobs {
        if jobs == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let global = &cli.global;
    match cli.command {
        Command::Score(args) => score(args, global),
        Command::Rank(args) => rank(args, global),
        Command::Correlate(args) => correlate_cmd(args, global),
        Command::Sweep(args) => sweep(args, global),
        Command::Ablate(args) => ablate(args, global),
        Command::Gaming(args) => gaming(args, global),
        Command::TrainLfm(args) => train(args, global),
        Command::Check(args) => check(args, global),
    }
}

/// Writes `json` to `--output` and `summary` to stdout, or `json` alone to
/// stdout when no output path is given.
fn emit(global: &GlobalArgs, json: &str, summary: &str) -> Result<()> {
    let mut stdout = io::stdout().lock();
    match &global.output {
        Some(path) => {
            std::fs::write(path, json).with_context(|| format!("writing {}", path.display()))?;
            log::info!("wrote {}", path.display());
            stdout.write_all(summary.as_bytes())?;
        }
        None => stdout.write_all(json.as_bytes())?,
    }
    stdout.flush()?;
    Ok(())
}

fn emit_report(global: &GlobalArgs, report: &Report, summary: &str) -> Result<()> {
    let precision = (global.precision > 0).then_some(global.precision);
    emit(global, &write_report(report, precision)?, summary)
}

fn load_report(path: &Path) -> Result<Report> {
    read_report(&read_text(path)?).with_context(|| format!("reading report {}", path.display()))
}

fn unique<T: PartialEq + Copy>(items: &[T]) -> Vec<T> {
    let mut out = Vec::new();
    for &item in items {
        if !out.contains(&item) {
            out.push(item);
        }
    }
    out
}

fn log_seed(args: &MetricArgs) {
    log::info!("seed: {}", args.seed);
}

fn score(args: ScoreArgs, global: &GlobalArgs) -> Result<()> {
    let metrics: Vec<Metric> = unique(&args.metrics).into_iter().map(Metric::from).collect();
    let mode = AggregationMode::from(args.mode);
    let loaded = LoadedCorpus::load(&args.corpus)?;
    for &metric in &metrics {
        loaded.check_metric(metric)?;
        if mode == AggregationMode::Corpus && metric == Metric::Lfm {
            return Err(usage("metric lfm has no corpus mode"));
        }
    }
    let resources = Resources::load(&args.metric_args, &metrics)?;
    if metrics.contains(&Metric::Gleu) && resources.gleu.mode == MultiRefMode::Sampled {
        log_seed(&args.metric_args);
    }
    let scorer = resources.scorer(&loaded);

    let mut report = Report::default();
    let mut table = Table::new(["system", "metric", "sentence mean", "corpus"]);
    for &metric in &metrics {
        for output in &loaded.outputs {
            let records = scorer.records(metric, output)?;
            let mean_sentence_score = records.aggregate(AggregationMode::Sentence)?;
            let corpus_score = if records.supports(AggregationMode::Corpus) {
                Some(records.aggregate(AggregationMode::Corpus)?)
            } else {
                None
            };
            table.row(vec![
                output.system_id.clone(),
                metric.to_string(),
                real(mean_sentence_score),
                optional(corpus_score),
            ]);
            report.systems.push(SystemEntry {
                id: output.system_id.clone(),
                metric: metric.to_string(),
                mode,
                mean_sentence_score,
                corpus_score,
                per_sentence: records.sentence_scores(),
            });
        }
    }
    emit_report(global, &report, &table.render())
}

/// Metrics to use from a report: the requested ones, or all of them.
fn selected_metrics(report: &Report, requested: &[String]) -> Result<Vec<String>> {
    let available = report.metrics();
    if requested.is_empty() {
        if available.is_empty() {
            return Err(usage("the report has no system scores"));
        }
        return Ok(available.into_iter().map(str::to_owned).collect());
    }
    let mut out: Vec<String> = Vec::new();
    for name in requested {
        if !available.contains(&name.as_str()) {
            return Err(usage(format!(
                "metric {name:?} is not in the report (available: {})",
                available.join(", ")
            )));
        }
        if !out.contains(name) {
            out.push(name.clone());
        }
    }
    Ok(out)
}

fn system_scores(report: &Report, metric: &str, mode: AggregationMode) -> Result<Vec<(String, f64)>> {
    report
        .entries_for(metric)
        .map(|e| {
            e.score(mode)
                .map(|v| (e.id.clone(), v))
                .ok_or_else(|| usage(format!("metric {metric} has no {mode} score")))
        })
        .collect()
}

fn rank(args: RankArgs, global: &GlobalArgs) -> Result<()> {
    let input = load_report(&args.report)?;
    let mode = AggregationMode::from(args.mode);
    let mut report = Report::default();
    let mut table = Table::new(["metric", "rank", "system", "score"]);
    for metric in selected_metrics(&input, &args.metrics)? {
        let ranking = rank_systems(&system_scores(&input, &metric, mode)?)?;
        for r in &ranking {
            table.row(vec![
                metric.clone(),
                format!("{}", r.rank),
                r.system.clone(),
                real(r.value),
            ]);
        }
        report.rankings.push(RankingEntry { metric, mode, ranking });
    }
    emit_report(global, &report, &table.render())
}

fn correlate_cmd(args: CorrelateArgs, global: &GlobalArgs) -> Result<()> {
    let input = load_report(&args.report)?;
    let human = read_human(&args.human)?;
    let mode = AggregationMode::from(args.mode);
    let explicit = !args.metrics.is_empty();
    let mut correlations = Vec::new();
    for metric in selected_metrics(&input, &args.metrics)? {
        let systems = match system_scores(&input, &metric, mode) {
            Ok(s) => s,
            Err(e) if !explicit => {
                log::warn!("skipping {metric}: {e}");
                continue;
            }
            Err(e) => return Err(e),
        };
        correlations.push(correlate(&metric, mode, &systems, &human)?);
    }
    CorrelationReport::compare_all(&mut correlations);

    let mut table = Table::new(["metric", "mode", "systems", "spearman", "pearson"]);
    for c in &correlations {
        table.row(vec![
            c.metric.clone(),
            c.mode.to_string(),
            c.n.to_string(),
            optional(c.spearman),
            optional(c.pearson),
        ]);
    }
    let report = Report {
        correlations,
        ..Report::default()
    };
    emit_report(global, &report, &table.render())
}

fn report_scores(report: &Report, metric: &str) -> Result<MetricScores> {
    let mut scores = MetricScores::new(metric);
    for entry in report.entries_for(metric) {
        scores.insert(entry.id.clone(), entry.per_sentence.clone())?;
    }
    if scores.systems.is_empty() {
        return Err(usage(format!("metric {metric:?} is not in the report")));
    }
    Ok(scores)
}

fn sweep(args: SweepArgs, global: &GlobalArgs) -> Result<()> {
    let input = load_report(&args.report)?;
    let human = read_human(&args.human)?;
    let gbm = report_scores(&input, &args.gbm)?;
    let rbm = report_scores(&input, &args.rbm)?;
    let result = sweep_lambda(&gbm, &rbm, &human)?;

    let mut table = Table::new(["point", "lambda", "spearman", "pearson"]);
    let first = result.points.first();
    let last = result.points.last();
    for (label, point) in [("gbm only", first), ("rbm only", last)] {
        if let Some(p) = point {
            table.row(vec![
                label.into(),
                real(p.lambda),
                optional(p.spearman),
                optional(p.pearson),
            ]);
        }
    }
    if let Some(o) = result.oracle_spearman {
        table.row(vec!["oracle spearman".into(), real(o.lambda), real(o.value), "".into()]);
    }
    if let Some(o) = result.oracle_pearson {
        table.row(vec!["oracle pearson".into(), real(o.lambda), "".into(), real(o.value)]);
    }
    let report = Report {
        sweep: Some(result),
        ..Report::default()
    };
    emit_report(global, &report, &table.render())
}

fn references(loaded: &LoadedCorpus, rbm: Metric) -> Result<&ReferenceSet> {
    loaded.check_metric(rbm)?;
    loaded
        .references
        .as_ref()
        .ok_or_else(|| usage(format!("metric {rbm} needs references")))
}

fn ablate(args: AblateArgs, global: &GlobalArgs) -> Result<()> {
    let (gbm, rbm) = (Metric::from(args.gbm), Metric::from(args.rbm));
    let loaded = LoadedCorpus::load(&args.corpus)?;
    let refs = references(&loaded, rbm)?;
    let human = read_human(&args.human)?;
    let resources = Resources::load(&args.metric_args, &[gbm, rbm])?;
    log_seed(&args.metric_args);
    let scorer = resources.scorer(&loaded);

    let available = refs.iter().map(<[Sentence]>::len).min().unwrap_or(0);
    let sizes = if args.sizes.is_empty() {
        (1..=available).collect()
    } else {
        unique(&args.sizes)
    };
    let gbm_scores = scorer.metric_scores(gbm, &loaded.outputs)?;
    let result = ablate_references(
        &gbm_scores,
        rbm.name(),
        &human,
        refs,
        &sizes,
        args.trials,
        args.metric_args.seed,
        |subset| scorer.metric_scores_with(rbm, &loaded.outputs, subset),
    )?;

    let mut table = Table::new(["references", "trials", "mean oracle rho", "95% CI low", "95% CI high"]);
    for p in &result.points {
        table.row(vec![
            p.n_refs.to_string(),
            p.trials.len().to_string(),
            real(p.mean),
            optional(p.ci_low),
            optional(p.ci_high),
        ]);
    }
    let report = Report {
        ablation: Some(result),
        ..Report::default()
    };
    emit_report(global, &report, &table.render())
}

fn gaming(args: GamingArgs, global: &GlobalArgs) -> Result<()> {
    let (gbm, rbm) = (Metric::from(args.gbm), Metric::from(args.rbm));
    let loaded = LoadedCorpus::load(&args.corpus)?;
    let refs = references(&loaded, rbm)?;
    let resources = Resources::load(&args.metric_args, &[gbm, rbm])?;
    log_seed(&args.metric_args);
    let scorer = resources.scorer(&loaded);

    let gbm_scores = scorer.metric_scores(gbm, &loaded.outputs)?;
    let rbm_scores = scorer.metric_scores(rbm, &loaded.outputs)?;
    let result = gaming_check(
        &gbm_scores,
        &rbm_scores,
        refs,
        args.lambda,
        args.metric_args.seed,
        |shuffled| scorer.metric_scores_with(rbm, &loaded.outputs, shuffled),
    )?;

    let mut table = Table::new(["score", "true refs", "shuffled refs", "relative drop"]);
    table.row(vec![
        result.gbm.clone(),
        real(result.gbm_true),
        real(result.gbm_shuffled),
        real(0.0),
    ]);
    table.row(vec![
        result.rbm.clone(),
        real(result.rbm_true),
        real(result.rbm_shuffled),
        optional(result.rbm_relative_drop),
    ]);
    table.row(vec![
        format!("interpolated (lambda {})", result.lambda),
        real(result.interpolated_true),
        real(result.interpolated_shuffled),
        optional(result.interpolated_relative_drop),
    ]);
    let report = Report {
        gaming: Some(result),
        ..Report::default()
    };
    emit_report(global, &report, &table.render())
}

/// Reads `sentence<TAB>score` lines; blank lines and `#` comments are skipped.
fn read_training_data(path: &Path) -> Result<Vec<(Sentence, f64)>> {
    let text = read_text(path)?;
    let mut rows = Vec::new();
    for (idx, line) in text.trim_start_matches('\u{feff}').lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_error = |message: String| {
            anyhow::Error::from(gecmetric::Error::Parse { line: idx + 1, message })
                .context(format!("reading {}", path.display()))
        };
        let Some((sentence, score)) = line.rsplit_once('\t') else {
            return Err(parse_error("expected `sentence<TAB>score`".into()));
        };
        let score: f64 = score
            .trim()
            .parse()
            .map_err(|_| parse_error(format!("invalid score {score:?}")))?;
        if !score.is_finite() {
            return Err(parse_error(format!("score {score} is not finite")));
        }
        rows.push((Sentence::tokenize(sentence), score));
    }
    Ok(rows)
}

fn train(args: TrainLfmArgs, global: &GlobalArgs) -> Result<()> {
    let mut data = read_training_data(&args.train)?;
    if args.rescale_1_4 {
        for (_, y) in &mut data {
            *y = rescale_1_to_4(*y);
        }
    }
    let outside = data.iter().filter(|(_, y)| !(0.0..=1.0).contains(y)).count();
    if outside > 0 {
        log::warn!("{outside} training scores lie outside [0, 1]; predictions are clipped to that range");
    }
    let lm = train_lm(&args.lm_corpus)?;
    let wordlist = read_wordlist(&args.wordlist)?;
    let rows: Vec<(FeatureVector, f64)> = data
        .par_iter()
        .map(|(s, y)| (featurize(s, &lm, &wordlist), *y))
        .collect();
    let model = train_lfm(&rows, args.alpha)?;
    log::info!("trained on {} sentences with alpha {}", rows.len(), args.alpha);

    let mut table = Table::new(["feature", "weight", "mean", "stdev"]);
    for (j, name) in FEATURE_NAMES.iter().enumerate() {
        let weight = if model.dropped.iter().any(|d| d == name) {
            "dropped".to_owned()
        } else {
            real(model.weights[j])
        };
        table.row(vec![
            name.to_string(),
            weight,
            real(model.means[j]),
            real(model.stdevs[j]),
        ]);
    }
    table.row(vec!["bias".into(), real(model.bias), "".into(), "".into()]);
    emit(global, &model.to_json()?, &table.render())
}

#[derive(Serialize)]
struct CheckedSentence {
    sentence: usize,
    tokens: usize,
    errors: Vec<ErrorSpan>,
}

fn check(args: CheckArgs, global: &GlobalArgs) -> Result<()> {
    let sentences: Vec<Sentence> = if !args.sentences.is_empty() {
        args.sentences.iter().map(|s| Sentence::tokenize(s)).collect()
    } else if let Some(path) = &args.input {
        read_sentences(path)?
    } else {
        let mut out = Vec::new();
        for line in io::stdin().lock().lines() {
            out.push(Sentence::tokenize(&line.context("reading stdin")?));
        }
        out
    };
    let suite = detector_suite(&args.detectors)?;
    let all: Vec<&Sentence> = sentences.iter().collect();
    let found = suite.detect_all(&all)?;

    let mut table = Table::new(["sentence", "span", "category", "detector", "text"]);
    let mut checked = Vec::with_capacity(sentences.len());
    for (i, (sentence, errors)) in sentences.iter().zip(found).enumerate() {
        for e in &errors {
            let text: Vec<&str> = sentence
                .iter()
                .skip(e.start)
                .take(e.end - e.start)
                .map(|t| t.as_str())
                .collect();
            table.row(vec![
                i.to_string(),
                format!("{}-{}", e.start, e.end),
                e.category.clone(),
                e.detector.clone(),
                text.join(" "),
            ]);
        }
        checked.push(CheckedSentence {
            sentence: i,
            tokens: sentence.len(),
            errors,
        });
    }
    let mut json = serde_json::to_string_pretty(&checked)?;
    json.push('\n');
    emit(global, &json, &table.render())
}
