//! Turns command-line arguments into loaded corpora, references, detectors
//! and metric configurations.

use std::collections::HashSet;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{Context, Result};
use gecmetric::corpus::{Corpus, ReferenceSet, Sentence, SystemOutput};
use gecmetric::formats::{parse_m2, read_human_ranking, read_parallel_file, HumanRanking};
use gecmetric::gleu::GleuConfig;
use gecmetric::grammaticality::{
    ArticleDetector, CapitalizationDetector, CheckerCommand, DetectorSuite, DuplicateDetector, ExternalChecker,
    PunctuationSpacingDetector, SpellDetector, TerminalPunctuationDetector, Wordlist, BUILTIN_DETECTORS,
};
use gecmetric::imeasure::IMeasureConfig;
use gecmetric::lfm::{LfmModel, LfmScorer, NgramLm, DEFAULT_LM_ORDER};
use gecmetric::maxmatch::M2Config;
use gecmetric::scoring::{Metric, Scorer};

use crate::{usage, CorpusArgs, DetectorArgs, MetricArgs};

const EXTERNAL_ID: &str = "external";

pub fn read_sentences(path: &Path) -> Result<Vec<Sentence>> {
    read_parallel_file(path).with_context(|| format!("reading {}", path.display()))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn read_human(path: &Path) -> Result<HumanRanking> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_human_ranking(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

pub fn read_wordlist(path: &Path) -> Result<Wordlist> {
    Wordlist::from_file(path).with_context(|| format!("reading wordlist {}", path.display()))
}

/// `ID=PATH`, or `PATH` with the file stem as id.
fn parse_hyp_spec(spec: &str) -> Result<(String, PathBuf)> {
    if let Some((id, path)) = spec.split_once('=') {
        if id.is_empty() || path.is_empty() {
            return Err(usage(format!("malformed --hyp {spec:?}; expected ID=PATH or PATH")));
        }
        return Ok((id.to_owned(), PathBuf::from(path)));
    }
    let path = PathBuf::from(spec);
    let id = path
        .file_stem()
        .and_then(|s| s.to_str())
        .filter(|s| !s.is_empty())
        .ok_or_else(|| usage(format!("cannot derive a system id from {spec:?}; use ID=PATH")))?
        .to_owned();
    Ok((id, path))
}

/// Everything read from the corpus arguments.
pub struct LoadedCorpus {
    pub corpus: Corpus,
    pub references: Option<ReferenceSet>,
    pub outputs: Vec<SystemOutput>,
    /// True when the corpus came from an M² file.
    pub annotated: bool,
}

impl LoadedCorpus {
    pub fn load(args: &CorpusArgs) -> Result<Self> {
        let mut outputs = Vec::new();
        let mut ids = HashSet::new();
        for spec in &args.hyps {
            let (id, path) = parse_hyp_spec(spec)?;
            if !ids.insert(id.clone()) {
                return Err(usage(format!("system id {id:?} is given twice")));
            }
            outputs.push(SystemOutput::new(id, read_sentences(&path)?));
        }

        let (corpus, annotated) = if let Some(path) = &args.m2 {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let doc = parse_m2(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?;
            (doc.into_corpus(), true)
        } else if let Some(path) = &args.source {
            (Corpus::from_sources(read_sentences(path)?), false)
        } else {
            // Reference-less metrics only need the outputs; an empty source
            // per line keeps the sentence count.
            let n = outputs.first().map_or(0, SystemOutput::len);
            (Corpus::from_sources(vec![Sentence::default(); n]), false)
        };

        let references = if !args.refs.is_empty() {
            let columns = args
                .refs
                .iter()
                .map(|p| read_sentences(p))
                .collect::<Result<Vec<_>>>()?;
            Some(ReferenceSet::from_columns(columns)?)
        } else if annotated {
            Some(corpus.gold_references()?)
        } else {
            None
        };
        if references.is_some() && args.m2.is_none() && args.source.is_none() {
            return Err(usage("--ref needs --source or --m2"));
        }
        Ok(LoadedCorpus {
            corpus,
            references,
            outputs,
            annotated,
        })
    }

    pub fn check_metric(&self, metric: Metric) -> Result<()> {
        match metric {
            Metric::M2 if !self.annotated => Err(usage("metric m2 needs --m2 annotations")),
            Metric::Gleu | Metric::IMeasure if self.references.is_none() => {
                Err(usage(format!("metric {metric} needs --ref files or --m2 annotations")))
            }
            _ => Ok(()),
        }
    }
}

/// Builds the detector suite: the requested ids, or the default set.
pub fn detector_suite(args: &DetectorArgs) -> Result<DetectorSuite> {
    let wordlist = args.wordlist.as_deref().map(read_wordlist).transpose()?.map(Arc::new);
    let mut ids: Vec<String> = if args.detectors.is_empty() {
        let mut ids: Vec<String> = BUILTIN_DETECTORS
            .iter()
            .filter(|id| **id != "spell" || wordlist.is_some())
            .map(|s| s.to_string())
            .collect();
        if args.checker_cmd.is_some() {
            ids.push(EXTERNAL_ID.to_owned());
        }
        ids
    } else {
        let mut ids = Vec::new();
        for id in &args.detectors {
            if id == "all" {
                ids.extend(BUILTIN_DETECTORS.iter().map(|s| s.to_string()));
                if args.checker_cmd.is_some() {
                    ids.push(EXTERNAL_ID.to_owned());
                }
            } else {
                ids.push(id.clone());
            }
        }
        ids
    };
    let mut seen = HashSet::new();
    ids.retain(|id| seen.insert(id.clone()));

    let mut suite = DetectorSuite::new();
    for id in &ids {
        match id.as_str() {
            "spell" => {
                let wl = wordlist
                    .clone()
                    .ok_or_else(|| usage("the spell detector needs --wordlist"))?;
                suite.add(Box::new(SpellDetector::new(wl)))?;
            }
            "duplicate" => suite.add(Box::new(DuplicateDetector))?,
            "article" => suite.add(Box::new(ArticleDetector))?,
            "capitalization" => suite.add(Box::new(CapitalizationDetector))?,
            "terminal-punctuation" => suite.add(Box::new(TerminalPunctuationDetector))?,
            "punctuation-spacing" => suite.add(Box::new(PunctuationSpacingDetector))?,
            EXTERNAL_ID => {
                let line = args
                    .checker_cmd
                    .as_deref()
                    .ok_or_else(|| usage("the external detector needs --checker-cmd"))?;
                let command = CheckerCommand::parse(line)?;
                let timeout = Duration::from_millis(args.checker_timeout_ms);
                suite.add(Box::new(ExternalChecker::spawn(
                    EXTERNAL_ID,
                    &command,
                    args.checker_pool,
                    timeout,
                )?))?;
            }
            other => {
                return Err(usage(format!(
                    "unknown detector {other:?}; expected one of {}, external or all",
                    BUILTIN_DETECTORS.join(", ")
                )))
            }
        }
    }
    if suite.is_empty() {
        return Err(usage("no detectors selected"));
    }
    log::info!("detectors: {}", suite.ids().join(", "));
    Ok(suite)
}

/// Metric configuration and the optional resources some metrics need.
pub struct Resources {
    pub gleu: GleuConfig,
    pub m2: M2Config,
    pub imeasure: IMeasureConfig,
    pub detectors: Option<DetectorSuite>,
    pub lfm: Option<LfmScorer>,
}

impl Resources {
    /// Loads only what `metrics` need.
    pub fn load(args: &MetricArgs, metrics: &[Metric]) -> Result<Self> {
        let gleu = GleuConfig {
            iterations: args.gleu_iterations,
            seed: args.seed,
            mode: args.gleu_mode.into(),
            ..GleuConfig::default()
        };
        let m2 = M2Config {
            beta: args.m2_beta,
            max_unchanged_words: args.m2_max_unchanged,
            ..M2Config::default()
        };
        let imeasure = IMeasureConfig { weight: args.im_weight };
        gleu.validate()?;
        m2.validate()?;
        imeasure.validate()?;

        let detectors = if metrics.contains(&Metric::ErrorCount) {
            Some(detector_suite(&args.detectors)?)
        } else {
            None
        };
        let lfm = if metrics.contains(&Metric::Lfm) {
            Some(load_lfm(args)?)
        } else {
            None
        };
        Ok(Resources {
            gleu,
            m2,
            imeasure,
            detectors,
            lfm,
        })
    }

    pub fn scorer<'a>(&'a self, loaded: &'a LoadedCorpus) -> Scorer<'a> {
        Scorer {
            corpus: &loaded.corpus,
            references: loaded.references.as_ref(),
            gleu: &self.gleu,
            m2: &self.m2,
            imeasure: &self.imeasure,
            detectors: self.detectors.as_ref(),
            lfm: self.lfm.as_ref(),
        }
    }
}

fn load_lfm(args: &MetricArgs) -> Result<LfmScorer> {
    let (Some(model), Some(lm_corpus), Some(wordlist)) = (&args.lfm_model, &args.lm_corpus, &args.detectors.wordlist)
    else {
        return Err(usage("metric lfm needs --lfm-model, --lm-corpus and --wordlist"));
    };
    let model = LfmModel::from_json(&read_text(model)?).with_context(|| format!("loading {}", model.display()))?;
    let lm = train_lm(lm_corpus)?;
    Ok(LfmScorer::new(model, Arc::new(lm), Arc::new(read_wordlist(wordlist)?))?)
}

pub fn train_lm(path: &Path) -> Result<NgramLm> {
    let sentences = read_sentences(path)?;
    let lm = NgramLm::train(&sentences, DEFAULT_LM_ORDER)?;
    log::info!(
        "language model: {} sentences, {} word types",
        sentences.len(),
        lm.vocab_size()
    );
    Ok(lm)
}
