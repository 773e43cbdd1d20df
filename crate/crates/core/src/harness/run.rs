use log::info;
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::annotate::{cross_annotate, join_corpora, AnnotateMode};
use crate::bio::{LabelSet, Tag};
use crate::corpus::{
    generate_synthetic_corpus, read_conll, subsample_per_type, ConllOptions, Corpus, OverlapSpec, Setup,
    SubtypeSpec,
};
use crate::error::{Error, Result};
use crate::eval::{self, Scores};
use crate::oracle::{self, ClVariant, TokenTarget};
use crate::tagger::{train, Decoding, TaggerModel, TrainSentence};
use crate::taxonomy::{Side, Taxonomy};

use super::config::{CorpusSource, ExperimentConfig, Method, ReportKind, SetupKind, ValidationMode};
use super::report::{Report, Row};

/// SplitMix64 step, used to derive independent seeds.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(index.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The fully annotated corpus an experiment draws from.
pub fn load_corpus(config: &ExperimentConfig) -> Result<Corpus> {
    match &config.corpus {
        CorpusSource::Synthetic(_) => generate_synthetic_corpus(&config.synthetic_spec().expect("synthetic")),
        CorpusSource::Conll { path, fine_separator } => read_conll(
            path,
            &ConllOptions {
                fine_separator: *fine_separator,
                ..Default::default()
            },
        ),
    }
}

/// Everything one split shares across its training seeds.
#[derive(Clone, Debug)]
pub struct PreparedSplit {
    pub index: usize,
    pub setup: Setup,
    pub d_a: Corpus,
    pub d_b: Corpus,
    /// Validation set in the final space, gold attached.
    pub val_full: Corpus,
    /// Side views of the whole validation set.
    pub val_side_a: Corpus,
    pub val_side_b: Corpus,
    /// Disjoint halves of the validation set, each seen by one side.
    pub val_half_a: Corpus,
    pub val_half_b: Corpus,
    pub test_full: Corpus,
    /// Test set annotated with side-B types only.
    pub test_b: Corpus,
    /// Few-shot types that fell short of `k`.
    pub shortfalls: Vec<(String, usize)>,
}

impl PreparedSplit {
    pub fn taxonomy(&self) -> &Taxonomy {
        self.setup.taxonomy()
    }
}

fn default_ratio(n: usize) -> (usize, usize) {
    (n / 2, n - n / 2)
}

// Side of every coarse label for one split.
fn type_split(config: &ExperimentConfig, labels: &LabelSet, designated: Option<usize>, seed: u64) -> Result<Vec<Side>> {
    let n = labels.len();
    let pool = if config.setup == SetupKind::Overlapping { n - 1 } else { n };
    let (na, nb) = config.type_ratio.unwrap_or_else(|| default_ratio(pool));
    if na + nb != pool || na == 0 || nb == 0 {
        return Err(Error::config(format!(
            "type ratio {na}:{nb} does not partition the {pool} available types"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    if let Some(d) = designated {
        order.retain(|&i| i != d);
        if config.setup == SetupKind::Subtype {
            order.insert(0, d);
        }
    }
    let mut sides = vec![Side::A; n];
    for &i in &order[na..] {
        sides[i] = Side::B;
    }
    Ok(sides)
}

fn build_setup(config: &ExperimentConfig, train: &Corpus, seed: u64) -> Result<Setup> {
    let labels = &train.labels;
    if config.setup == SetupKind::Disjoint {
        return Setup::disjoint(labels, &type_split(config, labels, None, seed)?);
    }
    let fine = train
        .fine
        .as_ref()
        .ok_or_else(|| Error::config(format!("the {} setup needs a two-level corpus", config.setup)))?;
    let name = config
        .designated_type
        .clone()
        .unwrap_or_else(|| labels.name(0).to_string());
    let designated = labels
        .get(&name)
        .ok_or_else(|| Error::config(format!("unknown designated type `{name}`")))?;
    let children: Vec<String> = fine
        .children(designated)
        .into_iter()
        .map(|f| fine.labels.name(f).to_string())
        .collect();
    let coarse_split = type_split(config, labels, Some(designated), seed)?;
    match config.setup {
        SetupKind::Subtype => {
            let subtypes = if config.subtypes.is_empty() {
                children[..(children.len() / 2).max(1).min(children.len())].to_vec()
            } else {
                config.subtypes.clone()
            };
            Setup::subtype(
                train,
                &SubtypeSpec {
                    coarse_split,
                    designated: name,
                    subtypes,
                    ratio: config.sentence_ratio,
                },
            )
        }
        SetupKind::Overlapping => {
            let mid = children.len() / 2;
            let pick = |given: &[String], default: &[String]| {
                if given.is_empty() {
                    default.to_vec()
                } else {
                    given.to_vec()
                }
            };
            Setup::overlapping(
                train,
                &OverlapSpec {
                    coarse_split,
                    coarse_type: name,
                    subset_a: pick(&config.subset_a, &children[..(mid + 1).min(children.len())]),
                    subset_b: pick(&config.subset_b, &children[mid..]),
                    ratio: config.sentence_ratio,
                },
            )
        }
        SetupKind::Disjoint => unreachable!(),
    }
}

pub fn prepare_split(config: &ExperimentConfig, full: &Corpus, index: usize) -> Result<PreparedSplit> {
    let seed = derive_seed(config.seed, 1, index as u64);
    let (train, val, test) = full.carve(config.validation_size, config.test_size, seed);
    if train.len() < 2 || val.len() < 2 || test.is_empty() {
        return Err(Error::config(format!(
            "corpus of {} sentences is too small for the requested splits",
            full.len()
        )));
    }
    let setup = build_setup(config, &train, seed)?;
    let pair = setup.split(&train, seed, config.sentence_ratio)?;
    let (d_b, shortfalls) = match config.few_shot_k {
        Some(k) => {
            let sub = subsample_per_type(&pair.d_b, k, seed);
            (sub.corpus, sub.shortfalls)
        }
        None => (pair.d_b, Vec::new()),
    };
    let pv = setup.project(&val)?;
    let (ha, hb) = crate::corpus::partition_indices(val.len(), 0.5, derive_seed(seed, 2, 0));
    let pt = setup.project(&test)?;
    Ok(PreparedSplit {
        index,
        d_a: pair.d_a,
        d_b,
        val_half_a: pv.a.select(&ha),
        val_half_b: pv.b.select(&hb),
        val_full: pv.full,
        val_side_a: pv.a,
        val_side_b: pv.b,
        test_full: pt.full,
        test_b: pt.b,
        setup,
        shortfalls,
    })
}

fn all_logits(model: &TaggerModel, corpus: &Corpus) -> Vec<Array2<f64>> {
    let mut out = Vec::with_capacity(corpus.len());
    for chunk in corpus.sentences.chunks(256) {
        let words: Vec<&[String]> = chunk.iter().map(|s| s.words.as_slice()).collect();
        out.extend(model.batch_logits(&words));
    }
    out
}

fn hard(corpus: &Corpus) -> Vec<TrainSentence> {
    corpus
        .sentences
        .iter()
        .map(|s| TrainSentence::new(s.words.clone(), s.tags.iter().map(|t| TokenTarget::Hard(t.index())).collect()))
        .collect()
}

fn with_targets(
    corpus: &Corpus,
    mut targets: impl FnMut(usize, &[Tag]) -> Result<Vec<TokenTarget>>,
) -> Result<Vec<TrainSentence>> {
    corpus
        .sentences
        .iter()
        .enumerate()
        .map(|(i, s)| Ok(TrainSentence::new(s.words.clone(), targets(i, &s.tags)?)))
        .collect()
}

fn need(model: Option<&TaggerModel>) -> Result<&TaggerModel> {
    model.ok_or_else(|| Error::config("side model missing"))
}

struct Runner<'a> {
    config: &'a ExperimentConfig,
    split: &'a PreparedSplit,
    seed: u64,
}

impl Runner<'_> {
    fn tax(&self) -> &Taxonomy {
        self.split.taxonomy()
    }

    /// Trains one model per learning rate and keeps the best on validation.
    fn train_selected(
        &self,
        labels: &LabelSet,
        data: &[TrainSentence],
        role: u64,
        decoding: Decoding,
        validate: &(dyn Fn(&TaggerModel) -> f64 + Sync),
    ) -> Result<TaggerModel> {
        let mut best: Option<(f64, TaggerModel)> = None;
        for &lr in &self.config.learning_rates {
            let mut tagger = self.config.tagger.clone();
            tagger.learning_rate = lr;
            tagger.decoding = decoding;
            tagger.seed = derive_seed(self.seed, 3, role);
            let mut model =
                TaggerModel::for_corpus(tagger, labels.clone(), data.iter().map(|s| s.words.as_slice()))?;
            let log = train(&mut model, data, &mut |m| validate(m))?;
            if best.as_ref().map_or(true, |(score, _)| log.best_score > *score) {
                best = Some((log.best_score, model));
            }
        }
        Ok(best.expect("at least one learning rate").1)
    }

    fn train_side(&self, side: Side) -> Result<TaggerModel> {
        let (data, val) = match (side, self.config.validation_mode) {
            (Side::A, ValidationMode::Full) => (&self.split.d_a, &self.split.val_side_a),
            (Side::A, ValidationMode::Partial) => (&self.split.d_a, &self.split.val_half_a),
            (Side::B, ValidationMode::Full) => (&self.split.d_b, &self.split.val_side_b),
            (Side::B, ValidationMode::Partial) => (&self.split.d_b, &self.split.val_half_b),
        };
        let role = if side == Side::A { 0 } else { 1 };
        self.train_selected(&data.labels, &hard(data), role, Decoding::Argmax, &|m| eval::observed_score(m, val).f1)
    }

    fn train_final(&self, method: Method, data: &[TrainSentence], role: u64) -> Result<TaggerModel> {
        let tax = self.tax();
        let split = self.split;
        let validate = |m: &TaggerModel| match self.config.validation_mode {
            ValidationMode::Full => eval::gold_score(m, &split.val_full).f1,
            ValidationMode::Partial => eval::partial_validation_score(m, tax, &split.val_half_a, &split.val_half_b),
        };
        // sigmoid outputs are read independently
        let decoding = if method == Method::Aml {
            Decoding::Threshold
        } else {
            Decoding::Argmax
        };
        self.train_selected(tax.space().names(), data, role, decoding, &validate)
    }

    fn final_data(&self, method: Method, model_a: Option<&TaggerModel>, model_b: Option<&TaggerModel>) -> Result<Vec<TrainSentence>> {
        let tax = self.tax();
        let (d_a, d_b) = (&self.split.d_a, &self.split.d_b);
        let data = match method {
            Method::NaiveJoin => {
                let mut data = with_targets(d_a, |_, t| oracle::naive_targets(tax, Side::A, t))?;
                data.extend(with_targets(d_b, |_, t| oracle::naive_targets(tax, Side::B, t))?);
                data
            }
            Method::UpperBound => d_a
                .sentences
                .iter()
                .chain(&d_b.sentences)
                .map(|s| {
                    let gold = s.gold.as_ref().ok_or_else(|| Error::config("upper bound needs gold tags"))?;
                    Ok(TrainSentence::new(s.words.clone(), gold.iter().map(|t| TokenTarget::Hard(t.index())).collect()))
                })
                .collect::<Result<_>>()?,
            Method::XAnn => {
                let mode = if tax.is_disjoint() {
                    AnnotateMode::Disjoint
                } else {
                    AnnotateMode::General
                };
                let a = cross_annotate(d_a, Side::A, need(model_b)?, tax, mode)?;
                let b = cross_annotate(d_b, Side::B, need(model_a)?, tax, mode)?;
                hard(&join_corpora(&a, &b)?)
            }
            Method::Plm | Method::PlmKl => {
                let targets = if method == Method::Plm {
                    oracle::plm_targets
                } else {
                    oracle::plm_kl_targets
                };
                let mut data = Vec::new();
                for (corpus, side, aux) in [(d_a, Side::A, need(model_b)?), (d_b, Side::B, need(model_a)?)] {
                    let logits = all_logits(aux, corpus);
                    data.extend(with_targets(corpus, |i, t| {
                        Ok(targets(&oracle::build_oracle(tax, side, t, logits[i].view())?))
                    })?);
                }
                data
            }
            Method::Cl | Method::ClPlusPlus => {
                let variant = if method == Method::Cl {
                    ClVariant::Cl
                } else {
                    ClVariant::ClPlusPlus
                };
                let logits = all_logits(need(model_a)?, d_b);
                with_targets(d_b, |i, t| oracle::cl_targets(tax, t, logits[i].view(), variant))?
            }
            Method::Aml => {
                let mode = self.config.aml_targets;
                let mut data = with_targets(d_a, |_, t| Ok(oracle::aml_targets(tax, Side::A, t, mode)))?;
                data.extend(with_targets(d_b, |_, t| Ok(oracle::aml_targets(tax, Side::B, t, mode)))?);
                data
            }
            Method::ModelBOnly => unreachable!("model-b-only has no final model"),
        };
        Ok(data)
    }

    fn evaluate_final(&self, model: &TaggerModel) -> Scores {
        match self.config.report {
            ReportKind::Standard => eval::gold_score(model, &self.split.test_full),
            ReportKind::ModelB => {
                let test = &self.split.test_b;
                let words: Vec<&[String]> = test.sentences.iter().map(|s| s.words.as_slice()).collect();
                let pred = model.predict_batch(&words);
                let projected = eval::project_predictions(self.tax(), &pred, Side::B);
                eval::score_tags(&projected, &test.observed_tags())
            }
        }
    }

    fn run(&self, train_seed: usize) -> Result<Vec<Row>> {
        let methods = &self.config.methods;
        let model_a = if methods.iter().any(|m| m.needs_model_a()) {
            Some(self.train_side(Side::A)?)
        } else {
            None
        };
        let model_b = if methods.iter().any(|m| m.needs_model_b()) {
            Some(self.train_side(Side::B)?)
        } else {
            None
        };
        let mut rows = Vec::new();
        for (role, &method) in methods.iter().enumerate() {
            let scores = match method {
                Method::ModelBOnly => eval::observed_score(model_b.as_ref().expect("trained"), &self.split.test_b),
                _ => {
                    let data = self.final_data(method, model_a.as_ref(), model_b.as_ref())?;
                    let model = self.train_final(method, &data, 10 + role as u64)?;
                    self.evaluate_final(&model)
                }
            };
            info!(
                "split {} seed {train_seed} {method}: F1 {:.2}",
                self.split.index,
                100.0 * scores.f1
            );
            rows.push(Row {
                axis_value: None,
                setup: self.config.setup.to_string(),
                method: method.to_string(),
                split_seed: self.split.index,
                train_seed,
                precision: scores.precision,
                recall: scores.recall,
                f1: scores.f1,
            });
        }
        Ok(rows)
    }
}

/// Runs every (split, seed) pair and every configured method.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let full = load_corpus(config)?;
    let splits: Vec<PreparedSplit> = (0..config.splits)
        .map(|s| prepare_split(config, &full, s).map_err(|e| e.in_run(format!("split {s}"))))
        .collect::<Result<_>>()?;
    for split in &splits {
        for (name, available) in &split.shortfalls {
            log::warn!("split {}: type {name} has only {available} sentences", split.index);
        }
    }
    let jobs: Vec<(usize, usize)> = (0..config.splits)
        .flat_map(|s| (0..config.seeds).map(move |r| (s, r)))
        .collect();
    let results: Vec<Vec<Row>> = jobs
        .par_iter()
        .map(|&(s, r)| {
            let runner = Runner {
                config,
                split: &splits[s],
                seed: derive_seed(config.seed, 2, (s * 1_000_003 + r) as u64),
            };
            runner
                .run(r)
                .map_err(|e| e.in_run(format!("{} setup, split {s}, seed {r}", config.setup)))
        })
        .collect::<Result<_>>()?;
    Ok(Report::new(None, results.into_iter().flatten().collect()))
}

/// Side-B test comparison of Model_B against final models.
pub fn run_model_b_comparison(config: &ExperimentConfig) -> Result<Report> {
    let mut config = config.clone();
    config.report = ReportKind::ModelB;
    run_experiment(&config)
}

/// One experiment per value of `axis`, merged with the axis as a column.
pub fn sweep(template: &ExperimentConfig, axis: &str, values: &[String]) -> Result<Report> {
    let mut parts = Vec::with_capacity(values.len());
    for value in values {
        let mut config = template.clone();
        config.set(axis, value)?;
        let mut report = run_experiment(&config).map_err(|e| e.in_run(format!("{axis} = {value}")))?;
        for row in &mut report.rows {
            row.axis_value = Some(value.clone());
        }
        parts.push(report);
    }
    Ok(Report::merge(axis, parts))
}
