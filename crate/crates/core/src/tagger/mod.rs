//! A small context-window tagger.
//!
//! Each token is represented by the concatenated embeddings of itself and
//! `context_window` neighbours on either side, fed through one `tanh` hidden
//! layer and an output layer over BIO tags.

mod checkpoint;
mod train;

use std::collections::HashMap;

use ndarray::linalg::general_mat_mul;
use ndarray::{Array2, ArrayView2, ArrayViewMut2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bio::{self, LabelSet, Tag};
use crate::error::{Error, Result};
use crate::oracle::{sequence_loss, TokenTarget};

pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_VERSION};
pub use train::{train, LogEntry, TrainSentence, TrainingLog};

#[derive(Clone, Debug, PartialEq)]
pub struct TaggerConfig {
    pub embedding_dim: usize,
    pub context_window: usize,
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Epochs without validation improvement before stopping.
    pub early_stop_patience: usize,
    pub batch_size: usize,
    /// Words seen fewer times than this share the unknown-word embedding.
    pub min_count: usize,
    pub decoding: Decoding,
}

/// How logits become tags.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Decoding {
    /// Highest logit wins.
    #[default]
    Argmax,
    /// Multi-label reading: `O` unless some entity tag has a positive logit,
    /// in which case the highest entity tag wins. The `O` column is ignored.
    Threshold,
}

impl std::str::FromStr for Decoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "argmax" => Ok(Decoding::Argmax),
            "threshold" => Ok(Decoding::Threshold),
            other => Err(Error::config(format!("unknown decoding `{other}`"))),
        }
    }
}

impl std::fmt::Display for Decoding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Decoding::Argmax => "argmax",
            Decoding::Threshold => "threshold",
        })
    }
}

impl Default for TaggerConfig {
    fn default() -> Self {
        TaggerConfig {
            embedding_dim: 32,
            context_window: 2,
            hidden_dim: 64,
            learning_rate: 1e-2,
            epochs: 50,
            seed: 0,
            early_stop_patience: 5,
            batch_size: 32,
            min_count: 2,
            decoding: Decoding::Argmax,
        }
    }
}

impl TaggerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.embedding_dim == 0 || self.hidden_dim == 0 || self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::config("tagger dimensions, batch size and epochs must be >= 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("learning rate must be positive"));
        }
        Ok(())
    }

    fn input_dim(&self) -> usize {
        (2 * self.context_window + 1) * self.embedding_dim
    }
}

pub const PAD: u32 = 0;
pub const UNK: u32 = 1;

/// Word to id map. Ids 0 and 1 are reserved for padding and unknown words.
#[derive(Clone, Debug, PartialEq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn build<'a>(words: impl IntoIterator<Item = &'a str>, min_count: usize) -> Self {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for w in words {
            *counts.entry(w).or_default() += 1;
        }
        let mut kept: Vec<&str> = counts
            .into_iter()
            .filter(|(_, c)| *c >= min_count.max(1))
            .map(|(w, _)| w)
            .collect();
        kept.sort_unstable();
        Self::from_words(kept.into_iter().map(String::from).collect())
    }

    /// Vocabulary over `words` in the given order, after the reserved ids.
    pub fn from_words(words: Vec<String>) -> Self {
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32 + 2))
            .collect();
        Vocabulary { words, index }
    }

    /// Number of ids including the two reserved ones.
    pub fn len(&self) -> usize {
        self.words.len() + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self, word: &str) -> u32 {
        self.index.get(word).copied().unwrap_or(UNK)
    }

    pub fn ids(&self, words: &[String]) -> Vec<u32> {
        words.iter().map(|w| self.id(w)).collect()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}

/// A probability vector over the BIO tags of a label set.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelDistribution {
    pub probs: Vec<f64>,
}

impl LabelDistribution {
    pub fn argmax(&self) -> usize {
        argmax(&self.probs)
    }
}

/// First index of the maximum.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

// Offsets of each tensor in the flat parameter vector.
#[derive(Clone, Copy, Debug)]
struct Layout {
    vocab: usize,
    emb: usize,
    input: usize,
    hidden: usize,
    tags: usize,
}

impl Layout {
    fn emb(&self) -> std::ops::Range<usize> {
        0..self.vocab * self.emb
    }
    fn w1(&self) -> std::ops::Range<usize> {
        let s = self.emb().end;
        s..s + self.input * self.hidden
    }
    fn b1(&self) -> std::ops::Range<usize> {
        let s = self.w1().end;
        s..s + self.hidden
    }
    fn w2(&self) -> std::ops::Range<usize> {
        let s = self.b1().end;
        s..s + self.hidden * self.tags
    }
    fn b2(&self) -> std::ops::Range<usize> {
        let s = self.w2().end;
        s..s + self.tags
    }
    fn len(&self) -> usize {
        self.b2().end
    }
}

/// Tagger parameters with the vocabulary and label set they were built for.
#[derive(Clone, Debug, PartialEq)]
pub struct TaggerModel {
    pub config: TaggerConfig,
    pub labels: LabelSet,
    pub vocab: Vocabulary,
    params: Vec<f64>,
}

// Intermediate values of one forward pass over a batch of tokens.
struct Activations {
    windows: Vec<u32>,
    x: Array2<f64>,
    h: Array2<f64>,
    logits: Array2<f64>,
}

impl TaggerModel {
    /// Fresh model with parameters drawn uniformly from [-0.1, 0.1].
    pub fn new(config: TaggerConfig, labels: LabelSet, vocab: Vocabulary) -> Result<Self> {
        config.validate()?;
        let mut model = TaggerModel {
            config,
            labels,
            vocab,
            params: Vec::new(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(model.config.seed);
        model.params = (0..model.layout().len())
            .map(|_| rng.gen_range(-0.1..=0.1))
            .collect();
        Ok(model)
    }

    /// Builds the vocabulary from `sentences` and initializes a model.
    pub fn for_corpus<'a>(
        config: TaggerConfig,
        labels: LabelSet,
        sentences: impl IntoIterator<Item = &'a [String]>,
    ) -> Result<Self> {
        let vocab = Vocabulary::build(
            sentences.into_iter().flat_map(|s| s.iter().map(String::as_str)),
            config.min_count,
        );
        Self::new(config, labels, vocab)
    }

    fn layout(&self) -> Layout {
        Layout {
            vocab: self.vocab.len(),
            emb: self.config.embedding_dim,
            input: self.config.input_dim(),
            hidden: self.config.hidden_dim,
            tags: self.labels.num_tags(),
        }
    }

    pub fn num_tags(&self) -> usize {
        self.labels.num_tags()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub(crate) fn set_params(&mut self, params: Vec<f64>) -> Result<()> {
        if params.len() != self.layout().len() {
            return Err(Error::config(format!(
                "expected {} parameters, got {}",
                self.layout().len(),
                params.len()
            )));
        }
        self.params = params;
        Ok(())
    }

    /// Zeroes the output layer, which makes every prediction uniform.
    pub fn zero_output_layer(&mut self) {
        let l = self.layout();
        self.params[l.w2().start..l.b2().end].iter_mut().for_each(|p| *p = 0.0);
    }

    fn view(&self, range: std::ops::Range<usize>, rows: usize, cols: usize) -> ArrayView2<'_, f64> {
        ArrayView2::from_shape((rows, cols), &self.params[range]).expect("layout")
    }

    // Window ids for every token of every sentence, row-major.
    fn windows(&self, sentences: &[&[u32]]) -> Vec<u32> {
        let w = self.config.context_window as isize;
        let mut out = Vec::new();
        for ids in sentences {
            let n = ids.len() as isize;
            for i in 0..n {
                for j in i - w..=i + w {
                    out.push(if j < 0 || j >= n { PAD } else { ids[j as usize] });
                }
            }
        }
        out
    }

    fn activations(&self, sentences: &[&[u32]]) -> Activations {
        let l = self.layout();
        let windows = self.windows(sentences);
        let width = 2 * self.config.context_window + 1;
        let n = windows.len() / width;
        let d = l.emb;
        let emb = &self.params[l.emb()];
        let mut x = Array2::zeros((n, l.input));
        for (r, mut row) in x.axis_iter_mut(Axis(0)).enumerate() {
            let dst = row.as_slice_mut().expect("standard layout");
            for (k, &id) in windows[r * width..(r + 1) * width].iter().enumerate() {
                let id = id as usize;
                dst[k * d..(k + 1) * d].copy_from_slice(&emb[id * d..(id + 1) * d]);
            }
        }
        let mut h = Array2::zeros((n, l.hidden));
        h.rows_mut()
            .into_iter()
            .for_each(|mut r| r.assign(&ndarray::aview1(&self.params[l.b1()])));
        general_mat_mul(1.0, &x, &self.view(l.w1(), l.input, l.hidden), 1.0, &mut h);
        h.mapv_inplace(f64::tanh);
        let mut logits = Array2::zeros((n, l.tags));
        logits
            .rows_mut()
            .into_iter()
            .for_each(|mut r| r.assign(&ndarray::aview1(&self.params[l.b2()])));
        general_mat_mul(1.0, &h, &self.view(l.w2(), l.hidden, l.tags), 1.0, &mut logits);
        Activations {
            windows,
            x,
            h,
            logits,
        }
    }

    // Accumulates dL/dtheta into `grad` given dL/dlogits.
    fn backward(&self, act: &Activations, dlogits: ArrayView2<f64>, grad: &mut [f64]) {
        let l = self.layout();
        {
            let mut gw2 = ArrayViewMut2::from_shape((l.hidden, l.tags), &mut grad[l.w2()]).expect("layout");
            general_mat_mul(1.0, &act.h.t(), &dlogits, 1.0, &mut gw2);
        }
        for (g, s) in grad[l.b2()].iter_mut().zip(dlogits.sum_axis(Axis(0))) {
            *g += s;
        }
        let mut dh = Array2::zeros((act.h.nrows(), l.hidden));
        general_mat_mul(1.0, &dlogits, &self.view(l.w2(), l.hidden, l.tags).t(), 0.0, &mut dh);
        ndarray::Zip::from(&mut dh).and(&act.h).for_each(|g, &h| *g *= 1.0 - h * h);
        {
            let mut gw1 = ArrayViewMut2::from_shape((l.input, l.hidden), &mut grad[l.w1()]).expect("layout");
            general_mat_mul(1.0, &act.x.t(), &dh, 1.0, &mut gw1);
        }
        for (g, s) in grad[l.b1()].iter_mut().zip(dh.sum_axis(Axis(0))) {
            *g += s;
        }
        let mut dx = Array2::zeros((act.x.nrows(), l.input));
        general_mat_mul(1.0, &dh, &self.view(l.w1(), l.input, l.hidden).t(), 0.0, &mut dx);
        let width = 2 * self.config.context_window + 1;
        let d = l.emb;
        let gemb = &mut grad[l.emb()];
        for (r, row) in dx.axis_iter(Axis(0)).enumerate() {
            let src = row.as_slice().expect("standard layout");
            for (k, &id) in act.windows[r * width..(r + 1) * width].iter().enumerate() {
                let id = id as usize;
                for (g, s) in gemb[id * d..(id + 1) * d].iter_mut().zip(&src[k * d..(k + 1) * d]) {
                    *g += s;
                }
            }
        }
    }

    /// Raw output scores, one row per token.
    pub fn logits(&self, words: &[String]) -> Array2<f64> {
        let ids = self.vocab.ids(words);
        self.activations(&[&ids]).logits
    }

    /// Logits for many sentences in one pass, split back per sentence.
    pub fn batch_logits(&self, sentences: &[&[String]]) -> Vec<Array2<f64>> {
        let ids: Vec<Vec<u32>> = sentences.iter().map(|s| self.vocab.ids(s)).collect();
        let refs: Vec<&[u32]> = ids.iter().map(Vec::as_slice).collect();
        let all = self.activations(&refs).logits;
        let mut out = Vec::with_capacity(ids.len());
        let mut start = 0;
        for s in &ids {
            out.push(all.slice(ndarray::s![start..start + s.len(), ..]).to_owned());
            start += s.len();
        }
        out
    }

    /// Per-token tag distributions.
    pub fn forward(&self, words: &[String]) -> Vec<LabelDistribution> {
        self.logits(words)
            .rows()
            .into_iter()
            .map(|z| {
                let z = z.to_vec();
                let lse = crate::oracle::log_sum_exp(&z);
                LabelDistribution {
                    probs: z.iter().map(|v| (v - lse).exp()).collect(),
                }
            })
            .collect()
    }

    /// Decoded tags (lowest index on ties) with orphan `I` repaired.
    pub fn predict_tags(&self, words: &[String]) -> Vec<Tag> {
        decode_with(self.logits(words).view(), self.config.decoding)
    }

    /// [`TaggerModel::predict_tags`] over many sentences.
    pub fn predict_batch(&self, sentences: &[&[String]]) -> Vec<Vec<Tag>> {
        let mut out = Vec::with_capacity(sentences.len());
        for chunk in sentences.chunks(256) {
            out.extend(self.batch_logits(chunk).iter().map(|z| decode_with(z.view(), self.config.decoding)));
        }
        out
    }

    /// Mean per-token loss over `batch` and its gradient.
    pub fn loss_and_gradient(&self, batch: &[(&[u32], &[TokenTarget])]) -> Result<(f64, Vec<f64>)> {
        let mut grad = vec![0.0; self.params.len()];
        let loss = self.accumulate_gradient(batch, &mut grad)?;
        Ok((loss, grad))
    }

    pub(crate) fn accumulate_gradient(
        &self,
        batch: &[(&[u32], &[TokenTarget])],
        grad: &mut [f64],
    ) -> Result<f64> {
        let ids: Vec<&[u32]> = batch.iter().map(|b| b.0).collect();
        let targets: Vec<TokenTarget> = batch.iter().flat_map(|b| b.1.iter().cloned()).collect();
        let n = targets.len().max(1) as f64;
        let act = self.activations(&ids);
        let mut out = sequence_loss(act.logits.view(), &targets)?;
        out.grad.mapv_inplace(|g| g / n);
        self.backward(&act, out.grad.view(), grad);
        Ok(out.loss / n)
    }
}

/// Argmax decoding of a logit matrix followed by BIO repair.
pub fn decode(logits: ArrayView2<f64>) -> Vec<Tag> {
    decode_with(logits, Decoding::Argmax)
}

pub fn decode_with(logits: ArrayView2<f64>, decoding: Decoding) -> Vec<Tag> {
    let mut tags: Vec<Tag> = logits
        .rows()
        .into_iter()
        .map(|z| {
            let z = z.to_vec();
            let index = match decoding {
                Decoding::Argmax => argmax(&z),
                Decoding::Threshold => {
                    let best = 1 + argmax(&z[1..]);
                    if z[best] > 0.0 {
                        best
                    } else {
                        0
                    }
                }
            };
            Tag::from_index(index)
        })
        .collect();
    bio::repair(&mut tags);
    tags
}
