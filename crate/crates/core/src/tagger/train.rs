use std::fmt::Write as _;

use log::debug;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::oracle::TokenTarget;

use super::TaggerModel;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPSILON: f64 = 1e-8;

/// One training sentence with a target per token.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainSentence {
    pub words: Vec<String>,
    pub targets: Vec<TokenTarget>,
}

impl TrainSentence {
    pub fn new(words: Vec<String>, targets: Vec<TokenTarget>) -> Self {
        assert_eq!(words.len(), targets.len(), "one target per token");
        TrainSentence { words, targets }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogEntry {
    pub epoch: usize,
    pub split: &'static str,
    pub loss: Option<f64>,
    pub micro_f1: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingLog {
    pub entries: Vec<LogEntry>,
    /// Epoch whose parameters were kept.
    pub best_epoch: usize,
    pub best_score: f64,
}

impl TrainingLog {
    /// `epoch,split,loss,micro_f1` with empty cells for missing values.
    pub fn to_csv(&self) -> String {
        let cell = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.6}"));
        let mut out = String::from("epoch,split,loss,micro_f1\n");
        for e in &self.entries {
            let _ = writeln!(out, "{},{},{},{}", e.epoch, e.split, cell(e.loss), cell(e.micro_f1));
        }
        out
    }

    pub fn epochs_run(&self) -> usize {
        self.entries.iter().map(|e| e.epoch).max().unwrap_or(0)
    }
}

/// Trains `model` in place with Adam on minibatches of shuffled sentences.
///
/// After every epoch `validate` scores the model; training stops once the
/// score has not improved for `early_stop_patience` epochs and the best
/// parameters are restored.
pub fn train(
    model: &mut TaggerModel,
    data: &[TrainSentence],
    validate: &mut dyn FnMut(&TaggerModel) -> f64,
) -> Result<TrainingLog> {
    let config = model.config.clone();
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let ids: Vec<Vec<u32>> = data.iter().map(|s| model.vocab.ids(&s.words)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    let n = model.params().len();
    let (mut m, mut v, mut grad) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut step = 0i32;
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut log = TrainingLog {
        best_score: f64::NEG_INFINITY,
        ..Default::default()
    };
    let mut best_params = model.params().to_vec();
    let mut since_best = 0;

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let (mut total, mut tokens) = (0.0, 0usize);
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<(&[u32], &[TokenTarget])> = chunk
                .iter()
                .map(|&i| (ids[i].as_slice(), data[i].targets.as_slice()))
                .collect();
            let count: usize = batch.iter().map(|b| b.0.len()).sum();
            grad.iter_mut().for_each(|g| *g = 0.0);
            let loss = match model.accumulate_gradient(&batch, &mut grad) {
                Ok(l) if l.is_finite() => l,
                Ok(l) => return Err(Error::Divergence { epoch, loss: l }),
                Err(Error::NonFinite(_)) => return Err(Error::Divergence { epoch, loss: f64::NAN }),
                Err(e) => return Err(e),
            };
            total += loss * count as f64;
            tokens += count;

            step += 1;
            let lr = config.learning_rate * (1.0 - BETA2.powi(step)).sqrt() / (1.0 - BETA1.powi(step));
            for (((p, g), m), v) in model.params_mut().iter_mut().zip(&grad).zip(&mut m).zip(&mut v) {
                *m = BETA1 * *m + (1.0 - BETA1) * g;
                *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                *p -= lr * *m / (v.sqrt() + EPSILON);
            }
        }
        let epoch_loss = total / tokens.max(1) as f64;
        if !epoch_loss.is_finite() || model.params().iter().any(|p| !p.is_finite()) {
            return Err(Error::Divergence { epoch, loss: epoch_loss });
        }
        log.entries.push(LogEntry {
            epoch,
            split: "train",
            loss: Some(epoch_loss),
            micro_f1: None,
        });
        let score = validate(model);
        log.entries.push(LogEntry {
            epoch,
            split: "validation",
            loss: None,
            micro_f1: Some(score),
        });
        debug!("epoch {epoch}: loss {epoch_loss:.4}, validation {score:.4}");
        if score > log.best_score {
            log.best_score = score;
            log.best_epoch = epoch;
            best_params.copy_from_slice(model.params());
            since_best = 0;
        } else {
            since_best += 1;
        }
        if since_best >= config.early_stop_patience {
            break;
        }
    }
    model.set_params(best_params)?;
    Ok(log)
}
