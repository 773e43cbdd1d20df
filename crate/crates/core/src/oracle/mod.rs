//! The approximated true-label distribution `g` and the training losses built
//! on it.
//!
//! Losses are expressed as per-token [`TokenTarget`]s so that the tagger can
//! train on any mix of them. The sequence-level functions here are thin
//! wrappers that build targets and evaluate them.

mod loss;

use std::fmt;
use std::str::FromStr;

use ndarray::ArrayView2;

use crate::bio::Tag;
use crate::error::{Error, Result};
use crate::tagger::LabelDistribution;
use crate::taxonomy::{FinalLabel, Side, Taxonomy};

pub(crate) use loss::log_sum_exp;
pub use loss::{
    kl_term, plm_term, sequence_loss, soft_ce_term, token_loss, LossOutput, TokenTarget, LOG_CLAMP,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LossKind {
    NaiveCE,
    Plm,
    PlmKl,
    ClDistill,
    Aml,
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::NaiveCE => "naive-ce",
            LossKind::Plm => "plm",
            LossKind::PlmKl => "plm-kl",
            LossKind::ClDistill => "cl-distill",
            LossKind::Aml => "aml",
        })
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "naive-ce" => LossKind::NaiveCE,
            "plm" => LossKind::Plm,
            "plm-kl" => LossKind::PlmKl,
            "cl-distill" => LossKind::ClDistill,
            "aml" => LossKind::Aml,
            other => return Err(Error::config(format!("unknown loss `{other}`"))),
        })
    }
}

/// Whether an oracle row restates the observation or was filled by a model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Observed,
    ModelFilled,
}

/// Per-token oracle distributions over the final tag set.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleDistribution {
    pub tokens: Vec<LabelDistribution>,
    pub provenance: Vec<Provenance>,
}

impl OracleDistribution {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Softmax of `allowed_logits` placed on the `allowed` tags, zero elsewhere.
pub fn restricted_softmax(allowed: &[usize], allowed_logits: &[f64], num_tags: usize) -> Result<LabelDistribution> {
    if allowed.is_empty() {
        return Err(Error::EmptyAllowedSet);
    }
    if allowed_logits.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
        return Err(Error::NonFinite("aux logits"));
    }
    let lse = loss::log_sum_exp(allowed_logits);
    if lse == f64::NEG_INFINITY {
        return Err(Error::Unnormalizable);
    }
    let mut probs = vec![0.0; num_tags];
    for (&t, &z) in allowed.iter().zip(allowed_logits) {
        probs[t] = (z - lse).exp();
    }
    Ok(LabelDistribution { probs })
}

/// Oracle row for one token observed as `observed` on `side`.
///
/// `aux_logits` are the opposite side's model logits for that token. Each
/// allowed final tag takes the logit of its projection on the opposite side.
pub fn build_token_oracle(
    taxonomy: &Taxonomy,
    side: Side,
    observed: Tag,
    aux_logits: &[f64],
) -> Result<(LabelDistribution, Provenance)> {
    let allowed = taxonomy.allowed_tags(side, observed);
    let other = side.other();
    let logits: Vec<f64> = allowed
        .iter()
        .map(|&t| aux_logits[taxonomy.project_tag(Tag::from_index(t), other).index()])
        .collect();
    let dist = restricted_softmax(allowed, &logits, taxonomy.num_final_tags())?;
    let provenance = if allowed.len() == 1 {
        Provenance::Observed
    } else {
        Provenance::ModelFilled
    };
    Ok((dist, provenance))
}

/// Oracle rows for a sentence observed on `side`; `aux_logits` has one row
/// per token over the opposite side's tags.
pub fn build_oracle(
    taxonomy: &Taxonomy,
    side: Side,
    observed: &[Tag],
    aux_logits: ArrayView2<f64>,
) -> Result<OracleDistribution> {
    assert_eq!(observed.len(), aux_logits.nrows());
    let mut tokens = Vec::with_capacity(observed.len());
    let mut provenance = Vec::with_capacity(observed.len());
    for (i, &tag) in observed.iter().enumerate() {
        let row = aux_logits.row(i).to_vec();
        let (d, p) = build_token_oracle(taxonomy, side, tag, &row)?;
        tokens.push(d);
        provenance.push(p);
    }
    Ok(OracleDistribution { tokens, provenance })
}

fn one_hot_index(d: &LabelDistribution) -> Option<usize> {
    let mut hit = None;
    for (i, &p) in d.probs.iter().enumerate() {
        if p == 1.0 {
            hit = Some(i);
        } else if p != 0.0 {
            return None;
        }
    }
    hit
}

/// CE on observed rows, `-log <f, g>` on model-filled rows.
pub fn plm_targets(oracle: &OracleDistribution) -> Vec<TokenTarget> {
    soft_targets(oracle, TokenTarget::Partial)
}

/// CE on observed rows, `KL(g || f)` on model-filled rows.
pub fn plm_kl_targets(oracle: &OracleDistribution) -> Vec<TokenTarget> {
    soft_targets(oracle, TokenTarget::Distill)
}

fn soft_targets(oracle: &OracleDistribution, soft: fn(Vec<f64>) -> TokenTarget) -> Vec<TokenTarget> {
    oracle
        .tokens
        .iter()
        .map(|d| match one_hot_index(d) {
            Some(t) => TokenTarget::Hard(t),
            None => soft(d.probs.clone()),
        })
        .collect()
}

/// Final tag of an observation that pins down a single final label.
pub fn lift_observed(taxonomy: &Taxonomy, side: Side, observed: Tag) -> Option<usize> {
    match observed {
        Tag::O => Some(0),
        _ => match taxonomy.allowed_tags(side, observed) {
            [t] => Some(*t),
            _ => None,
        },
    }
}

/// Observed tags read literally in the final space: `O` stays `O`.
pub fn naive_targets(taxonomy: &Taxonomy, side: Side, observed: &[Tag]) -> Result<Vec<TokenTarget>> {
    observed
        .iter()
        .map(|&t| {
            lift_observed(taxonomy, side, t).map(TokenTarget::Hard).ok_or_else(|| {
                Error::config("naive join needs every observed type to map to a single final type")
            })
        })
        .collect()
}

/// Plain CL maps teacher mass unchanged; CL++ restricts it to the allowed set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClVariant {
    Cl,
    ClPlusPlus,
}

/// Targets for a student trained on side-B sentences with a side-A teacher.
///
/// Singleton observations get CE. Other tokens get `KL(teacher || f)`. The
/// plain variant places each teacher tag `x-a` on final `x-(a, O)`, which
/// only exists when `a` is not a subtype; non-disjoint taxonomies are
/// rejected.
pub fn cl_targets(
    taxonomy: &Taxonomy,
    observed: &[Tag],
    teacher_logits: ArrayView2<f64>,
    variant: ClVariant,
) -> Result<Vec<TokenTarget>> {
    let side = Side::B;
    match variant {
        ClVariant::ClPlusPlus => {
            let oracle = build_oracle(taxonomy, side, observed, teacher_logits)?;
            Ok(plm_kl_targets(&oracle))
        }
        ClVariant::Cl => {
            if !taxonomy.is_disjoint() {
                return Err(Error::config("plain CL needs a disjoint taxonomy; use cl++"));
            }
            let k = taxonomy.num_final_tags();
            let mapped: Vec<usize> = (0..teacher_logits.ncols())
                .map(|t| match Tag::from_index(t) {
                    Tag::O => 0,
                    tag => {
                        let l = taxonomy
                            .space()
                            .position(FinalLabel { a: tag.label(), b: None })
                            .expect("disjoint space holds every (a, O)");
                        tag.relabel(l).index()
                    }
                })
                .collect();
            observed
                .iter()
                .enumerate()
                .map(|(i, &tag)| {
                    if let Some(t) = lift_observed(taxonomy, side, tag).filter(|_| tag != Tag::O) {
                        return Ok(TokenTarget::Hard(t));
                    }
                    let row = teacher_logits.row(i).to_vec();
                    let teacher = restricted_softmax(&mapped, &row, k)?;
                    Ok(TokenTarget::Distill(teacher.probs))
                })
                .collect()
        }
    }
}

/// How AML assigns sigmoid targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AmlTargets {
    /// Target 1 on a fully determined tag, 0 on every tag outside the
    /// allowed set; allowed tags of an ambiguous token carry no loss.
    Masked,
    /// Target 1 on every allowed tag and 0 on every other tag.
    Allowed,
    /// Only allowed tags are scored; target 1 only when the allowed set is a
    /// singleton.
    Determined,
}

impl FromStr for AmlTargets {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "masked" => Ok(AmlTargets::Masked),
            "allowed" => Ok(AmlTargets::Allowed),
            "determined" => Ok(AmlTargets::Determined),
            other => Err(Error::config(format!("unknown AML target mode `{other}`"))),
        }
    }
}

pub fn aml_targets(taxonomy: &Taxonomy, side: Side, observed: &[Tag], mode: AmlTargets) -> Vec<TokenTarget> {
    let k = taxonomy.num_final_tags();
    observed
        .iter()
        .map(|&tag| {
            let allowed = taxonomy.allowed_tags(side, tag);
            let pairs = match mode {
                AmlTargets::Masked => (0..k)
                    .filter_map(|t| match (allowed.contains(&t), allowed.len() == 1) {
                        (false, _) => Some((t, 0.0)),
                        (true, true) => Some((t, 1.0)),
                        (true, false) => None,
                    })
                    .collect(),
                AmlTargets::Allowed => (0..k)
                    .map(|t| (t, if allowed.contains(&t) { 1.0 } else { 0.0 }))
                    .collect(),
                AmlTargets::Determined => {
                    let y = if allowed.len() == 1 { 1.0 } else { 0.0 };
                    allowed.iter().map(|&t| (t, y)).collect()
                }
            };
            TokenTarget::Sigmoid(pairs)
        })
        .collect()
}

pub fn naive_ce_loss(logits: ArrayView2<f64>, tags: &[Tag]) -> Result<LossOutput> {
    let targets: Vec<TokenTarget> = tags.iter().map(|t| TokenTarget::Hard(t.index())).collect();
    sequence_loss(logits, &targets)
}

pub fn plm_loss(logits: ArrayView2<f64>, oracle: &OracleDistribution) -> Result<LossOutput> {
    sequence_loss(logits, &plm_targets(oracle))
}

pub fn plm_kl_loss(logits: ArrayView2<f64>, oracle: &OracleDistribution) -> Result<LossOutput> {
    sequence_loss(logits, &plm_kl_targets(oracle))
}

pub fn cl_distill_loss(
    logits: ArrayView2<f64>,
    taxonomy: &Taxonomy,
    observed: &[Tag],
    teacher_logits: ArrayView2<f64>,
    variant: ClVariant,
) -> Result<LossOutput> {
    sequence_loss(logits, &cl_targets(taxonomy, observed, teacher_logits, variant)?)
}

pub fn aml_loss(
    logits: ArrayView2<f64>,
    taxonomy: &Taxonomy,
    side: Side,
    observed: &[Tag],
    mode: AmlTargets,
) -> Result<LossOutput> {
    sequence_loss(logits, &aml_targets(taxonomy, side, observed, mode))
}
