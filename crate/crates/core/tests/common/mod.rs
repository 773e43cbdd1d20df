//! Reference implementations shared by the integration tests. Everything here
//! is written from the definitions, independently of the library code paths
//! it is compared against.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use taxex::bio::{LabelSet, Tag};
use taxex::oracle::TokenTarget;
use taxex::tagger::{TaggerConfig, TaggerModel, Vocabulary};
use taxex::taxonomy::{RelationKind, RelationMatrix, Side, Taxonomy};

pub type Pair = (Option<usize>, Option<usize>);

/// A relation assignment over `na` A-types and `nb` B-types, `kinds[a][b]`
/// read as "a is <kind> of b".
#[derive(Clone, Debug)]
pub struct Relations {
    pub na: usize,
    pub nb: usize,
    pub kinds: Vec<Vec<RelationKind>>,
}

impl Relations {
    pub fn names(&self) -> (Vec<String>, Vec<String>) {
        (
            (0..self.na).map(|i| format!("A{i}")).collect(),
            (0..self.nb).map(|i| format!("B{i}")).collect(),
        )
    }

    pub fn build(&self) -> taxex::Result<Taxonomy> {
        let (a, b) = self.names();
        let mut rel = RelationMatrix::new();
        for (i, row) in self.kinds.iter().enumerate() {
            for (j, &k) in row.iter().enumerate() {
                rel.declare(&a[i], &b[j], k);
            }
        }
        Taxonomy::new(&a, &b, &rel)
    }

    /// Final labels by direct enumeration: related pairs, plus each type alone
    /// unless it is a subtype of some type of the other side.
    pub fn label_space(&self) -> BTreeSet<Pair> {
        let mut out = BTreeSet::new();
        for a in 0..self.na {
            for b in 0..self.nb {
                if self.kinds[a][b] != RelationKind::Disjoint {
                    out.insert((Some(a), Some(b)));
                }
            }
        }
        for a in 0..self.na {
            if !(0..self.nb).any(|b| self.kinds[a][b] == RelationKind::Subtype) {
                out.insert((Some(a), None));
            }
        }
        for b in 0..self.nb {
            if !(0..self.na).any(|a| self.kinds[a][b] == RelationKind::Supertype) {
                out.insert((None, Some(b)));
            }
        }
        out
    }

    /// Everything in the space (plus O) whose `side` component equals the observation.
    pub fn allowed(&self, side: Side, observed: Option<usize>) -> BTreeSet<Pair> {
        let mut out: BTreeSet<Pair> = self
            .label_space()
            .into_iter()
            .filter(|&(a, b)| match side {
                Side::A => a == observed,
                Side::B => b == observed,
            })
            .collect();
        if observed.is_none() {
            out.insert((None, None));
        }
        out
    }
}

pub fn random_relations(rng: &mut impl Rng, max_types: usize) -> Relations {
    let total = rng.gen_range(2..=max_types);
    let na = rng.gen_range(1..total);
    let nb = total - na;
    let kinds = (0..na)
        .map(|_| {
            (0..nb)
                .map(|_| match rng.gen_range(0..8) {
                    0 => RelationKind::Subtype,
                    1 => RelationKind::Supertype,
                    2 => RelationKind::Overlapping,
                    _ => RelationKind::Disjoint,
                })
                .collect()
        })
        .collect();
    Relations { na, nb, kinds }
}

/// Library allowed set mapped to component pairs; `None` member is `O`.
pub fn library_allowed(tax: &Taxonomy, side: Side, observed: Option<usize>) -> BTreeSet<Pair> {
    tax.allowed_labels(side, observed)
        .members()
        .iter()
        .map(|m| match m {
            None => (None, None),
            Some(l) => {
                let label = tax.space().label(*l);
                (label.a, label.b)
            }
        })
        .collect()
}

/// A probability vector; with `sparse`, some entries are exactly zero.
pub fn random_dist(rng: &mut impl Rng, k: usize, sparse: bool) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..k)
            .map(|_| {
                if sparse && rng.gen_bool(0.3) {
                    0.0
                } else {
                    // exponential draws give a flat Dirichlet
                    -rng.gen_range(f64::MIN_POSITIVE..1.0f64).ln()
                }
            })
            .collect();
        let s: f64 = v.iter().sum();
        if s > 0.0 {
            v.iter_mut().for_each(|x| *x /= s);
            return v;
        }
    }
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// `-ln sum_i f_i g_i`
pub fn plm_ref(f: &[f64], g: &[f64]) -> f64 {
    -f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>().ln()
}

/// `sum_i g_i ln(g_i / f_i)`
pub fn kl_ref(f: &[f64], g: &[f64]) -> f64 {
    f.iter()
        .zip(g)
        .filter(|(_, &gi)| gi > 0.0)
        .map(|(fi, gi)| gi * (gi / fi).ln())
        .sum()
}

pub fn words(n: usize, rng: &mut impl Rng, vocab: usize) -> Vec<String> {
    (0..n).map(|_| format!("w{}", rng.gen_range(0..vocab))).collect()
}

/// Small model with parameters scaled so outputs are not near-uniform.
pub fn random_model(rng: &mut impl Rng, labels: LabelSet, vocab: usize) -> TaggerModel {
    let config = TaggerConfig {
        embedding_dim: 4,
        context_window: 1,
        hidden_dim: 5,
        seed: rng.gen(),
        ..Default::default()
    };
    let words: Vec<String> = (0..vocab).map(|i| format!("w{i}")).collect();
    let mut model = TaggerModel::new(config, labels, Vocabulary::from_words(words)).unwrap();
    let scale = rng.gen_range(1.0..8.0);
    model.params_mut().iter_mut().for_each(|p| *p *= scale);
    model
}

/// Central finite differences of the mean batch loss against the analytic
/// gradient; returns (coordinates within `tol`, coordinates checked).
pub fn finite_difference_check(model: &TaggerModel, batch: &[(&[u32], &[TokenTarget])], tol: f64) -> (usize, usize) {
    let (_, grad) = model.loss_and_gradient(batch).unwrap();
    let mut probe = model.clone();
    let h = 1e-5;
    let mut ok = 0;
    for i in 0..grad.len() {
        let orig = probe.params()[i];
        probe.params_mut()[i] = orig + h;
        let (up, _) = probe.loss_and_gradient(batch).unwrap();
        probe.params_mut()[i] = orig - h;
        let (down, _) = probe.loss_and_gradient(batch).unwrap();
        probe.params_mut()[i] = orig;
        let numeric = (up - down) / (2.0 * h);
        let scale = grad[i].abs().max(numeric.abs());
        let rel = if scale < 1e-12 { 0.0 } else { (grad[i] - numeric).abs() / scale };
        if rel < tol {
            ok += 1;
        }
    }
    (ok, grad.len())
}

/// Random observation on `side`: BIO-consistent tags over that side's labels.
pub fn random_observed(rng: &mut impl Rng, tax: &Taxonomy, side: Side, n: usize) -> Vec<Tag> {
    let labels = tax.side(side).len();
    let mut tags = Vec::with_capacity(n);
    for i in 0..n {
        let prev = if i > 0 { tags[i - 1] } else { Tag::O };
        let tag = match rng.gen_range(0..3) {
            0 => Tag::O,
            1 => Tag::B(rng.gen_range(0..labels)),
            _ => match prev {
                Tag::B(l) | Tag::I(l) => Tag::I(l),
                Tag::O => Tag::O,
            },
        };
        tags.push(tag);
    }
    tags
}
