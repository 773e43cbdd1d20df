//! Construction of partially annotated corpus pairs from a fully annotated
//! corpus.
//!
//! A [`Setup`] decides, for every gold `(coarse, fine)` label, what side A and
//! side B would have annotated. Projecting a corpus through it yields the two
//! observed views plus final-space gold; partitioning the sentences then gives
//! `D_A` and `D_B`.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::bio::{LabelSet, Tag};
use crate::error::{Error, Result};
use crate::taxonomy::{RelationKind, RelationMatrix, Side, Taxonomy};

use super::{partition_indices, Corpus, Sentence, SourceSide};

#[derive(Clone, Debug)]
pub struct Setup {
    taxonomy: Arc<Taxonomy>,
    // per coarse label: its side and index within that side, if any
    coarse: Vec<Option<(Side, usize)>>,
    // fine label -> side label index overrides
    fine_a: HashMap<usize, usize>,
    fine_b: HashMap<usize, usize>,
}

/// The three views of one projected corpus, sentence-aligned.
#[derive(Clone, Debug)]
pub struct Projected {
    /// Side A observations, gold attached.
    pub a: Corpus,
    /// Side B observations, gold attached.
    pub b: Corpus,
    /// Fully annotated in the final label space.
    pub full: Corpus,
}

/// `D_A` and `D_B` with the setup that produced them.
#[derive(Clone, Debug)]
pub struct PartialSetup {
    pub setup: Setup,
    pub d_a: Corpus,
    pub d_b: Corpus,
}

impl PartialSetup {
    pub fn taxonomy(&self) -> &Arc<Taxonomy> {
        self.setup.taxonomy()
    }
}

/// Type and sentence split for the disjoint setup.
#[derive(Clone, Debug)]
pub struct SplitSpec {
    /// Side of every label of the full corpus, by label index.
    pub type_split: Vec<Side>,
    pub sentence_split_seed: u64,
    /// Fraction of sentences going to side A.
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct SubtypeSpec {
    /// Side of every coarse label. The designated type must be on side A.
    pub coarse_split: Vec<Side>,
    pub designated: String,
    /// Fine labels of the designated type that join side B.
    pub subtypes: Vec<String>,
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct OverlapSpec {
    /// Side of every coarse label; the entry of `coarse_type` is ignored.
    pub coarse_split: Vec<Side>,
    pub coarse_type: String,
    pub subset_a: Vec<String>,
    pub subset_b: Vec<String>,
    pub ratio: f64,
}

fn check_ratio(ratio: f64) -> Result<()> {
    if ratio > 0.0 && ratio < 1.0 {
        Ok(())
    } else {
        Err(Error::config(format!("sentence ratio {ratio} must lie in (0, 1)")))
    }
}

fn assign_coarse(labels: &LabelSet, split: &[Side], skip: Option<usize>) -> Result<(Vec<String>, Vec<String>, Vec<Option<(Side, usize)>>)> {
    if split.len() != labels.len() {
        return Err(Error::config(format!(
            "type split covers {} types, corpus has {}",
            split.len(),
            labels.len()
        )));
    }
    let mut side_a = Vec::new();
    let mut side_b = Vec::new();
    let mut coarse = Vec::with_capacity(labels.len());
    for (i, side) in split.iter().enumerate() {
        if Some(i) == skip {
            coarse.push(None);
            continue;
        }
        let name = labels.name(i).to_string();
        match side {
            Side::A => {
                coarse.push(Some((Side::A, side_a.len())));
                side_a.push(name);
            }
            Side::B => {
                coarse.push(Some((Side::B, side_b.len())));
                side_b.push(name);
            }
        }
    }
    Ok((side_a, side_b, coarse))
}

impl Setup {
    /// Every coarse label goes to the side named in `type_split`.
    pub fn disjoint(labels: &LabelSet, type_split: &[Side]) -> Result<Setup> {
        let (side_a, side_b, coarse) = assign_coarse(labels, type_split, None)?;
        if side_a.is_empty() || side_b.is_empty() {
            return Err(Error::config("each side needs at least one entity type"));
        }
        Ok(Setup {
            taxonomy: Arc::new(Taxonomy::disjoint(&side_a, &side_b)?),
            coarse,
            fine_a: HashMap::new(),
            fine_b: HashMap::new(),
        })
    }

    /// The designated side-A type keeps its coarse label on side A while the
    /// selected fine subtypes become side-B types related as subtypes.
    pub fn subtype(full: &Corpus, spec: &SubtypeSpec) -> Result<Setup> {
        let fine = full
            .fine
            .as_ref()
            .ok_or_else(|| Error::config("subtype setup needs a two-level corpus"))?;
        let designated = full
            .labels
            .get(&spec.designated)
            .ok_or_else(|| Error::config(format!("unknown coarse type `{}`", spec.designated)))?;
        if spec.subtypes.is_empty() {
            return Err(Error::NoSubtypes(spec.designated.clone()));
        }
        let (side_a, mut side_b, coarse) = assign_coarse(&full.labels, &spec.coarse_split, None)?;
        if coarse[designated].map(|(s, _)| s) != Some(Side::A) {
            return Err(Error::config(format!(
                "designated type `{}` must be on side A",
                spec.designated
            )));
        }
        let mut fine_b = HashMap::new();
        let mut relations = RelationMatrix::new();
        for name in &spec.subtypes {
            let f = fine
                .labels
                .get(name)
                .filter(|&f| fine.parent[f] == designated)
                .ok_or_else(|| {
                    Error::config(format!("`{name}` is not a subtype of `{}`", spec.designated))
                })?;
            if fine_b.contains_key(&f) {
                continue;
            }
            fine_b.insert(f, side_b.len());
            side_b.push(name.clone());
            relations.declare(&spec.designated, name, RelationKind::Supertype);
        }
        if side_b.is_empty() {
            return Err(Error::config("side B has no entity types"));
        }
        relations.fill_disjoint(&side_a, &side_b);
        Ok(Setup {
            taxonomy: Arc::new(Taxonomy::new(&side_a, &side_b, &relations)?),
            coarse,
            fine_a: HashMap::new(),
            fine_b,
        })
    }

    /// The chosen coarse type is replaced by `<type>_A` on side A (fine labels
    /// in `subset_a`) and `<type>_B` on side B (fine labels in `subset_b`).
    pub fn overlapping(full: &Corpus, spec: &OverlapSpec) -> Result<Setup> {
        let fine = full
            .fine
            .as_ref()
            .ok_or_else(|| Error::config("overlapping setup needs a two-level corpus"))?;
        let target = full
            .labels
            .get(&spec.coarse_type)
            .ok_or_else(|| Error::config(format!("unknown coarse type `{}`", spec.coarse_type)))?;
        let resolve = |names: &[String]| -> Result<BTreeSet<usize>> {
            names
                .iter()
                .map(|n| {
                    fine.labels
                        .get(n)
                        .filter(|&f| fine.parent[f] == target)
                        .ok_or_else(|| {
                            Error::config(format!("`{n}` is not a subtype of `{}`", spec.coarse_type))
                        })
                })
                .collect()
        };
        let subset_a = resolve(&spec.subset_a)?;
        let subset_b = resolve(&spec.subset_b)?;
        if subset_a.intersection(&subset_b).next().is_none() {
            return Err(Error::DisjointSubsets);
        }
        let (mut side_a, mut side_b, coarse) =
            assign_coarse(&full.labels, &spec.coarse_split, Some(target))?;
        let name_a = format!("{}_A", spec.coarse_type);
        let name_b = format!("{}_B", spec.coarse_type);
        let (ia, ib) = (side_a.len(), side_b.len());
        side_a.push(name_a.clone());
        side_b.push(name_b.clone());
        let mut relations = RelationMatrix::new();
        relations.declare(&name_a, &name_b, RelationKind::Overlapping);
        relations.fill_disjoint(&side_a, &side_b);
        Ok(Setup {
            taxonomy: Arc::new(Taxonomy::new(&side_a, &side_b, &relations)?),
            coarse,
            fine_a: subset_a.into_iter().map(|f| (f, ia)).collect(),
            fine_b: subset_b.into_iter().map(|f| (f, ib)).collect(),
        })
    }

    pub fn taxonomy(&self) -> &Arc<Taxonomy> {
        &self.taxonomy
    }

    /// What each side would annotate for a gold `(coarse, fine)` label.
    pub fn side_labels(&self, coarse: Option<usize>, fine: Option<usize>) -> (Option<usize>, Option<usize>) {
        let by_coarse = |side: Side| {
            coarse
                .and_then(|c| self.coarse[c])
                .filter(|(s, _)| *s == side)
                .map(|(_, i)| i)
        };
        let a = fine
            .and_then(|f| self.fine_a.get(&f).copied())
            .or_else(|| by_coarse(Side::A));
        let b = fine
            .and_then(|f| self.fine_b.get(&f).copied())
            .or_else(|| by_coarse(Side::B));
        (a, b)
    }

    /// Projects a fully annotated corpus into its side-A, side-B and final views.
    pub fn project(&self, full: &Corpus) -> Result<Projected> {
        let tax = &self.taxonomy;
        let mut a_sentences = Vec::with_capacity(full.len());
        let mut b_sentences = Vec::with_capacity(full.len());
        let mut f_sentences = Vec::with_capacity(full.len());
        for sentence in &full.sentences {
            let n = sentence.len();
            let (mut ta, mut tb, mut tf) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
            for (i, tag) in sentence.tags.iter().enumerate() {
                let fine = sentence.fine.as_ref().and_then(|f| f[i]);
                let (a, b) = self.side_labels(tag.label(), fine);
                let tag_a = a.map_or(Tag::O, |l| tag.relabel(l));
                let tag_b = b.map_or(Tag::O, |l| tag.relabel(l));
                ta.push(tag_a);
                tb.push(tag_b);
                tf.push(tax.project_gold_tag(tag_a, tag_b)?);
            }
            let make = |tags: Vec<Tag>, side: SourceSide| {
                let mut s = Sentence::new(sentence.words.clone(), tags, side);
                s.gold = Some(tf.clone());
                s
            };
            a_sentences.push(make(ta, SourceSide::A));
            b_sentences.push(make(tb, SourceSide::B));
            f_sentences.push(make(tf.clone(), SourceSide::Full));
        }
        Ok(Projected {
            a: Corpus::new(a_sentences, tax.side_a().clone(), full.role),
            b: Corpus::new(b_sentences, tax.side_b().clone(), full.role),
            full: Corpus::new(f_sentences, tax.space().names().clone(), full.role),
        })
    }

    /// Projects, then sends `round(ratio * n)` shuffled sentences to side A
    /// and the rest to side B.
    pub fn split(&self, full: &Corpus, seed: u64, ratio: f64) -> Result<PartialSetup> {
        check_ratio(ratio)?;
        let projected = self.project(full)?;
        let (ia, ib) = partition_indices(full.len(), ratio, seed);
        Ok(PartialSetup {
            setup: self.clone(),
            d_a: projected.a.select(&ia),
            d_b: projected.b.select(&ib),
        })
    }
}

/// Disjoint setup: splits types and sentences, scrubbing complementary types.
pub fn split_and_scrub(full: &Corpus, spec: &SplitSpec) -> Result<PartialSetup> {
    check_ratio(spec.ratio)?;
    Setup::disjoint(&full.labels, &spec.type_split)?.split(full, spec.sentence_split_seed, spec.ratio)
}

pub fn build_subtype_setup(full: &Corpus, spec: &SubtypeSpec, seed: u64) -> Result<PartialSetup> {
    Setup::subtype(full, spec)?.split(full, seed, spec.ratio)
}

pub fn build_overlapping_setup(full: &Corpus, spec: &OverlapSpec, seed: u64) -> Result<PartialSetup> {
    Setup::overlapping(full, spec)?.split(full, seed, spec.ratio)
}
