//! Entity-type sets, the relation matrix between them, and the redefined
//! output label space.
//!
//! The final label space is built from pairs `(a, b)` where `a` is a type of
//! side A or `O` and `b` a type of side B or `O`. A pair of two real types
//! only exists when the two types are related by subtype, supertype or
//! overlap. All per-token probability vectors index tags of this space in
//! canonical order (see [`FinalLabelSpace`]).

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::bio::{LabelSet, Tag};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }

    fn slot(self) -> usize {
        match self {
            Side::A => 0,
            Side::B => 1,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::A => "A",
            Side::B => "B",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EntityType {
    pub name: String,
    pub side: Side,
}

impl EntityType {
    pub fn new(name: impl Into<String>, side: Side) -> Self {
        EntityType {
            name: name.into(),
            side,
        }
    }
}

/// How a type of one side relates to a type of the other side.
///
/// `R(a, b) = Supertype` reads "a is a supertype of b".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RelationKind {
    Disjoint,
    Subtype,
    Supertype,
    Overlapping,
}

impl RelationKind {
    pub fn dual(self) -> Self {
        match self {
            RelationKind::Subtype => RelationKind::Supertype,
            RelationKind::Supertype => RelationKind::Subtype,
            other => other,
        }
    }

    pub fn is_disjoint(self) -> bool {
        self == RelationKind::Disjoint
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RelationKind::Disjoint => "disjoint",
            RelationKind::Subtype => "subtype",
            RelationKind::Supertype => "supertype",
            RelationKind::Overlapping => "overlapping",
        })
    }
}

impl FromStr for RelationKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "disjoint" => Ok(RelationKind::Disjoint),
            "subtype" => Ok(RelationKind::Subtype),
            "supertype" => Ok(RelationKind::Supertype),
            "overlapping" => Ok(RelationKind::Overlapping),
            other => Err(format!("unknown relation `{other}`")),
        }
    }
}

/// Relation entries keyed by ordered pairs of type names.
#[derive(Clone, Debug, Default)]
pub struct RelationMatrix {
    entries: HashMap<(String, String), RelationKind>,
}

impl RelationMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every cross pair of `side_a` x `side_b` set to disjoint, both directions.
    pub fn all_disjoint<S: AsRef<str>>(side_a: &[S], side_b: &[S]) -> Self {
        let mut matrix = Self::new();
        for a in side_a {
            for b in side_b {
                matrix.declare(a.as_ref(), b.as_ref(), RelationKind::Disjoint);
            }
        }
        matrix
    }

    /// Sets a single direction only.
    pub fn set(&mut self, left: &str, right: &str, kind: RelationKind) {
        self.entries
            .insert((left.to_string(), right.to_string()), kind);
    }

    /// Sets `R(left, right) = kind` and its dual.
    pub fn declare(&mut self, left: &str, right: &str, kind: RelationKind) {
        self.set(left, right, kind);
        self.set(right, left, kind.dual());
    }

    pub fn get(&self, left: &str, right: &str) -> Option<RelationKind> {
        self.entries
            .get(&(left.to_string(), right.to_string()))
            .copied()
    }

    /// Fills every undefined cross pair with disjoint.
    pub fn fill_disjoint<S: AsRef<str>>(&mut self, side_a: &[S], side_b: &[S]) {
        for a in side_a {
            for b in side_b {
                let (a, b) = (a.as_ref(), b.as_ref());
                match (self.get(a, b), self.get(b, a)) {
                    (None, None) => self.declare(a, b, RelationKind::Disjoint),
                    (Some(k), None) => self.set(b, a, k.dual()),
                    (None, Some(k)) => self.set(a, b, k.dual()),
                    _ => {}
                }
            }
        }
    }

    fn iter(&self) -> impl Iterator<Item = (&str, &str, RelationKind)> {
        self.entries
            .iter()
            .map(|((l, r), k)| (l.as_str(), r.as_str(), *k))
    }
}

/// A relation matrix that passed [`validate_relations`], stored densely as
/// `R(a, b)` for `a` in side A and `b` in side B.
#[derive(Clone, Debug)]
pub struct ValidatedRelations {
    side_a: LabelSet,
    side_b: LabelSet,
    kinds: Vec<RelationKind>,
}

impl ValidatedRelations {
    pub fn kind(&self, a: usize, b: usize) -> RelationKind {
        self.kinds[a * self.side_b.len() + b]
    }

    pub fn side_a(&self) -> &LabelSet {
        &self.side_a
    }

    pub fn side_b(&self) -> &LabelSet {
        &self.side_b
    }

    fn partners_of_a(&self, a: usize) -> Vec<usize> {
        (0..self.side_b.len())
            .filter(|&b| !self.kind(a, b).is_disjoint())
            .collect()
    }

    fn partners_of_b(&self, b: usize) -> Vec<usize> {
        (0..self.side_a.len())
            .filter(|&a| !self.kind(a, b).is_disjoint())
            .collect()
    }
}

/// Checks that `relations` is complete, dual-consistent and of a supported shape.
pub fn validate_relations<S: AsRef<str>>(
    side_a: &[S],
    side_b: &[S],
    relations: &RelationMatrix,
) -> Result<ValidatedRelations> {
    let names_a: Vec<&str> = side_a.iter().map(AsRef::as_ref).collect();
    let names_b: Vec<&str> = side_b.iter().map(AsRef::as_ref).collect();
    for name in &names_a {
        if names_b.contains(name) {
            return Err(Error::IdenticalType(name.to_string()));
        }
    }
    let set_a = LabelSet::new(names_a.iter().copied())?;
    let set_b = LabelSet::new(names_b.iter().copied())?;

    let side_of = |name: &str| {
        if set_a.get(name).is_some() {
            Some(Side::A)
        } else if set_b.get(name).is_some() {
            Some(Side::B)
        } else {
            None
        }
    };
    for (left, right, kind) in relations.iter() {
        let (ls, rs) = match (side_of(left), side_of(right)) {
            (Some(l), Some(r)) => (l, r),
            (None, _) => {
                return Err(Error::UnknownLabel {
                    label: left.to_string(),
                    side: "A or B".into(),
                })
            }
            (_, None) => {
                return Err(Error::UnknownLabel {
                    label: right.to_string(),
                    side: "A or B".into(),
                })
            }
        };
        if ls == rs && !kind.is_disjoint() {
            return Err(Error::UnsupportedTopology(format!(
                "`{left}` and `{right}` belong to the same side and must be disjoint"
            )));
        }
    }

    let mut kinds = Vec::with_capacity(set_a.len() * set_b.len());
    for a in &names_a {
        for b in &names_b {
            let forward = relations.get(a, b).ok_or_else(|| Error::MissingPair {
                left: a.to_string(),
                right: b.to_string(),
            })?;
            let backward = relations.get(b, a).ok_or_else(|| Error::MissingPair {
                left: b.to_string(),
                right: a.to_string(),
            })?;
            if backward != forward.dual() {
                return Err(Error::Asymmetry {
                    left: a.to_string(),
                    right: b.to_string(),
                    forward: forward.to_string(),
                    backward: backward.to_string(),
                });
            }
            kinds.push(forward);
        }
    }

    let validated = ValidatedRelations {
        side_a: set_a,
        side_b: set_b,
        kinds,
    };
    check_topology(&validated)?;
    Ok(validated)
}

// A subtype has exactly one non-disjoint partner (its supertype); an
// overlapping pair is isolated from every other relation.
fn check_topology(rel: &ValidatedRelations) -> Result<()> {
    for a in 0..rel.side_a.len() {
        let partners_a = rel.partners_of_a(a);
        for &b in &partners_a {
            let partners_b = rel.partners_of_b(b);
            let (an, bn) = (rel.side_a.name(a), rel.side_b.name(b));
            match rel.kind(a, b) {
                RelationKind::Subtype if partners_a.len() > 1 => {
                    return Err(Error::UnsupportedTopology(format!(
                        "subtype `{an}` relates to more than one type of side B"
                    )));
                }
                RelationKind::Supertype if partners_b.len() > 1 => {
                    return Err(Error::UnsupportedTopology(format!(
                        "subtype `{bn}` relates to more than one type of side A"
                    )));
                }
                RelationKind::Overlapping if partners_a.len() > 1 || partners_b.len() > 1 => {
                    return Err(Error::UnsupportedTopology(format!(
                        "overlap between `{an}` and `{bn}` is chained with another relation"
                    )));
                }
                _ => {}
            }
        }
    }
    Ok(())
}

/// One label of the redefined output space. `None` components stand for `O`;
/// at most one of the two is `None`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FinalLabel {
    pub a: Option<usize>,
    pub b: Option<usize>,
}

impl FinalLabel {
    pub fn component(&self, side: Side) -> Option<usize> {
        match side {
            Side::A => self.a,
            Side::B => self.b,
        }
    }
}

/// The redefined output space, ordered lexicographically on the component
/// names with `O` sorting before every type name.
#[derive(Clone, Debug)]
pub struct FinalLabelSpace {
    labels: Vec<FinalLabel>,
    index: HashMap<FinalLabel, usize>,
    names: LabelSet,
}

impl FinalLabelSpace {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_tags(&self) -> usize {
        self.names.num_tags()
    }

    pub fn labels(&self) -> &[FinalLabel] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> FinalLabel {
        self.labels[index]
    }

    pub fn position(&self, label: FinalLabel) -> Option<usize> {
        self.index.get(&label).copied()
    }

    /// Composite names `A:<a>|B:<b>`, used in files.
    pub fn names(&self) -> &LabelSet {
        &self.names
    }
}

/// Builds the redefined output space from validated relations.
pub fn redefine_output_space(rel: &ValidatedRelations) -> FinalLabelSpace {
    let (na, nb) = (rel.side_a.len(), rel.side_b.len());
    let mut labels = BTreeSet::new();
    let mut push = |a: Option<usize>, b: Option<usize>| {
        labels.insert((a, b));
    };
    for a in 0..na {
        let is_subtype = (0..nb).any(|b| rel.kind(a, b) == RelationKind::Subtype);
        if !is_subtype {
            push(Some(a), None);
        }
        for b in 0..nb {
            if !rel.kind(a, b).is_disjoint() {
                push(Some(a), Some(b));
            }
        }
    }
    for b in 0..nb {
        let is_subtype = (0..na).any(|a| rel.kind(a, b) == RelationKind::Supertype);
        if !is_subtype {
            push(None, Some(b));
        }
    }

    let name_of = |side: &LabelSet, c: Option<usize>| c.map(|i| side.name(i).to_string());
    let mut labels: Vec<FinalLabel> = labels
        .into_iter()
        .map(|(a, b)| FinalLabel { a, b })
        .collect();
    labels.sort_by(|x, y| {
        let kx = (name_of(&rel.side_a, x.a), name_of(&rel.side_b, x.b));
        let ky = (name_of(&rel.side_a, y.a), name_of(&rel.side_b, y.b));
        kx.cmp(&ky).then(Ordering::Equal)
    });
    let names = labels
        .iter()
        .map(|l| {
            format!(
                "A:{}|B:{}",
                name_of(&rel.side_a, l.a).unwrap_or_else(|| "O".into()),
                name_of(&rel.side_b, l.b).unwrap_or_else(|| "O".into())
            )
        })
        .collect::<Vec<_>>();
    let index = labels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    FinalLabelSpace {
        labels,
        index,
        names: LabelSet::new(names).expect("composite names are unique"),
    }
}

/// The final labels a token may carry given what one side observed.
/// `None` is the outside label `O`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AllowedSet {
    members: Vec<Option<usize>>,
}

impl AllowedSet {
    pub fn members(&self) -> &[Option<usize>] {
        &self.members
    }

    pub fn contains(&self, label: Option<usize>) -> bool {
        self.members.contains(&label)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_singleton(&self) -> bool {
        self.members.len() == 1
    }
}

/// Two sides of types, their validated relations, the final label space and
/// lookup tables derived from them. Immutable once built.
#[derive(Clone, Debug)]
pub struct Taxonomy {
    relations: ValidatedRelations,
    space: FinalLabelSpace,
    // [side][side tag index] -> sorted final tag indices
    allowed_tags: [Vec<Vec<usize>>; 2],
    // [side][final tag index] -> side tag index
    projection: [Vec<usize>; 2],
}

impl Taxonomy {
    pub fn new<S: AsRef<str>>(
        side_a: &[S],
        side_b: &[S],
        relations: &RelationMatrix,
    ) -> Result<Self> {
        let relations = validate_relations(side_a, side_b, relations)?;
        Ok(Self::from_validated(relations))
    }

    pub fn disjoint<S: AsRef<str>>(side_a: &[S], side_b: &[S]) -> Result<Self> {
        Self::new(side_a, side_b, &RelationMatrix::all_disjoint(side_a, side_b))
    }

    pub fn from_validated(relations: ValidatedRelations) -> Self {
        let space = redefine_output_space(&relations);
        let mut taxonomy = Taxonomy {
            relations,
            space,
            allowed_tags: [Vec::new(), Vec::new()],
            projection: [Vec::new(), Vec::new()],
        };
        for side in [Side::A, Side::B] {
            let projection = (0..taxonomy.space.num_tags())
                .map(|t| taxonomy.project_tag_uncached(Tag::from_index(t), side).index())
                .collect();
            taxonomy.projection[side.slot()] = projection;
            let allowed = (0..taxonomy.side(side).num_tags())
                .map(|t| taxonomy.allowed_tags_uncached(side, Tag::from_index(t)))
                .collect();
            taxonomy.allowed_tags[side.slot()] = allowed;
        }
        taxonomy
    }

    /// Parses the plain-text relation format, one relation per line:
    /// `A:<type> <relation> B:<type>`. A bare `A:<type>` or `B:<type>` line
    /// declares a type. Unlisted cross pairs are disjoint. `#` starts a comment.
    ///
    /// Types in `extra_a` / `extra_b` (e.g. discovered in corpora) are added
    /// after the declared ones.
    pub fn parse_spec(text: &str, extra_a: &[String], extra_b: &[String]) -> Result<Self> {
        let mut side_a: Vec<String> = Vec::new();
        let mut side_b: Vec<String> = Vec::new();
        let mut matrix = RelationMatrix::new();
        let add = |list: &mut Vec<String>, name: &str| {
            if !list.iter().any(|n| n == name) {
                list.push(name.to_string());
            }
        };
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: lineno + 1,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                [decl] => match decl.split_once(':') {
                    Some(("A", name)) if !name.is_empty() => add(&mut side_a, name),
                    Some(("B", name)) if !name.is_empty() => add(&mut side_b, name),
                    _ => return Err(parse_err(format!("expected `A:<type>` or `B:<type>`, got `{decl}`"))),
                },
                [left, relation, right] => {
                    let a = left
                        .strip_prefix("A:")
                        .filter(|s| !s.is_empty())
                        .ok_or_else(|| parse_err(format!("expected `A:<type>`, got `{left}`")))?;
                    let b = right
                        .strip_prefix("B:")
                        .filter(|s| !s.is_empty())
                        .ok_or_else(|| parse_err(format!("expected `B:<type>`, got `{right}`")))?;
                    if relation.eq_ignore_ascii_case("identical") {
                        return Err(Error::IdenticalType(format!("{a} / {b}")));
                    }
                    let kind: RelationKind = relation.parse().map_err(parse_err)?;
                    add(&mut side_a, a);
                    add(&mut side_b, b);
                    if let Some(existing) = matrix.get(a, b) {
                        if existing != kind {
                            return Err(parse_err(format!(
                                "conflicting relations for ({a}, {b}): {existing} and {kind}"
                            )));
                        }
                    }
                    matrix.declare(a, b, kind);
                }
                _ => return Err(parse_err(format!("malformed relation line `{line}`"))),
            }
        }
        for name in extra_a {
            add(&mut side_a, name);
        }
        for name in extra_b {
            add(&mut side_b, name);
        }
        matrix.fill_disjoint(&side_a, &side_b);
        Self::new(&side_a, &side_b, &matrix)
    }

    /// Serializes the non-disjoint relations and every type declaration.
    pub fn to_spec(&self) -> String {
        let mut out = String::new();
        for name in self.side_a().names() {
            out.push_str(&format!("A:{name}\n"));
        }
        for name in self.side_b().names() {
            out.push_str(&format!("B:{name}\n"));
        }
        for a in 0..self.side_a().len() {
            for b in 0..self.side_b().len() {
                let kind = self.relation(a, b);
                if !kind.is_disjoint() {
                    out.push_str(&format!(
                        "A:{} {} B:{}\n",
                        self.side_a().name(a),
                        kind,
                        self.side_b().name(b)
                    ));
                }
            }
        }
        out
    }

    pub fn side(&self, side: Side) -> &LabelSet {
        match side {
            Side::A => &self.relations.side_a,
            Side::B => &self.relations.side_b,
        }
    }

    pub fn side_a(&self) -> &LabelSet {
        &self.relations.side_a
    }

    pub fn side_b(&self) -> &LabelSet {
        &self.relations.side_b
    }

    pub fn entity_types(&self) -> Vec<EntityType> {
        let a = self.side_a().names().iter().map(|n| EntityType::new(n, Side::A));
        let b = self.side_b().names().iter().map(|n| EntityType::new(n, Side::B));
        a.chain(b).collect()
    }

    pub fn relation(&self, a: usize, b: usize) -> RelationKind {
        self.relations.kind(a, b)
    }

    pub fn relations(&self) -> &ValidatedRelations {
        &self.relations
    }

    pub fn is_disjoint(&self) -> bool {
        self.relations.kinds.iter().all(|k| k.is_disjoint())
    }

    pub fn space(&self) -> &FinalLabelSpace {
        &self.space
    }

    pub fn num_final_tags(&self) -> usize {
        self.space.num_tags()
    }

    /// Final labels consistent with `observed` (a type of `side`, or `None` for `O`).
    pub fn allowed_labels(&self, side: Side, observed: Option<usize>) -> AllowedSet {
        let mut members: Vec<Option<usize>> = Vec::new();
        if observed.is_none() {
            members.push(None);
        }
        members.extend(
            self.space
                .labels
                .iter()
                .enumerate()
                .filter(|(_, l)| l.component(side) == observed)
                .map(|(i, _)| Some(i)),
        );
        AllowedSet { members }
    }

    /// Name-based variant of [`Taxonomy::allowed_labels`]; `"O"` means outside.
    pub fn allowed_final_labels(&self, side: Side, observed: &str) -> Result<AllowedSet> {
        let observed = if observed == "O" {
            None
        } else {
            Some(self.side(side).get(observed).ok_or_else(|| Error::UnknownLabel {
                label: observed.to_string(),
                side: side.to_string(),
            })?)
        };
        Ok(self.allowed_labels(side, observed))
    }

    /// Allowed final tag indices for an observed side tag, in ascending order.
    pub fn allowed_tags(&self, side: Side, observed: Tag) -> &[usize] {
        &self.allowed_tags[side.slot()][observed.index()]
    }

    fn allowed_tags_uncached(&self, side: Side, observed: Tag) -> Vec<usize> {
        let allowed = self.allowed_labels(side, observed.label());
        let mut tags: Vec<usize> = Vec::new();
        for member in allowed.members() {
            match (observed, member) {
                (_, None) => tags.push(Tag::O.index()),
                (Tag::O, Some(l)) => {
                    tags.push(Tag::B(*l).index());
                    tags.push(Tag::I(*l).index());
                }
                (Tag::B(_), Some(l)) => tags.push(Tag::B(*l).index()),
                (Tag::I(_), Some(l)) => tags.push(Tag::I(*l).index()),
            }
        }
        tags.sort_unstable();
        tags
    }

    /// Projects a final tag onto one side: the side component with the same
    /// prefix, or `O` when that component is `O`.
    pub fn project_tag(&self, tag: Tag, side: Side) -> Tag {
        Tag::from_index(self.projection[side.slot()][tag.index()])
    }

    fn project_tag_uncached(&self, tag: Tag, side: Side) -> Tag {
        match tag.label().and_then(|l| self.space.labels[l].component(side)) {
            Some(c) => tag.relabel(c),
            None => Tag::O,
        }
    }

    /// Maps a pair of side-level gold labels to a final label (`None` = `O`).
    pub fn project_gold(&self, a: Option<usize>, b: Option<usize>) -> Result<Option<usize>> {
        if a.is_none() && b.is_none() {
            return Ok(None);
        }
        self.space
            .position(FinalLabel { a, b })
            .map(Some)
            .ok_or_else(|| Error::InconsistentGold {
                a: a.map_or("O".into(), |i| self.side_a().name(i).to_string()),
                b: b.map_or("O".into(), |i| self.side_b().name(i).to_string()),
            })
    }

    /// Tag-level [`Taxonomy::project_gold`]. A `B` on either side wins over `I`.
    pub fn project_gold_tag(&self, a: Tag, b: Tag) -> Result<Tag> {
        let label = self.project_gold(a.label(), b.label())?;
        Ok(match label {
            None => Tag::O,
            Some(l) if matches!(a, Tag::B(_)) || matches!(b, Tag::B(_)) => Tag::B(l),
            Some(l) => Tag::I(l),
        })
    }

    /// Name-based gold projection; `"O"` means outside.
    pub fn project_gold_to_final(&self, a: &str, b: &str) -> Result<Option<usize>> {
        let lookup = |side: Side, name: &str| -> Result<Option<usize>> {
            if name == "O" {
                return Ok(None);
            }
            self.side(side)
                .get(name)
                .map(Some)
                .ok_or_else(|| Error::UnknownLabel {
                    label: name.to_string(),
                    side: side.to_string(),
                })
        };
        self.project_gold(lookup(Side::A, a)?, lookup(Side::B, b)?)
    }

    /// Human-readable `a:b` name of a final label, with `O` for empty components.
    pub fn display_label(&self, label: usize) -> String {
        let l = self.space.label(label);
        let a = l.a.map_or("O", |i| self.side_a().name(i));
        let b = l.b.map_or("O", |i| self.side_b().name(i));
        format!("{a}:{b}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn person_subtypes() -> Taxonomy {
        let mut r = RelationMatrix::new();
        r.declare("Person", "Actor", RelationKind::Supertype);
        r.declare("Person", "Politician", RelationKind::Supertype);
        Taxonomy::new(&["Person"], &["Actor", "Politician"], &r).unwrap()
    }

    fn names(t: &Taxonomy, set: &AllowedSet) -> Vec<String> {
        set.members()
            .iter()
            .map(|m| m.map_or("O".to_string(), |l| t.display_label(l)))
            .collect()
    }

    #[test]
    fn supertype_with_subtype_dual_is_valid() {
        let mut r = RelationMatrix::new();
        r.set("Person", "Actor", RelationKind::Supertype);
        r.set("Actor", "Person", RelationKind::Subtype);
        assert!(validate_relations(&["Person"], &["Actor"], &r).is_ok());
    }

    #[test]
    fn all_disjoint_is_valid() {
        let r = RelationMatrix::all_disjoint(&["Per", "Loc"], &["Org"]);
        assert!(validate_relations(&["Per", "Loc"], &["Org"], &r).is_ok());
    }

    #[test]
    fn broken_duality_is_rejected() {
        let mut r = RelationMatrix::new();
        r.set("Person", "Actor", RelationKind::Supertype);
        r.set("Actor", "Person", RelationKind::Disjoint);
        assert!(matches!(
            validate_relations(&["Person"], &["Actor"], &r),
            Err(Error::Asymmetry { .. })
        ));
    }

    #[test]
    fn missing_pair_is_rejected() {
        let mut r = RelationMatrix::new();
        r.declare("Per", "Org", RelationKind::Disjoint);
        assert!(matches!(
            validate_relations(&["Per", "Loc"], &["Org"], &r),
            Err(Error::MissingPair { .. })
        ));
    }

    #[test]
    fn overlap_chain_is_rejected() {
        let mut r = RelationMatrix::all_disjoint(&["X", "Z"], &["Y"]);
        r.declare("X", "Y", RelationKind::Overlapping);
        r.declare("Z", "Y", RelationKind::Overlapping);
        assert!(matches!(
            validate_relations(&["X", "Z"], &["Y"], &r),
            Err(Error::UnsupportedTopology(_))
        ));
    }

    #[test]
    fn subtype_of_two_supertypes_is_rejected() {
        let mut r = RelationMatrix::all_disjoint(&["Actor"], &["Person", "Artist"]);
        r.declare("Actor", "Person", RelationKind::Subtype);
        r.declare("Actor", "Artist", RelationKind::Overlapping);
        assert!(matches!(
            validate_relations(&["Actor"], &["Person", "Artist"], &r),
            Err(Error::UnsupportedTopology(_))
        ));
    }

    #[test]
    fn same_name_on_both_sides_is_rejected() {
        let r = RelationMatrix::all_disjoint(&["Loc"], &["Loc"]);
        assert!(matches!(
            validate_relations(&["Loc"], &["Loc"], &r),
            Err(Error::IdenticalType(_))
        ));
    }

    #[test]
    fn subtype_space() {
        let t = person_subtypes();
        let labels: Vec<String> = (0..t.space().len()).map(|l| t.display_label(l)).collect();
        assert_eq!(labels, vec!["Person:O", "Person:Actor", "Person:Politician"]);
        assert_eq!(t.space().num_tags(), 7);
    }

    #[test]
    fn overlapping_space() {
        let mut r = RelationMatrix::new();
        r.declare("Location", "Place", RelationKind::Overlapping);
        let t = Taxonomy::new(&["Location"], &["Place"], &r).unwrap();
        let labels: Vec<String> = (0..t.space().len()).map(|l| t.display_label(l)).collect();
        assert_eq!(labels, vec!["O:Place", "Location:O", "Location:Place"]);
    }

    #[test]
    fn disjoint_space_is_union() {
        let t = Taxonomy::disjoint(&["Per"], &["Org"]).unwrap();
        let labels: Vec<String> = (0..t.space().len()).map(|l| t.display_label(l)).collect();
        assert_eq!(labels, vec!["O:Org", "Per:O"]);
        assert_eq!(t.space().names().names(), &["A:O|B:Org", "A:Per|B:O"]);
    }

    #[test]
    fn allowed_for_observed_supertype() {
        let t = person_subtypes();
        let set = t.allowed_final_labels(Side::A, "Person").unwrap();
        assert_eq!(names(&t, &set), vec!["Person:O", "Person:Actor", "Person:Politician"]);
    }

    #[test]
    fn allowed_for_outside_tokens() {
        let t = Taxonomy::disjoint(&["Per"], &["Org"]).unwrap();
        let set = t.allowed_final_labels(Side::A, "O").unwrap();
        assert_eq!(names(&t, &set), vec!["O", "O:Org"]);

        let t = Taxonomy::disjoint(&["Per", "Loc"], &["Org"]).unwrap();
        let set = t.allowed_final_labels(Side::B, "O").unwrap();
        assert_eq!(names(&t, &set), vec!["O", "Loc:O", "Per:O"]);
    }

    #[test]
    fn allowed_unknown_label() {
        let t = Taxonomy::disjoint(&["Per"], &["Org"]).unwrap();
        assert!(matches!(
            t.allowed_final_labels(Side::A, "Org"),
            Err(Error::UnknownLabel { .. })
        ));
    }

    #[test]
    fn allowed_tags_follow_prefix() {
        let t = person_subtypes();
        let person = t.side_a().get("Person").unwrap();
        assert_eq!(t.allowed_tags(Side::A, Tag::B(person)), &[1, 3, 5]);
        assert_eq!(t.allowed_tags(Side::A, Tag::I(person)), &[2, 4, 6]);
        // observed O on side B: O or Person:O
        assert_eq!(t.allowed_tags(Side::B, Tag::O), &[0, 1, 2]);
    }

    #[test]
    fn gold_projection() {
        let t = person_subtypes();
        let l = t.project_gold_to_final("Person", "Actor").unwrap().unwrap();
        assert_eq!(t.display_label(l), "Person:Actor");
        assert_eq!(t.project_gold_to_final("O", "O").unwrap(), None);
        let l = t.project_gold_to_final("Person", "O").unwrap().unwrap();
        assert_eq!(t.display_label(l), "Person:O");

        let mut r = RelationMatrix::all_disjoint(&["Org"], &["Actor"]);
        r.declare("Org", "Actor", RelationKind::Disjoint);
        let t = Taxonomy::new(&["Org"], &["Actor"], &r).unwrap();
        assert!(matches!(
            t.project_gold_to_final("Org", "Actor"),
            Err(Error::InconsistentGold { .. })
        ));
    }

    #[test]
    fn side_projection() {
        let t = person_subtypes();
        let actor = t.project_gold_to_final("Person", "Actor").unwrap().unwrap();
        let person = t.side_a().get("Person").unwrap();
        let actor_b = t.side_b().get("Actor").unwrap();
        assert_eq!(t.project_tag(Tag::B(actor), Side::A), Tag::B(person));
        assert_eq!(t.project_tag(Tag::I(actor), Side::B), Tag::I(actor_b));
        let person_o = t.project_gold_to_final("Person", "O").unwrap().unwrap();
        assert_eq!(t.project_tag(Tag::B(person_o), Side::B), Tag::O);
    }

    #[test]
    fn spec_file_round_trip() {
        let text = "# taxonomy\nA:Person supertype B:Actor\nA:Person supertype B:Politician\nA:Loc\nB:Org\n";
        let t = Taxonomy::parse_spec(text, &[], &[]).unwrap();
        assert_eq!(t.side_a().names(), &["Person", "Loc"]);
        assert_eq!(t.relation(0, 0), RelationKind::Supertype);
        assert_eq!(t.relation(1, 2), RelationKind::Disjoint);
        let again = Taxonomy::parse_spec(&t.to_spec(), &[], &[]).unwrap();
        assert_eq!(again.space().names(), t.space().names());
    }

    #[test]
    fn spec_file_errors() {
        assert!(matches!(
            Taxonomy::parse_spec("A:X identical B:Y", &[], &[]),
            Err(Error::IdenticalType(_))
        ));
        assert!(matches!(
            Taxonomy::parse_spec("A:X contains B:Y", &[], &[]),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            Taxonomy::parse_spec("\nB:X disjoint A:Y", &[], &[]),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
