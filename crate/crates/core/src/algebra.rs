//! The structure-of-levels data model.
//!
//! A structure `S` is the implicit level 0. Stored levels start at 1 and each
//! element at level `j >= 2` hangs from exactly one parent at level `j - 1`.
//! The children of an element are its expansion set one level down.
//!
//! Structures behave as values: every operation borrows the current snapshot
//! and returns a new one, so a structure can be shared freely between threads.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::id::ElementId;
use crate::probability::{self, Denotation};
use crate::value::{render, ProbabilityValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Role {
    #[default]
    Plain,
    Input,
    Output,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityNode {
    pub id: ElementId,
    pub level: u32,
    pub parent: Option<ElementId>,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationshipNode {
    pub id: ElementId,
    pub level: u32,
    pub parent: Option<ElementId>,
    /// The modeller's claim that real sub-mechanisms exist below this
    /// relationship but cannot be listed.
    pub opaque: bool,
    pub alt_group: Option<ElementId>,
    pub probability: Option<ProbabilityValue>,
    /// Set when `probability` was filled in by alternative-group normalization
    /// rather than assigned.
    pub inferred: bool,
}

impl RelationshipNode {
    pub fn new(id: ElementId, level: u32, parent: Option<ElementId>) -> Self {
        Self {
            id,
            level,
            parent,
            opaque: false,
            alt_group: None,
            probability: None,
            inferred: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Level {
    pub entities: Vec<EntityNode>,
    pub relationships: Vec<RelationshipNode>,
}

impl Level {
    pub fn is_empty(&self) -> bool {
        self.entities.is_empty() && self.relationships.is_empty()
    }
}

/// Borrowed view of either kind of element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementRef<'a> {
    Entity(&'a EntityNode),
    Relationship(&'a RelationshipNode),
}

impl<'a> ElementRef<'a> {
    pub fn id(&self) -> &'a ElementId {
        match self {
            ElementRef::Entity(e) => &e.id,
            ElementRef::Relationship(r) => &r.id,
        }
    }

    pub fn level(&self) -> u32 {
        match self {
            ElementRef::Entity(e) => e.level,
            ElementRef::Relationship(r) => r.level,
        }
    }

    pub fn parent(&self) -> Option<&'a ElementId> {
        match self {
            ElementRef::Entity(e) => e.parent.as_ref(),
            ElementRef::Relationship(r) => r.parent.as_ref(),
        }
    }

    pub fn is_relationship(&self) -> bool {
        matches!(self, ElementRef::Relationship(_))
    }
}

/// Declaration of a child inserted by [`StructureOfLevels::expand`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChildSpec {
    Entity {
        id: String,
        role: Role,
    },
    Relationship {
        id: String,
        opaque: bool,
        alt_group: Option<String>,
        probability: Option<ProbabilityValue>,
    },
}

impl ChildSpec {
    pub fn entity(id: impl Into<String>) -> Self {
        ChildSpec::Entity {
            id: id.into(),
            role: Role::Plain,
        }
    }

    pub fn rel(id: impl Into<String>) -> Self {
        ChildSpec::Relationship {
            id: id.into(),
            opaque: false,
            alt_group: None,
            probability: None,
        }
    }

    pub fn id(&self) -> &str {
        match self {
            ChildSpec::Entity { id, .. } | ChildSpec::Relationship { id, .. } => id,
        }
    }

    /// Marks an entity as an output. No effect on relationships.
    pub fn output(mut self) -> Self {
        if let ChildSpec::Entity { role, .. } = &mut self {
            *role = Role::Output;
        }
        self
    }

    pub fn input(mut self) -> Self {
        if let ChildSpec::Entity { role, .. } = &mut self {
            *role = Role::Input;
        }
        self
    }

    pub fn opaque(mut self) -> Self {
        if let ChildSpec::Relationship { opaque, .. } = &mut self {
            *opaque = true;
        }
        self
    }

    pub fn alt(mut self, tag: impl Into<String>) -> Self {
        if let ChildSpec::Relationship { alt_group, .. } = &mut self {
            *alt_group = Some(tag.into());
        }
        self
    }

    pub fn p(mut self, value: ProbabilityValue) -> Self {
        if let ChildSpec::Relationship { probability, .. } = &mut self {
            *probability = Some(value);
        }
        self
    }
}

/// A broken structural rule, named by the element (or group) that breaks it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoLevels,
    MissingPivotalRelation,
    EmptyLevel {
        level: u32,
    },
    DuplicateElement {
        id: ElementId,
    },
    LevelMismatch {
        id: ElementId,
        declared: u32,
        stored: u32,
    },
    MissingParent {
        id: ElementId,
        level: u32,
    },
    UnknownParent {
        id: ElementId,
        parent: ElementId,
    },
    StratificationViolation {
        id: ElementId,
        level: u32,
        parent: ElementId,
        parent_level: u32,
    },
    OpaqueWithChildren {
        id: ElementId,
    },
    AltGroupSplit {
        group: ElementId,
        id: ElementId,
    },
    UnnormalizedAlternatives {
        group: ElementId,
        sum: String,
    },
    DenotationNotAnOutcome {
        outcome: ElementId,
    },
    DenotationNotARelationship {
        relation: ElementId,
    },
    NonUnivocal {
        outcome: ElementId,
        relation: ElementId,
    },
}

impl Violation {
    /// The element this violation is anchored to, when there is one.
    pub fn element(&self) -> Option<&ElementId> {
        use Violation::*;
        match self {
            NoLevels | MissingPivotalRelation | EmptyLevel { .. } => None,
            DuplicateElement { id }
            | LevelMismatch { id, .. }
            | MissingParent { id, .. }
            | UnknownParent { id, .. }
            | StratificationViolation { id, .. }
            | OpaqueWithChildren { id }
            | AltGroupSplit { id, .. } => Some(id),
            UnnormalizedAlternatives { group, .. } => Some(group),
            DenotationNotAnOutcome { outcome } => Some(outcome),
            DenotationNotARelationship { relation } => Some(relation),
            NonUnivocal { outcome, .. } => Some(outcome),
        }
    }

    pub fn rule(&self) -> &'static str {
        use Violation::*;
        match self {
            NoLevels => "NoLevels",
            MissingPivotalRelation => "MissingPivotalRelation",
            EmptyLevel { .. } => "EmptyLevel",
            DuplicateElement { .. } => "DuplicateElement",
            LevelMismatch { .. } => "LevelMismatch",
            MissingParent { .. } => "MissingParent",
            UnknownParent { .. } => "UnknownParent",
            StratificationViolation { .. } => "StratificationViolation",
            OpaqueWithChildren { .. } => "OpaqueWithChildren",
            AltGroupSplit { .. } => "AltGroupSplit",
            UnnormalizedAlternatives { .. } => "UnnormalizedAlternatives",
            DenotationNotAnOutcome { .. } => "DenotationNotAnOutcome",
            DenotationNotARelationship { .. } => "DenotationNotARelationship",
            NonUnivocal { .. } => "NonUnivocal",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            NoLevels => write!(f, "structure has no levels"),
            MissingPivotalRelation => write!(f, "level 1 has no relationship"),
            EmptyLevel { level } => write!(f, "level {level} is empty"),
            DuplicateElement { id } => write!(f, "{id} is declared more than once"),
            LevelMismatch {
                id,
                declared,
                stored,
            } => write!(f, "{id} declares level {declared} but sits in level {stored}"),
            MissingParent { id, level } => write!(f, "{id} at level {level} has no parent"),
            UnknownParent { id, parent } => write!(f, "{id} names unknown parent {parent}"),
            StratificationViolation {
                id,
                level,
                parent,
                parent_level,
            } => write!(
                f,
                "{id} at level {level} claims parent {parent} at level {parent_level}"
            ),
            OpaqueWithChildren { id } => write!(f, "opaque relationship {id} has children"),
            AltGroupSplit { group, id } => write!(
                f,
                "{id} does not share level and parent with the rest of group {group}"
            ),
            UnnormalizedAlternatives { group, sum } => {
                write!(f, "alternatives of group {group} sum to {sum}, not 1")
            }
            DenotationNotAnOutcome { outcome } => {
                write!(f, "denoted {outcome} is not an output entity")
            }
            DenotationNotARelationship { relation } => {
                write!(f, "denotation target {relation} is not a relationship")
            }
            NonUnivocal { outcome, relation } => {
                write!(f, "denotation {outcome} => {relation} is not univocal")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassificationKind {
    Certain,
    Uncertain,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub kind: ClassificationKind,
    /// Empty iff `kind` is `Certain`.
    pub opaque_elements: Vec<ElementId>,
}

impl Classification {
    pub fn is_certain(&self) -> bool {
        self.kind == ClassificationKind::Certain
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureOfLevels {
    name: ElementId,
    levels: Vec<Level>,
    denotations: Vec<Denotation>,
    audit: Vec<String>,
}

impl StructureOfLevels {
    /// Builds a structure from raw parts without checking anything. Run
    /// [`validate`](Self::validate) before trusting the result.
    pub fn from_parts(name: ElementId, levels: Vec<Level>, denotations: Vec<Denotation>) -> Self {
        Self {
            name,
            levels,
            denotations,
            audit: Vec::new(),
        }
    }

    /// `S = (E_in, E_out; R)` on a single level; either entity may be absent.
    pub fn new_event_structure(
        name: &str,
        input: Option<&str>,
        output: Option<&str>,
        relation: &str,
    ) -> Result<Self> {
        let name = ElementId::new(name)?;
        let mut seen = HashSet::new();
        for id in [input, output, Some(relation)].into_iter().flatten() {
            if !seen.insert(id) {
                return Err(Error::DuplicateElement(id.to_string()));
            }
        }
        let mut level = Level::default();
        for (id, role) in [(input, Role::Input), (output, Role::Output)] {
            if let Some(id) = id {
                level.entities.push(EntityNode {
                    id: ElementId::new(id)?,
                    level: 1,
                    parent: None,
                    role,
                });
            }
        }
        level
            .relationships
            .push(RelationshipNode::new(ElementId::new(relation)?, 1, None));
        Ok(Self::from_parts(name, vec![level], Vec::new()))
    }

    pub fn name(&self) -> &ElementId {
        &self.name
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Number of stored levels, `n`.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn denotations(&self) -> &[Denotation] {
        &self.denotations
    }

    /// Notes left by operations that inferred something, e.g. a probability
    /// completed by normalization.
    pub fn audit(&self) -> &[String] {
        &self.audit
    }

    pub fn entities(&self) -> impl Iterator<Item = &EntityNode> {
        self.levels.iter().flat_map(|l| l.entities.iter())
    }

    pub fn relationships(&self) -> impl Iterator<Item = &RelationshipNode> {
        self.levels.iter().flat_map(|l| l.relationships.iter())
    }

    pub fn elements(&self) -> impl Iterator<Item = ElementRef<'_>> {
        self.levels.iter().flat_map(|l| {
            l.entities
                .iter()
                .map(ElementRef::Entity)
                .chain(l.relationships.iter().map(ElementRef::Relationship))
        })
    }

    pub fn element(&self, id: &str) -> Option<ElementRef<'_>> {
        self.elements().find(|e| e.id() == id)
    }

    pub fn entity(&self, id: &str) -> Option<&EntityNode> {
        self.entities().find(|e| e.id == id)
    }

    pub fn relationship(&self, id: &str) -> Option<&RelationshipNode> {
        self.relationships().find(|r| r.id == id)
    }

    /// Elements whose parent is `id`, in serialization order.
    pub fn children(&self, id: &str) -> Vec<ElementRef<'_>> {
        self.elements()
            .filter(|e| e.parent().is_some_and(|p| p == id))
            .collect()
    }

    pub fn has_children(&self, id: &str) -> bool {
        self.elements()
            .any(|e| e.parent().is_some_and(|p| p == id))
    }

    pub fn alt_group_members(&self, tag: &str) -> Vec<&RelationshipNode> {
        self.relationships()
            .filter(|r| r.alt_group.as_ref().is_some_and(|g| g == tag))
            .collect()
    }

    /// Alternative-group tags in first-appearance order.
    pub fn alt_groups(&self) -> Vec<&ElementId> {
        let mut tags: Vec<&ElementId> = Vec::new();
        for tag in self.relationships().filter_map(|r| r.alt_group.as_ref()) {
            if !tags.contains(&tag) {
                tags.push(tag);
            }
        }
        tags
    }

    pub(crate) fn relationship_mut(&mut self, id: &str) -> Option<&mut RelationshipNode> {
        self.levels
            .iter_mut()
            .flat_map(|l| l.relationships.iter_mut())
            .find(|r| r.id == id)
    }

    pub(crate) fn relationships_mut(&mut self) -> impl Iterator<Item = &mut RelationshipNode> {
        self.levels
            .iter_mut()
            .flat_map(|l| l.relationships.iter_mut())
    }

    pub(crate) fn denotations_mut(&mut self) -> &mut Vec<Denotation> {
        &mut self.denotations
    }

    pub(crate) fn note(&mut self, line: String) {
        self.audit.push(line);
    }

    /// Inserts `children` one level below `element`.
    pub fn expand(&self, element: &str, children: Vec<ChildSpec>) -> Result<Self> {
        let parent = self
            .element(element)
            .ok_or_else(|| Error::NotFound(element.to_string()))?;
        if let ElementRef::Relationship(r) = parent {
            if r.opaque {
                return Err(Error::OpaqueExpansion(element.to_string()));
            }
        }
        if children.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "expansion of {element} lists no children"
            )));
        }
        let parent_id = parent.id().clone();
        let child_level = parent.level() + 1;

        let mut taken: HashSet<&str> = self.elements().map(|e| e.id().as_str()).collect();
        for child in &children {
            if !taken.insert(child.id()) {
                return Err(Error::DuplicateElement(child.id().to_string()));
            }
        }

        let mut next = self.clone();
        while next.levels.len() < child_level as usize {
            next.levels.push(Level::default());
        }
        let mut touched_groups = Vec::new();
        for child in children {
            let slot = &mut next.levels[child_level as usize - 1];
            match child {
                ChildSpec::Entity { id, role } => slot.entities.push(EntityNode {
                    id: ElementId::new(id)?,
                    level: child_level,
                    parent: Some(parent_id.clone()),
                    role,
                }),
                ChildSpec::Relationship {
                    id,
                    opaque,
                    alt_group,
                    probability,
                } => {
                    let alt_group = alt_group.map(ElementId::new).transpose()?;
                    if let Some(tag) = &alt_group {
                        if !touched_groups.contains(tag) {
                            touched_groups.push(tag.clone());
                        }
                    }
                    slot.relationships.push(RelationshipNode {
                        opaque,
                        alt_group,
                        probability,
                        ..RelationshipNode::new(
                            ElementId::new(id)?,
                            child_level,
                            Some(parent_id.clone()),
                        )
                    });
                }
            }
        }
        for tag in &touched_groups {
            probability::reconcile_group(&mut next, tag)?;
        }
        next.checked()
    }

    /// Removes everything below `element`, together with denotations that
    /// mention removed elements. Inverse of [`expand`](Self::expand).
    pub fn collapse(&self, element: &str) -> Result<Self> {
        let root = self
            .element(element)
            .ok_or_else(|| Error::NotFound(element.to_string()))?;
        let mut doomed: HashSet<ElementId> = HashSet::new();
        let mut frontier = vec![root.id().clone()];
        while let Some(id) = frontier.pop() {
            for child in self.children(id.as_str()) {
                if doomed.insert(child.id().clone()) {
                    frontier.push(child.id().clone());
                }
            }
        }
        let mut next = self.clone();
        for level in &mut next.levels {
            level.entities.retain(|e| !doomed.contains(&e.id));
            level.relationships.retain(|r| !doomed.contains(&r.id));
        }
        while next.levels.last().is_some_and(Level::is_empty) && next.levels.len() > 1 {
            next.levels.pop();
        }
        next.denotations
            .retain(|d| !doomed.contains(&d.outcome) && !doomed.contains(&d.relation));
        Ok(next)
    }

    /// Expands a childless relationship `r` into the binary alternative group
    /// `{r_i, not_r_i}` tagged `r`. When `r` has a denoted outcome `o`, the
    /// paired outcomes `o_i` and `not_o_i` are added and denoted as well.
    pub fn complement_expand(&self, r: &str) -> Result<Self> {
        self.complement_expand_with(r, &format!("{r}_i"), None)
    }

    /// Like [`complement_expand`](Self::complement_expand) with caller-chosen
    /// names for the positive branch and its outcome.
    pub fn complement_expand_with(
        &self,
        r: &str,
        branch: &str,
        branch_outcome: Option<&str>,
    ) -> Result<Self> {
        let rel = self
            .element(r)
            .ok_or_else(|| Error::NotFound(r.to_string()))?;
        let ElementRef::Relationship(rel) = rel else {
            return Err(Error::NotARelationship(r.to_string()));
        };
        if rel.opaque {
            return Err(Error::OpaqueExpansion(r.to_string()));
        }
        if self.has_children(r) {
            return Err(Error::AlreadyExpanded(r.to_string()));
        }
        let outcome = self
            .denotations
            .iter()
            .find(|d| d.relation == r)
            .map(|d| d.outcome.clone());
        if outcome.is_none() && branch_outcome.is_some() {
            return Err(Error::InvalidArgument(format!(
                "{r} has no denoted outcome to pair with the branches"
            )));
        }

        let negative = format!("not_{branch}");
        let mut children = vec![
            ChildSpec::rel(branch).alt(r),
            ChildSpec::rel(negative.as_str()).alt(r),
        ];
        let mut pairs = Vec::new();
        if let Some(outcome) = &outcome {
            let positive_outcome = branch_outcome
                .map(str::to_string)
                .unwrap_or_else(|| format!("{outcome}_i"));
            let negative_outcome = format!("not_{positive_outcome}");
            children.push(ChildSpec::entity(positive_outcome.as_str()).output());
            children.push(ChildSpec::entity(negative_outcome.as_str()).output());
            pairs.push((positive_outcome, branch.to_string()));
            pairs.push((negative_outcome, negative));
        }
        let mut next = self.expand(r, children)?;
        for (outcome, relation) in pairs {
            next = probability::denote(&next, &outcome, &relation)?;
        }
        Ok(next)
    }

    fn checked(self) -> Result<Self> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidStructure(violations))
        }
    }

    /// Lists every broken invariant; empty iff the structure is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.levels.is_empty() {
            out.push(Violation::NoLevels);
            return out;
        }
        if self.levels[0].relationships.is_empty() {
            out.push(Violation::MissingPivotalRelation);
        }

        // id -> stored level (first occurrence)
        let mut stored: HashMap<&str, u32> = HashMap::new();
        for (index, level) in self.levels.iter().enumerate() {
            let number = index as u32 + 1;
            if level.is_empty() {
                out.push(Violation::EmptyLevel { level: number });
            }
            let ids = level
                .entities
                .iter()
                .map(|e| (&e.id, e.level))
                .chain(level.relationships.iter().map(|r| (&r.id, r.level)));
            for (id, declared) in ids {
                if stored.insert(id.as_str(), number).is_some() {
                    out.push(Violation::DuplicateElement { id: id.clone() });
                }
                if declared != number {
                    out.push(Violation::LevelMismatch {
                        id: id.clone(),
                        declared,
                        stored: number,
                    });
                }
            }
        }

        for (index, level) in self.levels.iter().enumerate() {
            let number = index as u32 + 1;
            let parents = level
                .entities
                .iter()
                .map(|e| (&e.id, e.parent.as_ref()))
                .chain(
                    level
                        .relationships
                        .iter()
                        .map(|r| (&r.id, r.parent.as_ref())),
                );
            for (id, parent) in parents {
                match parent {
                    None if number >= 2 => out.push(Violation::MissingParent {
                        id: id.clone(),
                        level: number,
                    }),
                    None => {}
                    Some(parent) => match stored.get(parent.as_str()) {
                        None => out.push(Violation::UnknownParent {
                            id: id.clone(),
                            parent: parent.clone(),
                        }),
                        Some(&parent_level) if parent_level + 1 != number => {
                            out.push(Violation::StratificationViolation {
                                id: id.clone(),
                                level: number,
                                parent: parent.clone(),
                                parent_level,
                            })
                        }
                        Some(_) => {}
                    },
                }
            }
        }

        for r in self.relationships() {
            if r.opaque && self.has_children(r.id.as_str()) {
                out.push(Violation::OpaqueWithChildren { id: r.id.clone() });
            }
        }

        for tag in self.alt_groups() {
            let members = self.alt_group_members(tag.as_str());
            let first = members[0];
            for m in &members[1..] {
                if m.level != first.level || m.parent != first.parent {
                    out.push(Violation::AltGroupSplit {
                        group: tag.clone(),
                        id: m.id.clone(),
                    });
                }
            }
            let assigned: Vec<&ProbabilityValue> =
                members.iter().filter_map(|m| m.probability.as_ref()).collect();
            let sum: BigRational = assigned
                .iter()
                .fold(BigRational::zero(), |acc, p| acc + p.ratio());
            let complete = assigned.len() == members.len();
            if sum > BigRational::one() || (complete && !sum.is_one()) {
                out.push(Violation::UnnormalizedAlternatives {
                    group: tag.clone(),
                    sum: render(&sum),
                });
            }
        }

        let mut outcomes_seen = HashSet::new();
        let mut relations_seen = HashSet::new();
        for d in &self.denotations {
            match self.entity(d.outcome.as_str()) {
                Some(e) if e.role == Role::Output => {}
                _ => out.push(Violation::DenotationNotAnOutcome {
                    outcome: d.outcome.clone(),
                }),
            }
            if self.relationship(d.relation.as_str()).is_none() {
                out.push(Violation::DenotationNotARelationship {
                    relation: d.relation.clone(),
                });
            }
            let fresh_outcome = outcomes_seen.insert(&d.outcome);
            let fresh_relation = relations_seen.insert(&d.relation);
            if !fresh_outcome || !fresh_relation {
                out.push(Violation::NonUnivocal {
                    outcome: d.outcome.clone(),
                    relation: d.relation.clone(),
                });
            }
        }
        out
    }

    /// Certain iff no relationship is marked opaque.
    pub fn classify(&self) -> Result<Classification> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(Error::InvalidStructure(violations));
        }
        let opaque_elements: Vec<ElementId> = self
            .relationships()
            .filter(|r| r.opaque)
            .map(|r| r.id.clone())
            .collect();
        let kind = if opaque_elements.is_empty() {
            ClassificationKind::Certain
        } else {
            ClassificationKind::Uncertain
        };
        Ok(Classification {
            kind,
            opaque_elements,
        })
    }

    /// Per-level element counts, handy for diagnostics.
    pub fn level_sizes(&self) -> BTreeMap<u32, (usize, usize)> {
        self.levels
            .iter()
            .enumerate()
            .map(|(i, l)| (i as u32 + 1, (l.entities.len(), l.relationships.len())))
            .collect()
    }
}
