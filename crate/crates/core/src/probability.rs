//! Probability as a measure on relationships.
//!
//! A relationship either carries an assigned [`ProbabilityValue`], inherits
//! the value 1 when it is a fully listed mechanism with no alternatives, or
//! is [`Probability::Unknown`]. Outcome entities get a probability only
//! through a univocal [`Denotation`] `E_out => R`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::algebra::{ElementRef, Role, StructureOfLevels};
use crate::error::{Error, Result};
use crate::id::ElementId;
use crate::value::{render, ProbabilityValue};

/// `outcome => relation`: the outcome appears whenever the relation works.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Denotation {
    pub outcome: ElementId,
    pub relation: ElementId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Probability {
    Known(ProbabilityValue),
    Unknown,
}

impl Probability {
    pub fn known(&self) -> Option<&ProbabilityValue> {
        match self {
            Probability::Known(p) => Some(p),
            Probability::Unknown => None,
        }
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Probability::Unknown)
    }
}

/// Outcome ensemble of an alternative group with the masses of the
/// relationships that produce each outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSpaceView {
    pub outcomes: Vec<ElementId>,
    /// Only outcomes whose relationship has a known measure appear here.
    pub masses: BTreeMap<ElementId, ProbabilityValue>,
}

impl SampleSpaceView {
    pub fn mass(&self, outcome: &str) -> Option<&ProbabilityValue> {
        self.masses.iter().find(|(k, _)| *k == outcome).map(|(_, v)| v)
    }

    /// Exact sum of the masses, `None` unless every outcome has one.
    pub fn total(&self) -> Option<BigRational> {
        if self.masses.len() != self.outcomes.len() {
            return None;
        }
        Some(
            self.masses
                .values()
                .fold(BigRational::zero(), |acc, p| acc + p.ratio()),
        )
    }
}

/// Records `p` on relationship `r`. Completing all but one member of an
/// alternative group infers the last member as `1 - sum(others)`.
pub fn assign_probability(
    s: &StructureOfLevels,
    r: &str,
    p: ProbabilityValue,
) -> Result<StructureOfLevels> {
    let mut next = s.clone();
    let node = next.relationship_mut(r).ok_or_else(|| match s.element(r) {
        Some(_) => Error::NotARelationship(r.to_string()),
        None => Error::NotFound(r.to_string()),
    })?;
    node.probability = Some(p);
    node.inferred = false;
    if let Some(tag) = node.alt_group.clone() {
        reconcile_group(&mut next, &tag)?;
    }
    Ok(next)
}

/// Re-derives the inferred member of group `tag` and checks normalization.
pub(crate) fn reconcile_group(s: &mut StructureOfLevels, tag: &ElementId) -> Result<()> {
    let mut explicit = BigRational::zero();
    let mut missing = Vec::new();
    for node in s.relationships_mut() {
        if node.alt_group.as_ref() != Some(tag) {
            continue;
        }
        if node.inferred {
            node.probability = None;
            node.inferred = false;
        }
        match &node.probability {
            Some(p) => explicit += p.ratio(),
            None => missing.push(node.id.clone()),
        }
    }
    let unnormalized = |sum: &BigRational| Error::UnnormalizedAlternatives {
        group: tag.to_string(),
        sum: render(sum),
    };
    if explicit > BigRational::one() || (missing.is_empty() && !explicit.is_one()) {
        return Err(unnormalized(&explicit));
    }
    if let [last] = missing.as_slice() {
        let value = ProbabilityValue::from_ratio(BigRational::one() - &explicit)
            .map_err(|_| unnormalized(&explicit))?;
        s.note(format!("inferred P({last}) = {value} to normalize group {tag}"));
        let node = s.relationship_mut(last.as_str()).expect("member exists");
        node.probability = Some(value);
        node.inferred = true;
    }
    Ok(())
}

/// The measure of relationship `r`.
///
/// An unassigned relationship that is not opaque, has no alternatives and no
/// children is a listed mechanism that always links, so it measures 1.
pub fn probability_of(s: &StructureOfLevels, r: &str) -> Result<Probability> {
    let node = match s.element(r) {
        Some(ElementRef::Relationship(node)) => node,
        Some(ElementRef::Entity(_)) => return Err(Error::NotARelationship(r.to_string())),
        None => return Err(Error::NotFound(r.to_string())),
    };
    if let Some(p) = &node.probability {
        return Ok(Probability::Known(p.clone()));
    }
    if node.opaque || node.alt_group.is_some() || s.has_children(r) {
        return Ok(Probability::Unknown);
    }
    Ok(Probability::Known(ProbabilityValue::one()))
}

pub fn complement(p: &ProbabilityValue) -> ProbabilityValue {
    p.complement()
}

/// Favorable over possible cases, exact.
pub fn classical_probability(favorable: u64, possible: u64) -> Result<ProbabilityValue> {
    if possible == 0 || favorable > possible {
        return Err(Error::InvalidCounts {
            favorable,
            possible,
        });
    }
    ProbabilityValue::new(favorable, possible)
}

/// Records `outcome => relation`, rejecting anything that is not one-to-one.
pub fn denote(s: &StructureOfLevels, outcome: &str, relation: &str) -> Result<StructureOfLevels> {
    match s.element(outcome) {
        Some(ElementRef::Entity(e)) if e.role == Role::Output => {}
        Some(_) => return Err(Error::NotAnOutcome(outcome.to_string())),
        None => return Err(Error::NotFound(outcome.to_string())),
    }
    match s.element(relation) {
        Some(ElementRef::Relationship(_)) => {}
        Some(_) => return Err(Error::NotARelationship(relation.to_string())),
        None => return Err(Error::NotFound(relation.to_string())),
    }
    if s
        .denotations()
        .iter()
        .any(|d| d.outcome == outcome || d.relation == relation)
    {
        return Err(Error::NonUnivocal {
            outcome: outcome.to_string(),
            relation: relation.to_string(),
        });
    }
    let mut next = s.clone();
    next.denotations_mut().push(Denotation {
        outcome: ElementId::new(outcome)?,
        relation: ElementId::new(relation)?,
    });
    Ok(next)
}

pub fn denoted_relation<'a>(s: &'a StructureOfLevels, outcome: &str) -> Option<&'a ElementId> {
    s.denotations()
        .iter()
        .find(|d| d.outcome == outcome)
        .map(|d| &d.relation)
}

pub fn denoted_outcome<'a>(s: &'a StructureOfLevels, relation: &str) -> Option<&'a ElementId> {
    s.denotations()
        .iter()
        .find(|d| d.relation == relation)
        .map(|d| &d.outcome)
}

/// `P(E_out) = P(R)` through the denotation of `outcome`.
pub fn probability_of_outcome(s: &StructureOfLevels, outcome: &str) -> Result<Probability> {
    if s.element(outcome).is_none() {
        return Err(Error::NotFound(outcome.to_string()));
    }
    let relation =
        denoted_relation(s, outcome).ok_or_else(|| Error::NoDenotation(outcome.to_string()))?;
    probability_of(s, relation.as_str())
}

/// Sample-space reading of alternative group `group`: each member must denote
/// a distinct outcome. A relationship id outside any group is read as a
/// singleton group.
pub fn kolmogorov_view(s: &StructureOfLevels, group: &str) -> Result<SampleSpaceView> {
    let mut members = s.alt_group_members(group);
    if members.is_empty() {
        match s.relationship(group) {
            Some(r) if r.alt_group.is_none() => members.push(r),
            _ => return Err(Error::UnknownGroup(group.to_string())),
        }
    }
    let mut outcomes: Vec<ElementId> = Vec::with_capacity(members.len());
    let mut masses = BTreeMap::new();
    for member in members {
        let outcome = denoted_outcome(s, member.id.as_str())
            .ok_or_else(|| Error::NoOutcome(member.id.to_string()))?;
        if outcomes.contains(outcome) {
            return Err(Error::NonUnivocal {
                outcome: outcome.to_string(),
                relation: member.id.to_string(),
            });
        }
        outcomes.push(outcome.clone());
        if let Probability::Known(p) = probability_of(s, member.id.as_str())? {
            masses.insert(outcome.clone(), p);
        }
    }
    Ok(SampleSpaceView { outcomes, masses })
}
