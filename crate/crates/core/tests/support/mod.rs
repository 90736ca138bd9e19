//! Random structure generation shared by the property and acceptance suites.
#![allow(dead_code)]

use levels_core::probability::{assign_probability, denote};
use levels_core::{ChildSpec, ElementRef, Error, ProbabilityValue, StructureOfLevels};
use proptest::prelude::*;
use proptest::sample::Index;

#[derive(Debug, Clone)]
pub struct KidDraft {
    pub rel: bool,
    pub opaque: bool,
    pub output: bool,
}

#[derive(Debug, Clone)]
pub struct OpDraft {
    pub target: Index,
    pub kids: Vec<KidDraft>,
    pub alt: bool,
    pub assign: bool,
    pub denote: bool,
}

#[derive(Debug, Clone)]
pub struct BuildPlan {
    pub input: bool,
    pub output: bool,
    pub ops: Vec<OpDraft>,
}

fn kid() -> impl Strategy<Value = KidDraft> {
    (any::<bool>(), prop::bool::weighted(0.25), any::<bool>())
        .prop_map(|(rel, opaque, output)| KidDraft { rel, opaque, output })
}

fn op() -> impl Strategy<Value = OpDraft> {
    (
        any::<Index>(),
        prop::collection::vec(kid(), 1..5),
        any::<bool>(),
        any::<bool>(),
        any::<bool>(),
    )
        .prop_map(|(target, kids, alt, assign, denote)| OpDraft {
            target,
            kids,
            alt,
            assign,
            denote,
        })
}

pub fn build_plan() -> impl Strategy<Value = BuildPlan> {
    (any::<bool>(), any::<bool>(), prop::collection::vec(op(), 0..10))
        .prop_map(|(input, output, ops)| BuildPlan { input, output, ops })
}

/// Replays `plan`, returning every intermediate snapshot (the first is the
/// base structure). Expansions of opaque relationships must fail with
/// `OpaqueExpansion` and leave the snapshot untouched.
pub fn apply(plan: &BuildPlan) -> Result<Vec<StructureOfLevels>, String> {
    let base = StructureOfLevels::new_event_structure(
        "s",
        plan.input.then_some("e_in"),
        plan.output.then_some("e_out"),
        "r0",
    )
    .map_err(|e| e.to_string())?;
    let mut snapshots = vec![base];
    let mut counter = 0usize;
    for op in &plan.ops {
        let current = snapshots.last().unwrap().clone();
        let ids: Vec<String> = current.elements().map(|e| e.id().to_string()).collect();
        let target = op.target.get(&ids).clone();
        let opaque_target = matches!(
            current.element(&target),
            Some(ElementRef::Relationship(r)) if r.opaque
        );

        counter += 1;
        let group = format!("g{counter}");
        let rel_count = op.kids.iter().filter(|k| k.rel).count() as u64;
        let mut children = Vec::new();
        let mut rels = Vec::new();
        let mut outs = Vec::new();
        for (i, k) in op.kids.iter().enumerate() {
            if k.rel {
                let name = format!("r{counter}_{i}");
                let mut spec = ChildSpec::rel(name.as_str());
                if k.opaque {
                    spec = spec.opaque();
                }
                if op.alt {
                    spec = spec.alt(group.as_str());
                }
                rels.push(name);
                children.push(spec);
            } else {
                let name = format!("e{counter}_{i}");
                let mut spec = ChildSpec::entity(name.as_str());
                if k.output {
                    spec = spec.output();
                    outs.push(name.clone());
                }
                children.push(spec);
            }
        }

        let mut next = match current.expand(&target, children) {
            Ok(next) => next,
            Err(Error::OpaqueExpansion(id)) if opaque_target && id == target => continue,
            Err(e) => return Err(format!("expand {target}: {e}")),
        };
        if opaque_target {
            return Err(format!("expanded opaque {target}"));
        }
        if op.alt && op.assign && rel_count > 0 {
            let share = ProbabilityValue::new(1, rel_count).unwrap();
            for r in &rels {
                next = assign_probability(&next, r, share.clone()).map_err(|e| e.to_string())?;
            }
        }
        if op.denote {
            for (o, r) in outs.iter().zip(&rels) {
                next = denote(&next, o, r).map_err(|e| e.to_string())?;
            }
        }
        snapshots.push(next);
    }
    Ok(snapshots)
}

/// Stratification: children sit exactly one level down, every element past
/// level 1 has a parent one level up, and opacity decides certainty.
pub fn check_invariants(s: &StructureOfLevels) -> Result<(), String> {
    let violations = s.validate();
    if !violations.is_empty() {
        return Err(format!("violations: {violations:?}"));
    }
    if s.validate() != violations {
        return Err("validate is not idempotent".into());
    }
    for (index, level) in s.levels().iter().enumerate() {
        if level.is_empty() {
            return Err(format!("empty level {}", index + 1));
        }
    }
    for e in s.elements() {
        for c in s.children(e.id().as_str()) {
            if c.level() != e.level() + 1 {
                return Err(format!("{} is not one level below {}", c.id(), e.id()));
            }
        }
        match e.parent() {
            None if e.level() != 1 => return Err(format!("{} has no parent", e.id())),
            Some(p) => {
                let parent = s.element(p.as_str()).ok_or("dangling parent")?;
                if parent.level() + 1 != e.level() {
                    return Err(format!("{} is not one level below its parent", e.id()));
                }
                if !s.children(p.as_str()).iter().any(|c| c.id() == e.id()) {
                    return Err(format!("{} missing from children({p})", e.id()));
                }
            }
            None => {}
        }
    }
    let any_opaque = s.relationships().any(|r| r.opaque);
    let c = s.classify().map_err(|e| e.to_string())?;
    if c.is_certain() == any_opaque {
        return Err("classification disagrees with opacity".into());
    }
    Ok(())
}

/// Draws a probability `n/d` with `d <= max_den`.
pub fn probability(max_den: u64) -> impl Strategy<Value = ProbabilityValue> {
    (1..=max_den)
        .prop_flat_map(|d| (0..=d, Just(d)))
        .prop_map(|(n, d)| ProbabilityValue::new(n, d).unwrap())
}
