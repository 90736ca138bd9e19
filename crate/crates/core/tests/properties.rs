mod support;

use levels_core::dsl::{parse, parse_bytes, serialize};
use levels_core::probability::{
    assign_probability, classical_probability, complement, kolmogorov_view, probability_of,
    Probability,
};
use levels_core::{ChildSpec, ProbabilityValue, StructureOfLevels};
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn group_of(k: usize) -> StructureOfLevels {
    let mut children: Vec<ChildSpec> = (0..k)
        .map(|i| ChildSpec::rel(format!("R_{i}")).alt("g").opaque())
        .collect();
    children.extend((0..k).map(|i| ChildSpec::entity(format!("E_{i}")).output()));
    let mut s = StructureOfLevels::new_event_structure("s", Some("E_in"), None, "R")
        .unwrap()
        .expand("R", children)
        .unwrap();
    for i in 0..k {
        s = levels_core::probability::denote(&s, &format!("E_{i}"), &format!("R_{i}")).unwrap();
    }
    s
}

proptest! {
    #[test]
    fn build_sequences_keep_levels_stratified(plan in support::build_plan()) {
        let snapshots = support::apply(&plan).map_err(TestCaseError::fail)?;
        for s in &snapshots {
            support::check_invariants(s).map_err(TestCaseError::fail)?;
        }
    }

    #[test]
    fn collapse_undoes_expand(plan in support::build_plan(), kids in 1usize..4) {
        let s = support::apply(&plan).map_err(TestCaseError::fail)?.pop().unwrap();
        let leaf = s
            .elements()
            .filter(|e| !matches!(e, levels_core::ElementRef::Relationship(r) if r.opaque))
            .find(|e| !s.has_children(e.id().as_str()))
            .map(|e| e.id().to_string());
        prop_assume!(leaf.is_some());
        let target = leaf.unwrap();
        let children: Vec<ChildSpec> = (0..kids).map(|i| ChildSpec::entity(format!("fresh{i}"))).collect();
        let restored = s.expand(&target, children).unwrap().collapse(&target).unwrap();
        prop_assert_eq!(serialize(&restored).unwrap(), serialize(&s).unwrap());
    }

    #[test]
    fn assignments_succeed_iff_they_sum_to_one(
        weights in prop::collection::vec(0u64..20, 2..8),
        perturb in prop::option::of(1u64..5),
    ) {
        let k = weights.len();
        let total: u64 = weights.iter().sum::<u64>().max(1);
        let mut values: Vec<ProbabilityValue> = weights
            .iter()
            .map(|w| ProbabilityValue::new(*w, total).unwrap())
            .collect();
        if weights.iter().all(|w| *w == 0) {
            values[0] = ProbabilityValue::one();
        }
        if let Some(delta) = perturb {
            let bumped = values[0].ratio()
                + BigRational::new(delta.into(), (10 * total).into());
            if let Ok(v) = ProbabilityValue::from_ratio(bumped) {
                values[0] = v;
            }
        }
        let sum = values.iter().fold(BigRational::zero(), |a, v| a + v.ratio());
        let mut s = group_of(k);
        let mut failed = false;
        for (i, v) in values.iter().enumerate() {
            match assign_probability(&s, &format!("R_{i}"), v.clone()) {
                Ok(next) => s = next,
                Err(levels_core::Error::UnnormalizedAlternatives { .. }) => { failed = true; break; }
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }
        prop_assert_eq!(!failed, sum.is_one());
        if !failed {
            prop_assert_eq!(kolmogorov_view(&s, "g").unwrap().total(), Some(BigRational::one()));
        }
    }

    #[test]
    fn complement_is_an_involution(p in support::probability(1_000_000)) {
        prop_assert_eq!(complement(&complement(&p)), p.clone());
        prop_assert!((p.ratio() + complement(&p).ratio()).is_one());
    }

    #[test]
    fn uniform_groups_match_the_classical_ratio(k in 1usize..=12, cases_per_member in 1u64..5) {
        // enumerate k * m equally likely elementary cases, m per member
        let total = k as u64 * cases_per_member;
        let mut s = group_of(k);
        for i in 0..k {
            let favorable = (0..total).filter(|c| c % k as u64 == i as u64).count() as u64;
            s = assign_probability(&s, &format!("R_{i}"), ProbabilityValue::new(favorable, total).unwrap()).unwrap();
        }
        let expected = classical_probability(1, k as u64).unwrap();
        for i in 0..k {
            prop_assert_eq!(probability_of(&s, &format!("R_{i}")).unwrap(), Probability::Known(expected.clone()));
        }
    }

    #[test]
    fn serialization_round_trips(plan in support::build_plan()) {
        let s = support::apply(&plan).map_err(TestCaseError::fail)?.pop().unwrap();
        let text = serialize(&s).unwrap();
        let reparsed = parse(&text).map_err(|d| TestCaseError::fail(format!("{d:?}\n{text}")))?;
        prop_assert_eq!(reparsed.len(), 1);
        prop_assert_eq!(serialize(&reparsed[0]).unwrap(), text);
    }

    #[test]
    fn parser_is_total_on_arbitrary_text(src in ".{0,200}") {
        let _ = parse(&src);
    }

    #[test]
    fn parser_is_total_on_arbitrary_bytes(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        let out = parse_bytes(&bytes);
        prop_assert_eq!(out.has_errors(), out.structures.is_empty());
    }
}
