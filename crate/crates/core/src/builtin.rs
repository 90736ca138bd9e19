//! Example structures shipped with the crate.

use crate::algebra::StructureOfLevels;
use crate::dsl;

pub const COIN: &str = include_str!("../assets/coin.sol");
pub const DICE: &str = include_str!("../assets/dice.sol");
pub const BERTRAND_PAIR: &str = include_str!("../assets/bertrand.sol");
pub const DECISION: &str = include_str!("../assets/decision.sol");
pub const GRAVITATION: &str = include_str!("../assets/gravitation.sol");

/// `(name, source)` for every embedded example.
pub const ALL: &[(&str, &str)] = &[
    ("coin", COIN),
    ("dice", DICE),
    ("bertrand-pair", BERTRAND_PAIR),
    ("decision", DECISION),
    ("gravitation", GRAVITATION),
];

pub fn source(name: &str) -> Option<&'static str> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, src)| *src)
}

/// Parses an embedded example. Panics only if a shipped asset is broken.
pub fn load(name: &str) -> Option<Vec<StructureOfLevels>> {
    source(name).map(|src| dsl::parse(src).expect("embedded example parses"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_example_parses_and_round_trips() {
        for (name, _) in ALL {
            let parsed = load(name).unwrap();
            let text = dsl::serialize_all(&parsed).unwrap();
            assert_eq!(dsl::parse(&text).unwrap(), parsed, "{name}");
        }
    }
}
