//! Structure-of-levels event algebra.
//!
//! An event is modelled as a finite stratified hierarchy of entities and
//! relationships. Probability is a measure carried by relationships, outcome
//! entities borrow it through a univocal denotation, and a seeded Monte Carlo
//! harness measures relative frequencies against those measures.
//!
//! Module map:
//!
//! * [`algebra`]: the data model, validation and certain/uncertain classification.
//! * [`probability`]: assignment, defaults, denotation, classical ratio and the
//!   sample-space view of an alternative group.
//! * [`dsl`]: the `.sol` text format (parser with spanned diagnostics, canonical
//!   serializer).
//! * [`montecarlo`]: deterministic PRNG, group sampling, the two chord
//!   dynamics and the frequency convergence study.
//! * [`builtin`]: embedded example structures.

pub mod algebra;
pub mod builtin;
pub mod dsl;
mod error;
mod id;
pub mod montecarlo;
pub mod probability;
mod value;

pub use algebra::{
    ChildSpec, Classification, ClassificationKind, ElementRef, EntityNode, Level, RelationshipNode, Role,
    StructureOfLevels, Violation,
};
pub use error::{Error, Result};
pub use id::{is_keyword, ElementId, KEYWORDS};
pub use probability::{Denotation, Probability, SampleSpaceView};
pub use value::{format_significant, ProbabilityValue};
