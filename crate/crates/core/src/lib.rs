//! Multistate nested canalizing functions over prime fields.

pub mod canonical;
pub mod definition;
pub mod enumeration;
pub mod error;
pub mod field;
pub mod io;
pub mod network;
mod parallel;
pub mod sampler;
pub mod sensitivity;
pub mod table;

pub use canonical::{build, decompose, is_nested_canalizing, CanonicalNcf, LayerEntry};
pub use definition::{from_definition, layer_count_from_outputs, DefinitionParams};
pub use error::{Error, Result};
pub use field::{all_segments, PrimeModulus, Segment, SegmentKind};
pub use network::{Network, Node};
pub use sampler::{Distribution, EnsembleSpec, InDegree, NetworkSpec};
pub use table::{are_permutation_equivalent, CanalizingTriple, TruthTable};
