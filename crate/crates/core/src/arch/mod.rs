//! Finite-set model of parameterised blocks and its structural maps.

pub mod block;
pub mod eval;
pub mod finset;
pub mod laws;

pub use block::{
    blocks_equivalent, blocks_equivalent_via, carrier, carrier_tensor_iso, compose_blocks,
    find_equivalence, identity_block, one_zone, permutation_block, symmetry_block, tensor_blocks,
    Block, TypedContext,
};
pub use eval::{eval_diagram, parse_elems, print_elems, realize, Bindings, Cartesian, Elem, Evaluator, MutatedDiagonal, StructuralMaps};
pub use finset::{FinMap, FinObj};
pub use laws::{coherence_check, monoidal_law_check, LawReport, LawResult};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArchError {
    #[error("duplicate label {0}")]
    DuplicateLabel(String),
    #[error("table has {found} entries, expected {expected}")]
    TableShape { expected: usize, found: usize },
    #[error("value {value} out of range for object of size {size}")]
    OutOfRange { value: usize, size: usize },
    #[error("type mismatch: {0}")]
    Mismatch(String),
    #[error("context mismatch: {left} vs {right}")]
    ContextMismatch { left: String, right: String },
    #[error("parameter object of size {size} exceeds equivalence cap {cap}")]
    ParamTooLarge { size: usize, cap: usize },
    #[error("block generator {0} has no binding")]
    UnboundGenerator(String),
    #[error("parameter element {index} out of range for {block} (size {size})")]
    UnboundParameter { block: String, index: usize, size: usize },
    #[error("unknown carrier {0}")]
    UnknownCarrier(String),
    #[error("bad input: {0}")]
    Input(String),
}
