//! Graph distributions: classical and semi-random planted clique, the null
//! designs and the coupled planted distribution.

pub mod design;
pub mod generators;
pub mod graph;
pub mod hypergeometric;
pub mod instance;

pub use design::{is_prime, Block, Design, DesignKind, Point};
pub use generators::{
    assignment_weights, conditional_assignment, gen_classical, gen_coupled, gen_coupled_grid,
    gen_null_grid, gen_null_lines, gen_semirandom, AdversarySpec, CouplingState, EdgeRule,
    GridConfig, Model, PlantedInstance,
};
pub use graph::Graph;
pub use hypergeometric::sample as hypergeometric_sample;
pub use instance::{GridRecord, InstanceFile};
