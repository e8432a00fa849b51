//! Set-oriented core: box coverings, sampled-control transition graphs,
//! strongly connected components, chain control sets, and the jump-function
//! ladder for strong chain control sets.

pub mod covering;
pub mod export;
pub mod graph;
pub mod ladder;
pub mod scc;
pub mod sets;

pub use covering::{build_covering, BoxCell, BoxCovering, DomainSpec};
pub use graph::{
    build_transition_graph, euclidean_flow, sample_offsets, sphere_flow, Flow, JumpSpec,
    TransitionGraph, Weight,
};
pub use ladder::{strong_chain_ladder, LadderOutcome, LadderRecord};
pub use scc::{chain_reachable_set, strongly_connected_components, tarjan_scc};
pub use sets::{
    antipodal_classification, chain_control_sets, equator_containment, hemisphere_restriction,
    projective_quotient, AntipodalClass, ChainSetResult, Classification, ContainmentReport,
    RestrictionResult,
};

use thiserror::Error;

/// Hard cap on covering size.
pub const BOX_BUDGET: usize = 2_000_000;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("covering would need {needed} boxes, budget is {budget}")]
    Budget { needed: usize, budget: usize },
    #[error("depth {depth} exceeds maximum {max} for this domain")]
    Depth { depth: usize, max: usize },
    #[error("unknown box id {0}")]
    UnknownBox(usize),
    #[error("invalid engine input: {0}")]
    Input(String),
    #[error(transparent)]
    System(#[from] crate::systems::SystemError),
}

/// Maximum subdivision depth: 12 for up to two grid axes, 8 above.
pub fn depth_max(grid_axes: usize) -> usize {
    if grid_axes <= 2 {
        12
    } else {
        8
    }
}
