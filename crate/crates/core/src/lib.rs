//! Decision-based causality over influence diagrams.
//!
//! The crate answers causal questions about an influence diagram in terms of
//! what the decision maker can and cannot change:
//!
//! * [`graph`] reads blocking, d-separation, fixed sets and causes off the graph.
//! * [`hcf`] extracts causal mechanisms and rewrites a diagram into canonical
//!   form, where every decision descendant is deterministic.
//! * [`inference`] and [`oracle`] compute exact distributions and the semantic
//!   (world-enumerating) versions of fixed sets and causes.
//! * [`decision`] and [`twin`] evaluate policies, value of information and
//!   counterfactual queries.
//! * [`io`] reads and writes the JSON model format.

pub mod decision;
pub mod error;
pub mod factor;
pub mod fixtures;
pub mod graph;
pub mod hcf;
pub mod inference;
pub mod instances;
pub mod io;
pub mod model;
mod net;
pub mod oracle;
pub mod twin;
pub mod validate;

pub use decision::{
    expected_utility, optimal_policy, optimal_policy_with_caps, value_of_information, DecisionRule, Policy, VoiOptions,
};
pub use error::{Error, Result};
pub use factor::Factor;
pub use graph::{
    blocks, certify_causal_network, d_separated, graphical_causes, graphical_fixed_set, is_set_decision,
    minimal_blocking_sets, removable_arcs, BlockingQuery, CauseMethod, CauseReport, Certification, FixedSetReport,
};
pub use hcf::{
    canonical_mechanism_prior, check_marginal_reproduction, ensure_canonical, enumerate_mechanism_states, to_hcf,
    HcfDiagram, HcfOptions, MarginalReport, MechanismRecord, MechanismSpec,
};
pub use inference::{decision_instances, joint, joint_with_caps, posterior, posterior_by_enumeration};
pub use instances::enumerate_instances;
pub use io::{parse_hcf, parse_model, serialize_hcf, serialize_model};
pub use model::{
    Annotations, Assignment, ConditionalTable, Diagram, DiagramParts, Edge, Node, NodeKind, UtilityTable, Variable,
};
pub use oracle::{
    oracle_causes, oracle_causes_in, oracle_fixed_set_member, oracle_is_d_map, DMapVerdict, FunctionalWorlds,
};
pub use twin::{build_twin, counterfactual, counterfactual_expected_utility, CounterfactualQuery, TwinDiagram};
pub use validate::{validate_diagram, ValidationReport};

/// Enumeration limits. Every exhaustive search in the crate checks one of these
/// before starting and fails with a resource error instead of running away.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Caps {
    /// Candidate nodes for minimal blocking-set search.
    pub blocking_pool: usize,
    /// States of a single mechanism variable.
    pub mechanism_states: u128,
    /// Functional worlds times ordered pairs of decision instances.
    pub world_pairs: u128,
    /// Candidate policies for exhaustive policy search.
    pub policies: u128,
    /// Entries of a dense joint table.
    pub joint_entries: u128,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            blocking_pool: 20,
            mechanism_states: 1_000_000,
            world_pairs: 10_000_000,
            policies: 1_000_000,
            joint_entries: 10_000_000,
        }
    }
}
