//! Deterministic stable-matching machinery: profiles, deferred acceptance, stability
//! checks, market reduction, rotations and stable permutations.

pub mod agent;
pub mod da;
pub mod graph;
pub mod matching;
pub mod permutation;
pub mod profile;
pub mod reduce;
pub mod rotation;
pub mod stability;

pub use agent::{AgentId, Side};
pub use da::{deferred_acceptance, mpda, wpda, MatchingProcedure, Procedure, Schedule};
pub use graph::BipartiteGraph;
pub use matching::Matching;
pub use permutation::{count_long_cycles, AlternatingPermutation};
pub use profile::PreferenceProfile;
pub use reduce::{reduce_market, FillOrder, ReducedMarket};
pub use rotation::{eliminate_rotation, exposed_rotations, Direction, Rotation};
pub use stability::{
    blocking_pairs, enumerate_stable_matchings, is_stable, is_stable_permutation, DEFAULT_STABLE_SET_CAP,
};
