//! Random preference models: popularity matrices, samplers, exact list and profile
//! probabilities, and conversions between equivalent formulations.

pub mod model;
pub mod popularity;
pub mod probability;
pub mod sample;
pub mod stream;

pub use model::PreferenceModel;
pub use popularity::{
    edges_first, edges_first_lower_bound, graph_to_popularity, vertical_to_symmetric, PopularityMatrix,
};
pub use probability::{
    agent_list_probability, list_distribution, list_probability, pairwise_preference_probability, profile_probability,
    vertical_list_probability,
};
pub use sample::{sample_profile, ProfileSampler};
pub use stream::{SeededStream, StreamRng};
