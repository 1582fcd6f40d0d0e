//! Small worked markets used throughout the tests, the CLI and the acceptance suite.

use alloc::vec;
use alloc::vec::Vec;

use crate::market::{AlternatingPermutation, BipartiteGraph, Matching, PreferenceProfile};
use crate::prefdist::PopularityMatrix;

/// Three men, three women; six acceptable pairs.
pub fn example_graph() -> BipartiteGraph {
    BipartiteGraph::new(3, 3, [(0, 0), (0, 1), (1, 1), (2, 1), (1, 2), (2, 2)]).unwrap()
}

/// A profile drawn from the uniform model on [`example_graph`]. It has two stable matchings.
pub fn example_profile() -> PreferenceProfile {
    PreferenceProfile::new(
        vec![vec![1, 0], vec![1, 2], vec![2, 1]],
        vec![vec![0], vec![2, 1, 0], vec![1, 2]],
    )
    .unwrap()
}

/// The four matchings DA can output on [`example_graph`], in the order
/// `m1-w1,m2-w2,m3-w3`, `m1-w1,m2-w3,m3-w2`, `m1-w2,m2-w3`, `m1-w2,m3-w3`.
pub fn example_outputs() -> Vec<Matching> {
    [
        &[(0, 0), (1, 1), (2, 2)][..],
        &[(0, 0), (1, 2), (2, 1)][..],
        &[(0, 1), (1, 2)][..],
        &[(0, 1), (2, 2)][..],
    ]
    .iter()
    .map(|pairs| Matching::from_pairs(3, 3, pairs.iter().copied()).unwrap())
    .collect()
}

/// A complete 3x3 profile with stable matchings `m1-w1,m2-w2,m3-w3` and
/// `m1-w1,m2-w3,m3-w2`, joined by a single rotation.
pub fn four_cycle_profile() -> PreferenceProfile {
    PreferenceProfile::new(
        vec![vec![1, 0, 2], vec![1, 2, 0], vec![2, 1, 0]],
        vec![vec![0, 1, 2], vec![2, 1, 0], vec![1, 2, 0]],
    )
    .unwrap()
}

/// Stable permutation of [`four_cycle_profile`]: the pair `(m1 w1)` plus the 4-cycle
/// `m2 > w2 > m3 > w3 > m2`.
pub fn four_cycle_permutation() -> AlternatingPermutation {
    AlternatingPermutation::new(vec![0, 1, 2], vec![0, 2, 1]).unwrap()
}

/// The 3x3 popularity matrix `[[2,1,3],[5,6,2],[3,4,1]]`.
pub fn example_matrix() -> PopularityMatrix {
    PopularityMatrix::from_integers(&[&[2, 1, 3], &[5, 6, 2], &[3, 4, 1]]).unwrap()
}

/// A non-symmetric 3x3 assignment under which MPDA and WPDA have different exact output
/// distributions: men draw their lists from the anti-popularity model of [`example_matrix`],
/// women draw theirs uniformly. Returns `(men's matrix, women's matrix)`.
pub fn asymmetric_matrices() -> (PopularityMatrix, PopularityMatrix) {
    (example_matrix(), PopularityMatrix::ones(3, 3))
}
