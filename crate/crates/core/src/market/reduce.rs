//! Reduction of an incomplete, possibly unbalanced market to a balanced complete one.
//!
//! Acceptability is first made symmetric (a pair stays acceptable only if both sides list
//! each other), the smaller side is padded with virtual agents, and every list is completed
//! by appending the missing partners. Running deferred acceptance on the result and dropping
//! pairs outside the acceptability graph gives the same matching as running it directly.

use alloc::vec::Vec;

use super::graph::BipartiteGraph;
use super::matching::Matching;
use super::profile::PreferenceProfile;

/// Order in which unacceptable and virtual partners are appended to a list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FillOrder {
    #[default]
    Ascending,
    Descending,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedMarket {
    /// Balanced complete profile of size `max(M, W)`.
    pub profile: PreferenceProfile,
    /// Mutually acceptable pairs of the original market, in its original shape.
    pub acceptable: BipartiteGraph,
}

impl ReducedMarket {
    /// Maps a matching of the reduced market back onto the original market.
    pub fn restrict(&self, matching: &Matching) -> Matching {
        self.acceptable.restrict(matching)
    }
}

pub fn reduce_market(profile: &PreferenceProfile, fill: FillOrder) -> ReducedMarket {
    let (num_men, num_women) = profile.shape();
    let n = num_men.max(num_women);
    let acceptable = BipartiteGraph::new(
        num_men,
        num_women,
        (0..num_men).flat_map(|m| {
            (0..num_women)
                .filter(move |&w| profile.mutually_acceptable(m, w))
                .map(move |w| (m, w))
        }),
    )
    .expect("pairs are distinct and in range");

    let complete = |prefix: Vec<usize>| -> Vec<usize> {
        let mut present = alloc::vec![false; n];
        for &j in &prefix {
            present[j] = true;
        }
        let mut list = prefix;
        let missing = (0..n).filter(|&j| !present[j]);
        match fill {
            FillOrder::Ascending => list.extend(missing),
            FillOrder::Descending => list.extend(missing.rev()),
        }
        list
    };

    let men = (0..n)
        .map(|m| {
            let prefix = if m < num_men {
                profile
                    .man_list(m)
                    .iter()
                    .copied()
                    .filter(|&w| acceptable.contains(m, w))
                    .collect()
            } else {
                Vec::new()
            };
            complete(prefix)
        })
        .collect();
    let women = (0..n)
        .map(|w| {
            let prefix = if w < num_women {
                profile
                    .woman_list(w)
                    .iter()
                    .copied()
                    .filter(|&m| acceptable.contains(m, w))
                    .collect()
            } else {
                Vec::new()
            };
            complete(prefix)
        })
        .collect();

    ReducedMarket {
        profile: PreferenceProfile::new(men, women).expect("completed lists are valid"),
        acceptable,
    }
}
