use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::agent::AgentId;
use super::matching::Matching;
use super::permutation::AlternatingPermutation;
use super::profile::PreferenceProfile;
use crate::error::{Error, Result};

/// Default cap on candidate matchings visited by [`enumerate_stable_matchings`].
pub const DEFAULT_STABLE_SET_CAP: u64 = 1_000_000;

fn check_compatible(profile: &PreferenceProfile, matching: &Matching) -> Result<()> {
    if profile.shape() != (matching.num_men(), matching.num_women()) {
        return Err(Error::validation(format!(
            "matching shape {}x{} does not fit a {}x{} profile",
            matching.num_men(),
            matching.num_women(),
            profile.num_men(),
            profile.num_women()
        )));
    }
    for (m, w) in matching.pairs() {
        if !profile.mutually_acceptable(m, w) {
            return Err(Error::validation(format!(
                "matching pairs m{} with w{} who are not mutually acceptable",
                m + 1,
                w + 1
            )));
        }
    }
    Ok(())
}

/// Pairs that block `matching`: mutually acceptable, not matched together, and each
/// strictly preferring the other to their assignment (or to being unmatched).
pub fn blocking_pairs(profile: &PreferenceProfile, matching: &Matching) -> Result<Vec<(usize, usize)>> {
    check_compatible(profile, matching)?;
    Ok(blocking_pairs_unchecked(profile, matching).collect())
}

fn blocking_pairs_unchecked<'a>(
    profile: &'a PreferenceProfile,
    matching: &'a Matching,
) -> impl Iterator<Item = (usize, usize)> + 'a {
    (0..profile.num_men()).flat_map(move |m| {
        profile.man_list(m).iter().filter_map(move |&w| {
            let blocks = matching.wife(m) != Some(w)
                && profile.woman_rank(w, m).is_some()
                && profile.prefers(AgentId::man(m), Some(w), matching.wife(m))
                && profile.prefers(AgentId::woman(w), Some(m), matching.husband(w));
            blocks.then_some((m, w))
        })
    })
}

pub fn is_stable(profile: &PreferenceProfile, matching: &Matching) -> Result<bool> {
    check_compatible(profile, matching)?;
    Ok(blocking_pairs_unchecked(profile, matching).next().is_none())
}

/// All stable matchings by exhaustive search over matchings of mutually acceptable pairs,
/// in canonical order. Fails rather than truncating once more than `cap` candidates exist.
pub fn enumerate_stable_matchings(profile: &PreferenceProfile, cap: u64) -> Result<Vec<Matching>> {
    let (num_men, num_women) = profile.shape();
    let options: Vec<Vec<usize>> = (0..num_men)
        .map(|m| {
            profile
                .man_list(m)
                .iter()
                .copied()
                .filter(|&w| profile.woman_rank(w, m).is_some())
                .collect()
        })
        .collect();

    struct Search<'a> {
        profile: &'a PreferenceProfile,
        options: &'a [Vec<usize>],
        wives: Vec<Option<usize>>,
        taken: Vec<bool>,
        visited: u64,
        cap: u64,
        found: Vec<Matching>,
    }

    impl Search<'_> {
        fn go(&mut self, m: usize) -> Result<()> {
            if m == self.wives.len() {
                self.visited += 1;
                if self.visited > self.cap {
                    return Err(Error::Capacity {
                        what: "stable-matching enumeration",
                        required: None,
                        cap: u128::from(self.cap),
                    });
                }
                let mu = Matching::from_wives(self.taken.len(), &self.wives)?;
                if blocking_pairs_unchecked(self.profile, &mu).next().is_none() {
                    self.found.push(mu);
                }
                return Ok(());
            }
            self.wives[m] = None;
            self.go(m + 1)?;
            for i in 0..self.options[m].len() {
                let w = self.options[m][i];
                if !self.taken[w] {
                    self.taken[w] = true;
                    self.wives[m] = Some(w);
                    self.go(m + 1)?;
                    self.taken[w] = false;
                }
            }
            self.wives[m] = None;
            Ok(())
        }
    }

    let mut search = Search {
        profile,
        options: &options,
        wives: vec![None; num_men],
        taken: vec![false; num_women],
        visited: 0,
        cap,
        found: Vec::new(),
    };
    search.go(0)?;
    let mut found = search.found;
    found.sort();
    found.dedup();
    Ok(found)
}

/// Stability of an alternating permutation on a complete profile:
/// everyone weakly prefers their successor to their predecessor, and for every pair
/// `(m, w)` either `σ⁻¹(m) ⪰_m w` or `σ⁻¹(w) ⪰_w m`.
pub fn is_stable_permutation(profile: &PreferenceProfile, sigma: &AlternatingPermutation) -> Result<bool> {
    if !profile.is_complete() || !profile.is_balanced() {
        return Err(Error::precondition(
            "permutation stability needs a complete balanced profile; reduce the market first",
        ));
    }
    if profile.num_men() != sigma.size() {
        return Err(Error::validation("permutation size does not match the profile"));
    }
    let (pred_of_man, pred_of_woman) = sigma.predecessors();
    Ok(stable_permutation_unchecked(
        profile,
        sigma,
        &pred_of_man,
        &pred_of_woman,
    ))
}

/// Hot-path check used by the exact engine; assumes a complete balanced profile of the
/// right size and precomputed predecessors.
pub(crate) fn stable_permutation_unchecked(
    profile: &PreferenceProfile,
    sigma: &AlternatingPermutation,
    pred_of_man: &[usize],
    pred_of_woman: &[usize],
) -> bool {
    let n = sigma.size();
    let rank_m = |m: usize, w: usize| profile.man_rank(m, w).unwrap();
    let rank_w = |w: usize, m: usize| profile.woman_rank(w, m).unwrap();
    for m in 0..n {
        if rank_m(m, sigma.man_successor(m)) > rank_m(m, pred_of_man[m]) {
            return false;
        }
    }
    for w in 0..n {
        if rank_w(w, sigma.woman_successor(w)) > rank_w(w, pred_of_woman[w]) {
            return false;
        }
    }
    for m in 0..n {
        let pm = rank_m(m, pred_of_man[m]);
        for w in 0..n {
            if rank_m(m, w) < pm && rank_w(w, m) < rank_w(w, pred_of_woman[w]) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{example_profile, four_cycle_profile};
    use crate::market::da::{mpda, wpda};

    fn mu1() -> Matching {
        Matching::from_pairs(3, 3, [(0, 0), (1, 1), (2, 2)]).unwrap()
    }

    fn mu2() -> Matching {
        Matching::from_pairs(3, 3, [(0, 0), (1, 2), (2, 1)]).unwrap()
    }

    /// Direct scan of every (m, w) pair, written independently of the list-walking version.
    fn blocking_by_scan(p: &PreferenceProfile, mu: &Matching) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for m in 0..p.num_men() {
            for w in 0..p.num_women() {
                let (Some(rm), Some(rw)) = (p.man_rank(m, w), p.woman_rank(w, m)) else {
                    continue;
                };
                if mu.wife(m) == Some(w) {
                    continue;
                }
                let m_wants = mu.wife(m).is_none_or(|cur| rm < p.man_rank(m, cur).unwrap());
                let w_wants = mu.husband(w).is_none_or(|cur| rw < p.woman_rank(w, cur).unwrap());
                if m_wants && w_wants {
                    out.push((m, w));
                }
            }
        }
        out
    }

    #[test]
    fn example_blocking_pairs() {
        let p = example_profile();
        assert!(blocking_pairs(&p, &mu1()).unwrap().is_empty());
        let mu3 = Matching::from_pairs(3, 3, [(0, 1), (1, 2)]).unwrap();
        let mut got = blocking_pairs(&p, &mu3).unwrap();
        got.sort();
        assert_eq!(got, vec![(1, 1), (2, 1)]);
        assert_eq!(got, blocking_by_scan(&p, &mu3));
    }

    #[test]
    fn unacceptable_pair_is_rejected() {
        let p = example_profile();
        // m1 and w3 are not neighbours in the example graph
        let bad = Matching::from_pairs(3, 3, [(0, 2)]).unwrap();
        assert!(matches!(blocking_pairs(&p, &bad), Err(Error::Validation(_))));
    }

    #[test]
    fn one_by_one_is_stable() {
        let p = PreferenceProfile::new(vec![vec![0]], vec![vec![0]]).unwrap();
        let mu = Matching::from_pairs(1, 1, [(0, 0)]).unwrap();
        assert!(blocking_pairs(&p, &mu).unwrap().is_empty());
        assert_eq!(
            enumerate_stable_matchings(&p, DEFAULT_STABLE_SET_CAP).unwrap(),
            vec![mu]
        );
    }

    #[test]
    fn stable_sets_of_fixtures() {
        for p in [example_profile(), four_cycle_profile()] {
            let all = enumerate_stable_matchings(&p, DEFAULT_STABLE_SET_CAP).unwrap();
            assert_eq!(all, vec![mu1(), mu2()]);
            assert!(all.contains(&mpda(&p)));
            assert!(all.contains(&wpda(&p)));
        }
    }

    #[test]
    fn stable_set_cap_is_enforced() {
        let p = four_cycle_profile();
        // 34 matchings of K_{3,3} (including partial ones)
        let err = enumerate_stable_matchings(&p, 10).unwrap_err();
        assert!(matches!(err, Error::Capacity { cap: 10, .. }));
        assert!(enumerate_stable_matchings(&p, 34).is_ok());
    }

    #[test]
    fn matching_as_permutation_is_stable() {
        let p = four_cycle_profile();
        let sigma = AlternatingPermutation::from_matching(&mu1()).unwrap();
        assert!(is_stable_permutation(&p, &sigma).unwrap());
    }

    #[test]
    fn four_cycle_rotation_permutation_is_stable() {
        let p = four_cycle_profile();
        let sigma = AlternatingPermutation::new(vec![0, 1, 2], vec![0, 2, 1]).unwrap();
        assert!(is_stable_permutation(&p, &sigma).unwrap());
    }

    #[test]
    fn four_cycle_with_unhappy_woman_is_unstable() {
        let p = PreferenceProfile::new(vec![vec![0, 1], vec![1, 0]], vec![vec![0, 1], vec![1, 0]]).unwrap();
        // m1 -> w1 -> m2 -> w2 -> m1
        let sigma = AlternatingPermutation::new(vec![0, 1], vec![1, 0]).unwrap();
        assert!(!is_stable_permutation(&p, &sigma).unwrap());
    }

    #[test]
    fn incomplete_profile_is_a_precondition_error() {
        let sigma = AlternatingPermutation::new(vec![0, 1, 2], vec![0, 1, 2]).unwrap();
        assert!(matches!(
            is_stable_permutation(&example_profile(), &sigma),
            Err(Error::Precondition(_))
        ));
    }
}
