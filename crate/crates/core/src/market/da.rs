//! Deferred acceptance, men- and women-proposing.

use alloc::collections::{BinaryHeap, VecDeque};
use alloc::vec;
use core::cmp::Reverse;

use super::matching::Matching;
use super::profile::PreferenceProfile;

/// Order in which free proposers make their next proposal.
/// The output does not depend on it; only the proposal trace does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    #[default]
    LowestIndexFirst,
    HighestIndexFirst,
    /// Free proposers queue up; a rejected proposer rejoins at the back.
    Fifo,
}

enum FreeSet {
    Low(BinaryHeap<Reverse<usize>>),
    High(BinaryHeap<usize>),
    Fifo(VecDeque<usize>),
}

impl FreeSet {
    fn new(schedule: Schedule, n: usize) -> Self {
        match schedule {
            Schedule::LowestIndexFirst => FreeSet::Low((0..n).map(Reverse).collect()),
            Schedule::HighestIndexFirst => FreeSet::High((0..n).collect()),
            Schedule::Fifo => FreeSet::Fifo((0..n).collect()),
        }
    }

    fn pop(&mut self) -> Option<usize> {
        match self {
            FreeSet::Low(h) => h.pop().map(|Reverse(m)| m),
            FreeSet::High(h) => h.pop(),
            FreeSet::Fifo(q) => q.pop_front(),
        }
    }

    fn push(&mut self, m: usize) {
        match self {
            FreeSet::Low(h) => h.push(Reverse(m)),
            FreeSet::High(h) => h.push(m),
            FreeSet::Fifo(q) => q.push_back(m),
        }
    }
}

/// Men-proposing deferred acceptance under an explicit proposal schedule.
///
/// A man proposes down his list; a woman holds the best acceptable proposal so far.
/// Men who exhaust their lists stay unmatched.
pub fn deferred_acceptance(profile: &PreferenceProfile, schedule: Schedule) -> Matching {
    let (num_men, num_women) = profile.shape();
    let mut next = vec![0usize; num_men];
    let mut held: alloc::vec::Vec<Option<usize>> = vec![None; num_women];
    let mut free = FreeSet::new(schedule, num_men);

    while let Some(m) = free.pop() {
        let list = profile.man_list(m);
        while next[m] < list.len() {
            let w = list[next[m]];
            next[m] += 1;
            let Some(rank) = profile.woman_rank(w, m) else {
                continue;
            };
            match held[w] {
                None => {
                    held[w] = Some(m);
                    break;
                }
                Some(current) => {
                    if rank < profile.woman_rank(w, current).expect("held man is acceptable") {
                        held[w] = Some(m);
                        free.push(current);
                        break;
                    }
                }
            }
        }
    }

    Matching::from_pairs(
        num_men,
        num_women,
        held.iter().enumerate().filter_map(|(w, m)| m.map(|m| (m, w))),
    )
    .expect("deferred acceptance yields a matching")
}

/// The man-optimal stable matching.
pub fn mpda(profile: &PreferenceProfile) -> Matching {
    deferred_acceptance(profile, Schedule::LowestIndexFirst)
}

/// The woman-optimal stable matching.
pub fn wpda(profile: &PreferenceProfile) -> Matching {
    deferred_acceptance(&profile.swapped(), Schedule::LowestIndexFirst).swapped()
}

/// A deterministic procedure selecting one matching per profile.
///
/// The exact engine and the harness are generic over this trait, so further
/// mechanisms can be compared against the deferred-acceptance pair.
pub trait MatchingProcedure: Sync {
    fn name(&self) -> &str;
    fn run(&self, profile: &PreferenceProfile) -> Matching;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Procedure {
    Mpda,
    Wpda,
}

impl Procedure {
    pub const BOTH: [Procedure; 2] = [Procedure::Mpda, Procedure::Wpda];
}

impl MatchingProcedure for Procedure {
    fn name(&self) -> &str {
        match self {
            Procedure::Mpda => "mpda",
            Procedure::Wpda => "wpda",
        }
    }

    fn run(&self, profile: &PreferenceProfile) -> Matching {
        match self {
            Procedure::Mpda => mpda(profile),
            Procedure::Wpda => wpda(profile),
        }
    }
}

impl core::str::FromStr for Procedure {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mpda" => Ok(Procedure::Mpda),
            "wpda" => Ok(Procedure::Wpda),
            other => Err(crate::Error::validation(alloc::format!("unknown procedure `{other}`"))),
        }
    }
}
