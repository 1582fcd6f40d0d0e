use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::agent::{AgentId, Side};
use super::matching::Matching;
use super::profile::PreferenceProfile;
use super::stability::is_stable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    WomenImproving,
    MenImproving,
}

/// A simple alternating cycle `x0 -> x1 -> ... -> x0` over men and women.
///
/// Stored rotated so the man with the smallest index comes first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rotation {
    cycle: Vec<AgentId>,
}

impl Rotation {
    pub fn new(cycle: Vec<AgentId>) -> Result<Self> {
        if cycle.len() < 4 || !cycle.len().is_multiple_of(2) {
            return Err(Error::validation(format!(
                "a rotation needs an even cycle of length >= 4, got {}",
                cycle.len()
            )));
        }
        for i in 0..cycle.len() {
            if cycle[i].side == cycle[(i + 1) % cycle.len()].side {
                return Err(Error::validation("rotation cycle does not alternate"));
            }
            if cycle[..i].contains(&cycle[i]) {
                return Err(Error::validation(format!("{} repeats in the rotation", cycle[i])));
            }
        }
        let start = (0..cycle.len())
            .filter(|&i| cycle[i].is_man())
            .min_by_key(|&i| cycle[i].index)
            .expect("alternating cycle contains a man");
        let mut cycle = cycle;
        cycle.rotate_left(start);
        Ok(Rotation { cycle })
    }

    pub fn cycle(&self) -> &[AgentId] {
        &self.cycle
    }

    pub fn contains(&self, agent: AgentId) -> bool {
        self.cycle.contains(&agent)
    }

    /// `r(x)`, or `None` if `x` is not on the cycle.
    pub fn successor(&self, agent: AgentId) -> Option<AgentId> {
        let i = self.cycle.iter().position(|&a| a == agent)?;
        Some(self.cycle[(i + 1) % self.cycle.len()])
    }

    /// `r⁻¹(x)`, or `None` if `x` is not on the cycle.
    pub fn predecessor(&self, agent: AgentId) -> Option<AgentId> {
        let i = self.cycle.iter().position(|&a| a == agent)?;
        Some(self.cycle[(i + self.cycle.len() - 1) % self.cycle.len()])
    }

    fn swap_sides(&self) -> Rotation {
        let cycle = self
            .cycle
            .iter()
            .map(|a| AgentId {
                side: a.side.opposite(),
                index: a.index,
            })
            .collect();
        Rotation::new(cycle).expect("swapping sides keeps a valid cycle")
    }
}

impl fmt::Display for Rotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, a) in self.cycle.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

/// Rotations exposed in a stable matching, pairwise disjoint.
///
/// Women-improving: `r(m) = μ(m)` and `r⁻¹(m)` is `m`'s favourite woman among those he
/// likes less than his wife and who prefer him to their husband. Men-improving is the
/// mirror image.
pub fn exposed_rotations(
    profile: &PreferenceProfile,
    matching: &Matching,
    direction: Direction,
) -> Result<Vec<Rotation>> {
    if !is_stable(profile, matching)? {
        return Err(Error::precondition("exposed rotations need a stable matching"));
    }
    Ok(match direction {
        Direction::WomenImproving => women_improving(profile, matching),
        Direction::MenImproving => women_improving(&profile.swapped(), &matching.swapped())
            .iter()
            .map(Rotation::swap_sides)
            .collect(),
    })
}

fn women_improving(profile: &PreferenceProfile, matching: &Matching) -> Vec<Rotation> {
    let num_men = profile.num_men();
    // next_man[m] = husband of s(m): the man preceding m on its rotation
    let next_man: Vec<Option<usize>> = (0..num_men)
        .map(|m| {
            let wife = matching.wife(m)?;
            let list = profile.man_list(m);
            let start = profile.man_rank(m, wife)? + 1;
            let s = list[start..].iter().copied().find(|&w| {
                profile.woman_rank(w, m).is_some() && profile.prefers(AgentId::woman(w), Some(m), matching.husband(w))
            })?;
            matching.husband(s)
        })
        .collect();

    // 0 = unvisited, 1 = on current path, 2 = done
    let mut state = vec![0u8; num_men];
    let mut rotations = Vec::new();
    for start in 0..num_men {
        let mut path = Vec::new();
        let mut cur = Some(start);
        while let Some(m) = cur {
            if state[m] != 0 {
                if state[m] == 1 {
                    let pos = path.iter().position(|&x| x == m).unwrap();
                    let men: Vec<usize> = path[pos..].iter().rev().copied().collect();
                    let cycle = men
                        .iter()
                        .flat_map(|&m| [AgentId::man(m), AgentId::woman(matching.wife(m).unwrap())])
                        .collect();
                    rotations.push(Rotation::new(cycle).expect("exposed cycle is a rotation"));
                }
                break;
            }
            state[m] = 1;
            path.push(m);
            cur = next_man[m];
        }
        for m in path {
            state[m] = 2;
        }
    }
    rotations.sort();
    rotations
}

/// Re-pairs the agents of an exposed rotation.
///
/// Women-improving: each man on the cycle moves to `r⁻¹(m)` and each woman to `r(w)`.
/// Men-improving: each man moves to `r(m)` and each woman to `r⁻¹(w)`.
pub fn eliminate_rotation(matching: &Matching, rotation: &Rotation, direction: Direction) -> Result<Matching> {
    let keeper = match direction {
        Direction::WomenImproving => Side::Man,
        Direction::MenImproving => Side::Woman,
    };
    for &a in rotation.cycle() {
        let bound = match a.side {
            Side::Man => matching.num_men(),
            Side::Woman => matching.num_women(),
        };
        if a.index >= bound {
            return Err(Error::validation(format!("{a} is outside the market")));
        }
        if a.side == keeper && matching.partner(a) != Some(rotation.successor(a).unwrap().index) {
            return Err(Error::precondition(format!(
                "rotation {rotation} is not exposed: {a} is not matched to its successor"
            )));
        }
    }
    let mut wives = matching.wives().to_vec();
    for &a in rotation.cycle() {
        if a.side == Side::Man {
            let new = match direction {
                Direction::WomenImproving => rotation.predecessor(a),
                Direction::MenImproving => rotation.successor(a),
            };
            wives[a.index] = Some(new.unwrap().index);
        }
    }
    Matching::from_wives(matching.num_women(), &wives)
}
