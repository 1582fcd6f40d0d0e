use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::agent::{AgentId, Side};
use super::matching::Matching;
use crate::combinatorics::next_permutation;
use crate::error::{Error, Result};

/// A bijection on the agents of a balanced market sending men to women and women to men.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AlternatingPermutation {
    man_to: Vec<usize>,
    woman_to: Vec<usize>,
}

fn check_bijection(map: &[usize], what: &str) -> Result<()> {
    let mut seen = vec![false; map.len()];
    for &j in map {
        if j >= map.len() || seen[j] {
            return Err(Error::validation(format!("{what} is not a bijection")));
        }
        seen[j] = true;
    }
    Ok(())
}

impl AlternatingPermutation {
    /// `man_to[m]` is the woman after man `m`; `woman_to[w]` the man after woman `w`.
    pub fn new(man_to: Vec<usize>, woman_to: Vec<usize>) -> Result<Self> {
        if man_to.len() != woman_to.len() {
            return Err(Error::validation("an alternating permutation needs a balanced market"));
        }
        check_bijection(&man_to, "men -> women map")?;
        check_bijection(&woman_to, "women -> men map")?;
        Ok(AlternatingPermutation { man_to, woman_to })
    }

    /// A perfect matching viewed as a permutation made of 2-cycles.
    pub fn from_matching(matching: &Matching) -> Result<Self> {
        if !matching.is_perfect() || matching.num_men() != matching.num_women() {
            return Err(Error::validation(
                "only perfect matchings of balanced markets are permutations",
            ));
        }
        let man_to = matching.wives().iter().map(|w| w.unwrap()).collect();
        let woman_to = matching.husbands().iter().map(|m| m.unwrap()).collect();
        AlternatingPermutation::new(man_to, woman_to)
    }

    /// Parses `m1>w1,w1>m2,...`: every agent must appear exactly once on the left.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        let mut man_to = vec![usize::MAX; n];
        let mut woman_to = vec![usize::MAX; n];
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (a, b) = item
                .split_once('>')
                .ok_or_else(|| Error::validation(format!("bad arrow `{item}`")))?;
            let from: AgentId = a.parse()?;
            let to: AgentId = b.parse()?;
            if from.side == to.side {
                return Err(Error::validation(format!("arrow `{item}` does not alternate")));
            }
            if from.index >= n || to.index >= n {
                return Err(Error::validation(format!("arrow `{item}` out of range")));
            }
            let slot = match from.side {
                Side::Man => &mut man_to[from.index],
                Side::Woman => &mut woman_to[from.index],
            };
            if *slot != usize::MAX {
                return Err(Error::validation(format!("{from} has two successors")));
            }
            *slot = to.index;
        }
        if man_to.contains(&usize::MAX) || woman_to.contains(&usize::MAX) {
            return Err(Error::validation("every agent needs a successor"));
        }
        AlternatingPermutation::new(man_to, woman_to)
    }

    pub fn size(&self) -> usize {
        self.man_to.len()
    }

    pub fn man_successor(&self, m: usize) -> usize {
        self.man_to[m]
    }

    pub fn woman_successor(&self, w: usize) -> usize {
        self.woman_to[w]
    }

    pub fn successor(&self, agent: AgentId) -> AgentId {
        match agent.side {
            Side::Man => AgentId::woman(self.man_to[agent.index]),
            Side::Woman => AgentId::man(self.woman_to[agent.index]),
        }
    }

    pub fn inverse(&self) -> AlternatingPermutation {
        let n = self.size();
        let mut man_to = vec![0; n];
        let mut woman_to = vec![0; n];
        for (m, &w) in self.man_to.iter().enumerate() {
            woman_to[w] = m;
        }
        for (w, &m) in self.woman_to.iter().enumerate() {
            man_to[m] = w;
        }
        AlternatingPermutation { man_to, woman_to }
    }

    /// Predecessors of every man (a woman each) and every woman (a man each).
    pub fn predecessors(&self) -> (Vec<usize>, Vec<usize>) {
        let inv = self.inverse();
        (inv.man_to, inv.woman_to)
    }

    pub fn predecessor(&self, agent: AgentId) -> AgentId {
        match agent.side {
            Side::Man => AgentId::woman(self.woman_to.iter().position(|&m| m == agent.index).unwrap()),
            Side::Woman => AgentId::man(self.man_to.iter().position(|&w| w == agent.index).unwrap()),
        }
    }

    /// Cycle decomposition; each cycle starts at its smallest man.
    pub fn cycles(&self) -> Vec<Vec<AgentId>> {
        let mut seen = vec![false; self.size()];
        let mut cycles = Vec::new();
        for start in 0..self.size() {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut m = start;
            loop {
                seen[m] = true;
                let w = self.man_to[m];
                cycle.push(AgentId::man(m));
                cycle.push(AgentId::woman(w));
                m = self.woman_to[w];
                if m == start {
                    break;
                }
            }
            cycles.push(cycle);
        }
        cycles
    }

    /// The matching that agrees with this permutation on the men.
    pub fn men_matching(&self) -> Matching {
        Matching::from_pairs(self.size(), self.size(), self.man_to.iter().copied().enumerate()).expect("bijection")
    }

    /// The matching that agrees with this permutation on the women.
    pub fn women_matching(&self) -> Matching {
        Matching::from_pairs(
            self.size(),
            self.size(),
            self.woman_to.iter().enumerate().map(|(w, &m)| (m, w)),
        )
        .expect("bijection")
    }

    /// All permutations `σ` with `σ|M = μ|M` (women side) or `σ|W = μ|W` (men side).
    /// There are `N!` of them; the first is `μ` itself.
    pub fn agreeing_with(matching: &Matching, fixed: Side) -> Result<Vec<AlternatingPermutation>> {
        let base = AlternatingPermutation::from_matching(matching)?;
        let n = base.size();
        let mut free: Vec<usize> = (0..n).collect();
        let mut out = Vec::new();
        loop {
            let sigma = match fixed {
                Side::Man => AlternatingPermutation {
                    man_to: base.man_to.clone(),
                    woman_to: free.iter().map(|&k| base.woman_to[k]).collect(),
                },
                Side::Woman => AlternatingPermutation {
                    man_to: free.iter().map(|&k| base.man_to[k]).collect(),
                    woman_to: base.woman_to.clone(),
                },
            };
            out.push(sigma);
            if !next_permutation(&mut free) {
                break;
            }
        }
        Ok(out)
    }

    /// Every alternating permutation of an `n`×`n` market (`(n!)²` of them).
    pub fn all(n: usize) -> Vec<AlternatingPermutation> {
        let mut out = Vec::new();
        let mut men: Vec<usize> = (0..n).collect();
        loop {
            let mut women: Vec<usize> = (0..n).collect();
            loop {
                out.push(AlternatingPermutation {
                    man_to: men.clone(),
                    woman_to: women.clone(),
                });
                if !next_permutation(&mut women) {
                    break;
                }
            }
            if !next_permutation(&mut men) {
                break;
            }
        }
        out
    }
}

/// Number of cycles of length greater than 2.
pub fn count_long_cycles(sigma: &AlternatingPermutation) -> usize {
    sigma.cycles().iter().filter(|c| c.len() > 2).count()
}

impl fmt::Display for AlternatingPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for cycle in self.cycles() {
            for (i, &a) in cycle.iter().enumerate() {
                if !first {
                    f.write_str(",")?;
                }
                first = false;
                write!(f, "{a}>{}", cycle[(i + 1) % cycle.len()])?;
            }
        }
        Ok(())
    }
}
