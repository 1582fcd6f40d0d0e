use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::agent::{AgentId, Side};
use crate::error::{Error, Result};

const UNRANKED: u32 = u32::MAX;

/// Strict preference lists for both sides of a two-sided market.
///
/// A list may omit opposite-side agents; omitted agents are unacceptable to the owner.
/// Rank tables are kept alongside the lists so preference queries are O(1).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PreferenceProfile {
    men: Vec<Vec<usize>>,
    women: Vec<Vec<usize>>,
    men_rank: Vec<u32>,
    women_rank: Vec<u32>,
}

impl PreferenceProfile {
    /// Builds a profile for a market with `men.len()` men and `women.len()` women.
    pub fn new(men: Vec<Vec<usize>>, women: Vec<Vec<usize>>) -> Result<Self> {
        let (num_men, num_women) = (men.len(), women.len());
        let mut profile = PreferenceProfile {
            men_rank: vec![UNRANKED; num_men * num_women],
            women_rank: vec![UNRANKED; num_men * num_women],
            men: vec![Vec::new(); num_men],
            women: vec![Vec::new(); num_women],
        };
        for (m, list) in men.into_iter().enumerate() {
            profile.set_list(AgentId::man(m), list)?;
        }
        for (w, list) in women.into_iter().enumerate() {
            profile.set_list(AgentId::woman(w), list)?;
        }
        Ok(profile)
    }

    /// Every agent ranks every opposite-side agent in ascending index order.
    pub fn ascending(num_men: usize, num_women: usize) -> Self {
        let men = vec![(0..num_women).collect(); num_men];
        let women = vec![(0..num_men).collect(); num_women];
        PreferenceProfile::new(men, women).expect("ascending lists are valid")
    }

    /// Replaces one agent's list, validating it.
    pub fn set_list(&mut self, agent: AgentId, list: Vec<usize>) -> Result<()> {
        let opposite = self.len(agent.side.opposite());
        if agent.index >= self.len(agent.side) {
            return Err(Error::validation(format!("agent {agent} out of range")));
        }
        let mut seen = vec![false; opposite];
        for &j in &list {
            if j >= opposite {
                return Err(Error::validation(format!(
                    "list of {agent} names {}{} which is out of range",
                    agent.side.opposite().prefix(),
                    j + 1
                )));
            }
            if seen[j] {
                return Err(Error::validation(format!(
                    "list of {agent} repeats {}{}",
                    agent.side.opposite().prefix(),
                    j + 1
                )));
            }
            seen[j] = true;
        }
        let (ranks, lists) = match agent.side {
            Side::Man => (&mut self.men_rank, &mut self.men),
            Side::Woman => (&mut self.women_rank, &mut self.women),
        };
        let row = &mut ranks[agent.index * opposite..(agent.index + 1) * opposite];
        row.fill(UNRANKED);
        for (r, &j) in list.iter().enumerate() {
            row[j] = r as u32;
        }
        lists[agent.index] = list;
        Ok(())
    }

    pub fn num_men(&self) -> usize {
        self.men.len()
    }

    pub fn num_women(&self) -> usize {
        self.women.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.num_men(), self.num_women())
    }

    pub fn len(&self, side: Side) -> usize {
        match side {
            Side::Man => self.num_men(),
            Side::Woman => self.num_women(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.men.is_empty() && self.women.is_empty()
    }

    pub fn man_list(&self, m: usize) -> &[usize] {
        &self.men[m]
    }

    pub fn woman_list(&self, w: usize) -> &[usize] {
        &self.women[w]
    }

    pub fn list(&self, agent: AgentId) -> &[usize] {
        match agent.side {
            Side::Man => &self.men[agent.index],
            Side::Woman => &self.women[agent.index],
        }
    }

    pub fn men_lists(&self) -> &[Vec<usize>] {
        &self.men
    }

    pub fn women_lists(&self) -> &[Vec<usize>] {
        &self.women
    }

    /// Position of woman `w` in man `m`'s list (0 = favourite), `None` if unacceptable.
    #[inline]
    pub fn man_rank(&self, m: usize, w: usize) -> Option<usize> {
        let r = self.men_rank[m * self.num_women() + w];
        (r != UNRANKED).then_some(r as usize)
    }

    /// Position of man `m` in woman `w`'s list (0 = favourite), `None` if unacceptable.
    #[inline]
    pub fn woman_rank(&self, w: usize, m: usize) -> Option<usize> {
        let r = self.women_rank[w * self.num_men() + m];
        (r != UNRANKED).then_some(r as usize)
    }

    /// Rank of opposite-side agent `other` in `agent`'s list.
    #[inline]
    pub fn rank(&self, agent: AgentId, other: usize) -> Option<usize> {
        match agent.side {
            Side::Man => self.man_rank(agent.index, other),
            Side::Woman => self.woman_rank(agent.index, other),
        }
    }

    /// Whether `agent` strictly prefers `a` to `b`, where `None` means being unmatched.
    /// Unacceptable partners rank below being unmatched.
    pub fn prefers(&self, agent: AgentId, a: Option<usize>, b: Option<usize>) -> bool {
        self.key(agent, a) < self.key(agent, b)
    }

    // Lower key is better: acceptable partners by rank, then unmatched, then unacceptable.
    #[inline]
    fn key(&self, agent: AgentId, partner: Option<usize>) -> u64 {
        match partner {
            None => u64::from(UNRANKED),
            Some(j) => match self.rank(agent, j) {
                Some(r) => r as u64,
                None => u64::from(UNRANKED) + 1,
            },
        }
    }

    pub fn is_acceptable(&self, m: usize, w: usize) -> bool {
        self.man_rank(m, w).is_some()
    }

    pub fn mutually_acceptable(&self, m: usize, w: usize) -> bool {
        self.man_rank(m, w).is_some() && self.woman_rank(w, m).is_some()
    }

    /// Every list contains every opposite-side agent.
    pub fn is_complete(&self) -> bool {
        self.men.iter().all(|l| l.len() == self.num_women()) && self.women.iter().all(|l| l.len() == self.num_men())
    }

    pub fn is_balanced(&self) -> bool {
        self.num_men() == self.num_women()
    }

    /// `w` is in `m`'s list exactly when `m` is in `w`'s list.
    pub fn is_symmetric_acceptable(&self) -> bool {
        (0..self.num_men())
            .all(|m| (0..self.num_women()).all(|w| self.man_rank(m, w).is_some() == self.woman_rank(w, m).is_some()))
    }

    /// The same market with the roles of men and women exchanged.
    pub fn swapped(&self) -> PreferenceProfile {
        PreferenceProfile::new(self.women.clone(), self.men.clone()).expect("swapping a valid profile stays valid")
    }
}
