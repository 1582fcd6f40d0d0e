use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::agent::{AgentId, Side};
use crate::error::{Error, Result};

/// Text used for a matching with no pairs.
pub const EMPTY_MATCHING: &str = "empty";

/// A one-to-one matching between men and women; agents absent from all pairs are unmatched.
///
/// Ordering and equality follow the canonical pair list (pairs sorted by man index), so
/// the type can key tallies directly.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    wife: Vec<Option<usize>>,
    husband: Vec<Option<usize>>,
}

impl Matching {
    pub fn empty(num_men: usize, num_women: usize) -> Self {
        Matching {
            wife: vec![None; num_men],
            husband: vec![None; num_women],
        }
    }

    pub fn from_pairs(
        num_men: usize,
        num_women: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut matching = Matching::empty(num_men, num_women);
        for (m, w) in pairs {
            if m >= num_men || w >= num_women {
                return Err(Error::validation(format!(
                    "pair (m{}, w{}) out of range for a {num_men}x{num_women} market",
                    m + 1,
                    w + 1
                )));
            }
            if matching.wife[m].is_some() || matching.husband[w].is_some() {
                return Err(Error::validation(format!(
                    "pair (m{}, w{}) reuses a matched agent",
                    m + 1,
                    w + 1
                )));
            }
            matching.wife[m] = Some(w);
            matching.husband[w] = Some(m);
        }
        Ok(matching)
    }

    /// Builds a matching from a per-man wife vector.
    pub fn from_wives(num_women: usize, wives: &[Option<usize>]) -> Result<Self> {
        Matching::from_pairs(
            wives.len(),
            num_women,
            wives.iter().enumerate().filter_map(|(m, w)| w.map(|w| (m, w))),
        )
    }

    /// Parses the canonical text form (`m1-w2,m2-w1`, or `empty`).
    pub fn parse(num_men: usize, num_women: usize, text: &str) -> Result<Self> {
        let text = text.trim();
        if text == EMPTY_MATCHING || text.is_empty() {
            return Ok(Matching::empty(num_men, num_women));
        }
        let mut pairs = Vec::new();
        for item in text.split(',') {
            let (a, b) = item
                .split_once('-')
                .ok_or_else(|| Error::validation(format!("bad pair `{item}`")))?;
            let a: AgentId = a.parse()?;
            let b: AgentId = b.parse()?;
            match (a.side, b.side) {
                (Side::Man, Side::Woman) => pairs.push((a.index, b.index)),
                (Side::Woman, Side::Man) => pairs.push((b.index, a.index)),
                _ => return Err(Error::validation(format!("pair `{item}` is not man-woman"))),
            }
        }
        Matching::from_pairs(num_men, num_women, pairs)
    }

    pub fn num_men(&self) -> usize {
        self.wife.len()
    }

    pub fn num_women(&self) -> usize {
        self.husband.len()
    }

    #[inline]
    pub fn wife(&self, m: usize) -> Option<usize> {
        self.wife[m]
    }

    #[inline]
    pub fn husband(&self, w: usize) -> Option<usize> {
        self.husband[w]
    }

    pub fn wives(&self) -> &[Option<usize>] {
        &self.wife
    }

    pub fn husbands(&self) -> &[Option<usize>] {
        &self.husband
    }

    /// Partner of `agent`, as an index on the opposite side.
    #[inline]
    pub fn partner(&self, agent: AgentId) -> Option<usize> {
        match agent.side {
            Side::Man => self.wife[agent.index],
            Side::Woman => self.husband[agent.index],
        }
    }

    pub fn contains(&self, m: usize, w: usize) -> bool {
        self.wife.get(m).copied().flatten() == Some(w)
    }

    /// Pairs in canonical order (ascending man index).
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.wife.iter().enumerate().filter_map(|(m, w)| w.map(|w| (m, w)))
    }

    pub fn len(&self) -> usize {
        self.pairs().count()
    }

    pub fn is_empty(&self) -> bool {
        self.wife.iter().all(Option::is_none)
    }

    /// Every agent on both sides is matched.
    pub fn is_perfect(&self) -> bool {
        self.wife.iter().all(Option::is_some) && self.husband.iter().all(Option::is_some)
    }

    /// The same pairs with men and women exchanged.
    pub fn swapped(&self) -> Matching {
        Matching {
            wife: self.husband.clone(),
            husband: self.wife.clone(),
        }
    }
}

impl fmt::Display for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (m, w) in self.pairs() {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            write!(f, "m{}-w{}", m + 1, w + 1)?;
        }
        if first {
            f.write_str(EMPTY_MATCHING)?;
        }
        Ok(())
    }
}
