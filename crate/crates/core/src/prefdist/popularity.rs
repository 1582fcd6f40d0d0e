use alloc::format;
use alloc::vec::Vec;

use num_traits::{One, Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::market::{AgentId, BipartiteGraph, PreferenceProfile, Side};
use crate::Rational;

/// Strictly positive weights `P(m, w)`: the popularity `m` and `w` attribute to each other.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PopularityMatrix {
    num_men: usize,
    num_women: usize,
    entries: Vec<Rational>,
}

impl PopularityMatrix {
    /// Builds a matrix from rows indexed by man.
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let num_men = rows.len();
        let num_women = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(num_men * num_women);
        for (m, row) in rows.into_iter().enumerate() {
            if row.len() != num_women {
                return Err(Error::validation(format!(
                    "row {} has {} entries, expected {num_women}",
                    m + 1,
                    row.len()
                )));
            }
            for (w, p) in row.into_iter().enumerate() {
                if !p.is_positive() {
                    return Err(Error::validation(format!(
                        "P(m{}, w{}) = {p} is not strictly positive",
                        m + 1,
                        w + 1
                    )));
                }
                entries.push(p);
            }
        }
        Ok(PopularityMatrix {
            num_men,
            num_women,
            entries,
        })
    }

    pub fn from_integers(rows: &[&[i64]]) -> Result<Self> {
        PopularityMatrix::new(
            rows.iter()
                .map(|row| row.iter().map(|&x| Rational::from_integer(x.into())).collect())
                .collect(),
        )
    }

    /// The uniform model: every entry equal to one.
    pub fn ones(num_men: usize, num_women: usize) -> Self {
        PopularityMatrix {
            num_men,
            num_women,
            entries: (0..num_men * num_women).map(|_| Rational::one()).collect(),
        }
    }

    pub fn num_men(&self) -> usize {
        self.num_men
    }

    pub fn num_women(&self) -> usize {
        self.num_women
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.num_men, self.num_women)
    }

    #[inline]
    pub fn get(&self, m: usize, w: usize) -> &Rational {
        &self.entries[m * self.num_women + w]
    }

    pub fn get_f64(&self, m: usize, w: usize) -> f64 {
        self.get(m, w).to_f64().expect("finite popularity")
    }

    /// `P` between `agent` and opposite-side agent `other`.
    pub fn between(&self, agent: AgentId, other: usize) -> &Rational {
        match agent.side {
            Side::Man => self.get(agent.index, other),
            Side::Woman => self.get(other, agent.index),
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Rational]> {
        self.entries.chunks(self.num_women.max(1)).take(self.num_men)
    }

    pub fn scaled(&self, factor: &Rational) -> Result<Self> {
        if !factor.is_positive() {
            return Err(Error::validation("scale factor must be positive"));
        }
        Ok(PopularityMatrix {
            num_men: self.num_men,
            num_women: self.num_women,
            entries: self.entries.iter().map(|p| p * factor).collect(),
        })
    }
}

/// `P(m, w) = P_M(m) · P_W(w)`: the symmetric matrix inducing the vertical model.
pub fn vertical_to_symmetric(men: &[Rational], women: &[Rational]) -> Result<PopularityMatrix> {
    check_positive(men, "man")?;
    check_positive(women, "woman")?;
    Ok(PopularityMatrix {
        num_men: men.len(),
        num_women: women.len(),
        entries: men.iter().flat_map(|pm| women.iter().map(move |pw| pm * pw)).collect(),
    })
}

pub(crate) fn check_positive(weights: &[Rational], who: &str) -> Result<()> {
    match weights.iter().position(|p| !p.is_positive()) {
        Some(i) => Err(Error::validation(format!(
            "weight of {who} {} is not strictly positive",
            i + 1
        ))),
        None => Ok(()),
    }
}

/// `P_ε = ε + (1 − ε)·1_E`: one on edges, `ε` elsewhere.
pub fn graph_to_popularity(graph: &BipartiteGraph, epsilon: &Rational) -> Result<PopularityMatrix> {
    if !epsilon.is_positive() || *epsilon > Rational::one() {
        return Err(Error::validation(format!("epsilon {epsilon} is outside (0, 1]")));
    }
    let (num_men, num_women) = graph.shape();
    Ok(PopularityMatrix {
        num_men,
        num_women,
        entries: (0..num_men)
            .flat_map(|m| (0..num_women).map(move |w| (m, w)))
            .map(|(m, w)| {
                if graph.contains(m, w) {
                    Rational::one()
                } else {
                    epsilon.clone()
                }
            })
            .collect(),
    })
}

/// Event `OK_ε`: in every list, every graph neighbour precedes every non-neighbour.
pub fn edges_first(graph: &BipartiteGraph, profile: &PreferenceProfile) -> bool {
    let check = |agent: AgentId, list: &[usize]| {
        let is_edge = |j: usize| match agent.side {
            Side::Man => graph.contains(agent.index, j),
            Side::Woman => graph.contains(j, agent.index),
        };
        let mut seen_non_edge = false;
        for &j in list {
            if is_edge(j) {
                if seen_non_edge {
                    return false;
                }
            } else {
                seen_non_edge = true;
            }
        }
        true
    };
    (0..profile.num_men()).all(|m| check(AgentId::man(m), profile.man_list(m)))
        && (0..profile.num_women()).all(|w| check(AgentId::woman(w), profile.woman_list(w)))
}

/// Union bound `1 − ε·N³` on the probability of `OK_ε`, `N = max(M, W)`; may be negative.
pub fn edges_first_lower_bound(graph: &BipartiteGraph, epsilon: f64) -> f64 {
    let n = graph.num_men().max(graph.num_women()) as f64;
    1.0 - epsilon * n * n * n
}
