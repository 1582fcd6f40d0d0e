use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::agent::{AgentId, Side};
use super::matching::Matching;
use crate::error::{Error, Result};

/// Bipartite graph between men and women; an edge marks a mutually acceptable pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BipartiteGraph {
    num_men: usize,
    num_women: usize,
    adjacent: Vec<bool>,
}

impl BipartiteGraph {
    pub fn new(num_men: usize, num_women: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut graph = BipartiteGraph::empty(num_men, num_women);
        for (m, w) in edges {
            if m >= num_men || w >= num_women {
                return Err(Error::validation(format!("edge (m{}, w{}) out of range", m + 1, w + 1)));
            }
            let slot = &mut graph.adjacent[m * num_women + w];
            if *slot {
                return Err(Error::validation(format!("duplicate edge (m{}, w{})", m + 1, w + 1)));
            }
            *slot = true;
        }
        Ok(graph)
    }

    pub fn empty(num_men: usize, num_women: usize) -> Self {
        BipartiteGraph {
            num_men,
            num_women,
            adjacent: vec![false; num_men * num_women],
        }
    }

    pub fn complete(num_men: usize, num_women: usize) -> Self {
        BipartiteGraph {
            num_men,
            num_women,
            adjacent: vec![true; num_men * num_women],
        }
    }

    /// Graph whose edge set is encoded by the low `num_men * num_women` bits of `mask`,
    /// bit `m * num_women + w` standing for edge `(m, w)`.
    pub fn from_mask(num_men: usize, num_women: usize, mask: u64) -> Self {
        BipartiteGraph {
            num_men,
            num_women,
            adjacent: (0..num_men * num_women).map(|i| mask >> i & 1 == 1).collect(),
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
    pub fn contains(&self, m: usize, w: usize) -> bool {
        m < self.num_men && w < self.num_women && self.adjacent[m * self.num_women + w]
    }

    /// Neighbours of `agent` in ascending index order.
    pub fn neighbors(&self, agent: AgentId) -> Vec<usize> {
        match agent.side {
            Side::Man => (0..self.num_women).filter(|&w| self.contains(agent.index, w)).collect(),
            Side::Woman => (0..self.num_men).filter(|&m| self.contains(m, agent.index)).collect(),
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_men).flat_map(move |m| {
            (0..self.num_women)
                .filter(move |&w| self.contains(m, w))
                .map(move |w| (m, w))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.adjacent.iter().filter(|&&e| e).count()
    }

    pub fn is_complete(&self) -> bool {
        self.adjacent.iter().all(|&e| e)
    }

    /// Drops pairs that are not edges (and pairs involving agents outside the graph),
    /// giving a matching of the graph's shape.
    pub fn restrict(&self, matching: &Matching) -> Matching {
        Matching::from_pairs(
            self.num_men,
            self.num_women,
            matching.pairs().filter(|&(m, w)| self.contains(m, w)),
        )
        .expect("restriction of a matching is a matching")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_edges_rejected() {
        assert!(BipartiteGraph::new(2, 2, [(0, 0), (0, 0)]).is_err());
        assert!(BipartiteGraph::new(2, 2, [(2, 0)]).is_err());
    }

    #[test]
    fn masks_cover_all_graphs() {
        let g = BipartiteGraph::from_mask(2, 2, 0b1001);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 0), (1, 1)]);
        assert!(BipartiteGraph::from_mask(2, 2, 0b1111).is_complete());
        assert_eq!(g.neighbors(AgentId::woman(1)), vec![1]);
    }

    #[test]
    fn restrict_drops_non_edges() {
        let g = BipartiteGraph::new(2, 1, [(0, 0)]).unwrap();
        let mu = Matching::from_pairs(2, 2, [(1, 0), (0, 1)]).unwrap();
        assert!(g.restrict(&mu).is_empty());
        let mu = Matching::from_pairs(3, 2, [(0, 0), (2, 1)]).unwrap();
        assert_eq!(g.restrict(&mu), Matching::from_pairs(2, 1, [(0, 0)]).unwrap());
    }
}
