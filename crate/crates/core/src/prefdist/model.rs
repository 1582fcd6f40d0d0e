use alloc::format;
use alloc::vec::Vec;

use super::popularity::{check_positive, vertical_to_symmetric, PopularityMatrix};
use crate::error::{Error, Result};
use crate::market::{AgentId, BipartiteGraph, Side};
use crate::Rational;

/// A random preference-profile distribution. Agents draw their lists independently.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PreferenceModel {
    /// Lists built worst-first by sampling without replacement with weights `1/P`.
    SymmetricAntiPopularity(PopularityMatrix),
    /// Uniform `X`, `Y`; `w1 ≻_m w2` iff `X[m,w1]^P(m,w1) < X[m,w2]^P(m,w2)`, same for women with `Y`.
    SymmetricPower(PopularityMatrix),
    /// Independent exponential utilities with mean `P`, sorted by decreasing utility.
    ExponentialUtility(PopularityMatrix),
    /// Anti-popularity where women all see man `m` with weight `men[m]` and men all see
    /// woman `w` with weight `women[w]`.
    Vertical { men: Vec<Rational>, women: Vec<Rational> },
    /// Each agent ranks its graph neighbours uniformly; non-neighbours are unacceptable.
    IncompleteUniform(BipartiteGraph),
}

impl PreferenceModel {
    pub fn vertical(men: Vec<Rational>, women: Vec<Rational>) -> Result<Self> {
        check_positive(&men, "man")?;
        check_positive(&women, "woman")?;
        Ok(PreferenceModel::Vertical { men, women })
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            PreferenceModel::SymmetricAntiPopularity(p)
            | PreferenceModel::SymmetricPower(p)
            | PreferenceModel::ExponentialUtility(p) => p.shape(),
            PreferenceModel::Vertical { men, women } => (men.len(), women.len()),
            PreferenceModel::IncompleteUniform(g) => g.shape(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PreferenceModel::SymmetricAntiPopularity(_) => "antipop",
            PreferenceModel::SymmetricPower(_) => "power",
            PreferenceModel::ExponentialUtility(_) => "exputil",
            PreferenceModel::Vertical { .. } => "vertical",
            PreferenceModel::IncompleteUniform(_) => "graph-uniform",
        }
    }

    /// Whether list probabilities are available as exact rationals.
    pub fn is_discrete(&self) -> bool {
        matches!(
            self,
            PreferenceModel::SymmetricAntiPopularity(_)
                | PreferenceModel::Vertical { .. }
                | PreferenceModel::IncompleteUniform(_)
        )
    }

    /// Agents `agent` may rank, in ascending index order.
    pub fn candidates(&self, agent: AgentId) -> Vec<usize> {
        match self {
            PreferenceModel::IncompleteUniform(g) => g.neighbors(agent),
            _ => {
                let (num_men, num_women) = self.shape();
                match agent.side {
                    Side::Man => (0..num_women).collect(),
                    Side::Woman => (0..num_men).collect(),
                }
            }
        }
    }

    /// The popularity matrix inducing this model's list distribution, when one exists.
    pub fn popularity(&self) -> Result<PopularityMatrix> {
        match self {
            PreferenceModel::SymmetricAntiPopularity(p)
            | PreferenceModel::SymmetricPower(p)
            | PreferenceModel::ExponentialUtility(p) => Ok(p.clone()),
            PreferenceModel::Vertical { men, women } => vertical_to_symmetric(men, women),
            PreferenceModel::IncompleteUniform(_) => Err(Error::Unsupported(format!(
                "{} has no popularity matrix; use graph_to_popularity for an approximation",
                self.name()
            ))),
        }
    }
}
