//! Exact probabilities of lists and profiles under the discrete models.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use super::model::PreferenceModel;
use super::popularity::PopularityMatrix;
use crate::combinatorics::{factorial, orderings};
use crate::error::{Error, Result};
use crate::market::{AgentId, PreferenceProfile, Side};
use crate::Rational;

fn check_agent(shape: (usize, usize), agent: AgentId) -> Result<usize> {
    let (own, opposite) = match agent.side {
        Side::Man => (shape.0, shape.1),
        Side::Woman => (shape.1, shape.0),
    };
    if agent.index >= own {
        return Err(Error::validation(format!("agent {agent} out of range")));
    }
    Ok(opposite)
}

fn is_permutation_of_all(ranking: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    ranking.len() == n
        && ranking
            .iter()
            .all(|&j| j < n && !core::mem::replace(&mut seen[j], true))
}

/// Probability of a full ranking (best first) when the list is built worst-first by
/// sampling without replacement with weights `1/weight(j)`.
fn anti_popularity_probability<'a>(ranking: &[usize], weight: impl Fn(usize) -> &'a Rational) -> Rational {
    let inverse: Vec<Rational> = ranking.iter().map(|&j| weight(j).recip()).collect();
    let mut remaining: Rational = inverse.iter().sum();
    let mut prob = Rational::one();
    for inv in inverse.iter().rev() {
        prob *= inv / &remaining;
        remaining -= inv;
    }
    prob
}

/// Probability that `agent` draws exactly `ranking` (best first) under the symmetric
/// anti-popularity model of `matrix`.
pub fn list_probability(matrix: &PopularityMatrix, agent: AgentId, ranking: &[usize]) -> Result<Rational> {
    let opposite = check_agent(matrix.shape(), agent)?;
    if !is_permutation_of_all(ranking, opposite) {
        return Err(Error::validation(format!(
            "ranking of {agent} is not a permutation of its {opposite} candidates"
        )));
    }
    Ok(anti_popularity_probability(ranking, |j| matrix.between(agent, j)))
}

/// Same quantity under the vertical model, computed from the one-sided weights directly.
pub fn vertical_list_probability(
    men: &[Rational],
    women: &[Rational],
    agent: AgentId,
    ranking: &[usize],
) -> Result<Rational> {
    let opposite = check_agent((men.len(), women.len()), agent)?;
    if !is_permutation_of_all(ranking, opposite) {
        return Err(Error::validation(format!(
            "ranking of {agent} is not a permutation of its {opposite} candidates"
        )));
    }
    let weights = match agent.side {
        Side::Man => women,
        Side::Woman => men,
    };
    Ok(anti_popularity_probability(ranking, |j| &weights[j]))
}

/// Probability of `agent`'s list under a discrete model (zero if the model cannot produce it).
pub fn agent_list_probability(model: &PreferenceModel, agent: AgentId, ranking: &[usize]) -> Result<Rational> {
    let opposite = check_agent(model.shape(), agent)?;
    match model {
        PreferenceModel::SymmetricAntiPopularity(p) => {
            if is_permutation_of_all(ranking, opposite) {
                list_probability(p, agent, ranking)
            } else {
                Ok(Rational::zero())
            }
        }
        PreferenceModel::Vertical { men, women } => {
            if is_permutation_of_all(ranking, opposite) {
                vertical_list_probability(men, women, agent, ranking)
            } else {
                Ok(Rational::zero())
            }
        }
        PreferenceModel::IncompleteUniform(_) => {
            let mut sorted = ranking.to_vec();
            sorted.sort_unstable();
            if sorted == model.candidates(agent) {
                Ok(Rational::new(1.into(), factorial(ranking.len()).into()))
            } else {
                Ok(Rational::zero())
            }
        }
        PreferenceModel::SymmetricPower(_) | PreferenceModel::ExponentialUtility(_) => {
            Err(Error::Unsupported(format!(
                "exact probabilities are not defined for the {} sampler; \
                 use the equivalent antipop model with the same matrix",
                model.name()
            )))
        }
    }
}

/// Probability of drawing `profile`: the product of every agent's list probability.
pub fn profile_probability(model: &PreferenceModel, profile: &PreferenceProfile) -> Result<Rational> {
    if model.shape() != profile.shape() {
        return Err(Error::validation(format!(
            "profile shape {:?} does not match model shape {:?}",
            profile.shape(),
            model.shape()
        )));
    }
    let mut prob = Rational::one();
    for m in 0..profile.num_men() {
        prob *= agent_list_probability(model, AgentId::man(m), profile.man_list(m))?;
    }
    for w in 0..profile.num_women() {
        prob *= agent_list_probability(model, AgentId::woman(w), profile.woman_list(w))?;
    }
    Ok(prob)
}

/// Every list `agent` can draw under a discrete model, with its probability.
/// Lists come in lexicographic order of candidate positions.
pub fn list_distribution(model: &PreferenceModel, agent: AgentId) -> Result<Vec<(Vec<usize>, Rational)>> {
    if !model.is_discrete() {
        return Err(Error::Unsupported(format!(
            "the {} sampler has no discrete list distribution",
            model.name()
        )));
    }
    check_agent(model.shape(), agent)?;
    orderings(&model.candidates(agent))
        .into_iter()
        .map(|ranking| {
            let p = agent_list_probability(model, agent, &ranking)?;
            Ok((ranking, p))
        })
        .collect()
}

/// Probability that `chooser` ranks `a` above `b`: `P(a,chooser) / (P(a,chooser) + P(b,chooser))`.
pub fn pairwise_preference_probability(
    matrix: &PopularityMatrix,
    chooser: AgentId,
    a: AgentId,
    b: AgentId,
) -> Result<Rational> {
    let opposite = check_agent(matrix.shape(), chooser)?;
    for x in [a, b] {
        if x.side == chooser.side || x.index >= opposite {
            return Err(Error::validation(format!("{x} is not a candidate of {chooser}")));
        }
    }
    if a == b {
        return Err(Error::validation("pairwise comparison needs two distinct candidates"));
    }
    let pa = matrix.between(chooser, a.index);
    let pb = matrix.between(chooser, b.index);
    Ok(pa / (pa + pb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{example_graph, example_matrix, example_profile};
    use crate::rational;
    use alloc::vec;

    #[test]
    fn example_matrix_list_of_w1() {
        let p = example_matrix();
        // m2 > m1 > m3
        let got = list_probability(&p, AgentId::woman(0), &[1, 0, 2]).unwrap();
        assert_eq!(got, rational(50, 217));
        // the displayed factors: (1/3)/(31/30) * (1/2)/(7/10) * 1
        let oracle = (rational(1, 3) / rational(31, 30)) * (rational(1, 2) / rational(7, 10));
        assert_eq!(got, oracle);
    }

    #[test]
    fn single_candidate_and_uniform() {
        let p = PopularityMatrix::from_integers(&[&[4]]).unwrap();
        assert_eq!(list_probability(&p, AgentId::man(0), &[0]).unwrap(), rational(1, 1));
        let ones = PopularityMatrix::ones(4, 4);
        assert_eq!(
            list_probability(&ones, AgentId::man(2), &[3, 1, 0, 2]).unwrap(),
            rational(1, 24)
        );
    }

    #[test]
    fn bad_rankings_rejected() {
        let p = example_matrix();
        assert!(list_probability(&p, AgentId::woman(0), &[1, 0]).is_err());
        assert!(list_probability(&p, AgentId::woman(0), &[1, 1, 2]).is_err());
        assert!(list_probability(&p, AgentId::woman(3), &[0, 1, 2]).is_err());
    }

    #[test]
    fn list_probabilities_sum_to_one() {
        let p = example_matrix();
        for agent in [AgentId::man(0), AgentId::man(2), AgentId::woman(1)] {
            let total: Rational = list_distribution(&PreferenceModel::SymmetricAntiPopularity(p.clone()), agent)
                .unwrap()
                .into_iter()
                .map(|(_, q)| q)
                .sum();
            assert_eq!(total, rational(1, 1));
        }
    }

    #[test]
    fn example_profile_probability() {
        let model = PreferenceModel::IncompleteUniform(example_graph());
        assert_eq!(
            profile_probability(&model, &example_profile()).unwrap(),
            rational(1, 96)
        );
        // a list that strays outside the graph has probability zero
        let mut p = example_profile();
        p.set_list(AgentId::man(0), vec![1, 0, 2]).unwrap();
        assert_eq!(profile_probability(&model, &p).unwrap(), rational(0, 1));
    }

    #[test]
    fn uniform_two_by_two_profiles() {
        let model = PreferenceModel::SymmetricAntiPopularity(PopularityMatrix::ones(2, 2));
        let p = PreferenceProfile::new(vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![0, 1]]).unwrap();
        assert_eq!(profile_probability(&model, &p).unwrap(), rational(1, 16));
    }

    #[test]
    fn profile_probability_factorizes() {
        let matrix = example_matrix();
        let model = PreferenceModel::SymmetricAntiPopularity(matrix.clone());
        let p = crate::fixtures::four_cycle_profile();
        let mut product = rational(1, 1);
        for m in 0..3 {
            product *= list_probability(&matrix, AgentId::man(m), p.man_list(m)).unwrap();
        }
        for w in 0..3 {
            product *= list_probability(&matrix, AgentId::woman(w), p.woman_list(w)).unwrap();
        }
        assert_eq!(profile_probability(&model, &p).unwrap(), product);
    }

    #[test]
    fn continuous_models_are_unsupported() {
        let model = PreferenceModel::SymmetricPower(example_matrix());
        assert!(matches!(
            profile_probability(&model, &crate::fixtures::four_cycle_profile()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn vertical_matches_product_matrix() {
        let men = vec![rational(2, 1), rational(1, 3), rational(5, 2)];
        let women = vec![rational(1, 1), rational(7, 1), rational(3, 4)];
        let product = super::super::vertical_to_symmetric(&men, &women).unwrap();
        for ranking in orderings(&[0, 1, 2]) {
            for agent in [AgentId::man(1), AgentId::woman(2)] {
                assert_eq!(
                    vertical_list_probability(&men, &women, agent, &ranking).unwrap(),
                    list_probability(&product, agent, &ranking).unwrap()
                );
            }
        }
    }

    #[test]
    fn pairwise_example_matrix() {
        let p = example_matrix();
        assert_eq!(
            pairwise_preference_probability(&p, AgentId::woman(0), AgentId::man(0), AgentId::man(1)).unwrap(),
            rational(2, 7)
        );
        let ones = PopularityMatrix::ones(2, 2);
        assert_eq!(
            pairwise_preference_probability(&ones, AgentId::man(0), AgentId::woman(0), AgentId::woman(1)).unwrap(),
            rational(1, 2)
        );
        assert!(pairwise_preference_probability(&p, AgentId::woman(0), AgentId::man(0), AgentId::man(0)).is_err());
        assert!(pairwise_preference_probability(&p, AgentId::woman(0), AgentId::woman(1), AgentId::man(0)).is_err());
    }
}
