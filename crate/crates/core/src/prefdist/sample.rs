//! Profile samplers for every preference model.

use alloc::vec::Vec;
use core::cmp::Ordering;

use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::Rng;

use super::model::PreferenceModel;
use super::stream::SeededStream;
use crate::market::{AgentId, PreferenceProfile, Side};

#[derive(Debug, Clone)]
enum ListRule {
    /// Worst-first sampling without replacement, proportional to these weights (`1/P`).
    AntiPopularity(Vec<f64>),
    /// Sort by `P·ln X` ascending (`X` uniform on (0, 1]).
    Power(Vec<f64>),
    /// Sort by `P·E` descending (`E` standard exponential).
    Exponential(Vec<f64>),
    /// Uniform shuffle of the listed candidates.
    Uniform(Vec<usize>),
}

/// A model compiled to floating-point tables for repeated sampling.
#[derive(Debug, Clone)]
pub struct ProfileSampler {
    men: Vec<ListRule>,
    women: Vec<ListRule>,
}

impl ProfileSampler {
    pub fn new(model: &PreferenceModel) -> Self {
        let (num_men, num_women) = model.shape();
        let rule = |agent: AgentId| -> ListRule {
            let opposite = match agent.side {
                Side::Man => num_women,
                Side::Woman => num_men,
            };
            let weights = |f: &dyn Fn(usize) -> f64| (0..opposite).map(f).collect::<Vec<f64>>();
            match model {
                PreferenceModel::SymmetricAntiPopularity(p) => {
                    ListRule::AntiPopularity(weights(&|j| p.between(agent, j).recip().to_f64().unwrap()))
                }
                PreferenceModel::SymmetricPower(p) => {
                    ListRule::Power(weights(&|j| p.between(agent, j).to_f64().unwrap()))
                }
                PreferenceModel::ExponentialUtility(p) => {
                    ListRule::Exponential(weights(&|j| p.between(agent, j).to_f64().unwrap()))
                }
                PreferenceModel::Vertical { men, women } => {
                    let seen = match agent.side {
                        Side::Man => women,
                        Side::Woman => men,
                    };
                    ListRule::AntiPopularity(weights(&|j| seen[j].recip().to_f64().unwrap()))
                }
                PreferenceModel::IncompleteUniform(g) => ListRule::Uniform(g.neighbors(agent)),
            }
        };
        ProfileSampler {
            men: (0..num_men).map(|m| rule(AgentId::man(m))).collect(),
            women: (0..num_women).map(|w| rule(AgentId::woman(w))).collect(),
        }
    }

    /// Draws one profile: men's lists in index order, then women's.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PreferenceProfile {
        let men = self.men.iter().map(|r| draw_list(r, rng)).collect();
        let women = self.women.iter().map(|r| draw_list(r, rng)).collect();
        PreferenceProfile::new(men, women).expect("sampled lists are valid")
    }
}

fn draw_list<R: Rng + ?Sized>(rule: &ListRule, rng: &mut R) -> Vec<usize> {
    match rule {
        ListRule::AntiPopularity(weights) => sample_without_replacement_worst_first(weights, rng),
        ListRule::Power(powers) => {
            let keys: Vec<f64> = powers
                .iter()
                .map(|&p| p * libm::log(1.0 - rng.random::<f64>()))
                .collect();
            sort_by_key_then_index(&keys, Ordering::Less)
        }
        ListRule::Exponential(means) => {
            let utilities: Vec<f64> = means
                .iter()
                .map(|&mean| -mean * libm::log(1.0 - rng.random::<f64>()))
                .collect();
            sort_by_key_then_index(&utilities, Ordering::Greater)
        }
        ListRule::Uniform(candidates) => {
            let mut list = candidates.clone();
            list.shuffle(rng);
            list
        }
    }
}

/// Builds a ranking from the end: the least preferred candidate is drawn first with
/// probability proportional to its weight, then the next among those left, and so on.
pub fn sample_without_replacement_worst_first<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Vec<usize> {
    let mut remaining: Vec<usize> = (0..weights.len()).collect();
    let mut list = alloc::vec![0; weights.len()];
    for pos in (0..weights.len()).rev() {
        let total: f64 = remaining.iter().map(|&j| weights[j]).sum();
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = remaining.len() - 1;
        for (i, &j) in remaining.iter().enumerate() {
            acc += weights[j];
            if target < acc {
                chosen = i;
                break;
            }
        }
        list[pos] = remaining.remove(chosen);
    }
    list
}

/// Indices ordered by key (`Less` = ascending, `Greater` = descending); exact ties go to
/// the lower index.
fn sort_by_key_then_index(keys: &[f64], first: Ordering) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| {
        let by_key = keys[a].partial_cmp(&keys[b]).unwrap_or(Ordering::Equal);
        let by_key = if first == Ordering::Greater {
            by_key.reverse()
        } else {
            by_key
        };
        by_key.then(a.cmp(&b))
    });
    order
}

/// One profile drawn from `model` using a fresh generator for `stream`.
pub fn sample_profile(model: &PreferenceModel, stream: &SeededStream) -> PreferenceProfile {
    ProfileSampler::new(model).sample(&mut stream.rng())
}
