//! Exact output distributions and stability probabilities by weighted enumeration of
//! every preference profile a discrete model can produce.
//!
//! Each agent's list distribution is stored as integer numerators over a per-agent common
//! denominator, so a profile's weight is a product of integers over one fixed denominator
//! and every tally is an exact integer sum. Profiles are visited in mixed-radix order (men
//! first, then women, the last woman's list varying fastest) and any index range can be
//! processed on its own; tallies over disjoint ranges merge by addition.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::combinatorics::factorial;
use crate::error::{Error, Result};
use crate::market::stability::stable_permutation_unchecked;
use crate::market::{
    count_long_cycles, AgentId, AlternatingPermutation, Matching, MatchingProcedure, PreferenceProfile, Side,
};
use crate::prefdist::{list_distribution, PreferenceModel};
use crate::Rational;

pub const DEFAULT_MAX_PROFILES: u128 = 10_000_000;

/// Upper bound on the number of profiles an enumeration may visit. Larger spaces are
/// refused with [`Error::Capacity`], never truncated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub max_profiles: u128,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget {
            max_profiles: DEFAULT_MAX_PROFILES,
        }
    }
}

impl EnumerationBudget {
    pub fn new(max_profiles: u128) -> Self {
        EnumerationBudget { max_profiles }
    }

    fn check(&self, count: Option<u128>) -> Result<()> {
        match count {
            Some(c) if c <= self.max_profiles => Ok(()),
            _ => Err(Error::Capacity {
                what: "profile enumeration",
                required: count,
                cap: self.max_profiles,
            }),
        }
    }
}

/// Which optimal matching an inclusion-exclusion sum describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Optimality {
    /// Sum over `σ` with `σ|M = μ|M`; equals the probability that WPDA outputs `μ`.
    WomenOptimal,
    /// Sum over `σ` with `σ|W = μ|W`; equals the probability that MPDA outputs `μ`.
    MenOptimal,
}

impl Optimality {
    /// The side whose successors are pinned to `μ`.
    pub fn fixed_side(self) -> Side {
        match self {
            Optimality::WomenOptimal => Side::Man,
            Optimality::MenOptimal => Side::Woman,
        }
    }
}

#[derive(Debug, Clone)]
struct ListTable {
    agent: AgentId,
    lists: Vec<Vec<usize>>,
    numerators: Vec<BigUint>,
}

/// The support of a product distribution over profiles, with exact weights.
#[derive(Debug, Clone)]
pub struct ProfileSpace {
    num_men: usize,
    num_women: usize,
    tables: Vec<ListTable>,
    denominator: BigUint,
    count: u128,
}

fn to_biguint(x: &BigInt) -> BigUint {
    x.to_biguint().expect("non-negative")
}

impl ProfileSpace {
    /// Every profile of a discrete model (anti-popularity, vertical or incomplete uniform).
    pub fn new(model: &PreferenceModel, budget: EnumerationBudget) -> Result<Self> {
        if !model.is_discrete() {
            return Err(Error::Unsupported(format!(
                "exact enumeration needs a discrete model, got {}; use antipop with the same matrix",
                model.name()
            )));
        }
        let (num_men, num_women) = model.shape();
        let agents = agents(num_men, num_women);
        let count = agents.iter().try_fold(1u128, |acc, &a| {
            let k = model.candidates(a).len();
            if k > 33 {
                return None;
            }
            acc.checked_mul(factorial(k))
        });
        budget.check(count)?;
        let mut men = Vec::with_capacity(num_men);
        let mut women = Vec::with_capacity(num_women);
        for a in agents {
            let dist = list_distribution(model, a)?;
            match a.side {
                Side::Man => men.push(dist),
                Side::Woman => women.push(dist),
            }
        }
        Self::from_lists(num_men, num_women, men, women, budget)
    }

    /// A space built from explicit per-agent list distributions. Lists with probability
    /// zero are dropped; each agent's probabilities must sum to one.
    pub fn from_lists(
        num_men: usize,
        num_women: usize,
        men: Vec<Vec<(Vec<usize>, Rational)>>,
        women: Vec<Vec<(Vec<usize>, Rational)>>,
        budget: EnumerationBudget,
    ) -> Result<Self> {
        if men.len() != num_men || women.len() != num_women {
            return Err(Error::validation(format!(
                "expected {num_men} men's and {num_women} women's distributions, got {} and {}",
                men.len(),
                women.len()
            )));
        }
        let mut tables = Vec::with_capacity(num_men + num_women);
        let mut count = Some(1u128);
        let mut denominator = BigUint::one();
        for (agent, dist) in agents(num_men, num_women).into_iter().zip(men.into_iter().chain(women)) {
            let opposite = match agent.side {
                Side::Man => num_women,
                Side::Woman => num_men,
            };
            let dist: Vec<(Vec<usize>, Rational)> = dist.into_iter().filter(|(_, p)| !p.is_zero()).collect();
            let mut total = Rational::zero();
            for (list, p) in &dist {
                if p.numer().sign() == num_bigint::Sign::Minus {
                    return Err(Error::validation(format!("negative probability for {agent}")));
                }
                let mut seen = vec![false; opposite];
                for &j in list {
                    if j >= opposite || core::mem::replace(&mut seen[j], true) {
                        return Err(Error::validation(format!("invalid list for {agent}")));
                    }
                }
                total += p;
            }
            if total != Rational::one() {
                return Err(Error::validation(format!(
                    "list probabilities of {agent} sum to {total}, not 1"
                )));
            }
            let common = dist.iter().fold(BigInt::one(), |acc, (_, p)| acc.lcm(p.denom()));
            let numerators = dist
                .iter()
                .map(|(_, p)| to_biguint(&(p.numer() * (&common / p.denom()))))
                .collect();
            denominator *= to_biguint(&common);
            count = count.and_then(|c| c.checked_mul(dist.len() as u128));
            tables.push(ListTable {
                agent,
                lists: dist.into_iter().map(|(l, _)| l).collect(),
                numerators,
            });
        }
        budget.check(count)?;
        Ok(ProfileSpace {
            num_men,
            num_women,
            tables,
            denominator,
            count: count.unwrap(),
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.num_men, self.num_women)
    }

    /// Number of profiles with positive weight.
    pub fn len(&self) -> u128 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Whether every supported profile is complete and the market balanced.
    pub fn is_complete_balanced(&self) -> bool {
        self.num_men == self.num_women
            && self
                .tables
                .iter()
                .all(|t| t.lists.iter().all(|l| l.len() == self.num_men))
    }

    /// Splits `0..len()` into at most `parts` contiguous ranges of near-equal size.
    pub fn partition(&self, parts: usize) -> Vec<Range<u128>> {
        let parts = parts.max(1) as u128;
        let step = self.count.div_ceil(parts).max(1);
        let mut out = Vec::new();
        let mut start = 0;
        while start < self.count {
            let end = (start + step).min(self.count);
            out.push(start..end);
            start = end;
        }
        out
    }

    fn digits_of(&self, mut index: u128) -> Vec<usize> {
        let mut digits = vec![0; self.tables.len()];
        for (d, t) in digits.iter_mut().zip(&self.tables).rev() {
            let radix = t.lists.len() as u128;
            *d = (index % radix) as usize;
            index /= radix;
        }
        digits
    }

    fn profile_of(&self, digits: &[usize]) -> PreferenceProfile {
        let lists = |side: Side| -> Vec<Vec<usize>> {
            self.tables
                .iter()
                .zip(digits)
                .filter(|(t, _)| t.agent.side == side)
                .map(|(t, &d)| t.lists[d].clone())
                .collect()
        };
        PreferenceProfile::new(lists(Side::Man), lists(Side::Woman)).expect("tables hold valid lists")
    }

    /// Calls `visit(profile, numerator)` for every profile with index in `range`; the
    /// profile's probability is `numerator / denominator()`.
    pub fn visit(&self, range: Range<u128>, mut visit: impl FnMut(&PreferenceProfile, &BigUint)) {
        let end = range.end.min(self.count);
        let mut index = range.start;
        if index >= end {
            return;
        }
        let mut digits = self.digits_of(index);
        let mut profile = self.profile_of(&digits);
        let mut prefix = Vec::with_capacity(self.tables.len() + 1);
        prefix.push(BigUint::one());
        for (t, &d) in self.tables.iter().zip(&digits) {
            let next = prefix.last().unwrap() * &t.numerators[d];
            prefix.push(next);
        }
        loop {
            visit(&profile, prefix.last().unwrap());
            index += 1;
            if index == end {
                return;
            }
            let mut k = self.tables.len() - 1;
            loop {
                digits[k] += 1;
                if digits[k] < self.tables[k].lists.len() {
                    break;
                }
                digits[k] = 0;
                k -= 1;
            }
            for j in k..self.tables.len() {
                let t = &self.tables[j];
                profile
                    .set_list(t.agent, t.lists[digits[j]].clone())
                    .expect("tables hold valid lists");
                prefix[j + 1] = &prefix[j] * &t.numerators[digits[j]];
            }
        }
    }

    /// The common denominator of all profile weights.
    pub fn denominator(&self) -> &BigUint {
        &self.denominator
    }

    pub fn probability(&self, numerator: &BigUint) -> Rational {
        Rational::new(BigInt::from(numerator.clone()), BigInt::from(self.denominator.clone()))
    }

    /// Weighted tally of `procedure`'s outputs over the profiles in `range`.
    pub fn output_tally<P: MatchingProcedure + ?Sized>(&self, procedure: &P, range: Range<u128>) -> OutcomeTally {
        let mut tally = OutcomeTally::default();
        self.visit(range, |profile, weight| {
            let out = procedure.run(profile);
            match tally.weights.get_mut(&out) {
                Some(w) => *w += weight,
                None => {
                    tally.weights.insert(out, weight.clone());
                }
            }
        });
        tally
    }

    /// Exact distribution of `procedure`'s output.
    pub fn output_distribution<P: MatchingProcedure + ?Sized>(&self, procedure: &P) -> ExactDistribution {
        self.distribution(self.output_tally(procedure, 0..self.count))
    }

    pub fn distribution(&self, tally: OutcomeTally) -> ExactDistribution {
        ExactDistribution {
            entries: tally
                .weights
                .into_iter()
                .map(|(m, w)| {
                    let p = self.probability(&w);
                    (m, p)
                })
                .collect(),
        }
    }

    fn check_permutations(&self, sigmas: &[AlternatingPermutation]) -> Result<()> {
        if !self.is_complete_balanced() {
            return Err(Error::precondition(
                "stable permutations need a complete balanced market; reduce the market first",
            ));
        }
        if let Some(s) = sigmas.iter().find(|s| s.size() != self.num_men) {
            return Err(Error::validation(format!(
                "permutation on {} men does not fit a market with {}",
                s.size(),
                self.num_men
            )));
        }
        Ok(())
    }

    /// Per-permutation weight numerators of the profiles in `range` under which each
    /// permutation is stable.
    pub fn stability_tally(&self, sigmas: &[AlternatingPermutation], range: Range<u128>) -> Result<Vec<BigUint>> {
        self.check_permutations(sigmas)?;
        let preds: Vec<(Vec<usize>, Vec<usize>)> = sigmas.iter().map(|s| s.predecessors()).collect();
        let mut tally = vec![BigUint::zero(); sigmas.len()];
        self.visit(range, |profile, weight| {
            for ((sigma, (pm, pw)), t) in sigmas.iter().zip(&preds).zip(tally.iter_mut()) {
                if stable_permutation_unchecked(profile, sigma, pm, pw) {
                    *t += weight;
                }
            }
        });
        Ok(tally)
    }

    /// Exact stability probability of each permutation.
    pub fn permutation_stabilities(&self, sigmas: &[AlternatingPermutation]) -> Result<Vec<Rational>> {
        let tally = self.stability_tally(sigmas, 0..self.count)?;
        Ok(tally.iter().map(|t| self.probability(t)).collect())
    }

    /// Inclusion-exclusion over permutations agreeing with `mu` on the fixed side:
    /// `Σ (-1)^C(σ) · P[σ stable]`.
    pub fn optimal_probability(&self, mu: &Matching, side: Optimality) -> Result<Rational> {
        let sigmas = inclusion_exclusion_terms(mu, side)?;
        let stabilities = self.permutation_stabilities(&sigmas)?;
        Ok(signed_sum(&sigmas, stabilities))
    }
}

fn agents(num_men: usize, num_women: usize) -> Vec<AgentId> {
    (0..num_men)
        .map(AgentId::man)
        .chain((0..num_women).map(AgentId::woman))
        .collect()
}

/// The `N!` permutations of the inclusion-exclusion sum for `mu`, `mu` itself first.
pub fn inclusion_exclusion_terms(mu: &Matching, side: Optimality) -> Result<Vec<AlternatingPermutation>> {
    if !mu.is_perfect() {
        return Err(Error::validation(format!("{mu} is not a perfect matching")));
    }
    AlternatingPermutation::agreeing_with(mu, side.fixed_side())
}

fn signed_sum(sigmas: &[AlternatingPermutation], values: Vec<Rational>) -> Rational {
    sigmas.iter().zip(values).fold(Rational::zero(), |acc, (s, v)| {
        if count_long_cycles(s).is_multiple_of(2) {
            acc + v
        } else {
            acc - v
        }
    })
}

/// Unnormalized weights of matchings over part of a profile space.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OutcomeTally {
    weights: BTreeMap<Matching, BigUint>,
}

impl OutcomeTally {
    pub fn merge(&mut self, other: OutcomeTally) {
        for (m, w) in other.weights {
            *self.weights.entry(m).or_default() += w;
        }
    }
}

/// An exact output distribution: matchings with rational probabilities summing to one.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExactDistribution {
    entries: BTreeMap<Matching, Rational>,
}

impl ExactDistribution {
    /// A distribution from explicit entries; zero entries are dropped, duplicates rejected.
    pub fn from_entries(entries: impl IntoIterator<Item = (Matching, Rational)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (m, p) in entries {
            if p.is_zero() {
                continue;
            }
            if map.insert(m.clone(), p).is_some() {
                return Err(Error::validation(format!("matching {m} listed twice")));
            }
        }
        Ok(ExactDistribution { entries: map })
    }

    pub fn get(&self, matching: &Matching) -> Rational {
        self.entries.get(matching).cloned().unwrap_or_else(Rational::zero)
    }

    /// Entries in canonical matching order.
    pub fn iter(&self) -> impl Iterator<Item = (&Matching, &Rational)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> Rational {
        self.entries.values().sum()
    }
}

/// Sample counts of matchings.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EmpiricalDistribution {
    counts: BTreeMap<Matching, u64>,
    samples: u64,
}

impl EmpiricalDistribution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_counts(counts: impl IntoIterator<Item = (Matching, u64)>) -> Self {
        let mut out = Self::new();
        for (m, c) in counts {
            out.add(m, c);
        }
        out
    }

    pub fn record(&mut self, matching: Matching) {
        self.add(matching, 1);
    }

    pub fn add(&mut self, matching: Matching, count: u64) {
        if count > 0 {
            *self.counts.entry(matching).or_default() += count;
            self.samples += count;
        }
    }

    pub fn merge(&mut self, other: &EmpiricalDistribution) {
        for (m, &c) in &other.counts {
            self.add(m.clone(), c);
        }
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn count(&self, matching: &Matching) -> u64 {
        self.counts.get(matching).copied().unwrap_or(0)
    }

    pub fn frequency(&self, matching: &Matching) -> f64 {
        if self.samples == 0 {
            return 0.0;
        }
        self.count(matching) as f64 / self.samples as f64
    }

    /// Binomial standard error `sqrt(p(1-p)/n)` of the frequency of `matching`.
    pub fn standard_error(&self, matching: &Matching) -> f64 {
        binomial_standard_error(self.frequency(matching), self.samples)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Matching, u64)> {
        self.counts.iter().map(|(m, &c)| (m, c))
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

pub fn binomial_standard_error(p: f64, samples: u64) -> f64 {
    if samples == 0 {
        return 0.0;
    }
    libm::sqrt((p * (1.0 - p)).max(0.0) / samples as f64)
}

/// Either an exact distribution or a sampled estimate of one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OutputDistribution {
    Exact(ExactDistribution),
    Estimated(EmpiricalDistribution),
}

impl OutputDistribution {
    pub fn probability(&self, matching: &Matching) -> f64 {
        match self {
            OutputDistribution::Exact(d) => d.get(matching).to_f64().unwrap_or(f64::NAN),
            OutputDistribution::Estimated(d) => d.frequency(matching),
        }
    }

    /// Standard error of an entry; zero for exact distributions.
    pub fn standard_error(&self, matching: &Matching) -> f64 {
        match self {
            OutputDistribution::Exact(_) => 0.0,
            OutputDistribution::Estimated(d) => d.standard_error(matching),
        }
    }

    pub fn support(&self) -> Vec<Matching> {
        match self {
            OutputDistribution::Exact(d) => d.entries.keys().cloned().collect(),
            OutputDistribution::Estimated(d) => d.counts.keys().cloned().collect(),
        }
    }
}

/// Every supported profile of a discrete model with its exact probability.
pub struct Profiles {
    space: ProfileSpace,
    next: u128,
}

impl Iterator for Profiles {
    type Item = (PreferenceProfile, Rational);

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.space.count {
            return None;
        }
        let mut out = None;
        self.space.visit(self.next..self.next + 1, |p, w| {
            out = Some((p.clone(), self.space.probability(w)));
        });
        self.next += 1;
        out
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.space.count - self.next).min(usize::MAX as u128) as usize;
        (left, Some(left))
    }
}

pub fn enumerate_profiles(model: &PreferenceModel, budget: EnumerationBudget) -> Result<Profiles> {
    Ok(Profiles {
        space: ProfileSpace::new(model, budget)?,
        next: 0,
    })
}

pub fn exact_output_distribution<P: MatchingProcedure + ?Sized>(
    model: &PreferenceModel,
    procedure: &P,
    budget: EnumerationBudget,
) -> Result<ExactDistribution> {
    Ok(ProfileSpace::new(model, budget)?.output_distribution(procedure))
}

pub fn exact_permutation_stability(
    model: &PreferenceModel,
    sigma: &AlternatingPermutation,
    budget: EnumerationBudget,
) -> Result<Rational> {
    let space = ProfileSpace::new(model, budget)?;
    Ok(space.permutation_stabilities(core::slice::from_ref(sigma))?.remove(0))
}

pub fn exact_optimal_probability(
    model: &PreferenceModel,
    mu: &Matching,
    side: Optimality,
    budget: EnumerationBudget,
) -> Result<Rational> {
    ProfileSpace::new(model, budget)?.optimal_probability(mu, side)
}
