//! The permutation-stability integral and the inclusion-exclusion formula for optimal
//! matchings, evaluated by plain Monte Carlo or, for small markets, exactly.
//!
//! Conditioned on `x_m` (man `m`'s draw for his predecessor) and `y_w` (woman `w`'s draw
//! for her predecessor), a permutation `σ` is stable with probability
//!
//! ```text
//!   ∏_{σ(m)=w, σ(w)≠m} x_m^a  ·  ∏_{σ(m)≠w, σ(w)=m} y_w^b  ·  ∏_{σ(m)≠w, σ(w)≠m} (1 - x_m^a y_w^b)
//!   a = P(m, σ⁻¹(m)) / P(m, w),   b = P(σ⁻¹(w), w) / P(m, w)
//! ```
//!
//! and the unconditional probability is its integral over the unit cube.

use alloc::format;
use alloc::vec::Vec;

use num_traits::{One, ToPrimitive};
use rand::Rng;

use crate::combinatorics::factorial;
use crate::error::{Error, Result};
use crate::exact::{inclusion_exclusion_terms, EnumerationBudget, Optimality, ProfileSpace};
use crate::market::{count_long_cycles, AlternatingPermutation, Matching};
use crate::prefdist::{PopularityMatrix, PreferenceModel, SeededStream};
use crate::Rational;

/// Largest market (men per side) the inclusion-exclusion sum accepts by default.
pub const DEFAULT_IE_MAX_SIZE: usize = 6;

/// A Monte Carlo estimate. The mean is reported raw, never clamped to [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub standard_error: f64,
    pub samples: u64,
}

impl Estimate {
    /// `(self - other) / sqrt(se₁² + se₂²)`; zero when both estimates agree exactly.
    pub fn z_score(&self, other: &Estimate) -> f64 {
        let diff = self.mean - other.mean;
        if diff == 0.0 {
            return 0.0;
        }
        diff / libm::sqrt(self.standard_error * self.standard_error + other.standard_error * other.standard_error)
    }

    /// Whether `target` lies within `k` standard errors of the mean.
    pub fn covers(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.standard_error
    }
}

/// Running `(sum, sum of squares, count)`; partial results merge by addition.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub sum: f64,
    pub sum_squares: f64,
    pub count: u64,
}

impl Moments {
    pub fn push(&mut self, value: f64) {
        self.sum += value;
        self.sum_squares += value * value;
        self.count += 1;
    }

    pub fn merge(&mut self, other: &Moments) {
        self.sum += other.sum;
        self.sum_squares += other.sum_squares;
        self.count += other.count;
    }

    /// Mean and `sd / sqrt(n)` with the unbiased sample variance.
    pub fn estimate(&self) -> Estimate {
        let n = self.count as f64;
        let mean = if self.count == 0 { f64::NAN } else { self.sum / n };
        let variance = if self.count < 2 {
            0.0
        } else {
            ((self.sum_squares - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
        };
        Estimate {
            mean,
            standard_error: libm::sqrt(variance / n),
            samples: self.count,
        }
    }
}

/// A point of the unit cube: one coordinate per man and one per woman.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl IntegrationPoint {
    pub fn uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let x = (0..n).map(|_| rng.random::<f64>()).collect();
        let y = (0..n).map(|_| rng.random::<f64>()).collect();
        IntegrationPoint { x, y }
    }
}

/// One factor of the integrand, with its exact exponents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Factor {
    /// `x_m^a` for `w = σ(m)` on a long cycle.
    Man { man: usize, exponent: Rational },
    /// `y_w^b` for `m = σ(w)` on a long cycle.
    Woman { woman: usize, exponent: Rational },
    /// `1 - x_m^a y_w^b` for a pair linked in neither direction.
    Pair {
        man: usize,
        woman: usize,
        x_exponent: Rational,
        y_exponent: Rational,
    },
}

/// The factors of the integrand of `sigma` under `matrix`, pair by pair in `(m, w)` order.
pub fn integrand_factors(matrix: &PopularityMatrix, sigma: &AlternatingPermutation) -> Result<Vec<Factor>> {
    let n = sigma.size();
    if matrix.shape() != (n, n) {
        return Err(Error::validation(format!(
            "matrix shape {:?} does not fit a permutation on {n}+{n} agents",
            matrix.shape()
        )));
    }
    let (pred_of_man, pred_of_woman) = sigma.predecessors();
    let mut factors = Vec::new();
    for m in 0..n {
        for w in 0..n {
            let forward = sigma.man_successor(m) == w;
            let backward = sigma.woman_successor(w) == m;
            let p = matrix.get(m, w);
            let a = || matrix.get(m, pred_of_man[m]) / p;
            let b = || matrix.get(pred_of_woman[w], w) / p;
            match (forward, backward) {
                (true, true) => {}
                (true, false) => factors.push(Factor::Man { man: m, exponent: a() }),
                (false, true) => factors.push(Factor::Woman {
                    woman: w,
                    exponent: b(),
                }),
                (false, false) => factors.push(Factor::Pair {
                    man: m,
                    woman: w,
                    x_exponent: a(),
                    y_exponent: b(),
                }),
            }
        }
    }
    Ok(factors)
}

#[derive(Debug, Clone, Copy)]
enum PlanFactor {
    Man(usize, f64),
    Woman(usize, f64),
    Pair(usize, f64, usize, f64),
}

/// The integrand compiled to floating point for repeated evaluation.
#[derive(Debug, Clone)]
pub struct IntegrandPlan {
    size: usize,
    factors: Vec<PlanFactor>,
}

/// `x^a` for `a > 0`, through logarithms; `0^a = 0`.
fn power_from_log(log_x: f64, a: f64) -> f64 {
    libm::exp(a * log_x)
}

impl IntegrandPlan {
    pub fn new(matrix: &PopularityMatrix, sigma: &AlternatingPermutation) -> Result<Self> {
        let to_f64 = |r: &Rational| r.to_f64().expect("finite exponent");
        let factors = integrand_factors(matrix, sigma)?
            .iter()
            .map(|f| match f {
                Factor::Man { man, exponent } => PlanFactor::Man(*man, to_f64(exponent)),
                Factor::Woman { woman, exponent } => PlanFactor::Woman(*woman, to_f64(exponent)),
                Factor::Pair {
                    man,
                    woman,
                    x_exponent,
                    y_exponent,
                } => PlanFactor::Pair(*man, to_f64(x_exponent), *woman, to_f64(y_exponent)),
            })
            .collect();
        Ok(IntegrandPlan {
            size: sigma.size(),
            factors,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn evaluate(&self, point: &IntegrationPoint) -> f64 {
        let log_x: Vec<f64> = point.x.iter().map(|&v| libm::log(v)).collect();
        let log_y: Vec<f64> = point.y.iter().map(|&v| libm::log(v)).collect();
        self.evaluate_logs(&log_x, &log_y)
    }

    /// Evaluation from `ln x` and `ln y` (with `ln 0 = -inf`, which yields `0^a = 0`).
    fn evaluate_logs(&self, log_x: &[f64], log_y: &[f64]) -> f64 {
        let mut value = 1.0;
        for f in &self.factors {
            value *= match *f {
                PlanFactor::Man(m, a) => power_from_log(log_x[m], a),
                PlanFactor::Woman(w, b) => power_from_log(log_y[w], b),
                PlanFactor::Pair(m, a, w, b) => 1.0 - libm::exp(a * log_x[m] + b * log_y[w]),
            };
            if value == 0.0 {
                break;
            }
        }
        value
    }

    /// Accumulates `samples` integrand values at uniform points drawn from `rng`.
    pub fn sample_moments<R: Rng + ?Sized>(&self, samples: u64, rng: &mut R) -> Moments {
        let n = self.size;
        let mut moments = Moments::default();
        let mut log_x = alloc::vec![0.0; n];
        let mut log_y = alloc::vec![0.0; n];
        for _ in 0..samples {
            for v in log_x.iter_mut().chain(log_y.iter_mut()) {
                *v = libm::log(rng.random::<f64>());
            }
            moments.push(self.evaluate_logs(&log_x, &log_y));
        }
        moments
    }
}

/// The integrand of `sigma` under `matrix` at `point`.
pub fn integrand(matrix: &PopularityMatrix, sigma: &AlternatingPermutation, point: &IntegrationPoint) -> Result<f64> {
    let plan = IntegrandPlan::new(matrix, sigma)?;
    if point.x.len() != plan.size || point.y.len() != plan.size {
        return Err(Error::validation("integration point does not match the market size"));
    }
    Ok(plan.evaluate(point))
}

/// Plain Monte Carlo estimate of the probability that `sigma` is stable.
pub fn mc_permutation_stability(
    matrix: &PopularityMatrix,
    sigma: &AlternatingPermutation,
    samples: u64,
    stream: &SeededStream,
) -> Result<Estimate> {
    if samples < 2 {
        return Err(Error::validation("Monte Carlo needs at least 2 samples"));
    }
    let plan = IntegrandPlan::new(matrix, sigma)?;
    Ok(plan.sample_moments(samples, &mut stream.rng()).estimate())
}

/// Estimates for `sigma` and its inverse on independent sub-streams, and the z-score of
/// their difference. An involution (a matching) is its own inverse and both estimates
/// then share one stream, so the gap is exactly zero.
pub fn inverse_symmetry_gap(
    matrix: &PopularityMatrix,
    sigma: &AlternatingPermutation,
    samples: u64,
    stream: &SeededStream,
) -> Result<(Estimate, Estimate, f64)> {
    let inverse = sigma.inverse();
    let forward = mc_permutation_stability(matrix, sigma, samples, &stream.child("sigma"))?;
    let backward_stream = if inverse == *sigma {
        stream.child("sigma")
    } else {
        stream.child("inverse")
    };
    let backward = mc_permutation_stability(matrix, &inverse, samples, &backward_stream)?;
    let z = forward.z_score(&backward);
    Ok((forward, backward, z))
}

/// How the stability probabilities inside the inclusion-exclusion sum are obtained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Evaluator {
    /// Enumerate the anti-popularity model of the matrix.
    Exact(EnumerationBudget),
    /// Integrate each term on its own sub-stream (`term0`, `term1`, ...).
    MonteCarlo { samples: u64, stream: SeededStream },
}

#[derive(Debug, Clone, PartialEq)]
pub enum IeValue {
    Exact(Rational),
    Estimate(Estimate),
}

impl IeValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            IeValue::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            IeValue::Estimate(e) => e.mean,
        }
    }
}

/// `Σ (-1)^C(σ) P[σ stable]` over the permutations agreeing with `mu` on the side
/// given by `side`: the probability that `mu` is the stable matching optimal for that side.
pub fn ie_optimal_probability(
    matrix: &PopularityMatrix,
    mu: &Matching,
    side: Optimality,
    evaluator: &Evaluator,
) -> Result<IeValue> {
    ie_optimal_probability_capped(matrix, mu, side, evaluator, DEFAULT_IE_MAX_SIZE)
}

/// As [`ie_optimal_probability`] with an explicit cap on the market size.
pub fn ie_optimal_probability_capped(
    matrix: &PopularityMatrix,
    mu: &Matching,
    side: Optimality,
    evaluator: &Evaluator,
    max_size: usize,
) -> Result<IeValue> {
    let n = mu.num_men();
    if matrix.shape() != (n, mu.num_women()) || n != mu.num_women() {
        return Err(Error::validation(format!(
            "matching on {}x{} does not fit matrix {:?}",
            mu.num_men(),
            mu.num_women(),
            matrix.shape()
        )));
    }
    if n > max_size {
        return Err(Error::Capacity {
            what: "inclusion-exclusion terms",
            required: Some(factorial(n)),
            cap: factorial(max_size),
        });
    }
    let sigmas = inclusion_exclusion_terms(mu, side)?;
    match evaluator {
        Evaluator::Exact(budget) => {
            let model = PreferenceModel::SymmetricAntiPopularity(matrix.clone());
            let space = ProfileSpace::new(&model, *budget)?;
            Ok(IeValue::Exact(space.optimal_probability(mu, side)?))
        }
        Evaluator::MonteCarlo { samples, stream } => {
            let mut mean = 0.0;
            let mut variance = 0.0;
            for (i, sigma) in sigmas.iter().enumerate() {
                let e = mc_permutation_stability(matrix, sigma, *samples, &stream.child(format_args!("term{i}")))?;
                let sign = if count_long_cycles(sigma).is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                };
                mean += sign * e.mean;
                variance += e.standard_error * e.standard_error;
            }
            Ok(IeValue::Estimate(Estimate {
                mean,
                standard_error: libm::sqrt(variance),
                samples: *samples,
            }))
        }
    }
}

/// Whether every exponent of the integrand equals one (true for constant matrices).
pub fn has_unit_exponents(factors: &[Factor]) -> bool {
    factors.iter().all(|f| match f {
        Factor::Man { exponent, .. } | Factor::Woman { woman: _, exponent } => exponent.is_one(),
        Factor::Pair {
            x_exponent, y_exponent, ..
        } => x_exponent.is_one() && y_exponent.is_one(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{example_matrix, four_cycle_permutation};
    use crate::rational;
    use alloc::vec;

    fn identity_sigma(n: usize) -> AlternatingPermutation {
        AlternatingPermutation::new((0..n).collect(), (0..n).collect()).unwrap()
    }

    #[test]
    fn uniform_matching_at_half() {
        let p = PopularityMatrix::ones(2, 2);
        let point = IntegrationPoint {
            x: vec![0.5, 0.5],
            y: vec![0.5, 0.5],
        };
        let v = integrand(&p, &identity_sigma(2), &point).unwrap();
        assert!((v - 9.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn corners() {
        let p = example_matrix();
        let ones = IntegrationPoint {
            x: vec![1.0; 3],
            y: vec![1.0; 3],
        };
        let zeros = IntegrationPoint {
            x: vec![0.0; 3],
            y: vec![0.0; 3],
        };
        assert_eq!(integrand(&p, &four_cycle_permutation(), &ones).unwrap(), 0.0);
        assert_eq!(integrand(&p, &identity_sigma(3), &ones).unwrap(), 0.0);
        assert_eq!(integrand(&p, &identity_sigma(3), &zeros).unwrap(), 1.0);
    }

    #[test]
    fn factor_sets() {
        let factors = integrand_factors(&example_matrix(), &four_cycle_permutation()).unwrap();
        let men = factors.iter().filter(|f| matches!(f, Factor::Man { .. })).count();
        let women = factors.iter().filter(|f| matches!(f, Factor::Woman { .. })).count();
        let pairs = factors.iter().filter(|f| matches!(f, Factor::Pair { .. })).count();
        // the 4-cycle contributes two forward and two backward links; (m1 w1) none
        assert_eq!((men, women, pairs), (2, 2, 4));
        // m2's successor is w2 and predecessor w3: exponent P(m2,w3)/P(m2,w2) = 2/6
        assert!(factors.contains(&Factor::Man {
            man: 1,
            exponent: rational(1, 3)
        }));
        assert!(has_unit_exponents(
            &integrand_factors(&PopularityMatrix::ones(3, 3), &four_cycle_permutation()).unwrap()
        ));
    }

    #[test]
    fn one_by_one_is_certain() {
        let p = PopularityMatrix::from_integers(&[&[3]]).unwrap();
        let e = mc_permutation_stability(&p, &identity_sigma(1), 100, &SeededStream::new(1, "t")).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.standard_error, 0.0);
        let mu = Matching::from_pairs(1, 1, [(0, 0)]).unwrap();
        let v =
            ie_optimal_probability(&p, &mu, Optimality::WomenOptimal, &Evaluator::Exact(Default::default())).unwrap();
        assert_eq!(v, IeValue::Exact(rational(1, 1)));
    }

    #[test]
    fn matching_gap_is_zero() {
        let (a, b, z) = inverse_symmetry_gap(
            &example_matrix(),
            &identity_sigma(3),
            1000,
            &SeededStream::new(5, "gap"),
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(z, 0.0);
    }

    #[test]
    fn moments_merge() {
        let mut a = Moments::default();
        let mut b = Moments::default();
        let mut whole = Moments::default();
        for i in 0..10 {
            let v = i as f64 / 10.0;
            if i % 2 == 0 {
                a.push(v)
            } else {
                b.push(v)
            }
            whole.push(v);
        }
        a.merge(&b);
        assert_eq!(a.count, whole.count);
        assert!((a.estimate().mean - whole.estimate().mean).abs() < 1e-15);
    }

    #[test]
    fn size_cap() {
        let p = PopularityMatrix::ones(3, 3);
        let mu = Matching::from_pairs(3, 3, [(0, 0), (1, 1), (2, 2)]).unwrap();
        let err = ie_optimal_probability_capped(
            &p,
            &mu,
            Optimality::WomenOptimal,
            &Evaluator::Exact(Default::default()),
            2,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::Capacity {
                required: Some(6),
                cap: 2,
                ..
            }
        ));
    }

    #[test]
    fn too_few_samples() {
        assert!(
            mc_permutation_stability(&example_matrix(), &identity_sigma(3), 1, &SeededStream::new(0, "x")).is_err()
        );
    }
}
