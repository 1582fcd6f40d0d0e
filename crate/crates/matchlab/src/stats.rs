//! Two-sample statistics on tallies of matchings.

use std::collections::BTreeSet;

use matchlab_core::exact::{EmpiricalDistribution, ExactDistribution};
use matchlab_core::market::Matching;
use num_traits::ToPrimitive;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Cells whose expected count falls below this are pooled before the chi-square test.
pub const MIN_EXPECTED_COUNT: f64 = 5.0;
pub const BOOTSTRAP_RESAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonStats {
    pub total_variation: f64,
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    /// 99th percentile of the total variation distance under the pooled null.
    pub tv_null_p99: f64,
    /// Number of rare matchings merged into one cell for the chi-square test.
    pub pooled_cells: usize,
}

impl ComparisonStats {
    /// Neither test rejects equality at level `alpha` (TV against its 99th null percentile).
    pub fn accepts(&self, alpha: f64) -> bool {
        self.p_value > alpha && self.total_variation <= self.tv_null_p99
    }
}

fn union_support<'a>(a: &'a EmpiricalDistribution, b: &'a EmpiricalDistribution) -> Vec<&'a Matching> {
    let set: BTreeSet<&Matching> = a.iter().map(|(m, _)| m).chain(b.iter().map(|(m, _)| m)).collect();
    set.into_iter().collect()
}

pub fn total_variation(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> f64 {
    0.5 * union_support(a, b)
        .into_iter()
        .map(|m| (a.frequency(m) - b.frequency(m)).abs())
        .sum::<f64>()
}

/// Total variation between sample frequencies and an exact distribution.
pub fn total_variation_to_exact(a: &EmpiricalDistribution, exact: &ExactDistribution) -> f64 {
    let support: BTreeSet<&Matching> = a.iter().map(|(m, _)| m).chain(exact.iter().map(|(m, _)| m)).collect();
    0.5 * support
        .into_iter()
        .map(|m| (a.frequency(m) - exact.get(m).to_f64().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    pub pooled_cells: usize,
}

/// Pearson chi-square test of homogeneity on the 2×K table of counts; cells with an
/// expected count below [`MIN_EXPECTED_COUNT`] in either row are merged into one.
pub fn chi_square_homogeneity(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> ChiSquareTest {
    let (na, nb) = (a.samples() as f64, b.samples() as f64);
    let total = na + nb;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    let mut pooled_cells = 0;
    for m in union_support(a, b) {
        let (ca, cb) = (a.count(m) as f64, b.count(m) as f64);
        let column = ca + cb;
        if na * column / total < MIN_EXPECTED_COUNT || nb * column / total < MIN_EXPECTED_COUNT {
            pooled.0 += ca;
            pooled.1 += cb;
            pooled_cells += 1;
        } else {
            cells.push((ca, cb));
        }
    }
    if pooled_cells > 0 {
        cells.push(pooled);
    }
    if cells.len() < 2 || na == 0.0 || nb == 0.0 {
        return ChiSquareTest {
            statistic: 0.0,
            degrees_of_freedom: 0,
            p_value: 1.0,
            pooled_cells,
        };
    }
    let statistic = cells
        .iter()
        .map(|&(ca, cb)| {
            let column = ca + cb;
            let (ea, eb) = (na * column / total, nb * column / total);
            (ca - ea).powi(2) / ea + (cb - eb).powi(2) / eb
        })
        .sum::<f64>();
    let df = cells.len() - 1;
    let p_value = ChiSquared::new(df as f64).map_or(f64::NAN, |d| d.sf(statistic));
    ChiSquareTest {
        statistic,
        degrees_of_freedom: df,
        p_value,
        pooled_cells,
    }
}

/// Draws multinomial counts by successive conditional binomials.
fn multinomial<R: Rng + ?Sized>(n: u64, probabilities: &[f64], rng: &mut R) -> Vec<u64> {
    let mut left = n;
    let mut mass = 1.0;
    let mut out = Vec::with_capacity(probabilities.len());
    for (i, &p) in probabilities.iter().enumerate() {
        if i + 1 == probabilities.len() || left == 0 {
            out.push(left);
            left = 0;
            continue;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let k = Binomial::new(left, q).expect("valid binomial").sample(rng);
        out.push(k);
        left -= k;
        mass -= p;
    }
    out
}

/// The `quantile` of the total variation distance between two samples of the observed
/// sizes drawn from the pooled distribution.
pub fn bootstrap_tv_quantile<R: Rng + ?Sized>(
    a: &EmpiricalDistribution,
    b: &EmpiricalDistribution,
    resamples: usize,
    quantile: f64,
    rng: &mut R,
) -> f64 {
    let support = union_support(a, b);
    let total = (a.samples() + b.samples()) as f64;
    if support.is_empty() || resamples == 0 {
        return 0.0;
    }
    let pooled: Vec<f64> = support
        .iter()
        .map(|m| (a.count(m) + b.count(m)) as f64 / total)
        .collect();
    let (na, nb) = (a.samples(), b.samples());
    let mut tvs: Vec<f64> = (0..resamples)
        .map(|_| {
            let ca = multinomial(na, &pooled, rng);
            let cb = multinomial(nb, &pooled, rng);
            0.5 * ca
                .iter()
                .zip(&cb)
                .map(|(&x, &y)| (x as f64 / na as f64 - y as f64 / nb as f64).abs())
                .sum::<f64>()
        })
        .collect();
    tvs.sort_by(f64::total_cmp);
    let rank = ((quantile * resamples as f64).ceil() as usize).clamp(1, resamples);
    tvs[rank - 1]
}

pub fn compare<R: Rng + ?Sized>(a: &EmpiricalDistribution, b: &EmpiricalDistribution, rng: &mut R) -> ComparisonStats {
    let chi = chi_square_homogeneity(a, b);
    ComparisonStats {
        total_variation: total_variation(a, b),
        chi_square: chi.statistic,
        degrees_of_freedom: chi.degrees_of_freedom,
        p_value: chi.p_value,
        tv_null_p99: bootstrap_tv_quantile(a, b, BOOTSTRAP_RESAMPLES, 0.99, rng),
        pooled_cells: chi.pooled_cells,
    }
}
