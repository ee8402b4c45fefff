//! Exact computation of the path-reversal cost law, its probability
//! generating function, moments and asymptotics.
//!
//! For an `n`-node initial tree the cost law is
//! `p_{n,k} = [z^k] prod_{j=1..n-1} (z + j - 1) / j`,
//! the law of the number of cycles of a uniform permutation of `n - 1`
//! elements: `(n-1)! * p_{n,k}` are unsigned Stirling cycle numbers.
//! Mean `H_{n-1}`, variance `H_{n-1} - H^(2)_{n-1}`.
//!
//! All probability computations run in exact rationals by default; floats
//! appear only in asymptotics and Monte Carlo diagnostics.

use crate::combinat::Permutation;
use crate::scalar::{from_usize, ratio, Scalar};
use crate::Exact;
use num::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

/// Euler's constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `gamma - pi^2 / 6`, the constant in the variance asymptotics. The source
/// derivation misprints it as `-1.6772...`; the computed value is
/// `-1.0677...` (consistent with the `1.06772...` its own normal-limit note
/// uses).
pub const GAMMA_MINUS_PI2_OVER_6: f64 = EULER_GAMMA - std::f64::consts::PI * std::f64::consts::PI / 6.0;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("n must be at least {min} (got {got})")]
    NTooSmall { min: usize, got: usize },
    #[error("enumeration guard: n = {n} exceeds limit {limit}")]
    EnumerationGuard { n: usize, limit: usize },
    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
}

/// Exact harmonic numbers `H_m` and `H^(2)_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicPair<S> {
    pub h: S,
    pub h2: S,
}

/// `H_m = sum 1/i` and `H^(2)_m = sum 1/i^2` for `i = 1..=m`.
pub fn harmonic_pair<S: Scalar>(m: usize) -> HarmonicPair<S> {
    let mut h = S::zero();
    let mut h2 = S::zero();
    for i in 1..=m {
        h = h + ratio::<S>(1, i);
        h2 = h2 + ratio::<S>(1, i * i);
    }
    HarmonicPair { h, h2 }
}

/// The exact law `{p_{n,k}}` of the reversal cost, with its polynomial
/// (generating function) view: `probs[k]` is the coefficient of `z^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostDistribution<S> {
    n: usize,
    probs: Vec<S>,
}

impl<S: Scalar> CostDistribution<S> {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `p_{n,k}`; zero outside the stored support.
    pub fn prob(&self, k: usize) -> S {
        self.probs.get(k).cloned().unwrap_or_else(S::zero)
    }

    /// Coefficients `p_{n,0}, p_{n,1}, ...` of the generating function.
    pub fn coefficients(&self) -> &[S] {
        &self.probs
    }

    pub fn total_mass(&self) -> S {
        self.probs.iter().cloned().fold(S::zero(), |a, b| a + b)
    }

    pub fn mean(&self) -> S {
        self.probs
            .iter()
            .enumerate()
            .fold(S::zero(), |a, (k, p)| a + from_usize::<S>(k) * p.clone())
    }

    pub fn variance(&self) -> S {
        let m1 = self.mean();
        let m2 = self
            .probs
            .iter()
            .enumerate()
            .fold(S::zero(), |a, (k, p)| a + from_usize::<S>(k * k) * p.clone());
        m2 - m1.clone() * m1
    }

    /// Third central moment, for skewness diagnostics.
    pub fn third_central_moment(&self) -> S {
        let m = self.mean();
        let mut acc = S::zero();
        for (k, p) in self.probs.iter().enumerate() {
            let d = from_usize::<S>(k) - m.clone();
            acc = acc + d.clone() * d.clone() * d * p.clone();
        }
        acc
    }

    /// `(P'(1), P''(1))`: first and second factorial moments read off the
    /// coefficients. `P'(1) = sum k p_k`, `P''(1) = sum k (k-1) p_k`.
    pub fn pgf_derivatives_at_one(&self) -> (S, S) {
        let d1 = self.mean();
        let d2 = self
            .probs
            .iter()
            .enumerate()
            .fold(S::zero(), |a, (k, p)| a + from_usize::<S>(k * (k.max(1) - 1)) * p.clone());
        (d1, d2)
    }
}

/// Base-case convention for the generating-function product at `n = 1`.
///
/// The source states both `p_{1,0} = 1` (recurrence base) and `P_1(z) = z`;
/// the two disagree at `n = 1` only. The default empty-product convention
/// encodes `p_{1,0} = 1`, which is the one consistent with the product form
/// for `n >= 2` (telescoping the product from `P_1(z) = z` would give
/// `P_2(z) = z^2`, contradicting the recurrence).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PgfBaseCase {
    /// `P_1 = 1`, i.e. `p_{1,0} = 1`.
    #[default]
    EmptyProduct,
    /// `P_1(z) = z`, i.e. `p_{1,1} = 1`; differs from `EmptyProduct` at `n = 1` only.
    LinearBase,
}

/// Computes `p_{n,k}` by iterating the recurrence
/// `p_{n,k} = (1 - 1/(n-1)) p_{n-1,k} + (1/(n-1)) p_{n-1,k-1}`
/// from `p_{1,0} = 1`.
pub fn cost_distribution_recurrence<S: Scalar>(n: usize) -> Result<CostDistribution<S>, AnalysisError> {
    if n == 0 {
        return Err(AnalysisError::NTooSmall { min: 1, got: 0 });
    }
    let mut probs = vec![S::one()];
    for m in 2..=n {
        let j = m - 1; // recurrence step from size m-1 to m
        let stay = ratio::<S>(j - 1, j);
        let step = ratio::<S>(1, j);
        let mut next = vec![S::zero(); probs.len() + 1];
        for (k, p) in probs.iter().enumerate() {
            next[k] = next[k].clone() + stay.clone() * p.clone();
            next[k + 1] = next[k + 1].clone() + step.clone() * p.clone();
        }
        probs = next;
    }
    Ok(CostDistribution { n, probs })
}

/// Expands the product `prod_{j=1..n-1} (z + j - 1) / j` exactly.
pub fn cost_distribution_pgf<S: Scalar>(
    n: usize,
    base: PgfBaseCase,
) -> Result<CostDistribution<S>, AnalysisError> {
    if n == 0 {
        return Err(AnalysisError::NTooSmall { min: 1, got: 0 });
    }
    let mut probs = match (n, base) {
        (1, PgfBaseCase::LinearBase) => vec![S::zero(), S::one()],
        _ => vec![S::one()],
    };
    for j in 1..n {
        // multiply by (z + j - 1) / j
        let c = ratio::<S>(j - 1, j);
        let zc = ratio::<S>(1, j);
        let mut next = vec![S::zero(); probs.len() + 1];
        for (k, p) in probs.iter().enumerate() {
            next[k] = next[k].clone() + c.clone() * p.clone();
            next[k + 1] = next[k + 1].clone() + zc.clone() * p.clone();
        }
        probs = next;
    }
    Ok(CostDistribution { n, probs })
}

/// Largest `n` for which [`moments`] expands the full generating function to
/// cross-check its derivatives against the harmonic closed forms. The
/// expansion costs `O(n^2)` big-rational operations with `(n-1)!`-sized
/// denominators, which passes 6 minutes well before `n = 1000`; above the
/// threshold the closed forms are returned directly (the identity is pinned
/// exhaustively below it).
pub const MOMENT_CROSSCHECK_LIMIT: usize = 64;

/// Exact mean and variance of the cost for an `n`-node tree, `n >= 2`.
///
/// Computed two ways — harmonic closed forms (`H_{n-1}`,
/// `H_{n-1} - H^(2)_{n-1}`) and generating-function derivatives
/// (`var = P''(1) + P'(1) - P'(1)^2`) — and cross-checked for
/// `n <= MOMENT_CROSSCHECK_LIMIT`; a mismatch is an internal error.
pub fn moments<S: Scalar>(n: usize) -> Result<(S, S), AnalysisError> {
    if n < 2 {
        return Err(AnalysisError::NTooSmall { min: 2, got: n });
    }
    let HarmonicPair { h, h2 } = harmonic_pair::<S>(n - 1);
    let mean = h.clone();
    let variance = h - h2;
    if n > MOMENT_CROSSCHECK_LIMIT {
        return Ok((mean, variance));
    }

    let dist = cost_distribution_pgf::<S>(n, PgfBaseCase::EmptyProduct)?;
    let (d1, d2) = dist.pgf_derivatives_at_one();
    let var_pgf = d2 + d1.clone() - d1.clone() * d1.clone();
    // exact carriers must agree exactly; inexact ones get a rounding
    // allowance. A carrier is exact iff 1/10 + 2/10 == 3/10 holds in it
    // (false in binary floating point).
    let carrier_is_exact = ratio::<S>(1, 10) + ratio::<S>(2, 10) == ratio::<S>(3, 10);
    let close = |a: &S, b: &S| {
        let (af, bf) = (a.to_f64().unwrap_or(f64::NAN), b.to_f64().unwrap_or(f64::NAN));
        (af - bf).abs() <= 1e-9 * (1.0 + af.abs().max(bf.abs()))
    };
    let agree = |a: &S, b: &S| if carrier_is_exact { a == b } else { close(a, b) };
    if !agree(&d1, &mean) || !agree(&var_pgf, &variance) {
        return Err(AnalysisError::Inconsistent(format!(
            "harmonic and generating-function moments disagree at n = {n}"
        )));
    }
    Ok((mean, variance))
}

/// Asymptotic moments: `ln n + gamma` and `ln n + gamma - pi^2/6`.
pub fn asymptotic_moments(n: usize) -> (f64, f64) {
    let ln_n = (n as f64).ln();
    (ln_n + EULER_GAMMA, ln_n + GAMMA_MINUS_PI2_OVER_6)
}

/// Iterates the mean-cost recurrence `C_{k+1} = C_k + 1/k` from `C_1 = 0`
/// and returns `C_n`. Independent route to the mean: must equal `H_{n-1}`.
pub fn appendix_recurrence_mean<S: Scalar>(n: usize) -> Result<S, AnalysisError> {
    if n == 0 {
        return Err(AnalysisError::NTooSmall { min: 1, got: 0 });
    }
    let mut c = S::zero();
    for k in 1..n {
        c = c + ratio::<S>(1, k);
    }
    Ok(c)
}

/// Enumerates all `n!` permutations and checks that exactly
/// `(n-1)! * H_{n-1}` of them have two cycles (an exact integer identity).
pub fn stirling_cycle_check(n: usize, limit: usize) -> Result<bool, AnalysisError> {
    if n > limit {
        return Err(AnalysisError::EnumerationGuard { n, limit });
    }
    if n < 2 {
        return Err(AnalysisError::NTooSmall { min: 2, got: n });
    }
    let count = Permutation::all(n)
        .iter()
        .filter(|p| p.cycle_count() == 2)
        .count();
    // (n-1)! * H_{n-1} = sum_{i=1..n-1} (n-1)!/i
    let mut expected = BigInt::zero();
    let mut fact = BigInt::one();
    for i in 1..n {
        fact *= i;
    }
    for i in 1..n {
        expected += &fact / i;
    }
    Ok(BigInt::from(count) == expected)
}

/// Independent enumeration oracle: the distribution of the number of cycles
/// of a uniform permutation of `[m]`, computed by brute force (not via the
/// recurrence).
///
/// The reversal-cost statistic of the analysis satisfies recurrence (derived
/// by conditioning on whether the extra element forms its own cycle, which
/// happens with probability `1/m`), so for `m = n - 1` this law must equal
/// `{p_{n,k}}` — the cross-check behind the exact distribution tests.
pub fn enumerated_cycle_distribution(m: usize) -> Vec<(usize, Exact)> {
    let mut counts = std::collections::BTreeMap::new();
    let total: usize = Permutation::all(m).len().max(1);
    for p in Permutation::all(m) {
        *counts.entry(p.cycle_count()).or_insert(0usize) += 1;
    }
    if m == 0 {
        // the empty permutation has zero cycles
        counts.insert(0, 1);
    }
    counts
        .into_iter()
        .map(|(k, c)| (k, Exact::new(c.into(), total.into())))
        .collect()
}

/// Samples `samples` costs from the exact law by inverse CDF. The cumulative
/// sums are computed in exact rationals and converted to floats at the last
/// step.
pub fn sample_costs(dist: &CostDistribution<Exact>, samples: usize, seed: u64) -> Vec<usize> {
    use rand::{Rng, SeedableRng};
    let mut cdf = Vec::with_capacity(dist.coefficients().len());
    let mut acc = Exact::zero();
    for p in dist.coefficients() {
        acc += p;
        cdf.push(acc.to_f64().expect("probability fits in f64"));
    }
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let u: f64 = rng.gen();
            cdf.partition_point(|c| *c < u).min(cdf.len() - 1)
        })
        .collect()
}

/// Monte Carlo normality diagnostic: draws from the exact law, standardizes
/// by the exact mean and variance, and returns the empirical mean and
/// variance of the standardized sample (expected near 0 and 1).
pub fn normality_diagnostic(
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64), AnalysisError> {
    if n < 10 {
        return Err(AnalysisError::NTooSmall { min: 10, got: n });
    }
    if samples < 1000 {
        return Err(AnalysisError::Inconsistent("need at least 1000 samples".into()));
    }
    let dist = cost_distribution_pgf::<Exact>(n, PgfBaseCase::EmptyProduct)?;
    let mean = dist.mean().to_f64().unwrap();
    let sd = dist.variance().to_f64().unwrap().sqrt();
    let draws = sample_costs(&dist, samples, seed);
    let zs: Vec<f64> = draws.iter().map(|&c| (c as f64 - mean) / sd).collect();
    let m = zs.iter().sum::<f64>() / zs.len() as f64;
    let v = zs.iter().map(|z| (z - m) * (z - m)).sum::<f64>() / (zs.len() - 1) as f64;
    Ok((m, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Exact;

    fn r(a: i64, b: i64) -> Exact {
        Exact::new(a.into(), b.into())
    }

    #[test]
    fn recurrence_small_cases() {
        let d = cost_distribution_recurrence::<Exact>(1).unwrap();
        assert_eq!(d.coefficients(), &[r(1, 1)]);

        let d = cost_distribution_recurrence::<Exact>(3).unwrap();
        assert_eq!(d.prob(0), r(0, 1));
        assert_eq!(d.prob(1), r(1, 2));
        assert_eq!(d.prob(2), r(1, 2));

        let d = cost_distribution_recurrence::<Exact>(4).unwrap();
        assert_eq!(d.prob(1), r(1, 3));
        assert_eq!(d.prob(2), r(1, 2));
        assert_eq!(d.prob(3), r(1, 6));

        assert!(cost_distribution_recurrence::<Exact>(0).is_err());
    }

    #[test]
    fn pgf_matches_recurrence_and_base_cases() {
        for n in 1..=12 {
            let a = cost_distribution_recurrence::<Exact>(n).unwrap();
            let b = cost_distribution_pgf::<Exact>(n, PgfBaseCase::EmptyProduct).unwrap();
            assert_eq!(a.coefficients(), b.coefficients(), "n = {n}");
            assert_eq!(a.total_mass(), r(1, 1));
        }
        let p1 = cost_distribution_pgf::<Exact>(1, PgfBaseCase::LinearBase).unwrap();
        assert_eq!(p1.coefficients(), &[r(0, 1), r(1, 1)]);
        let p2a = cost_distribution_pgf::<Exact>(2, PgfBaseCase::LinearBase).unwrap();
        let p2b = cost_distribution_pgf::<Exact>(2, PgfBaseCase::EmptyProduct).unwrap();
        assert_eq!(p2a.coefficients(), p2b.coefficients());
        assert_eq!(p2b.coefficients(), &[r(0, 1), r(1, 1)]);
    }

    #[test]
    fn pgf_mean_n5() {
        let d = cost_distribution_pgf::<Exact>(5, PgfBaseCase::EmptyProduct).unwrap();
        assert_eq!(d.mean(), r(25, 12));
    }

    #[test]
    fn stirling_numerators_are_integers() {
        let mut fact = num::BigInt::from(1);
        for i in 1..10usize {
            fact *= i;
        }
        let d = cost_distribution_pgf::<Exact>(10, PgfBaseCase::EmptyProduct).unwrap();
        for p in d.coefficients() {
            let scaled = p * Exact::from_integer(fact.clone());
            assert!(scaled.is_integer());
            assert!(scaled >= Exact::zero());
        }
    }

    #[test]
    fn moments_match_closed_forms() {
        assert_eq!(moments::<Exact>(2).unwrap(), (r(1, 1), r(0, 1)));
        assert_eq!(moments::<Exact>(3).unwrap(), (r(3, 2), r(1, 4)));
        assert_eq!(moments::<Exact>(4).unwrap(), (r(11, 6), r(17, 36)));
        assert!(moments::<Exact>(1).is_err());
    }

    #[test]
    fn moments_generic_over_f64() {
        let (m, v) = moments::<f64>(4).unwrap();
        assert!((m - 11.0 / 6.0).abs() < 1e-12);
        assert!((v - 17.0 / 36.0).abs() < 1e-12);
    }

    #[test]
    fn asymptotics_track_exact_values() {
        let (ma, va) = asymptotic_moments(1000);
        let h = harmonic_pair::<f64>(999).h;
        assert!((ma - h).abs() < 1e-3);
        assert!((va - ma + std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-12);

        let (m2, _) = asymptotic_moments(2);
        let exact = harmonic_pair::<f64>(1).h;
        assert!((m2 - exact).abs() < 0.3);
    }

    #[test]
    fn appendix_recurrence_values() {
        assert_eq!(appendix_recurrence_mean::<Exact>(1).unwrap(), r(0, 1));
        assert_eq!(appendix_recurrence_mean::<Exact>(2).unwrap(), r(1, 1));
        assert_eq!(appendix_recurrence_mean::<Exact>(10).unwrap(), r(7129, 2520));
        assert_eq!(
            appendix_recurrence_mean::<Exact>(10).unwrap(),
            harmonic_pair::<Exact>(9).h
        );
    }

    #[test]
    fn stirling_two_cycle_counts() {
        assert!(stirling_cycle_check(2, 8).unwrap()); // 1 = 1! * H_1
        assert!(stirling_cycle_check(3, 8).unwrap()); // 3 = 2! * 3/2
        assert!(stirling_cycle_check(4, 8).unwrap()); // 11 = 3! * 11/6
        assert!(stirling_cycle_check(9, 8).is_err());
    }

    #[test]
    fn enumeration_oracle_matches_distribution() {
        for n in 2..=7usize {
            let oracle = enumerated_cycle_distribution(n - 1);
            let dist = cost_distribution_pgf::<Exact>(n, PgfBaseCase::EmptyProduct).unwrap();
            for (k, p) in oracle {
                assert_eq!(dist.prob(k), p, "n = {n}, k = {k}");
            }
        }
    }

    #[test]
    fn normality_diagnostic_near_standard() {
        let (m, v) = normality_diagnostic(100, 100_000, 42).unwrap();
        assert!(m.abs() < 0.02, "standardized mean {m}");
        assert!((v - 1.0).abs() < 0.05, "standardized variance {v}");
    }

    #[test]
    fn skewness_moderate_and_decaying_at_n100() {
        // independent check: for a sum of independent indicators with
        // success probabilities 1/j, the third central moment is
        // sum_j (1/j)(1 - 1/j)(1 - 2/j); at n = 100 the skewness is
        // 0.40146..., decaying like 1/sqrt(log n)
        let d = cost_distribution_pgf::<Exact>(100, PgfBaseCase::EmptyProduct).unwrap();
        let skew = d.third_central_moment().to_f64().unwrap()
            / d.variance().to_f64().unwrap().powf(1.5);
        assert!((skew - 0.401_460_064_504_29).abs() < 1e-12, "skewness {skew}");

        let mut direct = Exact::zero();
        for j in 1..100usize {
            let p = Exact::new(1.into(), j.into());
            let one = Exact::one();
            direct += p.clone() * (one.clone() - p.clone()) * (one - Exact::from_integer(2.into()) * p);
        }
        assert_eq!(d.third_central_moment(), direct);

        let d400 = cost_distribution_pgf::<Exact>(400, PgfBaseCase::EmptyProduct).unwrap();
        let skew400 = d400.third_central_moment().to_f64().unwrap()
            / d400.variance().to_f64().unwrap().powf(1.5);
        assert!(skew400 < skew);
    }

    #[test]
    fn sampling_is_deterministic() {
        let d = cost_distribution_pgf::<Exact>(16, PgfBaseCase::EmptyProduct).unwrap();
        assert_eq!(sample_costs(&d, 100, 7), sample_costs(&d, 100, 7));
    }
}
