//! pass@k estimators and the one-sided Wilcoxon signed-rank test.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StatsError {
    #[error("pass@k needs 0 <= c <= n and 1 <= k <= n (got n={n}, c={c}, k={k})")]
    Domain { n: u64, c: u64, k: u64 },
    #[error("no counts to aggregate")]
    EmptyInput,
    #[error("xs and ys differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 5 nonzero differences, got {0}")]
    TooFewPairs(usize),
}

impl StatsError {
    pub fn code(&self) -> &'static str {
        match self {
            StatsError::Domain { .. } => "domain-error",
            StatsError::EmptyInput => "empty-input",
            StatsError::LengthMismatch(..) => "length-mismatch",
            StatsError::TooFewPairs(_) => "too-few-pairs",
        }
    }
}

fn check(n: u64, c: u64, k: u64) -> Result<(), StatsError> {
    if c > n || k == 0 || k > n {
        return Err(StatsError::Domain { n, c, k });
    }
    Ok(())
}

/// Unbiased pass@k for one problem, `1 − C(n−c, k)/C(n, k)`, evaluated as
/// `1 − ∏_{i=n−c+1}^{n} (1 − k/i)`.
pub fn pass_at_k(n: u64, c: u64, k: u64) -> Result<f64, StatsError> {
    check(n, c, k)?;
    if n - c < k {
        return Ok(1.0);
    }
    let kf = k as f64;
    let prod: f64 = (n - c + 1..=n).map(|i| 1.0 - kf / i as f64).product();
    Ok(1.0 - prod)
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// The same quantity as an exact rational.
pub fn pass_at_k_exact(n: u64, c: u64, k: u64) -> Result<Ratio<u128>, StatsError> {
    check(n, c, k)?;
    let fail = Ratio::new(binomial(n - c, k), binomial(n, k));
    Ok(Ratio::from_integer(1) - fail)
}

/// Samples generated, well-formed, and judged correct for one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EvalCounts {
    pub n: u64,
    pub w: u64,
    pub c: u64,
}

impl EvalCounts {
    pub fn new(n: u64, w: u64, c: u64) -> Self {
        EvalCounts { n, w, c }
    }

    pub fn is_consistent(&self) -> bool {
        self.c <= self.w && self.w <= self.n
    }

    /// Denominator used by standard or conditioned pass@k.
    pub fn denominator(&self, conditioned: bool) -> u64 {
        if conditioned {
            self.w
        } else {
            self.n
        }
    }
}

impl std::ops::Add for EvalCounts {
    type Output = EvalCounts;

    fn add(self, o: EvalCounts) -> EvalCounts {
        EvalCounts::new(self.n + o.n, self.w + o.w, self.c + o.c)
    }
}

impl std::iter::Sum for EvalCounts {
    fn sum<I: Iterator<Item = EvalCounts>>(iter: I) -> EvalCounts {
        iter.fold(EvalCounts::default(), |a, b| a + b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pooling {
    /// One pass@k over the summed counts.
    Pooled,
    /// Mean of per-benchmark pass@k.
    MeanOfBenchmarks,
}

/// Category-level pass@k. Conditioned scores use `w` in place of `n`, and
/// benchmarks with `w = 0` drop out. In the mean variant, benchmarks whose
/// denominator is below `k` are skipped as well.
pub fn aggregate_pass_at_k(counts: &[EvalCounts], k: u64, conditioned: bool, pooling: Pooling) -> Result<f64, StatsError> {
    if counts.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let kept: Vec<&EvalCounts> = counts.iter().filter(|e| !conditioned || e.w > 0).collect();
    match pooling {
        Pooling::Pooled => {
            let n: u64 = kept.iter().map(|e| e.denominator(conditioned)).sum();
            let c: u64 = kept.iter().map(|e| e.c).sum();
            pass_at_k(n, c, k)
        }
        Pooling::MeanOfBenchmarks => {
            let scores: Vec<f64> = kept
                .iter()
                .filter(|e| e.denominator(conditioned) >= k)
                .map(|e| pass_at_k(e.denominator(conditioned), e.c, k))
                .collect::<Result<_, _>>()?;
            if scores.is_empty() {
                let n: u64 = kept.iter().map(|e| e.denominator(conditioned)).sum();
                return Err(StatsError::Domain { n, c: 0, k });
            }
            Ok(scores.iter().sum::<f64>() / scores.len() as f64)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Sum of ranks of positive differences `x − y`.
    pub w_plus: f64,
    /// P(W⁺ ≥ observed) under the null.
    pub p_value: f64,
    /// Nonzero differences used.
    pub m: usize,
    pub exact: bool,
}

/// Largest `m` handled by full enumeration.
pub const EXACT_LIMIT: usize = 20;

/// Average ranks of `values` (1-based), ties sharing the mean rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = r;
        }
        i = j + 1;
    }
    ranks
}

/// One-sided signed-rank test of H1: xs tend to exceed ys. Zero
/// differences are dropped; ties in |d| get average ranks. Exact for up to
/// [`EXACT_LIMIT`] nonzero differences, else a normal approximation with
/// continuity and tie corrections.
pub fn wilcoxon_one_sided(xs: &[f64], ys: &[f64]) -> Result<WilcoxonResult, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    let d: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let m = d.len();
    if m < 5 {
        return Err(StatsError::TooFewPairs(m));
    }
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let ranks = average_ranks(&abs);
    let w_plus: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    if m <= EXACT_LIMIT {
        // Average ranks are multiples of 1/2, so doubled ranks are integers.
        let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        let total: usize = doubled.iter().sum();
        let mut dist = vec![0u64; total + 1];
        dist[0] = 1;
        for &r in &doubled {
            for s in (r..=total).rev() {
                dist[s] += dist[s - r];
            }
        }
        let observed = (2.0 * w_plus).round() as usize;
        let tail: u64 = dist[observed..].iter().sum();
        return Ok(WilcoxonResult {
            w_plus,
            p_value: tail as f64 / (1u64 << m) as f64,
            m,
            exact: true,
        });
    }
    let mf = m as f64;
    let mean = mf * (mf + 1.0) / 4.0;
    let mut ties = 0.0;
    let mut sorted = abs.clone();
    sorted.sort_by(f64::total_cmp);
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|v| **v == sorted[i]).count();
        let t = j as f64;
        ties += t * t * t - t;
        i += j;
    }
    let var = mf * (mf + 1.0) * (2.0 * mf + 1.0) / 24.0 - ties / 48.0;
    let z = (w_plus - mean - 0.5) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(WilcoxonResult {
        w_plus,
        p_value: (1.0 - normal.cdf(z)).clamp(0.0, 1.0),
        m,
        exact: false,
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    /// Fraction of k-subsets of n items (c of them correct) that contain a
    /// correct one, counted by walking every bitmask.
    fn brute(n: u64, c: u64, k: u64) -> Ratio<u128> {
        let mut hit = 0u128;
        let mut total = 0u128;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as u64 != k {
                continue;
            }
            total += 1;
            if mask & ((1u32 << c) - 1) != 0 {
                hit += 1;
            }
        }
        Ratio::new(hit, total)
    }

    #[test]
    fn worked_values() {
        assert!((pass_at_k(10, 3, 1).unwrap() - 0.3).abs() < 1e-12);
        assert!((pass_at_k(10, 3, 3).unwrap() - 85.0 / 120.0).abs() < 1e-9);
        assert_eq!(brute(10, 3, 3), Ratio::new(85, 120));
        assert_eq!(pass_at_k(10, 0, 3).unwrap(), 0.0);
        assert_eq!(pass_at_k(10, 10, 3).unwrap(), 1.0);
        assert!((pass_at_k(67, 31, 1).unwrap() - 0.4627).abs() < 5e-5);
    }

    #[test]
    fn domain_errors() {
        for (n, c, k) in [(5, 6, 1), (5, 2, 0), (5, 2, 6), (0, 0, 1)] {
            assert_eq!(pass_at_k(n, c, k).unwrap_err().code(), "domain-error");
            assert!(pass_at_k_exact(n, c, k).is_err());
        }
    }

    #[test]
    fn agrees_with_enumeration() {
        for n in 1..=12 {
            for c in 0..=n {
                for k in 1..=3.min(n) {
                    let exact = pass_at_k_exact(n, c, k).unwrap();
                    assert_eq!(exact, brute(n, c, k), "n={n} c={c} k={k}");
                    let f = *exact.numer() as f64 / *exact.denom() as f64;
                    assert!((pass_at_k(n, c, k).unwrap() - f).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn pooling_and_exclusion() {
        let cells = [EvalCounts::new(10, 0, 0), EvalCounts::new(10, 5, 2), EvalCounts::new(10, 10, 6)];
        let pooled = aggregate_pass_at_k(&cells, 1, false, Pooling::Pooled).unwrap();
        assert!((pooled - 8.0 / 30.0).abs() < 1e-12);
        let cond = aggregate_pass_at_k(&cells, 1, true, Pooling::Pooled).unwrap();
        assert!((cond - 8.0 / 15.0).abs() < 1e-12);
        let mean = aggregate_pass_at_k(&cells, 1, true, Pooling::MeanOfBenchmarks).unwrap();
        assert!((mean - (0.4 + 0.6) / 2.0).abs() < 1e-12);
        let mean_std = aggregate_pass_at_k(&cells, 1, false, Pooling::MeanOfBenchmarks).unwrap();
        assert!((mean_std - (0.0 + 0.2 + 0.6) / 3.0).abs() < 1e-12);
        assert_eq!(
            aggregate_pass_at_k(&[], 1, false, Pooling::Pooled).unwrap_err(),
            StatsError::EmptyInput
        );
        assert!(aggregate_pass_at_k(&[EvalCounts::new(10, 0, 0)], 1, true, Pooling::Pooled).is_err());
    }

    #[test]
    fn average_ranks_with_ties() {
        assert_eq!(average_ranks(&[5.0, 5.0, 7.0, 1.0]), vec![2.5, 2.5, 4.0, 1.0]);
    }

    #[test]
    fn equal_samples_are_too_few_pairs() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        assert_eq!(wilcoxon_one_sided(&xs, &xs).unwrap_err().code(), "too-few-pairs");
        assert_eq!(
            wilcoxon_one_sided(&xs, &xs[..5]).unwrap_err().code(),
            "length-mismatch"
        );
    }

    #[test]
    fn signed_rank_sum_with_tied_magnitudes() {
        // Pairs (after, before) with one zero difference and a tie at 5.
        let after = [125.0, 115.0, 130.0, 140.0, 140.0, 115.0, 140.0, 125.0, 140.0, 135.0];
        let before = [110.0, 122.0, 125.0, 120.0, 140.0, 124.0, 123.0, 137.0, 135.0, 145.0];
        let r = wilcoxon_one_sided(&after, &before).unwrap();
        assert_eq!(r.m, 9);
        assert_eq!(r.w_plus, 27.0);
        assert!(r.exact);
    }

    #[test]
    fn all_positive_gives_smallest_p() {
        let xs: Vec<f64> = (1..=8).map(|i| i as f64 * 2.0).collect();
        let ys: Vec<f64> = (1..=8).map(|i| i as f64).collect();
        let r = wilcoxon_one_sided(&xs, &ys).unwrap();
        assert_eq!(r.w_plus, 36.0);
        assert_eq!(r.p_value, 1.0 / 256.0);
    }

    #[test]
    fn normal_approximation_tracks_exact_near_the_limit() {
        let xs: Vec<f64> = (0..20).map(|i| (i as f64 * 1.7).sin() + 0.4).collect();
        let ys = vec![0.0; 20];
        let exact = wilcoxon_one_sided(&xs, &ys).unwrap();
        let mut xl = xs.clone();
        xl.push(0.41);
        let mut yl = ys.clone();
        yl.push(0.0);
        let approx = wilcoxon_one_sided(&xl, &yl).unwrap();
        assert!(exact.exact && !approx.exact);
        assert!((exact.p_value - approx.p_value).abs() < 0.05);
    }

    fn enumerate_upper_and_point(d: &[f64]) -> (f64, f64, f64) {
        let nz: Vec<f64> = d.iter().copied().filter(|v| *v != 0.0).collect();
        let ranks = average_ranks(&nz.iter().map(|v| v.abs()).collect::<Vec<_>>());
        let w: f64 = nz.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
        let m = nz.len();
        let (mut ge, mut eq) = (0u64, 0u64);
        for mask in 0u64..(1 << m) {
            let s: f64 = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
            if s >= w - 1e-9 {
                ge += 1;
            }
            if (s - w).abs() < 1e-9 {
                eq += 1;
            }
        }
        let total = (1u64 << m) as f64;
        (w, ge as f64 / total, eq as f64 / total)
    }

    proptest! {
        #[test]
        fn monotone_in_k_and_c(n in 1u64..40, c in 0u64..40, k in 1u64..40) {
            prop_assume!(c <= n && k <= n);
            let p = pass_at_k(n, c, k).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
            if k < n {
                prop_assert!(pass_at_k(n, c, k + 1).unwrap() >= p - 1e-12);
            }
            if c < n {
                prop_assert!(pass_at_k(n, c + 1, k).unwrap() >= p - 1e-12);
            }
            prop_assert_eq!(pass_at_k(n, c, n).unwrap() == 1.0, c >= 1);
        }

        #[test]
        fn conditioned_dominates_standard(cells in proptest::collection::vec((1u64..20, 0u64..20, 0u64..20), 1..8)) {
            let counts: Vec<EvalCounts> = cells
                .iter()
                .map(|&(n, w, c)| {
                    let w = w.min(n);
                    EvalCounts::new(n, w, c.min(w))
                })
                .collect();
            let total: EvalCounts = counts.iter().copied().sum();
            prop_assume!(total.w < total.n && total.c > 0);
            let std = aggregate_pass_at_k(&counts, 1, false, Pooling::Pooled).unwrap();
            let cond = aggregate_pass_at_k(&counts, 1, true, Pooling::Pooled).unwrap();
            prop_assert!(cond >= std);
        }

        #[test]
        fn exact_p_matches_enumeration(d in proptest::collection::vec(-6i32..=6, 5..=12)) {
            let xs: Vec<f64> = d.iter().map(|&v| v as f64).collect();
            let ys = vec![0.0; xs.len()];
            match wilcoxon_one_sided(&xs, &ys) {
                Ok(r) => {
                    let (w, p, _) = enumerate_upper_and_point(&xs);
                    prop_assert_eq!(r.w_plus, w);
                    prop_assert!((r.p_value - p).abs() < 1e-12);
                }
                Err(e) => prop_assert_eq!(e.code(), "too-few-pairs"),
            }
        }

        #[test]
        fn swapping_sides_flips_the_tail(d in proptest::collection::vec(-9i32..=9, 5..=12)) {
            let xs: Vec<f64> = d.iter().map(|&v| v as f64).collect();
            let ys = vec![0.0; xs.len()];
            if let (Ok(a), Ok(b)) = (wilcoxon_one_sided(&xs, &ys), wilcoxon_one_sided(&ys, &xs)) {
                let (_, _, point) = enumerate_upper_and_point(&xs);
                prop_assert!((a.p_value + b.p_value - 1.0 - point).abs() < 1e-12);
            }
        }
    }
}
