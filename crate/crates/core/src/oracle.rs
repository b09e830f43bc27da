//! Query-counted read access to an integer array `A[1:n]`.
//!
//! Estimators only see the array through an [`ArrayOracle`]. Every answered
//! index read increments the counter by one; an optional budget refuses the
//! first read that would push the counter past the cap.
//!
//! Besides single reads the oracle answers two bulk sampling queries,
//! [`ArrayOracle::sample_count_at_least`] and [`ArrayOracle::sample_histogram`].
//! Each one stands for `k` reads at indices drawn independently and uniformly
//! with repetition, is charged as exactly `k` queries, and returns the same
//! distribution as performing those reads one by one. They are served from a
//! value histogram built once at construction, which makes sample sizes far
//! beyond `n` affordable in Monte Carlo experiments.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, OracleError, Result};
use crate::rng::RngHandle;

/// Immutable array contents plus the descending value histogram.
///
/// The histogram is built once at construction over `min(A[i], n)`; the
/// h-index never exceeds `n`, so the cap preserves every threshold question
/// an estimator asks. Single reads return the stored value unchanged.
#[derive(Debug, Clone)]
pub struct ArrayData {
    values: Vec<u64>,
    // distinct values, strictly descending
    desc_values: Vec<u64>,
    // multiplicity of desc_values[i]
    multiplicity: Vec<u64>,
    // number of entries >= desc_values[i]
    at_least: Vec<u64>,
}

impl ArrayData {
    pub fn new(values: Vec<u64>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::invalid("array must have at least one entry"));
        }
        let cap = n as u64;
        let mut counts = vec![0u64; n + 1];
        for &v in &values {
            counts[v.min(cap) as usize] += 1;
        }
        let mut desc_values = Vec::new();
        let mut multiplicity = Vec::new();
        let mut at_least = Vec::new();
        let mut cum = 0;
        for v in (0..=n).rev() {
            if counts[v] > 0 {
                cum += counts[v];
                desc_values.push(v as u64);
                multiplicity.push(counts[v]);
                at_least.push(cum);
            }
        }
        Ok(Self {
            values,
            desc_values,
            multiplicity,
            at_least,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The stored values, 0-based. Not query-counted; for baselines and tests.
    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// Number of entries with `min(value, n) >= threshold`.
    pub fn count_at_least(&self, threshold: u64) -> u64 {
        // desc_values is descending: count prefix of entries >= threshold
        let idx = self.desc_values.partition_point(|&v| v >= threshold);
        if idx == 0 {
            0
        } else {
            self.at_least[idx - 1]
        }
    }

    /// Distinct capped values in descending order with their multiplicities.
    pub fn histogram(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.desc_values.iter().copied().zip(self.multiplicity.iter().copied())
    }
}

#[derive(Debug, Clone)]
pub struct ArrayOracle {
    data: Arc<ArrayData>,
    query_count: u64,
    budget: Option<u64>,
}

impl ArrayOracle {
    pub fn new(values: Vec<u64>) -> Result<Self> {
        Ok(Self::from_shared(Arc::new(ArrayData::new(values)?)))
    }

    /// A fresh oracle (counter at zero, no budget) over shared contents.
    pub fn from_shared(data: Arc<ArrayData>) -> Self {
        Self {
            data,
            query_count: 0,
            budget: None,
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn query_count(&self) -> u64 {
        self.query_count
    }

    pub fn budget(&self) -> Option<u64> {
        self.budget
    }

    pub fn data(&self) -> &Arc<ArrayData> {
        &self.data
    }

    /// Reads `A[i]` (1-based).
    pub fn read(&mut self, i: usize) -> std::result::Result<u64, OracleError> {
        let n = self.len();
        if i == 0 || i > n {
            return Err(OracleError::IndexOutOfRange { index: i, len: n });
        }
        self.charge(1)?;
        Ok(self.data.values[i - 1])
    }

    /// Accounts for `k` reads. On overflow the reads that still fit under
    /// the cap are answered (and counted) and the rest are refused.
    fn charge(&mut self, k: u64) -> std::result::Result<(), OracleError> {
        if let Some(budget) = self.budget {
            if self.query_count + k > budget {
                self.query_count = budget;
                return Err(OracleError::BudgetExhausted { budget });
            }
        }
        self.query_count += k;
        Ok(())
    }

    /// Draws `k` uniform indices with repetition and returns how many of the
    /// read values are `>= threshold`. Charged as `k` reads.
    pub fn sample_count_at_least<R: Rng + ?Sized>(
        &mut self,
        k: u64,
        threshold: u64,
        rng: &mut R,
    ) -> std::result::Result<u64, OracleError> {
        self.charge(k)?;
        let hits = self.data.count_at_least(threshold);
        let n = self.len() as u64;
        Ok(binomial(rng, k, hits, n))
    }

    /// Draws `k` uniform indices with repetition and returns the multiset of
    /// read values as a lazy descending histogram. Charged as `k` reads.
    pub fn sample_histogram<'a, R: Rng + ?Sized>(
        &'a mut self,
        k: u64,
        rng: &'a mut R,
    ) -> std::result::Result<SampledHistogram<'a, R>, OracleError> {
        self.charge(k)?;
        let population = self.len() as u64;
        Ok(SampledHistogram {
            data: &self.data,
            rng,
            remaining_draws: k,
            remaining_population: population,
            group: 0,
        })
    }
}

/// Binomial(k, hits/population) with exact handling of the degenerate ends.
fn binomial<R: Rng + ?Sized>(rng: &mut R, k: u64, hits: u64, population: u64) -> u64 {
    if hits == 0 || k == 0 {
        0
    } else if hits >= population {
        k
    } else {
        let p = hits as f64 / population as f64;
        Binomial::new(k, p).expect("probability in (0,1)").sample(rng)
    }
}

/// Multinomial sample of a value histogram, drawn group by group in
/// descending value order via conditional binomials. Groups that received no
/// draws are skipped.
pub struct SampledHistogram<'a, R: Rng + ?Sized> {
    data: &'a ArrayData,
    rng: &'a mut R,
    remaining_draws: u64,
    remaining_population: u64,
    group: usize,
}

impl<R: Rng + ?Sized> Iterator for SampledHistogram<'_, R> {
    type Item = (u64, u64);

    fn next(&mut self) -> Option<(u64, u64)> {
        while self.remaining_draws > 0 && self.group < self.data.desc_values.len() {
            let value = self.data.desc_values[self.group];
            let mult = self.data.multiplicity[self.group];
            self.group += 1;
            let drawn = binomial(self.rng, self.remaining_draws, mult, self.remaining_population);
            self.remaining_draws -= drawn;
            self.remaining_population -= mult;
            if drawn > 0 {
                return Some((value, drawn));
            }
        }
        None
    }
}

/// `k` indices drawn independently and uniformly from `[1, n]`.
pub fn sample_indices(handle: &RngHandle, n: usize, k: usize) -> Result<Vec<usize>> {
    if n == 0 || k == 0 {
        return Err(Error::invalid(format!(
            "sample_indices needs n >= 1 and k >= 1 (n={n}, k={k})"
        )));
    }
    let mut rng = handle.rng();
    Ok((0..k).map(|_| rng.random_range(1..=n)).collect())
}

/// Parses the array file format: one non-negative decimal integer per line,
/// no header. Blank trailing lines are ignored.
pub fn parse_array(text: &str) -> Result<Vec<u64>> {
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v = line
            .parse::<u64>()
            .map_err(|e| Error::Parse(format!("line {}: {:?}: {e}", lineno + 1, line)))?;
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::Parse("array file has no entries".into()));
    }
    Ok(values)
}

pub fn load_array(path: &std::path::Path) -> Result<Vec<u64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_array(&text)
}

pub fn format_array(values: &[u64]) -> String {
    let mut out = String::with_capacity(values.len() * 4);
    for v in values {
        out.push_str(&v.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn read_counts_queries() {
        let mut o = ArrayOracle::new(vec![7, 0, 3]).unwrap();
        assert_eq!(o.query_count(), 0);
        assert_eq!(o.read(2), Ok(0));
        assert_eq!(o.query_count(), 1);
    }

    #[test]
    fn repeated_reads_count_twice() {
        let mut o = ArrayOracle::new(vec![5]).unwrap();
        assert_eq!(o.read(1), Ok(5));
        assert_eq!(o.read(1), Ok(5));
        assert_eq!(o.query_count(), 2);
    }

    #[test]
    fn budget_refuses_without_counting() {
        let mut o = ArrayOracle::new(vec![1, 2]).unwrap().with_budget(1);
        assert_eq!(o.read(1), Ok(1));
        assert_eq!(o.read(2), Err(OracleError::BudgetExhausted { budget: 1 }));
        assert_eq!(o.query_count(), 1);
    }

    #[test]
    fn out_of_range() {
        let mut o = ArrayOracle::new(vec![1, 2]).unwrap();
        assert_eq!(o.read(0), Err(OracleError::IndexOutOfRange { index: 0, len: 2 }));
        assert_eq!(o.read(3), Err(OracleError::IndexOutOfRange { index: 3, len: 2 }));
        assert_eq!(o.query_count(), 0);
    }

    #[test]
    fn empty_array_rejected() {
        assert!(ArrayOracle::new(vec![]).is_err());
    }

    #[test]
    fn histogram_capped_on_ingest() {
        let d = ArrayData::new(vec![100, 1, 2]).unwrap();
        assert_eq!(d.values(), &[100, 1, 2]);
        assert_eq!(d.count_at_least(2), 2);
        assert_eq!(d.count_at_least(4), 0);
        assert_eq!(d.count_at_least(0), 3);
        assert_eq!(d.histogram().collect::<Vec<_>>(), vec![(3, 1), (2, 1), (1, 1)]);
    }

    #[test]
    fn bulk_charge_respects_budget() {
        let mut o = ArrayOracle::new(vec![1; 10]).unwrap().with_budget(15);
        let mut rng = RngHandle::from_seed(1).rng();
        assert_eq!(o.sample_count_at_least(10, 1, &mut rng), Ok(10));
        assert!(o.sample_count_at_least(10, 1, &mut rng).is_err());
        assert_eq!(o.query_count(), 15);
    }

    #[test]
    fn histogram_sample_sums_to_k() {
        let mut o = ArrayOracle::new((0..50).collect()).unwrap();
        let mut rng = RngHandle::from_seed(3).rng();
        let groups: Vec<_> = o.sample_histogram(1000, &mut rng).unwrap().collect();
        assert_eq!(groups.iter().map(|g| g.1).sum::<u64>(), 1000);
        assert!(groups.windows(2).all(|w| w[0].0 > w[1].0));
        assert_eq!(o.query_count(), 1000);
    }

    #[test]
    fn array_file_format() {
        assert_eq!(parse_array("3\n0\n6\n").unwrap(), vec![3, 0, 6]);
        assert_eq!(parse_array(&format_array(&[1, 2, 3])).unwrap(), vec![1, 2, 3]);
        assert!(parse_array("1\n-2\n").is_err());
        assert!(parse_array("").is_err());
    }

    #[test]
    fn sample_indices_single_support() {
        assert_eq!(sample_indices(&RngHandle::from_seed(9), 1, 5).unwrap(), vec![1; 5]);
    }

    #[test]
    fn sample_indices_rejects_zero() {
        assert!(sample_indices(&RngHandle::from_seed(9), 0, 5).is_err());
        assert!(sample_indices(&RngHandle::from_seed(9), 5, 0).is_err());
    }

    #[test]
    fn sample_indices_deterministic() {
        let h = RngHandle::new(12345, 2);
        let a = sample_indices(&h, 1_000_000, 100_000).unwrap();
        let b = sample_indices(&h, 1_000_000, 100_000).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sample_indices_uniform_on_four() {
        let draws = sample_indices(&RngHandle::from_seed(4), 4, 100_000).unwrap();
        let mut counts = [0usize; 4];
        for i in draws {
            counts[i - 1] += 1;
        }
        for c in counts {
            let f = c as f64 / 100_000.0;
            assert!((f - 0.25).abs() <= 0.01, "frequency {f}");
        }
    }
}
