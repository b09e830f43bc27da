//! Exact baselines and selection routines.
//!
//! - [`exact_h_index`]: linear time via capping at `n` and counting.
//! - [`select_kth`]: worst-case linear median-of-medians selection.
//! - [`discounted_h_index`]: largest element `p` with at least `α·p − d`
//!   elements `>= p`, by halving around the median.
//! - [`scaled_h_index`]: largest integer `q <= n_cap` with at least `α·q`
//!   entries `>= q`. This is what the strong estimator returns.
//!
//! All rational comparisons are done by cross-multiplication in `u128`.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// A non-negative rational `num / den`, `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::invalid("ratio with zero denominator"));
        }
        Ok(Self { num, den })
    }

    pub fn one() -> Self {
        Self { num: 1, den: 1 }
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `count >= self * q`
    fn covers(&self, count: u128, q: u128) -> bool {
        count * self.den as u128 >= q * self.num as u128
    }
}

/// Largest `h` with at least `h` entries `>= h`.
pub fn exact_h_index(values: &[u64]) -> usize {
    let n = values.len();
    let mut counts = vec![0usize; n + 1];
    for &v in values {
        counts[(v.min(n as u64)) as usize] += 1;
    }
    let mut at_least = 0;
    for h in (0..=n).rev() {
        at_least += counts[h];
        if at_least >= h {
            return h;
        }
    }
    0
}

/// A value tagged with its origin so that all elements compare strictly.
/// The derived order is lexicographic on `(value, origin_index)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaggedValue {
    pub value: u64,
    pub origin_index: usize,
}

impl TaggedValue {
    pub fn new(value: u64, origin_index: usize) -> Self {
        Self { value, origin_index }
    }
}

/// Tags `values[i]` with origin `i + 1`.
pub fn tag(values: &[u64]) -> Vec<TaggedValue> {
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| TaggedValue::new(v, i + 1))
        .collect()
}

/// The `k`-th smallest element (1-based). On return `c` is partitioned
/// around it: smaller elements before position `k - 1`, larger after.
pub fn select_kth<T: Ord + Copy>(c: &mut [T], k: usize) -> Result<T> {
    if k == 0 || k > c.len() {
        return Err(Error::invalid(format!("select_kth: rank {k} outside [1, {}]", c.len())));
    }
    let pos = select_in_place(c, k - 1);
    debug_assert_eq!(pos, k - 1);
    Ok(c[pos])
}

fn insertion_sort<T: Ord>(v: &mut [T]) {
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            j -= 1;
        }
    }
}

/// Three-way partition around `v[pivot]`; returns `(lt, gt)` with
/// `v[..lt] < p`, `v[lt..gt] == p`, `v[gt..] > p`.
fn partition3<T: Ord + Copy>(v: &mut [T], pivot: usize) -> (usize, usize) {
    let p = v[pivot];
    let (mut lt, mut i, mut gt) = (0, 0, v.len());
    while i < gt {
        match v[i].cmp(&p) {
            Ordering::Less => {
                v.swap(lt, i);
                lt += 1;
                i += 1;
            }
            Ordering::Greater => {
                gt -= 1;
                v.swap(i, gt);
            }
            Ordering::Equal => i += 1,
        }
    }
    (lt, gt)
}

/// Places the element of 0-based rank `k` at index `k` and returns `k`.
fn select_in_place<T: Ord + Copy>(v: &mut [T], k: usize) -> usize {
    let (mut lo, mut hi) = (0, v.len());
    loop {
        let len = hi - lo;
        if len <= 5 {
            insertion_sort(&mut v[lo..hi]);
            return k;
        }
        let pivot = lo + median_of_medians(&mut v[lo..hi]);
        let (lt, gt) = partition3(&mut v[lo..hi], pivot - lo);
        let (lt, gt) = (lo + lt, lo + gt);
        if k < lt {
            hi = lt;
        } else if k < gt {
            return k;
        } else {
            lo = gt;
        }
    }
}

/// Moves the median of each group of five to the front and selects their
/// median recursively. Returns the pivot's index within `v`.
fn median_of_medians<T: Ord + Copy>(v: &mut [T]) -> usize {
    let groups = v.len().div_ceil(5);
    for g in 0..groups {
        let start = g * 5;
        let end = (start + 5).min(v.len());
        insertion_sort(&mut v[start..end]);
        v.swap(g, start + (end - start - 1) / 2);
    }
    select_in_place(&mut v[..groups], (groups - 1) / 2)
}

/// Largest element `p` of `c` (as a value) such that at least `α·p − d`
/// elements of `c` are `>= p` under the tie-broken order.
///
/// Halves around the upper median: if the median satisfies the predicate
/// the answer lies in the upper half, where counts are unchanged; otherwise
/// it lies in the lower half, and every element of the discarded upper half
/// still counts towards it, so the discount grows by the upper half's size.
/// `c` is permuted.
///
/// A single-element input is returned as is, the caller vouching for the
/// promise. When halving bottoms out on an element that fails the predicate
/// the promise was broken and `PromiseViolated` is reported.
pub fn discounted_h_index(c: &mut [TaggedValue], d: u64, alpha: Ratio) -> Result<u64> {
    match c.len() {
        0 => return Err(Error::PromiseViolated("discounted_h_index on an empty array".into())),
        1 => return Ok(c[0].value),
        _ => {}
    }
    let (mut lo, mut hi, mut discount) = (0usize, c.len(), d as u128);
    loop {
        let t = hi - lo;
        if t == 1 {
            let p = c[lo];
            return if alpha.covers(1 + discount, p.value as u128) {
                Ok(p.value)
            } else {
                Err(Error::PromiseViolated(format!(
                    "no element satisfies the discounted predicate (base element {})",
                    p.value
                )))
            };
        }
        let mid = t / 2;
        select_in_place(&mut c[lo..hi], mid);
        let p = c[lo + mid];
        let upper = (t - mid) as u128;
        if alpha.covers(upper + discount, p.value as u128) {
            lo += mid;
        } else {
            hi = lo + mid;
            discount += upper;
        }
    }
}

/// Largest integer `q` in `[0, n_cap]` with `|{j : B[j] >= q}| >= α·q`.
///
/// Sorts a capped copy of `B` (`O(k log k)`) and scans the count function.
pub fn scaled_h_index(b: &[u64], alpha: Ratio, n_cap: u64) -> u64 {
    let mut sorted: Vec<u64> = b.iter().map(|&v| v.min(n_cap)).collect();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut groups: Vec<(u64, u64)> = Vec::new();
    for v in sorted {
        match groups.last_mut() {
            Some((last, count)) if *last == v => *count += 1,
            _ => groups.push((v, 1)),
        }
    }
    scaled_h_index_grouped(groups, alpha, n_cap)
}

/// [`scaled_h_index`] over `(value, multiplicity)` groups given in
/// non-increasing value order. Stops consuming groups as soon as the answer
/// is determined, so lazily sampled histograms are only drawn as far as
/// needed.
pub fn scaled_h_index_grouped<I>(groups: I, alpha: Ratio, n_cap: u64) -> u64
where
    I: IntoIterator<Item = (u64, u64)>,
{
    // largest q <= upper with count >= α·q, for a fixed count
    let best_below = |count: u128, upper: u64| -> u64 {
        if alpha.num == 0 {
            upper
        } else {
            let q = count * alpha.den as u128 / alpha.num as u128;
            q.min(upper as u128) as u64
        }
    };
    let mut count: u128 = 0;
    let mut upper = n_cap;
    for (value, mult) in groups {
        let value = value.min(n_cap);
        // thresholds in (value, upper] see exactly `count` entries
        let q = best_below(count, upper);
        if q > value {
            return q;
        }
        count += mult as u128;
        upper = value;
    }
    best_below(count, upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_h_index(a: &[u64]) -> usize {
        (0..=a.len())
            .rev()
            .find(|&h| a.iter().filter(|&&v| v >= h as u64).count() >= h)
            .unwrap()
    }

    fn brute_scaled(b: &[u64], alpha: Ratio, n_cap: u64) -> u64 {
        (0..=n_cap)
            .rev()
            .find(|&q| {
                let c = b.iter().filter(|&&v| v >= q).count() as f64;
                // exact: c * den >= q * num
                (c as u128) * alpha.den as u128 >= q as u128 * alpha.num as u128
            })
            .unwrap()
    }

    fn brute_discounted(c: &[TaggedValue], d: u64, alpha: Ratio) -> Option<u64> {
        c.iter()
            .filter(|p| {
                let count = c.iter().filter(|q| *q >= *p).count() as u128;
                (count + d as u128) * alpha.den as u128 >= p.value as u128 * alpha.num as u128
            })
            .max()
            .map(|p| p.value)
    }

    #[test]
    fn exact_examples() {
        assert_eq!(exact_h_index(&[0, 0, 0]), 0);
        assert_eq!(exact_h_index(&[4, 4, 4, 4]), 4);
        assert_eq!(exact_h_index(&[3, 0, 6, 1, 5]), 3);
        assert_eq!(brute_h_index(&[3, 0, 6, 1, 5]), 3);
    }

    #[test]
    fn exact_is_cap_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let n = rng.random_range(1..60);
            let a: Vec<u64> = (0..n).map(|_| rng.random_range(0..200)).collect();
            let capped: Vec<u64> = a.iter().map(|&v| v.min(n as u64)).collect();
            assert_eq!(exact_h_index(&a), exact_h_index(&capped));
        }
    }

    #[test]
    fn select_examples() {
        let mut c = vec![TaggedValue::new(5, 1)];
        assert_eq!(select_kth(&mut c, 1).unwrap(), TaggedValue::new(5, 1));
        let mut c = vec![TaggedValue::new(2, 3), TaggedValue::new(2, 1), TaggedValue::new(2, 2)];
        assert_eq!(select_kth(&mut c, 2).unwrap(), TaggedValue::new(2, 2));
        assert!(select_kth(&mut c, 0).is_err());
        assert!(select_kth(&mut c, 4).is_err());
    }

    #[test]
    fn select_median_of_1001() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut c: Vec<TaggedValue> = (0..1001)
            .map(|i| TaggedValue::new(rng.random_range(0..10_000), i))
            .collect();
        let mut sorted = c.clone();
        sorted.sort();
        assert_eq!(select_kth(&mut c, 501).unwrap(), sorted[500]);
        // partitioned around the answer
        assert!(c[..500].iter().all(|x| *x < sorted[500]));
        assert!(c[501..].iter().all(|x| *x > sorted[500]));
    }

    #[test]
    fn select_with_raw_duplicates() {
        // untagged duplicates exercise the equal band of the partition
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let len = rng.random_range(1..300);
            let v: Vec<u64> = (0..len).map(|_| rng.random_range(0..4)).collect();
            let mut sorted = v.clone();
            sorted.sort();
            let k = rng.random_range(1..=len);
            let mut w = v.clone();
            assert_eq!(select_kth(&mut w, k).unwrap(), sorted[k - 1]);
        }
    }

    #[test]
    fn discounted_examples() {
        assert_eq!(discounted_h_index(&mut tag(&[5]), 0, Ratio::one()).unwrap(), 5);
        assert_eq!(
            discounted_h_index(&mut tag(&[3, 0, 6, 1, 5]), 0, Ratio::one()).unwrap(),
            3
        );
        assert_eq!(
            discounted_h_index(&mut tag(&[10]), 0, Ratio::new(1, 10).unwrap()).unwrap(),
            10
        );
    }

    #[test]
    fn broken_promise_reported() {
        // no element of [5, 6] has 5 (resp. 6) elements above it
        assert!(matches!(
            discounted_h_index(&mut tag(&[5, 6]), 0, Ratio::one()),
            Err(Error::PromiseViolated(_))
        ));
        assert_eq!(discounted_h_index(&mut tag(&[5, 6]), 4, Ratio::one()).unwrap(), 5);
        assert_eq!(discounted_h_index(&mut tag(&[5, 6]), 5, Ratio::one()).unwrap(), 6);
    }

    #[test]
    fn discount_carried_to_lower_half() {
        // Moving the discount to the upper half instead would accept 6 here.
        let mut c = tag(&[3, 0, 6, 1, 5]);
        assert_eq!(discounted_h_index(&mut c, 0, Ratio::one()).unwrap(), 3);
        let mut c = tag(&[0, 1, 1, 2, 9, 9, 9, 9]);
        assert_eq!(
            discounted_h_index(&mut c, 0, Ratio::one()).unwrap(),
            brute_discounted(&tag(&[0, 1, 1, 2, 9, 9, 9, 9]), 0, Ratio::one()).unwrap()
        );
    }

    #[test]
    fn scaled_examples() {
        assert_eq!(scaled_h_index(&[0, 0], Ratio::new(1, 2).unwrap(), 10), 0);
        assert_eq!(scaled_h_index(&[10, 0], Ratio::new(1, 2).unwrap(), 4), 2);
        // k copies of v with α = k/n recover v
        let (k, n, v) = (7u64, 50u64, 31u64);
        assert_eq!(scaled_h_index(&vec![v; k as usize], Ratio::new(k, n).unwrap(), n), v);
        // the gap between the two routines: integer answer 2, no element answer
        assert_eq!(scaled_h_index(&[10, 10], Ratio::new(1, 2).unwrap(), 10), 4);
        assert!(discounted_h_index(&mut tag(&[10, 10]), 0, Ratio::new(1, 2).unwrap()).is_err());
    }

    #[test]
    fn scaled_alpha_above_one() {
        // α = 3: need 3q entries >= q
        let b = [5, 5, 5, 5, 5, 5, 1];
        assert_eq!(
            scaled_h_index(&b, Ratio::new(3, 1).unwrap(), 10),
            brute_scaled(&b, Ratio::new(3, 1).unwrap(), 10)
        );
        assert_eq!(scaled_h_index(&b, Ratio::new(3, 1).unwrap(), 10), 2);
    }

    proptest! {
        #[test]
        fn exact_matches_brute(a in prop::collection::vec(0u64..40, 1..40)) {
            prop_assert_eq!(exact_h_index(&a), brute_h_index(&a));
        }

        #[test]
        fn select_matches_sort(v in prop::collection::vec(0u64..20, 1..200), k_frac in 0.0f64..1.0) {
            let mut c = tag(&v);
            let mut sorted = c.clone();
            sorted.sort();
            let k = 1 + ((c.len() as f64 * k_frac) as usize).min(c.len() - 1);
            prop_assert_eq!(select_kth(&mut c, k).unwrap(), sorted[k - 1]);
        }

        #[test]
        fn discounted_matches_brute(v in prop::collection::vec(0u64..100, 2..120), d in 0u64..20, num in 0u64..=8) {
            let alpha = Ratio::new(num, 8).unwrap();
            let c = tag(&v);
            let expected = brute_discounted(&c, d, alpha);
            let got = discounted_h_index(&mut c.clone(), d, alpha).ok();
            prop_assert_eq!(got, expected);
        }

        #[test]
        fn scaled_matches_brute(b in prop::collection::vec(0u64..80, 1..60), num in 0u64..200, den in 1u64..100, n_cap in 0u64..100) {
            let alpha = Ratio::new(num, den).unwrap();
            prop_assert_eq!(scaled_h_index(&b, alpha, n_cap), brute_scaled(&b, alpha, n_cap));
        }

        #[test]
        fn scaled_count_function_crossing(b in prop::collection::vec(0u64..50, 1..40), num in 1u64..40, den in 1u64..40) {
            let alpha = Ratio::new(num, den).unwrap();
            let q = scaled_h_index(&b, alpha, 60);
            let count = |q: u64| b.iter().filter(|&&v| v >= q).count() as u128;
            // non-increasing counts, crossing exactly at q
            prop_assert!((0..60).all(|x| count(x) >= count(x + 1)));
            prop_assert!(alpha.covers(count(q), q as u128));
            if q < 60 {
                prop_assert!(!alpha.covers(count(q + 1), q as u128 + 1));
            }
        }
    }
}
