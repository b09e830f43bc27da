//! Consistency checks of the lazy `G_x` oracle against a naive
//! materialisation of the same graph.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::hardness::ptp::BitString;
use crate::hardness::triangle::{red_edge_stats, Edge, NaiveGraph, TriangleOracle, NAIVE_EDGE_CAP};
use crate::rng::RngHandle;

/// Edge samples are uniform when the chi-square p-value exceeds this.
pub const CHI_SQUARE_MIN_P: f64 = 0.001;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GxReport {
    pub m: u64,
    pub instances: usize,
    pub checks: Vec<Check>,
}

impl GxReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for GxReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{tag} {} ({})", c.name, c.detail)?;
        }
        Ok(())
    }
}

/// `m` must be `4·s²` for a positive integer `s` and at most the naive cap.
pub fn bits_for_edges(m: u64) -> Result<usize> {
    let root = (m as f64).sqrt().round() as u64;
    if m == 0 || root * root != m || !root.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "m must be a perfect square with an even root, got {m}"
        )));
    }
    if m > NAIVE_EDGE_CAP {
        return Err(Error::TooLarge(format!(
            "m = {m} exceeds the verification cap of {NAIVE_EDGE_CAP}"
        )));
    }
    Ok((m / 4) as usize)
}

pub fn random_bits<R: Rng + ?Sized>(len: usize, rng: &mut R) -> BitString {
    BitString::from_bits(&(0..len).map(|_| rng.random_bool(0.5)).collect::<Vec<_>>())
}

#[derive(Default)]
struct Tally {
    failures: u64,
    checked: u64,
    first: Option<String>,
}

impl Tally {
    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(what());
            }
        }
    }

    fn into_check(self, name: &'static str, unit: &str) -> Check {
        let detail = match self.first {
            None => format!("{} {unit} checked", self.checked),
            Some(f) => format!("{} of {} {unit} wrong, first: {f}", self.failures, self.checked),
        };
        Check {
            name,
            passed: self.failures == 0,
            detail,
        }
    }
}

/// Exhaustive comparison of degree, neighbor and pair answers with the
/// naive graph for `instances` random `x`, the triangle checks on the same
/// instances, and a chi-square test of `edge_samples` edge samples on the
/// first instance.
pub fn verify_gx(m: u64, instances: usize, edge_samples: u64, handle: &RngHandle) -> Result<GxReport> {
    let len = bits_for_edges(m)?;
    if instances == 0 {
        return Err(Error::invalid("need at least one instance"));
    }
    let mut rng = handle.rng();
    let xs: Vec<BitString> = (0..instances).map(|_| random_bits(len, &mut rng)).collect();

    let mut degree = Tally::default();
    let mut neighbor = Tally::default();
    let mut pair = Tally::default();
    let mut coherence = Tally::default();
    let mut one_red = Tally::default();
    let mut total = Tally::default();

    for x in &xs {
        let mut o = TriangleOracle::new(x.clone())?;
        let naive = NaiveGraph::build(x)?;
        let root = o.root_m();
        let vertices: Vec<_> = o.vertices().collect();
        for &v in &vertices {
            let d = o.degree(v)?;
            let naive_d = naive.adjacency[&v].len() as u64;
            degree.record(d == root as u64 && d == naive_d, || {
                format!("deg({v}) = {d}, naive {naive_d}")
            });

            let mut listed = Vec::with_capacity(root);
            for rank in 1..=2 * root {
                let w = o.neighbor(v, rank)?;
                if rank > root {
                    neighbor.record(w.is_none(), || format!("{v} rank {rank} past the degree gave {w:?}"));
                    continue;
                }
                match w {
                    Some(w) => {
                        listed.push(w);
                        let adj = o.pair(v, w)?;
                        coherence.record(adj, || format!("pair({v}, {w}) = 0 for rank {rank}"));
                    }
                    None => neighbor.record(false, || format!("{v} rank {rank} gave None")),
                }
            }
            listed.sort();
            let expected: Vec<_> = naive.adjacency[&v].iter().copied().collect();
            neighbor.record(listed == expected, || {
                format!("neighbor list of {v} differs from naive")
            });

            for &w in &vertices {
                if w != v {
                    let got = o.pair(v, w)?;
                    let want = naive.has_edge(v, w);
                    pair.record(got == want, || format!("pair({v}, {w}) = {got}, naive {want}"));
                }
            }
        }

        let stats = red_edge_stats(&o);
        let red: std::collections::BTreeSet<Edge> = stats.red_edges.iter().map(|e| e.endpoints()).collect();
        let triangles = naive.triangles();
        for &(a, b, c) in &triangles {
            let reds = [(a, b), (a, c), (b, c)].iter().filter(|e| red.contains(e)).count();
            one_red.record(reds == 1, || format!("triangle {a} {b} {c} has {reds} red edges"));
        }
        let naive_t = triangles.len() as u64;
        total.record(stats.triangle_total == naive_t, || {
            format!("formula gives {}, enumeration {naive_t}", stats.triangle_total)
        });
    }

    let mut checks = vec![
        degree.into_check("degree", "vertices"),
        neighbor.into_check("neighbor", "answers"),
        pair.into_check("pair", "pairs"),
        coherence.into_check("neighbor-pair coherence", "ranks"),
        one_red.into_check("one red edge per triangle", "triangles"),
        total.into_check("triangle total", "instances"),
    ];
    checks.push(edge_uniformity(&xs[0], edge_samples, &handle.split(1))?);
    Ok(GxReport { m, instances, checks })
}

/// Pearson chi-square of edge-sample counts against the uniform law on the
/// naive edge set.
pub fn edge_uniformity(x: &BitString, samples: u64, handle: &RngHandle) -> Result<Check> {
    let naive = NaiveGraph::build(x)?;
    let mut o = TriangleOracle::new(x.clone())?;
    let mut counts: BTreeMap<Edge, u64> = naive.edges.iter().map(|&e| (e, 0)).collect();
    let mut rng = handle.rng();
    let mut stray = 0u64;
    for _ in 0..samples {
        match counts.get_mut(&o.edge_sample(&mut rng)?) {
            Some(c) => *c += 1,
            None => stray += 1,
        }
    }
    let edges = counts.len() as f64;
    let expected = samples as f64 / edges;
    let stat: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dist = ChiSquared::new(edges - 1.0).map_err(|e| Error::invalid(e.to_string()))?;
    let p = dist.sf(stat);
    Ok(Check {
        name: "edge sample uniformity",
        passed: stray == 0 && p > CHI_SQUARE_MIN_P,
        detail: format!(
            "{samples} samples, chi2 = {stat:.2}, df = {}, p = {p:.4}, non-edges = {stray}",
            edges - 1.0
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_counts() {
        assert_eq!(bits_for_edges(16).unwrap(), 4);
        assert_eq!(bits_for_edges(256).unwrap(), 64);
        assert_eq!(bits_for_edges(36).unwrap(), 9);
        assert!(bits_for_edges(25).is_err());
        assert!(bits_for_edges(15).is_err());
        assert!(matches!(bits_for_edges(64 * 64 * 4), Err(Error::TooLarge(_))));
    }

    #[test]
    fn small_graphs_pass() {
        for m in [16, 64] {
            let r = verify_gx(m, 5, 20_000, &RngHandle::from_seed(m)).unwrap();
            assert!(r.passed(), "{r}");
            assert_eq!(r.checks.len(), 7);
        }
    }
}
