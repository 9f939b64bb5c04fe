//! Train/valid/test partitions.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::rng::{slot_key, stream_seed};

/// Default `(train, valid, test)` ratios.
pub const DEFAULT_RATIOS: [f64; 3] = [0.6, 0.2, 0.2];

/// Number of rank bins per attribute in the compositional split.
pub const COMPOSITIONAL_BINS: usize = 4;

#[derive(Debug, Error, PartialEq)]
pub enum PartitionError {
    #[error("need at least {need} samples, got {got}")]
    TooFew { need: usize, got: usize },
    #[error("ratios {0:?} must be non-negative and sum to 1")]
    Ratios([f64; 3]),
    #[error("percentiles {0} and {1} must be non-negative with a sum below 1")]
    Percentiles(f64, f64),
    #[error("values must be finite")]
    NonFinite,
    #[error("values are constant; quantiles are degenerate")]
    Constant,
    #[error("need at least 3 distinct categories, got {0}")]
    TooFewCategories(usize),
    #[error("attribute arrays differ in length ({0} vs {1})")]
    Length(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionResult {
    pub strategy: String,
    pub params: Json,
    pub attributes: Vec<String>,
    /// Sorted sample indices.
    pub train: Vec<usize>,
    pub valid: Vec<usize>,
    pub test: Vec<usize>,
}

impl PartitionResult {
    fn new(strategy: &str, params: Json, mut sets: [Vec<usize>; 3]) -> Self {
        for s in &mut sets {
            s.sort_unstable();
        }
        let [train, valid, test] = sets;
        Self { strategy: strategy.to_owned(), params, attributes: Vec::new(), train, valid, test }
    }

    pub fn with_attributes(mut self, attrs: &[&str]) -> Self {
        self.attributes = attrs.iter().map(|s| (*s).to_owned()).collect();
        self
    }

    pub fn sizes(&self) -> [usize; 3] {
        [self.train.len(), self.valid.len(), self.test.len()]
    }

    pub fn sets(&self) -> [&[usize]; 3] {
        [&self.train, &self.valid, &self.test]
    }

    /// Whether the three sets partition `0..n` exactly.
    pub fn is_partition_of(&self, n: usize) -> bool {
        let mut seen = vec![false; n];
        for set in self.sets() {
            for &i in set {
                if i >= n || seen[i] {
                    return false;
                }
                seen[i] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn to_json(&self) -> Json {
        serde_json::to_value(self).expect("serializable")
    }
}

fn check_ratios(r: [f64; 3]) -> Result<(), PartitionError> {
    if r.iter().all(|x| *x >= 0.0 && x.is_finite()) && (r.iter().sum::<f64>() - 1.0).abs() < 1e-9 {
        Ok(())
    } else {
        Err(PartitionError::Ratios(r))
    }
}

/// `floor(n * r)`, robust to ratios such as 0.2 not being exact in binary.
fn portion(n: usize, r: f64) -> usize {
    ((n as f64 * r) + 1e-9).floor() as usize
}

fn shuffled(n: usize, seed: u64, slot: &str) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, 0, slot_key(slot)));
    idx.shuffle(&mut rng);
    idx
}

/// Seeded shuffle then contiguous cut at the rounded cumulative boundaries
/// `round(n * r0)` and `round(n * (r0 + r1))`, so every set is within one
/// sample of its target.
pub fn split_iid(n: usize, ratios: [f64; 3], seed: u64) -> Result<PartitionResult, PartitionError> {
    if n < 3 {
        return Err(PartitionError::TooFew { need: 3, got: n });
    }
    iid_cut(n, ratios, seed)
}

/// [`split_iid`] without the minimum size, for attaching a default split to
/// tiny datasets: one sample gives sizes `(1, 0, 0)`.
pub fn iid_cut(n: usize, ratios: [f64; 3], seed: u64) -> Result<PartitionResult, PartitionError> {
    check_ratios(ratios)?;
    let idx = shuffled(n, seed, "split.iid");
    let cut = |r: f64| ((n as f64 * r).round() as usize).min(n);
    let (c1, c2) = (cut(ratios[0]), cut(ratios[0] + ratios[1]));
    let sets = [idx[..c1].to_vec(), idx[c1..c2].to_vec(), idx[c2..].to_vec()];
    Ok(PartitionResult::new("iid", json!({ "ratios": ratios, "seed": seed }), sets))
}

fn check_values(values: &[f64]) -> Result<(), PartitionError> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(PartitionError::NonFinite);
    }
    let first = values.first().copied().unwrap_or(0.0);
    if values.iter().all(|&v| v == first) {
        return Err(PartitionError::Constant);
    }
    Ok(())
}

/// Indices ordered by `(value, index)`.
fn ranked(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    idx
}

/// The lowest `floor(n * lo)` values go to valid, the highest
/// `floor(n * hi)` to test, the rest to train. Ties break by index.
pub fn split_stratified_continuous(values: &[f64], lo: f64, hi: f64) -> Result<PartitionResult, PartitionError> {
    if !(lo >= 0.0 && hi >= 0.0 && lo + hi < 1.0) {
        return Err(PartitionError::Percentiles(lo, hi));
    }
    if values.len() < 3 {
        return Err(PartitionError::TooFew { need: 3, got: values.len() });
    }
    check_values(values)?;
    let n = values.len();
    let order = ranked(values);
    let nv = portion(n, lo);
    let nt = portion(n, hi);
    let sets = [order[nv..n - nt].to_vec(), order[..nv].to_vec(), order[n - nt..].to_vec()];
    Ok(PartitionResult::new("stratified_continuous", json!({ "lo": lo, "hi": hi }), sets))
}

/// Whole categories are assigned to splits. Categories are visited from most
/// to least frequent (seeded shuffle among equal counts) and each goes to the
/// split whose sample count is furthest below its target, train winning ties.
pub fn split_stratified_discrete<T: Ord + Clone>(
    values: &[T],
    ratios: [f64; 3],
    seed: u64,
) -> Result<PartitionResult, PartitionError> {
    check_ratios(ratios)?;
    let mut groups: BTreeMap<T, Vec<usize>> = BTreeMap::new();
    for (i, v) in values.iter().enumerate() {
        groups.entry(v.clone()).or_default().push(i);
    }
    if groups.len() < 3 {
        return Err(PartitionError::TooFewCategories(groups.len()));
    }
    let mut cats: Vec<Vec<usize>> = groups.into_values().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, 0, slot_key("split.discrete")));
    cats.shuffle(&mut rng);
    cats.sort_by_key(|c| std::cmp::Reverse(c.len()));

    let n = values.len() as f64;
    let target = ratios.map(|r| r * n);
    let mut filled = [0.0f64; 3];
    let mut sets: [Vec<usize>; 3] = Default::default();
    let mut counts = [0usize; 3];
    for cat in cats {
        let mut best = 0;
        for j in 1..3 {
            if target[j] - filled[j] > target[best] - filled[best] {
                best = j;
            }
        }
        filled[best] += cat.len() as f64;
        counts[best] += 1;
        sets[best].extend(cat);
    }
    Ok(PartitionResult::new(
        "stratified_discrete",
        json!({ "ratios": ratios, "seed": seed, "categories": counts }),
        sets,
    ))
}

/// Rank bin of every sample: `floor(bins * rank / n)`, ranks by `(value, index)`.
pub fn rank_bins(values: &[f64], bins: usize) -> Vec<usize> {
    let n = values.len();
    let mut out = vec![0; n];
    for (rank, i) in ranked(values).into_iter().enumerate() {
        out[i] = rank * bins / n;
    }
    out
}

/// Split of the compositional cell `(bin of a, bin of b)`: with
/// `d = (bin_b - bin_a) mod 4`, train holds `d` in {0, 2}, valid `d = 1`
/// and test `d = 3`. 0, 1, 2 stand for train, valid, test.
pub fn compositional_cell(bin_a: usize, bin_b: usize) -> usize {
    let k = COMPOSITIONAL_BINS;
    match (bin_b + k - bin_a % k) % k {
        0 | 2 => 0,
        1 => 1,
        _ => 2,
    }
}

/// Joint split over two continuous attributes.
///
/// Each attribute is cut into four equal-count rank bins, giving a 4x4 grid.
/// Test takes one cell in every row and every column, valid another, train
/// the remaining two diagonals. Test cells hold no training samples, while
/// every bin of either attribute appears in all three splits with the same
/// weight, so the marginals match.
pub fn split_compositional(a: &[f64], b: &[f64]) -> Result<PartitionResult, PartitionError> {
    if a.len() != b.len() {
        return Err(PartitionError::Length(a.len(), b.len()));
    }
    let k = COMPOSITIONAL_BINS;
    if a.len() < k {
        return Err(PartitionError::TooFew { need: k, got: a.len() });
    }
    check_values(a)?;
    check_values(b)?;
    let (ba, bb) = (rank_bins(a, k), rank_bins(b, k));
    let mut sets: [Vec<usize>; 3] = Default::default();
    for i in 0..a.len() {
        sets[compositional_cell(ba[i], bb[i])].push(i);
    }
    Ok(PartitionResult::new("compositional", json!({ "bins": k }), sets))
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic(x: &[f64], y: &[f64]) -> f64 {
    if x.is_empty() || y.is_empty() {
        return 0.0;
    }
    let mut x = x.to_vec();
    let mut y = y.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / nx - j as f64 / ny).abs());
    }
    d
}
