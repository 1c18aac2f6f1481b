//! Partitions induced by variable subsets and the influence score.
//!
//! For a subset `X` the observations are grouped by their joint level codes
//! on `X`. With `n_j` observations and local response mean `Ȳ_j` in cell `j`:
//!
//! ```text
//! raw          = Σ_j n_j² (Ȳ_j − Ȳ)²
//! standardized = raw / (n · s²),   s² = (1/n) Σ_i (Y_i − Ȳ)²
//! ```
//!
//! Only occupied cells are materialized.

use serde::{Deserialize, Serialize};

use crate::data::DiscreteDataset;
use crate::error::{Error, Result};

/// Mean and population variance (divisor `n`) of the response.
pub fn global_stats(ds: &DiscreteDataset) -> (f64, f64) {
    mean_and_variance(ds.y())
}

pub(crate) fn mean_and_variance(y: &[f64]) -> (f64, f64) {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

pub(crate) fn validate_subset(ds: &DiscreteDataset, subset: &[usize]) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::InvalidSubset("subset is empty".into()));
    }
    let mut seen = vec![false; ds.p()];
    for &v in subset {
        if v >= ds.p() {
            return Err(Error::InvalidSubset(format!(
                "index {v} out of range for {} variables",
                ds.p()
            )));
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(Error::InvalidSubset(format!("index {v} repeated")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub count: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Cell id of each observation; ids follow first appearance in row order.
    pub cell_of: Vec<u32>,
    pub cells: Vec<Cell>,
    pub subset: Vec<usize>,
}

impl Partition {
    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }
}

/// Reusable buffers for repeated partition/score evaluation on one dataset.
pub(crate) struct Scorer<'a> {
    ds: &'a DiscreteDataset,
    ybar: f64,
    norm: f64,
    ids: Vec<u32>,
    remap: Vec<u32>,
    counts: Vec<u32>,
    sums: Vec<f64>,
}

impl<'a> Scorer<'a> {
    pub(crate) fn new(ds: &'a DiscreteDataset) -> Result<Self> {
        let (ybar, s2) = global_stats(ds);
        if s2 <= 0.0 {
            return Err(Error::DegenerateResponse);
        }
        Ok(Self {
            ds,
            ybar,
            norm: ds.n() as f64 * s2,
            ids: Vec::with_capacity(ds.n()),
            remap: Vec::new(),
            counts: Vec::new(),
            sums: Vec::new(),
        })
    }

    pub(crate) fn normalizer(&self) -> f64 {
        self.norm
    }

    /// Fills `self.ids` with cell keys and returns an exclusive upper bound on them.
    /// Keys are refined one variable at a time and compacted to first-appearance
    /// order whenever the key space would outgrow the observation count.
    fn assign(&mut self, subset: &[usize]) -> usize {
        let n = self.ds.n();
        let dense_limit = (4 * n).max(4096);
        let first = subset[0];
        self.ids.clear();
        self.ids.extend_from_slice(self.ds.column(first));
        let mut bound = self.ds.levels()[first] as usize;
        for &v in &subset[1..] {
            let lv = self.ds.levels()[v] as usize;
            if bound * lv > dense_limit {
                bound = self.compact(bound);
            }
            for (id, &c) in self.ids.iter_mut().zip(self.ds.column(v)) {
                *id = *id * lv as u32 + c;
            }
            bound *= lv;
        }
        bound
    }

    fn compact(&mut self, bound: usize) -> usize {
        self.remap.clear();
        self.remap.resize(bound, u32::MAX);
        let mut next = 0u32;
        for id in self.ids.iter_mut() {
            let slot = &mut self.remap[*id as usize];
            if *slot == u32::MAX {
                *slot = next;
                next += 1;
            }
            *id = *slot;
        }
        next as usize
    }

    fn accumulate(&mut self, bound: usize) {
        self.counts.clear();
        self.counts.resize(bound, 0);
        self.sums.clear();
        self.sums.resize(bound, 0.0);
        for (&id, &y) in self.ids.iter().zip(self.ds.y()) {
            self.counts[id as usize] += 1;
            self.sums[id as usize] += y;
        }
    }

    /// Raw score `Σ n_j² (Ȳ_j − Ȳ)²`. The subset must already be validated.
    pub(crate) fn raw(&mut self, subset: &[usize]) -> f64 {
        let bound = self.assign(subset);
        self.accumulate(bound);
        let ybar = self.ybar;
        self.counts
            .iter()
            .zip(&self.sums)
            .filter(|(&c, _)| c > 0)
            .map(|(&c, &s)| {
                let c = c as f64;
                c * c * (s / c - ybar).powi(2)
            })
            .sum()
    }

    pub(crate) fn standardized(&mut self, subset: &[usize]) -> f64 {
        self.raw(subset) / self.norm
    }
}

/// Groups observations by their joint codes on `subset`.
pub fn make_partition(ds: &DiscreteDataset, subset: &[usize]) -> Result<Partition> {
    validate_subset(ds, subset)?;
    let n = ds.n();
    let mut cell_of = vec![0u32; n];
    let mut cells: Vec<Cell> = Vec::new();
    let mut sums: Vec<f64> = Vec::new();
    let mut key_to_cell = std::collections::HashMap::new();
    let mut key = Vec::with_capacity(subset.len());
    for (i, (slot, &y)) in cell_of.iter_mut().zip(ds.y()).enumerate() {
        key.clear();
        key.extend(subset.iter().map(|&v| ds.column(v)[i]));
        let next = cells.len() as u32;
        let id = *key_to_cell.entry(key.clone()).or_insert(next);
        if id == next {
            cells.push(Cell {
                count: 0,
                mean: 0.0,
            });
            sums.push(0.0);
        }
        cells[id as usize].count += 1;
        sums[id as usize] += y;
        *slot = id;
    }
    for (cell, s) in cells.iter_mut().zip(sums) {
        cell.mean = s / cell.count as f64;
    }
    Ok(Partition {
        cell_of,
        cells,
        subset: subset.to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IScoreValue {
    pub raw: f64,
    pub standardized: f64,
    pub subset: Vec<usize>,
    pub n: usize,
    pub variance: f64,
}

/// JSON form of an [`IScoreValue`], with variables named.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IScoreRecord {
    pub subset: Vec<String>,
    pub raw: f64,
    pub standardized: f64,
    pub n: usize,
}

impl IScoreValue {
    pub fn record(&self, names: &[String]) -> IScoreRecord {
        IScoreRecord {
            subset: self.subset.iter().map(|&v| names[v].clone()).collect(),
            raw: self.raw,
            standardized: self.standardized,
            n: self.n,
        }
    }
}

/// Raw and standardized I-score of `subset`.
pub fn iscore(ds: &DiscreteDataset, subset: &[usize]) -> Result<IScoreValue> {
    validate_subset(ds, subset)?;
    let mut scorer = Scorer::new(ds)?;
    let raw = scorer.raw(subset);
    let (_, variance) = global_stats(ds);
    Ok(IScoreValue {
        raw,
        standardized: raw / scorer.normalizer(),
        subset: subset.to_vec(),
        n: ds.n(),
        variance,
    })
}

/// Standardized marginal I-score of every variable, in column order.
pub fn marginal_scores(ds: &DiscreteDataset) -> Result<Vec<f64>> {
    let mut scorer = Scorer::new(ds)?;
    Ok((0..ds.p()).map(|j| scorer.standardized(&[j])).collect())
}

/// Standardized I-score of the partition given by an arbitrary code vector,
/// e.g. a derived feature such as `X1·X2` or `X1 + X2`.
pub fn iscore_of_codes(codes: &[u32], y: &[f64]) -> Result<f64> {
    let ds = DiscreteDataset::new(vec![codes.to_vec()], y.to_vec(), vec!["derived".into()])?;
    Ok(iscore(&ds, &[0])?.standardized)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(cols: Vec<Vec<u32>>, y: Vec<f64>) -> DiscreteDataset {
        let p = cols.len();
        DiscreteDataset::new(cols, y, DiscreteDataset::default_names(p)).unwrap()
    }

    #[test]
    fn single_binary_variable_splits_in_two() {
        let d = ds(vec![vec![0, 1, 0, 1]], vec![0.0, 1.0, 1.0, 0.0]);
        let part = make_partition(&d, &[0]).unwrap();
        assert_eq!(part.num_cells(), 2);
        assert!(part.cells.iter().all(|c| c.count == 2));
        assert_eq!(part.cell_of, vec![0, 1, 0, 1]);
    }

    #[test]
    fn full_factorial_gives_singletons() {
        let cols = (0..3)
            .map(|b| (0..8u32).map(|i| (i >> b) & 1).collect())
            .collect();
        let d = ds(cols, (0..8).map(|i| i as f64).collect());
        let part = make_partition(&d, &[0, 1, 2]).unwrap();
        assert_eq!(part.num_cells(), 8);
        assert!(part.cells.iter().all(|c| c.count == 1));
    }

    #[test]
    fn hand_evaluated_score() {
        // cells {1,1} and {0,0}: raw = 2²·0.25 + 2²·0.25 = 2; s² = 0.25
        let d = ds(vec![vec![1, 1, 0, 0]], vec![1.0, 1.0, 0.0, 0.0]);
        let v = iscore(&d, &[0]).unwrap();
        assert_eq!(v.raw, 2.0);
        assert_eq!(v.standardized, 2.0);
        assert_eq!(v.variance, 0.25);
    }

    #[test]
    fn zero_discrepancy_scores_zero() {
        let d = ds(vec![vec![0, 0, 1, 1]], vec![1.0, 0.0, 1.0, 0.0]);
        assert_eq!(iscore(&d, &[0]).unwrap().raw, 0.0);
    }

    #[test]
    fn global_stats_examples() {
        let d = ds(vec![vec![0, 1]], vec![0.0, 1.0]);
        assert_eq!(global_stats(&d), (0.5, 0.25));
        let c = ds(vec![vec![0, 1, 0]], vec![3.0; 3]);
        assert_eq!(global_stats(&c), (3.0, 0.0));
        assert!(matches!(iscore(&c, &[0]), Err(Error::DegenerateResponse)));
    }

    #[test]
    fn subset_validation() {
        let d = ds(vec![vec![0, 1], vec![1, 0]], vec![0.0, 1.0]);
        assert!(matches!(
            make_partition(&d, &[]),
            Err(Error::InvalidSubset(_))
        ));
        assert!(matches!(iscore(&d, &[2]), Err(Error::InvalidSubset(_))));
        assert!(matches!(iscore(&d, &[1, 1]), Err(Error::InvalidSubset(_))));
    }

    #[test]
    fn compaction_path_matches_hash_partition() {
        // 14 ternary variables: 3^14 keys forces compaction
        let n = 300;
        let cols: Vec<Vec<u32>> = (0..14)
            .map(|j| (0..n).map(|i| ((i * (j + 7) + i / 3) % 3) as u32).collect())
            .collect();
        let y = (0..n).map(|i| ((i * 31) % 7) as f64).collect();
        let d = ds(cols, y);
        let subset: Vec<usize> = (0..14).collect();
        let part = make_partition(&d, &subset).unwrap();
        let (ybar, s2) = global_stats(&d);
        let expected: f64 = part
            .cells
            .iter()
            .map(|c| (c.count as f64).powi(2) * (c.mean - ybar).powi(2))
            .sum();
        let got = iscore(&d, &subset).unwrap();
        assert!((got.raw - expected).abs() <= 1e-9 * expected.max(1.0));
        assert!((got.standardized - expected / (n as f64 * s2)).abs() < 1e-9);
    }

    #[test]
    fn derived_codes_score() {
        let y = vec![1.0, 0.0, 0.0, 0.0];
        let codes = vec![1, 0, 0, 0];
        // perfect split into {1} and {0,0,0}: raw = 1·0.75² + 9·0.25² = 1.125; n·s² = 0.75
        assert!((iscore_of_codes(&codes, &y).unwrap() - 1.5).abs() < 1e-12);
    }
}
