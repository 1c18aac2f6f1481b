//! Dataset containers, CSV ingestion and continuous-to-binary conversion.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Columns with more distinct values than this are searched on a quantile grid.
pub const MAX_CUTOFF_CANDIDATES: usize = 256;

/// Discrete explanatory variables (column-major level codes) plus a real response.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDataset {
    columns: Vec<Vec<u32>>,
    y: Vec<f64>,
    names: Vec<String>,
    levels: Vec<u32>,
}

impl DiscreteDataset {
    /// Builds a dataset, inferring each column's level count as `max code + 1`.
    pub fn new(columns: Vec<Vec<u32>>, y: Vec<f64>, names: Vec<String>) -> Result<Self> {
        let levels = columns
            .iter()
            .map(|c| c.iter().copied().max().map_or(1, |m| m + 1))
            .collect();
        Self::with_levels(columns, y, names, levels)
    }

    pub fn with_levels(
        columns: Vec<Vec<u32>>,
        y: Vec<f64>,
        names: Vec<String>,
        levels: Vec<u32>,
    ) -> Result<Self> {
        let n = y.len();
        if n < 2 {
            return Err(Error::TooFewRows(n));
        }
        if columns.is_empty() {
            return Err(Error::Shape("dataset needs at least one column".into()));
        }
        if names.len() != columns.len() || levels.len() != columns.len() {
            return Err(Error::Shape(format!(
                "{} columns, {} names, {} level counts",
                columns.len(),
                names.len(),
                levels.len()
            )));
        }
        check_unique(&names)?;
        if let Some(v) = y.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("response value {v}")));
        }
        for ((col, &lv), name) in columns.iter().zip(&levels).zip(&names) {
            if col.len() != n {
                return Err(Error::Shape(format!(
                    "column '{name}' has {} rows, response has {n}",
                    col.len()
                )));
            }
            if let Some(&c) = col.iter().find(|&&c| c >= lv) {
                return Err(Error::InvalidData(format!(
                    "column '{name}' has code {c} outside [0, {lv})"
                )));
            }
        }
        Ok(Self {
            columns,
            y,
            names,
            levels,
        })
    }

    /// Default feature names `f1..fp`.
    pub fn default_names(p: usize) -> Vec<String> {
        (1..=p).map(|j| format!("f{j}")).collect()
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[u32] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<u32>] {
        &self.columns
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    /// Indices of columns that take a single value (kept, but carry no information).
    pub fn degenerate_columns(&self) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.iter().all(|&v| v == c[0]))
            .map(|(j, _)| j)
            .collect()
    }

    /// Sub-dataset made of the given columns, in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> Result<Self> {
        if let Some(&j) = idx.iter().find(|&&j| j >= self.p()) {
            return Err(Error::InvalidSubset(format!("index {j} out of range")));
        }
        Self::with_levels(
            idx.iter().map(|&j| self.columns[j].clone()).collect(),
            self.y.clone(),
            idx.iter().map(|&j| self.names[j].clone()).collect(),
            idx.iter().map(|&j| self.levels[j]).collect(),
        )
    }

    /// Same columns with a different response.
    pub fn with_response(&self, y: Vec<f64>) -> Result<Self> {
        Self::with_levels(
            self.columns.clone(),
            y,
            self.names.clone(),
            self.levels.clone(),
        )
    }

    /// Writes `f1..fp,label` style CSV: feature names as header plus a `label` column.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        let write = |out: &mut std::io::BufWriter<_>| -> std::io::Result<()> {
            writeln!(out, "{},label", self.names.join(","))?;
            for i in 0..self.n() {
                for col in &self.columns {
                    write!(out, "{},", col[i])?;
                }
                writeln!(out, "{}", self.y[i])?;
            }
            out.flush()
        };
        write(&mut out).map_err(|e| Error::io(path, e))
    }
}

/// Real-valued explanatory variables prior to discretization.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousDataset {
    columns: Vec<Vec<f64>>,
    y: Vec<f64>,
    names: Vec<String>,
}

impl ContinuousDataset {
    pub fn new(columns: Vec<Vec<f64>>, y: Vec<f64>, names: Vec<String>) -> Result<Self> {
        let n = y.len();
        if n < 2 {
            return Err(Error::TooFewRows(n));
        }
        if names.len() != columns.len() {
            return Err(Error::Shape(format!(
                "{} columns but {} names",
                columns.len(),
                names.len()
            )));
        }
        check_unique(&names)?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("response".into()));
        }
        for (col, name) in columns.iter().zip(&names) {
            if col.len() != n {
                return Err(Error::Shape(format!(
                    "column '{name}' has {} rows, response has {n}",
                    col.len()
                )));
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("column '{name}'")));
            }
        }
        Ok(Self { columns, y, names })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    pub fn select_columns(&self, idx: &[usize]) -> Result<Self> {
        if let Some(&j) = idx.iter().find(|&&j| j >= self.p()) {
            return Err(Error::InvalidSubset(format!("index {j} out of range")));
        }
        Self::new(
            idx.iter().map(|&j| self.columns[j].clone()).collect(),
            self.y.clone(),
            idx.iter().map(|&j| self.names[j].clone()).collect(),
        )
    }

    pub fn with_response(&self, y: Vec<f64>) -> Result<Self> {
        Self::new(self.columns.clone(), y, self.names.clone())
    }

    pub fn select_rows(&self, rows: std::ops::Range<usize>) -> Result<Self> {
        if rows.end > self.n() {
            return Err(Error::Shape(format!(
                "rows up to {} of {}",
                rows.end,
                self.n()
            )));
        }
        Self::new(
            self.columns
                .iter()
                .map(|c| c[rows.clone()].to_vec())
                .collect(),
            self.y[rows].to_vec(),
            self.names.clone(),
        )
    }

    /// Interprets every value as a level code; fails unless all are non-negative integers.
    pub fn to_codes(&self) -> Result<DiscreteDataset> {
        let columns = self
            .columns
            .iter()
            .zip(&self.names)
            .map(|(col, name)| {
                col.iter()
                    .map(|&v| {
                        if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                            Ok(v as u32)
                        } else {
                            Err(Error::InvalidData(format!(
                                "column '{name}' value {v} is not a level code; choose a discretization"
                            )))
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        DiscreteDataset::new(columns, self.y.clone(), self.names.clone())
    }

    /// Writes the dataset in the same layout [`load_csv`] reads.
    pub fn write_csv(&self, path: impl AsRef<Path>, label: &str) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        let write = |out: &mut std::io::BufWriter<_>| -> std::io::Result<()> {
            writeln!(out, "{},{label}", self.names.join(","))?;
            for i in 0..self.n() {
                for col in &self.columns {
                    write!(out, "{},", col[i])?;
                }
                writeln!(out, "{}", self.y[i])?;
            }
            out.flush()
        };
        write(&mut out).map_err(|e| Error::io(path, e))
    }
}

fn check_unique(names: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(names.len());
    for n in names {
        if !seen.insert(n.as_str()) {
            return Err(Error::InvalidData(format!("duplicate feature name '{n}'")));
        }
    }
    Ok(())
}

/// Reads a header-first CSV; `label_column` becomes the response, every other
/// column a feature. Row numbers in errors count the header as row 1.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<ContinuousDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let csv_err = |e: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(std::io::BufReader::new(file));
    let headers: Vec<String> = rdr
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_string)
        .collect();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::MissingColumn(label_column.to_string()))?;
    let feature_idx: Vec<usize> = (0..headers.len()).filter(|&j| j != label_idx).collect();

    let mut columns = vec![Vec::new(); feature_idx.len()];
    let mut y = Vec::new();
    let parse = |raw: &str, row: usize, col: usize| -> Result<f64> {
        raw.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Parse {
                row,
                column: headers[col].clone(),
                value: raw.to_string(),
            })
    };
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let row = i + 2;
        y.push(parse(rec.get(label_idx).unwrap_or(""), row, label_idx)?);
        for (slot, &j) in columns.iter_mut().zip(&feature_idx) {
            slot.push(parse(rec.get(j).unwrap_or(""), row, j)?);
        }
    }
    let names = feature_idx.iter().map(|&j| headers[j].clone()).collect();
    ContinuousDataset::new(columns, y, names)
}

/// One threshold per named column; a value maps to code 1 iff it is strictly above.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffRule {
    pub cutoffs: Vec<Cutoff>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub name: String,
    pub threshold: f64,
}

impl CutoffRule {
    pub fn new(names: &[String], thresholds: &[f64]) -> Result<Self> {
        if names.len() != thresholds.len() {
            return Err(Error::Shape(format!(
                "{} names but {} thresholds",
                names.len(),
                thresholds.len()
            )));
        }
        if thresholds.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("cutoff threshold".into()));
        }
        Ok(Self {
            cutoffs: names
                .iter()
                .zip(thresholds)
                .map(|(name, &threshold)| Cutoff {
                    name: name.clone(),
                    threshold,
                })
                .collect(),
        })
    }

    /// JSON list of `{name, threshold}`.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.cutoffs)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cutoffs: Vec<Cutoff> = serde_json::from_str(text)?;
        if cutoffs.iter().any(|c| !c.threshold.is_finite()) {
            return Err(Error::NonFinite("cutoff threshold".into()));
        }
        Ok(Self { cutoffs })
    }
}

/// Binary codes: 1 where `x > t`, 0 otherwise (ties go to 0). Every column gets two levels.
pub fn binarize_by_cutoff(ds: &ContinuousDataset, rule: &CutoffRule) -> Result<DiscreteDataset> {
    if rule.cutoffs.len() != ds.p() {
        return Err(Error::Shape(format!(
            "rule has {} cutoffs for {} columns",
            rule.cutoffs.len(),
            ds.p()
        )));
    }
    let mut columns = Vec::with_capacity(ds.p());
    for (j, cut) in rule.cutoffs.iter().enumerate() {
        if cut.name != ds.names()[j] {
            return Err(Error::Shape(format!(
                "cutoff {j} is for '{}' but column is '{}'",
                cut.name,
                ds.names()[j]
            )));
        }
        columns.push(
            ds.column(j)
                .iter()
                .map(|&v| u32::from(v > cut.threshold))
                .collect(),
        );
    }
    DiscreteDataset::with_levels(
        columns,
        ds.y().to_vec(),
        ds.names().to_vec(),
        vec![2; ds.p()],
    )
}

/// Where candidate thresholds for the cutoff search come from.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum CutoffCandidates {
    /// Midpoints between consecutive distinct values, thinned to a quantile
    /// grid of [`MAX_CUTOFF_CANDIDATES`] when the column is dense.
    #[default]
    Midpoints,
    Grid(Vec<f64>),
}

fn sorted_values(col: &[f64]) -> Vec<f64> {
    let mut v = col.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn distinct_sorted(sorted: &[f64]) -> Vec<f64> {
    let mut d = sorted.to_vec();
    d.dedup();
    d
}

/// Candidate thresholds for one column, ascending and distinct.
pub fn candidate_thresholds(col: &[f64]) -> Vec<f64> {
    let sorted = sorted_values(col);
    let distinct = distinct_sorted(&sorted);
    if distinct.len() < 2 {
        return Vec::new();
    }
    if distinct.len() - 1 <= MAX_CUTOFF_CANDIDATES {
        return distinct.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    let n = sorted.len();
    let mut out = Vec::with_capacity(MAX_CUTOFF_CANDIDATES);
    for q in 1..=MAX_CUTOFF_CANDIDATES {
        let pos = (q * n / (MAX_CUTOFF_CANDIDATES + 1)).clamp(1, n - 1);
        let lo = sorted[pos - 1];
        // next distinct value above `lo`
        let hi_idx = distinct.partition_point(|&v| v <= lo);
        if hi_idx < distinct.len() {
            out.push(0.5 * (lo + distinct[hi_idx]));
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Standardized I-score of the two-cell split `x <= t | x > t`, evaluated for
/// every threshold in `thresholds` (ascending) using prefix sums.
pub(crate) fn split_scores(col: &[f64], y: &[f64], thresholds: &[f64]) -> Result<Vec<f64>> {
    let n = y.len();
    let nf = n as f64;
    let ybar = y.iter().sum::<f64>() / nf;
    let s2 = y.iter().map(|v| (v - ybar).powi(2)).sum::<f64>() / nf;
    if s2 <= 0.0 {
        return Err(Error::DegenerateResponse);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
    let total: f64 = y.iter().sum();
    let mut out = Vec::with_capacity(thresholds.len());
    let (mut i, mut lo_count, mut lo_sum) = (0usize, 0usize, 0.0f64);
    for &t in thresholds {
        while i < n && col[order[i]] <= t {
            lo_sum += y[order[i]];
            lo_count += 1;
            i += 1;
        }
        let mut raw = 0.0;
        for (count, sum) in [(lo_count, lo_sum), (n - lo_count, total - lo_sum)] {
            if count > 0 {
                let c = count as f64;
                raw += c * c * (sum / c - ybar).powi(2);
            }
        }
        out.push(raw / (nf * s2));
    }
    Ok(out)
}

/// Threshold maximizing the marginal standardized I-score of the binarized
/// column against the response. Ties go to the smaller threshold.
pub fn optimal_cutoff_by_iscore(
    ds: &ContinuousDataset,
    column: usize,
    candidates: &CutoffCandidates,
) -> Result<f64> {
    if column >= ds.p() {
        return Err(Error::InvalidSubset(format!(
            "column {column} out of range"
        )));
    }
    let col = ds.column(column);
    let grid = match candidates {
        CutoffCandidates::Midpoints => candidate_thresholds(col),
        CutoffCandidates::Grid(g) => {
            let mut g = g.clone();
            if g.iter().any(|t| !t.is_finite()) {
                return Err(Error::NonFinite("threshold grid".into()));
            }
            g.sort_by(f64::total_cmp);
            g.dedup();
            g
        }
    };
    if distinct_sorted(&sorted_values(col)).len() < 2 {
        return Err(Error::ConstantColumn(ds.names()[column].clone()));
    }
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty threshold grid".into()));
    }
    let scores = split_scores(col, ds.y(), &grid)?;
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    Ok(grid[best])
}

/// 1-D two-means (Lloyd, centers seeded at min and max); returns the midpoint
/// of the converged centers.
pub fn two_mean_binarize(ds: &ContinuousDataset, column: usize) -> Result<f64> {
    if column >= ds.p() {
        return Err(Error::InvalidSubset(format!(
            "column {column} out of range"
        )));
    }
    two_means_threshold(ds.column(column))
        .ok_or_else(|| Error::ConstantColumn(ds.names()[column].clone()))
}

pub(crate) fn two_means_threshold(col: &[f64]) -> Option<f64> {
    let sorted = sorted_values(col);
    let n = sorted.len();
    let (lo, hi) = (sorted[0], sorted[n - 1]);
    if lo == hi {
        return None;
    }
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for v in &sorted {
        prefix.push(prefix.last().unwrap() + v);
    }
    let (mut c0, mut c1) = (lo, hi);
    // clusters are contiguous in sorted order: [0, split) and [split, n)
    let mut split = usize::MAX;
    loop {
        let mid = 0.5 * (c0 + c1);
        let next = sorted.partition_point(|&v| v <= mid);
        if next == split || next == 0 || next == n {
            break;
        }
        split = next;
        c0 = prefix[split] / split as f64;
        c1 = (prefix[n] - prefix[split]) / (n - split) as f64;
    }
    Some(0.5 * (c0 + c1))
}

/// Median threshold (values strictly above the median map to 1).
pub fn median_cutoff(col: &[f64]) -> f64 {
    let sorted = sorted_values(col);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// How continuous columns are turned into binary codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Discretization {
    Median,
    Iscore,
    Twomeans,
}

/// Fits one threshold per column. Constant columns get their single value as
/// threshold (all codes 0) instead of failing, so column indexing is preserved.
pub fn fit_cutoffs(ds: &ContinuousDataset, method: Discretization) -> Result<CutoffRule> {
    use rayon::prelude::*;
    let thresholds = (0..ds.p())
        .into_par_iter()
        .map(|j| {
            let col = ds.column(j);
            let res = match method {
                Discretization::Median => Ok(median_cutoff(col)),
                Discretization::Iscore => {
                    optimal_cutoff_by_iscore(ds, j, &CutoffCandidates::Midpoints)
                }
                Discretization::Twomeans => two_mean_binarize(ds, j),
            };
            match res {
                Err(Error::ConstantColumn(_)) => Ok(col[0]),
                other => other,
            }
        })
        .collect::<Result<Vec<_>>>()?;
    CutoffRule::new(ds.names(), &thresholds)
}
