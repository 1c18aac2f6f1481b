//! Backward dropping search over variable subsets.
//!
//! One run starts from `k` variables and greedily removes, one at a time, the
//! variable whose removal leaves the highest standardized I-score. The best
//! subset seen along the way is that run's variable module. Many runs from
//! random starting subsets are merged into a ranked [`ModuleSet`].

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DiscreteDataset;
use crate::error::{Error, Result};
use crate::iscore::{validate_subset, Scorer};

/// Upper bound on subsets visited by [`exhaustive_best_subset`].
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

/// Relative gap below which two scores count as tied. Different partitions
/// with equal exact scores can disagree in the last few bits.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// `a` is better than `b` by more than the tie tolerance.
pub fn beats(a: f64, b: f64) -> bool {
    a - b > TIE_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BdaConfig {
    /// Number of random starting subsets.
    pub b: usize,
    /// Starting subset size.
    pub k: usize,
    pub seed: u64,
    #[serde(default = "default_min_size")]
    pub min_size: usize,
}

fn default_min_size() -> usize {
    1
}

impl BdaConfig {
    /// `k = min(10, p)` and `b = ceil(20·p/k)`, so each variable is drawn about 20 times.
    pub fn defaults_for(p: usize, seed: u64) -> Self {
        let k = p.clamp(1, 10);
        Self {
            b: (20 * p).div_ceil(k).max(1),
            k,
            seed,
            min_size: 1,
        }
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        if self.b == 0 {
            return Err(Error::InvalidConfig("b must be at least 1".into()));
        }
        if self.min_size == 0 || self.min_size > self.k {
            return Err(Error::InvalidConfig(format!(
                "need 1 <= min_size <= k, got min_size={} k={}",
                self.min_size, self.k
            )));
        }
        if self.k > p {
            return Err(Error::InvalidConfig(format!(
                "k={} exceeds the {p} available variables",
                self.k
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub subset: Vec<usize>,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropTrace {
    /// Visited subsets from the initial one down to `min_size` variables.
    pub steps: Vec<TraceStep>,
    pub dropped_order: Vec<usize>,
}

impl DropTrace {
    /// Audit CSV with columns `step,subset,score`; subset names are `;`-joined.
    pub fn write_csv(&self, path: impl AsRef<Path>, names: &[String]) -> Result<()> {
        let path = path.as_ref();
        let mut out = Vec::new();
        writeln!(out, "step,subset,score").unwrap();
        for (i, step) in self.steps.iter().enumerate() {
            let subset: Vec<&str> = step.subset.iter().map(|&v| names[v].as_str()).collect();
            writeln!(out, "{i},{},{}", subset.join(";"), step.score).unwrap();
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableModule {
    /// Sorted, duplicate-free variable indices.
    pub variables: Vec<usize>,
    pub score: f64,
    /// Number of runs whose peak was this subset.
    pub provenance: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModuleSet {
    /// Sorted by score descending, then variables lexicographically.
    pub modules: Vec<VariableModule>,
    pub config: BdaConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleRecord {
    pub variables: Vec<String>,
    pub score: f64,
    pub provenance: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleSetRecord {
    pub config: BdaConfig,
    pub modules: Vec<ModuleRecord>,
}

impl VariableModule {
    pub fn record(&self, names: &[String]) -> ModuleRecord {
        ModuleRecord {
            variables: self.variables.iter().map(|&v| names[v].clone()).collect(),
            score: self.score,
            provenance: self.provenance,
        }
    }
}

impl ModuleSet {
    pub fn record(&self, names: &[String]) -> ModuleSetRecord {
        ModuleSetRecord {
            config: self.config,
            modules: self.modules.iter().map(|m| m.record(names)).collect(),
        }
    }

    pub fn top(&self) -> Option<&VariableModule> {
        self.modules.first()
    }
}

/// One backward-dropping pass from `initial` down to `min_size` variables.
pub fn run_bda_once(ds: &DiscreteDataset, initial: &[usize], min_size: usize) -> Result<DropTrace> {
    validate_subset(ds, initial)?;
    if min_size == 0 || min_size > initial.len() {
        return Err(Error::InvalidConfig(format!(
            "min_size {min_size} incompatible with initial size {}",
            initial.len()
        )));
    }
    let mut scorer = Scorer::new(ds)?;
    Ok(drop_path(&mut scorer, initial, min_size))
}

fn drop_path(scorer: &mut Scorer<'_>, initial: &[usize], min_size: usize) -> DropTrace {
    let mut current = initial.to_vec();
    current.sort_unstable();
    let mut steps = vec![TraceStep {
        score: scorer.standardized(&current),
        subset: current.clone(),
    }];
    let mut dropped_order = Vec::new();
    let mut trial = Vec::with_capacity(current.len());
    while current.len() > min_size {
        // current is sorted, so only a clear win displaces the smaller index
        let mut best: Option<(usize, f64)> = None;
        for pos in 0..current.len() {
            trial.clear();
            trial.extend(
                current
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != pos)
                    .map(|(_, &v)| v),
            );
            let score = scorer.standardized(&trial);
            if best.is_none_or(|(_, s)| beats(score, s)) {
                best = Some((pos, score));
            }
        }
        let (pos, score) = best.expect("non-empty subset");
        dropped_order.push(current.remove(pos));
        steps.push(TraceStep {
            subset: current.clone(),
            score,
        });
    }
    DropTrace {
        steps,
        dropped_order,
    }
}

/// Highest-scoring subset on the trace; ties go to the smaller subset.
pub fn peak_module(trace: &DropTrace) -> VariableModule {
    let mut best = &trace.steps[0];
    for step in &trace.steps[1..] {
        if !beats(best.score, step.score) {
            best = step;
        }
    }
    VariableModule {
        variables: best.subset.clone(),
        score: best.score,
        provenance: 1,
    }
}

/// Starting subset for run `b`: `k` distinct variables drawn uniformly with
/// a ChaCha8 stream seeded by `seed ^ b`.
pub fn initial_subset(p: usize, k: usize, seed: u64, b: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ b as u64);
    let mut s = sample(&mut rng, p, k).into_vec();
    s.sort_unstable();
    s
}

/// Runs `cfg.b` independent drop paths and merges their peak modules.
pub fn run_bda(ds: &DiscreteDataset, cfg: &BdaConfig) -> Result<ModuleSet> {
    cfg.validate(ds.p())?;
    Scorer::new(ds)?;
    let peaks: Vec<VariableModule> = (0..cfg.b)
        .into_par_iter()
        .map_init(
            || Scorer::new(ds).expect("response checked above"),
            |scorer, b| {
                let initial = initial_subset(ds.p(), cfg.k, cfg.seed, b);
                peak_module(&drop_path(scorer, &initial, cfg.min_size))
            },
        )
        .collect();
    Ok(ModuleSet {
        modules: merge_modules(peaks),
        config: *cfg,
    })
}

/// Deduplicates by variable set (max score, summed provenance) and sorts.
/// The result does not depend on input order.
pub fn merge_modules(modules: impl IntoIterator<Item = VariableModule>) -> Vec<VariableModule> {
    let mut by_vars: BTreeMap<Vec<usize>, (f64, usize)> = BTreeMap::new();
    for m in modules {
        let e = by_vars.entry(m.variables).or_insert((m.score, 0));
        e.0 = e.0.max(m.score);
        e.1 += m.provenance;
    }
    let mut out: Vec<VariableModule> = by_vars
        .into_iter()
        .map(|(variables, (score, provenance))| VariableModule {
            variables,
            score,
            provenance,
        })
        .collect();
    out.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.variables.cmp(&b.variables))
    });
    out
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Best subset of size `1..=max_size` by full enumeration. Ties go to the
/// smaller subset, then the lexicographically first one.
pub fn exhaustive_best_subset(ds: &DiscreteDataset, max_size: usize) -> Result<VariableModule> {
    let p = ds.p();
    let max_size = max_size.min(p);
    if max_size == 0 {
        return Err(Error::InvalidConfig("max_size must be at least 1".into()));
    }
    let count: u128 = (1..=max_size).map(|m| binomial(p, m)).sum();
    if count > EXHAUSTIVE_LIMIT {
        return Err(Error::CombinatorialGuard {
            count,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let mut scorer = Scorer::new(ds)?;
    let mut best: Option<VariableModule> = None;
    for size in 1..=max_size {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let score = scorer.standardized(&idx);
            if best.as_ref().is_none_or(|b| beats(score, b.score)) {
                best = Some(VariableModule {
                    variables: idx.clone(),
                    score,
                    provenance: 1,
                });
            }
            // next combination in lexicographic order
            let Some(i) = (0..size).rev().find(|&i| idx[i] < p - size + i) else {
                break;
            };
            idx[i] += 1;
            for j in i + 1..size {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    Ok(best.expect("at least one subset"))
}

/// Keeps the `ceil(fraction·len)` best modules and returns them with the
/// sorted union of their variables.
pub fn select_top_fraction(
    ms: &ModuleSet,
    fraction: f64,
) -> Result<(Vec<VariableModule>, Vec<usize>)> {
    if ms.modules.is_empty() {
        return Err(Error::EmptyModules);
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "fraction {fraction} outside (0, 1]"
        )));
    }
    let keep = ((fraction * ms.modules.len() as f64).ceil() as usize).clamp(1, ms.modules.len());
    let kept = ms.modules[..keep].to_vec();
    let union = union_of(&kept);
    Ok((kept, union))
}

pub fn union_of(modules: &[VariableModule]) -> Vec<usize> {
    let mut union: Vec<usize> = modules
        .iter()
        .flat_map(|m| m.variables.iter().copied())
        .collect();
    union.sort_unstable();
    union.dedup();
    union
}
