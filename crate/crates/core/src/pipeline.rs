//! End-to-end experiments: marginal screening, backward-dropping module
//! search, module selection, prediction and test AUC, repeated over seeds.
//! Also the feature-pruning workflow for exported real-valued feature
//! matrices and its ablation check.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bda::{run_bda, select_top_fraction, union_of, BdaConfig, ModuleRecord, VariableModule};
use crate::data::{
    binarize_by_cutoff, fit_cutoffs, load_csv, ContinuousDataset, DiscreteDataset, Discretization,
};
use crate::error::{Error, Result};
use crate::iscore::marginal_scores;
use crate::metrics::{auc, check_binary};
use crate::predictor::{
    codes_as_reals, combine_modules, fit_logistic, fit_module_classifier, LogisticOptions,
};
use crate::simgen::{generate, Model, SimSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    /// Fresh train and test sets are generated for every repeat.
    Simulated {
        model: Model,
        n_train: usize,
        #[serde(default = "default_n_test")]
        n_test: usize,
        p: usize,
    },
    /// Fixed splits; `validate` is optional and never used for fitting.
    Csv {
        train: PathBuf,
        #[serde(default)]
        validate: Option<PathBuf>,
        test: PathBuf,
        #[serde(default = "default_label")]
        label: String,
    },
}

fn default_n_test() -> usize {
    1000
}

fn default_label() -> String {
    "label".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Screening {
    /// Variables kept by marginal I-score; defaults to `min(p, 4k)`.
    #[serde(default)]
    pub top_m: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BdaSettings {
    #[serde(default)]
    pub b: Option<usize>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub min_size: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictorChoice {
    ModuleEnsemble,
    LogisticOnUnion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub data: DataSource,
    #[serde(default)]
    pub screening: Option<Screening>,
    #[serde(default)]
    pub bda: BdaSettings,
    /// Fraction q of the ranked modules kept for prediction.
    pub module_fraction: f64,
    /// Optional hard cap on the number of kept modules (applied after q).
    #[serde(default)]
    pub max_modules: Option<usize>,
    pub predictor: PredictorChoice,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// How CSV features are binarized (cutoffs are fit on train only).
    #[serde(default = "default_discretization")]
    pub discretization: Discretization,
    #[serde(default)]
    pub logistic: Option<LogisticOptions>,
}

fn default_repeats() -> usize {
    1
}

fn default_discretization() -> Discretization {
    Discretization::Iscore
}

impl ExperimentPlan {
    pub fn from_json(text: &str) -> Result<Self> {
        let plan: Self = serde_json::from_str(text)?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::InvalidConfig("repeats must be at least 1".into()));
        }
        if !(self.module_fraction > 0.0 && self.module_fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "module_fraction {} outside (0, 1]",
                self.module_fraction
            )));
        }
        if self.max_modules == Some(0) {
            return Err(Error::InvalidConfig(
                "max_modules must be at least 1".into(),
            ));
        }
        if let DataSource::Simulated {
            n_train, n_test, ..
        } = self.data
        {
            if n_train < 2 || n_test < 2 {
                return Err(Error::InvalidConfig(
                    "split sizes must be at least 2".into(),
                ));
            }
        }
        Ok(())
    }

    fn logistic_options(&self) -> LogisticOptions {
        self.logistic.unwrap_or_default()
    }

    /// Seed of repeat `r`.
    pub fn repeat_seed(&self, r: usize) -> u64 {
        self.base_seed.wrapping_add(r as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatResult {
    pub seed: u64,
    pub auc: f64,
    #[serde(default)]
    pub validate_auc: Option<f64>,
    pub modules: Vec<ModuleRecord>,
    pub selected_variables: Vec<String>,
    #[serde(default)]
    pub screened: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    /// Row label in the summary table ("I-score: Top Mod." or "All Var.").
    pub row: String,
    /// Column label in the summary table.
    pub algorithm: String,
    pub plan: ExperimentPlan,
    pub repeats: Vec<RepeatResult>,
    pub aucs: Vec<f64>,
    pub mean_auc: f64,
    pub std_auc: f64,
    /// Union of selected variables over all repeats, in column order.
    pub selected_variables: Vec<String>,
    #[serde(default)]
    pub ablation_auc: Option<f64>,
    #[serde(default)]
    pub notes: Vec<String>,
    /// Not serialized, so reports stay byte-identical across runs.
    #[serde(skip)]
    pub wall_clock: Duration,
}

pub const ROW_SELECTED: &str = "I-score: Top Mod.";
pub const ROW_ALL: &str = "All Var.";

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Train/validate/test tables sharing one column schema.
#[derive(Debug, Clone)]
pub struct CsvSplits {
    pub train: ContinuousDataset,
    pub validate: Option<ContinuousDataset>,
    pub test: ContinuousDataset,
}

impl CsvSplits {
    pub fn new(
        train: ContinuousDataset,
        validate: Option<ContinuousDataset>,
        test: ContinuousDataset,
    ) -> Result<Self> {
        for (what, other) in [("validate", validate.as_ref()), ("test", Some(&test))] {
            if let Some(other) = other {
                if other.names() != train.names() {
                    return Err(Error::Shape(format!(
                        "{what} columns differ from train columns"
                    )));
                }
            }
        }
        check_binary(train.y())?;
        check_binary(test.y())?;
        if let Some(v) = &validate {
            check_binary(v.y())?;
        }
        Ok(Self {
            train,
            validate,
            test,
        })
    }

    pub fn load(
        train: impl AsRef<Path>,
        validate: Option<&Path>,
        test: impl AsRef<Path>,
        label: &str,
    ) -> Result<Self> {
        Self::new(
            load_csv(train, label)?,
            validate.map(|v| load_csv(v, label)).transpose()?,
            load_csv(test, label)?,
        )
    }

    /// Consecutive row blocks of one table: `train` rows, then `validate` rows
    /// (none if zero), then the rest as test.
    pub fn from_rows(all: &ContinuousDataset, train: usize, validate: usize) -> Result<Self> {
        let n = all.n();
        if train + validate >= n {
            return Err(Error::Shape(format!(
                "{train}+{validate} rows leave no test rows out of {n}"
            )));
        }
        let v = (validate > 0)
            .then(|| all.select_rows(train..train + validate))
            .transpose()?;
        Self::new(
            all.select_rows(0..train)?,
            v,
            all.select_rows(train + validate..n)?,
        )
    }

    /// Same splits without the named columns.
    pub fn without(&self, names: &[String]) -> Result<Self> {
        let keep: Vec<usize> = (0..self.train.p())
            .filter(|&j| !names.contains(&self.train.names()[j]))
            .collect();
        if keep.is_empty() {
            return Err(Error::InvalidConfig(
                "selection covers every column; nothing left to ablate".into(),
            ));
        }
        Self::new(
            self.train.select_columns(&keep)?,
            self.validate
                .as_ref()
                .map(|v| v.select_columns(&keep))
                .transpose()?,
            self.test.select_columns(&keep)?,
        )
    }
}

/// Modules chosen on one training set, with variables indexed in that set.
#[derive(Debug, Clone)]
struct Selection {
    modules: Vec<VariableModule>,
    union: Vec<usize>,
    screened: Option<Vec<usize>>,
}

/// Variables ranked by marginal standardized I-score (descending, ties by index).
pub fn marginal_ranking(ds: &DiscreteDataset) -> Result<Vec<usize>> {
    let scores = marginal_scores(ds)?;
    let mut order: Vec<usize> = (0..ds.p()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    Ok(order)
}

fn select_modules(train: &DiscreteDataset, plan: &ExperimentPlan, seed: u64) -> Result<Selection> {
    let p = train.p();
    let planned_k = plan.bda.k.unwrap_or_else(|| p.min(10));
    let screened = match plan.screening {
        Some(s) => {
            let m = s.top_m.unwrap_or(4 * planned_k).clamp(1, p);
            let mut keep = marginal_ranking(train)?;
            keep.truncate(m);
            keep.sort_unstable();
            Some(keep)
        }
        None => None,
    };
    let search = match &screened {
        Some(keep) => train.select_columns(keep)?,
        None => train.clone(),
    };
    let ps = search.p();
    let k = plan.bda.k.unwrap_or_else(|| ps.min(10));
    let defaults = BdaConfig::defaults_for(ps, seed);
    let cfg = BdaConfig {
        b: plan.bda.b.unwrap_or(defaults.b),
        k,
        seed,
        min_size: plan.bda.min_size.unwrap_or(1),
    };
    let ms = run_bda(&search, &cfg)?;
    let (mut kept, _) = select_top_fraction(&ms, plan.module_fraction)?;
    if let Some(cap) = plan.max_modules {
        kept.truncate(cap);
    }
    if let Some(keep) = &screened {
        for m in kept.iter_mut() {
            m.variables = m.variables.iter().map(|&v| keep[v]).collect();
        }
    }
    Ok(Selection {
        union: union_of(&kept),
        modules: kept,
        screened,
    })
}

fn ensemble_scores(
    train: &DiscreteDataset,
    rows: &DiscreteDataset,
    modules: &[VariableModule],
) -> Result<Vec<f64>> {
    let classifiers = modules
        .iter()
        .map(|m| Ok((fit_module_classifier(train, &m.variables)?, m.score)))
        .collect::<Result<Vec<_>>>()?;
    combine_modules(&classifiers, rows)
}

fn logistic_scores(
    train_x: &[Vec<f64>],
    train_y: &[f64],
    rows_x: &[Vec<f64>],
    opts: LogisticOptions,
) -> Result<Vec<f64>> {
    fit_logistic(train_x, train_y, opts)?.predict_proba(rows_x)
}

fn pick<T: Clone>(cols: &[Vec<T>], idx: &[usize]) -> Vec<Vec<T>> {
    idx.iter().map(|&j| cols[j].clone()).collect()
}

fn names_of(names: &[String], idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&j| names[j].clone()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Selected(PredictorChoice),
    AllVariables,
}

fn simulated_repeat(
    plan: &ExperimentPlan,
    mode: Mode,
    r: usize,
    model: Model,
    n_train: usize,
    n_test: usize,
    p: usize,
) -> Result<RepeatResult> {
    let seed = plan.repeat_seed(r);
    let train = generate(&SimSpec {
        model,
        n: n_train,
        p,
        seed: seed.wrapping_mul(2),
    })?;
    let test = generate(&SimSpec {
        model,
        n: n_test,
        p,
        seed: seed.wrapping_mul(2).wrapping_add(1),
    })?;
    let opts = plan.logistic_options();
    let names = train.names();
    let (scores, selection) = match mode {
        Mode::AllVariables => {
            let all: Vec<usize> = (0..p).collect();
            let s = logistic_scores(
                &codes_as_reals(&train, &all),
                train.y(),
                &codes_as_reals(&test, &all),
                opts,
            )?;
            (s, None)
        }
        Mode::Selected(choice) => {
            let sel = select_modules(&train, plan, seed)?;
            let s = match choice {
                PredictorChoice::ModuleEnsemble => ensemble_scores(&train, &test, &sel.modules)?,
                PredictorChoice::LogisticOnUnion => logistic_scores(
                    &codes_as_reals(&train, &sel.union),
                    train.y(),
                    &codes_as_reals(&test, &sel.union),
                    opts,
                )?,
            };
            (s, Some(sel))
        }
    };
    Ok(RepeatResult {
        seed,
        auc: auc(test.y(), &scores)?,
        validate_auc: None,
        modules: selection
            .as_ref()
            .map(|s| s.modules.iter().map(|m| m.record(names)).collect())
            .unwrap_or_default(),
        selected_variables: selection
            .as_ref()
            .map(|s| names_of(names, &s.union))
            .unwrap_or_default(),
        screened: selection
            .and_then(|s| s.screened)
            .map(|k| names_of(names, &k)),
    })
}

/// Binarized copies of the splits, with cutoffs fit on train.
struct BinarizedSplits {
    train: DiscreteDataset,
    validate: Option<DiscreteDataset>,
    test: DiscreteDataset,
}

fn binarize_splits(splits: &CsvSplits, method: Discretization) -> Result<BinarizedSplits> {
    let rule = fit_cutoffs(&splits.train, method)?;
    Ok(BinarizedSplits {
        train: binarize_by_cutoff(&splits.train, &rule)?,
        validate: splits
            .validate
            .as_ref()
            .map(|v| binarize_by_cutoff(v, &rule))
            .transpose()?,
        test: binarize_by_cutoff(&splits.test, &rule)?,
    })
}

fn csv_repeat(
    plan: &ExperimentPlan,
    mode: Mode,
    r: usize,
    splits: &CsvSplits,
    bin: &BinarizedSplits,
) -> Result<RepeatResult> {
    let seed = plan.repeat_seed(r);
    let opts = plan.logistic_options();
    let names = splits.train.names();
    let (vars, selection) = match mode {
        Mode::AllVariables => ((0..splits.train.p()).collect::<Vec<_>>(), None),
        Mode::Selected(_) => {
            let sel = select_modules(&bin.train, plan, seed)?;
            (sel.union.clone(), Some(sel))
        }
    };
    let score = |rows_bin: &DiscreteDataset, rows: &ContinuousDataset| -> Result<Vec<f64>> {
        match (mode, &selection) {
            (Mode::Selected(PredictorChoice::ModuleEnsemble), Some(sel)) => {
                ensemble_scores(&bin.train, rows_bin, &sel.modules)
            }
            _ => logistic_scores(
                &pick(splits.train.columns(), &vars),
                splits.train.y(),
                &pick(rows.columns(), &vars),
                opts,
            ),
        }
    };
    let test_auc = auc(splits.test.y(), &score(&bin.test, &splits.test)?)?;
    let validate_auc = match (&splits.validate, &bin.validate) {
        (Some(v), Some(vb)) => Some(auc(v.y(), &score(vb, v)?)?),
        _ => None,
    };
    Ok(RepeatResult {
        seed,
        auc: test_auc,
        validate_auc,
        modules: selection
            .as_ref()
            .map(|s| s.modules.iter().map(|m| m.record(names)).collect())
            .unwrap_or_default(),
        selected_variables: selection
            .as_ref()
            .map(|s| names_of(names, &s.union))
            .unwrap_or_default(),
        screened: selection
            .and_then(|s| s.screened)
            .map(|k| names_of(names, &k)),
    })
}

fn summarize(
    plan: &ExperimentPlan,
    mode: Mode,
    repeats: Vec<RepeatResult>,
    column_order: &[String],
    notes: Vec<String>,
    started: Instant,
) -> ExperimentReport {
    let aucs: Vec<f64> = repeats.iter().map(|r| r.auc).collect();
    let mean = aucs.iter().sum::<f64>() / aucs.len() as f64;
    let std = if aucs.len() > 1 {
        (aucs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (aucs.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    let selected_variables = column_order
        .iter()
        .filter(|n| repeats.iter().any(|r| r.selected_variables.contains(n)))
        .cloned()
        .collect();
    let (row, algorithm) = match mode {
        Mode::AllVariables => (ROW_ALL, "Logistic"),
        Mode::Selected(PredictorChoice::ModuleEnsemble) => (ROW_SELECTED, "Module"),
        Mode::Selected(PredictorChoice::LogisticOnUnion) => (ROW_SELECTED, "Logistic"),
    };
    ExperimentReport {
        row: row.into(),
        algorithm: algorithm.into(),
        plan: plan.clone(),
        repeats,
        aucs,
        mean_auc: mean,
        std_auc: std,
        selected_variables,
        ablation_auc: None,
        notes,
        wall_clock: started.elapsed(),
    }
}

fn run(plan: &ExperimentPlan, mode: Mode, splits: Option<&CsvSplits>) -> Result<ExperimentReport> {
    plan.validate()?;
    let started = Instant::now();
    match (&plan.data, splits) {
        (
            DataSource::Simulated {
                model,
                n_train,
                n_test,
                p,
            },
            _,
        ) => {
            let repeats = (0..plan.repeats)
                .into_par_iter()
                .map(|r| simulated_repeat(plan, mode, r, *model, *n_train, *n_test, *p))
                .collect::<Result<Vec<_>>>()?;
            let columns = DiscreteDataset::default_names(*p);
            Ok(summarize(
                plan,
                mode,
                repeats,
                &columns,
                Vec::new(),
                started,
            ))
        }
        (DataSource::Csv { .. }, Some(splits)) => csv_run(plan, mode, splits, started),
        (
            DataSource::Csv {
                train,
                validate,
                test,
                label,
            },
            None,
        ) => {
            let splits = CsvSplits::load(train, validate.as_deref(), test, label)?;
            csv_run(plan, mode, &splits, started)
        }
    }
}

fn csv_run(
    plan: &ExperimentPlan,
    mode: Mode,
    splits: &CsvSplits,
    started: Instant,
) -> Result<ExperimentReport> {
    let bin = binarize_splits(splits, plan.discretization)?;
    let repeats = (0..plan.repeats)
        .into_par_iter()
        .map(|r| csv_repeat(plan, mode, r, splits, &bin))
        .collect::<Result<Vec<_>>>()?;
    let mut notes = Vec::new();
    if matches!(
        mode,
        Mode::Selected(PredictorChoice::LogisticOnUnion) | Mode::AllVariables
    ) {
        notes.push(
            "downstream classifier: logistic regression on raw feature values (stands in for a single-layer network)".into(),
        );
    }
    Ok(summarize(
        plan,
        mode,
        repeats,
        splits.train.names(),
        notes,
        started,
    ))
}

/// Screening, module search, selection and prediction with the plan's predictor.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentReport> {
    run(plan, Mode::Selected(plan.predictor), None)
}

/// Same data handling as [`run_experiment`] with CSV splits already loaded.
pub fn run_experiment_on(plan: &ExperimentPlan, splits: &CsvSplits) -> Result<ExperimentReport> {
    run(plan, Mode::Selected(plan.predictor), Some(splits))
}

/// Logistic regression on every variable, no selection.
pub fn run_all_variables_baseline(plan: &ExperimentPlan) -> Result<ExperimentReport> {
    run(plan, Mode::AllVariables, None)
}

pub fn run_all_variables_baseline_on(
    plan: &ExperimentPlan,
    splits: &CsvSplits,
) -> Result<ExperimentReport> {
    run(plan, Mode::AllVariables, Some(splits))
}

/// Binarizes on train, selects modules on train, then fits logistic
/// regression on the raw values of the selected variables.
pub fn feature_prune_pipeline(
    splits: &CsvSplits,
    plan: &ExperimentPlan,
) -> Result<ExperimentReport> {
    let mut plan = plan.clone();
    plan.predictor = PredictorChoice::LogisticOnUnion;
    run(&plan, Mode::Selected(plan.predictor), Some(splits))
}

/// Drops the report's selected variables and reruns the same pipeline on
/// what is left; returns the new mean test AUC.
pub fn ablation(report: &ExperimentReport, splits: &CsvSplits) -> Result<f64> {
    let rest = if report.selected_variables.is_empty() {
        splits.clone()
    } else {
        splits.without(&report.selected_variables)?
    };
    Ok(feature_prune_pipeline(&rest, &report.plan)?.mean_auc)
}

/// Plain-text table: one row per row label, one column per algorithm.
pub fn render_table(title: &str, reports: &[&ExperimentReport]) -> String {
    let mut rows: Vec<&str> = Vec::new();
    let mut cols: Vec<&str> = Vec::new();
    for r in reports {
        if !rows.contains(&r.row.as_str()) {
            rows.push(&r.row);
        }
        if !cols.contains(&r.algorithm.as_str()) {
            cols.push(&r.algorithm);
        }
    }
    let first = rows
        .iter()
        .map(|r| r.len())
        .max()
        .unwrap_or(0)
        .max("Algorithms".len());
    let width = cols.iter().map(|c| c.len()).max().unwrap_or(0).max(8);
    let mut out = format!("{title}\n");
    out.push_str(&format!("{:<first$}", "Algorithms"));
    for c in &cols {
        out.push_str(&format!("  {c:>width$}"));
    }
    out.push('\n');
    out.push_str(&"-".repeat(first + cols.len() * (width + 2)));
    out.push('\n');
    for row in &rows {
        out.push_str(&format!("{row:<first$}"));
        for col in &cols {
            let cell = reports
                .iter()
                .find(|r| r.row == *row && r.algorithm == *col)
                .map_or_else(|| "-".to_string(), |r| format!("{:.2}", r.mean_auc));
            out.push_str(&format!("  {cell:>width$}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sim_plan(model: Model, n_train: usize, p: usize) -> ExperimentPlan {
        ExperimentPlan {
            data: DataSource::Simulated {
                model,
                n_train,
                n_test: 400,
                p,
            },
            screening: None,
            bda: BdaSettings {
                b: Some(40),
                k: Some(4),
                min_size: None,
            },
            module_fraction: 1.0,
            max_modules: Some(1),
            predictor: PredictorChoice::ModuleEnsemble,
            repeats: 3,
            base_seed: 5,
            discretization: Discretization::Iscore,
            logistic: None,
        }
    }

    #[test]
    fn plan_json_defaults_and_rejections() {
        let plan = ExperimentPlan::from_json(
            r#"{"data":{"simulated":{"model":"example2","n_train":100,"p":10}},
                "module_fraction":0.5,"predictor":"module_ensemble"}"#,
        )
        .unwrap();
        assert_eq!(plan.repeats, 1);
        assert_eq!(plan.discretization, Discretization::Iscore);
        assert!(matches!(
            plan.data,
            DataSource::Simulated { n_test: 1000, .. }
        ));
        let bad = ExperimentPlan::from_json(
            r#"{"data":{"simulated":{"model":"example2","n_train":100,"p":10}},
                "module_fraction":0.0,"predictor":"module_ensemble"}"#,
        );
        assert!(matches!(bad, Err(Error::InvalidConfig(_))));
        let unknown = ExperimentPlan::from_json(
            r#"{"data":{"simulated":{"model":"example2","n_train":100,"p":10}},
                "module_fraction":0.5,"predictor":"module_ensemble","bogus":1}"#,
        );
        assert!(matches!(unknown, Err(Error::Json(_))));
    }

    #[test]
    fn mean_matches_repeats() {
        let report = run_experiment(&sim_plan(Model::Example2, 200, 8)).unwrap();
        assert_eq!(report.aucs.len(), 3);
        let mean = report.aucs.iter().sum::<f64>() / 3.0;
        assert!((report.mean_auc - mean).abs() < 1e-12);
        assert!(report.aucs.iter().all(|a| (0.0..=1.0).contains(a)));
        assert_eq!(report.row, ROW_SELECTED);
    }

    #[test]
    fn screening_restricts_selection() {
        let mut plan = sim_plan(Model::Example2, 300, 30);
        plan.screening = Some(Screening { top_m: Some(6) });
        plan.max_modules = None;
        let report = run_experiment(&plan).unwrap();
        for rep in &report.repeats {
            let screened = rep.screened.as_ref().unwrap();
            assert_eq!(screened.len(), 6);
            assert!(rep.selected_variables.iter().all(|v| screened.contains(v)));
        }
    }

    #[test]
    fn table_layout() {
        let a = run_experiment(&sim_plan(Model::Example2, 200, 8)).unwrap();
        let b = run_all_variables_baseline(&sim_plan(Model::Example2, 200, 8)).unwrap();
        let t = render_table("Variables: 8", &[&b, &a]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "Variables: 8");
        assert!(lines[1].starts_with("Algorithms"));
        assert!(lines[1].contains("Logistic") && lines[1].contains("Module"));
        assert!(lines[3].starts_with(ROW_ALL));
        assert!(lines[4].starts_with(ROW_SELECTED));
    }
}
