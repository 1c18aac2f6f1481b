//! Predictors built on variable modules, a logistic baseline, and the
//! predictivity (best achievable correct-classification rate) of a subset.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::data::DiscreteDataset;
use crate::error::{Error, Result};
use crate::iscore::{mean_and_variance, validate_subset};
use crate::metrics::check_binary;

/// Predicts the training mean response of the cell a row falls in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleClassifier {
    pub module: Vec<usize>,
    /// Declared level count of each module variable, in module order.
    pub levels: Vec<u32>,
    /// Keys are comma-joined code tuples, e.g. `"0,1"`.
    pub cell_table: BTreeMap<String, f64>,
    /// Training global mean, used for tuples not seen in training.
    pub fallback: f64,
}

fn tuple_key(ds: &DiscreteDataset, module: &[usize], row: usize) -> String {
    let codes: Vec<String> = module
        .iter()
        .map(|&v| ds.column(v)[row].to_string())
        .collect();
    codes.join(",")
}

pub fn fit_module_classifier(ds: &DiscreteDataset, module: &[usize]) -> Result<ModuleClassifier> {
    validate_subset(ds, module)?;
    let mut acc: HashMap<String, (usize, f64)> = HashMap::new();
    for i in 0..ds.n() {
        let e = acc.entry(tuple_key(ds, module, i)).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += ds.y()[i];
    }
    let (fallback, _) = mean_and_variance(ds.y());
    Ok(ModuleClassifier {
        module: module.to_vec(),
        levels: module.iter().map(|&v| ds.levels()[v]).collect(),
        cell_table: acc
            .into_iter()
            .map(|(k, (c, s))| (k, s / c as f64))
            .collect(),
        fallback,
    })
}

impl ModuleClassifier {
    /// Posterior per row of `rows`, which must share the training column layout.
    pub fn predict(&self, rows: &DiscreteDataset) -> Result<Vec<f64>> {
        if let Some(&v) = self.module.iter().find(|&&v| v >= rows.p()) {
            return Err(Error::InvalidSubset(format!(
                "module variable {v} missing from prediction rows"
            )));
        }
        for (&v, &lv) in self.module.iter().zip(&self.levels) {
            if let Some(&c) = rows.column(v).iter().find(|&&c| c >= lv) {
                return Err(Error::InvalidData(format!(
                    "code {c} for '{}' outside trained range [0, {lv})",
                    rows.names()[v]
                )));
            }
        }
        Ok((0..rows.n())
            .map(|i| {
                self.cell_table
                    .get(&tuple_key(rows, &self.module, i))
                    .copied()
                    .unwrap_or(self.fallback)
            })
            .collect())
    }
}

pub fn predict(mc: &ModuleClassifier, rows: &DiscreteDataset) -> Result<Vec<f64>> {
    mc.predict(rows)
}

/// Score-weighted average of module posteriors.
pub fn combine_modules(
    classifiers: &[(ModuleClassifier, f64)],
    rows: &DiscreteDataset,
) -> Result<Vec<f64>> {
    if classifiers.is_empty() {
        return Err(Error::EmptyModules);
    }
    if classifiers
        .iter()
        .any(|(_, w)| !(w.is_finite() && *w >= 0.0))
    {
        return Err(Error::InvalidConfig(
            "module weights must be finite and >= 0".into(),
        ));
    }
    let total: f64 = classifiers.iter().map(|(_, w)| w).sum();
    if total <= 0.0 {
        return Err(Error::ZeroWeights);
    }
    let mut out = vec![0.0; rows.n()];
    for (mc, w) in classifiers {
        for (o, p) in out.iter_mut().zip(mc.predict(rows)?) {
            *o += w * p;
        }
    }
    out.iter_mut().for_each(|o| *o /= total);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticOptions {
    pub epochs: usize,
    pub step: f64,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        Self {
            epochs: 500,
            step: 0.5,
        }
    }
}

/// Logistic regression fit by full-batch gradient descent on standardized inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    /// Weights on standardized inputs; zero for constant training columns.
    pub weights: Vec<f64>,
    pub bias: f64,
    pub means: Vec<f64>,
    /// Training standard deviations; 0 marks a constant column.
    pub scales: Vec<f64>,
    pub epochs: usize,
    pub step: f64,
    pub final_loss: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean binary cross-entropy and its gradient (weights, bias) for inputs
/// given column-major.
pub fn cross_entropy_and_gradient(
    columns: &[Vec<f64>],
    y: &[f64],
    weights: &[f64],
    bias: f64,
) -> (f64, Vec<f64>, f64) {
    let n = y.len();
    let mut z = vec![bias; n];
    for (col, &w) in columns.iter().zip(weights) {
        if w != 0.0 {
            for (zi, &x) in z.iter_mut().zip(col) {
                *zi += w * x;
            }
        }
    }
    let mut loss = 0.0;
    let mut resid = Vec::with_capacity(n);
    for (&zi, &yi) in z.iter().zip(y) {
        // log(1 + e^z) − y·z, computed stably
        let softplus = if zi > 0.0 {
            zi + (-zi).exp().ln_1p()
        } else {
            zi.exp().ln_1p()
        };
        loss += softplus - yi * zi;
        resid.push(sigmoid(zi) - yi);
    }
    let nf = n as f64;
    let grad_w = columns
        .iter()
        .map(|col| col.iter().zip(&resid).map(|(x, r)| x * r).sum::<f64>() / nf)
        .collect();
    let grad_b = resid.iter().sum::<f64>() / nf;
    (loss / nf, grad_w, grad_b)
}

/// Fits on column-major inputs (`columns[j][i]` is feature `j` of row `i`).
/// Starts from zero so the fit is deterministic.
pub fn fit_logistic(
    columns: &[Vec<f64>],
    y: &[f64],
    opts: LogisticOptions,
) -> Result<LogisticModel> {
    let n = y.len();
    if n == 0 {
        return Err(Error::TooFewRows(0));
    }
    check_binary(y)?;
    for (j, col) in columns.iter().enumerate() {
        if col.len() != n {
            return Err(Error::Shape(format!(
                "feature {j} has {} rows, labels have {n}",
                col.len()
            )));
        }
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("feature {j}")));
        }
    }
    if !(opts.step.is_finite() && opts.step > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "step {} must be > 0",
            opts.step
        )));
    }
    let (means, scales): (Vec<f64>, Vec<f64>) = columns
        .iter()
        .map(|c| {
            let (m, v) = mean_and_variance(c);
            (m, v.sqrt())
        })
        .unzip();
    let standardized: Vec<Vec<f64>> = columns
        .iter()
        .zip(means.iter().zip(&scales))
        .map(|(c, (&m, &s))| {
            if s > 0.0 {
                c.iter().map(|x| (x - m) / s).collect()
            } else {
                vec![0.0; n]
            }
        })
        .collect();

    let mut weights = vec![0.0; columns.len()];
    let mut bias = 0.0;
    for _ in 0..opts.epochs {
        let (_, gw, gb) = cross_entropy_and_gradient(&standardized, y, &weights, bias);
        for ((w, g), &s) in weights.iter_mut().zip(gw).zip(&scales) {
            if s > 0.0 {
                *w -= opts.step * g;
            }
        }
        bias -= opts.step * gb;
    }
    let (final_loss, _, _) = cross_entropy_and_gradient(&standardized, y, &weights, bias);
    if !final_loss.is_finite() || weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFinite("logistic parameters".into()));
    }
    Ok(LogisticModel {
        weights,
        bias,
        means,
        scales,
        epochs: opts.epochs,
        step: opts.step,
        final_loss,
    })
}

impl LogisticModel {
    pub fn predict_proba(&self, columns: &[Vec<f64>]) -> Result<Vec<f64>> {
        if columns.len() != self.weights.len() {
            return Err(Error::Shape(format!(
                "model has {} features, input has {}",
                self.weights.len(),
                columns.len()
            )));
        }
        let n = columns.first().map_or(0, Vec::len);
        let mut z = vec![self.bias; n];
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::Shape("ragged input columns".into()));
            }
            if self.scales[j] > 0.0 {
                let (w, m, s) = (self.weights[j], self.means[j], self.scales[j]);
                for (zi, &x) in z.iter_mut().zip(col) {
                    *zi += w * (x - m) / s;
                }
            }
        }
        Ok(z.into_iter().map(sigmoid).collect())
    }
}

/// Level codes of the given variables as real-valued columns.
pub fn codes_as_reals(ds: &DiscreteDataset, vars: &[usize]) -> Vec<Vec<f64>> {
    vars.iter()
        .map(|&v| ds.column(v).iter().map(|&c| c as f64).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictivityEstimate {
    pub theta_c: f64,
    /// Cell key (comma-joined codes) → share of cases in that cell.
    pub case: BTreeMap<String, f64>,
    /// Cell key → share of controls in that cell.
    pub control: BTreeMap<String, f64>,
}

/// `½ Σ_x max{p_case(x), p_control(x)}` over the union of cells. A cell
/// missing from one map counts as probability 0 there.
pub fn theta_c(case: &BTreeMap<String, f64>, control: &BTreeMap<String, f64>) -> f64 {
    let keys: BTreeSet<&String> = case.keys().chain(control.keys()).collect();
    0.5 * keys
        .into_iter()
        .map(|k| {
            let d = case.get(k).copied().unwrap_or(0.0);
            let u = control.get(k).copied().unwrap_or(0.0);
            d.max(u)
        })
        .sum::<f64>()
}

/// Empirical predictivity of `subset` on case (y = 1) / control (y = 0) data.
pub fn predictivity(ds: &DiscreteDataset, subset: &[usize]) -> Result<PredictivityEstimate> {
    validate_subset(ds, subset)?;
    check_binary(ds.y())?;
    let cases = ds.y().iter().filter(|&&v| v == 1.0).count();
    let controls = ds.n() - cases;
    if cases == 0 || controls == 0 {
        return Err(Error::SingleClass);
    }
    let mut case = BTreeMap::new();
    let mut control = BTreeMap::new();
    for i in 0..ds.n() {
        let (map, total) = if ds.y()[i] == 1.0 {
            (&mut case, cases)
        } else {
            (&mut control, controls)
        };
        *map.entry(tuple_key(ds, subset, i)).or_insert(0.0) += 1.0 / total as f64;
    }
    Ok(PredictivityEstimate {
        theta_c: theta_c(&case, &control),
        case,
        control,
    })
}
