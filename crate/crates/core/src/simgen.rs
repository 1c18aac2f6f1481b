//! Seeded generators for the two artificial binary models and a pure-noise null.
//!
//! All randomness comes from ChaCha8 (`rand_chacha` 0.9) seeded through
//! `SeedableRng::seed_from_u64`. Rows are generated in order; each row draws
//! its `p` feature bits first and then whatever the model needs for `Y`.
//!
//! [`gen_planted`] builds a real-valued matrix with a known informative subset
//! for exercising the feature-pruning workflow.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{ContinuousDataset, DiscreteDataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// `Y = X1+X2 (mod 2)` or `Y = X2+X3+X4 (mod 2)`, chosen by a fair coin per row.
    Example1,
    /// `Y = 1(X1·X2 / exp(X3·X4) > 0)`, i.e. `Y = X1·X2`.
    Example2,
    Noise,
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "example1" => Ok(Model::Example1),
            "example2" => Ok(Model::Example2),
            "noise" => Ok(Model::Noise),
            other => Err(Error::UnknownModel(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimSpec {
    pub model: Model,
    pub n: usize,
    pub p: usize,
    pub seed: u64,
}

impl SimSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::TooFewRows(self.n));
        }
        if self.p == 0 {
            return Err(Error::InvalidConfig("p must be at least 1".into()));
        }
        if self.model != Model::Noise && self.p < 4 {
            return Err(Error::InvalidConfig(format!(
                "{:?} needs p >= 4, got {}",
                self.model, self.p
            )));
        }
        Ok(())
    }
}

/// Dispatches on `spec.model`.
pub fn generate(spec: &SimSpec) -> Result<DiscreteDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut columns = vec![Vec::with_capacity(spec.n); spec.p];
    let mut y = Vec::with_capacity(spec.n);
    let mut row = vec![0u32; spec.p];
    for _ in 0..spec.n {
        for slot in row.iter_mut() {
            *slot = u32::from(rng.random::<bool>());
        }
        let label = match spec.model {
            Model::Example1 => {
                if rng.random::<bool>() {
                    (row[0] + row[1]) % 2
                } else {
                    (row[1] + row[2] + row[3]) % 2
                }
            }
            Model::Example2 => row[0] * row[1],
            Model::Noise => u32::from(rng.random::<bool>()),
        };
        for (col, &c) in columns.iter_mut().zip(&row) {
            col.push(c);
        }
        y.push(label as f64);
    }
    DiscreteDataset::with_levels(
        columns,
        y,
        DiscreteDataset::default_names(spec.p),
        vec![2; spec.p],
    )
}

fn require(spec: &SimSpec, model: Model) -> Result<()> {
    if spec.model != model {
        return Err(Error::InvalidConfig(format!(
            "spec is for {:?}, not {model:?}",
            spec.model
        )));
    }
    Ok(())
}

pub fn gen_example1(spec: &SimSpec) -> Result<DiscreteDataset> {
    require(spec, Model::Example1)?;
    generate(spec)
}

pub fn gen_example2(spec: &SimSpec) -> Result<DiscreteDataset> {
    require(spec, Model::Example2)?;
    generate(spec)
}

pub fn gen_noise(spec: &SimSpec) -> Result<DiscreteDataset> {
    require(spec, Model::Noise)?;
    generate(spec)
}

/// Closed-form facts about a model: best achievable correct-classification
/// rate and the variable modules (0-based indices) that carry the signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Targets {
    pub bayes_rate: f64,
    pub modules: Vec<Vec<usize>>,
}

pub fn theoretical_targets(model: &str) -> Result<Targets> {
    match model.parse::<Model>()? {
        Model::Example1 => Ok(Targets {
            bayes_rate: 0.75,
            modules: vec![vec![0, 1], vec![1, 2, 3]],
        }),
        Model::Example2 => Ok(Targets {
            bayes_rate: 1.0,
            modules: vec![vec![0, 1]],
        }),
        Model::Noise => Err(Error::UnknownModel(
            "noise has no theoretical targets".into(),
        )),
    }
}

/// Settings for a real-valued dataset with a planted set of informative columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedSpec {
    pub n: usize,
    pub p: usize,
    pub informative: usize,
    pub seed: u64,
}

/// Every column is independent `N(0,1)`. The label is `1(Σ_{j∈S} x_j > 0)` over
/// the planted set `S`, so no single column decides it. `S` is a seeded random
/// subset of `0..p`, returned sorted alongside the data.
pub fn gen_planted(spec: &PlantedSpec) -> Result<(ContinuousDataset, Vec<usize>)> {
    if spec.n < 2 {
        return Err(Error::TooFewRows(spec.n));
    }
    if spec.informative == 0 || spec.informative > spec.p {
        return Err(Error::InvalidConfig(format!(
            "{} informative columns over p={}",
            spec.informative, spec.p
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut planted = rand::seq::index::sample(&mut rng, spec.p, spec.informative).into_vec();
    planted.sort_unstable();
    let mut is_planted = vec![false; spec.p];
    for &j in &planted {
        is_planted[j] = true;
    }
    let mut columns = vec![Vec::with_capacity(spec.n); spec.p];
    let mut y = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let mut signal = 0.0;
        for (j, col) in columns.iter_mut().enumerate() {
            let x: f64 = StandardNormal.sample(&mut rng);
            if is_planted[j] {
                signal += x;
            }
            col.push(x);
        }
        y.push(f64::from(u8::from(signal > 0.0)));
    }
    let ds = ContinuousDataset::new(columns, y, DiscreteDataset::default_names(spec.p))?;
    Ok((ds, planted))
}
