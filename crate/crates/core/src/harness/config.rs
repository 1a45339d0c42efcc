//! Experiment configuration: defaults, named presets, `key=value` files and
//! command-line overrides, applied in that order.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fl::AggregationRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    Mnist,
    FashionMnist,
    Cifar100,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    FedAvg,
    FedBa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Cnn6,
    Mlp,
}

macro_rules! string_enum {
    ($ty:ident { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(&self) -> &'static str {
                match self { $($ty::$variant => $name),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $($name => Ok($ty::$variant),)+
                    other => Err(format!(
                        "unknown value `{other}` (expected one of: {})",
                        [$($name),+].join(", ")
                    )),
                }
            }
        }
    };
}

string_enum!(DatasetKind { Mnist => "mnist", FashionMnist => "fashion-mnist", Cifar100 => "cifar100" });
string_enum!(Algorithm { FedAvg => "fedavg", FedBa => "fedba" });
string_enum!(ModelKind { Cnn6 => "cnn6", Mlp => "mlp" });

impl Algorithm {
    pub fn rule(&self) -> AggregationRule {
        match self {
            Algorithm::FedAvg => AggregationRule::FedAvg,
            Algorithm::FedBa => AggregationRule::fedba(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetKind,
    pub data_dir: PathBuf,
    pub algorithm: Algorithm,
    /// K
    pub num_clients: usize,
    /// C
    pub sample_rate: f64,
    /// η
    pub learning_rate: f64,
    /// E
    pub local_epochs: usize,
    /// B
    pub batch_size: usize,
    /// μ
    pub dirichlet_mu: f64,
    /// T
    pub rounds: u64,
    pub per_client_count: usize,
    pub model: ModelKind,
    pub seed: u64,
    pub eval_every: u64,
    pub out_path: PathBuf,
    /// Use only this many (seeded, randomly chosen) training samples.
    pub train_subset: Option<usize>,
}

pub const KEYS: &[&str] = &[
    "dataset",
    "data_dir",
    "algorithm",
    "num_clients",
    "sample_rate",
    "learning_rate",
    "local_epochs",
    "batch_size",
    "dirichlet_mu",
    "rounds",
    "per_client_count",
    "model",
    "seed",
    "eval_every",
    "out_path",
    "train_subset",
];

pub const PRESETS: &[&str] = &["mnist-paper", "fashion-paper", "cifar100-paper"];

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: DatasetKind::Mnist,
            data_dir: PathBuf::from("data/mnist"),
            algorithm: Algorithm::FedBa,
            num_clients: 20,
            sample_rate: 0.6,
            learning_rate: 1e-3,
            local_epochs: 5,
            batch_size: 64,
            dirichlet_mu: 0.1,
            rounds: 500,
            per_client_count: 3000,
            model: ModelKind::Cnn6,
            seed: 0,
            eval_every: 1,
            out_path: PathBuf::from("metrics.csv"),
            train_subset: None,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::config(key, format!("cannot parse `{value}`: {e}")))
}

impl ExperimentConfig {
    /// Full-scale hyperparameters for one of [`PRESETS`].
    pub fn preset(name: &str) -> Result<Self> {
        let base = ExperimentConfig::default();
        let (dataset, data_dir, per_client_count) = match name {
            "mnist-paper" => (DatasetKind::Mnist, "data/mnist", 3000),
            "fashion-paper" => (DatasetKind::FashionMnist, "data/fashion-mnist", 3000),
            "cifar100-paper" => (DatasetKind::Cifar100, "data/cifar-100-binary", 2500),
            other => {
                return Err(Error::config(
                    "preset",
                    format!("unknown preset `{other}` (expected one of: {})", PRESETS.join(", ")),
                ))
            }
        };
        Ok(ExperimentConfig {
            dataset,
            data_dir: PathBuf::from(data_dir),
            per_client_count,
            ..base
        })
    }

    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "dataset" => self.dataset = parse_value(key, value)?,
            "data_dir" => self.data_dir = PathBuf::from(value),
            "algorithm" => self.algorithm = parse_value(key, value)?,
            "num_clients" => self.num_clients = parse_value(key, value)?,
            "sample_rate" => self.sample_rate = parse_value(key, value)?,
            "learning_rate" => self.learning_rate = parse_value(key, value)?,
            "local_epochs" => self.local_epochs = parse_value(key, value)?,
            "batch_size" => self.batch_size = parse_value(key, value)?,
            "dirichlet_mu" => self.dirichlet_mu = parse_value(key, value)?,
            "rounds" => self.rounds = parse_value(key, value)?,
            "per_client_count" => self.per_client_count = parse_value(key, value)?,
            "model" => self.model = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "eval_every" => self.eval_every = parse_value(key, value)?,
            "out_path" => self.out_path = PathBuf::from(value),
            "train_subset" => {
                self.train_subset = match value {
                    "" | "none" => None,
                    v => Some(parse_value(key, v)?),
                }
            }
            other => return Err(Error::config(other, "unknown key")),
        }
        Ok(())
    }

    /// Range checks for every numeric field.
    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(key, format!("must be a positive number, got {v}")))
            }
        };
        let at_least_one = |key: &str, v: u64| {
            if v >= 1 {
                Ok(())
            } else {
                Err(Error::config(key, "must be at least 1"))
            }
        };
        at_least_one("num_clients", self.num_clients as u64)?;
        if !(self.sample_rate > 0.0 && self.sample_rate <= 1.0) {
            return Err(Error::config(
                "sample_rate",
                format!("must lie in (0, 1], got {}", self.sample_rate),
            ));
        }
        positive("learning_rate", self.learning_rate)?;
        at_least_one("local_epochs", self.local_epochs as u64)?;
        at_least_one("batch_size", self.batch_size as u64)?;
        positive("dirichlet_mu", self.dirichlet_mu)?;
        at_least_one("per_client_count", self.per_client_count as u64)?;
        at_least_one("eval_every", self.eval_every)?;
        if let Some(n) = self.train_subset {
            at_least_one("train_subset", n as u64)?;
            if self.per_client_count.saturating_mul(self.num_clients) > n {
                return Err(Error::config(
                    "train_subset",
                    format!(
                        "{n} samples cannot give {} clients {} samples each",
                        self.num_clients, self.per_client_count
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Canonical `key=value` rendering; [`parse_config`] reads it back.
    pub fn to_config_text(&self) -> String {
        let subset = self
            .train_subset
            .map_or_else(|| "none".to_string(), |n| n.to_string());
        let values = [
            self.dataset.to_string(),
            self.data_dir.display().to_string(),
            self.algorithm.to_string(),
            self.num_clients.to_string(),
            self.sample_rate.to_string(),
            self.learning_rate.to_string(),
            self.local_epochs.to_string(),
            self.batch_size.to_string(),
            self.dirichlet_mu.to_string(),
            self.rounds.to_string(),
            self.per_client_count.to_string(),
            self.model.to_string(),
            self.seed.to_string(),
            self.eval_every.to_string(),
            self.out_path.display().to_string(),
            subset,
        ];
        KEYS.iter()
            .zip(values)
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }
}

/// Splits a config file into `(key, value)` pairs. Blank lines and lines
/// starting with `#` are skipped; a key may appear only once.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::config(line, format!("line {} is not `key=value`", lineno + 1))
        })?;
        let key = key.trim();
        if pairs.iter().any(|(k, _)| k == key) {
            return Err(Error::config(key, format!("repeated on line {}", lineno + 1)));
        }
        pairs.push((key.to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

/// Builds a config from an optional preset, optional file contents and
/// overrides (later sources win), then validates it.
pub fn parse_config(
    preset: Option<&str>,
    file_text: Option<&str>,
    overrides: &[(String, String)],
) -> Result<ExperimentConfig> {
    let mut cfg = match preset {
        Some(name) => ExperimentConfig::preset(name)?,
        None => ExperimentConfig::default(),
    };
    if let Some(text) = file_text {
        for (k, v) in parse_config_text(text)? {
            cfg.set(&k, &v)?;
        }
    }
    for (k, v) in overrides {
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}
