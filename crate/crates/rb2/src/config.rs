//! Run configuration from a flat `key = value` file and command-line flags.
//!
//! Keys are the long flag names without dashes in front, e.g.
//! `batch-size = 128`; underscores are accepted in place of hyphens. Lines
//! starting with `#` are comments. Values are applied in the order defaults,
//! file, flags, so flags win.

use std::path::PathBuf;

use rb2_core::sampling::Sampler;

use crate::experiment::{Algorithm, ExperimentConfig};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct RunSettings {
    pub dataset: Option<PathBuf>,
    pub algos: Vec<Algorithm>,
    pub seeds: Vec<u64>,
    /// LinUCB runs once per value.
    pub alphas: Vec<f64>,
    pub out_dir: PathBuf,
    pub delta_schedule: Option<PathBuf>,
    /// Write the model after every batch, not only the final one.
    pub checkpoints: bool,
    pub experiment: ExperimentConfig,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            dataset: None,
            algos: vec![Algorithm::Rb2Informed],
            seeds: vec![0],
            alphas: vec![ExperimentConfig::default().alpha],
            out_dir: PathBuf::from("runs"),
            delta_schedule: None,
            checkpoints: false,
            experiment: ExperimentConfig::default(),
        }
    }
}

fn list<T>(value: &str, parse: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let items = value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(parse).collect::<Result<Vec<T>>>()?;
    if items.is_empty() {
        return Err(Error::Invalid("empty list".into()));
    }
    Ok(items)
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Invalid(format!("`{key}`: cannot parse `{value}`")))
}

fn positive(key: &str, value: &str) -> Result<usize> {
    let n: usize = num(key, value)?;
    if n == 0 {
        return Err(Error::Invalid(format!("`{key}` must be >= 1")));
    }
    Ok(n)
}

fn boolean(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        v => Err(Error::Invalid(format!("`{key}`: expected true or false, got `{v}`"))),
    }
}

impl RunSettings {
    /// Applies one setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        let k = key.as_str();
        let e = &mut self.experiment;
        match k {
            "dataset" => self.dataset = Some(PathBuf::from(value.trim())),
            "algo" => self.algos = list(value, |s| s.parse())?,
            "seeds" => self.seeds = list(value, |s| num(k, s))?,
            "alpha" => {
                self.alphas = list(value, |s| {
                    let a: f64 = num(k, s)?;
                    if a >= 0.0 && a.is_finite() {
                        Ok(a)
                    } else {
                        Err(Error::Invalid(format!("`{k}` must be >= 0")))
                    }
                })?
            }
            "out-dir" => self.out_dir = PathBuf::from(value.trim()),
            "delta-schedule" => self.delta_schedule = Some(PathBuf::from(value.trim())),
            "checkpoints" => self.checkpoints = boolean(k, value)?,
            "batch-size" => e.batch_size = positive(k, value)?,
            "batches" => e.batches = positive(k, value)?,
            "trees-per-batch" => e.trees_per_batch = positive(k, value)?,
            "tau" => e.tau = num(k, value)?,
            "epsilon" => e.epsilon = num(k, value)?,
            "eta" => e.eta = num(k, value)?,
            "sampler" => {
                e.sampler = match value.trim() {
                    "default" => None,
                    s => Some(
                        s.parse::<Sampler>().map_err(|_| Error::Invalid(format!("`{k}`: unknown sampler `{s}`")))?,
                    ),
                }
            }
            "sample-size" => e.sample_size = Some(positive(k, value)?),
            "coldstart-frac" => e.coldstart_frac = num(k, value)?,
            "coldstart-arms" => {
                e.coldstart_arms = match value.trim() {
                    "all" => None,
                    v => Some(list(v, |s| Ok(s.to_string()))?),
                }
            }
            "max-depth" => e.max_depth = num(k, value)?,
            "linucb-max-dim" => e.linucb_max_dim = positive(k, value)?,
            "accumulate-buffer" => e.accumulate_buffer = boolean(k, value)?,
            "per-arm-models" => e.per_arm_models = boolean(k, value)?,
            _ => return Err(Error::Invalid(format!("unknown setting `{k}`"))),
        }
        Ok(())
    }

    /// Applies the settings of a config file.
    pub fn apply_file(&mut self, text: &str, file: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::parse(file, i + 1, "expected `key = value`"))?;
            self.set(k, v).map_err(|e| Error::parse(file, i + 1, e.to_string()))?;
        }
        Ok(())
    }

    /// Checks cross-field constraints once all sources are applied.
    pub fn validate(&self) -> Result<()> {
        if self.dataset.is_none() {
            return Err(Error::Invalid("no dataset given".into()));
        }
        let e = &self.experiment;
        if !(e.coldstart_frac > 0.0 && e.coldstart_frac < 1.0) {
            return Err(Error::Invalid("`coldstart-frac` must lie in (0, 1)".into()));
        }
        for &algo in &self.algos {
            if algo.is_boosted() {
                e.policy(algo, 0).map_err(|err| Error::Invalid(format!("{algo}: {err}")))?;
            }
        }
        Ok(())
    }
}
