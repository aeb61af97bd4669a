//! Experiment configuration and its flat `key = value` text form.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::continual::ReplayStrategy;
use crate::dataset::{KnowledgeGraph, PartitionStrategy};
use crate::error::{Error, Result};
use crate::eval::RankSides;
use crate::optim::{NormalizeSchedule, TrainConfig};
use crate::synthetic::{self, SyntheticConfig};
use crate::transe::ModelConfig;

/// Strength used for "EWC + wave replay" when none is given.
pub const DEFAULT_EWC_REPLAY_LAMBDA: f64 = 10.0;

/// Seeds used for every reported number.
pub const REPORTING_SEEDS: [u64; 5] = [42, 123, 456, 789, 2024];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    Naive,
    Ewc { lambda: f64 },
    EwcPlusWaveReplay { lambda: f64 },
    ReplayRandom,
    ReplayWave,
}

impl Method {
    pub fn lambda(&self) -> Option<f64> {
        match *self {
            Method::Ewc { lambda } | Method::EwcPlusWaveReplay { lambda } => Some(lambda),
            _ => None,
        }
    }

    pub fn replay(&self) -> Option<ReplayStrategy> {
        match self {
            Method::EwcPlusWaveReplay { .. } | Method::ReplayWave => Some(ReplayStrategy::Wave),
            Method::ReplayRandom => Some(ReplayStrategy::Random),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Naive => "naive",
            Method::Ewc { .. } => "ewc",
            Method::EwcPlusWaveReplay { .. } => "ewc+wave",
            Method::ReplayRandom => "replay_random",
            Method::ReplayWave => "replay_wave",
        }
    }

    /// Parses `naive`, `ewc`, `ewc+wave` (alias `ewc_plus_wave_replay`),
    /// `replay_random`, `replay_wave`, optionally with `:lambda`.
    pub fn parse(spec: &str, lambda: Option<f64>) -> Result<Self> {
        let (name, inline) = match spec.split_once(':') {
            Some((n, l)) => (n, Some(parse_f64("lambda", l)?)),
            None => (spec, None),
        };
        let lambda = inline.or(lambda);
        let need = |l: Option<f64>| {
            l.ok_or_else(|| Error::Config(format!("method `{name}` needs a lambda")))
        };
        let method = match name.trim() {
            "naive" => Method::Naive,
            "ewc" => Method::Ewc {
                lambda: need(lambda)?,
            },
            "ewc+wave" | "ewc_plus_wave_replay" => Method::EwcPlusWaveReplay {
                lambda: lambda.unwrap_or(DEFAULT_EWC_REPLAY_LAMBDA),
            },
            "replay_random" => Method::ReplayRandom,
            "replay_wave" => Method::ReplayWave,
            other => return Err(Error::Config(format!("unknown method `{other}`"))),
        };
        if let Some(l) = method.lambda() {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(Error::Config(format!("lambda must be >= 0, got {l}")));
            }
        }
        Ok(method)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.lambda() {
            Some(l) => write!(f, "{}:{}", self.name(), l),
            None => f.write_str(self.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSource {
    /// Directory with `train.txt`, `valid.txt`, `test.txt`.
    Directory {
        path: PathBuf,
    },
    Synthetic(SyntheticConfig),
}

impl DatasetSource {
    pub fn load(&self) -> Result<KnowledgeGraph> {
        match self {
            DatasetSource::Directory { path } => KnowledgeGraph::load_dir(path),
            DatasetSource::Synthetic(cfg) => synthetic::generate(cfg),
        }
    }

    pub fn cache_key(&self) -> String {
        match self {
            DatasetSource::Directory { path } => format!("dir:{}", path.display()),
            DatasetSource::Synthetic(c) => format!("synthetic:{c:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub partition: PartitionStrategy,
    pub num_tasks: usize,
    pub method: Method,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub fisher_batch_size: usize,
    pub replay_capacity: usize,
    pub eval_sides: RankSides,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetSource::Directory {
                path: PathBuf::from("data/FB15k-237"),
            },
            partition: PartitionStrategy::RelationRoundRobin,
            num_tasks: 4,
            method: Method::Naive,
            model: ModelConfig::default(),
            train: TrainConfig::default(),
            fisher_batch_size: 256,
            replay_capacity: 500,
            eval_sides: RankSides::Both,
            seed: 42,
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: expected a number, got `{v}`")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.trim().parse().map_err(|_| {
        Error::Config(format!(
            "`{key}`: expected a non-negative integer, got `{v}`"
        ))
    })
}

fn parse_u64(key: &str, v: &str) -> Result<u64> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: expected an integer, got `{v}`")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!(
            "`{key}`: expected a boolean, got `{v}`"
        ))),
    }
}

/// Iterates `key = value` lines, skipping blanks and `#` comments.
pub(crate) fn kv_lines(text: &str) -> impl Iterator<Item = Result<(usize, &str, &str)>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            return None;
        }
        Some(match line.split_once('=') {
            Some((k, v)) => Ok((i + 1, k.trim(), v.trim())),
            None => Err(Error::Config(format!(
                "line {}: expected `key = value`",
                i + 1
            ))),
        })
    })
}

impl ExperimentConfig {
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut lambda = None;
        let mut method = None;
        for entry in kv_lines(text) {
            let (line, key, value) = entry?;
            match key {
                "method" => method = Some(value.to_string()),
                "lambda" => lambda = Some(parse_f64(key, value)?),
                _ => cfg
                    .set(key, value)
                    .map_err(|e| Error::Config(format!("line {line}: {e}")))?,
            }
        }
        if let Some(m) = method {
            cfg.method = Method::parse(&m, lambda)?;
        } else if lambda.is_some() {
            return Err(Error::Config("`lambda` given without an EWC method".into()));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_kv(&text)
    }

    /// Applies one `key = value` override. `method` here accepts the
    /// `name:lambda` form; `lambda` alone rewrites the current method's strength.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "dataset" => {
                self.dataset = if value == "synthetic" {
                    match self.dataset {
                        DatasetSource::Synthetic(_) => self.dataset.clone(),
                        _ => DatasetSource::Synthetic(SyntheticConfig::default()),
                    }
                } else {
                    DatasetSource::Directory { path: value.into() }
                }
            }
            k if k.starts_with("synthetic_") => {
                let mut s = match &self.dataset {
                    DatasetSource::Synthetic(s) => *s,
                    _ => SyntheticConfig::default(),
                };
                match &k["synthetic_".len()..] {
                    "entities" => s.entities = parse_usize(k, value)?,
                    "relations" => s.relations = parse_usize(k, value)?,
                    "triples" => s.triples = parse_usize(k, value)?,
                    "latent_dim" => s.latent_dim = parse_usize(k, value)?,
                    "views" => s.views = parse_usize(k, value)?,
                    "candidates" => s.candidates = parse_usize(k, value)?,
                    "zipf_exponent" => s.zipf_exponent = parse_f64(k, value)?,
                    "valid_fraction" => s.valid_fraction = parse_f64(k, value)?,
                    "test_fraction" => s.test_fraction = parse_f64(k, value)?,
                    "seed" => s.seed = parse_u64(k, value)?,
                    _ => return Err(Error::Config(format!("unknown key `{k}`"))),
                }
                self.dataset = DatasetSource::Synthetic(s);
            }
            "partition" => self.partition = value.parse()?,
            "tasks" => self.num_tasks = parse_usize(key, value)?,
            "method" => self.method = Method::parse(value, self.method.lambda())?,
            "lambda" => {
                let l = parse_f64(key, value)?;
                self.method = match self.method {
                    Method::Ewc { .. } => Method::Ewc { lambda: l },
                    Method::EwcPlusWaveReplay { .. } => Method::EwcPlusWaveReplay { lambda: l },
                    other => {
                        return Err(Error::Config(format!("method `{other}` takes no lambda")))
                    }
                };
            }
            "dim" => self.model.dim = parse_usize(key, value)?,
            "margin" => self.model.margin = parse_f64(key, value)?,
            "normalize_entities" => self.model.normalize_entities = parse_bool(key, value)?,
            "normalize_schedule" => {
                self.train.normalize = match value {
                    "epoch" => NormalizeSchedule::PerEpoch,
                    "batch" => NormalizeSchedule::PerBatch,
                    _ => return Err(Error::Config(format!("`{key}`: expected epoch|batch"))),
                }
            }
            "epochs" => self.train.epochs = parse_usize(key, value)?,
            "batch_size" => self.train.batch_size = parse_usize(key, value)?,
            "lr" => self.train.adam.lr = parse_f64(key, value)?,
            "beta1" => self.train.adam.beta1 = parse_f64(key, value)?,
            "beta2" => self.train.adam.beta2 = parse_f64(key, value)?,
            "eps" => self.train.adam.eps = parse_f64(key, value)?,
            "reset_adam" => self.train.reset_adam_per_task = parse_bool(key, value)?,
            "fisher_batch_size" => self.fisher_batch_size = parse_usize(key, value)?,
            "replay_capacity" => self.replay_capacity = parse_usize(key, value)?,
            "eval_sides" => {
                self.eval_sides = match value {
                    "both" => RankSides::Both,
                    "tail" => RankSides::TailOnly,
                    _ => return Err(Error::Config(format!("`{key}`: expected both|tail"))),
                }
            }
            "seed" => self.seed = parse_u64(key, value)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.num_tasks < 2 {
            return Err(Error::Config("tasks must be >= 2".into()));
        }
        if self.train.batch_size == 0 || self.fisher_batch_size == 0 {
            return Err(Error::Config("batch sizes must be >= 1".into()));
        }
        Ok(())
    }

    /// Resolved configuration, one key per line in a fixed order. This text
    /// is what gets hashed into the run id.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        match &self.dataset {
            DatasetSource::Directory { path } => put("dataset", path.display().to_string()),
            DatasetSource::Synthetic(c) => {
                put("dataset", "synthetic".into());
                put("synthetic_entities", c.entities.to_string());
                put("synthetic_relations", c.relations.to_string());
                put("synthetic_triples", c.triples.to_string());
                put("synthetic_latent_dim", c.latent_dim.to_string());
                put("synthetic_views", c.views.to_string());
                put("synthetic_candidates", c.candidates.to_string());
                put("synthetic_zipf_exponent", c.zipf_exponent.to_string());
                put("synthetic_valid_fraction", c.valid_fraction.to_string());
                put("synthetic_test_fraction", c.test_fraction.to_string());
                put("synthetic_seed", c.seed.to_string());
            }
        }
        put("partition", self.partition.to_string());
        put("tasks", self.num_tasks.to_string());
        put("method", self.method.name().to_string());
        if let Some(l) = self.method.lambda() {
            put("lambda", l.to_string());
        }
        put("dim", self.model.dim.to_string());
        put("margin", self.model.margin.to_string());
        put(
            "normalize_entities",
            self.model.normalize_entities.to_string(),
        );
        put(
            "normalize_schedule",
            match self.train.normalize {
                NormalizeSchedule::PerEpoch => "epoch",
                NormalizeSchedule::PerBatch => "batch",
            }
            .into(),
        );
        put("epochs", self.train.epochs.to_string());
        put("batch_size", self.train.batch_size.to_string());
        put("lr", self.train.adam.lr.to_string());
        put("beta1", self.train.adam.beta1.to_string());
        put("beta2", self.train.adam.beta2.to_string());
        put("eps", self.train.adam.eps.to_string());
        put("reset_adam", self.train.reset_adam_per_task.to_string());
        put("fisher_batch_size", self.fisher_batch_size.to_string());
        put("replay_capacity", self.replay_capacity.to_string());
        put(
            "eval_sides",
            match self.eval_sides {
                RankSides::Both => "both",
                RankSides::TailOnly => "tail",
            }
            .into(),
        );
        put("seed", self.seed.to_string());
        s
    }

    /// First 16 hex digits of SHA-256 over [`to_kv`](Self::to_kv).
    pub fn run_id(&self) -> String {
        let digest = Sha256::digest(self.to_kv().as_bytes());
        hex::encode(&digest[..8])
    }
}

/// Cartesian grid over seeds, methods and partitions on top of a base
/// config. Grid files are config files where `seeds`, `methods` and
/// `partitions` may hold comma-separated lists.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub base: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    pub partitions: Vec<PartitionStrategy>,
}

impl GridSpec {
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut base_lines = String::new();
        let mut seeds = None;
        let mut methods = None;
        let mut partitions = None;
        for entry in kv_lines(text) {
            let (_, key, value) = entry?;
            let items = || value.split(',').map(str::trim).filter(|s| !s.is_empty());
            match key {
                "seeds" => {
                    seeds = Some(
                        items()
                            .map(|s| parse_u64(key, s))
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
                "methods" => {
                    methods = Some(
                        items()
                            .map(|m| Method::parse(m, None))
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
                "partitions" => {
                    partitions = Some(items().map(str::parse).collect::<Result<Vec<_>>>()?)
                }
                _ => {
                    let _ = writeln!(base_lines, "{key} = {value}");
                }
            }
        }
        let base = ExperimentConfig::from_kv(&base_lines)?;
        Ok(Self {
            seeds: seeds.unwrap_or_else(|| vec![base.seed]),
            methods: methods.unwrap_or_else(|| vec![base.method]),
            partitions: partitions.unwrap_or_else(|| vec![base.partition]),
            base,
        })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_kv(&text)
    }

    /// Full method x seed x partition grid with the five reporting seeds.
    pub fn full(base: ExperimentConfig) -> Self {
        Self {
            base,
            seeds: REPORTING_SEEDS.to_vec(),
            methods: full_grid_methods(),
            partitions: vec![
                PartitionStrategy::RelationRoundRobin,
                PartitionStrategy::Random,
            ],
        }
    }

    /// Configs ordered partition-major, then method, then seed.
    pub fn expand(&self) -> Vec<ExperimentConfig> {
        let mut out = Vec::new();
        for &partition in &self.partitions {
            for &method in &self.methods {
                for &seed in &self.seeds {
                    out.push(ExperimentConfig {
                        partition,
                        method,
                        seed,
                        ..self.base.clone()
                    });
                }
            }
        }
        out
    }
}

/// The eight methods of the full grid: naive, EWC at three strengths, both
/// replay buffers, and EWC plus wave replay at λ = 10 and λ = 1.
pub fn full_grid_methods() -> Vec<Method> {
    vec![
        Method::Naive,
        Method::Ewc { lambda: 0.1 },
        Method::Ewc { lambda: 1.0 },
        Method::Ewc { lambda: 10.0 },
        Method::EwcPlusWaveReplay { lambda: 10.0 },
        Method::ReplayRandom,
        Method::ReplayWave,
        Method::EwcPlusWaveReplay { lambda: 1.0 },
    ]
}
