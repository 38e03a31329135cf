//! Run configuration: command-line flags merged over an optional JSON file.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use decoupled_core::limits::{LimitProcess, MarginalLaw};
use decoupled_core::tails::{Regime, TailModel};
use decoupled_core::verify::Statistic;
use decoupled_core::walks::SamplerKind;
use serde::Deserialize;
use serde_json::Value;

/// Flags shared by every subcommand. Each one mirrors a key of the JSON
/// config file; flags win over the file.
#[derive(Args, Debug, Default, Clone)]
pub struct Flags {
    /// JSON config file; keys as below in snake_case, unknown keys rejected
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Increment law as JSON, e.g. '{"family":"pareto_pure","alpha":1.5,"x_min":1}', or a path to such a file
    #[arg(long)]
    pub model: Option<String>,
    /// R1, R1c, R2, R3, R4 for walks; X1..X4 or X1inv..X4inv for limit laws
    #[arg(long)]
    pub regime: Option<String>,
    /// Limit-process parameters as JSON, e.g. '{"alpha":2.5,"mu":1}'
    #[arg(long)]
    pub params: Option<String>,
    /// Scale parameter v
    #[arg(long)]
    pub v: Option<f64>,
    /// Comma-separated v values
    #[arg(long)]
    pub v_grid: Option<String>,
    /// Time or level t
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    /// Level y for the large-deviation check
    #[arg(long)]
    pub y: Option<f64>,
    /// Tail index for verify-tau-exp
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Number of replicates
    #[arg(long)]
    pub n: Option<u64>,
    /// Path length for sample-walk
    #[arg(long)]
    pub len: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Truncation budget for limit samplers
    #[arg(long)]
    pub eps: Option<f64>,
    /// Time window as t_lo,t_hi
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    /// Output file
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads, 0 = all cores
    #[arg(long)]
    pub threads: Option<usize>,
    /// max or tau
    #[arg(long)]
    pub statistic: Option<String>,
    /// auto, direct or fast
    #[arg(long)]
    pub sampler: Option<String>,
    /// Cap on first-passage searches
    #[arg(long)]
    pub n_cap: Option<u64>,
    /// Record wall time in reports (makes them run-dependent)
    #[arg(long)]
    pub timing: bool,
}

/// The merged configuration.
#[derive(Deserialize, Debug, Default, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<TailModel>,
    pub regime: Option<String>,
    pub params: Option<Value>,
    pub v: Option<f64>,
    pub v_grid: Option<Vec<f64>>,
    pub t: Option<f64>,
    pub y: Option<f64>,
    pub alpha: Option<f64>,
    pub n: Option<u64>,
    pub len: Option<u64>,
    pub seed: Option<u64>,
    pub eps: Option<f64>,
    pub window: Option<[f64; 2]>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub statistic: Option<String>,
    pub sampler: Option<String>,
    pub n_cap: Option<u64>,
    pub timing: Option<bool>,
}

fn json_or_file(text: &str) -> Result<String> {
    if text.trim_start().starts_with('{') {
        Ok(text.to_string())
    } else {
        std::fs::read_to_string(text).with_context(|| format!("reading {text}"))
    }
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad number {s:?} in --{what}")))
        .collect()
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn from_flags(f: &Flags) -> Result<Self> {
        let model = match &f.model {
            Some(m) => Some(TailModel::from_json(&json_or_file(m)?).context("parsing --model")?),
            None => None,
        };
        let params = match &f.params {
            Some(p) => Some(serde_json::from_str(&json_or_file(p)?).context("parsing --params")?),
            None => None,
        };
        let window = match &f.window {
            Some(w) => match parse_list(w, "window")?.as_slice() {
                [a, b] => Some([*a, *b]),
                _ => bail!("--window needs two numbers t_lo,t_hi"),
            },
            None => None,
        };
        Ok(Self {
            model,
            regime: f.regime.clone(),
            params,
            v: f.v,
            v_grid: f.v_grid.as_deref().map(|g| parse_list(g, "v-grid")).transpose()?,
            t: f.t,
            y: f.y,
            alpha: f.alpha,
            n: f.n,
            len: f.len,
            seed: f.seed,
            eps: f.eps,
            window,
            out: f.out.clone(),
            threads: f.threads,
            statistic: f.statistic.clone(),
            sampler: f.sampler.clone(),
            n_cap: f.n_cap,
            timing: f.timing.then_some(true),
        })
    }

    /// Fields set in `self` win over `base`.
    pub fn over(self, base: Self) -> Self {
        Self {
            model: self.model.or(base.model),
            regime: self.regime.or(base.regime),
            params: self.params.or(base.params),
            v: self.v.or(base.v),
            v_grid: self.v_grid.or(base.v_grid),
            t: self.t.or(base.t),
            y: self.y.or(base.y),
            alpha: self.alpha.or(base.alpha),
            n: self.n.or(base.n),
            len: self.len.or(base.len),
            seed: self.seed.or(base.seed),
            eps: self.eps.or(base.eps),
            window: self.window.or(base.window),
            out: self.out.or(base.out),
            threads: self.threads.or(base.threads),
            statistic: self.statistic.or(base.statistic),
            sampler: self.sampler.or(base.sampler),
            n_cap: self.n_cap.or(base.n_cap),
            timing: self.timing.or(base.timing),
        }
    }

    pub fn load(f: &Flags) -> Result<Self> {
        let base = match &f.config {
            Some(path) => Self::from_file(path)?,
            None => Self::default(),
        };
        Ok(Self::from_flags(f)?.over(base))
    }

    pub fn model(&self) -> Result<TailModel> {
        self.model.ok_or_else(|| anyhow!("--model is required"))
    }

    pub fn t(&self) -> Result<f64> {
        self.t.ok_or_else(|| anyhow!("--t is required"))
    }

    pub fn v(&self) -> Result<f64> {
        self.v.ok_or_else(|| anyhow!("--v is required"))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn threads(&self) -> usize {
        self.threads.unwrap_or(0)
    }

    pub fn eps(&self) -> f64 {
        self.eps.unwrap_or(decoupled_core::verify::DEFAULT_EPS)
    }

    pub fn n(&self, default: u64) -> u64 {
        self.n.unwrap_or(default)
    }

    /// The walk regime; defaults to the model's own.
    pub fn walk_regime(&self, model: &TailModel) -> Result<Regime> {
        match &self.regime {
            Some(r) => Ok(Regime::parse(r)?),
            None => Ok(decoupled_core::classify_regime(model)),
        }
    }

    pub fn statistic(&self) -> Result<Option<Statistic>> {
        self.statistic
            .as_deref()
            .map(|s| match s.to_ascii_lowercase().as_str() {
                "max" => Ok(Statistic::Max),
                "tau" => Ok(Statistic::Tau),
                _ => bail!("--statistic must be max or tau, got {s:?}"),
            })
            .transpose()
    }

    pub fn sampler(&self) -> Result<SamplerKind> {
        match self.sampler.as_deref().map(str::to_ascii_lowercase).as_deref() {
            None | Some("auto") => Ok(SamplerKind::Auto),
            Some("direct") => Ok(SamplerKind::Direct),
            Some("fast") => Ok(SamplerKind::Fast),
            Some(s) => bail!("--sampler must be auto, direct or fast, got {s:?}"),
        }
    }

    /// The limit process named by `--regime` (X1..X4, optional `inv`
    /// suffix) with `--params`, and whether the inverse is meant.
    pub fn limit_process(&self) -> Result<(LimitProcess, bool)> {
        let name = self.regime.as_deref().ok_or_else(|| anyhow!("--regime is required (X1..X4 or X1inv..X4inv)"))?;
        let lower = name.trim().to_ascii_lowercase();
        let (base, inverse) = match lower.strip_suffix("inv") {
            Some(b) => (b.to_string(), true),
            None => (lower.clone(), false),
        };
        if !matches!(base.as_str(), "x1" | "x2" | "x3" | "x4") {
            bail!("unknown limit process {name:?}");
        }
        let mut obj = match &self.params {
            Some(Value::Object(m)) => m.clone(),
            Some(other) => bail!("--params must be a JSON object, got {other}"),
            None => serde_json::Map::new(),
        };
        obj.insert("process".into(), Value::String(base));
        let process: LimitProcess =
            serde_json::from_value(Value::Object(obj)).with_context(|| format!("parameters for {name}"))?;
        process.validate()?;
        Ok((process, inverse))
    }

    pub fn marginal_law(&self) -> Result<MarginalLaw> {
        let (process, inverse) = self.limit_process()?;
        Ok(MarginalLaw::new(process, inverse, self.t()?)?)
    }
}
