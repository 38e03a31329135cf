//! Decoupled random walks and their functionals.
//!
//! Ŝ_n is built from its own random stream (stream id `n` under the
//! replicate key), so values at distinct indices are independent and any
//! index can be generated on demand without touching the others.

mod io;
mod normalized;

use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::StreamKey;
use crate::tails::TailModel;

pub use io::{write_ensemble, write_path_csv, EnsembleMeta};
pub use normalized::{normalized_max_marginal, normalized_tau_marginal, MaxStatistic, TauStatistic};

/// How Ŝ_n is generated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    /// Fast when the family has a closed-form law for S_n, direct otherwise.
    #[default]
    Auto,
    /// A fresh sum of n increments for every index.
    Direct,
    /// One Gamma(n·shape, rate) draw per index; Gamma and Exponential only.
    Fast,
}

impl SamplerKind {
    fn resolve(self, model: &TailModel) -> Result<SamplerKind> {
        let closed_form = matches!(model, TailModel::Gamma { .. } | TailModel::Exponential { .. });
        match self {
            SamplerKind::Auto if closed_form => Ok(SamplerKind::Fast),
            SamplerKind::Auto => Ok(SamplerKind::Direct),
            SamplerKind::Fast if !closed_form => Err(Error::UnsupportedFamily(model.family_name())),
            kind => Ok(kind),
        }
    }
}

/// Generates Ŝ_n for one replicate.
#[derive(Clone, Copy, Debug)]
pub struct WalkSampler {
    model: TailModel,
    key: StreamKey,
    kind: SamplerKind,
}

impl WalkSampler {
    pub fn new(model: TailModel, key: StreamKey, kind: SamplerKind) -> Result<Self> {
        model.validate()?;
        let kind = kind.resolve(&model)?;
        Ok(Self { model, key, kind })
    }

    pub fn model(&self) -> &TailModel {
        &self.model
    }

    pub fn kind(&self) -> SamplerKind {
        self.kind
    }

    /// Ŝ_n for n ≥ 1.
    pub fn value(&self, n: u64) -> f64 {
        debug_assert!(n >= 1);
        let mut rng = self.key.stream(n);
        match (self.kind, self.model) {
            (SamplerKind::Fast, TailModel::Exponential { rate }) => gamma_draw(n as f64, rate, &mut rng),
            (SamplerKind::Fast, TailModel::Gamma { shape, rate }) => gamma_draw(n as f64 * shape, rate, &mut rng),
            _ => (0..n).map(|_| self.model.sample(&mut rng)).sum(),
        }
    }
}

fn gamma_draw<R: rand::Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    // shape and rate were validated positive, so construction cannot fail
    Gamma::new(shape, 1.0 / rate).expect("validated gamma parameters").sample(rng)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoupledSample {
    /// `values[n - 1]` is Ŝ_n.
    pub values: Vec<f64>,
    pub model: TailModel,
    pub key: StreamKey,
    pub kind: SamplerKind,
}

impl DecoupledSample {
    pub fn running_max(&self) -> Vec<f64> {
        running_max(&self.values)
    }

    /// First n with Ŝ_n > t among the stored values.
    pub fn first_passage(&self, t: f64) -> Passage {
        match self.values.iter().position(|&s| s > t) {
            Some(i) => Passage::Found(i as u64 + 1),
            None => Passage::Capped(self.values.len() as u64),
        }
    }

    pub fn visits(&self, t: f64) -> u64 {
        self.values.iter().filter(|&&s| s <= t).count() as u64
    }
}

pub fn sample_decoupled(model: &TailModel, n_max: u64, key: StreamKey, kind: SamplerKind) -> Result<DecoupledSample> {
    if n_max == 0 {
        return Err(Error::Domain("n_max must be at least 1".into()));
    }
    let sampler = WalkSampler::new(*model, key, kind)?;
    let values = (1..=n_max).map(|n| sampler.value(n)).collect();
    Ok(DecoupledSample { values, model: *model, key, kind: sampler.kind })
}

/// Every Ŝ_n is a fresh sum of n increments: n_max(n_max + 1)/2 draws in all.
pub fn sample_decoupled_direct(model: &TailModel, n_max: u64, key: StreamKey) -> Result<DecoupledSample> {
    sample_decoupled(model, n_max, key, SamplerKind::Direct)
}

/// Ŝ_n drawn from the Gamma law of S_n in one step per index.
pub fn sample_decoupled_fast(model: &TailModel, n_max: u64, key: StreamKey) -> Result<DecoupledSample> {
    sample_decoupled(model, n_max, key, SamplerKind::Fast)
}

pub fn running_max(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .scan(f64::NEG_INFINITY, |m, &x| {
            *m = m.max(x);
            Some(*m)
        })
        .collect()
}

/// Outcome of a first-passage search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Passage {
    Found(u64),
    /// No passage up to and including the cap.
    Capped(u64),
}

impl Passage {
    pub fn found(self) -> Option<u64> {
        match self {
            Passage::Found(n) => Some(n),
            Passage::Capped(_) => None,
        }
    }
}

/// inf{n ≥ 1 : Ŝ_n − drift·n > level}, generating indices lazily.
pub(crate) fn passage_with_drift(sampler: &WalkSampler, level: f64, drift: f64, cap: u64) -> Passage {
    for n in 1..=cap {
        if sampler.value(n) - drift * n as f64 > level {
            return Passage::Found(n);
        }
    }
    Passage::Capped(cap)
}

/// τ̂(t). `n_cap` defaults to [`default_passage_cap`].
pub fn first_passage(model: &TailModel, t: f64, key: StreamKey, n_cap: Option<u64>, kind: SamplerKind) -> Result<Passage> {
    check_level(t)?;
    let sampler = WalkSampler::new(*model, key, kind)?;
    let cap = n_cap.unwrap_or_else(|| default_passage_cap(model, t, false));
    Ok(passage_with_drift(&sampler, t, 0.0, cap))
}

/// inf{n ≥ 1 : Ŝ_n − μn > t}, the passage time used when α = 2 and ℓ stays bounded.
pub fn first_passage_centered(
    model: &TailModel,
    t: f64,
    key: StreamKey,
    n_cap: Option<u64>,
    kind: SamplerKind,
) -> Result<Passage> {
    check_level(t)?;
    let mu = model.mean();
    if !mu.is_finite() {
        return Err(Error::Domain("centering needs a finite mean".into()));
    }
    let sampler = WalkSampler::new(*model, key, kind)?;
    let cap = n_cap.unwrap_or_else(|| default_passage_cap(model, t, true));
    Ok(passage_with_drift(&sampler, t, mu, cap))
}

/// 2⌈t/μ⌉ + 1000 for a finite mean. Otherwise, and for the centered passage,
/// 2n* + 1000 where n* is the first power of two with n*·P{ξ > t} ≥ 1.
pub fn default_passage_cap(model: &TailModel, t: f64, centered: bool) -> u64 {
    let mu = model.mean();
    if !centered && mu.is_finite() {
        return 2 * (t.max(0.0) / mu).ceil() as u64 + 1000;
    }
    let tail = model.tail_prob(t.max(0.0));
    let mut n: u64 = 1;
    while (n as f64) * tail < 1.0 && n < 1 << 40 {
        n *= 2;
    }
    2 * n + 1000
}

/// N̂(t) over indices n ≤ n_max. See [`default_visit_horizon`] for the default.
pub fn visits_count(model: &TailModel, t: f64, key: StreamKey, n_max: Option<u64>, kind: SamplerKind) -> Result<u64> {
    check_level(t)?;
    let horizon = match n_max {
        Some(n) => n,
        None => default_visit_horizon(model, t)?,
    };
    let sampler = WalkSampler::new(*model, key, kind)?;
    Ok((1..=horizon).filter(|&n| sampler.value(n) <= t).count() as u64)
}

/// Index beyond which P{S_n ≤ t} is zero or negligible.
///
/// With x_min > 0, S_n ≥ n·x_min, so ⌊t/x_min⌋ is exact. Otherwise, for finite
/// μ and σ², ⌈t/μ⌉ + ⌈8(σ²t/μ³)^{1/2}⌉ + 100, eight renewal standard
/// deviations past the mean crossing index.
pub fn default_visit_horizon(model: &TailModel, t: f64) -> Result<u64> {
    let x_min = model.x_min();
    if x_min > 0.0 {
        return Ok((t / x_min).floor() as u64);
    }
    let (mu, var) = (model.mean(), model.variance());
    if !(mu.is_finite() && var.is_finite()) {
        return Err(Error::UnboundedTruncation);
    }
    Ok((t / mu).ceil() as u64 + (8.0 * (var * t / mu.powi(3)).sqrt()).ceil() as u64 + 100)
}

/// τ̂(t), N̂(t) and the running maximum computed from one realization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSample {
    pub tau: Passage,
    pub n_visits: u64,
    pub running_max: Vec<f64>,
    pub threshold: f64,
}

pub fn sample_functionals(
    model: &TailModel,
    t: f64,
    key: StreamKey,
    n_max: Option<u64>,
    kind: SamplerKind,
) -> Result<FunctionalSample> {
    check_level(t)?;
    let horizon = match n_max {
        Some(n) => n,
        None => default_visit_horizon(model, t)?.max(default_passage_cap(model, t, false)),
    };
    let walk = sample_decoupled(model, horizon.max(1), key, kind)?;
    Ok(FunctionalSample {
        tau: walk.first_passage(t),
        n_visits: walk.visits(t),
        running_max: walk.running_max(),
        threshold: t,
    })
}

fn check_level(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("level must be finite and nonnegative, got {t}")))
    }
}
