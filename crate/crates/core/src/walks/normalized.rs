//! The normalized maxima and first-passage times on the left-hand sides of
//! the limit theorems, one sample at a time.

use serde::{Deserialize, Serialize};

use super::{default_passage_cap, passage_with_drift, Passage, SamplerKind, WalkSampler};
use crate::error::{Error, Result};
use crate::rng::StreamKey;
use crate::tails::{a_m_regime3, a_regime4, classify_regime, solve_a_regime1, solve_a_regime2, Regime, TailModel};

fn check_regime(model: &TailModel, regime: Regime) -> Result<()> {
    let actual = classify_regime(model);
    if actual == regime {
        Ok(())
    } else {
        Err(Error::RegimeMismatch { requested: regime, actual })
    }
}

fn finite_mean(model: &TailModel) -> Result<f64> {
    let mu = model.mean();
    if mu.is_finite() {
        Ok(mu)
    } else {
        Err(Error::Domain(format!("{} has no finite mean", model.family_name())))
    }
}

fn boundary_coef(model: &TailModel) -> Result<f64> {
    match *model {
        TailModel::ParetoLog { a_coef, .. } => Ok(a_coef),
        _ => Err(Error::Unsupported(format!("boundary regime needs pareto_log, got {}", model.family_name()))),
    }
}

fn index_count(x: f64) -> Result<u64> {
    let n = x.floor();
    if n < 1.0 {
        Err(Error::IndexUnderflow(n.max(i64::MIN as f64) as i64))
    } else {
        Ok(n as u64)
    }
}

/// (max_{k ≤ count} (Ŝ_k − drift·k) − offset) / scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxStatistic {
    pub regime: Regime,
    pub v: f64,
    pub t: f64,
    pub count: u64,
    pub drift: f64,
    pub offset: f64,
    pub scale: f64,
}

impl MaxStatistic {
    pub fn new(model: &TailModel, regime: Regime, v: f64, t: f64) -> Result<Self> {
        check_regime(model, regime)?;
        let (count, drift, offset, scale) = match regime {
            Regime::R1HeavyNoCenter | Regime::R1HeavyCentered => {
                if !(t >= 0.0) {
                    return Err(Error::Domain(format!("time must be nonnegative here, got {t}")));
                }
                let a = solve_a_regime1(model, v)?;
                let drift = if regime == Regime::R1HeavyCentered { finite_mean(model)? } else { 0.0 };
                (index_count(t * v)?, drift, 0.0, a)
            }
            Regime::R2Intermediate => {
                let a = solve_a_regime2(model, v)?;
                (index_count(v + t * a)?, 0.0, finite_mean(model)? * v, a)
            }
            Regime::R3Gaussian => {
                let mu = finite_mean(model)?;
                let g = a_m_regime3(mu, model.variance().sqrt(), v)?;
                (index_count(v + t * g.a)?, 0.0, g.m, g.a)
            }
            Regime::R4Boundary => {
                let a = a_regime4(boundary_coef(model)?, v)?;
                (index_count(v + t * a)?, 0.0, finite_mean(model)? * v, a)
            }
        };
        Ok(Self { regime, v, t, count, drift, offset, scale })
    }

    pub fn evaluate(&self, sampler: &WalkSampler) -> f64 {
        let best = (1..=self.count)
            .map(|k| sampler.value(k) - self.drift * k as f64)
            .fold(f64::NEG_INFINITY, f64::max);
        (best - self.offset) / self.scale
    }

    /// Draws of Ŝ_k needed per sample with the direct sampler.
    pub fn direct_cost(&self) -> f64 {
        let n = self.count as f64;
        n * (n + 1.0) / 2.0
    }
}

pub fn normalized_max_marginal(
    model: &TailModel,
    regime: Regime,
    v: f64,
    t: f64,
    key: StreamKey,
    kind: SamplerKind,
) -> Result<f64> {
    let stat = MaxStatistic::new(model, regime, v, t)?;
    Ok(stat.evaluate(&WalkSampler::new(*model, key, kind)?))
}

/// (inf{n : Ŝ_n − drift·n > level} − offset) · multiplier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauStatistic {
    pub regime: Regime,
    pub v: f64,
    pub t: f64,
    pub level: f64,
    pub drift: f64,
    pub offset: f64,
    pub multiplier: f64,
    pub cap: u64,
}

impl TauStatistic {
    pub fn new(model: &TailModel, regime: Regime, v: f64, t: f64, n_cap: Option<u64>) -> Result<Self> {
        check_regime(model, regime)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Domain(format!("v must be positive and finite, got {v}")));
        }
        let (level, drift, offset, multiplier) = match regime {
            Regime::R1HeavyNoCenter | Regime::R1HeavyCentered => {
                if !(t >= 0.0) {
                    return Err(Error::Domain(format!("time must be nonnegative here, got {t}")));
                }
                let drift = if regime == Regime::R1HeavyCentered { finite_mean(model)? } else { 0.0 };
                (t * v, drift, 0.0, model.tail_prob(v).sqrt())
            }
            Regime::R2Intermediate => {
                let mu = finite_mean(model)?;
                let alpha = model.alpha();
                let level = v + t * solve_a_regime2(model, v / mu)?;
                let scale = mu.powf(-1.0 / (alpha - 1.0)) * solve_a_regime2(model, v)?;
                (level, 0.0, v / mu, 1.0 / scale)
            }
            Regime::R3Gaussian => {
                let mu = finite_mean(model)?;
                let g = a_m_regime3(mu, model.variance().sqrt(), v)?;
                (g.m + t * g.a, 0.0, v, 1.0 / g.a)
            }
            Regime::R4Boundary => {
                let mu = finite_mean(model)?;
                let coef = boundary_coef(model)?;
                let level = v + t * a_regime4(coef, v / mu)?;
                let scale = mu.powf(-0.5) * a_regime4(coef, v)?;
                (level, 0.0, v / mu, 1.0 / scale)
            }
        };
        let cap = n_cap.unwrap_or_else(|| default_passage_cap(model, level, drift != 0.0));
        Ok(Self { regime, v, t, level, drift, offset, multiplier, cap })
    }

    /// `None` when the search hit the cap.
    pub fn evaluate(&self, sampler: &WalkSampler) -> Option<f64> {
        match passage_with_drift(sampler, self.level, self.drift, self.cap) {
            Passage::Found(n) => Some((n as f64 - self.offset) * self.multiplier),
            Passage::Capped(_) => None,
        }
    }
}

pub fn normalized_tau_marginal(
    model: &TailModel,
    regime: Regime,
    v: f64,
    t: f64,
    key: StreamKey,
    n_cap: Option<u64>,
    kind: SamplerKind,
) -> Result<Option<f64>> {
    let stat = TauStatistic::new(model, regime, v, t, n_cap)?;
    Ok(stat.evaluate(&WalkSampler::new(*model, key, kind)?))
}
