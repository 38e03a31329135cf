use rand::distr::{Distribution, OpenClosed01};
use rand::Rng;
use rand_distr::{Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use libm::erfc;
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};

/// Law of a nonnegative increment ξ with an exactly computable right tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields, try_from = "RawModel")]
pub enum TailModel {
    /// P{ξ > x} = (x / x_min)^{-α} for x ≥ x_min.
    ParetoPure { alpha: f64, x_min: f64 },
    /// P{ξ > x} = min(1, A x^{-α} log x) for x ≥ x_min, with x_min ≥ e^{1/α}
    /// so the tail is decreasing. Mass not carried by the tail sits at x_min.
    ParetoLog { alpha: f64, a_coef: f64, x_min: f64 },
    Gamma { shape: f64, rate: f64 },
    Exponential { rate: f64 },
    Lognormal { mu_ln: f64, sigma_ln: f64 },
}

// Deserialization goes through this mirror so that every model read from
// JSON is validated.
#[derive(Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
enum RawModel {
    ParetoPure {
        alpha: f64,
        #[serde(default = "one")]
        x_min: f64,
    },
    ParetoLog {
        #[serde(default = "three")]
        alpha: f64,
        a_coef: f64,
        x_min: f64,
    },
    Gamma {
        shape: f64,
        #[serde(default = "one")]
        rate: f64,
    },
    Exponential {
        #[serde(default = "one")]
        rate: f64,
    },
    Lognormal { mu_ln: f64, sigma_ln: f64 },
}

fn one() -> f64 {
    1.0
}

fn three() -> f64 {
    3.0
}

impl TryFrom<RawModel> for TailModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        let model = match raw {
            RawModel::ParetoPure { alpha, x_min } => TailModel::ParetoPure { alpha, x_min },
            RawModel::ParetoLog { alpha, a_coef, x_min } => TailModel::ParetoLog { alpha, a_coef, x_min },
            RawModel::Gamma { shape, rate } => TailModel::Gamma { shape, rate },
            RawModel::Exponential { rate } => TailModel::Exponential { rate },
            RawModel::Lognormal { mu_ln, sigma_ln } => TailModel::Lognormal { mu_ln, sigma_ln },
        };
        model.validate()?;
        Ok(model)
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("{name} must be positive and finite, got {x}")))
    }
}

impl TailModel {
    pub fn pareto(alpha: f64, x_min: f64) -> Result<Self> {
        let m = TailModel::ParetoPure { alpha, x_min };
        m.validate()?;
        Ok(m)
    }

    pub fn pareto_log(alpha: f64, a_coef: f64, x_min: f64) -> Result<Self> {
        let m = TailModel::ParetoLog { alpha, a_coef, x_min };
        m.validate()?;
        Ok(m)
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        let m = TailModel::Exponential { rate };
        m.validate()?;
        Ok(m)
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        let m = TailModel::Gamma { shape, rate };
        m.validate()?;
        Ok(m)
    }

    pub fn lognormal(mu_ln: f64, sigma_ln: f64) -> Result<Self> {
        let m = TailModel::Lognormal { mu_ln, sigma_ln };
        m.validate()?;
        Ok(m)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            TailModel::ParetoPure { alpha, x_min } => {
                positive("alpha", alpha)?;
                positive("x_min", x_min)
            }
            TailModel::ParetoLog { alpha, a_coef, x_min } => {
                positive("alpha", alpha)?;
                positive("a_coef", a_coef)?;
                let lowest = (1.0 / alpha).exp();
                if !(x_min >= lowest && x_min.is_finite()) {
                    return Err(Error::InvalidModel(format!(
                        "x_min must be at least e^(1/alpha) = {lowest} for a decreasing tail, got {x_min}"
                    )));
                }
                Ok(())
            }
            TailModel::Gamma { shape, rate } => {
                positive("shape", shape)?;
                positive("rate", rate)
            }
            TailModel::Exponential { rate } => positive("rate", rate),
            TailModel::Lognormal { mu_ln, sigma_ln } => {
                if !mu_ln.is_finite() {
                    return Err(Error::InvalidModel(format!("mu_ln must be finite, got {mu_ln}")));
                }
                positive("sigma_ln", sigma_ln)
            }
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            TailModel::ParetoPure { .. } => "pareto_pure",
            TailModel::ParetoLog { .. } => "pareto_log",
            TailModel::Gamma { .. } => "gamma",
            TailModel::Exponential { .. } => "exponential",
            TailModel::Lognormal { .. } => "lognormal",
        }
    }

    /// Tail index; infinite for the light-tailed families.
    pub fn alpha(&self) -> f64 {
        match *self {
            TailModel::ParetoPure { alpha, .. } | TailModel::ParetoLog { alpha, .. } => alpha,
            _ => f64::INFINITY,
        }
    }

    /// Left end of the support.
    pub fn x_min(&self) -> f64 {
        match *self {
            TailModel::ParetoPure { x_min, .. } | TailModel::ParetoLog { x_min, .. } => x_min,
            _ => 0.0,
        }
    }

    /// P{ξ > x}.
    pub fn tail_prob(&self, x: f64) -> f64 {
        if x < self.x_min() || x < 0.0 {
            return 1.0;
        }
        match *self {
            TailModel::ParetoPure { alpha, x_min } => (x / x_min).powf(-alpha),
            TailModel::ParetoLog { alpha, a_coef, .. } => (a_coef * x.powf(-alpha) * x.ln()).min(1.0),
            TailModel::Gamma { shape, rate } => gamma_ur(shape, rate * x),
            TailModel::Exponential { rate } => (-rate * x).exp(),
            TailModel::Lognormal { mu_ln, sigma_ln } => {
                0.5 * erfc((x.ln() - mu_ln) / (sigma_ln * std::f64::consts::SQRT_2))
            }
        }
    }

    /// Smallest x with P{ξ > x} ≤ u, for u in (0, 1]. This is the inverse
    /// transform used by [`TailModel::sample`] for the Pareto families.
    pub fn tail_inverse(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::Domain(format!("tail level must lie in (0,1], got {u}")));
        }
        Ok(match *self {
            TailModel::ParetoPure { alpha, x_min } => x_min * u.powf(-1.0 / alpha),
            TailModel::ParetoLog { alpha, a_coef, x_min } => pareto_log_inverse(alpha, a_coef, x_min, u),
            TailModel::Exponential { rate } => -u.ln() / rate,
            TailModel::Gamma { .. } | TailModel::Lognormal { .. } => {
                crate::tails::normalize::bisect_decreasing(|x| self.tail_prob(x) - u, 0.0)?
            }
        })
    }

    /// One draw of ξ. Pareto families and the exponential use inverse
    /// transform of a single `(0, 1]` uniform.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            TailModel::ParetoPure { alpha, x_min } => {
                let u: f64 = rng.sample(OpenClosed01);
                x_min * (-u.ln() / alpha).exp()
            }
            TailModel::ParetoLog { alpha, a_coef, x_min } => {
                let u: f64 = rng.sample(OpenClosed01);
                pareto_log_inverse(alpha, a_coef, x_min, u)
            }
            TailModel::Exponential { rate } => {
                let u: f64 = rng.sample(OpenClosed01);
                -u.ln() / rate
            }
            TailModel::Gamma { shape, rate } => {
                // parameters were validated
                Gamma::new(shape, 1.0 / rate).map(|g| g.sample(rng)).unwrap_or(f64::NAN)
            }
            TailModel::Lognormal { mu_ln, sigma_ln } => {
                let z: f64 = rng.sample(StandardNormal);
                (mu_ln + sigma_ln * z).exp()
            }
        }
    }

    /// E[ξ], possibly +∞.
    pub fn mean(&self) -> f64 {
        match *self {
            TailModel::ParetoPure { alpha, x_min } => {
                if alpha > 1.0 {
                    alpha * x_min / (alpha - 1.0)
                } else {
                    f64::INFINITY
                }
            }
            TailModel::ParetoLog { alpha, a_coef, x_min } => {
                if alpha <= 1.0 {
                    return f64::INFINITY;
                }
                let b = pareto_log_inverse(alpha, a_coef, x_min, 1.0);
                let k = alpha - 1.0;
                b + a_coef * b.powf(-k) * (b.ln() / k + 1.0 / (k * k))
            }
            TailModel::Gamma { shape, rate } => shape / rate,
            TailModel::Exponential { rate } => 1.0 / rate,
            TailModel::Lognormal { mu_ln, sigma_ln } => (mu_ln + 0.5 * sigma_ln * sigma_ln).exp(),
        }
    }

    /// Var[ξ], possibly +∞.
    pub fn variance(&self) -> f64 {
        match *self {
            TailModel::ParetoPure { alpha, x_min } => {
                if alpha > 2.0 {
                    x_min * x_min * alpha / ((alpha - 1.0).powi(2) * (alpha - 2.0))
                } else {
                    f64::INFINITY
                }
            }
            TailModel::ParetoLog { alpha, a_coef, x_min } => {
                if alpha <= 2.0 {
                    return f64::INFINITY;
                }
                let b = pareto_log_inverse(alpha, a_coef, x_min, 1.0);
                let k = alpha - 2.0;
                let second = b * b + 2.0 * a_coef * b.powf(-k) * (b.ln() / k + 1.0 / (k * k));
                second - self.mean().powi(2)
            }
            TailModel::Gamma { shape, rate } => shape / (rate * rate),
            TailModel::Exponential { rate } => 1.0 / (rate * rate),
            TailModel::Lognormal { mu_ln, sigma_ln } => {
                let s2 = sigma_ln * sigma_ln;
                (s2.exp() - 1.0) * (2.0 * mu_ln + s2).exp()
            }
        }
    }
}

// Solves A x^{-α} log x = u for x ≥ x_min; returns x_min when the tail at
// x_min is already at or below u. Newton on w = log x with a bisection guard.
fn pareto_log_inverse(alpha: f64, a_coef: f64, x_min: f64, u: f64) -> f64 {
    let log_tail = |w: f64| a_coef.ln() - alpha * w + w.ln();
    let target = u.ln();
    let mut lo = x_min.ln();
    if log_tail(lo) <= target {
        return x_min;
    }
    let mut hi = lo.max(1.0);
    while log_tail(hi) > target {
        hi *= 2.0;
    }
    let mut w = 0.5 * (lo + hi);
    for _ in 0..100 {
        let f = log_tail(w) - target;
        if f.abs() <= 1e-15 {
            break;
        }
        if f > 0.0 {
            lo = w;
        } else {
            hi = w;
        }
        let deriv = -alpha + 1.0 / w;
        let newton = w - f / deriv;
        w = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    w.exp()
}

/// The five limit regimes, determined by the right tail of ξ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// α ∈ (0,2), or α = 2 with ℓ → ∞: maxima scaled by a(v), no centering.
    R1HeavyNoCenter,
    /// α = 2 with lim inf ℓ < ∞: maxima of Ŝ_k − μk.
    R1HeavyCentered,
    /// α ∈ (2,3), or α = 3 with ℓ / log → ∞.
    R2Intermediate,
    /// E[ξ³] < ∞, or α = 3 with ℓ / log → 0.
    R3Gaussian,
    /// P{ξ > v} ~ A v^{-3} log v.
    R4Boundary,
}

impl Regime {
    pub fn short_name(&self) -> &'static str {
        match self {
            Regime::R1HeavyNoCenter => "R1",
            Regime::R1HeavyCentered => "R1c",
            Regime::R2Intermediate => "R2",
            Regime::R3Gaussian => "R3",
            Regime::R4Boundary => "R4",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Ok(match key.as_str() {
            "r1" | "r1_heavy_no_center" => Regime::R1HeavyNoCenter,
            "r1c" | "r1_heavy_centered" => Regime::R1HeavyCentered,
            "r2" | "r2_intermediate" => Regime::R2Intermediate,
            "r3" | "r3_gaussian" => Regime::R3Gaussian,
            "r4" | "r4_boundary" => Regime::R4Boundary,
            _ => return Err(Error::Domain(format!("unknown regime {s:?}"))),
        })
    }
}

/// Maps a model to its regime. Pure Pareto has ℓ ≡ const; ParetoLog has
/// ℓ(v) = A log v → ∞, so α = 2 falls into the uncentered heavy regime and
/// α = 3 is the boundary case.
pub fn classify_regime(model: &TailModel) -> Regime {
    match *model {
        TailModel::ParetoPure { alpha, .. } => {
            if alpha < 2.0 {
                Regime::R1HeavyNoCenter
            } else if alpha == 2.0 {
                Regime::R1HeavyCentered
            } else if alpha < 3.0 {
                Regime::R2Intermediate
            } else {
                // α = 3 with constant ℓ has ℓ / log → 0; α > 3 has E[ξ³] < ∞
                Regime::R3Gaussian
            }
        }
        TailModel::ParetoLog { alpha, .. } => {
            if alpha <= 2.0 {
                Regime::R1HeavyNoCenter
            } else if alpha < 3.0 {
                Regime::R2Intermediate
            } else if alpha == 3.0 {
                Regime::R4Boundary
            } else {
                Regime::R3Gaussian
            }
        }
        TailModel::Gamma { .. } | TailModel::Exponential { .. } | TailModel::Lognormal { .. } => Regime::R3Gaussian,
    }
}
