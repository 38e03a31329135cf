//! One-dimensional laws of X1..X4 and of their generalized inverses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A limit extremal process with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "process", rename_all = "snake_case", deny_unknown_fields)]
pub enum LimitProcess {
    /// sup of Pareto(α) marks, times with θ([0,x]) = x²/2.
    X1 { alpha: f64 },
    /// sup of μt_k + j_k, Lebesgue times, Pareto(α) marks, α > 1.
    X2 { alpha: f64, mu: f64 },
    /// sup of marks with intensity e^{μs}ds × e^{−y}dy.
    X3 { mu: f64 },
    /// X2 with α = 3 and marks above (2/A)^{1/2}, floored by μt + (2/A)^{1/2}.
    X4 { a_coef: f64, mu: f64 },
}

impl LimitProcess {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, x: f64| Err(Error::Domain(format!("{what} out of range: {x}")));
        match *self {
            LimitProcess::X1 { alpha } if !(alpha > 0.0 && alpha.is_finite()) => bad("alpha", alpha),
            LimitProcess::X2 { alpha, .. } if !(alpha > 1.0 && alpha.is_finite()) => bad("alpha", alpha),
            LimitProcess::X2 { mu, .. } | LimitProcess::X3 { mu } | LimitProcess::X4 { mu, .. }
                if !(mu > 0.0 && mu.is_finite()) =>
            {
                bad("mu", mu)
            }
            LimitProcess::X4 { a_coef, .. } if !(a_coef > 0.0 && a_coef.is_finite()) => bad("a_coef", a_coef),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LimitProcess::X1 { .. } => "X1",
            LimitProcess::X2 { .. } => "X2",
            LimitProcess::X3 { .. } => "X3",
            LimitProcess::X4 { .. } => "X4",
        }
    }

    /// Drift applied to atom times (μ for X2 and X4).
    pub fn drift(&self) -> f64 {
        match *self {
            LimitProcess::X2 { mu, .. } | LimitProcess::X4 { mu, .. } => mu,
            _ => 0.0,
        }
    }

    /// (2/A)^{1/2} for X4.
    pub fn floor_offset(&self) -> Option<f64> {
        match *self {
            LimitProcess::X4 { a_coef, .. } => Some((2.0 / a_coef).sqrt()),
            _ => None,
        }
    }
}

/// Law of X(t) (`inverse == false`) or of X←(t) (`inverse == true`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalLaw {
    pub process: LimitProcess,
    pub inverse: bool,
    pub t: f64,
}

// −log(p) and −log(1 − p), the exponents that the quantiles invert
fn neg_ln(p: f64) -> f64 {
    -p.ln()
}

fn neg_ln_complement(p: f64) -> f64 {
    -(-p).ln_1p()
}

// 1 − e^{−x} without cancellation
fn one_minus_exp_neg(x: f64) -> f64 {
    -(-x).exp_m1()
}

impl MarginalLaw {
    pub fn new(process: LimitProcess, inverse: bool, t: f64) -> Result<Self> {
        process.validate()?;
        if !t.is_finite() {
            return Err(Error::Domain(format!("t must be finite, got {t}")));
        }
        if matches!(process, LimitProcess::X1 { .. }) && t <= 0.0 {
            return Err(Error::Domain(format!("X1 laws need t > 0, got {t}")));
        }
        Ok(Self { process, inverse, t })
    }

    pub fn forward(process: LimitProcess, t: f64) -> Result<Self> {
        Self::new(process, false, t)
    }

    pub fn inverse(process: LimitProcess, t: f64) -> Result<Self> {
        Self::new(process, true, t)
    }

    pub fn name(&self) -> String {
        format!("{}{}", self.process.name(), if self.inverse { "inv" } else { "" })
    }

    /// Location and mass of the single atom, if the law has one.
    pub fn atom(&self) -> Option<(f64, f64)> {
        match (self.process, self.inverse) {
            (LimitProcess::X4 { a_coef, mu }, false) => {
                let c = (2.0 / a_coef).sqrt();
                Some((mu * self.t + c, (-a_coef / (4.0 * mu)).exp()))
            }
            (LimitProcess::X4 { a_coef, mu }, true) => {
                let c = (2.0 / a_coef).sqrt();
                Some(((self.t - c) / mu, (-a_coef / (4.0 * mu)).exp()))
            }
            _ => None,
        }
    }

    /// P{X ≤ y}.
    pub fn cdf(&self, y: f64) -> f64 {
        if y.is_nan() {
            return f64::NAN;
        }
        let t = self.t;
        match (self.process, self.inverse) {
            (LimitProcess::X1 { alpha }, false) => {
                if y <= 0.0 {
                    0.0
                } else {
                    (-t * t * y.powf(-alpha) / 2.0).exp()
                }
            }
            (LimitProcess::X2 { alpha, mu }, false) => {
                let d = y - mu * t;
                if d <= 0.0 {
                    0.0
                } else {
                    (-1.0 / (mu * (alpha - 1.0) * d.powf(alpha - 1.0))).exp()
                }
            }
            (LimitProcess::X3 { mu }, false) => (-(mu * t - y).exp() / mu).exp(),
            (LimitProcess::X4 { mu, .. }, false) => {
                let (at, mass) = self.atom().expect("X4 has an atom");
                if y < at {
                    0.0
                } else if y == at {
                    mass
                } else {
                    let d = y - mu * t;
                    (-1.0 / (2.0 * mu * d * d)).exp()
                }
            }
            (LimitProcess::X1 { alpha }, true) => {
                if y <= 0.0 {
                    0.0
                } else {
                    one_minus_exp_neg(t.powf(-alpha) * y * y / 2.0)
                }
            }
            (LimitProcess::X2 { alpha, mu }, true) => {
                let d = t - mu * y;
                if d <= 0.0 {
                    1.0
                } else {
                    one_minus_exp_neg(1.0 / (mu * (alpha - 1.0) * d.powf(alpha - 1.0)))
                }
            }
            (LimitProcess::X3 { mu }, true) => one_minus_exp_neg((mu * y - t).exp() / mu),
            (LimitProcess::X4 { mu, .. }, true) => {
                let (at, _) = self.atom().expect("X4 has an atom");
                if y >= at {
                    1.0
                } else {
                    let d = t - mu * y;
                    one_minus_exp_neg(1.0 / (2.0 * mu * d * d))
                }
            }
        }
    }

    /// P{X < y}. Differs from [`MarginalLaw::cdf`] only at the atom.
    pub fn cdf_left(&self, y: f64) -> f64 {
        match self.atom() {
            Some((at, mass)) if y == at => self.cdf(y) - mass,
            _ => self.cdf(y),
        }
    }

    /// inf{y : F(y) ≥ p} for p in (0, 1), in closed form for all eight laws.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("quantile level must lie in (0,1), got {p}")));
        }
        let t = self.t;
        Ok(match (self.process, self.inverse) {
            (LimitProcess::X1 { alpha }, false) => (t * t / (2.0 * neg_ln(p))).powf(1.0 / alpha),
            (LimitProcess::X2 { alpha, mu }, false) => {
                mu * t + (1.0 / (mu * (alpha - 1.0) * neg_ln(p))).powf(1.0 / (alpha - 1.0))
            }
            (LimitProcess::X3 { mu }, false) => mu * t - (mu * neg_ln(p)).ln(),
            (LimitProcess::X4 { mu, .. }, false) => {
                let (at, mass) = self.atom().expect("X4 has an atom");
                if p <= mass {
                    at
                } else {
                    mu * t + (1.0 / (2.0 * mu * neg_ln(p))).sqrt()
                }
            }
            (LimitProcess::X1 { alpha }, true) => (2.0 * t.powf(alpha) * neg_ln_complement(p)).sqrt(),
            (LimitProcess::X2 { alpha, mu }, true) => {
                let d = (1.0 / (mu * (alpha - 1.0) * neg_ln_complement(p))).powf(1.0 / (alpha - 1.0));
                (t - d) / mu
            }
            (LimitProcess::X3 { mu }, true) => (t + (mu * neg_ln_complement(p)).ln()) / mu,
            (LimitProcess::X4 { mu, .. }, true) => {
                let (at, mass) = self.atom().expect("X4 has an atom");
                if p > 1.0 - mass {
                    at
                } else {
                    let d = (1.0 / (2.0 * mu * neg_ln_complement(p))).sqrt();
                    (t - d) / mu
                }
            }
        })
    }
}
