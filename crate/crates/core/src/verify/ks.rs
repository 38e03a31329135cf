//! Kolmogorov–Smirnov distances and the DKW band.

use crate::error::{Error, Result};
use crate::limits::MarginalLaw;

/// A distribution function with its left limits, so that laws with atoms
/// are handled exactly.
pub trait Cdf {
    fn cdf(&self, x: f64) -> f64;

    /// P{X < x}; equal to `cdf` for continuous laws.
    fn cdf_left(&self, x: f64) -> f64 {
        self.cdf(x)
    }
}

impl Cdf for MarginalLaw {
    fn cdf(&self, x: f64) -> f64 {
        MarginalLaw::cdf(self, x)
    }

    fn cdf_left(&self, x: f64) -> f64 {
        MarginalLaw::cdf_left(self, x)
    }
}

/// A continuous distribution function given as a closure.
pub struct ContinuousCdf<F: Fn(f64) -> f64>(pub F);

impl<F: Fn(f64) -> f64> Cdf for ContinuousCdf<F> {
    fn cdf(&self, x: f64) -> f64 {
        (self.0)(x)
    }
}

/// Exponential law with the given rate.
#[derive(Clone, Copy, Debug)]
pub struct ExponentialCdf {
    pub rate: f64,
}

impl Cdf for ExponentialCdf {
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-self.rate * x).exp_m1()
        }
    }
}

fn sorted(samples: &[f64]) -> std::borrow::Cow<'_, [f64]> {
    if samples.windows(2).all(|w| w[0] <= w[1]) {
        std::borrow::Cow::Borrowed(samples)
    } else {
        let mut v = samples.to_vec();
        v.sort_by(f64::total_cmp);
        std::borrow::Cow::Owned(v)
    }
}

/// sup_x |F_N(x) − F(x)|. Samples are sorted first if needed; tied samples
/// are handled as one jump of the empirical distribution.
pub fn ks_distance<C: Cdf + ?Sized>(samples: &[f64], cdf: &C) -> f64 {
    let xs = sorted(samples);
    let n = xs.len();
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < n {
        let x = xs[i];
        let mut j = i + 1;
        while j < n && xs[j] == x {
            j += 1;
        }
        d = d.max(j as f64 / nf - cdf.cdf(x)).max(cdf.cdf_left(x) - i as f64 / nf);
        i = j;
    }
    d.clamp(0.0, 1.0)
}

/// sup_x |F_N(x) − G_M(x)|.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (sorted(a), sorted(b));
    let (n, m) = (a.len(), b.len());
    if n == 0 || m == 0 {
        return 0.0;
    }
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] == x {
            i += 1;
        }
        while j < m && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    d
}

/// Asymptotic critical value of the two-sample statistic at `confidence`:
/// (−ln((1 − confidence)/2)/2)^{1/2} ((n + m)/(nm))^{1/2}.
pub fn ks_two_sample_critical(n: usize, m: usize, confidence: f64) -> Result<f64> {
    check_confidence(confidence)?;
    if n == 0 || m == 0 {
        return Err(Error::Domain("sample sizes must be positive".into()));
    }
    let c = (-0.5 * ((1.0 - confidence) / 2.0).ln()).sqrt();
    let (n, m) = (n as f64, m as f64);
    Ok(c * ((n + m) / (n * m)).sqrt())
}

/// ε with P{sup |F_N − F| > ε} ≤ 1 − confidence: (ln(2/(1 − confidence))/(2N))^{1/2}.
pub fn dkw_bound(n: u64, confidence: f64) -> Result<f64> {
    check_confidence(confidence)?;
    if n == 0 {
        return Err(Error::Domain("sample size must be positive".into()));
    }
    Ok(((2.0 / (1.0 - confidence)).ln() / (2.0 * n as f64)).sqrt())
}

fn check_confidence(c: f64) -> Result<()> {
    if c > 0.0 && c < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("confidence must lie in (0,1), got {c}")))
    }
}

/// Standard deviation of the limiting Kolmogorov law, for √N·D_N.
pub const KOLMOGOROV_SD: f64 = 0.2605;
