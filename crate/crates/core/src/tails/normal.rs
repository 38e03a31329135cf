//! Standard normal distribution function and its inverse.

use libm::erfc;
use statrs::function::erf::erfc_inv;

use crate::error::{Error, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Φ(x). Evaluated through `erfc` so both tails keep full relative accuracy.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// 1 − Φ(x), without cancellation for large positive `x`.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Φ⁻¹(p) for p in (0, 1).
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("normal quantile needs p in (0,1), got {p}")));
    }
    if p > 0.5 {
        // 1 - p is exact here
        Ok(-lower_tail_quantile(1.0 - p))
    } else {
        Ok(lower_tail_quantile(p))
    }
}

/// Φ⁻¹(1 − q) for q in (0, 1), accurate even when 1 − q rounds to 1.
pub fn normal_upper_quantile(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("upper quantile needs q in (0,1), got {q}")));
    }
    Ok(if q <= 0.5 {
        -lower_tail_quantile(q)
    } else {
        lower_tail_quantile(1.0 - q)
    })
}

// p <= 0.5: start from the erfc inverse, then Newton steps on Φ(x) - p.
fn lower_tail_quantile(p: f64) -> f64 {
    let mut x = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    for _ in 0..4 {
        let resid = normal_cdf(x) - p;
        let dens = normal_pdf(x);
        if dens == 0.0 {
            break;
        }
        let step = resid / dens;
        x -= step;
        if resid.abs() <= 1e-12 * p.max(f64::MIN_POSITIVE) || step.abs() <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

/// Two-term asymptotic expansion of Φ⁻¹(1 − h) as h → 0+:
/// `(2 log 1/h)^{1/2} − (log log 1/h + log 4π) / (8 log 1/h)^{1/2}`.
pub fn quantile_expansion(h: f64) -> Result<f64> {
    if !(h > 0.0 && h < (-1.0f64).exp()) {
        return Err(Error::Domain(format!("expansion needs h in (0, 1/e), got {h}")));
    }
    let l = (1.0 / h).ln();
    let four_pi = 4.0 * std::f64::consts::PI;
    Ok((2.0 * l).sqrt() - (l.ln() + four_pi.ln()) / (8.0 * l).sqrt())
}
