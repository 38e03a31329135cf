//! Scaling and centering sequences a(v), m(v) for the five regimes.

use crate::error::{Error, Result};
use crate::tails::model::TailModel;
use crate::tails::normal::normal_upper_quantile;

const MAX_ITERATIONS: usize = 200;
const ROOT_REL_TOL: f64 = 1e-10;

/// Root of a nonincreasing `f` on `[lo, ∞)` by bracket doubling and
/// bisection. Fails with `NoRoot` when `f(lo) < 0` or when the iteration cap
/// is hit before the bracket shrinks below `ROOT_REL_TOL`.
pub(crate) fn bisect_decreasing<F: Fn(f64) -> f64>(f: F, lo: f64) -> Result<f64> {
    let mut lo = lo;
    let f_lo = f(lo);
    if f_lo.is_nan() || f_lo < 0.0 {
        return Err(Error::NoRoot(format!("function is negative at the left end {lo}")));
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    let mut hi = if lo > 0.0 { 2.0 * lo } else { 1.0 };
    let mut iterations = 0;
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        iterations += 1;
        if iterations >= MAX_ITERATIONS || !hi.is_finite() {
            return Err(Error::NoRoot("could not bracket the root".into()));
        }
    }
    while hi - lo > ROOT_REL_TOL * hi {
        if iterations >= MAX_ITERATIONS {
            return Err(Error::NoRoot("iteration cap reached".into()));
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(0.5 * (lo + hi))
}

/// a(v) with v² P{ξ > a(v)} = 1.
pub fn solve_a_regime1(model: &TailModel, v: f64) -> Result<f64> {
    check_v(v, 0.0)?;
    let x0 = model.x_min();
    if v * v * model.tail_prob(x0) < 1.0 {
        return Err(Error::NoRoot(format!("v = {v} too small: v^2 P(xi > x_min) < 1")));
    }
    bisect_decreasing(|a| v * v * model.tail_prob(a) - 1.0, x0)
}

/// a(v) with v a(v) P{ξ > a(v)} = 1.
pub fn solve_a_regime2(model: &TailModel, v: f64) -> Result<f64> {
    check_v(v, 0.0)?;
    let x0 = model.x_min();
    if v * x0 * model.tail_prob(x0) < 1.0 {
        return Err(Error::NoRoot(format!("v = {v} too small: v x_min P(xi > x_min) < 1")));
    }
    bisect_decreasing(|a| v * a * model.tail_prob(a) - 1.0, x0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianNormalizer {
    pub a: f64,
    pub m: f64,
}

/// a(v) = σ (v / log v)^{1/2} and m(v) = μv + σ v^{1/2} Φ⁻¹(1 − 1/a(v)).
pub fn a_m_regime3(mu: f64, sigma: f64, v: f64) -> Result<GaussianNormalizer> {
    check_v(v, 1.0)?;
    if !(mu > 0.0 && sigma > 0.0 && mu.is_finite() && sigma.is_finite()) {
        return Err(Error::Domain(format!("need finite positive mu, sigma; got {mu}, {sigma}")));
    }
    let a = sigma * (v / v.ln()).sqrt();
    if !(a > 1.0) {
        return Err(Error::InvalidQuantile(a));
    }
    let q = normal_upper_quantile(1.0 / a)?;
    Ok(GaussianNormalizer { a, m: mu * v + sigma * v.sqrt() * q })
}

/// a(v) = ((A/2) v log v)^{1/2}.
pub fn a_regime4(a_coef: f64, v: f64) -> Result<f64> {
    check_v(v, 1.0)?;
    if !(a_coef > 0.0) {
        return Err(Error::Domain(format!("A must be positive, got {a_coef}")));
    }
    Ok((0.5 * a_coef * v * v.ln()).sqrt())
}

fn check_v(v: f64, above: f64) -> Result<()> {
    if v > above && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("v must be finite and exceed {above}, got {v}")))
    }
}
