//! The verification runs. Each one draws its ensemble replicate by replicate
//! from streams keyed by the seed, so a report depends on its inputs and
//! nothing else.

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::ks::{dkw_bound, ks_distance, ExponentialCdf, KOLMOGOROV_SD};
use super::report::{VerificationReport, Verdict};
use crate::error::{Error, Result};
use crate::limits::{generalized_inverse, sample_limit_path, LimitConfig, LimitProcess, MarginalLaw, Window};
use crate::rng::{map_replicates, StreamKey, REPLICATE_STREAM};
use crate::tails::{classify_regime, solve_a_regime1, Regime, TailModel};
use crate::walks::{MaxStatistic, SamplerKind, TauStatistic, WalkSampler};

pub const CONFIDENCE: f64 = 0.99;
/// Runs with a larger share of capped or censored replicates are aborted.
pub const MAX_CAP_FRACTION: f64 = 1e-4;
pub const DEFAULT_EPS: f64 = 1e-4;
/// Final-v KS threshold for the pre-limit trend check.
pub const PRELIMIT_THRESHOLD: f64 = 0.1;
pub const LD_RELATIVE_TOLERANCE: f64 = 0.1;

// probability left outside the window of an inverse-law check, per side
const TAIL_DELTA: f64 = 1e-6;
const LD_CHUNK: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Truncation budget handed to the limit samplers.
    pub eps: f64,
    /// Worker threads; 0 uses the global pool.
    pub threads: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { eps: DEFAULT_EPS, threads: 0 }
    }
}

/// Samples of one marginal law obtained from simulated paths.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalEnsemble {
    pub window: Window,
    pub values: Vec<f64>,
    /// Inverse laws only: crossings outside the window, clamped to its edge.
    pub censored: u64,
}

/// Simulation window for a marginal check. Forward laws are read at the right
/// end of a window of positive length, so the atoms of the window matter.
/// Inverse laws need the crossing inside the window, which is sized from the
/// law's own quantiles.
pub fn marginal_window(law: &MarginalLaw) -> Result<Window> {
    let t = law.t;
    if !law.inverse {
        let lo = match law.process {
            LimitProcess::X1 { .. } => 0.5 * t,
            _ => t - 1.0,
        };
        return Window::new(lo, t);
    }
    let lo = law.quantile(TAIL_DELTA)?;
    let hi = law.quantile(1.0 - TAIL_DELTA)?;
    // atoms after the crossing are irrelevant, so the margin stays short
    Window::new(lo, hi + 1.0)
}

pub fn sample_marginal(law: &MarginalLaw, n: u64, seed: u64, opts: &RunOptions) -> Result<MarginalEnsemble> {
    let window = marginal_window(law)?;
    let cfg = LimitConfig {
        window,
        eps: opts.eps,
        level_floor: law.inverse.then_some(law.t),
        prune: true,
        bypass_initial: false,
    };
    let key = StreamKey::new(seed);
    let draws = map_replicates(n, opts.threads, |r| -> Result<(f64, bool)> {
        let mut rng = key.replicate(r).stream(REPLICATE_STREAM);
        let s = sample_limit_path(law.process, &cfg, &mut rng)?;
        if law.inverse {
            let c = generalized_inverse(&s.path, &[law.t])[0];
            Ok((c.time(), c.is_censored()))
        } else {
            Ok((s.path.value(law.t), false))
        }
    });
    let mut values = Vec::with_capacity(n as usize);
    let mut censored = 0;
    for d in draws {
        let (x, c) = d?;
        values.push(x);
        censored += u64::from(c);
    }
    Ok(MarginalEnsemble { window, values, censored })
}

/// Quantiles at (i − 1/2)/N: a deterministic sample within 1/(2N) of the law.
pub fn stratified_sample(law: &MarginalLaw, n: u64) -> Result<Vec<f64>> {
    (0..n).map(|i| law.quantile((i as f64 + 0.5) / n as f64)).collect()
}

fn ks_verdict(ks: f64, tolerance: f64, cap_fraction: f64) -> Verdict {
    if cap_fraction > MAX_CAP_FRACTION {
        Verdict::Aborted
    } else {
        Verdict::from_bool(ks <= tolerance)
    }
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::Domain("N must be positive".into()))
    } else {
        Ok(())
    }
}

/// KS of path-sampled X(t) or X←(t) against the closed-form marginal, with
/// tolerance DKW(N, 99%) + ε.
pub fn verify_limit_marginal(law: &MarginalLaw, n: u64, seed: u64, opts: &RunOptions) -> Result<VerificationReport> {
    check_n(n)?;
    let mut ens = sample_marginal(law, n, seed, opts)?;
    ens.values.sort_by(f64::total_cmp);
    let ks = ks_distance(&ens.values, law);
    let bound = dkw_bound(n, CONFIDENCE)?;
    let tolerance = bound + opts.eps;
    let cap_fraction = ens.censored as f64 / n as f64;
    Ok(VerificationReport {
        test: format!("limit_marginal_{}", law.name()),
        params: json!({ "law": law, "eps": opts.eps, "window": ens.window }),
        n,
        ks: Some(ks),
        bound: Some(bound),
        tolerance,
        verdict: ks_verdict(ks, tolerance, cap_fraction),
        seed,
        cap_fraction,
        runtime_ms: None,
        details: json!({ "censored": ens.censored }),
    })
}

/// The same comparison on the stratified construction; always D ≤ 1/(2N).
pub fn verify_stratified_marginal(law: &MarginalLaw, n: u64) -> Result<VerificationReport> {
    check_n(n)?;
    let values = stratified_sample(law, n)?;
    let ks = ks_distance(&values, law);
    let bound = dkw_bound(n, CONFIDENCE)?;
    Ok(VerificationReport {
        test: format!("stratified_marginal_{}", law.name()),
        params: json!({ "law": law }),
        n,
        ks: Some(ks),
        bound: Some(bound),
        tolerance: bound,
        verdict: Verdict::from_bool(ks <= bound),
        seed: 0,
        cap_fraction: 0.0,
        runtime_ms: None,
        details: serde_json::Value::Null,
    })
}

/// (X1←(t))² against the exponential law with rate t^{−α}/2.
pub fn verify_tau_square_exponential(alpha: f64, t: f64, n: u64, seed: u64, opts: &RunOptions) -> Result<VerificationReport> {
    check_n(n)?;
    let law = MarginalLaw::inverse(LimitProcess::X1 { alpha }, t)?;
    let ens = sample_marginal(&law, n, seed, opts)?;
    let mut squares: Vec<f64> = ens.values.iter().map(|x| x * x).collect();
    squares.sort_by(f64::total_cmp);
    let rate = t.powf(-alpha) / 2.0;
    let ks = ks_distance(&squares, &ExponentialCdf { rate });
    let bound = dkw_bound(n, CONFIDENCE)?;
    let tolerance = bound + opts.eps;
    let cap_fraction = ens.censored as f64 / n as f64;
    Ok(VerificationReport {
        test: "tau_square_exponential".into(),
        params: json!({ "alpha": alpha, "t": t, "eps": opts.eps, "window": ens.window }),
        n,
        ks: Some(ks),
        bound: Some(bound),
        tolerance,
        verdict: ks_verdict(ks, tolerance, cap_fraction),
        seed,
        cap_fraction,
        runtime_ms: None,
        details: json!({ "rate": rate, "mean": 1.0 / rate, "censored": ens.censored }),
    })
}

/// Share of X4(t) samples sitting exactly on the floor, against the atom
/// mass e^{−A/(4μ)}, within three binomial standard errors.
pub fn verify_atom_mass(process: LimitProcess, t: f64, n: u64, seed: u64, opts: &RunOptions) -> Result<VerificationReport> {
    check_n(n)?;
    let law = MarginalLaw::forward(process, t)?;
    let Some((location, mass)) = law.atom() else {
        return Err(Error::Unsupported(format!("{} has no atom", law.name())));
    };
    let window = Window::new(t - 1.0, t + 1.0)?;
    let cfg = LimitConfig { prune: true, ..LimitConfig::new(window, opts.eps) };
    let key = StreamKey::new(seed);
    let hits = map_replicates(n, opts.threads, |r| -> Result<bool> {
        let s = sample_limit_path(process, &cfg, &mut key.replicate(r).stream(REPLICATE_STREAM))?;
        Ok(s.path.value(t) == location)
    });
    let mut count = 0u64;
    for h in hits {
        count += u64::from(h?);
    }
    let estimate = count as f64 / n as f64;
    let se = (mass * (1.0 - mass) / n as f64).sqrt();
    let tolerance = 3.0 * se;
    Ok(VerificationReport {
        test: format!("atom_mass_{}", law.name()),
        params: json!({ "law": law, "eps": opts.eps, "window": window }),
        n,
        ks: None,
        bound: None,
        tolerance,
        verdict: Verdict::from_bool((estimate - mass).abs() <= tolerance),
        seed,
        cap_fraction: 0.0,
        runtime_ms: None,
        details: json!({ "location": location, "mass": mass, "estimate": estimate, "hits": count, "se": se }),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// The normalized running maximum, compared with X(t).
    Max,
    /// The normalized first-passage time, compared with X←(t).
    Tau,
}

/// The limit process a regime's statistics converge to.
pub fn limit_process_for(model: &TailModel, regime: Regime) -> Result<LimitProcess> {
    let actual = classify_regime(model);
    if actual != regime {
        return Err(Error::RegimeMismatch { requested: regime, actual });
    }
    let mu = model.mean();
    let p = match regime {
        Regime::R1HeavyNoCenter | Regime::R1HeavyCentered => LimitProcess::X1 { alpha: model.alpha() },
        Regime::R2Intermediate => LimitProcess::X2 { alpha: model.alpha(), mu },
        Regime::R3Gaussian => LimitProcess::X3 { mu },
        Regime::R4Boundary => match *model {
            TailModel::ParetoLog { a_coef, .. } => LimitProcess::X4 { a_coef, mu },
            _ => return Err(Error::Unsupported("boundary regime needs pareto_log".into())),
        },
    };
    p.validate()?;
    Ok(p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrelimitCheck {
    pub model: TailModel,
    pub regime: Regime,
    pub statistic: Statistic,
    pub t: f64,
    pub v_grid: Vec<f64>,
    pub n: u64,
    pub seed: u64,
    /// Search cap for first-passage times; `None` uses the walk default.
    pub n_cap: Option<u64>,
}

/// KS between normalized pre-limit samples and the limit marginal along a
/// v-grid. Passes when the sequence does not increase by more than two
/// standard errors of the KS statistic between grid points and the last
/// value is at most the threshold. Capped passage times enter as +∞.
pub fn verify_prelimit_convergence(check: &PrelimitCheck, opts: &RunOptions) -> Result<VerificationReport> {
    check_n(check.n)?;
    if check.v_grid.is_empty() {
        return Err(Error::Domain("v-grid is empty".into()));
    }
    let process = limit_process_for(&check.model, check.regime)?;
    let law = match check.statistic {
        Statistic::Max => MarginalLaw::forward(process, check.t)?,
        Statistic::Tau => MarginalLaw::inverse(process, check.t)?,
    };
    let n = check.n;
    let mut ks_sequence = Vec::with_capacity(check.v_grid.len());
    let mut cap_counts = Vec::with_capacity(check.v_grid.len());
    for (idx, &v) in check.v_grid.iter().enumerate() {
        let base = StreamKey::new(check.seed);
        let offset = idx as u64 * n;
        let draws: Vec<Result<Option<f64>>> = match check.statistic {
            Statistic::Max => {
                let stat = MaxStatistic::new(&check.model, check.regime, v, check.t)?;
                map_replicates(n, opts.threads, |r| {
                    let s = WalkSampler::new(check.model, base.replicate(offset + r), SamplerKind::Auto)?;
                    Ok(Some(stat.evaluate(&s)))
                })
            }
            Statistic::Tau => {
                let stat = TauStatistic::new(&check.model, check.regime, v, check.t, check.n_cap)?;
                map_replicates(n, opts.threads, |r| {
                    let s = WalkSampler::new(check.model, base.replicate(offset + r), SamplerKind::Auto)?;
                    Ok(stat.evaluate(&s))
                })
            }
        };
        let mut values = Vec::with_capacity(n as usize);
        let mut capped = 0u64;
        for d in draws {
            match d? {
                Some(x) => values.push(x),
                None => {
                    capped += 1;
                    values.push(f64::INFINITY);
                }
            }
        }
        values.sort_by(f64::total_cmp);
        ks_sequence.push(ks_distance(&values, &law));
        cap_counts.push(capped);
    }
    let slack = 2.0 * KOLMOGOROV_SD / (n as f64).sqrt();
    let monotone = ks_sequence.windows(2).all(|w| w[1] <= w[0] + slack);
    let last = *ks_sequence.last().expect("grid is nonempty");
    let cap_fraction = cap_counts.iter().copied().max().unwrap_or(0) as f64 / n as f64;
    let verdict = if cap_fraction > MAX_CAP_FRACTION {
        Verdict::Aborted
    } else {
        Verdict::from_bool(monotone && last <= PRELIMIT_THRESHOLD)
    };
    Ok(VerificationReport {
        test: format!("prelimit_{}_{}", serde_json::to_value(check.statistic)?.as_str().unwrap_or(""), law.name()),
        params: serde_json::to_value(check)?,
        n,
        ks: Some(last),
        bound: Some(dkw_bound(n, CONFIDENCE)?),
        tolerance: PRELIMIT_THRESHOLD,
        verdict,
        seed: check.seed,
        cap_fraction,
        runtime_ms: None,
        details: json!({
            "limit_law": law,
            "v_grid": check.v_grid,
            "ks_sequence": ks_sequence,
            "slack": slack,
            "monotone": monotone,
            "cap_counts": cap_counts,
        }),
    })
}

/// t·y^{−α}, the limit of v·P{S_⌊tv⌋ > a(v)y}.
pub fn ld_target(t: f64, y: f64, alpha: f64) -> f64 {
    t * y.powf(-alpha)
}

/// Monte Carlo estimate of v·P{S_⌊tv⌋ − c⌊tv⌋ > a(v)y}, with c = E[ξ] when
/// it is finite and c = 0 otherwise, against t·y^{−α} at ±10%.
#[allow(clippy::too_many_arguments)]
pub fn verify_large_deviation(
    model: &TailModel,
    t: f64,
    y: f64,
    v: f64,
    n: u64,
    seed: u64,
    opts: &RunOptions,
) -> Result<VerificationReport> {
    check_n(n)?;
    let regime = classify_regime(model);
    if !matches!(regime, Regime::R1HeavyNoCenter | Regime::R1HeavyCentered) {
        return Err(Error::RegimeMismatch { requested: Regime::R1HeavyNoCenter, actual: regime });
    }
    if !(t > 0.0 && y > 0.0 && t.is_finite() && y.is_finite()) {
        return Err(Error::Domain(format!("t and y must be positive, got t = {t}, y = {y}")));
    }
    let a = solve_a_regime1(model, v)?;
    let count = (t * v).floor();
    if count < 1.0 {
        return Err(Error::IndexUnderflow(count as i64));
    }
    let count = count as u64;
    let mu = model.mean();
    let centered = mu.is_finite();
    let threshold = a * y + if centered { mu * count as f64 } else { 0.0 };

    let key = StreamKey::new(seed);
    let model = *model;
    let chunks = n.div_ceil(LD_CHUNK);
    let per_chunk = map_replicates(chunks, opts.threads, |c| -> Result<u64> {
        let mut hits = 0;
        for r in c * LD_CHUNK..((c + 1) * LD_CHUNK).min(n) {
            let s = WalkSampler::new(model, key.replicate(r), SamplerKind::Direct)?;
            hits += u64::from(s.value(count) > threshold);
        }
        Ok(hits)
    });
    let mut hits = 0u64;
    for h in per_chunk {
        hits += h?;
    }
    let p = hits as f64 / n as f64;
    let estimate = v * p;
    let se = v * (p * (1.0 - p) / n as f64).sqrt();
    let target = ld_target(t, y, model.alpha());
    let pass = (estimate - target).abs() <= LD_RELATIVE_TOLERANCE * target;
    Ok(VerificationReport {
        test: "large_deviation".into(),
        params: json!({ "model": model, "t": t, "y": y, "v": v }),
        n,
        ks: None,
        bound: None,
        tolerance: LD_RELATIVE_TOLERANCE,
        verdict: Verdict::from_bool(pass),
        seed,
        cap_fraction: 0.0,
        runtime_ms: None,
        details: json!({
            "estimate": estimate,
            "se": se,
            "target": target,
            "relative_error": (estimate - target) / target,
            "exceedances": hits,
            "a": a,
            "index": count,
            "centered": centered,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> RunOptions {
        RunOptions { eps: DEFAULT_EPS, threads: 1 }
    }

    fn all_laws() -> Vec<MarginalLaw> {
        let procs = [
            (LimitProcess::X1 { alpha: 0.8 }, 1.0),
            (LimitProcess::X1 { alpha: 1.5 }, 1.0),
            (LimitProcess::X2 { alpha: 2.5, mu: 1.0 }, 0.5),
            (LimitProcess::X3 { mu: 1.0 }, 0.5),
            (LimitProcess::X4 { a_coef: 2.0, mu: 1.0 }, 0.5),
        ];
        procs
            .iter()
            .flat_map(|&(p, t)| [MarginalLaw::forward(p, t).unwrap(), MarginalLaw::inverse(p, t).unwrap()])
            .collect()
    }

    #[test]
    fn stratified_construction_always_passes() {
        for law in all_laws() {
            for n in [1, 7, 1000] {
                let r = verify_stratified_marginal(&law, n).unwrap();
                assert!(r.ks.unwrap() <= 0.5 / n as f64 + 1e-12, "{} n={n}: {:?}", law.name(), r.ks);
                assert!(r.passed());
            }
        }
    }

    #[test]
    fn inverse_windows_hold_the_bulk() {
        for law in all_laws().into_iter().filter(|l| l.inverse) {
            let w = marginal_window(&law).unwrap();
            assert!(law.cdf_left(w.t_lo) <= 2.0 * TAIL_DELTA, "{}", law.name());
            assert!(law.cdf(w.t_hi) >= 1.0 - TAIL_DELTA, "{}", law.name());
        }
    }

    #[test]
    fn small_marginal_runs_pass() {
        // N = 2000 gives a DKW band near 0.036
        for law in all_laws() {
            let r = verify_limit_marginal(&law, 2000, 11, &opts()).unwrap();
            assert!(r.passed(), "{}: {}", law.name(), r.to_json().unwrap());
        }
    }

    #[test]
    fn reports_are_reproducible() {
        let law = MarginalLaw::inverse(LimitProcess::X3 { mu: 1.0 }, 0.0).unwrap();
        let a = verify_limit_marginal(&law, 500, 3, &RunOptions { threads: 1, ..opts() }).unwrap();
        let b = verify_limit_marginal(&law, 500, 3, &RunOptions { threads: 2, ..opts() }).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let c = verify_limit_marginal(&law, 500, 4, &opts()).unwrap();
        assert_ne!(a.ks, c.ks);
    }

    #[test]
    fn ld_targets() {
        assert!((ld_target(1.0, 2.0, 1.5) - 0.353_553_390_593_273_8).abs() < 1e-15);
        assert_eq!(ld_target(2.0, 2.0, 1.5), 2.0 * ld_target(1.0, 2.0, 1.5));
        assert!(ld_target(1.0, 1e12, 1.5) < 1e-17);
    }

    #[test]
    fn ld_rejects_light_tails() {
        let m = TailModel::exponential(1.0).unwrap();
        assert!(matches!(verify_large_deviation(&m, 1.0, 2.0, 100.0, 10, 1, &opts()), Err(Error::RegimeMismatch { .. })));
    }

    #[test]
    fn ld_small_run_is_in_the_right_range() {
        let m = TailModel::pareto(1.5, 1.0).unwrap();
        let r = verify_large_deviation(&m, 1.0, 2.0, 50.0, 40_000, 2, &opts()).unwrap();
        let est = r.details["estimate"].as_f64().unwrap();
        let se = r.details["se"].as_f64().unwrap();
        assert!((est - 0.3536).abs() < 0.1 + 4.0 * se, "estimate {est}");
        assert!(r.ks.is_none());
    }

    #[test]
    fn limit_process_mapping() {
        let m = TailModel::pareto(2.5, 1.0).unwrap();
        assert_eq!(
            limit_process_for(&m, Regime::R2Intermediate).unwrap(),
            LimitProcess::X2 { alpha: 2.5, mu: m.mean() }
        );
        assert!(limit_process_for(&m, Regime::R3Gaussian).is_err());
        let b = TailModel::pareto_log(3.0, 2.0, 2.0).unwrap();
        assert!(matches!(limit_process_for(&b, Regime::R4Boundary).unwrap(), LimitProcess::X4 { a_coef, .. } if a_coef == 2.0));
    }

    #[test]
    fn gaussian_prelimit_on_exponential_increments() {
        let check = PrelimitCheck {
            model: TailModel::exponential(1.0).unwrap(),
            regime: Regime::R3Gaussian,
            statistic: Statistic::Max,
            t: 0.0,
            v_grid: vec![100.0, 2000.0],
            n: 1000,
            seed: 5,
            n_cap: None,
        };
        let r = verify_prelimit_convergence(&check, &opts()).unwrap();
        let seq = r.details["ks_sequence"].as_array().unwrap();
        assert_eq!(seq.len(), 2);
        assert!(r.ks.unwrap() < 0.2, "{}", r.to_json().unwrap());
    }
}
