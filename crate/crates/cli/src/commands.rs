use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use decoupled_core::limits::{sample_limit_path, LimitConfig, LimitSample, Window};
use decoupled_core::rng::{map_replicates, StreamKey, REPLICATE_STREAM};
use decoupled_core::tails::{
    a_m_regime3, a_regime4, normal_upper_quantile, quantile_expansion, solve_a_regime1, solve_a_regime2, Regime,
    TailModel,
};
use decoupled_core::verify::{
    verify_large_deviation, verify_limit_marginal, verify_prelimit_convergence, verify_tau_square_exponential,
    PrelimitCheck, RunOptions, Statistic, VerificationReport,
};
use decoupled_core::walks::{
    sample_decoupled, write_ensemble, write_path_csv, EnsembleMeta, MaxStatistic, TauStatistic, WalkSampler,
};
use serde_json::json;

use crate::config::RunConfig;

fn required_out(cfg: &RunConfig) -> Result<&Path> {
    cfg.out.as_deref().ok_or_else(|| anyhow!("--out is required"))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn sibling(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}

/// A single decoupled path, or with `--statistic` an ensemble of normalized
/// statistics.
pub fn sample_walk(cfg: &RunConfig) -> Result<i32> {
    let model = cfg.model()?;
    let out = required_out(cfg)?;
    let kind = cfg.sampler()?;
    let seed = cfg.seed();
    let Some(statistic) = cfg.statistic()? else {
        let len = cfg.len.unwrap_or(100);
        let walk = sample_decoupled(&model, len, StreamKey::new(seed), kind)?;
        let mut w = create(out)?;
        write_path_csv(&mut w, &walk)?;
        w.flush()?;
        let functionals = match cfg.t {
            Some(t) => json!({ "threshold": t, "tau": walk.first_passage(t), "n_visits": walk.visits(t) }),
            None => serde_json::Value::Null,
        };
        let meta = json!({ "model": model, "seed": seed, "sampler": kind, "len": len, "functionals": functionals });
        return write_json(&out.with_extension("json"), &meta).map(|_| 0);
    };

    let regime = cfg.walk_regime(&model)?;
    let (v, t, n) = (cfg.v()?, cfg.t()?, cfg.n(1000));
    let key = StreamKey::new(seed);
    let draws: Vec<Option<f64>> = match statistic {
        Statistic::Max => {
            let stat = MaxStatistic::new(&model, regime, v, t)?;
            let sampler = |r| WalkSampler::new(model, key.replicate(r), kind);
            sampler(0)?;
            map_replicates(n, cfg.threads(), |r| Some(stat.evaluate(&sampler(r).expect("checked above"))))
        }
        Statistic::Tau => {
            let stat = TauStatistic::new(&model, regime, v, t, cfg.n_cap)?;
            let sampler = |r| WalkSampler::new(model, key.replicate(r), kind);
            sampler(0)?;
            map_replicates(n, cfg.threads(), |r| stat.evaluate(&sampler(r).expect("checked above")))
        }
    };
    let cap_count = draws.iter().filter(|d| d.is_none()).count() as u64;
    let values: Vec<f64> = draws.into_iter().map(|d| d.unwrap_or(f64::INFINITY)).collect();
    let meta = EnsembleMeta {
        statistic: serde_json::to_value(statistic)?.as_str().unwrap_or_default().to_string(),
        model,
        regime,
        v,
        t,
        seed,
        n,
        cap_count,
    };
    write_ensemble(out, &values, &meta)?;
    Ok(0)
}

/// Path, atoms and a JSON summary of one limit-process realization.
pub fn sample_limit(cfg: &RunConfig) -> Result<i32> {
    let (process, inverse) = cfg.limit_process()?;
    if inverse {
        bail!("sample-limit draws X1..X4 paths; inverses are read off those paths");
    }
    let out = required_out(cfg)?;
    let [lo, hi] = cfg.window.ok_or_else(|| anyhow!("--window is required"))?;
    let window = Window::new(lo, hi)?;
    let seed = cfg.seed();
    let floor = process.floor_offset().is_some();

    let mut path_csv = create(out)?;
    let mut atom_csv = create(&sibling(out, "_atoms", "csv"))?;
    writeln!(path_csv, "{}", if floor { "t,value,floor" } else { "t,value" })?;
    writeln!(atom_csv, "t_k,j_k")?;

    let sample: Option<LimitSample> = if window.is_empty() {
        None
    } else {
        let lc = LimitConfig::new(window, cfg.eps());
        let mut rng = StreamKey::new(seed).stream(REPLICATE_STREAM);
        Some(sample_limit_path(process, &lc, &mut rng)?)
    };
    if let Some(s) = &sample {
        let times = std::iter::once(lo).chain(s.path.jump_times()).chain(std::iter::once(hi));
        for t in times {
            match s.path.floor {
                Some(f) => writeln!(path_csv, "{t},{},{}", s.path.value(t), f.at(t))?,
                None => writeln!(path_csv, "{t},{}", s.path.value(t))?,
            }
        }
        for (t, j) in &s.points.atoms {
            writeln!(atom_csv, "{t},{j}")?;
        }
    }
    path_csv.flush()?;
    atom_csv.flush()?;
    let meta = json!({
        "process": process,
        "window": window,
        "eps": cfg.eps(),
        "seed": seed,
        "intensity": sample.as_ref().map(|s| s.points.intensity),
        "atoms": sample.as_ref().map_or(0, |s| s.points.atoms.len()),
        "records": sample.as_ref().map_or(0, |s| s.path.records.len()),
    });
    write_json(&out.with_extension("json"), &meta)?;
    Ok(0)
}

fn emit(cfg: &RunConfig, mut report: VerificationReport, start: Instant) -> Result<i32> {
    if cfg.timing == Some(true) {
        report.runtime_ms = Some(start.elapsed().as_millis() as u64);
    }
    let text = report.to_json()?;
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("{}: {:?} (ks {:?}, tolerance {})", report.test, report.verdict, report.ks, report.tolerance);
        }
        None => print!("{text}"),
    }
    Ok(report.verdict.exit_code())
}

fn run_options(cfg: &RunConfig) -> RunOptions {
    RunOptions { eps: cfg.eps(), threads: cfg.threads() }
}

pub fn verify_marginal(cfg: &RunConfig) -> Result<i32> {
    let start = Instant::now();
    let law = cfg.marginal_law()?;
    let report = verify_limit_marginal(&law, cfg.n(100_000), cfg.seed(), &run_options(cfg))?;
    emit(cfg, report, start)
}

pub fn verify_prelimit(cfg: &RunConfig) -> Result<i32> {
    let start = Instant::now();
    let model = cfg.model()?;
    let check = PrelimitCheck {
        model,
        regime: cfg.walk_regime(&model)?,
        statistic: cfg.statistic()?.unwrap_or(Statistic::Max),
        t: cfg.t()?,
        v_grid: cfg.v_grid.clone().ok_or_else(|| anyhow!("--v-grid is required"))?,
        n: cfg.n(2000),
        seed: cfg.seed(),
        n_cap: cfg.n_cap,
    };
    let report = verify_prelimit_convergence(&check, &run_options(cfg))?;
    emit(cfg, report, start)
}

pub fn verify_ld(cfg: &RunConfig) -> Result<i32> {
    let start = Instant::now();
    let y = cfg.y.ok_or_else(|| anyhow!("--y is required"))?;
    let report =
        verify_large_deviation(&cfg.model()?, cfg.t()?, y, cfg.v()?, cfg.n(2_000_000), cfg.seed(), &run_options(cfg))?;
    emit(cfg, report, start)
}

pub fn verify_tau_exp(cfg: &RunConfig) -> Result<i32> {
    let start = Instant::now();
    let alpha = match (cfg.alpha, &cfg.params) {
        (Some(a), _) => a,
        (None, Some(p)) => p["alpha"].as_f64().ok_or_else(|| anyhow!("--params needs a numeric alpha"))?,
        (None, None) => bail!("--alpha is required"),
    };
    let report = verify_tau_square_exponential(alpha, cfg.t()?, cfg.n(100_000), cfg.seed(), &run_options(cfg))?;
    emit(cfg, report, start)
}

fn normalize_row(model: &TailModel, regime: Regime, v: f64) -> Result<String> {
    Ok(match regime {
        Regime::R1HeavyNoCenter | Regime::R1HeavyCentered => format!("{v},{}", solve_a_regime1(model, v)?),
        Regime::R2Intermediate => format!("{v},{}", solve_a_regime2(model, v)?),
        Regime::R3Gaussian => {
            let g = a_m_regime3(model.mean(), model.variance().sqrt(), v)?;
            let h = 1.0 / g.a;
            let z = normal_upper_quantile(h)?;
            match quantile_expansion(h) {
                Ok(e) => format!("{v},{},{},{z},{e},{}", g.a, g.m, (e - z) / z),
                Err(_) => format!("{v},{},{},{z},,", g.a, g.m),
            }
        }
        Regime::R4Boundary => match *model {
            TailModel::ParetoLog { a_coef, .. } => format!("{v},{}", a_regime4(a_coef, v)?),
            _ => bail!("R4 needs a pareto_log model"),
        },
    })
}

/// a(v), and for the Gaussian regime m(v) with the quantile expansion next
/// to the refined quantile Φ⁻¹(1 − 1/a).
pub fn normalize(cfg: &RunConfig) -> Result<i32> {
    let model = cfg.model()?;
    let regime = cfg.walk_regime(&model)?;
    let grid = cfg.v_grid.clone().unwrap_or_else(|| vec![10.0, 100.0, 1e3, 1e4, 1e5, 1e6]);
    let header = match regime {
        Regime::R3Gaussian => "v,a,m,z_refined,z_expansion,rel_err",
        _ => "v,a",
    };
    let mut text = format!("{header}\n");
    for v in grid {
        text.push_str(&normalize_row(&model, regime, v)?);
        text.push('\n');
    }
    match &cfg.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(0)
}
