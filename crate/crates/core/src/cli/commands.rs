use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::estimators::{replicate_inference, Estimator, UtilityEstimate};
use crate::models::Design;
use crate::optimize::{optimize_times, sweep, DesignSpec, OptimizeOutcome, SweepResult};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "LBKLD_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Utility,
    Sweep,
    Optimize,
    ReplicateInfer,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

/// Seventeen significant digits; parses back to the same double.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn design_point(cfg: &RunConfig) -> Result<Design> {
    match &cfg.design {
        DesignSpec::Point { value } => cfg.model.build()?.design_from_coords(value),
        _ => Err(Error::Config(
            "design must be a point (kind = \"point\") for this command".into(),
        )),
    }
}

fn estimate_json(e: &UtilityEstimate, seed: u64) -> serde_json::Value {
    json!({
        "design": e.design.coords(),
        "kind": e.kind.as_str(),
        "value": e.value,
        "std_error": e.std_error,
        "n_sims": e.n_sims,
        "replications": e.replications,
        "seed": seed,
    })
}

/// Estimate the utility of a single design and render it as JSON.
pub fn cmd_utility(cfg: &RunConfig) -> Result<String> {
    cfg.validate()?;
    let model = cfg.model.build()?;
    let design = design_point(cfg)?;
    let est = cfg
        .estimator()
        .estimate(model.as_ref(), &design, cfg.seed)?;
    Ok(serde_json::to_string_pretty(&estimate_json(&est, cfg.seed))? + "\n")
}

fn sweep_csv(result: &SweepResult, seed: u64) -> String {
    let k = result.rows.first().map_or(0, |r| r.design.coords().len());
    let mut out = String::new();
    for i in 1..=k {
        let _ = write!(out, "design_{i},");
    }
    out.push_str("estimator,value,std_error,n_sims,seed\n");
    for r in &result.rows {
        for c in r.design.coords() {
            let _ = write!(out, "{},", fmt_f64(c));
        }
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.kind.as_str(),
            fmt_f64(r.value),
            fmt_f64(r.std_error),
            r.n_sims,
            seed
        );
    }
    let coords: Vec<String> = result
        .argmax_design()
        .coords()
        .into_iter()
        .map(fmt_f64)
        .collect();
    let _ = writeln!(
        out,
        "# argmax: {},{}",
        coords.join(","),
        fmt_f64(result.argmax_value())
    );
    out
}

/// Evaluate every design of an enumerable spec; one CSV row per design.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<String> {
    cfg.validate()?;
    let model = cfg.model.build()?;
    let result = sweep(model.as_ref(), &cfg.design, &cfg.estimator(), cfg.seed)?;
    Ok(sweep_csv(&result, cfg.seed))
}

/// `(design coordinates, value)` pairs read back from a sweep CSV.
pub type SweepRows = Vec<(Vec<f64>, f64)>;

/// Parse a sweep CSV back into its rows and the stated argmax design.
pub fn parse_sweep_csv(text: &str) -> Result<(SweepRows, Vec<f64>)> {
    let bad = |m: &str| Error::Argument(format!("malformed sweep CSV: {m}"));
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| bad("empty"))?
        .split(',')
        .collect();
    let k = header.iter().filter(|h| h.starts_with("design_")).count();
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(s));
    let mut rows = Vec::new();
    let mut argmax = None;
    for line in lines {
        if let Some(rest) = line.strip_prefix("# argmax: ") {
            let f: Vec<&str> = rest.split(',').collect();
            if f.len() != k + 1 {
                return Err(bad("argmax line"));
            }
            argmax = Some(f[..k].iter().map(|s| num(s)).collect::<Result<Vec<_>>>()?);
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != header.len() {
            return Err(bad(line));
        }
        let design = f[..k].iter().map(|s| num(s)).collect::<Result<Vec<_>>>()?;
        rows.push((design, num(f[k + 1])?));
    }
    Ok((rows, argmax.ok_or_else(|| bad("missing argmax line"))?))
}

/// Maximise over a time box. Returns the JSON result and the trace CSV.
pub fn cmd_optimize(cfg: &RunConfig) -> Result<(String, String)> {
    cfg.validate()?;
    let model = cfg.model.build()?;
    let spsa = cfg.spsa.clone().unwrap_or_default();
    let outcome = optimize_times(
        model.as_ref(),
        &cfg.design,
        &cfg.estimator(),
        &spsa,
        cfg.seed,
    )?;
    let design = outcome.design();
    let k = design.len();
    let mut trace = String::from("iteration,");
    for i in 1..=k {
        let _ = write!(trace, "design_{i},");
    }
    trace.push_str("utility\n");
    let mut push = |i: usize, coords: &[f64], u: f64| {
        let _ = write!(trace, "{i},");
        for c in coords {
            let _ = write!(trace, "{},", fmt_f64(*c));
        }
        let _ = writeln!(trace, "{}", fmt_f64(u));
    };
    let (method, aborted) = match &outcome {
        OptimizeOutcome::Exhaustive(s) => {
            for (i, r) in s.rows.iter().enumerate() {
                push(i, &r.design.coords(), r.value);
            }
            ("exhaustive", None)
        }
        OptimizeOutcome::Spsa(o) => {
            for s in &o.trace {
                push(s.iteration, &s.design, s.utility);
            }
            ("spsa", o.aborted.clone())
        }
    };
    let value = json!({
        "design": design,
        "method": method,
        "kind": cfg.estimator().kind().as_str(),
        "seed": cfg.seed,
        "aborted": aborted,
    });
    Ok((serde_json::to_string_pretty(&value)? + "\n", trace))
}

/// Repeated ABC inference at a fixed design; CSV of per-trial posterior means
/// followed by an `mse` row.
pub fn cmd_replicate_infer(cfg: &RunConfig) -> Result<String> {
    cfg.validate()?;
    let model = cfg.model.build()?;
    let design = design_point(cfg)?;
    let Estimator::DPosterior(abc) = cfg.estimator() else {
        return Err(Error::Config(
            "replicate-infer needs estimator.kind = \"d_posterior_precision\"".into(),
        ));
    };
    let trials = cfg.trials.unwrap_or(1000);
    let study = replicate_inference(model.as_ref(), &[design], &abc, trials, cfg.seed)?.remove(0);
    let p = model.theta_dim();
    let mut out = String::from("trial");
    for i in 1..=p {
        let _ = write!(out, ",theta_true_{i}");
    }
    for i in 1..=p {
        let _ = write!(out, ",posterior_mean_{i}");
    }
    out.push('\n');
    for (i, t) in study.trials.iter().enumerate() {
        let _ = write!(out, "{}", i + 1);
        for v in t.theta_true.iter().chain(&t.posterior_mean) {
            let _ = write!(out, ",{}", fmt_f64(*v));
        }
        out.push('\n');
    }
    out.push_str("mse");
    out.push_str(&",".repeat(p));
    for m in &study.mse {
        let _ = write!(out, ",{}", fmt_f64(*m));
    }
    out.push('\n');
    Ok(out)
}

fn resolve_workers(flag: Option<usize>, config: Option<usize>) -> Result<usize> {
    if let Some(w) = flag.or(config) {
        return if w == 0 {
            Err(Error::Config("workers must be at least 1".into()))
        } else {
            Ok(w)
        };
    }
    match std::env::var(WORKERS_ENV) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(w) if w > 0 => Ok(w),
            _ => Err(Error::Config(format!(
                "{WORKERS_ENV} must be a positive integer, got {s:?}"
            ))),
        },
        Err(_) => Ok(1),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn trace_path(out: Option<&Path>) -> PathBuf {
    match out {
        Some(p) => {
            let mut s = p.as_os_str().to_owned();
            s.push(".trace.csv");
            PathBuf::from(s)
        }
        None => PathBuf::from("lbkld_trace.csv"),
    }
}

/// Load the config, apply overrides, run `command` on a worker pool and write
/// its output.
pub fn run(command: Command, config: &Path, overrides: &Overrides) -> Result<()> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(s) = overrides.seed {
        cfg.seed = s;
    }
    let workers = resolve_workers(overrides.workers, cfg.workers)?;
    cfg.validate()?;
    let out = overrides.out.clone().or_else(|| cfg.output_path.clone());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    log::info!("{command:?} with {workers} worker(s), seed {}", cfg.seed);
    let start = Instant::now();
    pool.install(|| -> Result<()> {
        match command {
            Command::Utility => write_output(out.as_deref(), &cmd_utility(&cfg)?),
            Command::Sweep => write_output(out.as_deref(), &cmd_sweep(&cfg)?),
            Command::ReplicateInfer => write_output(out.as_deref(), &cmd_replicate_infer(&cfg)?),
            Command::Optimize => {
                let (result, trace) = cmd_optimize(&cfg)?;
                let tp = trace_path(out.as_deref());
                std::fs::write(&tp, trace)?;
                log::info!("trace written to {}", tp.display());
                write_output(out.as_deref(), &result)
            }
        }
    })?;
    log::info!("finished in {:.1?}", start.elapsed());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, std::f64::consts::PI] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn worker_precedence() {
        assert_eq!(resolve_workers(Some(3), Some(2)).unwrap(), 3);
        assert_eq!(resolve_workers(None, Some(2)).unwrap(), 2);
        assert!(resolve_workers(Some(0), None).is_err());
    }

    #[test]
    fn trace_sidecar_name() {
        assert_eq!(
            trace_path(Some(Path::new("out/res.json"))),
            PathBuf::from("out/res.json.trace.csv")
        );
    }
}
