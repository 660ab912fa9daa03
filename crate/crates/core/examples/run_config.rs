//! Drive the batch front end from a JSON document instead of the binary.
//!
//! cargo run --release --example run_config

use lbkld::cli::{cmd_sweep, cmd_utility, RunConfig};

fn main() -> lbkld::Result<()> {
    let cfg = RunConfig::from_json(
        r#"{
            "model": {"kind": "toy"},
            "estimator": {"kind": "nested_mc_kld", "n": 2000, "n_inner": 200},
            "design": {"kind": "point", "value": [5.0]},
            "seed": 42
        }"#,
    )?;
    print!("{}", cmd_utility(&cfg)?);

    let mut grid = cfg.clone();
    grid.design = serde_json::from_str(
        r#"{"kind": "scalar_interval", "lo": 2, "hi": 20, "grid_points": 4}"#,
    )?;
    print!("{}", cmd_sweep(&grid)?);
    Ok(())
}
