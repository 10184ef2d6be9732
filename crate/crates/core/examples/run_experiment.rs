//! Drive the batch runner from a config string: interrupt after one chunk,
//! resume, and read the summary back.

use irw_fluct::experiment::{run, ExperimentConfig, RunOptions, RunStatus};

const CONFIG: &str = r#"
kind = "fbm-sample"
seed = 1
replicates = 4000
chunk = 1000

[fbm]
kernel = { variant = "general", rho = 1.0, v = 2.0, kappa2 = 1.0 }
time_grid = [0.5, 1.0, 2.0]
"#;

fn main() -> irw_fluct::Result<()> {
    let dir = std::env::temp_dir().join("irw-fluct-run-example");
    let mut cfg = ExperimentConfig::from_toml(CONFIG)?;
    cfg.out = dir.clone();
    let halted = run(
        &cfg,
        &RunOptions {
            resume: false,
            halt_after_chunks: Some(1),
        },
    )?;
    println!("{halted:?}");
    let RunStatus::Complete(summary) = run(
        &cfg,
        &RunOptions {
            resume: true,
            halt_after_chunks: None,
        },
    )?
    else {
        unreachable!()
    };
    print!("{}", summary.verdict_text());
    println!("outputs in {}", dir.display());
    Ok(())
}
