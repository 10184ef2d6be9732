use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use irw_fluct::experiment::{exit_code, run, ExperimentConfig, RunOptions, RunStatus};

const OUTPUTS: &str = "\
Outputs (in --out):
  summary.json        schema_version 1; per-stage moments, covariance tables with
                      z-scores, fits, checks and notes
  verdict.txt         one PASS/FAIL line per check, then NOTE lines
  kernel*.csv         s,t,K                      limit covariance table
  comparison*.csv     series,s,t,empirical,theoretical,SE,z
  ic.csv              site,count                 replicate 0 initial occupations
  second_order.csv    n,replicate,Y_n,normalizer
  hopf_lax.csv        x,t,u,shock_flag,minimizers   (minimizers ';'-separated)
With --raw:
  raw*.csv            replicate,n,y_bar,t,Y      one row per replicate, point, time
  raw_heights_n*.csv  replicate,n,x,t,sigma,sigma0_foot
  raw*.bin            columnar dump (magic IRWCOL01, little-endian f64/i64 columns)

Exit codes: 0 ok, 1 config error, 2 runtime error.";

/// Run a configured experiment (TOML, or JSON by extension).
#[derive(Parser, Debug)]
#[command(version, after_help = OUTPUTS)]
struct Cli {
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores); results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    replicates: Option<u64>,
    /// Comma-separated list of n values.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u64>>,
    /// Also write per-replicate CSV rows and columnar dumps.
    #[arg(long)]
    raw: bool,
    /// Continue from the checkpoint in the output directory.
    #[arg(long)]
    resume: bool,
    #[arg(long, hide = true)]
    halt_after_chunks: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let mut cfg = match ExperimentConfig::from_path(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e) as u8);
        }
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(o) = cli.out {
        cfg.out = o;
    }
    if let Some(r) = cli.replicates {
        cfg.replicates = r;
    }
    if let Some(ns) = cli.n {
        cfg.set_ns(ns);
    }
    cfg.raw |= cli.raw;
    let opts = RunOptions {
        resume: cli.resume,
        halt_after_chunks: cli.halt_after_chunks,
    };
    match run(&cfg, &opts) {
        Ok(RunStatus::Complete(summary)) => {
            print!("{}", summary.verdict_text());
            ExitCode::SUCCESS
        }
        Ok(RunStatus::Halted { replicates_done }) => {
            println!("halted after {replicates_done} replicates; rerun with --resume");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
