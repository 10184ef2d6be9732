use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::columnar::{write_columnar, Column};
use super::config::{ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};
use crate::hammersley::{
    check_quadratic_minimum, hopf_lax, second_order_replicate, second_order_summary,
    write_hopf_lax_csv, write_second_order_csv, Bdj, HammersleyInitial, HjInitial,
    HopfLaxSolution, SecondOrderRow, SecondOrderSummary, TightnessSetup,
};
use crate::limits::{CovKernel, GaussianSampler};
use crate::numeric::LineFit;
use crate::rng::{mix, tag, RngStream};
use crate::stats::{
    hydro_error, independence_test, scaling_exponent, transported_fluctuation_check, Comparison,
    Ensemble, EnsembleSummary, IndependenceReport, SampleStats,
};
use crate::walks::{
    simulate_brownian_current, simulate_replicate, InitialSpec, ReplicateState, SimConfig,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
const BIAS_LIMIT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Continue from a checkpoint in the output directory when one exists.
    pub resume: bool,
    /// Stop after this many chunks, leaving the checkpoint in place.
    pub halt_after_chunks: Option<usize>,
}

#[derive(Debug)]
pub enum RunStatus {
    Complete(Box<RunSummary>),
    Halted { replicates_done: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct StageReport {
    pub n: u64,
    pub replicates: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Comparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub independence: Option<IndependenceReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_bias: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hydro_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transported: Option<SampleStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub second_order: Option<SecondOrderSummary>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub quantity: String,
    pub ns: Vec<u64>,
    pub values: Vec<f64>,
    pub fit: LineFit,
}

#[derive(Clone, Debug, Serialize)]
pub struct HopfLaxPoint {
    #[serde(flatten)]
    pub solution: HopfLaxSolution,
    pub c1: f64,
    pub quadratic_minimum: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub kind: ExperimentKind,
    pub seed: u64,
    pub replicates: u64,
    pub config: ExperimentConfig,
    pub stages: Vec<StageReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub hopf_lax: Vec<HopfLaxPoint>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    /// `PASS`, `FAIL`, or `REPORT` when nothing is checked.
    pub verdict: String,
}

impl RunSummary {
    pub fn verdict_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = if c.pass { "PASS" } else { "FAIL" };
            out.push_str(&format!("{tag}  {}: {}\n", c.name, c.detail));
        }
        for n in &self.notes {
            out.push_str(&format!("NOTE  {n}\n"));
        }
        out.push_str(&format!("overall: {}\n", self.verdict));
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct StageRows {
    n: u64,
    rows: Vec<(u64, Vec<f64>)>,
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    config: ExperimentConfig,
    stages: Vec<StageRows>,
}

enum Job {
    Walks(SimConfig),
    Brownian {
        lambda: f64,
        y: f64,
        grid: Vec<f64>,
        halfwidth: f64,
    },
    Fbm(GaussianSampler),
    Hammersley {
        setup: TightnessSetup,
        sol: HopfLaxSolution,
        n: u64,
    },
}

impl Job {
    fn prepare(cfg: &ExperimentConfig, n: u64) -> Result<Self> {
        Ok(match cfg.kind {
            ExperimentKind::BrownianCurrent => {
                let b = cfg.brownian.as_ref().unwrap();
                Job::Brownian {
                    lambda: b.lambda,
                    y: b.y,
                    grid: b.time_grid.clone(),
                    halfwidth: b.halfwidth(),
                }
            }
            ExperimentKind::FbmSample => {
                let f = cfg.fbm.as_ref().unwrap();
                Job::Fbm(GaussianSampler::new(&f.kernel, &f.time_grid)?)
            }
            ExperimentKind::HammersleyTightness => {
                let setup = cfg.hammersley.as_ref().unwrap().setup();
                let sol = setup.solve()?;
                Job::Hammersley { setup, sol, n }
            }
            ExperimentKind::HopfLaxMap => unreachable!("no replicates"),
            _ => Job::Walks(cfg.walks.as_ref().unwrap().sim_config(n)),
        })
    }

    fn record(&self, seed: u64, rep: u64) -> Result<Vec<f64>> {
        match self {
            Job::Walks(sim) => {
                let p = simulate_replicate(sim, seed, rep)?;
                Ok(p.current
                    .iter()
                    .chain(&p.heights)
                    .chain(&p.feet)
                    .flatten()
                    .map(|&v| v as f64)
                    .collect())
            }
            Job::Brownian {
                lambda,
                y,
                grid,
                halfwidth,
            } => {
                let mut rng = RngStream::derive(seed, &[rep, tag::BROWNIAN]);
                let c = simulate_brownian_current(*lambda, *y, grid, *halfwidth, &mut rng)?;
                Ok(c.into_iter().map(|v| v as f64).collect())
            }
            Job::Fbm(s) => Ok(s.sample(&mut RngStream::derive(seed, &[rep, tag::LIMIT]))),
            Job::Hammersley { setup, sol, n } => {
                let r = second_order_replicate(setup, sol, *n, seed, rep)?;
                Ok(vec![r.y_n, r.normalizer, r.minimizer as f64])
            }
        }
    }
}

fn stage_ns(cfg: &ExperimentConfig) -> Vec<u64> {
    match cfg.kind {
        ExperimentKind::HopfLaxMap => Vec::new(),
        ExperimentKind::BrownianCurrent | ExperimentKind::FbmSample => vec![1],
        ExperimentKind::HammersleyTightness => cfg.hammersley.as_ref().unwrap().n.clone(),
        _ => cfg.walks.as_ref().unwrap().n.clone(),
    }
}

/// Seed of the stage at size `n`; stages are independent and do not depend
/// on which other sizes are in the list.
pub fn stage_seed(cfg: &ExperimentConfig, n: u64) -> u64 {
    match cfg.kind {
        ExperimentKind::BrownianCurrent | ExperimentKind::FbmSample => cfg.seed,
        _ => mix(cfg.seed, &[n]),
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn load_checkpoint(path: &Path, canonical: &ExperimentConfig) -> Result<Vec<StageRows>> {
    let text = fs::read_to_string(path)?;
    let ck: Checkpoint = serde_json::from_str(&text)?;
    if &ck.config != canonical {
        return Err(Error::Config(format!(
            "resume: {} was written for a different config",
            path.display()
        )));
    }
    Ok(ck.stages)
}

/// Validate, simulate every stage in chunks, analyse and write all outputs.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunStatus> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out)?;
    let canonical = cfg.canonical();
    let ck_path = cfg.out.join(CHECKPOINT_FILE);
    let mut data = if opts.resume && ck_path.exists() {
        load_checkpoint(&ck_path, &canonical)?
    } else {
        Vec::new()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Degenerate(e.to_string()))?;
    let ns = stage_ns(cfg);
    let total = cfg.replicates;
    let chunk = cfg.chunk_size();
    let mut chunks = 0;
    let mut done_all = 0;
    for (si, &n) in ns.iter().enumerate() {
        if data.len() <= si {
            data.push(StageRows {
                n,
                rows: Vec::new(),
            });
        }
        let mut done = data[si].rows.len() as u64;
        done_all += done;
        if done >= total {
            continue;
        }
        let job = Job::prepare(cfg, n)?;
        let seed = stage_seed(cfg, n);
        while done < total {
            let hi = (done + chunk).min(total);
            let recs = pool.install(|| {
                (done..hi)
                    .into_par_iter()
                    .map(|r| job.record(seed, r))
                    .collect::<Result<Vec<_>>>()
            })?;
            data[si].rows.extend((done..hi).zip(recs));
            done_all += hi - done;
            done = hi;
            let ck = Checkpoint {
                config: canonical.clone(),
                stages: data.clone(),
            };
            write_atomic(&ck_path, &serde_json::to_vec(&ck)?)?;
            chunks += 1;
            let finished = done >= total && si + 1 == ns.len();
            if opts.halt_after_chunks == Some(chunks) && !finished {
                return Ok(RunStatus::Halted {
                    replicates_done: done_all,
                });
            }
        }
    }
    let summary = analyze(cfg, &data)?;
    write_outputs(cfg, &data, &summary)?;
    if ck_path.exists() {
        fs::remove_file(&ck_path)?;
    }
    Ok(RunStatus::Complete(Box::new(summary)))
}

fn budget(cells: usize) -> usize {
    1 + cells / 50
}

fn comparison_check(name: String, c: &Comparison) -> Check {
    let b = budget(c.rows.len());
    Check {
        name,
        pass: c.outside_3se <= b,
        detail: format!(
            "{} of {} cells beyond 3 SE (allowed {b}), max |z| = {:.3}",
            c.outside_3se,
            c.rows.len(),
            c.max_abs_z
        ),
    }
}

/// Limit covariance per base point for a walk configuration.
pub fn walk_kernels(sim: &SimConfig) -> Result<Vec<CovKernel>> {
    let kappa2 = sim.kernel.kappa2();
    sim.base_points
        .iter()
        .map(|&y| {
            let rho = sim.profile.rho0(y);
            let v = match sim.initial {
                InitialSpec::Random { law } => law.achieved_variance(rho, sim.profile.v0(y))?,
                InitialSpec::Deterministic => 0.0,
            };
            Ok(CovKernel::General { rho, v, kappa2 })
        })
        .collect()
}

struct WalkStage {
    report: StageReport,
    sd_last: f64,
}

fn analyze_walk_stage(
    cfg: &ExperimentConfig,
    stage: &StageRows,
    notes: &mut Vec<String>,
) -> Result<WalkStage> {
    let w = cfg.walks.as_ref().unwrap();
    let sim = w.sim_config(stage.n);
    let (b, h, k) = (w.base_points.len(), w.height_points.len(), w.time_grid.len());
    let n = stage.n;
    let mut ens = Ensemble::new(w.time_grid.clone(), w.base_points.clone());
    for (rep, row) in &stage.rows {
        ens.accumulate(*rep, row[..b * k].to_vec())?;
    }
    let mut report = StageReport {
        n,
        replicates: stage.rows.len(),
        ..Default::default()
    };
    let bias = sim.truncation_bias();
    if bias >= BIAS_LIMIT {
        notes.push(format!("n = {n}: truncation bias bound {bias:e} is not below {BIAS_LIMIT:e}"));
    }
    report.truncation_bias = Some(bias);
    let mut sd_last = f64::NAN;
    if b > 0 {
        let summary = ens.summarize(n, (n as f64).powf(-0.25));
        let kernels = walk_kernels(&sim)?;
        report.comparison = Some(summary.compare(|s, a, t| kernels[s].cov(a, t)));
        sd_last = summary.sd(0, k - 1).0 * (n as f64).powf(0.25);
        if cfg.kind == ExperimentKind::RwIndependence {
            report.independence = Some(independence_test(&ens)?);
        }
        report.ensemble = Some(summary);
    }
    if h > 0 {
        let nf = n as f64;
        let drift = w.kernel.drift();
        let mut acc = Vec::with_capacity(stage.rows.len() * h * k);
        let (mut hs, mut fs) = (Vec::new(), Vec::new());
        for (_, row) in &stage.rows {
            for (p, &x) in w.height_points.iter().enumerate() {
                for (i, &t) in w.time_grid.iter().enumerate() {
                    let sigma = row[b * k + p * k + i];
                    acc.push((sigma / nf - w.profile.u0(x - drift * t)).abs());
                }
            }
            hs.push(row[b * k + k - 1] as i64);
            fs.push(row[b * k + h * k + k - 1] as i64);
        }
        report.hydro_error = Some(crate::numeric::neumaier_sum(acc.iter().copied()) / acc.len() as f64);
        report.transported = Some(transported_fluctuation_check(&hs, &fs, n));
    }
    Ok(WalkStage { report, sd_last })
}

fn analyze(cfg: &ExperimentConfig, data: &[StageRows]) -> Result<RunSummary> {
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    let mut stages = Vec::new();
    let mut fit = None;
    let mut hopf_points = Vec::new();
    match cfg.kind {
        ExperimentKind::RwCovariance
        | ExperimentKind::RwScaling
        | ExperimentKind::RwIndependence
        | ExperimentKind::RwHydro => {
            let mut sds = Vec::new();
            for st in data {
                let ws = analyze_walk_stage(cfg, st, &mut notes)?;
                sds.push(ws.sd_last);
                stages.push(ws.report);
            }
            let ns: Vec<u64> = data.iter().map(|s| s.n).collect();
            let nf: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
            match cfg.kind {
                ExperimentKind::RwCovariance => {
                    for s in &stages {
                        let c = s.comparison.as_ref().unwrap();
                        checks.push(comparison_check(format!("n = {}: covariance", s.n), c));
                    }
                }
                ExperimentKind::RwIndependence => {
                    for s in &stages {
                        let r = s.independence.as_ref().unwrap();
                        checks.push(Check {
                            name: format!("n = {}: cross-correlations", s.n),
                            pass: r.max_abs_z <= 3.0,
                            detail: format!(
                                "{} pairs, max |corr| = {:.4}, max |z| = {:.3}",
                                r.pairs.len(),
                                r.max_abs_corr,
                                r.max_abs_z
                            ),
                        });
                    }
                }
                ExperimentKind::RwScaling => {
                    let f = scaling_exponent(&nf, &sds)?;
                    checks.push(Check {
                        name: "scaling exponent".into(),
                        pass: (0.22..=0.28).contains(&f.slope),
                        detail: format!(
                            "slope {:.4} +- {:.4}, accepted [0.22, 0.28]",
                            f.slope, f.slope_se
                        ),
                    });
                    fit = Some(FitReport {
                        quantity: "sd of the unscaled current at the last grid time".into(),
                        ns,
                        values: sds,
                        fit: f,
                    });
                }
                ExperimentKind::RwHydro => {
                    let errs: Vec<f64> = stages.iter().map(|s| s.hydro_error.unwrap()).collect();
                    let f = hydro_error(&nf, &errs)?;
                    checks.push(Check {
                        name: "hydrodynamic error decay".into(),
                        pass: f.slope <= -0.4,
                        detail: format!("slope {:.4} +- {:.4}, accepted <= -0.4", f.slope, f.slope_se),
                    });
                    for w in stages.windows(2) {
                        let (a, b) = (w[0].transported.unwrap(), w[1].transported.unwrap());
                        let target = (w[1].n as f64 / w[0].n as f64).powf(-0.25);
                        let ratio = b.sd / a.sd;
                        checks.push(Check {
                            name: format!("transported residual n = {} -> {}", w[0].n, w[1].n),
                            pass: (ratio / target - 1.0).abs() <= 0.2,
                            detail: format!("sd ratio {ratio:.4}, target {target:.4} +- 20%"),
                        });
                    }
                    fit = Some(FitReport {
                        quantity: "mean absolute hydrodynamic error".into(),
                        ns,
                        values: errs,
                        fit: f,
                    });
                }
                _ => unreachable!(),
            }
        }
        ExperimentKind::BrownianCurrent | ExperimentKind::FbmSample => {
            let st = &data[0];
            let (grid, kernel) = match cfg.kind {
                ExperimentKind::BrownianCurrent => {
                    let b = cfg.brownian.as_ref().unwrap();
                    (b.time_grid.clone(), CovKernel::Brownian { lambda: b.lambda })
                }
                _ => {
                    let f = cfg.fbm.as_ref().unwrap();
                    (f.time_grid.clone(), f.kernel)
                }
            };
            let mut ens = Ensemble::new(grid.clone(), vec![0.0]);
            for (rep, row) in &st.rows {
                ens.accumulate(*rep, row.clone())?;
            }
            let summary = ens.summarize(1, 1.0);
            let cmp = summary.compare(|_, s, t| kernel.cov(s, t));
            checks.push(comparison_check("covariance".into(), &cmp));
            if cfg.kind == ExperimentKind::FbmSample && grid[0] == 0.0 {
                let nonzero = st.rows.iter().filter(|(_, r)| r[0] != 0.0).count();
                checks.push(Check {
                    name: "value at time 0".into(),
                    pass: nonzero == 0,
                    detail: format!("{nonzero} draws nonzero at t = 0"),
                });
            }
            stages.push(StageReport {
                n: 1,
                replicates: st.rows.len(),
                ensemble: Some(summary),
                comparison: Some(cmp),
                ..Default::default()
            });
        }
        ExperimentKind::HammersleyTightness => {
            for st in data {
                let rows = second_order_rows(st);
                stages.push(StageReport {
                    n: st.n,
                    replicates: rows.len(),
                    second_order: Some(second_order_summary(st.n, &rows, stage_seed(cfg, st.n))),
                    ..Default::default()
                });
            }
            let mut sums: Vec<&SecondOrderSummary> =
                stages.iter().map(|s| s.second_order.as_ref().unwrap()).collect();
            sums.sort_by_key(|s| s.n);
            if sums.len() >= 2 {
                let r: Vec<f64> = sums.iter().map(|s| s.sd_over_cbrt).collect();
                let (lo, hi) = r.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
                checks.push(Check {
                    name: "SD(Y_n) / n^(1/3) stable".into(),
                    pass: hi / lo <= 1.5,
                    detail: format!("max / min = {:.4}, accepted <= 1.5", hi / lo),
                });
                for w in sums.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    let (qa, qb) = (a.abs_normalized_quantiles[2], b.abs_normalized_quantiles[2]);
                    let slack = 2.0 * a.q99_bootstrap_se.hypot(b.q99_bootstrap_se);
                    checks.push(Check {
                        name: format!("q99 n = {} -> {}", a.n, b.n),
                        pass: qb <= qa + slack,
                        detail: format!("{qa:.4} -> {qb:.4}, slack {slack:.4}"),
                    });
                }
            }
        }
        ExperimentKind::HopfLaxMap => {
            let h = cfg.hopf_lax.as_ref().unwrap();
            let u0: Box<dyn HjInitial> = match &h.initial {
                HammersleyInitial::Bdj => Box::new(Bdj),
                HammersleyInitial::Profile { profile } => Box::new(profile.clone()),
            };
            for &t in &h.times {
                for x in h.xs() {
                    let sol = hopf_lax(u0.as_ref(), x, t)?;
                    let e = check_quadratic_minimum(u0.as_ref(), &sol, h.delta, 200);
                    if !e.ok {
                        notes.push(format!("x = {x}, t = {t}: quadratic minimum fails, c1 = {:e}", e.c1));
                    }
                    hopf_points.push(HopfLaxPoint {
                        solution: sol,
                        c1: e.c1,
                        quadratic_minimum: e.ok,
                    });
                }
            }
            let shocks = hopf_points.iter().filter(|p| p.solution.shock).count();
            notes.push(format!("{shocks} of {} points are shocks", hopf_points.len()));
        }
    }
    let verdict = if checks.is_empty() {
        "REPORT"
    } else if checks.iter().all(|c| c.pass) {
        "PASS"
    } else {
        "FAIL"
    };
    Ok(RunSummary {
        schema_version: SCHEMA_VERSION,
        kind: cfg.kind,
        seed: cfg.seed,
        replicates: cfg.replicates,
        config: cfg.canonical(),
        stages,
        fit,
        hopf_lax: hopf_points,
        checks,
        notes,
        verdict: verdict.into(),
    })
}

fn second_order_rows(st: &StageRows) -> Vec<SecondOrderRow> {
    st.rows
        .iter()
        .map(|(rep, r)| SecondOrderRow {
            n: st.n,
            replicate: *rep,
            y_n: r[0],
            normalizer: r[1],
            minimizer: r[2] as i64,
        })
        .collect()
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_outputs(cfg: &ExperimentConfig, data: &[StageRows], summary: &RunSummary) -> Result<()> {
    let out = &cfg.out;
    let mut json = serde_json::to_vec_pretty(summary)?;
    json.push(b'\n');
    write_atomic(&out.join("summary.json"), &json)?;
    write_atomic(&out.join("verdict.txt"), summary.verdict_text().as_bytes())?;
    match cfg.kind {
        ExperimentKind::HopfLaxMap => {
            let sols: Vec<HopfLaxSolution> =
                summary.hopf_lax.iter().map(|p| p.solution.clone()).collect();
            let mut f = create(out, "hopf_lax.csv")?;
            write_hopf_lax_csv(&sols, &mut f)?;
            f.flush()?;
        }
        ExperimentKind::HammersleyTightness => {
            let rows: Vec<SecondOrderRow> = data.iter().flat_map(second_order_rows).collect();
            let mut f = create(out, "second_order.csv")?;
            write_second_order_csv(&rows, &mut f)?;
            f.flush()?;
            if cfg.raw {
                let cols = vec![
                    Column::i64("n", rows.iter().map(|r| r.n as i64).collect()),
                    Column::i64("replicate", rows.iter().map(|r| r.replicate as i64).collect()),
                    Column::f64("Y_n", rows.iter().map(|r| r.y_n).collect()),
                    Column::f64("normalizer", rows.iter().map(|r| r.normalizer).collect()),
                    Column::i64("minimizer", rows.iter().map(|r| r.minimizer).collect()),
                ];
                write_columnar(&cols, create(out, "raw.bin")?)?;
            }
        }
        ExperimentKind::BrownianCurrent | ExperimentKind::FbmSample => {
            let (grid, kernel, point) = match cfg.kind {
                ExperimentKind::BrownianCurrent => {
                    let b = cfg.brownian.as_ref().unwrap();
                    (&b.time_grid, CovKernel::Brownian { lambda: b.lambda }, b.y)
                }
                _ => {
                    let f = cfg.fbm.as_ref().unwrap();
                    (&f.time_grid, f.kernel, 0.0)
                }
            };
            let mut f = create(out, "kernel.csv")?;
            kernel.write_table(grid, &mut f)?;
            f.flush()?;
            let mut f = create(out, "comparison.csv")?;
            summary.stages[0].comparison.as_ref().unwrap().write_csv(&mut f)?;
            f.flush()?;
            if cfg.raw {
                write_long(out, "raw", "y_bar", "Y", 1, &[point], grid, &data[0], 0)?;
            }
        }
        _ => {
            let w = cfg.walks.as_ref().unwrap();
            let (b, h, k) = (w.base_points.len(), w.height_points.len(), w.time_grid.len());
            let kernels = walk_kernels(&w.sim_config(w.n[0]))?;
            for (i, kern) in kernels.iter().enumerate() {
                let mut f = create(out, &format!("kernel_s{i}.csv"))?;
                kern.write_table(&w.time_grid, &mut f)?;
                f.flush()?;
            }
            for (st, rep) in data.iter().zip(&summary.stages) {
                if let Some(c) = &rep.comparison {
                    let mut f = create(out, &format!("comparison_n{}.csv", st.n))?;
                    c.write_csv(&mut f)?;
                    f.flush()?;
                }
            }
            let first = &data[0];
            let sim = w.sim_config(first.n);
            let state = ReplicateState::generate(&sim, stage_seed(cfg, first.n), 0)?;
            let mut f = create(out, "ic.csv")?;
            state.initial().write_csv(&mut f)?;
            f.flush()?;
            if cfg.raw {
                for st in data {
                    write_long(out, &format!("raw_n{}", st.n), "y_bar", "Y", st.n, &w.base_points, &w.time_grid, st, 0)?;
                    if h > 0 {
                        write_heights(out, st, b * k, h, &w.height_points, &w.time_grid)?;
                    }
                }
            }
        }
    }
    Ok(())
}

/// `(replicate, n, <point>, t, <value>)` rows from records laid out
/// `[point][time]` starting at `offset`, as CSV and as a columnar dump.
#[allow(clippy::too_many_arguments)]
fn write_long(
    dir: &Path,
    stem: &str,
    point_name: &str,
    value_name: &str,
    n: u64,
    points: &[f64],
    grid: &[f64],
    st: &StageRows,
    offset: usize,
) -> Result<()> {
    let k = grid.len();
    let mut csv = create(dir, &format!("{stem}.csv"))?;
    writeln!(csv, "replicate,n,{point_name},t,{value_name}")?;
    let (mut c_rep, mut c_n, mut c_p, mut c_t, mut c_v) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (rep, row) in &st.rows {
        for (p, &y) in points.iter().enumerate() {
            for (i, &t) in grid.iter().enumerate() {
                let v = row[offset + p * k + i];
                writeln!(csv, "{rep},{n},{y},{t},{v}")?;
                c_rep.push(*rep as i64);
                c_n.push(n as i64);
                c_p.push(y);
                c_t.push(t);
                c_v.push(v);
            }
        }
    }
    csv.flush()?;
    let cols = vec![
        Column::i64("replicate", c_rep),
        Column::i64("n", c_n),
        Column::f64(point_name, c_p),
        Column::f64("t", c_t),
        Column::f64(value_name, c_v),
    ];
    write_columnar(&cols, create(dir, &format!("{stem}.bin"))?)
}

fn write_heights(
    dir: &Path,
    st: &StageRows,
    offset: usize,
    h: usize,
    points: &[f64],
    grid: &[f64],
) -> Result<()> {
    let k = grid.len();
    let mut csv = create(dir, &format!("raw_heights_n{}.csv", st.n))?;
    writeln!(csv, "replicate,n,x,t,sigma,sigma0_foot")?;
    for (rep, row) in &st.rows {
        for (p, &x) in points.iter().enumerate() {
            for (i, &t) in grid.iter().enumerate() {
                let sigma = row[offset + p * k + i];
                let foot = row[offset + h * k + p * k + i];
                writeln!(csv, "{rep},{},{x},{t},{sigma},{foot}", st.n)?;
            }
        }
    }
    csv.flush()?;
    Ok(())
}
