//! Replicate ensembles and the statistics used to compare them with the
//! closed-form limits.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{fit_line, neumaier_sum, LineFit};

/// One observed coordinate: a series label (base point, height point, ...)
/// and a time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub series: usize,
    pub time: f64,
}

/// Mergeable collection of replicate rows keyed by replicate index.
///
/// Statistics are always evaluated over rows in index order, so the result
/// does not depend on how partial ensembles were combined.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub times: Vec<f64>,
    pub series: Vec<f64>,
    rows: BTreeMap<u64, Vec<f64>>,
}

impl Ensemble {
    pub fn new(times: Vec<f64>, series: Vec<f64>) -> Self {
        Self {
            times,
            series,
            rows: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.times.len() * self.series.len()
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::with_capacity(self.dim());
        for series in 0..self.series.len() {
            for &time in &self.times {
                out.push(Cell { series, time });
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn replicates(&self) -> impl Iterator<Item = u64> + '_ {
        self.rows.keys().copied()
    }

    pub fn rows(&self) -> impl Iterator<Item = (u64, &[f64])> + '_ {
        self.rows.iter().map(|(&k, v)| (k, v.as_slice()))
    }

    /// Add one replicate, laid out `[series][time]`.
    pub fn accumulate(&mut self, replicate: u64, values: Vec<f64>) -> Result<()> {
        if values.len() != self.dim() {
            return Err(Error::GridMismatch {
                expected: self.dim(),
                got: values.len(),
            });
        }
        if self.rows.insert(replicate, values).is_some() {
            return Err(Error::Degenerate(format!("replicate {replicate} added twice")));
        }
        Ok(())
    }

    pub fn accumulate_series(&mut self, replicate: u64, values: &[Vec<i64>]) -> Result<()> {
        let flat = values.iter().flatten().map(|&v| v as f64).collect();
        self.accumulate(replicate, flat)
    }

    pub fn merge(&mut self, other: Ensemble) -> Result<()> {
        if other.times != self.times || other.series != self.series {
            return Err(Error::GridMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        for (k, v) in other.rows {
            if self.rows.insert(k, v).is_some() {
                return Err(Error::Degenerate(format!("replicate {k} in both ensembles")));
            }
        }
        Ok(())
    }

    fn column(&self, i: usize) -> Vec<f64> {
        self.rows.values().map(|r| r[i]).collect()
    }

    /// Summary statistics of `scale * value` for every cell and cell pair.
    pub fn summarize(&self, n: u64, scale: f64) -> EnsembleSummary {
        let d = self.dim();
        let r = self.len();
        let mut s = EnsembleSummary {
            n,
            replicates: r,
            scale,
            times: self.times.clone(),
            series: self.series.clone(),
            defined: r >= 2,
            mean: vec![f64::NAN; d],
            mean_se: vec![f64::NAN; d],
            cov: vec![f64::NAN; d * d],
            cov_se: vec![f64::NAN; d * d],
            cov_se_batch: vec![f64::NAN; d * d],
        };
        if r == 0 {
            return s;
        }
        let cols: Vec<Vec<f64>> = (0..d)
            .map(|i| self.column(i).into_iter().map(|v| v * scale).collect())
            .collect();
        let rf = r as f64;
        let sums: Vec<f64> = cols.iter().map(|c| neumaier_sum(c.iter().copied())).collect();
        for i in 0..d {
            s.mean[i] = sums[i] / rf;
        }
        for i in 0..d {
            for j in i..d {
                let sij = neumaier_sum(cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b));
                let c = sij / rf - s.mean[i] * s.mean[j];
                s.cov[i * d + j] = c;
                s.cov[j * d + i] = c;
                if r >= 2 {
                    let se = jackknife_cov_se(&cols[i], &cols[j], sums[i], sums[j], sij);
                    s.cov_se[i * d + j] = se;
                    s.cov_se[j * d + i] = se;
                    let bse = batch_means_cov_se(&cols[i], &cols[j]);
                    s.cov_se_batch[i * d + j] = bse;
                    s.cov_se_batch[j * d + i] = bse;
                }
            }
            if r >= 2 {
                s.mean_se[i] = (s.cov[i * d + i].max(0.0) / (rf - 1.0)).sqrt();
            }
        }
        s
    }
}

/// Delete-1 jackknife standard error of the divisor-`R` covariance.
fn jackknife_cov_se(x: &[f64], y: &[f64], sx: f64, sy: f64, sxy: f64) -> f64 {
    let r = x.len();
    let m = (r - 1) as f64;
    let leave_out: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| {
            let (mx, my) = ((sx - a) / m, (sy - b) / m);
            (sxy - a * b) / m - mx * my
        })
        .collect();
    let mean = neumaier_sum(leave_out.iter().copied()) / r as f64;
    let ss = neumaier_sum(leave_out.iter().map(|v| (v - mean) * (v - mean)));
    (m / r as f64 * ss).sqrt()
}

const BATCHES: usize = 20;

/// Standard error of the covariance from `BATCHES` contiguous batches.
fn batch_means_cov_se(x: &[f64], y: &[f64]) -> f64 {
    let r = x.len();
    let b = BATCHES.min(r / 2);
    if b < 2 {
        return f64::NAN;
    }
    let per = r / b;
    let covs: Vec<f64> = (0..b)
        .map(|k| {
            let (xs, ys) = (&x[k * per..(k + 1) * per], &y[k * per..(k + 1) * per]);
            let p = per as f64;
            let mx = neumaier_sum(xs.iter().copied()) / p;
            let my = neumaier_sum(ys.iter().copied()) / p;
            neumaier_sum(xs.iter().zip(ys).map(|(a, c)| a * c)) / p - mx * my
        })
        .collect();
    let bf = b as f64;
    let mean = covs.iter().sum::<f64>() / bf;
    let var = covs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (bf - 1.0);
    (var / bf).sqrt()
}

/// Empirical means and covariances of a scaled ensemble, with standard
/// errors. Matrices are row-major over cells ordered `[series][time]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub n: u64,
    pub replicates: usize,
    pub scale: f64,
    pub times: Vec<f64>,
    pub series: Vec<f64>,
    /// False when fewer than two replicates are present.
    pub defined: bool,
    pub mean: Vec<f64>,
    pub mean_se: Vec<f64>,
    pub cov: Vec<f64>,
    pub cov_se: Vec<f64>,
    pub cov_se_batch: Vec<f64>,
}

/// One empirical covariance cell against the closed form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovRow {
    pub series: usize,
    pub s: f64,
    pub t: f64,
    pub empirical: f64,
    pub theoretical: f64,
    pub se: f64,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<CovRow>,
    pub max_abs_z: f64,
    pub outside_3se: usize,
}

impl Comparison {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "series,s,t,empirical,theoretical,SE,z")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.series, r.s, r.t, r.empirical, r.theoretical, r.se, r.z
            )?;
        }
        Ok(())
    }
}

impl EnsembleSummary {
    pub fn dim(&self) -> usize {
        self.times.len() * self.series.len()
    }

    fn idx(&self, series: usize, t_idx: usize) -> usize {
        series * self.times.len() + t_idx
    }

    pub fn cov_at(&self, a: (usize, usize), b: (usize, usize)) -> f64 {
        self.cov[self.idx(a.0, a.1) * self.dim() + self.idx(b.0, b.1)]
    }

    pub fn cov_se_at(&self, a: (usize, usize), b: (usize, usize)) -> f64 {
        self.cov_se[self.idx(a.0, a.1) * self.dim() + self.idx(b.0, b.1)]
    }

    pub fn variance(&self, series: usize, t_idx: usize) -> (f64, f64) {
        let c = (series, t_idx);
        (self.cov_at(c, c), self.cov_se_at(c, c))
    }

    /// Standard deviation and its delta-method standard error.
    pub fn sd(&self, series: usize, t_idx: usize) -> (f64, f64) {
        let (v, se) = self.variance(series, t_idx);
        let sd = v.max(0.0).sqrt();
        (sd, se / (2.0 * sd))
    }

    pub fn mean_at(&self, series: usize, t_idx: usize) -> (f64, f64) {
        let i = self.idx(series, t_idx);
        (self.mean[i], self.mean_se[i])
    }

    /// Compare every within-series covariance `(s <= t)` to
    /// `kernel(series, s, t)`.
    pub fn compare<F: Fn(usize, f64, f64) -> f64>(&self, kernel: F) -> Comparison {
        let k = self.times.len();
        let mut rows = Vec::new();
        for series in 0..self.series.len() {
            for i in 0..k {
                for j in i..k {
                    let (s, t) = (self.times[i], self.times[j]);
                    let empirical = self.cov_at((series, i), (series, j));
                    let se = self.cov_se_at((series, i), (series, j));
                    let theoretical = kernel(series, s, t);
                    let z = if se > 0.0 {
                        (empirical - theoretical) / se
                    } else if empirical == theoretical {
                        0.0
                    } else {
                        f64::INFINITY
                    };
                    rows.push(CovRow {
                        series,
                        s,
                        t,
                        empirical,
                        theoretical,
                        se,
                        z,
                    });
                }
            }
        }
        let max_abs_z = rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max);
        let outside_3se = rows.iter().filter(|r| r.z.abs() > 3.0).count();
        Comparison {
            rows,
            max_abs_z,
            outside_3se,
        }
    }

    /// Aligned text table of means and variances.
    pub fn text_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "n = {}, replicates = {}, scale = {:.6}",
            self.n, self.replicates, self.scale
        );
        let _ = writeln!(
            out,
            "{:>10} {:>10} {:>12} {:>12} {:>12} {:>12}",
            "series", "t", "mean", "mean_se", "var", "var_se"
        );
        for (a, &y) in self.series.iter().enumerate() {
            for (i, &t) in self.times.iter().enumerate() {
                let (m, mse) = self.mean_at(a, i);
                let (v, vse) = self.variance(a, i);
                let _ = writeln!(
                    out,
                    "{y:>10.4} {t:>10.4} {m:>12.6} {mse:>12.6} {v:>12.6} {vse:>12.6}"
                );
            }
        }
        out
    }
}

/// Cross-series correlation with its jackknife standard error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCorrelation {
    pub series_a: usize,
    pub series_b: usize,
    pub s: f64,
    pub t: f64,
    pub corr: f64,
    pub se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndependenceReport {
    pub pairs: Vec<PairCorrelation>,
    pub max_abs_corr: f64,
    /// Largest `|corr| / se`.
    pub max_abs_z: f64,
}

fn corr(x: &[f64], y: &[f64]) -> f64 {
    let r = x.len() as f64;
    let mx = neumaier_sum(x.iter().copied()) / r;
    let my = neumaier_sum(y.iter().copied()) / r;
    let sxy = neumaier_sum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    let sxx = neumaier_sum(x.iter().map(|a| (a - mx) * (a - mx)));
    let syy = neumaier_sum(y.iter().map(|b| (b - my) * (b - my)));
    sxy / (sxx * syy).sqrt()
}

/// Jackknife over contiguous blocks; plain delete-1 when `r` is small.
fn jackknife_corr_se(x: &[f64], y: &[f64]) -> f64 {
    let r = x.len();
    let blocks = r.min(200);
    let per = r / blocks;
    let mut vals = Vec::with_capacity(blocks);
    for k in 0..blocks {
        let (lo, hi) = (k * per, if k + 1 == blocks { r } else { (k + 1) * per });
        let xs: Vec<f64> = x[..lo].iter().chain(&x[hi..]).copied().collect();
        let ys: Vec<f64> = y[..lo].iter().chain(&y[hi..]).copied().collect();
        vals.push(corr(&xs, &ys));
    }
    let g = blocks as f64;
    let mean = vals.iter().sum::<f64>() / g;
    ((g - 1.0) / g * vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>()).sqrt()
}

/// Correlations between every pair of distinct series at every pair of
/// grid times.
pub fn independence_test(ens: &Ensemble) -> Result<IndependenceReport> {
    let m = ens.series.len();
    if m < 2 {
        return Err(Error::Degenerate("need at least two series".into()));
    }
    if ens.len() < 4 {
        return Err(Error::Degenerate("need at least four replicates".into()));
    }
    let k = ens.times.len();
    let mut pairs = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            for i in 0..k {
                let x = ens.column(a * k + i);
                for j in 0..k {
                    let y = ens.column(b * k + j);
                    pairs.push(PairCorrelation {
                        series_a: a,
                        series_b: b,
                        s: ens.times[i],
                        t: ens.times[j],
                        corr: corr(&x, &y),
                        se: jackknife_corr_se(&x, &y),
                    });
                }
            }
        }
    }
    let max_abs_corr = pairs.iter().map(|p| p.corr.abs()).fold(0.0, f64::max);
    let max_abs_z = pairs
        .iter()
        .map(|p| (p.corr / p.se).abs())
        .fold(0.0, f64::max);
    Ok(IndependenceReport {
        pairs,
        max_abs_corr,
        max_abs_z,
    })
}

fn loglog(ns: &[f64], ys: &[f64], what: &str) -> Result<LineFit> {
    if ns.len() != ys.len() {
        return Err(Error::GridMismatch {
            expected: ns.len(),
            got: ys.len(),
        });
    }
    let mut distinct = ns.to_vec();
    distinct.sort_by(|a, b| a.total_cmp(b));
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Degenerate("need at least three distinct n".into()));
    }
    if ns.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Degenerate(format!("nonpositive n or {what}")));
    }
    let lx: Vec<f64> = ns.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    fit_line(&lx, &ly)
}

/// Slope of `log sd` against `log n`, with its standard error.
pub fn scaling_exponent(ns: &[f64], sds: &[f64]) -> Result<LineFit> {
    loglog(ns, sds, "standard deviation")
}

/// Decay slope of the mean absolute hydrodynamic error.
pub fn hydro_error(ns: &[f64], errors: &[f64]) -> Result<LineFit> {
    loglog(ns, errors, "error")
}

/// Location and spread of a sample, with the standard error of the SD.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub sd_se: f64,
}

impl SampleStats {
    pub fn of(xs: &[f64]) -> Self {
        let r = xs.len();
        if r < 2 {
            return Self {
                count: r,
                mean: xs.first().copied().unwrap_or(f64::NAN),
                sd: f64::NAN,
                sd_se: f64::NAN,
            };
        }
        let rf = r as f64;
        let mean = neumaier_sum(xs.iter().copied()) / rf;
        let m2 = neumaier_sum(xs.iter().map(|x| (x - mean).powi(2))) / rf;
        let m4 = neumaier_sum(xs.iter().map(|x| (x - mean).powi(4))) / rf;
        let var = m2 * rf / (rf - 1.0);
        let sd = var.sqrt();
        // delta method: Var(s^2) ~ (m4 - m2^2) / r
        let var_se = ((m4 - m2 * m2).max(0.0) / rf).sqrt();
        Self {
            count: r,
            mean,
            sd,
            sd_se: if sd > 0.0 { var_se / (2.0 * sd) } else { 0.0 },
        }
    }
}

/// Residual `(sigma_{nt}([nx]) - sigma_0([n(x - bt)])) / sqrt(n)` per
/// replicate. The `n u` terms cancel because `u(x, t) = u0(x - bt)`.
pub fn transported_residuals(heights: &[i64], feet: &[i64], n: u64) -> Vec<f64> {
    let rn = (n as f64).sqrt();
    heights
        .iter()
        .zip(feet)
        .map(|(&h, &f)| (h - f) as f64 / rn)
        .collect()
}

pub fn transported_fluctuation_check(heights: &[i64], feet: &[i64], n: u64) -> SampleStats {
    SampleStats::of(&transported_residuals(heights, feet, n))
}

/// Empirical quantile by linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Bootstrap standard error of a quantile, with a deterministic stream.
pub fn bootstrap_quantile_se(xs: &[f64], q: f64, draws: usize, seed: u64) -> f64 {
    use rand::Rng;
    let mut rng = crate::rng::RngStream::new(seed);
    let r = xs.len();
    if r < 2 {
        return f64::NAN;
    }
    let mut vals = Vec::with_capacity(draws);
    let mut buf = vec![0.0; r];
    for _ in 0..draws {
        for b in buf.iter_mut() {
            *b = xs[rng.random_range(0..r)];
        }
        buf.sort_by(|a, b| a.total_cmp(b));
        vals.push(quantile(&buf, q));
    }
    SampleStats::of(&vals).sd
}
