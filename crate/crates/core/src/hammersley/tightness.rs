//! Second-order fluctuations `Y_n` of Hammersley's process around the
//! Hopf-Lax solution.

use std::io::Write;

use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use super::evolve::{evolve, LabelWindow};
use super::field::{PoissonField, DEFAULT_CELL};
use super::hopf_lax::{hopf_lax, Bdj, HjInitial, HopfLaxSolution};
use crate::error::{Error, Result};
use crate::profiles::Profile;
use crate::rng::{mix, tag, RngStream};
use crate::stats::{bootstrap_quantile_se, quantile, SampleStats};
use crate::walks::int_part;

/// Initial configuration of the label process.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HammersleyInitial {
    /// `z_0(i) = 0` for `i <= 0` and `+inf` for `i > 0`.
    Bdj,
    /// `z_0(0) = 0` with independent increments of mean
    /// `n u0(i/n) - n u0((i-1)/n)` and variance `v0(i/n)`; gamma distributed
    /// when the variance is positive, deterministic otherwise.
    Profile { profile: Profile },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TightnessSetup {
    pub x: f64,
    pub t: f64,
    pub initial: HammersleyInitial,
    /// Cell side of the lazily sampled Poisson field.
    #[serde(default = "default_cell")]
    pub cell: f64,
}

fn default_cell() -> f64 {
    DEFAULT_CELL
}

impl TightnessSetup {
    pub fn bdj(x: f64, t: f64) -> Self {
        Self {
            x,
            t,
            initial: HammersleyInitial::Bdj,
            cell: DEFAULT_CELL,
        }
    }

    pub fn solve(&self) -> Result<HopfLaxSolution> {
        match &self.initial {
            HammersleyInitial::Bdj => hopf_lax(&Bdj, self.x, self.t),
            HammersleyInitial::Profile { profile } => hopf_lax(profile, self.x, self.t),
        }
    }

    fn u0(&self, y: f64) -> f64 {
        match &self.initial {
            HammersleyInitial::Bdj => Bdj.u0(y),
            HammersleyInitial::Profile { profile } => profile.u0(y),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t > 0.0 && self.t.is_finite() && self.x.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "need t > 0 and finite x, got ({}, {})",
                self.x, self.t
            )));
        }
        if !(self.cell > 0.0 && self.cell.is_finite()) {
            return Err(Error::InvalidConfig("cell must be positive".into()));
        }
        match &self.initial {
            HammersleyInitial::Bdj if self.x <= 0.0 => Err(Error::InvalidConfig(
                "the BDJ configuration needs x > 0".into(),
            )),
            HammersleyInitial::Profile { profile } => profile.validate(),
            _ => Ok(()),
        }
    }
}

/// One replicate's `Y_n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderRow {
    pub n: u64,
    pub replicate: u64,
    pub y_n: f64,
    /// `n^{1/3} ln n`.
    pub normalizer: f64,
    /// Minimal microscopic minimizer label of `z_{nt}([nx])`.
    pub minimizer: i64,
}

/// Initial locations on labels `lo..=hi`, each increment from its own
/// substream so that widening the window keeps existing values.
fn profile_window(
    profile: &Profile,
    n: u64,
    lo: i64,
    hi: i64,
    rng: &RngStream,
) -> Result<LabelWindow> {
    let nf = n as f64;
    let increment = |i: i64| -> Result<f64> {
        let mean = profile.scaled_u0(n, i) - profile.scaled_u0(n, i - 1);
        let var = profile.v0(i as f64 / nf);
        if var <= 0.0 || mean <= 0.0 {
            return Ok(mean.max(0.0));
        }
        let g = Gamma::new(mean * mean / var, var / mean)
            .map_err(|e| Error::InvalidProfile(e.to_string()))?;
        let mut r = rng.substream(mix(0x5a1c, &[i as u64]));
        Ok(g.sample(&mut r))
    };
    let mut z0 = vec![0.0; (hi - lo + 1) as usize];
    let at = |i: i64| (i - lo) as usize;
    // z0(0) = 0 anchors the labels; walk outwards from it
    let mut acc = 0.0;
    for i in 1..=hi {
        acc += increment(i)?;
        if i >= lo {
            z0[at(i)] = acc;
        }
    }
    acc = 0.0;
    for i in (lo..=0).rev() {
        if i <= hi {
            z0[at(i)] = acc;
        }
        acc -= increment(i)?;
    }
    Ok(LabelWindow {
        lo,
        z0,
        open_below: true,
    })
}

/// Simulate `Y_n = {z_{nt}([nx]) - n u(x,t)} - inf_{y in I} {z_0([ny]) - n u0(y)}`
/// for one replicate. Label and field windows widen until the result is
/// interior.
pub fn second_order_replicate(
    setup: &TightnessSetup,
    sol: &HopfLaxSolution,
    n: u64,
    seed: u64,
    replicate: u64,
) -> Result<SecondOrderRow> {
    let nf = n as f64;
    let k = int_part(nf * setup.x);
    let nt = nf * setup.t;
    let field_seed = mix(seed, &[replicate, tag::FIELD]);
    let ic_rng = RngStream::derive(seed, &[replicate, tag::INITIAL]);
    let fluct = nf.cbrt() * nf.ln().max(1.0);
    let y_min = sol.minimizers.first().copied().unwrap_or(setup.x);
    let mut label_margin = (4.0 * fluct.powi(2).min(nf)).ceil() as i64 + 10;
    let mut field_margin = 10.0 * fluct + 20.0;
    for _ in 0..40 {
        let window = match &setup.initial {
            HammersleyInitial::Bdj => LabelWindow::bdj(-2, k),
            HammersleyInitial::Profile { profile } => {
                let lo = int_part(nf * y_min) - label_margin;
                profile_window(profile, n, lo.min(k), k, &ic_rng)?
            }
        };
        let lo_space = window
            .z0
            .iter()
            .copied()
            .find(|v| v.is_finite())
            .unwrap_or(0.0)
            - 1.0;
        let hi_space = match &setup.initial {
            HammersleyInitial::Bdj => nf * sol.u + field_margin,
            HammersleyInitial::Profile { .. } => window.get(k) + 1.0,
        };
        let field = PoissonField::with_cell(field_seed, lo_space, hi_space, nt, setup.cell)?;
        match evolve(&window, &field, nt, k..=k) {
            Ok(state) => {
                let z = state.get(k);
                let correction = sol
                    .minimizers
                    .iter()
                    .map(|&y| window.get(int_part(nf * y)) - nf * setup.u0(y))
                    .fold(f64::INFINITY, f64::min);
                return Ok(SecondOrderRow {
                    n,
                    replicate,
                    y_n: (z - nf * sol.u) - correction,
                    normalizer: fluct,
                    minimizer: state.minimizer_of(k),
                });
            }
            Err(Error::WindowBoundary { .. }) => label_margin *= 2,
            Err(Error::InsufficientField { .. }) => field_margin *= 2.0,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Degenerate(format!(
        "replicate {replicate} at n = {n} did not settle after widening"
    )))
}

/// Distribution summary of `Y_n` at one `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderSummary {
    pub n: u64,
    pub replicates: usize,
    pub mean: f64,
    pub sd: f64,
    pub sd_se: f64,
    /// `SD(Y_n) / n^{1/3}`.
    pub sd_over_cbrt: f64,
    /// Quantiles of `|Y_n| / (n^{1/3} ln n)` at 50%, 90%, 99%.
    pub abs_normalized_quantiles: [f64; 3],
    pub q99_bootstrap_se: f64,
}

pub fn second_order_summary(n: u64, rows: &[SecondOrderRow], seed: u64) -> SecondOrderSummary {
    let ys: Vec<f64> = rows.iter().map(|r| r.y_n).collect();
    let st = SampleStats::of(&ys);
    let c = (n as f64).cbrt();
    let mut abs: Vec<f64> = rows.iter().map(|r| r.y_n.abs() / r.normalizer).collect();
    abs.sort_by(|a, b| a.total_cmp(b));
    SecondOrderSummary {
        n,
        replicates: rows.len(),
        mean: st.mean,
        sd: st.sd,
        sd_se: st.sd_se,
        sd_over_cbrt: st.sd / c,
        abs_normalized_quantiles: [
            quantile(&abs, 0.5),
            quantile(&abs, 0.9),
            quantile(&abs, 0.99),
        ],
        q99_bootstrap_se: bootstrap_quantile_se(&abs, 0.99, 400, mix(seed, &[n])),
    }
}

/// `(n, replicate, Y_n, normalizer)` rows.
pub fn write_second_order_csv<W: Write>(rows: &[SecondOrderRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "n,replicate,Y_n,normalizer")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.n, r.replicate, r.y_n, r.normalizer)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hammersley::lis::lis_count;
    use crate::profiles::{HeightForm, VarianceForm};

    #[test]
    fn bdj_matches_direct_lis_inversion() {
        // Y_n = Gamma_n(n) - n / 4 at x = t = 1: the n-th chain point
        let setup = TightnessSetup::bdj(1.0, 1.0);
        let sol = setup.solve().unwrap();
        let n = 60;
        let row = second_order_replicate(&setup, &sol, n, 3, 0).unwrap();
        let z = row.y_n + n as f64 / 4.0;
        let seed = mix(3, &[0, tag::FIELD]);
        let f = PoissonField::new(seed, -1.0, z + 50.0, n as f64).unwrap();
        let below: Vec<_> = f.points().iter().copied().filter(|p| p.space > 0.0 && p.space <= z).collect();
        let strictly: Vec<_> = f.points().iter().copied().filter(|p| p.space > 0.0 && p.space < z).collect();
        assert_eq!(lis_count(&below), n as usize);
        assert_eq!(lis_count(&strictly), n as usize - 1);
        assert_eq!(row.minimizer, 0);
    }

    #[test]
    fn bdj_mean_is_near_quarter_n() {
        let setup = TightnessSetup::bdj(1.0, 1.0);
        let sol = setup.solve().unwrap();
        let n = 200;
        let ys: Vec<f64> = (0..40)
            .map(|r| second_order_replicate(&setup, &sol, n, 1, r).unwrap().y_n)
            .collect();
        let st = SampleStats::of(&ys);
        // fluctuations live on the n^{1/3} scale
        assert!(st.mean.abs() < 4.0 * (n as f64).cbrt(), "{st:?}");
        assert!(st.sd > 0.0 && st.sd < 3.0 * (n as f64).cbrt());
    }

    #[test]
    fn deterministic_profile_runs() {
        let p = Profile::new(HeightForm::Linear { rho: 1.0 }, VarianceForm::Zero).unwrap();
        let setup = TightnessSetup {
            x: 1.0,
            t: 0.25,
            initial: HammersleyInitial::Profile { profile: p },
            cell: DEFAULT_CELL,
        };
        let sol = setup.solve().unwrap();
        assert!((sol.minimizers[0] - 0.5).abs() < 1e-6);
        let row = second_order_replicate(&setup, &sol, 80, 2, 0).unwrap();
        assert!(row.y_n.abs() < 10.0 * 80f64.cbrt(), "{row:?}");
        // the minimizer sits near n * 0.5
        assert!((row.minimizer - 40).abs() < 30);
    }

    #[test]
    fn random_profile_window_is_consistent() {
        let p = Profile::flat(1.0, 1.0).unwrap();
        let rng = RngStream::new(5);
        let a = profile_window(&p, 50, -10, 10, &rng).unwrap();
        let b = profile_window(&p, 50, -20, 15, &rng).unwrap();
        for i in -10..=10 {
            assert_eq!(a.get(i), b.get(i));
        }
        assert_eq!(a.get(0), 0.0);
        assert!(a.z0.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn summary_and_csv() {
        let rows: Vec<SecondOrderRow> = (0..50)
            .map(|r| SecondOrderRow {
                n: 8,
                replicate: r,
                y_n: r as f64 - 25.0,
                normalizer: 2.0,
                minimizer: 0,
            })
            .collect();
        let s = second_order_summary(8, &rows, 1);
        assert!((s.sd_over_cbrt - s.sd / 2.0).abs() < 1e-12);
        assert!(s.abs_normalized_quantiles[2] >= s.abs_normalized_quantiles[0]);
        let mut out = Vec::new();
        write_second_order_csv(&rows[..1], &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "n,replicate,Y_n,normalizer\n8,0,-25,2\n");
    }
}
