//! Exact simulation of independent continuous-time random walks sampled at a
//! grid of macroscopic times, with the current across characteristics and
//! height values.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::JumpKernel;
use crate::profiles::{
    gen_deterministic_ic, gen_random_ic, InitialCondition, OccupationLaw, Profile, SiteRange,
};
use crate::rng::{mix, tag, RngStream};

/// `[x]`, the largest integer not above `x`, with a 1e-9 guard so that
/// products like `1600 * (0.7 - 0.3)` land on the intended integer.
#[inline]
pub fn int_part(x: f64) -> i64 {
    (x + 1e-9).floor() as i64
}

/// How the initial occupations are generated from the profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialSpec {
    /// Independent occupations with mean `rho0` and variance `v0`.
    Random { law: OccupationLaw },
    /// The staircase `[n u0(m/n)] - [n u0((m-1)/n)]`.
    Deterministic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: u64,
    pub time_grid: Vec<f64>,
    pub base_points: Vec<f64>,
    pub kernel: JumpKernel,
    pub profile: Profile,
    pub initial: InitialSpec,
    /// Override for the initial window radius in sites.
    #[serde(default)]
    pub window_radius: Option<u64>,
    /// Accept a radius below the recommended one.
    #[serde(default)]
    pub force_window: bool,
    /// Macroscopic `x` values where `sigma_{nt}([nx])` is recorded.
    #[serde(default)]
    pub height_points: Vec<f64>,
}

impl SimConfig {
    pub fn new(
        n: u64,
        time_grid: Vec<f64>,
        base_points: Vec<f64>,
        kernel: JumpKernel,
        profile: Profile,
        initial: InitialSpec,
    ) -> Self {
        Self {
            n,
            time_grid,
            base_points,
            kernel,
            profile,
            initial,
            window_radius: None,
            force_window: false,
            height_points: Vec::new(),
        }
    }

    pub fn t_max(&self) -> f64 {
        self.time_grid.last().copied().unwrap_or(0.0)
    }

    pub fn recommended_radius(&self) -> u64 {
        self.kernel.recommended_radius(self.n, self.t_max())
    }

    pub fn radius(&self) -> u64 {
        self.window_radius
            .unwrap_or_else(|| self.recommended_radius())
    }

    /// `[n b t_i]` for every grid time.
    pub fn shifts(&self) -> Vec<i64> {
        let nb = self.n as f64 * self.kernel.drift();
        self.time_grid.iter().map(|&t| int_part(nb * t)).collect()
    }

    pub fn base_sites(&self) -> Vec<i64> {
        self.base_points
            .iter()
            .map(|&y| int_part(self.n as f64 * y))
            .collect()
    }

    pub fn height_sites(&self) -> Vec<i64> {
        self.height_points
            .iter()
            .map(|&x| int_part(self.n as f64 * x))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.time_grid.is_empty() {
            return bad("time_grid is empty".into());
        }
        if self.time_grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return bad("time_grid entries must be finite and nonnegative".into());
        }
        if self.time_grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad("time_grid must be strictly increasing".into());
        }
        if self.base_points.is_empty() && self.height_points.is_empty() {
            return bad("base_points and height_points are both empty".into());
        }
        if self
            .base_points
            .iter()
            .chain(&self.height_points)
            .any(|y| !y.is_finite())
        {
            return bad("base_points and height_points must be finite".into());
        }
        self.profile.validate()?;
        if let InitialSpec::Random { law } = self.initial {
            // every distinct density level must be realizable; probe the
            // sites the run will touch
            for r in self.particle_windows() {
                for x in r.sites() {
                    let y = x as f64 / self.n as f64;
                    law.realize(self.profile.rho0(y), self.profile.v0(y))?;
                }
            }
        }
        let rec = self.recommended_radius();
        if let Some(w) = self.window_radius {
            if w < rec && !self.force_window {
                return bad(format!(
                    "window_radius {w} is below the recommended {rec}; set force_window to override"
                ));
            }
        }
        Ok(())
    }

    /// Disjoint sorted windows of starting sites whose particles are
    /// simulated.
    pub fn particle_windows(&self) -> Vec<SiteRange> {
        let w = self.radius() as i64;
        let shifts = self.shifts();
        let lo_s = shifts.iter().copied().min().unwrap_or(0).min(0);
        let hi_s = shifts.iter().copied().max().unwrap_or(0).max(0);
        let mut raw: Vec<SiteRange> = self
            .base_sites()
            .into_iter()
            .map(|c| SiteRange::new(c - w + lo_s, c + w + hi_s))
            .collect();
        // particles crossing level X by time nt start near X - nbt
        raw.extend(
            self.height_sites()
                .into_iter()
                .map(|x| SiteRange::new(x - w - hi_s, x + w - lo_s)),
        );
        merge_ranges(raw)
    }

    /// Sites on which initial occupations are generated: the hull of the
    /// particle windows, the origin and every height site.
    pub fn ic_range(&self) -> SiteRange {
        let mut r = SiteRange::new(0, 0);
        for w in self.particle_windows() {
            r = r.hull(&w);
        }
        r
    }

    /// `rho_max` times the Chernoff bound on the number of unsimulated
    /// particles that could reach a characteristic.
    pub fn truncation_bias(&self) -> f64 {
        self.profile.max_density()
            * self
                .kernel
                .truncation_bias_bound(self.n, self.t_max(), self.radius())
    }
}

fn merge_ranges(mut raw: Vec<SiteRange>) -> Vec<SiteRange> {
    raw.sort_by_key(|r| r.lo);
    let mut out: Vec<SiteRange> = Vec::with_capacity(raw.len());
    for r in raw {
        match out.last_mut() {
            Some(last) if r.lo <= last.hi + 1 => last.hi = last.hi.max(r.hi),
            _ => out.push(r),
        }
    }
    out
}

/// All particle positions of one replicate at the grid times.
#[derive(Clone, Debug)]
pub struct ReplicateState {
    n: u64,
    times: Vec<f64>,
    shifts: Vec<i64>,
    windows: Vec<SiteRange>,
    band: Vec<i64>,
    ic: InitialCondition,
    starts: Vec<i64>,
    /// `positions[i][j]`: particle `j` at time `n t_i`.
    positions: Vec<Vec<i64>>,
    sorted_starts: Vec<i64>,
    sorted_positions: Vec<Vec<i64>>,
}

impl ReplicateState {
    pub fn generate(cfg: &SimConfig, seed: u64, replicate: u64) -> Result<Self> {
        let range = cfg.ic_range();
        let ic = match cfg.initial {
            InitialSpec::Random { law } => {
                let rng = RngStream::derive(seed, &[replicate, tag::INITIAL]);
                gen_random_ic(&cfg.profile, cfg.n, range, law, &rng)?
            }
            InitialSpec::Deterministic => gen_deterministic_ic(&cfg.profile, cfg.n, range),
        };
        let windows = cfg.particle_windows();
        let n = cfg.n as f64;
        let samplers: Vec<_> = cfg
            .time_grid
            .iter()
            .scan(0.0, |prev, &t| {
                let s = cfg.kernel.sampler(n * (t - *prev));
                *prev = t;
                Some(s)
            })
            .collect();
        let walks = RngStream::derive(seed, &[replicate, tag::WALKS]);
        let mut starts = Vec::new();
        let mut positions = vec![Vec::new(); cfg.time_grid.len()];
        for w in &windows {
            for x in w.sites() {
                let count = ic.occupation(x)?;
                if count == 0 {
                    continue;
                }
                let mut rng = walks.substream(mix(tag::WALKS, &[x as u64]));
                for _ in 0..count {
                    starts.push(x);
                    let mut pos = x;
                    for (i, s) in samplers.iter().enumerate() {
                        pos += s.sample(&mut rng);
                        positions[i].push(pos);
                    }
                }
            }
        }
        let mut sorted_starts = starts.clone();
        sorted_starts.sort_unstable();
        let sorted_positions = positions
            .iter()
            .map(|p| {
                let mut p = p.clone();
                p.sort_unstable();
                p
            })
            .collect();
        let band = cfg
            .time_grid
            .iter()
            .map(|&t| cfg.kernel.recommended_radius(cfg.n, t) as i64)
            .collect();
        Ok(Self {
            n: cfg.n,
            times: cfg.time_grid.clone(),
            shifts: cfg.shifts(),
            windows,
            band,
            ic,
            starts,
            positions,
            sorted_starts,
            sorted_positions,
        })
    }

    pub fn initial(&self) -> &InitialCondition {
        &self.ic
    }

    pub fn particle_count(&self) -> usize {
        self.starts.len()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// `Y_n` as the signed count of particles crossing the characteristic
    /// from base site `c`: right-to-left minus left-to-right.
    pub fn y_by_crossing(&self, c: i64, t_idx: usize) -> i64 {
        let level = c + self.shifts[t_idx];
        let mut y = 0i64;
        for (&x0, &xt) in self.starts.iter().zip(&self.positions[t_idx]) {
            if x0 > c && xt <= level {
                y += 1;
            } else if x0 <= c && xt > level {
                y -= 1;
            }
        }
        y
    }

    /// Net number of windowed particles crossing `level` rightward by time
    /// `n t_idx`.
    fn flux(&self, level: i64, t_idx: usize) -> i64 {
        let at_or_below = |v: &[i64]| v.partition_point(|&p| p <= level) as i64;
        at_or_below(&self.sorted_starts) - at_or_below(&self.sorted_positions[t_idx])
    }

    fn sigma_unchecked(&self, site: i64, t_idx: usize) -> Result<i64> {
        Ok(self.ic.sigma0(site)? - self.flux(site, t_idx))
    }

    /// `Y_n` as the height difference `sigma_{nt}(c + [nbt]) - sigma_0(c)`.
    pub fn y_by_heights(&self, c: i64, t_idx: usize) -> Result<i64> {
        let level = c + self.shifts[t_idx];
        Ok(self.sigma_unchecked(level, t_idx)? - self.ic.sigma0(c)?)
    }

    /// `sigma_{nt}([nx])` at grid time `t_idx`. Refuses levels whose
    /// crossing particles could come from outside the simulated windows.
    pub fn height_at(&self, x: f64, t_idx: usize) -> Result<i64> {
        let site = int_part(self.n as f64 * x);
        self.height_at_site(site, t_idx)
    }

    pub fn height_at_site(&self, site: i64, t_idx: usize) -> Result<i64> {
        let back = site - self.shifts[t_idx];
        let band = self.band[t_idx];
        let need = SiteRange::new(site.min(back) - band, site.max(back) + band);
        let covered = self
            .windows
            .iter()
            .any(|w| w.lo <= need.lo && need.hi <= w.hi);
        if self.times[t_idx] > 0.0 && !covered {
            return Err(Error::WindowEdge(format!(
                "site {site} at t = {} needs particles from [{}, {}]",
                self.times[t_idx], need.lo, need.hi
            )));
        }
        self.sigma_unchecked(site, t_idx)
    }

    /// Occupation counts of the simulated particles at grid time `t_idx`.
    pub fn occupation_field(&self, t_idx: usize) -> BTreeMap<i64, u64> {
        let mut field = BTreeMap::new();
        for &p in &self.positions[t_idx] {
            *field.entry(p).or_insert(0) += 1;
        }
        field
    }

    /// Occupation counts of the simulated particles at time 0.
    pub fn initial_field(&self) -> BTreeMap<i64, u64> {
        let mut field = BTreeMap::new();
        for &p in &self.starts {
            *field.entry(p).or_insert(0) += 1;
        }
        field
    }
}

/// One replicate's currents, `current[base][time]`, plus optional heights
/// `heights[point][time]` and the initial heights at the foot of each
/// characteristic, `feet[point][time] = sigma_0([n (x - b t)])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurrentPath {
    pub replicate: u64,
    pub n: u64,
    pub times: Vec<f64>,
    pub base_points: Vec<f64>,
    pub current: Vec<Vec<i64>>,
    #[serde(default)]
    pub height_points: Vec<f64>,
    #[serde(default)]
    pub heights: Vec<Vec<i64>>,
    #[serde(default)]
    pub feet: Vec<Vec<i64>>,
}

/// Number of grid cells where the two computations of `Y_n` disagree.
pub fn identity_violations(state: &ReplicateState, cfg: &SimConfig) -> Result<usize> {
    let mut bad = 0;
    for c in cfg.base_sites() {
        for i in 0..cfg.time_grid.len() {
            if state.y_by_crossing(c, i) != state.y_by_heights(c, i)? {
                bad += 1;
            }
        }
    }
    Ok(bad)
}

/// Simulate one replicate. Randomness is a pure function of
/// `(seed, replicate)`.
pub fn simulate_replicate(cfg: &SimConfig, seed: u64, replicate: u64) -> Result<CurrentPath> {
    let state = ReplicateState::generate(cfg, seed, replicate)?;
    path_from_state(cfg, &state, replicate)
}

pub fn path_from_state(
    cfg: &SimConfig,
    state: &ReplicateState,
    replicate: u64,
) -> Result<CurrentPath> {
    let k = cfg.time_grid.len();
    let current = cfg
        .base_sites()
        .into_iter()
        .map(|c| (0..k).map(|i| state.y_by_crossing(c, i)).collect())
        .collect();
    let mut heights = Vec::with_capacity(cfg.height_points.len());
    let mut feet = Vec::with_capacity(cfg.height_points.len());
    let n = cfg.n as f64;
    let b = cfg.kernel.drift();
    for &x in &cfg.height_points {
        let mut h = Vec::with_capacity(k);
        let mut f = Vec::with_capacity(k);
        for (i, &t) in cfg.time_grid.iter().enumerate() {
            h.push(state.height_at(x, i)?);
            f.push(state.initial().sigma0(int_part(n * (x - b * t)))?);
        }
        heights.push(h);
        feet.push(f);
    }
    Ok(CurrentPath {
        replicate,
        n: cfg.n,
        times: cfg.time_grid.clone(),
        base_points: cfg.base_points.clone(),
        current,
        height_points: cfg.height_points.clone(),
        heights,
        feet,
    })
}

/// Net current across `y` of Brownian particles started from a rate-`lambda`
/// Poisson field on `[y - w, y + w]`, left-to-right counted positive.
pub fn simulate_brownian_current<R: Rng + ?Sized>(
    lambda: f64,
    y: f64,
    time_grid: &[f64],
    window_halfwidth: f64,
    rng: &mut R,
) -> Result<Vec<i64>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidConfig(format!("lambda must be positive, got {lambda}")));
    }
    if time_grid.iter().any(|t| !(*t >= 0.0)) || time_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig(
            "time_grid must be nonnegative and strictly increasing".into(),
        ));
    }
    let t_max = time_grid.last().copied().unwrap_or(0.0);
    let need = brownian_halfwidth(t_max);
    if window_halfwidth < need {
        return Err(Error::InvalidConfig(format!(
            "window half-width {window_halfwidth} below {need}"
        )));
    }
    let count = Poisson::new(2.0 * window_halfwidth * lambda)
        .map_err(|e| Error::InvalidConfig(e.to_string()))?
        .sample(rng) as usize;
    let mut current = vec![0i64; time_grid.len()];
    let unit = Normal::new(0.0, 1.0).unwrap();
    for _ in 0..count {
        let x0 = y - window_halfwidth + 2.0 * window_halfwidth * rng.random::<f64>();
        let mut x = x0;
        let mut prev = 0.0;
        for (i, &t) in time_grid.iter().enumerate() {
            x += (t - prev).sqrt() * unit.sample(rng);
            prev = t;
            if x0 <= y && x > y {
                current[i] += 1;
            } else if x0 > y && x <= y {
                current[i] -= 1;
            }
        }
    }
    Ok(current)
}

/// Smallest accepted half-width: `8 sqrt(t_max) + 1`.
pub fn brownian_halfwidth(t_max: f64) -> f64 {
    8.0 * t_max.sqrt() + 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{HeightForm, VarianceForm};

    fn eq_config(n: u64, times: Vec<f64>) -> SimConfig {
        SimConfig::new(
            n,
            times,
            vec![0.0],
            JumpKernel::nearest_neighbor(0.7).unwrap(),
            Profile::flat(1.0, 1.0).unwrap(),
            InitialSpec::Random {
                law: OccupationLaw::Poisson,
            },
        )
    }

    #[test]
    fn int_part_guards_round_off() {
        assert_eq!(int_part(1600.0 * (0.7 - 0.3)), 640);
        assert_eq!(int_part(-0.5), -1);
        assert_eq!(int_part(-1.0), -1);
        assert_eq!(int_part(2.999), 2);
    }

    #[test]
    fn validation() {
        let mut c = eq_config(100, vec![0.0, 1.0]);
        assert!(c.validate().is_ok());
        c.time_grid = vec![1.0, 1.0];
        assert!(c.validate().is_err());
        let mut c = eq_config(100, vec![1.0]);
        c.window_radius = Some(5);
        assert!(c.validate().is_err());
        c.force_window = true;
        assert!(c.validate().is_ok());
        c.n = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn windows_merge_and_cover_shifts() {
        let mut c = eq_config(100, vec![1.0]);
        c.window_radius = Some(50);
        c.force_window = true;
        c.base_points = vec![0.0, 0.5, 10.0];
        let w = c.particle_windows();
        // shift [n b t] = 40
        assert_eq!(w, vec![SiteRange::new(-50, 140), SiteRange::new(950, 1090)]);
        assert_eq!(c.ic_range(), SiteRange::new(-50, 1090));
    }

    #[test]
    fn zero_particles_give_zero_current() {
        let mut c = eq_config(50, vec![0.0, 1.0, 2.0]);
        c.profile = Profile::flat(0.0, 1.0).unwrap();
        let p = simulate_replicate(&c, 1, 0).unwrap();
        assert_eq!(p.current, vec![vec![0, 0, 0]]);
    }

    #[test]
    fn identity_holds_and_y0_is_zero() {
        let mut c = eq_config(200, vec![0.0, 0.5, 1.0]);
        c.base_points = vec![-0.3, 0.0, 0.7];
        for r in 0..20 {
            let s = ReplicateState::generate(&c, 9, r).unwrap();
            assert_eq!(identity_violations(&s, &c).unwrap(), 0);
            for cb in c.base_sites() {
                assert_eq!(s.y_by_crossing(cb, 0), 0);
            }
        }
    }

    #[test]
    fn conservation_and_initial_field() {
        let c = eq_config(100, vec![0.0, 1.0]);
        let s = ReplicateState::generate(&c, 4, 2).unwrap();
        let total: u64 = s.occupation_field(1).values().sum();
        assert_eq!(total as usize, s.particle_count());
        assert_eq!(s.occupation_field(0), s.initial_field());
        let w = c.particle_windows()[0];
        for x in w.sites() {
            let want = s.initial().occupation(x).unwrap();
            assert_eq!(s.initial_field().get(&x).copied().unwrap_or(0), want);
        }
    }

    #[test]
    fn height_at_zero_time_is_sigma0() {
        let mut c = eq_config(100, vec![0.0, 1.0]);
        c.height_points = vec![0.25, -0.1];
        let s = ReplicateState::generate(&c, 5, 0).unwrap();
        assert_eq!(s.height_at(0.25, 0).unwrap(), s.initial().sigma0(25).unwrap());
        assert_eq!(s.height_at(-0.1, 0).unwrap(), s.initial().sigma0(-10).unwrap());
        assert!(s.height_at(0.25, 1).is_ok());
        assert!(matches!(s.height_at(40.0, 1), Err(Error::WindowEdge(_))));
    }

    #[test]
    fn single_particle_totally_asymmetric() {
        // one particle at site 0 jumping right at rate 1; b = 1 so the level
        // moves to [n t]; Y = -1 iff the jump count exceeds [n t]
        let profile = Profile::new(
            HeightForm::Smoothstep {
                base: 0.0,
                height: 1.0 / 1000.0,
                from: -0.0005,
                to: 0.0005,
            },
            VarianceForm::Zero,
        )
        .unwrap();
        let mut c = SimConfig::new(
            1000,
            vec![0.003, 0.006],
            vec![0.0],
            JumpKernel::nearest_neighbor(1.0).unwrap(),
            profile,
            InitialSpec::Deterministic,
        );
        c.window_radius = Some(20);
        c.force_window = true;
        let s = ReplicateState::generate(&c, 1, 0).unwrap();
        assert_eq!(s.particle_count(), 1);
        // oracle: P(Poisson(3) > 3)
        let p_cross = 1.0 - (-3.0f64).exp() * (1.0 + 3.0 + 4.5 + 4.5);
        let r = 20_000;
        let mut hits = 0;
        for rep in 0..r {
            let p = simulate_replicate(&c, 77, rep).unwrap();
            assert!(p.current[0].iter().all(|&y| y == 0 || y == -1));
            if p.current[0][0] == -1 {
                hits += 1;
            }
        }
        let f = hits as f64 / r as f64;
        let se = (p_cross * (1.0 - p_cross) / r as f64).sqrt();
        assert!((f - p_cross).abs() < 4.0 * se, "{f} vs {p_cross}");
    }

    #[test]
    fn replicate_is_pure_function_of_seed_and_index() {
        let c = eq_config(100, vec![0.5, 1.0]);
        let a = simulate_replicate(&c, 3, 7).unwrap();
        let b = simulate_replicate(&c, 3, 7).unwrap();
        assert_eq!(a, b);
        let d = simulate_replicate(&c, 3, 8).unwrap();
        assert_ne!(a.current, d.current);
    }

    #[test]
    fn adding_a_base_point_keeps_shared_particles() {
        let c = eq_config(100, vec![1.0]);
        let mut c2 = c.clone();
        c2.base_points.push(5.0);
        let a = simulate_replicate(&c, 3, 1).unwrap();
        let b = simulate_replicate(&c2, 3, 1).unwrap();
        assert_eq!(a.current[0], b.current[0]);
    }

    #[test]
    fn brownian_current_basics() {
        let mut rng = RngStream::new(5);
        let y = simulate_brownian_current(10.0, 0.0, &[0.0, 1.0], 9.0, &mut rng).unwrap();
        assert_eq!(y[0], 0);
        assert!(simulate_brownian_current(10.0, 0.0, &[4.0], 9.0, &mut rng).is_err());
        assert!(simulate_brownian_current(-1.0, 0.0, &[1.0], 9.0, &mut rng).is_err());
    }
}
