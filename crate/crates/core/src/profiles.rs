//! Macroscopic profiles `(u0, rho0, v0)` and generators for microscopic
//! initial occupations.
//!
//! Every profile is normalized so that `u0(0) = 0`, and `rho0 = u0'` holds by
//! construction because each form carries its closed-form antiderivative.

use std::io::Write;

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{mix, RngStream};

/// Inclusive site interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteRange {
    pub lo: i64,
    pub hi: i64,
}

impl SiteRange {
    pub fn new(lo: i64, hi: i64) -> Self {
        assert!(lo <= hi + 1, "empty range [{lo}, {hi}] is malformed");
        Self { lo, hi }
    }

    pub fn centered(center: i64, radius: i64) -> Self {
        Self::new(center - radius, center + radius)
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1).max(0) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, x: i64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn hull(&self, other: &SiteRange) -> SiteRange {
        SiteRange::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }
}

fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * (3.0 - 2.0 * s)
}

fn smoothstep_slope(s: f64) -> f64 {
    if (0.0..=1.0).contains(&s) {
        6.0 * s * (1.0 - s)
    } else {
        0.0
    }
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Shape of the macroscopic height `u0`. All forms are nondecreasing and C^1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum HeightForm {
    /// `u0 = 0`, no particles.
    Constant,
    /// `u0(y) = rho y`.
    Linear { rho: f64 },
    /// `u0(y) = base y + height S((y - from) / (to - from))` with the cubic
    /// smoothstep `S(s) = 3 s^2 - 2 s^3` on `[0, 1]`.
    Smoothstep {
        base: f64,
        height: f64,
        from: f64,
        to: f64,
    },
    /// Density `base + amplitude exp(-(y - center)^2 / (2 width^2))`.
    GaussianBump {
        base: f64,
        amplitude: f64,
        center: f64,
        width: f64,
    },
}

impl HeightForm {
    fn raw_u0(&self, y: f64) -> f64 {
        match *self {
            HeightForm::Constant => 0.0,
            HeightForm::Linear { rho } => rho * y,
            HeightForm::Smoothstep {
                base,
                height,
                from,
                to,
            } => base * y + height * smoothstep((y - from) / (to - from)),
            HeightForm::GaussianBump {
                base,
                amplitude,
                center,
                width,
            } => {
                let mass = amplitude * width * (2.0 * std::f64::consts::PI).sqrt();
                base * y + mass * std_normal_cdf((y - center) / width)
            }
        }
    }

    pub fn rho0(&self, y: f64) -> f64 {
        match *self {
            HeightForm::Constant => 0.0,
            HeightForm::Linear { rho } => rho,
            HeightForm::Smoothstep {
                base,
                height,
                from,
                to,
            } => base + height * smoothstep_slope((y - from) / (to - from)) / (to - from),
            HeightForm::GaussianBump {
                base,
                amplitude,
                center,
                width,
            } => base + amplitude * (-(y - center).powi(2) / (2.0 * width * width)).exp(),
        }
    }

    /// `sup rho0`, a Lipschitz constant for `u0`.
    pub fn max_density(&self) -> f64 {
        match *self {
            HeightForm::Constant => 0.0,
            HeightForm::Linear { rho } => rho,
            HeightForm::Smoothstep {
                base,
                height,
                from,
                to,
            } => base + 1.5 * height / (to - from),
            HeightForm::GaussianBump {
                base, amplitude, ..
            } => base + amplitude,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidProfile(msg.to_string()));
        match *self {
            HeightForm::Constant => Ok(()),
            HeightForm::Linear { rho } if !(rho >= 0.0 && rho.is_finite()) => {
                bad("linear density must be finite and >= 0")
            }
            HeightForm::Smoothstep {
                base,
                height,
                from,
                to,
            } if !(base >= 0.0 && height >= 0.0 && to > from) => {
                bad("smoothstep needs base >= 0, height >= 0, to > from")
            }
            HeightForm::GaussianBump {
                base,
                amplitude,
                width,
                ..
            } if !(base >= 0.0 && amplitude >= 0.0 && width > 0.0) => {
                bad("gaussian bump needs base >= 0, amplitude >= 0, width > 0")
            }
            _ => Ok(()),
        }
    }
}

/// Variance profile `v0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VarianceForm {
    /// `v0 = rho0`, the Poisson equilibrium relation.
    EqualToDensity,
    /// `v0 = factor * rho0`.
    Scaled { factor: f64 },
    /// `v0 = 0`.
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub height: HeightForm,
    #[serde(default = "default_variance")]
    pub variance: VarianceForm,
}

fn default_variance() -> VarianceForm {
    VarianceForm::EqualToDensity
}

impl Profile {
    pub fn new(height: HeightForm, variance: VarianceForm) -> Result<Self> {
        height.validate()?;
        if let VarianceForm::Scaled { factor } = variance {
            if !(factor >= 0.0 && factor.is_finite()) {
                return Err(Error::InvalidProfile("variance factor must be >= 0".into()));
            }
        }
        Ok(Self { height, variance })
    }

    /// Flat density `rho` with `v0 = factor * rho`.
    pub fn flat(rho: f64, variance_factor: f64) -> Result<Self> {
        Self::new(
            HeightForm::Linear { rho },
            VarianceForm::Scaled {
                factor: variance_factor,
            },
        )
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.height.clone(), self.variance.clone()).map(|_| ())
    }

    pub fn u0(&self, y: f64) -> f64 {
        self.height.raw_u0(y) - self.height.raw_u0(0.0)
    }

    pub fn rho0(&self, y: f64) -> f64 {
        self.height.rho0(y)
    }

    pub fn v0(&self, y: f64) -> f64 {
        match self.variance {
            VarianceForm::EqualToDensity => self.rho0(y),
            VarianceForm::Scaled { factor } => factor * self.rho0(y),
            VarianceForm::Zero => 0.0,
        }
    }

    pub fn max_density(&self) -> f64 {
        self.height.max_density()
    }

    /// `sup u0 - inf u0`, infinite when `u0` is unbounded.
    pub fn u0_range(&self) -> f64 {
        match self.height {
            HeightForm::Constant => 0.0,
            HeightForm::Linear { rho } if rho == 0.0 => 0.0,
            HeightForm::Smoothstep { base, height, .. } if base == 0.0 => height,
            HeightForm::GaussianBump {
                base,
                amplitude,
                width,
                ..
            } if base == 0.0 => amplitude * width * (2.0 * std::f64::consts::PI).sqrt(),
            _ => f64::INFINITY,
        }
    }

    /// `n u0(m / n)`, computed without the division for linear forms so that
    /// integer staircases come out exact.
    pub fn scaled_u0(&self, n: u64, m: i64) -> f64 {
        match self.height {
            HeightForm::Constant => 0.0,
            HeightForm::Linear { rho } => rho * m as f64,
            _ => n as f64 * self.u0(m as f64 / n as f64),
        }
    }
}

/// Family of nonnegative integer laws used to realize a target per-site
/// `(mean, variance)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OccupationLaw {
    /// Requires variance = mean.
    Poisson,
    /// Equal-weight mixture of `Poisson(m + d)` and `Poisson(m - d)`,
    /// `d = sqrt(v - m)`. Requires `m <= v <= m + m^2`.
    PoissonMixture,
    /// `Binomial(N, m / N)` with `N = ceil(m / (1 - v / m))`. Requires `v <= m`
    /// and a variance error of at most 1% after rounding `N`.
    BinomialThinned,
    /// Constant count. Requires variance 0 and integer mean.
    Deterministic,
}

const LAW_TOL: f64 = 1e-9;
const BINOMIAL_VAR_TOL: f64 = 0.01;

impl OccupationLaw {
    pub fn name(&self) -> &'static str {
        match self {
            OccupationLaw::Poisson => "poisson",
            OccupationLaw::PoissonMixture => "poisson_mixture",
            OccupationLaw::BinomialThinned => "binomial_thinned",
            OccupationLaw::Deterministic => "deterministic",
        }
    }

    /// Variance actually produced for a target, which differs from the target
    /// only through the integer rounding of the binomial trial count.
    pub fn achieved_variance(&self, mean: f64, variance: f64) -> Result<f64> {
        self.realize(mean, variance)?;
        Ok(match self {
            OccupationLaw::BinomialThinned if mean > 0.0 => {
                let q = (1.0 - variance / mean).clamp(0.0, 1.0);
                let trials = (mean / q - LAW_TOL).ceil().max(1.0);
                mean * (1.0 - mean / trials)
            }
            _ => variance,
        })
    }

    /// Resolve the law's parameters for one `(mean, variance)` target.
    pub fn realize(&self, mean: f64, variance: f64) -> Result<SiteLaw> {
        let fail = || Error::Unrealizable {
            family: self.name(),
            mean,
            variance,
        };
        if !(mean >= 0.0 && variance >= 0.0 && mean.is_finite() && variance.is_finite()) {
            return Err(fail());
        }
        let tol = LAW_TOL * mean.max(1.0);
        match self {
            OccupationLaw::Poisson => {
                if (variance - mean).abs() > tol {
                    return Err(fail());
                }
                Ok(SiteLaw::poisson(mean))
            }
            OccupationLaw::PoissonMixture => {
                let excess = variance - mean;
                if excess < -tol || excess > mean * mean + tol {
                    return Err(fail());
                }
                let d = excess.max(0.0).sqrt();
                let lo = (mean - d).max(0.0);
                Ok(SiteLaw::Mixture {
                    high: poisson_or_zero(mean + d),
                    low: poisson_or_zero(lo),
                })
            }
            OccupationLaw::BinomialThinned => {
                if variance > mean + tol {
                    return Err(fail());
                }
                if mean == 0.0 {
                    return Ok(SiteLaw::Fixed(0));
                }
                let q = (1.0 - variance / mean).clamp(0.0, 1.0);
                if q <= 0.0 {
                    return Err(fail());
                }
                let trials = (mean / q - LAW_TOL).ceil().max(1.0);
                let q_adj = mean / trials;
                let achieved = mean * (1.0 - q_adj);
                let err = (achieved - variance).abs();
                if err > BINOMIAL_VAR_TOL * variance && err > 1e-12 {
                    return Err(fail());
                }
                let trials = trials as u64;
                if q_adj >= 1.0 {
                    return Ok(SiteLaw::Fixed(trials));
                }
                Ok(SiteLaw::Binomial(
                    Binomial::new(trials, q_adj).map_err(|_| fail())?,
                ))
            }
            OccupationLaw::Deterministic => {
                let k = mean.round();
                if variance > LAW_TOL || (mean - k).abs() > tol {
                    return Err(fail());
                }
                Ok(SiteLaw::Fixed(k as u64))
            }
        }
    }
}

fn poisson_or_zero(mean: f64) -> Option<Poisson<f64>> {
    (mean > 0.0).then(|| Poisson::new(mean).expect("positive mean"))
}

/// A resolved per-site law.
#[derive(Clone, Debug)]
pub enum SiteLaw {
    Fixed(u64),
    Poisson(Option<Poisson<f64>>),
    Mixture {
        high: Option<Poisson<f64>>,
        low: Option<Poisson<f64>>,
    },
    Binomial(Binomial),
}

impl SiteLaw {
    fn poisson(mean: f64) -> Self {
        SiteLaw::Poisson(poisson_or_zero(mean))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let pois = |p: &Option<Poisson<f64>>, rng: &mut R| {
            p.as_ref().map_or(0, |d| d.sample(rng) as u64)
        };
        match self {
            SiteLaw::Fixed(k) => *k,
            SiteLaw::Poisson(p) => pois(p, rng),
            SiteLaw::Mixture { high, low } => {
                if rng.random::<bool>() {
                    pois(high, rng)
                } else {
                    pois(low, rng)
                }
            }
            SiteLaw::Binomial(b) => b.sample(rng),
        }
    }
}

/// Initial occupations on a contiguous window, with prefix sums for `sigma0`.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialCondition {
    window: SiteRange,
    occupations: Vec<u64>,
    prefix: Vec<i64>,
}

impl InitialCondition {
    pub fn from_occupations(window: SiteRange, occupations: Vec<u64>) -> Self {
        assert_eq!(window.len(), occupations.len());
        let mut prefix = Vec::with_capacity(occupations.len() + 1);
        prefix.push(0i64);
        let mut acc = 0i64;
        for &c in &occupations {
            acc += c as i64;
            prefix.push(acc);
        }
        Self {
            window,
            occupations,
            prefix,
        }
    }

    pub fn window(&self) -> SiteRange {
        self.window
    }

    pub fn occupation(&self, x: i64) -> Result<u64> {
        if !self.window.contains(x) {
            return Err(self.out_of_window(x));
        }
        Ok(self.occupations[(x - self.window.lo) as usize])
    }

    pub fn occupations(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.window.sites().zip(self.occupations.iter().copied())
    }

    pub fn total(&self) -> u64 {
        *self.prefix.last().unwrap() as u64
    }

    /// Number of particles on sites `a..=b` (empty sum when `b < a`).
    pub fn count_between(&self, a: i64, b: i64) -> Result<i64> {
        if b < a {
            return Ok(0);
        }
        if !self.window.contains(a) {
            return Err(self.out_of_window(a));
        }
        if !self.window.contains(b) {
            return Err(self.out_of_window(b));
        }
        let lo = self.window.lo;
        Ok(self.prefix[(b - lo + 1) as usize] - self.prefix[(a - lo) as usize])
    }

    /// `sigma0(x)`: the sum of occupations over `1..=x` for `x >= 0`, and minus
    /// the sum over `x+1..=0` for `x < 0`, so that `sigma0(0) = 0`.
    pub fn sigma0(&self, x: i64) -> Result<i64> {
        if x >= 0 {
            self.count_between(1, x)
        } else {
            Ok(-self.count_between(x + 1, 0)?)
        }
    }

    fn out_of_window(&self, x: i64) -> Error {
        Error::OutOfWindow {
            site: x,
            lo: self.window.lo,
            hi: self.window.hi,
        }
    }

    /// Debug dump as `site,count` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "site,count")?;
        for (x, c) in self.occupations() {
            writeln!(w, "{x},{c}")?;
        }
        Ok(())
    }
}

/// Independent random occupations with `E eta(x) = rho0(x/n)` and
/// `Var eta(x) = v0(x/n)`. Each site draws from its own substream, so the
/// value at a site does not depend on the window it was generated in.
pub fn gen_random_ic(
    profile: &Profile,
    n: u64,
    window: SiteRange,
    law: OccupationLaw,
    rng: &RngStream,
) -> Result<InitialCondition> {
    let mut occ = Vec::with_capacity(window.len());
    for x in window.sites() {
        let y = x as f64 / n as f64;
        let site_law = law.realize(profile.rho0(y), profile.v0(y))?;
        let mut site_rng = rng.substream(mix(0x5175, &[x as u64]));
        occ.push(site_law.sample(&mut site_rng));
    }
    Ok(InitialCondition::from_occupations(window, occ))
}

/// Deterministic staircase `eta(m) = [n u0(m/n)] - [n u0((m-1)/n)]`.
pub fn gen_deterministic_ic(profile: &Profile, n: u64, window: SiteRange) -> InitialCondition {
    let occ = window
        .sites()
        .map(|m| {
            let hi = profile.scaled_u0(n, m).floor();
            let lo = profile.scaled_u0(n, m - 1).floor();
            (hi - lo).max(0.0) as u64
        })
        .collect();
    InitialCondition::from_occupations(window, occ)
}

/// Check the profile's pointwise invariants on a grid: `rho0, v0 >= 0`,
/// `u0` nondecreasing and `u0(y + h) - u0(y) ~ rho0(y) h`.
pub fn check_profile_on_grid(profile: &Profile, ys: &[f64]) -> Result<()> {
    let h = 1e-6;
    for (i, &y) in ys.iter().enumerate() {
        if profile.rho0(y) < 0.0 || profile.v0(y) < 0.0 {
            return Err(Error::InvalidProfile(format!("negative density at {y}")));
        }
        if i > 0 && profile.u0(y) < profile.u0(ys[i - 1]) {
            return Err(Error::InvalidProfile(format!("u0 decreases before {y}")));
        }
        let fd = (profile.u0(y + h) - profile.u0(y)) / h;
        let scale = profile.max_density().max(1.0);
        if (fd - profile.rho0(y)).abs() > 1e-3 * scale {
            return Err(Error::InvalidProfile(format!(
                "rho0({y}) = {} but u0 difference quotient is {fd}",
                profile.rho0(y)
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(xs: &[u64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().map(|&x| x as f64).sum::<f64>() / n;
        let v = xs.iter().map(|&x| (x as f64 - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    fn draw(law: OccupationLaw, mean: f64, var: f64, count: usize, seed: u64) -> Vec<u64> {
        let sl = law.realize(mean, var).unwrap();
        let mut rng = RngStream::new(seed);
        (0..count).map(|_| sl.sample(&mut rng)).collect()
    }

    #[test]
    fn poisson_family_moments() {
        let xs = draw(OccupationLaw::Poisson, 1.0, 1.0, 100_000, 3);
        let (m, v) = moments(&xs);
        let n = xs.len() as f64;
        assert!((m - 1.0).abs() < 3.0 * (1.0 / n).sqrt());
        // Var of sample variance for Poisson(1): (mu4 - sigma^4) / n with mu4 = 4
        assert!((v - 1.0).abs() < 3.0 * (3.0 / n).sqrt());
    }

    #[test]
    fn mixture_family_moments() {
        let xs = draw(OccupationLaw::PoissonMixture, 1.0, 2.0, 100_000, 4);
        let (m, v) = moments(&xs);
        let n = xs.len() as f64;
        // mixture of Poisson(2) and the zero law: E X^4 = (2 + 7*4 + 6*8 + 16) / 2 = 47
        let mu4_central = {
            let raw = [1.0, 3.0, 11.0, 47.0];
            raw[3] - 4.0 * raw[2] * 1.0 + 6.0 * raw[1] * 1.0 - 3.0
        };
        assert!((m - 1.0).abs() < 3.0 * (2.0 / n).sqrt());
        assert!((v - 2.0).abs() < 3.0 * ((mu4_central - 4.0) / n).sqrt());
    }

    #[test]
    fn binomial_family_moments() {
        let xs = draw(OccupationLaw::BinomialThinned, 1.0, 0.5, 100_000, 5);
        let (m, v) = moments(&xs);
        assert!((m - 1.0).abs() < 0.01);
        assert!((v - 0.5).abs() < 0.01);
    }

    #[test]
    fn achieved_variance_follows_rounding() {
        let b = OccupationLaw::BinomialThinned;
        assert_eq!(b.achieved_variance(1.0, 0.5).unwrap(), 0.5);
        // 1 / (1 - 0.997) rounds up to 334 trials
        let v = b.achieved_variance(1.0, 0.997).unwrap();
        assert!((v - (1.0 - 1.0 / 334.0)).abs() < 1e-15);
        assert_eq!(OccupationLaw::Poisson.achieved_variance(1.3, 1.3).unwrap(), 1.3);
        assert!(OccupationLaw::Poisson.achieved_variance(1.0, 2.0).is_err());
    }

    #[test]
    fn law_rejections() {
        assert!(OccupationLaw::Poisson.realize(1.0, 2.0).is_err());
        assert!(OccupationLaw::PoissonMixture.realize(1.0, 0.5).is_err());
        assert!(OccupationLaw::PoissonMixture.realize(1.0, 2.5).is_err());
        assert!(OccupationLaw::BinomialThinned.realize(1.0, 1.5).is_err());
        assert!(OccupationLaw::Deterministic.realize(1.5, 0.0).is_err());
        assert!(OccupationLaw::Deterministic.realize(1.0, 0.1).is_err());
        assert!(OccupationLaw::Deterministic.realize(2.0, 0.0).is_ok());
        // rounding N up would miss the variance by more than 1%
        assert!(OccupationLaw::BinomialThinned.realize(1.0, 0.3).is_err());
        assert!(OccupationLaw::BinomialThinned.realize(3.0, 0.0).is_ok());
    }

    #[test]
    fn zero_density_gives_empty_ic() {
        let p = Profile::new(HeightForm::Constant, VarianceForm::EqualToDensity).unwrap();
        let ic = gen_random_ic(
            &p,
            100,
            SiteRange::new(-50, 50),
            OccupationLaw::Poisson,
            &RngStream::new(1),
        )
        .unwrap();
        assert_eq!(ic.total(), 0);
        assert_eq!(gen_deterministic_ic(&p, 100, SiteRange::new(-5, 5)).total(), 0);
    }

    #[test]
    fn deterministic_staircases() {
        let p = Profile::flat(1.0, 0.0).unwrap();
        let ic = gen_deterministic_ic(&p, 10, SiteRange::new(-20, 20));
        assert!(ic.occupations().all(|(_, c)| c == 1));

        let p = Profile::flat(0.5, 0.0).unwrap();
        let ic = gen_deterministic_ic(&p, 10, SiteRange::new(1, 4));
        let occ: Vec<u64> = ic.occupations().map(|(_, c)| c).collect();
        let oracle: Vec<u64> = (1..=4i64).map(|m| (m / 2 - (m - 1) / 2) as u64).collect();
        assert_eq!(occ, vec![0, 1, 0, 1]);
        assert_eq!(occ, oracle);
    }

    #[test]
    fn deterministic_partial_sums_telescope() {
        let p = Profile::new(
            HeightForm::Smoothstep {
                base: 0.3,
                height: 2.0,
                from: -0.5,
                to: 0.7,
            },
            VarianceForm::Zero,
        )
        .unwrap();
        let n = 137;
        let ic = gen_deterministic_ic(&p, n, SiteRange::new(-200, 200));
        for x in [1i64, 7, 50, 199] {
            let expect = p.scaled_u0(n, x).floor() - p.scaled_u0(n, 0).floor();
            assert_eq!(ic.sigma0(x).unwrap(), expect as i64);
        }
        // window decomposition
        let left = gen_deterministic_ic(&p, n, SiteRange::new(-200, 0));
        let right = gen_deterministic_ic(&p, n, SiteRange::new(1, 200));
        let joined: Vec<u64> = left
            .occupations()
            .chain(right.occupations())
            .map(|(_, c)| c)
            .collect();
        let whole: Vec<u64> = ic.occupations().map(|(_, c)| c).collect();
        assert_eq!(joined, whole);
    }

    #[test]
    fn sigma0_examples() {
        let ic = InitialCondition::from_occupations(SiteRange::new(-1, 3), vec![1, 1, 1, 0, 2]);
        assert_eq!(ic.sigma0(0).unwrap(), 0);
        assert_eq!(ic.sigma0(3).unwrap(), 3);
        assert_eq!(ic.sigma0(-2).unwrap(), -2);
        assert!(ic.sigma0(5).is_err());
        assert!(ic.sigma0(-3).is_err());
        for x in 0..=3 {
            assert_eq!(
                ic.sigma0(x).unwrap() - ic.sigma0(x - 1).unwrap(),
                ic.occupation(x).unwrap() as i64
            );
        }
    }

    #[test]
    fn random_ic_is_window_independent() {
        let p = Profile::flat(1.5, 1.0).unwrap();
        let rng = RngStream::new(77);
        let a = gen_random_ic(&p, 100, SiteRange::new(-30, 30), OccupationLaw::Poisson, &rng)
            .unwrap();
        let b = gen_random_ic(&p, 100, SiteRange::new(-10, 10), OccupationLaw::Poisson, &rng)
            .unwrap();
        for (x, c) in b.occupations() {
            assert_eq!(a.occupation(x).unwrap(), c);
        }
    }

    #[test]
    fn regional_moments_follow_profile() {
        let p = Profile::new(
            HeightForm::GaussianBump {
                base: 0.5,
                amplitude: 1.5,
                center: 0.0,
                width: 0.4,
            },
            VarianceForm::EqualToDensity,
        )
        .unwrap();
        let n = 20_000u64;
        // regions of width 0.1 sampled at many replicated windows
        for center in [-0.45f64, 0.05, 0.55] {
            let c = (center * n as f64) as i64;
            let window = SiteRange::centered(c, 25);
            let mut xs = Vec::new();
            for r in 0..400u64 {
                let ic = gen_random_ic(&p, n, window, OccupationLaw::Poisson, &RngStream::new(r))
                    .unwrap();
                xs.extend(ic.occupations().map(|(_, k)| k));
            }
            let (m, v) = moments(&xs);
            let target = p.rho0(center);
            let se = (target / xs.len() as f64).sqrt();
            assert!((m - target).abs() < 4.0 * se + 2e-3, "{center}: {m} vs {target}");
            assert!((v / target - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn profiles_are_consistent() {
        let forms = [
            HeightForm::Constant,
            HeightForm::Linear { rho: 2.0 },
            HeightForm::Smoothstep {
                base: 0.5,
                height: 1.0,
                from: -1.0,
                to: 1.0,
            },
            HeightForm::GaussianBump {
                base: 0.2,
                amplitude: 1.0,
                center: 0.3,
                width: 0.5,
            },
        ];
        let ys: Vec<f64> = (0..400).map(|i| -2.0 + 0.01 * i as f64).collect();
        for f in forms {
            let p = Profile::new(f, VarianceForm::Scaled { factor: 2.0 }).unwrap();
            check_profile_on_grid(&p, &ys).unwrap();
            assert_eq!(p.u0(0.0), 0.0);
            for &y in &ys {
                assert!(p.rho0(y) <= p.max_density() + 1e-12);
            }
        }
        assert!(Profile::flat(-1.0, 1.0).is_err());
    }

    #[test]
    fn csv_dump() {
        let ic = InitialCondition::from_occupations(SiteRange::new(0, 1), vec![3, 0]);
        let mut out = Vec::new();
        ic.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "site,count\n0,3\n1,0\n");
    }
}
