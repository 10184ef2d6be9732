//! Finitely supported jump kernels for continuous-time random walks on Z.
//!
//! A walk with kernel `p` jumps at rate 1 and each jump has law `p`, so the
//! displacement over a duration `t` is compound Poisson. Splitting the Poisson
//! clock by step value gives independent counts `N_x ~ Poisson(p(x) t)` and
//! `X(t) - X(0) = sum_x x N_x`, which is the sampler used here.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::golden_max;

const PROB_SUM_TOL: f64 = 1e-12;
const THETA_RANGE: f64 = 50.0;
const THETA_TOL: f64 = 1e-10;

/// One `{step, prob}` entry as written in config files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepProb {
    pub step: i64,
    pub prob: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<StepProb>", into = "Vec<StepProb>")]
pub struct JumpKernel {
    steps: Vec<i64>,
    probs: Vec<f64>,
}

impl TryFrom<Vec<StepProb>> for JumpKernel {
    type Error = Error;

    fn try_from(v: Vec<StepProb>) -> Result<Self> {
        JumpKernel::new(v.into_iter().map(|sp| (sp.step, sp.prob)))
    }
}

impl From<JumpKernel> for Vec<StepProb> {
    fn from(k: JumpKernel) -> Self {
        k.support().map(|(step, prob)| StepProb { step, prob }).collect()
    }
}

impl JumpKernel {
    pub fn new(pairs: impl IntoIterator<Item = (i64, f64)>) -> Result<Self> {
        let mut pairs: Vec<(i64, f64)> = pairs.into_iter().collect();
        if pairs.is_empty() {
            return Err(Error::InvalidKernel("empty support".into()));
        }
        pairs.sort_by_key(|&(s, _)| s);
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidKernel(format!("duplicate step {}", w[0].0)));
            }
        }
        for &(s, p) in &pairs {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::InvalidKernel(format!(
                    "probability {p} for step {s} not in (0, 1]"
                )));
            }
        }
        let total: f64 = pairs.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidKernel(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        if pairs.iter().all(|&(s, _)| s == 0) {
            return Err(Error::InvalidKernel("no nonzero step".into()));
        }
        let (steps, probs) = pairs.into_iter().unzip();
        Ok(Self { steps, probs })
    }

    /// Nearest-neighbour kernel `p(1) = p_right`, `p(-1) = 1 - p_right`.
    pub fn nearest_neighbor(p_right: f64) -> Result<Self> {
        if p_right >= 1.0 {
            Self::new([(1, 1.0)])
        } else if p_right <= 0.0 {
            Self::new([(-1, 1.0)])
        } else {
            Self::new([(-1, 1.0 - p_right), (1, p_right)])
        }
    }

    pub fn support(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.steps.iter().copied().zip(self.probs.iter().copied())
    }

    /// `b`, the mean jump.
    pub fn drift(&self) -> f64 {
        self.support().map(|(x, p)| x as f64 * p).sum()
    }

    /// `kappa_2`, the second moment of a jump. For the compound Poisson walk
    /// this is also the variance rate of `X(t)`.
    pub fn kappa2(&self) -> f64 {
        self.support().map(|(x, p)| (x * x) as f64 * p).sum()
    }

    pub fn moments(&self) -> (f64, f64) {
        (self.drift(), self.kappa2())
    }

    pub fn min_step(&self) -> i64 {
        self.steps[0]
    }

    pub fn max_step(&self) -> i64 {
        *self.steps.last().unwrap()
    }

    /// Mirror image `p(x) -> p(-x)`.
    pub fn reflected(&self) -> Self {
        Self::new(self.support().map(|(x, p)| (-x, p))).expect("reflection of a valid kernel")
    }

    /// `Lambda(theta) = sum_x p(x) (e^{theta x} - 1)`, the log-mgf of `X(1)`.
    pub fn log_mgf(&self, theta: f64) -> f64 {
        self.support()
            .map(|(x, p)| p * (theta * x as f64).exp_m1())
            .sum()
    }

    pub fn sampler(&self, duration: f64) -> DisplacementSampler {
        DisplacementSampler::new(self, duration)
    }

    /// One draw of `X(duration) - X(0)`.
    pub fn sample_displacement<R: Rng + ?Sized>(&self, duration: f64, rng: &mut R) -> i64 {
        self.sampler(duration).sample(rng)
    }

    pub fn rate_function(&self) -> RateFunction {
        RateFunction::new(self.clone())
    }

    /// Upper bound on the expected number of particles initially more than
    /// `window_w` sites from the base point that reach the characteristic by
    /// time `n * horizon`, from the Chernoff tail of the walk displacement.
    pub fn truncation_bias_bound(&self, n: u64, horizon: f64, window_w: u64) -> f64 {
        let nt = n as f64 * horizon;
        if nt <= 0.0 {
            return 0.0;
        }
        let rate = self.rate_function();
        let b = self.drift();
        let mut total = 0.0;
        let mut m = window_w.max(1) + 1;
        loop {
            let dz = m as f64 / nt;
            let lo = (-nt * rate.eval(b - dz)).exp();
            let hi = (-nt * rate.eval(b + dz)).exp();
            let term = lo + hi;
            total += term;
            if term < 1e-300 {
                break;
            }
            m += 1;
        }
        total
    }

    /// Default initial window radius for a run of length `n * t_max`:
    /// `ceil(6 sqrt(kappa_2 n T ln(n T + e))) + ceil(|b|)`.
    pub fn recommended_radius(&self, n: u64, t_max: f64) -> u64 {
        let nt = n as f64 * t_max;
        if nt <= 0.0 {
            return self.drift().abs().ceil() as u64;
        }
        let core = (6.0 * (self.kappa2() * nt * (nt + std::f64::consts::E).ln()).sqrt()).ceil();
        core as u64 + self.drift().abs().ceil() as u64
    }
}

/// Precomputed per-step Poisson laws for a fixed duration.
#[derive(Clone, Debug)]
pub struct DisplacementSampler {
    parts: Vec<(i64, Poisson<f64>)>,
}

impl DisplacementSampler {
    pub fn new(kernel: &JumpKernel, duration: f64) -> Self {
        assert!(duration >= 0.0, "negative duration {duration}");
        let parts = kernel
            .support()
            .filter(|&(x, p)| x != 0 && p * duration > 0.0)
            .map(|(x, p)| (x, Poisson::new(p * duration).expect("positive poisson mean")))
            .collect();
        Self { parts }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        self.parts
            .iter()
            .map(|(x, pois)| x * pois.sample(rng) as i64)
            .sum()
    }
}

/// Legendre transform of the walk's log-mgf, evaluated by golden-section
/// search over `theta` in `[-50, 50]`.
#[derive(Clone, Debug)]
pub struct RateFunction {
    kernel: JumpKernel,
    one_sided_up: bool,
    one_sided_down: bool,
}

impl RateFunction {
    pub fn new(kernel: JumpKernel) -> Self {
        let one_sided_up = kernel.min_step() >= 0;
        let one_sided_down = kernel.max_step() <= 0;
        Self {
            kernel,
            one_sided_up,
            one_sided_down,
        }
    }

    /// `I(z) = sup_theta { theta z - Lambda(theta) }`. Returns `+inf` where the
    /// walk cannot move (e.g. `z < 0` for a kernel with only positive steps).
    pub fn eval(&self, z: f64) -> f64 {
        if (self.one_sided_up && z < 0.0) || (self.one_sided_down && z > 0.0) {
            return f64::INFINITY;
        }
        let f = |theta: f64| theta * z - self.kernel.log_mgf(theta);
        let (_, v) = golden_max(f, -THETA_RANGE, THETA_RANGE, THETA_TOL);
        v.max(0.0)
    }

    pub fn kernel(&self) -> &JumpKernel {
        &self.kernel
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn asym() -> JumpKernel {
        JumpKernel::new([(1, 0.7), (-1, 0.3)]).unwrap()
    }

    #[test]
    fn moments_of_simple_kernels() {
        let (b, k2) = asym().moments();
        assert!((b - 0.4).abs() < 1e-15);
        assert!((k2 - 1.0).abs() < 1e-15);

        let (b, k2) = JumpKernel::new([(1, 1.0)]).unwrap().moments();
        assert_eq!((b, k2), (1.0, 1.0));

        let (b, k2) = JumpKernel::new([(2, 0.5), (-1, 0.5)]).unwrap().moments();
        assert!((b - 0.5).abs() < 1e-15);
        assert!((k2 - 2.5).abs() < 1e-15);
    }

    #[test]
    fn construction_errors() {
        assert!(JumpKernel::new(Vec::<(i64, f64)>::new()).is_err());
        assert!(JumpKernel::new([(1, 0.5), (1, 0.5)]).is_err());
        assert!(JumpKernel::new([(1, 0.5), (-1, 0.4)]).is_err());
        assert!(JumpKernel::new([(0, 1.0)]).is_err());
        assert!(JumpKernel::new([(1, 1.5), (-1, -0.5)]).is_err());
        // steps come back sorted
        let k = JumpKernel::new([(3, 0.25), (-2, 0.75)]).unwrap();
        assert_eq!(k.support().map(|(s, _)| s).collect::<Vec<_>>(), vec![-2, 3]);
    }

    #[test]
    fn kernel_config_roundtrip() {
        let k: JumpKernel =
            serde_json::from_str(r#"[{"step": 1, "prob": 0.7}, {"step": -1, "prob": 0.3}]"#)
                .unwrap();
        assert_eq!(k, asym());
        let bad: std::result::Result<JumpKernel, _> =
            serde_json::from_str(r#"[{"step": 1, "prob": 0.7}]"#);
        assert!(bad.is_err());
    }

    #[test]
    fn zero_duration_is_zero() {
        let mut rng = RngStream::new(1);
        for _ in 0..100 {
            assert_eq!(asym().sample_displacement(0.0, &mut rng), 0);
        }
    }

    #[test]
    fn displacement_mean_asymmetric() {
        // mean b t = 640, variance kappa_2 t = 1600
        let k = asym();
        let s = k.sampler(1600.0);
        let mut rng = RngStream::new(2);
        let r = 10_000;
        let mean = (0..r).map(|_| s.sample(&mut rng) as f64).sum::<f64>() / r as f64;
        assert!((mean - 640.0).abs() < 3.0 * (1600.0 / r as f64).sqrt());
    }

    #[test]
    fn displacement_moments_match_compound_poisson() {
        for (kernel, t) in [
            (JumpKernel::nearest_neighbor(0.5).unwrap(), 7.0),
            (JumpKernel::new([(2, 0.5), (-1, 0.5)]).unwrap(), 3.5),
            (asym(), 40.0),
        ] {
            let (b, k2) = kernel.moments();
            let s = kernel.sampler(t);
            let mut rng = RngStream::new(99);
            let r = 100_000usize;
            let xs: Vec<f64> = (0..r).map(|_| s.sample(&mut rng) as f64).collect();
            let mean = xs.iter().sum::<f64>() / r as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r - 1) as f64;
            let se = (k2 * t / r as f64).sqrt();
            assert!((mean - b * t).abs() < 4.0 * se, "mean {mean} vs {}", b * t);
            assert!((var / (k2 * t) - 1.0).abs() < 0.05, "var {var} vs {}", k2 * t);
        }
    }

    #[test]
    fn rate_function_values() {
        let k = asym();
        let i = k.rate_function();
        assert!(i.eval(0.4).abs() < 1e-12);
        let sym = JumpKernel::nearest_neighbor(0.5).unwrap().rate_function();
        assert!(sym.eval(0.0).abs() < 1e-12);

        // totally asymmetric: Poisson rate function z ln z - z + 1
        let pois = JumpKernel::new([(1, 1.0)]).unwrap().rate_function();
        let exact = 2.0 * 2f64.ln() - 1.0;
        assert!((pois.eval(2.0) - exact).abs() < 1e-9);
        for z in [0.1, 0.5, 1.5, 3.0, 7.0] {
            let exact = z * f64::ln(z) - z + 1.0;
            assert!((pois.eval(z) - exact).abs() < 1e-8, "z={z}");
        }
        assert!(pois.eval(-0.5).is_infinite());
        let down = JumpKernel::new([(-2, 1.0)]).unwrap().rate_function();
        assert!(down.eval(0.1).is_infinite());
    }

    #[test]
    fn rate_function_convex_and_quadratic_near_drift() {
        let k = JumpKernel::new([(2, 0.3), (-1, 0.6), (0, 0.1)]).unwrap();
        let b = k.drift();
        let i = k.rate_function();
        let zs: Vec<f64> = (0..121).map(|j| b - 3.0 + 0.05 * j as f64).collect();
        let vals: Vec<f64> = zs.iter().map(|&z| i.eval(z)).collect();
        for v in &vals {
            assert!(*v >= 0.0);
        }
        for w in vals.windows(3) {
            assert!(w[1] <= 0.5 * (w[0] + w[2]) + 1e-8);
        }
        let ratios: Vec<f64> = [0.01, 0.005, 0.0025]
            .iter()
            .map(|&z| i.eval(b + z) / (z * z))
            .collect();
        let (lo, hi) = ratios
            .iter()
            .fold((f64::MAX, f64::MIN), |(a, c), &r| (a.min(r), c.max(r)));
        assert!(lo > 0.0 && hi / lo < 1.2, "{ratios:?}");
        // curvature 1 / (2 kappa_2)
        assert!((ratios[2] - 0.5 / k.kappa2()).abs() / (0.5 / k.kappa2()) < 0.05);
    }

    #[test]
    fn chernoff_bound_holds_empirically() {
        let k = asym();
        let b = k.drift();
        let i = k.rate_function();
        let r = 100_000usize;
        for s in [4.0, 16.0] {
            let sampler = k.sampler(s);
            let mut rng = RngStream::derive(5, &[s as u64]);
            let xs: Vec<i64> = (0..r).map(|_| sampler.sample(&mut rng)).collect();
            for u in [0.25, 0.5, 1.0] {
                let thr = s * b - s * u;
                let freq = xs.iter().filter(|&&x| (x as f64) <= thr).count() as f64 / r as f64;
                let bound = (-s * i.eval(b - u)).exp();
                let se = (bound * (1.0 - bound).max(0.0) / r as f64).sqrt();
                assert!(freq <= 1.1 * bound + 5.0 * se, "s={s} u={u} {freq} > {bound}");
            }
        }
    }

    #[test]
    fn truncation_bound_behaviour() {
        let k = asym();
        assert_eq!(k.truncation_bias_bound(0, 1.0, 10), 0.0);
        let mut prev = f64::INFINITY;
        for w in [10, 40, 80, 160, 320] {
            let v = k.truncation_bias_bound(100, 1.0, w);
            assert!(v <= prev);
            prev = v;
        }
        assert!(prev < 1e-30);

        for kernel in [asym(), JumpKernel::new([(2, 0.5), (-1, 0.5)]).unwrap()] {
            let n = 1600u64;
            let nt = n as f64;
            let w = 6 * ((kernel.kappa2() * nt * (nt + 2.0).ln()).sqrt().ceil() as u64);
            assert!(kernel.truncation_bias_bound(n, 1.0, w) < 1e-6);
        }
    }

    #[test]
    fn reflection_negates_drift() {
        let k = JumpKernel::new([(2, 0.3), (-1, 0.7)]).unwrap();
        let r = k.reflected();
        assert!((r.drift() + k.drift()).abs() < 1e-15);
        assert_eq!(r.kappa2(), k.kappa2());
    }
}
