//! Closed-form limit objects for the current across a characteristic:
//! covariance kernels, their Gaussian-integral building blocks, the transport
//! solution and an exact sampler for the limiting Gaussian processes.

pub mod gaussian;
mod integrals;
mod sampler;

pub use integrals::{
    cross_integrals, cross_integrals_by_quadrature, sigma_squares, CrossIntegrals, SigmaSquares,
};
pub use sampler::{sample_limit_process, GaussianSampler};

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::profiles::Profile;

/// Limit covariance `K(s, t)` of the normalized current.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum CovKernel {
    /// Independent initial occupations with local mean `rho` and variance `v`.
    General { rho: f64, v: f64, kappa2: f64 },
    /// Poisson equilibrium: fractional Brownian motion with H = 1/4.
    Equilibrium { rho: f64, kappa2: f64 },
    /// Deterministic initial occupations (`v = 0`).
    DeterministicIc { rho: f64, kappa2: f64 },
    /// Un-normalized current of Brownian particles from a rate-`lambda`
    /// Poisson field.
    Brownian { lambda: f64 },
}

impl CovKernel {
    pub fn cov(&self, s: f64, t: f64) -> f64 {
        assert!(s >= 0.0 && t >= 0.0, "negative time ({s}, {t})");
        let gap = (s - t).abs().sqrt();
        match *self {
            CovKernel::General { rho, v, kappa2 } => {
                (kappa2 / (2.0 * PI)).sqrt()
                    * (rho * ((s + t).sqrt() - gap) + v * (s.sqrt() + t.sqrt() - (s + t).sqrt()))
            }
            CovKernel::Equilibrium { rho, kappa2 } => {
                rho * (kappa2 / (2.0 * PI)).sqrt() * (s.sqrt() + t.sqrt() - gap)
            }
            CovKernel::DeterministicIc { rho, kappa2 } => {
                rho * (kappa2 / (2.0 * PI)).sqrt() * ((s + t).sqrt() - gap)
            }
            CovKernel::Brownian { lambda } => {
                lambda / (2.0 * PI).sqrt() * (s.sqrt() + t.sqrt() - gap)
            }
        }
    }

    /// `E[(Z(t + h) - Z(t))^2]`.
    pub fn increment_variance(&self, t: f64, h: f64) -> f64 {
        self.cov(t + h, t + h) - 2.0 * self.cov(t, t + h) + self.cov(t, t)
    }

    pub fn gram(&self, times: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(times.len(), times.len(), |i, j| self.cov(times[i], times[j]))
    }

    /// Smallest eigenvalue of the Gram matrix and its trace.
    pub fn gram_spectrum(&self, times: &[f64]) -> (f64, f64) {
        let g = self.gram(times);
        let trace = g.trace();
        let eig = SymmetricEigen::new(g);
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        (min, trace)
    }

    pub fn is_psd_on(&self, times: &[f64]) -> bool {
        let (min, trace) = self.gram_spectrum(times);
        min >= -1e-9 * trace.max(f64::MIN_POSITIVE)
    }

    /// Empirical Hölder constant: `max (E[(Z(t) - Z(s))^2]) / (t - s)^{1/2}`
    /// over all pairs of a grid.
    pub fn holder_constant(&self, times: &[f64]) -> f64 {
        let mut c: f64 = 0.0;
        for (i, &s) in times.iter().enumerate() {
            for &t in &times[i + 1..] {
                let (s, t) = if s < t { (s, t) } else { (t, s) };
                if t > s {
                    c = c.max(self.increment_variance(s, t - s) / (t - s).sqrt());
                }
            }
        }
        c
    }

    /// `(s, t, K)` rows for plotting.
    pub fn write_table<W: Write>(&self, times: &[f64], mut w: W) -> std::io::Result<()> {
        writeln!(w, "s,t,K")?;
        for &s in times {
            for &t in times {
                writeln!(w, "{s},{t},{}", self.cov(s, t))?;
            }
        }
        Ok(())
    }
}

/// `u(x, t) = u0(x - b t)`, the solution of `u_t + b u_x = 0`.
pub fn transport_solution(profile: &Profile, b: f64, x: f64, t: f64) -> f64 {
    profile.u0(x - b * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{HeightForm, VarianceForm};
    use proptest::prelude::*;

    const EQ1: CovKernel = CovKernel::Equilibrium {
        rho: 1.0,
        kappa2: 1.0,
    };

    #[test]
    fn closed_form_examples() {
        assert!((EQ1.cov(1.0, 1.0) - (2.0 / PI).sqrt()).abs() < 1e-15);
        assert!((EQ1.cov(1.0, 1.0) - 0.797_885).abs() < 1e-6);
        let g = CovKernel::General {
            rho: 2.0,
            v: 0.0,
            kappa2: 1.0,
        };
        // direct arithmetic of 2 (sqrt5 - sqrt3) / sqrt(2 pi)
        let oracle = 2.0 * (5f64.sqrt() - 3f64.sqrt()) / (2.0 * PI).sqrt();
        assert!((g.cov(1.0, 4.0) - oracle).abs() < 1e-15);
        assert!((g.cov(1.0, 4.0) - 0.40217).abs() < 1e-4);
        for k in [
            EQ1,
            g,
            CovKernel::DeterministicIc {
                rho: 1.0,
                kappa2: 2.0,
            },
            CovKernel::Brownian { lambda: 100.0 },
        ] {
            for t in [0.0, 0.3, 2.0] {
                assert_eq!(k.cov(0.0, t), 0.0);
            }
        }
        let br = CovKernel::Brownian { lambda: 100.0 };
        assert!((br.cov(1.0, 2.0) - 100.0 * 2f64.sqrt() / (2.0 * PI).sqrt()).abs() < 1e-12);
        assert!((br.cov(1.0, 2.0) - 56.42).abs() < 0.01);
    }

    #[test]
    fn increment_variance_monotonicity() {
        let h = 0.25;
        let ts: Vec<f64> = (0..40).map(|i| 0.1 + 0.2 * i as f64).collect();
        let check = |v: f64| -> Vec<f64> {
            let k = CovKernel::General {
                rho: 1.0,
                v,
                kappa2: 1.3,
            };
            ts.iter().map(|&t| k.increment_variance(t, h)).collect()
        };
        let dec = check(2.0);
        assert!(dec.windows(2).all(|w| w[1] < w[0]));
        let inc = check(0.5);
        assert!(inc.windows(2).all(|w| w[1] > w[0]));
        let flat = check(1.0);
        assert!(flat.windows(2).all(|w| (w[1] - w[0]).abs() < 1e-12));
    }

    #[test]
    fn holder_constant_is_finite_and_tight_for_fbm() {
        let grid: Vec<f64> = (0..200).map(|i| 0.05 * i as f64).collect();
        let c = EQ1.holder_constant(&grid);
        // fBm: increment variance is exactly 2 rho sqrt(kappa2 / 2 pi) sqrt(h)
        assert!((c - 2.0 / (2.0 * PI).sqrt()).abs() < 1e-12);
        let g = CovKernel::General {
            rho: 1.0,
            v: 3.0,
            kappa2: 1.0,
        };
        let cg = g.holder_constant(&grid);
        let dense: Vec<f64> = (0..800).map(|i| 0.0125 * i as f64).collect();
        assert!(g.holder_constant(&dense) <= cg * 1.05);
    }

    #[test]
    fn kernel_table_csv() {
        let mut out = Vec::new();
        EQ1.write_table(&[0.0, 1.0], &mut out).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert!(s.starts_with("s,t,K\n0,0,0\n"));
        assert_eq!(s.lines().count(), 5);
    }

    #[test]
    fn transport_examples() {
        let p = Profile::flat(1.0, 1.0).unwrap();
        assert!((transport_solution(&p, 0.4, 1.0, 1.0) - 0.6).abs() < 1e-15);
        let q = Profile::new(
            HeightForm::Smoothstep {
                base: 0.2,
                height: 1.0,
                from: -1.0,
                to: 1.0,
            },
            VarianceForm::EqualToDensity,
        )
        .unwrap();
        assert_eq!(transport_solution(&q, 0.7, 0.3, 0.0), q.u0(0.3));
        for t in [0.5, 3.0] {
            assert_eq!(transport_solution(&q, 0.0, 0.3, t), q.u0(0.3));
        }
    }

    proptest! {
        #[test]
        fn general_reduces_to_special_cases(s in 0.0f64..10.0, t in 0.0f64..10.0,
                                            rho in 0.0f64..5.0, k2 in 0.1f64..4.0) {
            let g = CovKernel::General { rho, v: rho, kappa2: k2 };
            let e = CovKernel::Equilibrium { rho, kappa2: k2 };
            prop_assert!((g.cov(s, t) - e.cov(s, t)).abs() < 1e-12);
            let g0 = CovKernel::General { rho, v: 0.0, kappa2: k2 };
            let d = CovKernel::DeterministicIc { rho, kappa2: k2 };
            prop_assert!((g0.cov(s, t) - d.cov(s, t)).abs() < 1e-12);
        }

        #[test]
        fn kernel_symmetry_and_self_similarity(s in 0.0f64..10.0, t in 0.0f64..10.0,
                                               a in 0.01f64..100.0, v in 0.0f64..3.0) {
            let g = CovKernel::General { rho: 1.2, v, kappa2: 1.7 };
            prop_assert!((g.cov(s, t) - g.cov(t, s)).abs() < 1e-15);
            prop_assert!(g.cov(t, t) >= 0.0);
            let lhs = g.cov(a * s, a * t);
            let rhs = a.sqrt() * g.cov(s, t);
            prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
        }

        #[test]
        fn gram_is_psd(times in proptest::collection::vec(0.0f64..20.0, 1..64),
                       rho in 0.0f64..3.0, v in 0.0f64..3.0) {
            let g = CovKernel::General { rho, v, kappa2: 1.0 };
            prop_assert!(g.is_psd_on(&times));
            let br = CovKernel::Brownian { lambda: 5.0 };
            prop_assert!(br.is_psd_on(&times));
        }
    }
}
