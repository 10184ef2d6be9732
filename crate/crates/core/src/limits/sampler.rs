use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use super::CovKernel;
use crate::error::{Error, Result};

const MAX_GRID: usize = 4096;
const EIG_CLAMP: f64 = 1e-9;

/// Mean-zero Gaussian vector with Gram matrix `K(t_i, t_j)`, drawn through a
/// symmetric eigendecomposition `K = V diag(l) V^T`. Eigenvalues slightly
/// below zero (within `1e-9 * trace`) are clamped, which handles the exact
/// singularity at `t = 0` and nearly coincident grid points.
#[derive(Clone, Debug)]
pub struct GaussianSampler {
    factor: DMatrix<f64>,
    degenerate: Vec<bool>,
}

impl GaussianSampler {
    pub fn new(kernel: &CovKernel, times: &[f64]) -> Result<Self> {
        if times.len() > MAX_GRID {
            return Err(Error::Degenerate(format!(
                "grid of {} points exceeds {MAX_GRID}",
                times.len()
            )));
        }
        if times.iter().any(|&t| !(t >= 0.0)) {
            return Err(Error::Degenerate("negative or NaN time".into()));
        }
        let gram = kernel.gram(times);
        let degenerate = (0..times.len()).map(|i| gram[(i, i)] == 0.0).collect();
        let trace = gram.trace();
        let budget = EIG_CLAMP * trace.max(f64::MIN_POSITIVE);
        let eig = SymmetricEigen::new(gram);
        let mut scale = eig.eigenvalues.clone();
        for l in scale.iter_mut() {
            if *l < -budget {
                return Err(Error::Factorization {
                    min_eig: *l,
                    budget: -budget,
                });
            }
            *l = l.max(0.0).sqrt();
        }
        let factor = eig.eigenvectors * DMatrix::from_diagonal(&scale);
        Ok(Self { factor, degenerate })
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let d = self.dim();
        let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let mut x: Vec<f64> = (&self.factor * z).iter().copied().collect();
        // zero-variance coordinates (t = 0) are exactly zero, not round-off
        for (xi, &deg) in x.iter_mut().zip(&self.degenerate) {
            if deg {
                *xi = 0.0;
            }
        }
        x
    }
}

/// One draw of the limit process on `times`.
pub fn sample_limit_process<R: Rng + ?Sized>(
    kernel: &CovKernel,
    times: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>> {
    Ok(GaussianSampler::new(kernel, times)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn zero_time_is_exactly_zero() {
        let k = CovKernel::Equilibrium {
            rho: 1.0,
            kappa2: 1.0,
        };
        let mut rng = RngStream::new(3);
        for _ in 0..50 {
            let x = sample_limit_process(&k, &[0.0], &mut rng).unwrap();
            assert_eq!(x, vec![0.0]);
            let x = sample_limit_process(&k, &[0.0, 1.0], &mut rng).unwrap();
            assert_eq!(x[0], 0.0);
        }
    }

    #[test]
    fn empirical_covariance_matches_kernel() {
        let k = CovKernel::General {
            rho: 1.0,
            v: 2.0,
            kappa2: 1.0,
        };
        let times = [0.5, 1.0, 2.0, 3.0];
        let s = GaussianSampler::new(&k, &times).unwrap();
        let mut rng = RngStream::new(11);
        let r = 100_000;
        let mut acc = [[0.0f64; 4]; 4];
        for _ in 0..r {
            let x = s.sample(&mut rng);
            for i in 0..4 {
                for j in 0..4 {
                    acc[i][j] += x[i] * x[j];
                }
            }
        }
        for i in 0..4 {
            for j in 0..4 {
                let emp = acc[i][j] / r as f64;
                let th = k.cov(times[i], times[j]);
                assert!((emp / th - 1.0).abs() < 0.02, "({i},{j}) {emp} vs {th}");
            }
        }
    }

    #[test]
    fn duplicate_times_are_fine() {
        let k = CovKernel::DeterministicIc {
            rho: 1.0,
            kappa2: 1.0,
        };
        assert!(GaussianSampler::new(&k, &[1.0, 1.0, 1.0 + 1e-12, 2.0]).is_ok());
    }

    #[test]
    fn rejects_indefinite_input() {
        let bad = CovKernel::General {
            rho: -5.0,
            v: 0.0,
            kappa2: 1.0,
        };
        assert!(matches!(
            GaussianSampler::new(&bad, &[1.0, 2.0]),
            Err(Error::Factorization { .. })
        ));
    }
}
