//! Gaussian integrals behind the limit covariance, in closed form and by
//! adaptive quadrature.

use std::f64::consts::PI;

use super::gaussian::{bm_cdf, bm_cross_down, bm_sf};
use crate::error::{Error, Result};
use crate::numeric::integrate;

const QUAD_TOL: f64 = 1e-10;
/// `P(N > 8.5) < 1e-16`; integrands are cut beyond `8.5 sqrt(t_max)`.
const TAIL_CUT: f64 = 8.5;

/// For `0 <= s <= t`:
/// * `full  = int_R   P(B_s > z) P(B_t <= z) dz`
/// * `half  = int_0^inf P(B_s > z) P(B_t > z) dz`
/// * `cross = int_R   P(B_s > z >= B_t) dz`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossIntegrals {
    pub full: f64,
    pub half: f64,
    pub cross: f64,
}

fn check_order(s: f64, t: f64) -> Result<()> {
    if !(0.0 <= s && s <= t && t.is_finite()) {
        return Err(Error::Degenerate(format!("need 0 <= s <= t, got ({s}, {t})")));
    }
    Ok(())
}

pub fn cross_integrals(s: f64, t: f64) -> Result<CrossIntegrals> {
    check_order(s, t)?;
    let r2pi = (2.0 * PI).sqrt();
    Ok(CrossIntegrals {
        full: (s + t).sqrt() / r2pi,
        half: (s.sqrt() + t.sqrt() - (s + t).sqrt()) / (2.0 * r2pi),
        cross: (t - s).sqrt() / r2pi,
    })
}

fn quad_split<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Result<f64> {
    // kink-prone point z = 0 is always an interval endpoint
    let mut total = 0.0;
    if lo < 0.0 {
        total += integrate(&f, lo, hi.min(0.0), QUAD_TOL / 2.0)?.value;
    }
    if hi > 0.0 {
        total += integrate(&f, lo.max(0.0), hi, QUAD_TOL / 2.0)?.value;
    }
    Ok(total)
}

/// The same three integrals by adaptive Gauss-Kronrod quadrature of the
/// Gaussian probabilities, split at `z = 0`, tolerance 1e-10.
pub fn cross_integrals_by_quadrature(s: f64, t: f64) -> Result<CrossIntegrals> {
    check_order(s, t)?;
    let l = TAIL_CUT * t.sqrt().max(1e-300);
    let full = quad_split(|z| bm_sf(s, z) * bm_cdf(t, z), -l, l)?;
    let half = quad_split(|z| bm_sf(s, z) * bm_sf(t, z), 0.0, l)?;
    let cross = quad_split(|z| bm_cross_down(s, t, z), -l, l)?;
    Ok(CrossIntegrals { full, half, cross })
}

/// The two half-line variances of a linear combination `sum theta_i Y(t_i)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SigmaSquares {
    /// Contribution of walks starting right of the characteristic (z < 0).
    pub left: f64,
    /// Contribution of walks starting left of the characteristic (z > 0).
    pub right: f64,
}

impl SigmaSquares {
    pub fn total(&self) -> f64 {
        self.left + self.right
    }
}

/// Evaluate both half-line variance formulas by quadrature. `times` must be
/// positive and strictly increasing.
pub fn sigma_squares(
    theta: &[f64],
    times: &[f64],
    rho: f64,
    v: f64,
    kappa2: f64,
) -> Result<SigmaSquares> {
    if theta.len() != times.len() {
        return Err(Error::GridMismatch {
            expected: times.len(),
            got: theta.len(),
        });
    }
    if times.iter().any(|&t| t <= 0.0) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Degenerate(
            "times must be positive and strictly increasing".into(),
        ));
    }
    if theta.iter().all(|&x| x == 0.0) {
        return Ok(SigmaSquares {
            left: 0.0,
            right: 0.0,
        });
    }
    let n = times.len();
    let k = kappa2.sqrt();
    // left half-line: P(B_ti > z) P(B_tj <= z) - P(B_ti > z >= B_tj) and
    // P(B_ti <= z) P(B_tj <= z); right half-line uses upper tails for v.
    let integrand = |z: f64, right: bool| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            let (ti, thi) = (times[i], theta[i]);
            let sf_i = bm_sf(ti, z);
            let cdf_i = 1.0 - sf_i;
            let vv = if right { sf_i * sf_i } else { cdf_i * cdf_i };
            acc += thi * thi * (rho * sf_i * cdf_i + v * vv);
            for j in i + 1..n {
                let (tj, thj) = (times[j], theta[j]);
                let sf_j = bm_sf(tj, z);
                let cdf_j = 1.0 - sf_j;
                let cross = sf_i * cdf_j - bm_cross_down(ti, tj, z);
                let vv = if right { sf_i * sf_j } else { cdf_i * cdf_j };
                acc += 2.0 * thi * thj * (rho * cross + v * vv);
            }
        }
        k * acc
    };
    let l = TAIL_CUT * times[n - 1].sqrt();
    let left = integrate(|z| integrand(z, false), -l, 0.0, QUAD_TOL)?.value;
    let right = integrate(|z| integrand(z, true), 0.0, l, QUAD_TOL)?.value;
    Ok(SigmaSquares { left, right })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limits::CovKernel;

    #[test]
    fn closed_form_examples() {
        let c = cross_integrals(1.0, 1.0).unwrap();
        assert!((c.full - 0.564_190).abs() < 1e-6);
        assert!((c.half - (2.0 - 2f64.sqrt()) / (2.0 * (2.0 * PI).sqrt())).abs() < 1e-15);
        assert!((c.half - 0.116_836).abs() < 1e-4);
        assert_eq!(c.cross, 0.0);
        let c = cross_integrals(0.0, 2.5).unwrap();
        assert!((c.cross - 2.5f64.sqrt() / (2.0 * PI).sqrt()).abs() < 1e-15);
        assert!(cross_integrals(2.0, 1.0).is_err());
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        for &(s, t) in &[(1.0, 1.0), (0.0, 2.0), (0.3, 4.0), (2.0, 2.5), (0.01, 50.0)] {
            let a = cross_integrals(s, t).unwrap();
            let q = cross_integrals_by_quadrature(s, t).unwrap();
            assert!((a.full - q.full).abs() < 1e-8, "full {s} {t}");
            assert!((a.half - q.half).abs() < 1e-8, "half {s} {t}");
            assert!((a.cross - q.cross).abs() < 1e-8, "cross {s} {t}");
        }
    }

    #[test]
    fn sigma_squares_single_time() {
        let ss = sigma_squares(&[1.0], &[1.0], 1.0, 1.0, 1.0).unwrap();
        assert!((ss.total() - (2.0 / PI).sqrt()).abs() < 1e-9);
        assert!((ss.left - ss.right).abs() < 1e-9);
        let zero = sigma_squares(&[0.0, 0.0], &[1.0, 2.0], 1.0, 1.0, 1.0).unwrap();
        assert_eq!(zero.total(), 0.0);
    }

    #[test]
    fn sigma_squares_two_times_deterministic() {
        let ss = sigma_squares(&[1.0, 1.0], &[1.0, 2.0], 1.0, 0.0, 1.0).unwrap();
        let k = CovKernel::DeterministicIc {
            rho: 1.0,
            kappa2: 1.0,
        };
        let oracle = k.cov(1.0, 1.0) + 2.0 * k.cov(1.0, 2.0) + k.cov(2.0, 2.0);
        assert!((ss.total() - oracle).abs() < 1e-8);
        assert!((ss.left - ss.right).abs() < 1e-8);
    }

    #[test]
    fn sigma_squares_rejects_bad_grids() {
        assert!(sigma_squares(&[1.0], &[0.0], 1.0, 1.0, 1.0).is_err());
        assert!(sigma_squares(&[1.0, 1.0], &[2.0, 1.0], 1.0, 1.0, 1.0).is_err());
        assert!(sigma_squares(&[1.0], &[1.0, 2.0], 1.0, 1.0, 1.0).is_err());
    }
}
