//! Univariate and bivariate normal probabilities.

use libm::erfc;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Standard normal cdf.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal upper tail `P(N > x)`.
#[inline]
pub fn norm_sf(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `P(B_t > z)` for standard Brownian motion. At `t = 0` this is `1{z < 0}`.
#[inline]
pub fn bm_sf(t: f64, z: f64) -> f64 {
    if t == 0.0 {
        if z < 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        norm_sf(z / t.sqrt())
    }
}

/// `P(B_t <= z)`.
#[inline]
pub fn bm_cdf(t: f64, z: f64) -> f64 {
    if t == 0.0 {
        if z >= 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        norm_cdf(z / t.sqrt())
    }
}

// Gauss-Legendre half-rules (nodes in (0, 1), weights) of order 6, 12, 20.
const GL6: ([f64; 3], [f64; 3]) = (
    [0.932_469_514_203_152_2, 0.661_209_386_466_264_7, 0.238_619_186_083_197],
    [0.171_324_492_379_170_5, 0.360_761_573_048_138_4, 0.467_913_934_572_690_4],
);
const GL12: ([f64; 6], [f64; 6]) = (
    [
        0.981_560_634_246_719_1,
        0.904_117_256_370_475,
        0.769_902_674_194_305,
        0.587_317_954_286_617_1,
        0.367_831_498_998_180_2,
        0.125_233_408_511_469_2,
    ],
    [
        0.047_175_336_386_511_77,
        0.106_939_325_995_318_3,
        0.160_078_328_543_346_4,
        0.203_167_426_723_065_9,
        0.233_492_536_538_354_7,
        0.249_147_045_813_402_9,
    ],
);
const GL20: ([f64; 10], [f64; 10]) = (
    [
        0.993_128_599_185_094_9,
        0.963_971_927_277_913_8,
        0.912_234_428_251_325_9,
        0.839_116_971_822_218_8,
        0.746_331_906_460_150_8,
        0.636_053_680_726_515,
        0.510_867_001_950_827_1,
        0.373_706_088_715_419_6,
        0.227_785_851_141_645_1,
        0.076_526_521_133_497_33,
    ],
    [
        0.017_614_007_139_152_12,
        0.040_601_429_800_386_94,
        0.062_672_048_334_109_06,
        0.083_276_741_576_704_75,
        0.101_930_119_817_240_4,
        0.118_194_531_961_518_4,
        0.131_688_638_449_176_6,
        0.142_096_109_318_382_1,
        0.149_172_986_472_603_7,
        0.152_753_387_130_725_9,
    ],
);

/// `P(X > h, Y > k)` for standard bivariate normal `(X, Y)` with correlation
/// `r`, by Genz's Drezner-Wesolowsky refinement (absolute error ~1e-15).
pub fn bvn_upper(h: f64, k: f64, r: f64) -> f64 {
    if h == f64::INFINITY || k == f64::INFINITY {
        return 0.0;
    }
    if h == f64::NEG_INFINITY {
        return if k == f64::NEG_INFINITY { 1.0 } else { norm_sf(k) };
    }
    if k == f64::NEG_INFINITY {
        return norm_sf(h);
    }
    if r == 0.0 {
        return norm_sf(h) * norm_sf(k);
    }
    let (xs, ws): (&[f64], &[f64]) = if r.abs() < 0.3 {
        (&GL6.0, &GL6.1)
    } else if r.abs() < 0.75 {
        (&GL12.0, &GL12.1)
    } else {
        (&GL20.0, &GL20.1)
    };
    // symmetric nodes on (0, 2): 1 - x and 1 + x share weights
    let nodes = || {
        xs.iter()
            .zip(ws)
            .flat_map(|(&x, &w)| [(1.0 - x, w), (1.0 + x, w)])
    };
    let tp = 2.0 * PI;
    let mut k = k;
    let mut hk = h * k;
    let mut bvn;
    if r.abs() < 0.925 {
        let hs = (h * h + k * k) / 2.0;
        let asr = r.asin() / 2.0;
        bvn = nodes()
            .map(|(x, w)| {
                let sn = (asr * x).sin();
                w * ((sn * hk - hs) / (1.0 - sn * sn)).exp()
            })
            .sum::<f64>();
        bvn = bvn * asr / tp + norm_sf(h) * norm_sf(k);
    } else {
        if r < 0.0 {
            k = -k;
            hk = -hk;
        }
        bvn = 0.0;
        if r.abs() < 1.0 {
            let as_ = 1.0 - r * r;
            let mut a = as_.sqrt();
            let bs = (h - k).powi(2);
            let asr = -(bs / as_ + hk) / 2.0;
            let c = (4.0 - hk) / 8.0;
            let d = (12.0 - hk) / 80.0;
            if asr > -100.0 {
                bvn = a
                    * asr.exp()
                    * (1.0 - c * (bs - as_) * (1.0 - d * bs) / 3.0 + c * d * as_ * as_);
            }
            if hk > -100.0 {
                let b = bs.sqrt();
                let sp = tp.sqrt() * norm_sf(b / a);
                bvn -= (-hk / 2.0).exp() * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
            }
            a /= 2.0;
            let mut sum = 0.0;
            for (x, w) in nodes() {
                let xs = (a * x).powi(2);
                let asr = -(bs / xs + hk) / 2.0;
                if asr > -100.0 {
                    let sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
                    let rs = (1.0 - xs).sqrt();
                    let ep = (-(hk / 2.0) * xs / (1.0 + rs).powi(2)).exp() / rs;
                    sum += w * asr.exp() * (sp - ep);
                }
            }
            bvn = (a * sum - bvn) / tp;
        }
        if r > 0.0 {
            bvn += norm_sf(h.max(k));
        } else if h >= k {
            bvn = -bvn;
        } else {
            let l = if h < 0.0 {
                norm_cdf(k) - norm_cdf(h)
            } else {
                norm_sf(h) - norm_sf(k)
            };
            bvn = l - bvn;
        }
    }
    bvn.clamp(0.0, 1.0)
}

/// `P(B_s > z, B_t > z)` for one Brownian path and `0 <= s <= t`.
pub fn bm_joint_sf(s: f64, t: f64, z: f64) -> f64 {
    debug_assert!(s <= t);
    if s == 0.0 {
        return if z < 0.0 { bm_sf(t, z) } else { 0.0 };
    }
    if s == t {
        return bm_sf(s, z);
    }
    bvn_upper(z / s.sqrt(), z / t.sqrt(), (s / t).sqrt())
}

/// `P(B_s > z >= B_t)` for `0 <= s <= t`.
pub fn bm_cross_down(s: f64, t: f64, z: f64) -> f64 {
    (bm_sf(s, z) - bm_joint_sf(s, t, z)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::integrate;

    /// P(X > h, Y > k) = int_h^inf phi(x) P(Y > k | X = x) dx, by quadrature.
    fn bvn_by_quadrature(h: f64, k: f64, r: f64) -> f64 {
        let sd = (1.0 - r * r).sqrt();
        let lo = h.max(-40.0);
        integrate(|x| norm_pdf(x) * norm_sf((k - r * x) / sd), lo, lo.max(0.0) + 40.0, 1e-14)
            .unwrap()
            .value
    }

    #[test]
    fn normal_basics() {
        assert!((norm_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((norm_cdf(1.959963984540054) - 0.975).abs() < 1e-14);
        assert!(norm_sf(8.3) < 1e-16 && norm_sf(8.3) > 1e-17);
    }

    #[test]
    fn bvn_matches_quadrature() {
        for &r in &[-0.95, -0.8, -0.5, -0.1, 0.2, 0.5, 0.8, 0.93, 0.97, 0.999] {
            for &(h, k) in &[(0.0, 0.0), (0.5, -1.0), (-1.2, 0.3), (2.0, 1.5), (-2.5, -2.0)] {
                let a = bvn_upper(h, k, r);
                let b = bvn_by_quadrature(h, k, r);
                assert!((a - b).abs() < 1e-12, "h={h} k={k} r={r}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn bvn_special_values() {
        // P(X > 0, Y > 0) = 1/4 + asin(r) / (2 pi)
        for r in [-0.9, -0.3, 0.0, 0.4, 0.95] {
            let exact = 0.25 + f64::asin(r) / (2.0 * PI);
            assert!((bvn_upper(0.0, 0.0, r) - exact).abs() < 1e-14);
        }
        assert_eq!(bvn_upper(f64::INFINITY, 0.0, 0.5), 0.0);
        assert!((bvn_upper(f64::NEG_INFINITY, 1.0, 0.5) - norm_sf(1.0)).abs() < 1e-16);
    }

    #[test]
    fn brownian_crossing_probability() {
        // P(B_s > z >= B_t) = int_{x > z} phi_s(x) P(B_t - B_s <= z - x) dx
        let (s, t): (f64, f64) = (0.7, 2.3);
        for z in [-1.5, -0.2, 0.0, 0.4, 2.0] {
            let direct = integrate(
                |x| norm_pdf(x / s.sqrt()) / s.sqrt() * norm_cdf((z - x) / (t - s).sqrt()),
                z,
                z + 40.0,
                1e-14,
            )
            .unwrap()
            .value;
            assert!((bm_cross_down(s, t, z) - direct).abs() < 1e-12);
        }
    }
}
