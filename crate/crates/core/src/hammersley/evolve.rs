//! Exact evaluation of the variational formula
//! `z_t(k) = min_{i <= k} { z_0(i) + Gamma^i_t(k - i) }`.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use super::field::PoissonField;
use super::lis::sweep;
use crate::error::{Error, Result};

/// Initial locations `z_0(i)` for labels `lo, lo + 1, ...`. Infinite entries
/// never win the minimum and are skipped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelWindow {
    pub lo: i64,
    pub z0: Vec<f64>,
    /// Labels below `lo` exist in the model; a minimizer at `lo` then means
    /// the window is too narrow.
    pub open_below: bool,
}

impl LabelWindow {
    pub fn hi(&self) -> i64 {
        self.lo + self.z0.len() as i64 - 1
    }

    pub fn get(&self, i: i64) -> f64 {
        self.z0[(i - self.lo) as usize]
    }

    pub fn labels(&self) -> RangeInclusive<i64> {
        self.lo..=self.hi()
    }

    /// `z_0(i) = 0` for `i <= 0`, `+inf` for `i > 0`, on labels `lo..=hi`.
    pub fn bdj(lo: i64, hi: i64) -> Self {
        let z0 = (lo..=hi)
            .map(|i| if i <= 0 { 0.0 } else { f64::INFINITY })
            .collect();
        Self {
            lo,
            z0,
            // every label below lo shares z_0 = 0 and needs strictly more points
            open_below: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HammersleyState {
    pub lo: i64,
    pub z: Vec<f64>,
    /// Minimal label attaining the minimum, per output label.
    pub minimizer: Vec<i64>,
}

impl HammersleyState {
    pub fn get(&self, k: i64) -> f64 {
        self.z[(k - self.lo) as usize]
    }

    pub fn minimizer_of(&self, k: i64) -> i64 {
        self.minimizer[(k - self.lo) as usize]
    }

    pub fn is_ordered(&self) -> bool {
        self.z.windows(2).all(|w| w[0] <= w[1])
    }

    /// `eta(k) = z(k) - z(k - 1)` for interior labels.
    pub fn sticks(&self) -> Vec<f64> {
        self.z.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Number of labels with location in `(a, b]`.
    pub fn count_in(&self, a: f64, b: f64) -> usize {
        self.z.iter().filter(|&&z| z > a && z <= b).count()
    }
}

/// Evolve `window` to time `t` for output labels `out`.
pub fn evolve(
    window: &LabelWindow,
    field: &PoissonField,
    t: f64,
    out: RangeInclusive<i64>,
) -> Result<HammersleyState> {
    let (out_lo, out_hi) = (*out.start(), *out.end());
    if out_lo < window.lo || out_hi > window.hi() || out_hi < out_lo {
        return Err(Error::Degenerate(format!(
            "output labels {out_lo}..={out_hi} outside window {}..={}",
            window.lo,
            window.hi()
        )));
    }
    if t < 0.0 || t > field.time_hi() {
        return Err(Error::Degenerate(format!(
            "time {t} outside field (0, {}]",
            field.time_hi()
        )));
    }
    if window.z0.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Degenerate("initial locations must be nondecreasing".into()));
    }
    let mut best: Vec<f64> = (out_lo..=out_hi).map(|j| window.get(j)).collect();
    let mut arg: Vec<i64> = (out_lo..=out_hi).collect();
    let mut exhausted = false;
    for i in window.lo..out_hi {
        let base = window.get(i);
        if !base.is_finite() {
            continue;
        }
        if base < field.space_lo() {
            return Err(Error::InsufficientField {
                needed: base,
                covered: field.space_lo(),
            });
        }
        // only labels k > i can improve; best values bound the sweep
        let first = ((i + 1).max(out_lo) - out_lo) as usize;
        let limit = best[first..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if limit <= base {
            continue;
        }
        let ran_out = sweep(field, base, t, limit, |m, s| {
            let kk = i + m as i64;
            if kk > out_hi {
                return false;
            }
            if kk >= out_lo {
                let j = (kk - out_lo) as usize;
                if s < best[j] || (s == best[j] && i < arg[j]) {
                    best[j] = s;
                    arg[j] = i;
                }
            }
            true
        });
        exhausted |= ran_out;
    }
    if let Some(j) = best.iter().position(|v| !v.is_finite()) {
        let m = (out_lo + j as i64 - window.lo) as f64;
        return Err(Error::InsufficientField {
            needed: window.get(window.lo) + m * m / (4.0 * t.max(f64::MIN_POSITIVE)),
            covered: field.space_hi(),
        });
    }
    // points past the field edge could still beat values beyond it
    let top = best.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if exhausted && top > field.space_hi() {
        return Err(Error::InsufficientField {
            needed: top,
            covered: field.space_hi(),
        });
    }
    if window.open_below {
        if arg.contains(&window.lo) {
            return Err(Error::WindowBoundary { label: window.lo });
        }
    }
    Ok(HammersleyState {
        lo: out_lo,
        z: best,
        minimizer: arg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hammersley::lis::{gamma, lis_count};
    use crate::hammersley::field::Point;

    #[test]
    fn time_zero_is_identity() {
        let f = PoissonField::new(1, -1.0, 50.0, 10.0).unwrap();
        let w = LabelWindow {
            lo: -5,
            z0: (0..20).map(|i| i as f64 * 0.7).collect(),
            open_below: true,
        };
        let s = evolve(&w, &f, 0.0, 0..=10).unwrap();
        for k in 0..=10 {
            assert_eq!(s.get(k), w.get(k));
            assert_eq!(s.minimizer_of(k), k);
        }
    }

    #[test]
    fn matches_brute_force_variational_formula() {
        let f = PoissonField::new(2, -1.0, 120.0, 6.0).unwrap();
        let w = LabelWindow {
            lo: -30,
            z0: (0..60).map(|i| (i as f64 * 1.3).floor() * 0.9).collect(),
            open_below: true,
        };
        let t = 4.0;
        let s = evolve(&w, &f, t, 0..=29).unwrap();
        for k in 0..=29 {
            let mut best = f64::INFINITY;
            let mut who = k;
            for i in w.lo..=k {
                let v = w.get(i) + gamma(&f, w.get(i), t, (k - i) as usize).unwrap_or(f64::INFINITY);
                if v < best {
                    best = v;
                    who = i;
                }
            }
            assert_eq!(s.get(k), best, "label {k}");
            assert_eq!(s.minimizer_of(k), who);
        }
        assert!(s.is_ordered());
        assert!(s.sticks().iter().all(|&e| e >= 0.0));
    }

    #[test]
    fn doubling_window_changes_nothing() {
        let f = PoissonField::new(3, -100.0, 200.0, 8.0).unwrap();
        let z0 = |i: i64| i as f64 * 0.5;
        let make = |lo: i64, hi: i64| LabelWindow {
            lo,
            z0: (lo..=hi).map(z0).collect(),
            open_below: true,
        };
        let a = evolve(&make(-40, 40), &f, 5.0, 0..=20).unwrap();
        let b = evolve(&make(-80, 80), &f, 5.0, 0..=20).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            evolve(&make(-1, 40), &f, 5.0, 0..=20),
            Err(Error::WindowBoundary { .. })
        ));
    }

    #[test]
    fn bdj_counts_equal_lis() {
        let (x, t) = (30.0, 30.0);
        let f = PoissonField::new(4, -1.0, 300.0, t).unwrap();
        let w = LabelWindow::bdj(-3, 100);
        let s = evolve(&w, &f, t, 0..=100).unwrap();
        let pts: Vec<Point> = f
            .points()
            .iter()
            .copied()
            .filter(|p| p.space > 0.0 && p.space <= x && p.time <= t)
            .collect();
        // labels 1.. with z in (0, x] are the particles in (0, x]
        let particles = s.z.iter().skip(1).filter(|&&z| z > 0.0 && z <= x).count();
        assert_eq!(particles, lis_count(&pts));
        for k in 0..=100 {
            assert_eq!(s.minimizer_of(k), 0);
        }
    }

    #[test]
    fn short_field_is_reported() {
        let f = PoissonField::new(4, -1.0, 5.0, 10.0).unwrap();
        let w = LabelWindow::bdj(-1, 200);
        assert!(matches!(
            evolve(&w, &f, 10.0, 0..=200),
            Err(Error::InsufficientField { .. })
        ));
    }
}
