//! Longest increasing paths through planar points and the `Gamma` function
//! of the graphical construction.

use super::field::{Point, PoissonField};
use crate::error::{Error, Result};

/// Patience-sorting state for a chain strictly increasing in time, fed
/// points in increasing space order.
#[derive(Clone, Debug, Default)]
pub struct Patience {
    tops: Vec<f64>,
}

impl Patience {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.tops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tops.is_empty()
    }

    /// Insert a time; returns true when the longest chain grew.
    #[inline]
    pub fn push(&mut self, time: f64) -> bool {
        let k = self.tops.partition_point(|&x| x < time);
        if k == self.tops.len() {
            self.tops.push(time);
            true
        } else {
            self.tops[k] = time;
            false
        }
    }
}

/// Length of the longest chain strictly increasing in both coordinates.
pub fn lis_count(points: &[Point]) -> usize {
    let mut pts = points.to_vec();
    // equal space coordinates cannot chain: visit them latest-first
    pts.sort_by(|a, b| a.space.total_cmp(&b.space).then(b.time.total_cmp(&a.time)));
    let mut p = Patience::new();
    for q in &pts {
        p.push(q.time);
    }
    p.len()
}

/// Walk the points of `field` with space in `(base, limit)` and time at most
/// `t`, in space order, calling `reach(m, space)` whenever the longest chain
/// first attains length `m`. Stops early when `reach` returns false.
/// Returns true if the sweep ran into the end of the field before `limit`.
pub(crate) fn sweep<F: FnMut(usize, f64) -> bool>(
    field: &PoissonField,
    base: f64,
    t: f64,
    limit: f64,
    mut reach: F,
) -> bool {
    let mut pat = Patience::new();
    for p in &field.points()[field.first_after(base)..] {
        if p.space >= limit {
            return false;
        }
        if p.time <= t && pat.push(p.time) && !reach(pat.len(), p.space) {
            return false;
        }
    }
    limit > field.space_hi()
}

/// `Gamma_t(m)` from base location `base`: the smallest `h` such that
/// `(base, base + h] x (0, t]` holds an increasing chain of `m` points.
/// The value is attained at a point's space coordinate.
pub fn gamma(field: &PoissonField, base: f64, t: f64, m: usize) -> Result<f64> {
    if m == 0 {
        return Ok(0.0);
    }
    if base < field.space_lo() {
        return Err(Error::Degenerate(format!(
            "base {base} below field start {}",
            field.space_lo()
        )));
    }
    if t > field.time_hi() {
        return Err(Error::Degenerate(format!(
            "time {t} beyond field height {}",
            field.time_hi()
        )));
    }
    let mut found = None;
    sweep(field, base, t, f64::INFINITY, |len, s| {
        if len == m {
            found = Some(s - base);
            false
        } else {
            true
        }
    });
    found.ok_or_else(|| Error::InsufficientField {
        needed: base + (m * m) as f64 / (4.0 * t.max(f64::MIN_POSITIVE)),
        covered: field.space_hi(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use proptest::prelude::*;
    use rand::Rng;

    fn dp_oracle(points: &[Point]) -> usize {
        let n = points.len();
        let mut best = vec![1usize; n];
        let mut out = 0;
        // order by space so that predecessors are final
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| points[a].space.total_cmp(&points[b].space));
        for (pos, &i) in idx.iter().enumerate() {
            for &j in &idx[..pos] {
                if points[j].space < points[i].space && points[j].time < points[i].time {
                    best[i] = best[i].max(best[j] + 1);
                }
            }
            out = out.max(best[i]);
        }
        out
    }

    fn pt(space: f64, time: f64) -> Point {
        Point { space, time }
    }

    #[test]
    fn small_cases() {
        assert_eq!(lis_count(&[]), 0);
        assert_eq!(lis_count(&[pt(1.0, 3.0), pt(2.0, 1.0), pt(3.0, 2.0)]), 2);
        // ties in either coordinate do not chain
        assert_eq!(lis_count(&[pt(1.0, 1.0), pt(1.0, 2.0), pt(2.0, 2.0)]), 2);
        assert_eq!(lis_count(&[pt(1.0, 1.0), pt(2.0, 1.0)]), 1);
    }

    proptest! {
        #[test]
        fn matches_dp_oracle(raw in proptest::collection::vec((0u8..30, 0u8..30), 0..120)) {
            // coarse integer coordinates force many ties
            let pts: Vec<Point> = raw.iter().map(|&(a, b)| pt(a as f64, b as f64)).collect();
            prop_assert_eq!(lis_count(&pts), dp_oracle(&pts));
        }
    }

    #[test]
    fn uniform_points_against_oracle() {
        let mut rng = RngStream::new(8);
        for _ in 0..50 {
            let n = rng.random_range(0..200);
            let pts: Vec<Point> = (0..n).map(|_| pt(rng.random(), rng.random())).collect();
            assert_eq!(lis_count(&pts), dp_oracle(&pts));
        }
    }

    #[test]
    fn gamma_basics() {
        let f = PoissonField::new(5, 0.0, 200.0, 50.0).unwrap();
        assert_eq!(gamma(&f, 3.0, 10.0, 0).unwrap(), 0.0);
        let mut prev = 0.0;
        for m in 1..40 {
            let g = gamma(&f, 3.0, 10.0, m).unwrap();
            assert!(g > prev);
            // a taller rectangle never needs more space
            assert!(gamma(&f, 3.0, 20.0, m).unwrap() <= g);
            // attained at a point coordinate
            assert!(f.points().iter().any(|p| p.space == 3.0 + g));
            prev = g;
        }
        assert!(matches!(
            gamma(&f, 3.0, 10.0, 10_000),
            Err(Error::InsufficientField { .. })
        ));
    }

    #[test]
    fn gamma_single_point() {
        let f = PoissonField::from_points(vec![pt(2.5, 1.0)], 0.0, 10.0, 2.0).unwrap();
        assert_eq!(gamma(&f, 2.0, 2.0, 1).unwrap(), 0.5);
        assert!(gamma(&f, 2.0, 0.5, 1).is_err());
        assert!(gamma(&f, 2.0, 2.0, 2).is_err());
    }
}
