//! Hopf-Lax solution `u(x, t) = inf_{y <= x} { u0(y) + (x - y)^2 / (4t) }`
//! of `u_t + (u_x)^2 = 0`, with its minimizer set and shock detection.

use std::cell::Cell;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::golden_min;
use crate::profiles::{HeightForm, Profile};

const SCAN_POINTS: usize = 10_000;
const Y_TOL: f64 = 1e-12;
const VALUE_TOL: f64 = 1e-10;
const MERGE_TOL: f64 = 1e-6;

/// A nondecreasing initial height for the Hamilton-Jacobi equation.
pub trait HjInitial {
    /// `u0(y)`; may be `+inf` above [`domain_hi`](Self::domain_hi).
    fn u0(&self, y: f64) -> f64;

    /// Largest `y` with finite `u0`.
    fn domain_hi(&self) -> f64 {
        f64::INFINITY
    }

    /// A Lipschitz constant of `u0` on its domain.
    fn lipschitz(&self) -> f64;

    /// `sup u0 - inf u0` on the domain, `+inf` if unbounded.
    fn range(&self) -> f64 {
        f64::INFINITY
    }

    /// `Some(rho)` when `u0(y) = u0(0) + rho y` on the whole line.
    fn slope(&self) -> Option<f64> {
        None
    }
}

impl HjInitial for Profile {
    fn u0(&self, y: f64) -> f64 {
        Profile::u0(self, y)
    }

    fn lipschitz(&self) -> f64 {
        self.max_density()
    }

    fn range(&self) -> f64 {
        self.u0_range()
    }

    fn slope(&self) -> Option<f64> {
        match self.height {
            HeightForm::Constant => Some(0.0),
            HeightForm::Linear { rho } => Some(rho),
            _ => None,
        }
    }
}

/// `u0 = 0` on `(-inf, 0]`, `+inf` on `(0, inf)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Bdj;

impl HjInitial for Bdj {
    fn u0(&self, y: f64) -> f64 {
        if y <= 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn domain_hi(&self) -> f64 {
        0.0
    }

    fn lipschitz(&self) -> f64 {
        0.0
    }

    fn range(&self) -> f64 {
        0.0
    }
}

/// Closure-backed initial height.
pub struct FnInitial<F> {
    pub f: F,
    pub lipschitz: f64,
}

impl<F: Fn(f64) -> f64> HjInitial for FnInitial<F> {
    fn u0(&self, y: f64) -> f64 {
        (self.f)(y)
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopfLaxSolution {
    pub x: f64,
    pub t: f64,
    pub u: f64,
    /// Minimizers in increasing order, merged within 1e-6.
    pub minimizers: Vec<f64>,
    pub shock: bool,
    /// Objective evaluations spent.
    pub evaluations: usize,
}

/// `Phi(y) = u0(y) + (x - y)^2 / (4t)`.
pub fn phi<P: HjInitial + ?Sized>(u0: &P, x: f64, t: f64, y: f64) -> f64 {
    u0.u0(y) + (x - y) * (x - y) / (4.0 * t)
}

/// Lower end of the search interval. For `d = x - y` beyond this bound,
/// `Phi(y) > Phi(top)` follows from either the Lipschitz or the range bound.
fn bracket<P: HjInitial + ?Sized>(u0: &P, x: f64, t: f64, top: f64) -> f64 {
    let by_lip = 4.0 * t * u0.lipschitz();
    let by_range = 4.0 * (t * u0.range()).sqrt();
    let reach = by_lip.min(by_range);
    top.min(x) - reach - 1.0 - (x - top).max(0.0)
}

pub fn hopf_lax<P: HjInitial + ?Sized>(u0: &P, x: f64, t: f64) -> Result<HopfLaxSolution> {
    if !(t > 0.0 && t.is_finite() && x.is_finite()) {
        return Err(Error::Degenerate(format!("need t > 0 and finite x, got ({x}, {t})")));
    }
    if let (Some(rho), true) = (u0.slope(), u0.domain_hi() == f64::INFINITY) {
        return Ok(HopfLaxSolution {
            x,
            t,
            u: u0.u0(x) - t * rho * rho,
            minimizers: vec![x - 2.0 * t * rho],
            shock: false,
            evaluations: 1,
        });
    }
    let top = x.min(u0.domain_hi());
    let lo = bracket(u0, x, t, top);
    if !lo.is_finite() {
        return Err(Error::Degenerate(
            "u0 has neither a finite Lipschitz nor a finite range bound".into(),
        ));
    }
    let count = Cell::new(0usize);
    let f = |y: f64| {
        count.set(count.get() + 1);
        phi(u0, x, t, y)
    };
    let step = (top - lo) / SCAN_POINTS as f64;
    let ys: Vec<f64> = (0..=SCAN_POINTS)
        .map(|j| if j == SCAN_POINTS { top } else { lo + j as f64 * step })
        .collect();
    let vals: Vec<f64> = ys.iter().map(|&y| f(y)).collect();
    if vals.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
        return Err(Error::Degenerate("objective is not bounded below".into()));
    }
    let mut cands: Vec<(f64, f64)> = Vec::new();
    let last = SCAN_POINTS;
    for j in 0..=last {
        let left = if j == 0 { f64::INFINITY } else { vals[j - 1] };
        let right = if j == last { f64::INFINITY } else { vals[j + 1] };
        if vals[j] <= left && vals[j] <= right {
            let a = ys[j.saturating_sub(1)];
            let b = ys[(j + 1).min(last)];
            let (y, v) = golden_min(&f, a, b, Y_TOL);
            let (y, v) = polish(&f, y, v, a, b);
            let (y, v) = if vals[j] < v { (ys[j], vals[j]) } else { (y, v) };
            cands.push((y, v));
        }
    }
    let u = cands.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let mut mins: Vec<f64> = cands
        .iter()
        .filter(|c| c.1 <= u + VALUE_TOL)
        .map(|c| c.0)
        .collect();
    mins.sort_by(|a, b| a.total_cmp(b));
    let mut merged: Vec<f64> = Vec::with_capacity(mins.len());
    for y in mins {
        match merged.last() {
            Some(&p) if y - p < MERGE_TOL => {}
            _ => merged.push(y),
        }
    }
    Ok(HopfLaxSolution {
        x,
        t,
        u,
        shock: merged.len() >= 2,
        minimizers: merged,
        evaluations: count.get(),
    })
}

/// Parabolic steps through `y +- h`; golden section alone pins a smooth
/// minimum only to about `sqrt(eps)`. A step is kept unless it raises the
/// value by more than rounding.
fn polish<F: Fn(f64) -> f64>(f: &F, mut y: f64, mut v: f64, a: f64, b: f64) -> (f64, f64) {
    let w = (b - a).max(1e-8);
    let h = 0.25 * w;
    for _ in 0..4 {
        let (fm, fp) = (f(y - h), f(y + h));
        let curv = fp - 2.0 * v + fm;
        if !(curv > 0.0) {
            break;
        }
        let z = y - h * (fp - fm) / (2.0 * curv);
        if !(a - w..=b + w).contains(&z) || z == y {
            break;
        }
        let fz = f(z);
        if fz > v + 8.0 * f64::EPSILON * v.abs().max(1.0) {
            break;
        }
        y = z;
        v = fz;
    }
    (y, v)
}

/// Empirical constant of the quadratic-minimum condition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticMinimum {
    pub c1: f64,
    pub ok: bool,
}

/// `inf (Phi(y) - Phi(ybar)) / (y - ybar)^2` over minimizers `ybar` and
/// `points` grid offsets per side within `delta`, restricted to the domain.
pub fn check_quadratic_minimum<P: HjInitial + ?Sized>(
    u0: &P,
    sol: &HopfLaxSolution,
    delta: f64,
    points: usize,
) -> QuadraticMinimum {
    let mut c1 = f64::INFINITY;
    for &yb in &sol.minimizers {
        let base = phi(u0, sol.x, sol.t, yb);
        for j in 1..=points {
            let d = delta * j as f64 / points as f64;
            for y in [yb - d, yb + d] {
                let v = phi(u0, sol.x, sol.t, y);
                if v.is_finite() {
                    c1 = c1.min((v - base) / (d * d));
                }
            }
        }
    }
    QuadraticMinimum {
        c1,
        ok: c1 > 1e-8,
    }
}

/// `(x, u, shock_flag, minimizers)` rows; minimizers are `;`-separated.
pub fn write_hopf_lax_csv<W: Write>(sols: &[HopfLaxSolution], mut w: W) -> std::io::Result<()> {
    writeln!(w, "x,t,u,shock_flag,minimizers")?;
    for s in sols {
        let mins: Vec<String> = s.minimizers.iter().map(|m| m.to_string()).collect();
        writeln!(w, "{},{},{},{},{}", s.x, s.t, s.u, s.shock as u8, mins.join(";"))?;
    }
    Ok(())
}
