//! Bracketed scalar root finding.

use alloc::vec::Vec;
#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use crate::error::{Error, Result};

const WIDTH: f64 = 1e-13;

/// Bisection on a sign-changing bracket down to width 1e-13, then one
/// Newton step with a centered difference derivative, kept only if it
/// stays inside the final bracket and lowers |g|.
pub fn bisect<G: Fn(f64) -> f64>(g: &G, lo: f64, hi: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut ga, gb) = (g(a), g(b));
    if ga == 0.0 {
        return Ok(a);
    }
    if gb == 0.0 {
        return Ok(b);
    }
    if !(ga.signum() != gb.signum()) || ga.is_nan() || gb.is_nan() {
        return Err(Error::NoSignChange(lo, hi));
    }
    for _ in 0..200 {
        let tol = WIDTH.max(4.0 * f64::EPSILON * a.abs().max(b.abs()));
        if b - a <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        let gm = g(m);
        if gm == 0.0 {
            return Ok(m);
        }
        if gm.signum() == ga.signum() {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    let x = 0.5 * (a + b);
    let gx = g(x);
    let d = (1e-7 * x.abs()).max(1e-9);
    let slope = (g(x + d) - g(x - d)) / (2.0 * d);
    if slope.is_finite() && slope != 0.0 {
        let y = x - gx / slope;
        if y >= a && y <= b && g(y).abs() < gx.abs() {
            return Ok(y);
        }
    }
    Ok(x)
}

/// One root per bracket.
pub fn solve_bracketed_roots<G: Fn(f64) -> f64>(g: G, brackets: &[(f64, f64)], tol: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(brackets.len());
    for &(lo, hi) in brackets {
        let r = bisect(&g, lo, hi)?;
        let scale = g(lo).abs().min(g(hi).abs()).max(1.0);
        if !(g(r).abs() <= tol * scale) && !(hi - lo < 1e-10) {
            // the residual check is only a guard; bisection already pinned the sign change
            let w = (hi - lo) * 1e-12;
            if !(g(r - w).signum() != g(r + w).signum()) {
                return Err(Error::NoSignChange(lo, hi));
            }
        }
        out.push(r);
    }
    Ok(out)
}

/// Every sign change of `g` on `samples` uniform sub-intervals of (lo, hi),
/// refined by bisection. Points where `g` is not finite are skipped.
pub fn scan_roots<G: Fn(f64) -> f64>(g: &G, lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    let mut pts: Vec<f64> = (0..=samples).map(|i| lo + (hi - lo) * i as f64 / samples as f64).collect();
    // dense near both ends to catch roots hugging a pole
    for k in 2..=12 {
        let off = (hi - lo) * 10f64.powi(-k);
        pts.push(lo + off);
        pts.push(hi - off);
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let vals: Vec<f64> = pts.iter().map(|&x| g(x)).collect();
    let mut out = Vec::new();
    for i in 0..pts.len() - 1 {
        let (fa, fb) = (vals[i], vals[i + 1]);
        if !fa.is_finite() || !fb.is_finite() {
            continue;
        }
        if fa == 0.0 {
            if i > 0 {
                out.push(pts[i]);
            }
            continue;
        }
        if fa.signum() != fb.signum() && fb != 0.0 {
            if let Ok(r) = bisect(g, pts[i], pts[i + 1]) {
                out.push(r);
            }
        }
    }
    out
}
