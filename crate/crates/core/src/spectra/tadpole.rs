//! Tadpole spectra. The head loop `e1` (k = 1) carries symmetric modes
//! `cos(μ(x - L1/2))` / `cosh(σ(x - L1/2))` and antisymmetric modes
//! `sin(2jπx/L1)`; the tail `e2` (k = k-) ends at a Dirichlet vertex.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use super::{normalized, EigenPair, Family, Operator, Spectrum};
use crate::error::{Error, Result};
use crate::func::{ClosedForm, PiecewiseFunction, Shape};
use crate::graph::{build_tadpole2, Network};
use crate::roots::{bisect, scan_roots};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymmetryClass {
    Antisymmetric,
    Symmetric,
}

impl SymmetryClass {
    pub fn of(p: &EigenPair) -> SymmetryClass {
        if p.family == Family::Antisymmetric { SymmetryClass::Antisymmetric } else { SymmetryClass::Symmetric }
    }
}

/// User-declared `L1/L2 = p/q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RationalRatio {
    pub p: u64,
    pub q: u64,
}

impl RationalRatio {
    pub fn new(p: u64, q: u64) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::InvalidArgument("ratio terms must be positive".into()));
        }
        let g = gcd(p, q);
        Ok(RationalRatio { p: p / g, q: q / g })
    }

    /// Pairs `(n1, n2)` with `(2 n1 - 1) q = n2 p`, smallest first.
    pub fn coincidences(&self, count: usize) -> Vec<(u64, u64)> {
        // coprime p, q: 2n1 - 1 = p m and n2 = q m, so p and m must be odd
        if self.p % 2 == 0 {
            return Vec::new();
        }
        (0..count as u64).map(|i| 2 * i + 1).map(|m| ((self.p * m).div_ceil(2), self.q * m)).collect()
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

fn check(l1: f64, l2: f64, k_minus: f64, n_max: usize) -> Result<Network> {
    if !(k_minus < 0.0) || !k_minus.is_finite() {
        return Err(Error::InvalidArgument(format!("k- must be negative, got {k_minus}")));
    }
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    build_tadpole2(l1, l2, 1.0, k_minus)
}

fn tadpole_fn(l1: f64, l2: f64, head: ClosedForm, tail: ClosedForm) -> PiecewiseFunction {
    PiecewiseFunction::closed(&[l1, l2], vec![head, tail])
}

fn antisymmetric(l1: f64, l2: f64, n_max: usize) -> Result<Vec<EigenPair>> {
    (1..=n_max)
        .map(|j| {
            let w = 2.0 * j as f64 * PI / l1;
            let f = normalized(tadpole_fn(l1, l2, ClosedForm::new(Shape::Sin, 1.0, w), ClosedForm::zero()))?;
            Ok(EigenPair { lambda: w * w, multiplicity: 1, family: Family::Antisymmetric, index: j, functions: vec![f], bracket: None })
        })
        .collect()
}

fn cos_centered(amp: f64, w: f64, l1: f64, hyperbolic: bool) -> ClosedForm {
    let shape = if hyperbolic { Shape::Cosh } else { Shape::Cos };
    ClosedForm { shape, amplitude: amp, frequency: w, shift: 0.5 * l1 }
}

/// `e^{-|y|} sinh y` and `e^{-|y|} cosh y`.
fn scaled_sh_ch(y: f64) -> (f64, f64) {
    let e = (-2.0 * y.abs()).exp();
    (y.signum() * 0.5 * (1.0 - e), 0.5 * (1.0 + e))
}

/// Roots of `g` on `(0, hi]` from `samples` uniform sub-intervals.
fn scan(g: &dyn Fn(f64) -> f64, hi: f64, samples: usize) -> Vec<f64> {
    let mut r = scan_roots(&|x| g(x), 0.0, hi, samples);
    r.retain(|&x| x > 1e-9);
    r.dedup_by(|a, b| (*a - *b).abs() < 1e-10 * b.max(1.0));
    r
}

/// First `n` roots, searching at most `16 (n + 2)` steps; some geometries
/// have no symmetric pseudo modes at all.
fn first_n(g: &dyn Fn(f64) -> f64, n: usize, step: f64) -> Vec<f64> {
    let mut hi = (n as f64 + 2.0) * step;
    loop {
        let r = scan(g, hi, 64 * (hi / step).ceil() as usize);
        if r.len() > n || hi >= 16.0 * (n as f64 + 2.0) * step {
            return r.into_iter().take(n).collect();
        }
        hi *= 2.0;
    }
}

/// Standard operator on the tadpole with `k1 = 1`, `k2 = k-`.
pub fn spectrum_tadpole_standard(l1: f64, l2: f64, k_minus: f64, n_max: usize) -> Result<Spectrum> {
    let net = check(l1, l2, k_minus, n_max)?;
    let s = (-k_minus).sqrt();
    let mut pairs = antisymmetric(l1, l2, n_max)?;

    // λ = μ² > 0: 2 tan(μL1/2) + s coth(μL2/s) = 0, written without poles
    let g = |mu: f64| {
        let (sh, ch) = scaled_sh_ch(mu * l2 / s);
        2.0 * (0.5 * mu * l1).sin() * sh + s * (0.5 * mu * l1).cos() * ch
    };
    for (i, mu) in first_n(&g, n_max, 2.0 * PI / l1).into_iter().enumerate() {
        let (th, ch) = ((mu * l2 / s).tanh(), (mu * l2 / s).cosh());
        // a cos(μL1/2) = b sinh(μL2/s)
        let head = cos_centered(th, mu, l1, false);
        let tail = ClosedForm::new(Shape::Sinh, (0.5 * mu * l1).cos() / ch, mu / s);
        let f = normalized(tadpole_fn(l1, l2, head, tail))?;
        pairs.push(EigenPair { lambda: mu * mu, multiplicity: 1, family: Family::Symmetric, index: i + 1, functions: vec![f], bracket: None });
    }

    // λ = -σ²: 2 tanh(σL1/2) - s cot(σL2/s) = 0, one root per (mπs/L2, (m+1)πs/L2)
    let h = |sg: f64| {
        let (sh, ch) = scaled_sh_ch(0.5 * sg * l1);
        2.0 * sh * (sg * l2 / s).sin() - s * ch * (sg * l2 / s).cos()
    };
    let step = PI * s / l2;
    for m in 0..n_max {
        let lo = if m == 0 { 1e-12 * step } else { m as f64 * step };
        let sg = bisect(&h, lo, (m + 1) as f64 * step)?;
        let head = cos_centered((sg * l2 / s).sin() / (0.5 * sg * l1).cosh(), sg, l1, true);
        let tail = ClosedForm::new(Shape::Sin, 1.0, sg / s);
        let f = normalized(tadpole_fn(l1, l2, head, tail))?;
        pairs.push(EigenPair {
            lambda: -sg * sg,
            multiplicity: 1,
            family: Family::Symmetric,
            index: m + 1,
            functions: vec![f],
            bracket: Some((m as f64 * step, (m + 1) as f64 * step)),
        });
    }
    Ok(Spectrum::assemble(Operator::Standard, n_max, net, pairs, Vec::new()))
}

/// `2 sin(μL1/2) sin(μL2) + |k-| cos(μL1/2) cos(μL2)`; its zeros are the
/// symmetric pseudo eigenvalues `μ²`, both the generic branch and the
/// coincidences `cos(μL1/2) = sin(μL2) = 0`.
pub fn tadpole_pseudo_symmetric(mu: f64, l1: f64, l2: f64, k_minus: f64) -> f64 {
    2.0 * (0.5 * mu * l1).sin() * (mu * l2).sin() - k_minus * (0.5 * mu * l1).cos() * (mu * l2).cos()
}

/// Null vector of the continuity and flux rows for a symmetric pseudo mode.
fn pseudo_symmetric_fn(mu: f64, l1: f64, l2: f64, k_minus: f64) -> Result<PiecewiseFunction> {
    let (c, s1) = ((0.5 * mu * l1).cos(), (0.5 * mu * l1).sin());
    let (s2, c2) = ((mu * l2).sin(), (mu * l2).cos());
    // rows: [c, -s2] and [-2 s1, k- c2] acting on (a, b)
    let r1 = (c, -s2);
    let r2 = (-2.0 * s1, k_minus * c2);
    let pick = if r1.0.hypot(r1.1) >= r2.0.hypot(r2.1) { r1 } else { r2 };
    let (a, b) = (-pick.1, pick.0);
    normalized(tadpole_fn(l1, l2, cos_centered(a, mu, l1, false), ClosedForm::new(Shape::Sin, b, mu)))
}

/// Pseudo operator on the tadpole. With `ratio` declared, coincidence
/// eigenvalues `(2n1-1)²π²/L1² = n2²π²/L2²` are placed exactly.
pub fn spectrum_tadpole_pseudo(l1: f64, l2: f64, k_minus: f64, n_max: usize) -> Result<Spectrum> {
    spectrum_tadpole_pseudo_with_ratio(l1, l2, k_minus, n_max, None)
}

pub fn spectrum_tadpole_pseudo_with_ratio(l1: f64, l2: f64, k_minus: f64, n_max: usize, ratio: Option<RationalRatio>) -> Result<Spectrum> {
    let net = check(l1, l2, k_minus, n_max)?;
    if let Some(r) = ratio {
        if ((r.p as f64 / r.q as f64) - l1 / l2).abs() > 1e-12 * (l1 / l2) {
            return Err(Error::InvalidArgument(format!("declared ratio {}/{} does not match lengths", r.p, r.q)));
        }
    }
    let mut pairs = antisymmetric(l1, l2, n_max)?;
    let g = |mu: f64| tadpole_pseudo_symmetric(mu, l1, l2, k_minus);
    let mut roots = first_n(&g, n_max, PI / l1.max(l2));
    let mut exact: Vec<f64> = Vec::new();
    if let Some(r) = ratio {
        for (n1, _) in r.coincidences(n_max) {
            let mu = (2 * n1 - 1) as f64 * PI / l1;
            if roots.last().map_or(true, |&t| mu <= t) {
                exact.push(mu);
            }
        }
        roots.retain(|&t| !exact.iter().any(|&m| (m - t).abs() < 1e-8 * m));
        roots.extend(exact.iter().copied());
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        roots.truncate(n_max);
    }
    for (i, mu) in roots.into_iter().enumerate() {
        let f = pseudo_symmetric_fn(mu, l1, l2, k_minus)?;
        let family = if exact.contains(&mu) { Family::PseudoHalfInteger } else { Family::Symmetric };
        pairs.push(EigenPair { lambda: mu * mu, multiplicity: 1, family, index: i + 1, functions: vec![f], bracket: None });
    }
    // λ = -σ²: 2 tanh(σL1/2) tanh(σL2) = |k-| is increasing in σ, so there
    // is exactly one root when |k-| < 2 and none otherwise
    if k_minus > -2.0 {
        let h = |sg: f64| 2.0 * (0.5 * sg * l1).tanh() * (sg * l2).tanh() + k_minus;
        let mut hi = 1.0 / l1.min(l2);
        while h(hi) <= 0.0 && hi < 1e6 {
            hi *= 2.0;
        }
        if h(hi) > 0.0 {
            let sg = bisect(&h, 0.0, hi)?;
            let head = cos_centered((sg * l2).tanh() / (0.5 * sg * l1).cosh(), sg, l1, true);
            let tail = ClosedForm::new(Shape::Sinh, 1.0 / (sg * l2).cosh(), sg);
            let f = normalized(tadpole_fn(l1, l2, head, tail))?;
            pairs.push(EigenPair { lambda: -sg * sg, multiplicity: 1, family: Family::Symmetric, index: 1, functions: vec![f], bracket: None });
        }
    }
    Ok(Spectrum::assemble(Operator::Pseudo, n_max, net, pairs, Vec::new()))
}
