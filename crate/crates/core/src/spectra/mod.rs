//! Eigenvalues and closed-form eigenfunctions of the standard operator
//! `-(k ψ')'` and the pseudo operator `-ψ''` (with `k`-weighted Kirchhoff
//! flux) on stars and tadpoles.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use crate::basis::{inner_product, norm, Weight};
use crate::error::{Error, Result};
use crate::func::{EdgeFn, PiecewiseFunction};
use crate::graph::Network;

mod secular;
mod star;
mod tadpole;

pub use secular::{Arm, secular_function};
pub use star::{
    spectrum_star_equilateral_pseudo, spectrum_star_equilateral_standard, spectrum_star_irrational_pseudo,
    spectrum_star_irrational_standard, spectrum_star_mixed_pseudo, spectrum_star_mixed_standard,
};
pub use tadpole::{
    spectrum_tadpole_pseudo, spectrum_tadpole_pseudo_with_ratio, spectrum_tadpole_standard, tadpole_pseudo_symmetric, RationalRatio,
    SymmetryClass,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operator {
    Standard,
    Pseudo,
}

impl Operator {
    pub fn name(self) -> &'static str {
        match self {
            Operator::Standard => "standard",
            Operator::Pseudo => "pseudo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    NuPositiveTrig,
    ThetaNegativeTrig,
    DispersionA,
    DispersionB,
    PseudoHalfInteger,
    PseudoInteger,
    /// Explicit trigonometric families of mixed-boundary stars, numbered
    /// Dirichlet+, Neumann+, Dirichlet-, Neumann-.
    MixedFamily(u8),
    Transcendental,
    Antisymmetric,
    Symmetric,
}

impl Family {
    pub fn name(self) -> String {
        use alloc::format;
        match self {
            Family::MixedFamily(i) => format!("MixedFamily({i})"),
            f => format!("{f:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub lambda: f64,
    pub multiplicity: usize,
    pub family: Family,
    /// Position inside its family; 0 marks the low root of a dispersion family.
    pub index: usize,
    pub functions: Vec<PiecewiseFunction>,
    pub bracket: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Nonnegative eigenvalues, ascending.
    pub positive: Vec<EigenPair>,
    /// Negative eigenvalues, descending toward minus infinity.
    pub negative: Vec<EigenPair>,
    pub operator: Operator,
    pub n_max: usize,
    pub network: Network,
    pub warnings: Vec<String>,
}

/// One basis function of the flattened spectrum.
#[derive(Debug, Clone, Copy)]
pub struct Mode<'a> {
    pub lambda: f64,
    pub family: Family,
    pub pair: usize,
    pub basis: usize,
    pub function: &'a PiecewiseFunction,
}

impl Spectrum {
    pub(crate) fn assemble(operator: Operator, n_max: usize, network: Network, mut pairs: Vec<EigenPair>, warnings: Vec<String>) -> Self {
        let mut negative: Vec<EigenPair> = Vec::new();
        let mut positive: Vec<EigenPair> = Vec::new();
        for p in pairs.drain(..) {
            if p.lambda < 0.0 { negative.push(p) } else { positive.push(p) }
        }
        let key = |p: &EigenPair| (p.family.name(), p.index);
        positive.sort_by(|a, b| a.lambda.partial_cmp(&b.lambda).unwrap().then_with(|| key(a).cmp(&key(b))));
        negative.sort_by(|a, b| b.lambda.partial_cmp(&a.lambda).unwrap().then_with(|| key(a).cmp(&key(b))));
        Spectrum { positive, negative, operator, n_max, network, warnings }
    }

    /// Positive pairs followed by negative pairs; CSV row order.
    pub fn pairs(&self) -> impl Iterator<Item = &EigenPair> {
        self.positive.iter().chain(self.negative.iter())
    }

    pub fn num_pairs(&self) -> usize {
        self.positive.len() + self.negative.len()
    }

    /// Every basis function, ordered by |λ| with positive values first on ties.
    pub fn modes(&self) -> Vec<Mode<'_>> {
        let mut out: Vec<Mode<'_>> = Vec::new();
        for (i, p) in self.pairs().enumerate() {
            for (b, f) in p.functions.iter().enumerate() {
                out.push(Mode { lambda: p.lambda, family: p.family, pair: i, basis: b, function: f });
            }
        }
        out.sort_by(|a, b| {
            a.lambda
                .abs()
                .partial_cmp(&b.lambda.abs())
                .unwrap()
                .then_with(|| (a.lambda < 0.0).cmp(&(b.lambda < 0.0)))
                .then_with(|| a.pair.cmp(&b.pair))
                .then_with(|| a.basis.cmp(&b.basis))
        });
        out
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.modes().iter().map(|m| m.lambda).collect()
    }
}

/// `cos μ sinh(rμ) - c sin μ cosh(rμ)`, scaled by `e^{-r|μ|}` once `r|μ| > 30`.
pub fn dispersion_general(mu: f64, r: f64, c: f64) -> f64 {
    let y = r * mu;
    if y.abs() <= 30.0 {
        mu.cos() * y.sinh() - c * mu.sin() * y.cosh()
    } else {
        let e = (-2.0 * y.abs()).exp();
        let sh = y.signum() * 0.5 * (1.0 - e);
        let ch = 0.5 * (1.0 + e);
        mu.cos() * sh - c * mu.sin() * ch
    }
}

/// Dispersion function of the negative family of an equilateral Dirichlet
/// star with unit lengths.
pub fn dispersion_equilateral(mu: f64, d: usize, n: usize, s: f64) -> f64 {
    dispersion_general(mu, s, d as f64 / (s * (n - d) as f64))
}

/// `(sinh(2sa) sinh(2b) - sin(2a) sin(2sb)) / 4`.
pub fn det2_positivity(a: f64, b: f64, s: f64) -> f64 {
    0.25 * ((2.0 * s * a).sinh() * (2.0 * b).sinh() - (2.0 * a).sin() * (2.0 * s * b).sin())
}

/// Fails when `x` is within 1e-9 of a fraction with denominator at most 64.
pub fn check_irrational(x: f64) -> Result<()> {
    let (mut h0, mut h1) = (0.0f64, 1.0f64);
    let (mut k0, mut k1) = (1.0f64, 0.0f64);
    let mut y = x;
    for _ in 0..64 {
        let a = y.floor();
        let h2 = a * h1 + h0;
        let k2 = a * k1 + k0;
        if k2 > 64.0 {
            break;
        }
        if (x - h2 / k2).abs() < 1e-9 {
            return Err(Error::RationalRatioSuspected(x));
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = y - a;
        if frac < 1e-15 {
            break;
        }
        y = 1.0 / frac;
    }
    Ok(())
}

/// Pairwise length ratios must all look irrational.
pub fn check_lengths_irrational(lengths: &[f64]) -> Result<()> {
    for i in 0..lengths.len() {
        for j in i + 1..lengths.len() {
            check_irrational(lengths[i] / lengths[j])?;
        }
    }
    Ok(())
}

pub(crate) fn is_equilateral(lengths: &[f64]) -> bool {
    lengths.iter().all(|&l| (l - lengths[0]).abs() <= 1e-14 * lengths[0])
}

/// Modified Gram-Schmidt under the plain product, then the first nonzero
/// coefficient of each function is made positive.
pub(crate) fn orthonormalize(fs: Vec<PiecewiseFunction>) -> Result<Vec<PiecewiseFunction>> {
    let mut out: Vec<PiecewiseFunction> = Vec::with_capacity(fs.len());
    for f in fs {
        let mut v = f;
        for q in &out {
            let c = inner_product(&v, q, &Weight::Plain)?;
            v = PiecewiseFunction::linear_combination(&[1.0, -c], &[&v, q])?;
        }
        let n = norm(&v);
        if !(n > 1e-12) {
            return Err(Error::Internal("dependent eigenspace spanning set".into()));
        }
        out.push(sign_fix(v.scale(1.0 / n)));
    }
    Ok(out)
}

pub(crate) fn normalized(f: PiecewiseFunction) -> Result<PiecewiseFunction> {
    let n = norm(&f);
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::Internal("zero eigenfunction".into()));
    }
    Ok(sign_fix(f.scale(1.0 / n)))
}

pub(crate) fn sign_fix(f: PiecewiseFunction) -> PiecewiseFunction {
    let lead = f.edges.iter().find_map(|e| match e {
        EdgeFn::Closed(c) if c.amplitude.abs() > 1e-14 => Some(c.amplitude),
        EdgeFn::Sum(t) => t.iter().map(|c| c.amplitude).find(|a| a.abs() > 1e-14),
        EdgeFn::Sampled(s) => s.values.iter().copied().find(|v| v.abs() > 1e-14),
        _ => None,
    });
    match lead {
        Some(a) if a < 0.0 => f.scale(-1.0),
        _ => f,
    }
}

/// `(nπ)` or `((n - 1/2)π)`, the n-th zero (n ≥ 1) of sin or cos.
pub(crate) fn trig_zero(n: usize, dirichlet: bool) -> f64 {
    if dirichlet { n as f64 * PI } else { (n as f64 - 0.5) * PI }
}
