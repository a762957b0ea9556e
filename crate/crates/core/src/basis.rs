//! Inner products, Gram diagnostics, the transform behind the Riesz-basis
//! argument, and truncated biorthogonal families.

use alloc::vec::Vec;
use nalgebra::DMatrix;
#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::func::PiecewiseFunction;
use crate::quad::GaussLegendre;
use crate::spectra::{Family, Operator, Spectrum};

#[derive(Debug, Clone, PartialEq)]
pub enum Weight {
    Plain,
    /// Per-edge weights, usually the conductivities; indefinite when signs mix.
    KWeighted(Vec<f64>),
}

/// Quadrature order used for every inner product.
pub const INNER_ORDER: usize = 16;

fn rule() -> GaussLegendre {
    GaussLegendre::any(INNER_ORDER)
}

fn edge_panels(f: &PiecewiseFunction, g: &PiecewiseFunction, e: usize) -> usize {
    let w = f.edges[e].frequency() + g.edges[e].frequency();
    let p = (w * f.lengths[e] / 2.0).ceil();
    if p.is_finite() { (p as usize).clamp(16, 1 << 14) } else { 16 }
}

fn edge_integral(rule: &GaussLegendre, f: &PiecewiseFunction, g: &PiecewiseFunction, e: usize) -> f64 {
    if f.edge_is_zero(e) || g.edge_is_zero(e) {
        return 0.0;
    }
    let p = edge_panels(f, g, e);
    rule.integrate(|x| f.eval(e, x) * g.eval(e, x), 0.0, f.lengths[e], p)
}

pub fn inner_product(f: &PiecewiseFunction, g: &PiecewiseFunction, weight: &Weight) -> Result<f64> {
    if f.num_edges() != g.num_edges() || f.lengths != g.lengths {
        return Err(Error::ShapeMismatch);
    }
    if let Weight::KWeighted(k) = weight {
        if k.len() != f.num_edges() {
            return Err(Error::ShapeMismatch);
        }
    }
    let r = rule();
    let mut s = 0.0;
    for e in 0..f.num_edges() {
        let w = match weight {
            Weight::Plain => 1.0,
            Weight::KWeighted(k) => k[e],
        };
        s += w * edge_integral(&r, f, g, e);
    }
    Ok(s)
}

pub fn norm(f: &PiecewiseFunction) -> f64 {
    inner_product(f, f, &Weight::Plain).map(|v| v.max(0.0).sqrt()).unwrap_or(f64::NAN)
}

/// Symmetric Gram matrix of `fs`.
pub fn gram_matrix(fs: &[&PiecewiseFunction], weight: &Weight) -> Result<DMatrix<f64>> {
    let n = fs.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = inner_product(fs[i], fs[j], weight)?;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramReport {
    pub size: usize,
    pub max_offdiag: f64,
    pub max_diag_dev: f64,
    pub condition_estimate: f64,
}

impl GramReport {
    pub fn from_matrix(g: &DMatrix<f64>) -> Self {
        let n = g.nrows();
        let mut off: f64 = 0.0;
        let mut diag: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    diag = diag.max((g[(i, i)] - 1.0).abs());
                } else {
                    off = off.max(g[(i, j)].abs());
                }
            }
        }
        let sv = g.clone().svd(false, false).singular_values;
        let (mx, mn) = sv.iter().fold((0.0f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
        let cond = if mn > 0.0 { (mx / mn).max(1.0) } else { f64::INFINITY };
        GramReport { size: n, max_offdiag: off, max_diag_dev: diag, condition_estimate: cond }
    }

    pub fn max_deviation(&self) -> f64 {
        self.max_offdiag.max(self.max_diag_dev)
    }
}

/// Gram report over every basis function of the spectrum, in flattened order.
pub fn gram_report(spectrum: &Spectrum, weight: &Weight) -> Result<GramReport> {
    let modes = spectrum.modes();
    if modes.is_empty() {
        return Err(Error::InvalidArgument("empty spectrum".into()));
    }
    let fs: Vec<&PiecewiseFunction> = modes.iter().map(|m| m.function).collect();
    Ok(GramReport::from_matrix(&gram_matrix(&fs, weight)?))
}

/// Divides the positive-edge components by `factor` and renormalizes.
pub fn scale_positive_edges(f: &PiecewiseFunction, conductivities: &[f64], factor: f64) -> PiecewiseFunction {
    let mut out = f.clone();
    for (e, k) in conductivities.iter().enumerate() {
        if *k > 0.0 {
            let one = PiecewiseFunction { lengths: alloc::vec![f.lengths[e]], edges: alloc::vec![f.edges[e].clone()] };
            out.edges[e] = one.scale(1.0 / factor).edges.pop().unwrap();
        }
    }
    let n = norm(&out);
    if n > 0.0 { out.scale(1.0 / n) } else { out }
}

/// Applies `T` (positive edges divided by `k-`) on the integer family of a
/// pseudo spectrum and renormalizes; half-integer functions are untouched.
pub fn riesz_transform(spectrum: &Spectrum, k_minus: f64) -> Result<Spectrum> {
    riesz_transform_with(spectrum, k_minus)
}

/// Same map with an arbitrary factor; `1/k-` undoes [`riesz_transform`].
pub fn riesz_transform_with(spectrum: &Spectrum, factor: f64) -> Result<Spectrum> {
    if spectrum.operator != Operator::Pseudo {
        return Err(Error::WrongOperator);
    }
    let k = spectrum.network.conductivities();
    let mut out = spectrum.clone();
    for p in out.positive.iter_mut().chain(out.negative.iter_mut()) {
        if p.family == Family::PseudoInteger {
            p.functions = p.functions.iter().map(|f| scale_positive_edges(f, &k, factor)).collect();
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiorthogonalFamily {
    pub truncation: usize,
    /// Column `k` holds the coefficients of `σ^k` in the basis `ψ^1..ψ^n`.
    pub coefficients: DMatrix<f64>,
    pub sigma: Vec<PiecewiseFunction>,
    pub residual: f64,
    pub condition: f64,
}

/// `σ^k = Σ_m (G^{-1})_{mk} ψ^m` on the first `truncation` flattened modes.
pub fn biorthogonal_family(spectrum: &Spectrum, truncation: usize) -> Result<BiorthogonalFamily> {
    let modes = spectrum.modes();
    if truncation == 0 || truncation > modes.len() {
        return Err(Error::TruncationTooLarge { requested: truncation, available: modes.len() });
    }
    let fs: Vec<&PiecewiseFunction> = modes[..truncation].iter().map(|m| m.function).collect();
    let g = gram_matrix(&fs, &Weight::Plain)?;
    let cond = GramReport::from_matrix(&g).condition_estimate;
    if !(cond < 1e8) {
        return Err(Error::IllConditionedGram(cond));
    }
    let inv = g.clone().try_inverse().ok_or(Error::IllConditionedGram(f64::INFINITY))?;
    let sigma: Vec<PiecewiseFunction> = (0..truncation)
        .map(|k| {
            let c: Vec<f64> = inv.column(k).iter().copied().collect();
            PiecewiseFunction::linear_combination(&c, &fs)
        })
        .collect::<Result<_>>()?;
    // <ψ^n, σ^k> = (G G^{-1})_{nk}
    let prod = &g * &inv;
    let mut residual: f64 = 0.0;
    for i in 0..truncation {
        for j in 0..truncation {
            let d = if i == j { 1.0 } else { 0.0 };
            residual = residual.max((prod[(i, j)] - d).abs());
        }
    }
    Ok(BiorthogonalFamily { truncation, coefficients: inv, sigma, residual, condition: cond })
}
