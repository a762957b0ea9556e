//! Star spectra: equilateral families in closed form, everything else from
//! the junction secular function.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use super::secular::{arm_mode, first_roots, min_end_value, Arm};
use super::{check_lengths_irrational, dispersion_general, is_equilateral, normalized, orthonormalize, trig_zero};
use super::{EigenPair, Family, Operator, Spectrum};
use crate::error::{Error, Result};
use crate::func::{ClosedForm, PiecewiseFunction, Shape};
use crate::graph::{build_star, Boundary, Network, PartitionSummary};
use crate::roots::bisect;
use crate::wellposed::{resonance_verdict, RESONANCE_TOL};

fn check_well_posed(net: &Network) -> Result<()> {
    let v = resonance_verdict(net)?;
    if !v.well_posed {
        return Err(Error::ResonantConductivity { ratio: v.forbidden_ratio.or(v.critical_value).unwrap_or(0.0) });
    }
    Ok(())
}

fn check_common(k_minus: f64, n_max: usize) -> Result<()> {
    if !(k_minus < 0.0) || !k_minus.is_finite() {
        return Err(Error::InvalidArgument(format!("k- must be negative, got {k_minus}")));
    }
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    Ok(())
}

fn arms_of(net: &Network) -> Vec<Arm> {
    (0..net.num_edges())
        .map(|j| Arm { length: net.edges[j].length, k: net.edges[j].conductivity, dirichlet: net.star_boundary(j) == Boundary::Dirichlet })
        .collect()
}

/// Orthonormal basis of `{α : Σ α = 0}` on `m` coordinates, from
/// Gram-Schmidt on `e_0 - e_j`.
fn sum_zero_basis(m: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for j in 1..m {
        let mut v = vec![0.0; m];
        v[0] = 1.0;
        v[j] = -1.0;
        for q in &out {
            let c: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            for (a, b) in v.iter_mut().zip(q) {
                *a -= c * b;
            }
        }
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        out.push(v.iter().map(|a| a / n).collect());
    }
    out
}

/// Basis of `{α : Σ_j k_j α_j = 0}` on `edges`, with conductivities `1` on
/// `pos` and `k-` on `neg`: sum-zero vectors inside each block plus one
/// vector constant on each block. Orthonormal, and stays orthogonal after
/// the positive block is rescaled.
fn flux_free_basis(n_edges: usize, pos: &[usize], neg: &[usize], k_minus: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for block in [pos, neg] {
        for v in sum_zero_basis(block.len()) {
            let mut full = vec![0.0; n_edges];
            for (i, &e) in block.iter().enumerate() {
                full[e] = v[i];
            }
            out.push(full);
        }
    }
    if !pos.is_empty() && !neg.is_empty() {
        let (a, b) = (-k_minus * neg.len() as f64, pos.len() as f64);
        let mut full = vec![0.0; n_edges];
        for &e in pos {
            full[e] = a;
        }
        for &e in neg {
            full[e] = b;
        }
        let n = full.iter().map(|x| x * x).sum::<f64>().sqrt();
        out.push(full.iter().map(|x| x / n).collect());
    }
    out
}

/// Functions `α_j u(ω x)` on equal-length edges for each coefficient vector.
fn vector_functions(lengths: &[f64], shape: Shape, w: f64, vectors: &[Vec<f64>]) -> Result<Vec<PiecewiseFunction>> {
    let fs = vectors
        .iter()
        .map(|v| PiecewiseFunction::closed(lengths, v.iter().map(|&a| if a == 0.0 { ClosedForm::zero() } else { ClosedForm::new(shape, a, w) }).collect()))
        .collect();
    orthonormalize(fs)
}

fn block_pair(lambda: f64, family: Family, index: usize, functions: Vec<PiecewiseFunction>) -> Option<EigenPair> {
    (!functions.is_empty()).then_some(EigenPair { lambda, multiplicity: functions.len(), family, index, functions, bracket: None })
}

fn secular_pairs(arms: &[Arm], op: Operator, n_max: usize, sides: &[f64], warnings: &mut Vec<String>) -> Result<Vec<EigenPair>> {
    let mut out = Vec::new();
    for &sign in sides {
        for (i, t) in first_roots(arms, op, sign, n_max).into_iter().enumerate() {
            let lambda = sign * t * t;
            if min_end_value(arms, op, lambda) < 1e-8 {
                warnings.push(format!("eigenvalue {lambda} nearly coincides with an edge Dirichlet eigenvalue"));
            }
            let f = normalized(arm_mode(arms, op, lambda))?;
            out.push(EigenPair { lambda, multiplicity: 1, family: Family::Transcendental, index: i + 1, functions: vec![f], bracket: None });
        }
    }
    Ok(out)
}

fn dirichlet_star(d: usize, n: usize, k_minus: f64) -> Result<Network> {
    if d == 0 || d >= n {
        return Err(Error::BadPartition { d, n });
    }
    let k: Vec<f64> = (0..n).map(|j| if j < d { 1.0 } else { k_minus }).collect();
    build_star(&vec![1.0; n], &k, &vec![Boundary::Dirichlet; n])
}

/// Standard operator on the unit equilateral Dirichlet star with `k+ = 1`.
///
/// At the resonant ratio `|k-| = D/(N-D)` the spectrum is still discrete;
/// `0` becomes a simple eigenvalue with eigenfunction `x` on every edge and
/// neither dispersion family has a root in `(0, π/2)`.
pub fn spectrum_star_equilateral_standard(d: usize, n: usize, k_minus: f64, n_max: usize) -> Result<Spectrum> {
    check_common(k_minus, n_max)?;
    let net = dirichlet_star(d, n, k_minus)?;
    let s = (-k_minus).sqrt();
    let lengths = net.lengths();
    let arms = arms_of(&net);
    let pos: Vec<usize> = (0..d).collect();
    let neg: Vec<usize> = (d..n).collect();
    let lift = |block: &[usize], v: Vec<f64>| {
        let mut full = vec![0.0; n];
        for (i, &e) in block.iter().enumerate() {
            full[e] = v[i];
        }
        full
    };
    let nu_vecs: Vec<Vec<f64>> = sum_zero_basis(d).into_iter().map(|v| lift(&pos, v)).collect();
    let theta_vecs: Vec<Vec<f64>> = sum_zero_basis(n - d).into_iter().map(|v| lift(&neg, v)).collect();
    let mut pairs = Vec::new();
    let ratio = d as f64 / (n - d) as f64;
    let threshold = ((-k_minus - ratio) / ratio).abs() < RESONANCE_TOL;
    if threshold {
        let x = ClosedForm { shape: Shape::Affine, amplitude: 1.0, frequency: 1.0, shift: 1.0 };
        let f = normalized(PiecewiseFunction::closed(&lengths, vec![x; n]))?;
        pairs.push(EigenPair { lambda: 0.0, multiplicity: 1, family: Family::DispersionA, index: 0, functions: vec![f], bracket: None });
    }
    for m in 1..=n_max {
        let w = m as f64 * PI;
        if let Some(p) = block_pair(w * w, Family::NuPositiveTrig, m, vector_functions(&lengths, Shape::Sin, w, &nu_vecs)?) {
            pairs.push(p);
        }
        if let Some(p) = block_pair(k_minus * w * w, Family::ThetaNegativeTrig, m, vector_functions(&lengths, Shape::Sin, w, &theta_vecs)?) {
            pairs.push(p);
        }
    }
    // b: tan b = D/(s(N-D)) tanh(b/s), λ = b²; a: tan a = s(N-D)/D tanh(sa), λ = k- a²
    let fams = [
        (Family::DispersionB, 1.0 / s, s * (n - d) as f64 / d as f64, 1.0, !threshold && -k_minus < ratio),
        (Family::DispersionA, s, d as f64 / (s * (n - d) as f64), k_minus, !threshold && -k_minus > ratio),
    ];
    for (family, r, c, scale, low) in fams {
        let g = |mu: f64| dispersion_general(mu, r, c);
        let first = if low { 0 } else { 1 };
        for m in first..=n_max {
            let (lo, hi) = (m as f64 * PI, (m + 1) as f64 * PI);
            let root = if m == 0 { bisect(&g, 1e-6, 0.5 * PI)? } else { bisect(&g, lo, hi)? };
            let lambda = scale * root * root;
            let f = normalized(arm_mode(&arms, Operator::Standard, lambda))?;
            pairs.push(EigenPair { lambda, multiplicity: 1, family, index: m, functions: vec![f], bracket: Some((lo, hi)) });
        }
    }
    Ok(Spectrum::assemble(Operator::Standard, n_max, net, pairs, Vec::new()))
}

fn irrational_star(lengths: &[f64], d: usize, k_minus: f64) -> Result<Network> {
    let n = lengths.len();
    if d == 0 || d >= n {
        return Err(Error::BadPartition { d, n });
    }
    check_lengths_irrational(lengths)?;
    let k: Vec<f64> = (0..n).map(|j| if j < d { 1.0 } else { k_minus }).collect();
    let net = build_star(lengths, &k, &vec![Boundary::Dirichlet; n])?;
    check_well_posed(&net)?;
    Ok(net)
}

/// Standard operator on a Dirichlet star with pairwise irrational length
/// ratios; the first `D` lengths carry `k+ = 1`.
pub fn spectrum_star_irrational_standard(lengths: &[f64], d: usize, k_minus: f64, n_max: usize) -> Result<Spectrum> {
    check_common(k_minus, n_max)?;
    let net = irrational_star(lengths, d, k_minus)?;
    let mut warnings = Vec::new();
    let pairs = secular_pairs(&arms_of(&net), Operator::Standard, n_max, &[1.0, -1.0], &mut warnings)?;
    Ok(Spectrum::assemble(Operator::Standard, n_max, net, pairs, warnings))
}

/// Pseudo operator on the unit equilateral Dirichlet star:
/// `λ_m = m²π²/4`, simple for odd `m`, multiplicity `N-1` for even `m`.
pub fn spectrum_star_equilateral_pseudo(d: usize, n: usize, k_minus: f64, n_max: usize) -> Result<Spectrum> {
    check_common(k_minus, n_max)?;
    let net = dirichlet_star(d, n, k_minus)?;
    check_well_posed(&net)?;
    let lengths = net.lengths();
    let pos: Vec<usize> = (0..d).collect();
    let neg: Vec<usize> = (d..n).collect();
    let even = flux_free_basis(n, &pos, &neg, k_minus);
    let ones = vec![vec![1.0; n]];
    let mut pairs = Vec::new();
    for m in 1..=n_max {
        let w = m as f64 * PI / 2.0;
        let lambda = (m * m) as f64 * PI * PI / 4.0;
        let (family, vecs) = if m % 2 == 1 { (Family::PseudoHalfInteger, &ones) } else { (Family::PseudoInteger, &even) };
        if let Some(p) = block_pair(lambda, family, m, vector_functions(&lengths, Shape::Sin, w, vecs)?) {
            pairs.push(p);
        }
    }
    let mut warnings = Vec::new();
    // negative pseudo eigenvalues, if any, come from the secular function
    pairs.extend(secular_pairs(&arms_of(&net), Operator::Pseudo, n_max, &[-1.0], &mut warnings)?);
    Ok(Spectrum::assemble(Operator::Pseudo, n_max, net, pairs, warnings))
}

/// Pseudo operator on a Dirichlet star with irrational length ratios.
pub fn spectrum_star_irrational_pseudo(lengths: &[f64], d: usize, k_minus: f64, n_max: usize) -> Result<Spectrum> {
    check_common(k_minus, n_max)?;
    let net = irrational_star(lengths, d, k_minus)?;
    let mut warnings = Vec::new();
    let pairs = secular_pairs(&arms_of(&net), Operator::Pseudo, n_max, &[1.0, -1.0], &mut warnings)?;
    Ok(Spectrum::assemble(Operator::Pseudo, n_max, net, pairs, warnings))
}

/// Star with edges in class order Dirichlet+, Neumann+, Dirichlet-, Neumann-.
fn mixed_star(counts: &PartitionSummary, k_minus: f64, lengths: &[f64]) -> Result<Network> {
    if !counts.is_consistent() || counts.n != lengths.len() || counts.n < 2 {
        return Err(Error::InvalidArgument(format!("{} lengths for {} edges", lengths.len(), counts.n)));
    }
    if counts.d == 0 || counts.d == counts.n {
        return Err(Error::BadPartition { d: counts.d, n: counts.n });
    }
    let classes = [
        (counts.nd_plus, 1.0, Boundary::Dirichlet),
        (counts.nn_plus, 1.0, Boundary::Neumann),
        (counts.nd_minus, k_minus, Boundary::Dirichlet),
        (counts.nn_minus, k_minus, Boundary::Neumann),
    ];
    let (mut k, mut b) = (Vec::new(), Vec::new());
    for (c, kk, bb) in classes {
        k.extend(core::iter::repeat(kk).take(c));
        b.extend(core::iter::repeat(bb).take(c));
    }
    let net = build_star(lengths, &k, &b)?;
    if !is_equilateral(lengths) {
        check_lengths_irrational(lengths)?;
    }
    check_well_posed(&net)?;
    Ok(net)
}

fn class_ranges(c: &PartitionSummary) -> [Vec<usize>; 4] {
    let mut start = 0;
    [c.nd_plus, c.nn_plus, c.nd_minus, c.nn_minus].map(|m| {
        let r: Vec<usize> = (start..start + m).collect();
        start += m;
        r
    })
}

/// Standard operator on a mixed-boundary star, equilateral or with
/// irrational length ratios.
pub fn spectrum_star_mixed_standard(counts: PartitionSummary, k_minus: f64, lengths: &[f64], n_max: usize) -> Result<Spectrum> {
    check_common(k_minus, n_max)?;
    let net = mixed_star(&counts, k_minus, lengths)?;
    let arms = arms_of(&net);
    let mut warnings = Vec::new();
    let mut pairs = Vec::new();
    if is_equilateral(lengths) {
        let l = lengths[0];
        let n = counts.n;
        for (i, block) in class_ranges(&counts).iter().enumerate() {
            let vecs: Vec<Vec<f64>> = sum_zero_basis(block.len())
                .into_iter()
                .map(|v| {
                    let mut full = vec![0.0; n];
                    for (a, &e) in block.iter().enumerate() {
                        full[e] = v[a];
                    }
                    full
                })
                .collect();
            let dirichlet = i % 2 == 0;
            let scale = if i < 2 { 1.0 } else { k_minus };
            let shape = if dirichlet { Shape::Sin } else { Shape::Cos };
            for m in 1..=n_max {
                let w = trig_zero(m, dirichlet) / l;
                if let Some(p) = block_pair(scale * w * w, Family::MixedFamily(i as u8 + 1), m, vector_functions(lengths, shape, w, &vecs)?) {
                    pairs.push(p);
                }
            }
        }
    }
    pairs.extend(secular_pairs(&arms, Operator::Standard, n_max, &[1.0, -1.0], &mut warnings)?);
    Ok(Spectrum::assemble(Operator::Standard, n_max, net, pairs, warnings))
}

/// Pseudo operator on a mixed-boundary star. In the equilateral case the
/// integer family lives on Dirichlet edges and the half-integer family on
/// Neumann edges, each cut down by one flux constraint.
pub fn spectrum_star_mixed_pseudo(counts: PartitionSummary, k_minus: f64, lengths: &[f64], n_max: usize) -> Result<Spectrum> {
    check_common(k_minus, n_max)?;
    let net = mixed_star(&counts, k_minus, lengths)?;
    let arms = arms_of(&net);
    let mut warnings = Vec::new();
    let mut pairs = Vec::new();
    if is_equilateral(lengths) {
        let l = lengths[0];
        let [dp, np, dm, nm] = class_ranges(&counts);
        let n = counts.n;
        let dir = flux_free_basis(n, &dp, &dm, k_minus);
        let neu = flux_free_basis(n, &np, &nm, k_minus);
        for m in 1..=n_max {
            let w = m as f64 * PI / l;
            if let Some(p) = block_pair(w * w, Family::PseudoInteger, m, vector_functions(lengths, Shape::Sin, w, &dir)?) {
                pairs.push(p);
            }
            let w = trig_zero(m, false) / l;
            if let Some(p) = block_pair(w * w, Family::PseudoHalfInteger, m, vector_functions(lengths, Shape::Cos, w, &neu)?) {
                pairs.push(p);
            }
        }
    }
    pairs.extend(secular_pairs(&arms, Operator::Pseudo, n_max, &[1.0, -1.0], &mut warnings)?);
    Ok(Spectrum::assemble(Operator::Pseudo, n_max, net, pairs, warnings))
}
