//! Spectral propagators: Schrödinger groups and the heat flow, exact in time.

use alloc::vec::Vec;
use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use crate::basis::{biorthogonal_family, gram_matrix, inner_product, Weight};
use crate::error::{Error, Result};
use crate::func::{uniform_grid, EdgeFn, PiecewiseFunction, Sampled, EXPORT_POINTS};
use crate::spectra::{Operator, Spectrum};

/// Coefficients of a state in the first `truncation` flattened modes of a spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub operator: Operator,
    pub lambdas: Vec<f64>,
    pub coefficients: Vec<Complex64>,
    pub truncation: usize,
    pub modes: Vec<PiecewiseFunction>,
    /// Plain Gram matrix of `modes`; `None` for orthonormal bases.
    pub gram: Option<DMatrix<f64>>,
}

/// States with at most `n_f` active negative modes, counted from the one
/// closest to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubspaceX {
    pub n_f: usize,
}

pub const X_TOL: f64 = 1e-12;

impl SubspaceX {
    pub fn new(n_f: usize) -> Self {
        SubspaceX { n_f }
    }

    pub fn contains(&self, state: &SpectralState) -> bool {
        let mut rank = 0;
        for (l, c) in state.lambdas.iter().zip(&state.coefficients) {
            if *l < 0.0 {
                rank += 1;
                if rank > self.n_f && c.norm() > X_TOL {
                    return false;
                }
            }
        }
        true
    }
}

impl SpectralState {
    pub fn zero(spectrum: &Spectrum, truncation: usize) -> Result<Self> {
        let modes = spectrum.modes();
        if truncation == 0 || truncation > modes.len() {
            return Err(Error::TruncationTooLarge { requested: truncation, available: modes.len() });
        }
        let fs: Vec<PiecewiseFunction> = modes[..truncation].iter().map(|m| m.function.clone()).collect();
        let gram = match spectrum.operator {
            Operator::Standard => None,
            Operator::Pseudo => Some(gram_matrix(&fs.iter().collect::<Vec<_>>(), &Weight::Plain)?),
        };
        Ok(SpectralState {
            operator: spectrum.operator,
            lambdas: modes[..truncation].iter().map(|m| m.lambda).collect(),
            coefficients: alloc::vec![Complex64::new(0.0, 0.0); truncation],
            truncation,
            modes: fs,
            gram,
        })
    }

    /// Same basis, new coefficients.
    pub fn with_coefficients(&self, c: Vec<Complex64>) -> Result<Self> {
        if c.len() != self.truncation || c.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::ShapeMismatch);
        }
        Ok(SpectralState { coefficients: c, ..self.clone() })
    }

    /// Plain L² norm of the represented function.
    pub fn norm(&self) -> f64 {
        match &self.gram {
            None => self.coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
            Some(g) => {
                let n = self.truncation;
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        s += g[(i, j)] * (self.coefficients[i].conj() * self.coefficients[j]).re;
                    }
                }
                s.max(0.0).sqrt()
            }
        }
    }

    fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        let c = self.lambdas.iter().zip(&self.coefficients).map(|(&l, &c)| f(l, c)).collect();
        SpectralState { coefficients: c, ..self.clone() }
    }
}

/// Expansion coefficients of `f`: `(ψ^j, f)` in an orthonormal basis,
/// `(σ^j, f)` with the biorthogonal family otherwise.
pub fn project(f: &PiecewiseFunction, spectrum: &Spectrum, truncation: usize) -> Result<SpectralState> {
    let state = SpectralState::zero(spectrum, truncation)?;
    if f.lengths != spectrum.network.lengths() {
        return Err(Error::ShapeMismatch);
    }
    let b: Vec<f64> = state.modes.iter().map(|m| inner_product(m, f, &Weight::Plain)).collect::<Result<_>>()?;
    let c: Vec<f64> = match spectrum.operator {
        Operator::Standard => b,
        Operator::Pseudo => {
            let bio = biorthogonal_family(spectrum, truncation)?;
            (0..truncation).map(|k| (0..truncation).map(|m| bio.coefficients[(m, k)] * b[m]).sum()).collect()
        }
    };
    state.with_coefficients(c.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
}

/// `c_j ↦ e^{-iλ_j t} c_j` on an orthonormal basis.
pub fn evolve_schrodinger(state: &SpectralState, t: f64) -> Result<SpectralState> {
    if state.operator != Operator::Standard {
        return Err(Error::WrongBasis);
    }
    Ok(schrodinger_map(state, t))
}

/// The same coefficient map on a pseudo (Riesz) basis. Bounded but not
/// unitary in general.
pub fn evolve_pseudo_schrodinger(state: &SpectralState, t: f64) -> Result<SpectralState> {
    if state.operator != Operator::Pseudo {
        return Err(Error::WrongBasis);
    }
    Ok(schrodinger_map(state, t))
}

fn schrodinger_map(state: &SpectralState, t: f64) -> SpectralState {
    state.map(|l, c| c * Complex64::from_polar(1.0, -l * t))
}

/// `c_j ↦ e^{-λ_j t} c_j`. On a standard basis with negative modes the state
/// must lie in `x` (or carry no negative modes at all).
pub fn evolve_heat(state: &SpectralState, t: f64, x: Option<&SubspaceX>) -> Result<SpectralState> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument("heat flow needs t >= 0".into()));
    }
    if state.operator == Operator::Standard {
        let ok = match x {
            Some(x) => x.contains(state),
            None => SubspaceX::new(0).contains(state),
        };
        if !ok {
            return Err(Error::NotInSubspaceX);
        }
    }
    Ok(state.map(|l, c| c * (-l * t).exp()))
}

/// Real and imaginary parts of `Σ c_j ψ^j`, sampled on uniform grids.
pub fn reconstruct_complex(state: &SpectralState) -> (PiecewiseFunction, PiecewiseFunction) {
    let lengths = state.modes.first().map(|m| m.lengths.clone()).unwrap_or_default();
    let mut re = Vec::with_capacity(lengths.len());
    let mut im = Vec::with_capacity(lengths.len());
    for (e, &l) in lengths.iter().enumerate() {
        let grid = uniform_grid(l, EXPORT_POINTS);
        let (mut vr, mut vi) = (alloc::vec![0.0; grid.len()], alloc::vec![0.0; grid.len()]);
        for (m, c) in state.modes.iter().zip(&state.coefficients) {
            if *c == Complex64::new(0.0, 0.0) || m.edge_is_zero(e) {
                continue;
            }
            for (i, &x) in grid.iter().enumerate() {
                let v = m.eval(e, x);
                vr[i] += c.re * v;
                vi[i] += c.im * v;
            }
        }
        re.push(EdgeFn::Sampled(Sampled { grid: grid.clone(), values: vr }));
        im.push(EdgeFn::Sampled(Sampled { grid, values: vi }));
    }
    (PiecewiseFunction { lengths: lengths.clone(), edges: re }, PiecewiseFunction { lengths, edges: im })
}

/// Real part of `Σ c_j ψ^j` on the standard 256-point grids.
pub fn reconstruct(state: &SpectralState) -> PiecewiseFunction {
    reconstruct_complex(state).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::spectrum_star_equilateral_standard;

    #[test]
    fn project_basis_functions() {
        let s = spectrum_star_equilateral_standard(2, 3, -0.5, 6).unwrap();
        let m = s.modes();
        let st = project(m[0].function, &s, 10).unwrap();
        assert!((st.coefficients[0].re - 1.0).abs() < 1e-12);
        assert!(st.coefficients[1..].iter().all(|c| c.norm() < 1e-12));
        let f = PiecewiseFunction::linear_combination(&[3.0, -1.0], &[m[1].function, m[4].function]).unwrap();
        let st = project(&f, &s, 10).unwrap();
        for (i, c) in st.coefficients.iter().enumerate() {
            let want = match i {
                1 => 3.0,
                4 => -1.0,
                _ => 0.0,
            };
            assert!((c.re - want).abs() < 1e-11, "{i} {c}");
        }
        let z = project(&PiecewiseFunction::zero(&s.network.lengths()), &s, 10).unwrap();
        assert!(z.coefficients.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn groups() {
        let s = spectrum_star_equilateral_standard(2, 3, -0.5, 4).unwrap();
        let st = SpectralState::zero(&s, 6).unwrap();
        let st = st.with_coefficients((0..6).map(|i| Complex64::new(i as f64 - 2.0, 0.5)).collect()).unwrap();
        let a = evolve_schrodinger(&evolve_schrodinger(&st, 0.3).unwrap(), 0.4).unwrap();
        let b = evolve_schrodinger(&st, 0.7).unwrap();
        for (x, y) in a.coefficients.iter().zip(&b.coefficients) {
            assert!((x - y).norm() < 1e-12);
        }
        assert!((b.norm() - st.norm()).abs() < 1e-12);
        assert_eq!(evolve_schrodinger(&st, 0.0).unwrap(), st);
    }

    #[test]
    fn heat_needs_subspace_x() {
        let s = spectrum_star_equilateral_standard(2, 3, -0.5, 4).unwrap();
        let st = SpectralState::zero(&s, 12).unwrap();
        let neg: Vec<usize> = st.lambdas.iter().enumerate().filter(|(_, l)| **l < 0.0).map(|(i, _)| i).collect();
        let mut c = alloc::vec![Complex64::new(0.0, 0.0); 12];
        c[neg[0]] = Complex64::new(1.0, 0.0);
        let one = st.with_coefficients(c.clone()).unwrap();
        let l = one.lambdas[neg[0]];
        let out = evolve_heat(&one, 1.0, Some(&SubspaceX::new(1))).unwrap();
        assert!((out.coefficients[neg[0]].re - (-l).exp()).abs() < 1e-12 * (-l).exp());
        assert_eq!(evolve_heat(&one, 1.0, None), Err(Error::NotInSubspaceX));
        c[neg[1]] = Complex64::new(1e-3, 0.0);
        let two = st.with_coefficients(c).unwrap();
        assert_eq!(evolve_heat(&two, 1.0, Some(&SubspaceX::new(1))), Err(Error::NotInSubspaceX));
    }

    #[test]
    fn reconstruct_basis_function() {
        let s = spectrum_star_equilateral_standard(1, 2, -2.0, 3).unwrap();
        let mut c = alloc::vec![Complex64::new(0.0, 0.0); 4];
        c[0] = Complex64::new(1.0, 0.0);
        let st = SpectralState::zero(&s, 4).unwrap().with_coefficients(c).unwrap();
        let r = reconstruct(&st);
        let m = s.modes();
        let grid = uniform_grid(1.0, EXPORT_POINTS);
        for e in 0..2 {
            for x in [grid[0], grid[77], grid[255]] {
                assert!((r.eval(e, x) - m[0].function.eval(e, x)).abs() < 1e-12);
            }
        }
    }
}
