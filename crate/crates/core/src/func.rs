//! Per-edge scalar functions: closed-form trigonometric/hyperbolic shapes or
//! samples on a grid with local cubic interpolation.

use alloc::vec::Vec;
#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    Sin,
    Cos,
    Sinh,
    Cosh,
    /// `1 + y`
    Affine,
}

/// `amplitude * g(frequency * (x - shift))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub shape: Shape,
    pub amplitude: f64,
    pub frequency: f64,
    pub shift: f64,
}

impl ClosedForm {
    pub fn new(shape: Shape, amplitude: f64, frequency: f64) -> Self {
        ClosedForm { shape, amplitude, frequency, shift: 0.0 }
    }

    pub fn zero() -> Self {
        ClosedForm { shape: Shape::Affine, amplitude: 0.0, frequency: 0.0, shift: 0.0 }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        let y = self.frequency * (x - self.shift);
        self.amplitude
            * match self.shape {
                Shape::Sin => y.sin(),
                Shape::Cos => y.cos(),
                Shape::Sinh => y.sinh(),
                Shape::Cosh => y.cosh(),
                Shape::Affine => 1.0 + y,
            }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        let y = self.frequency * (x - self.shift);
        self.amplitude
            * self.frequency
            * match self.shape {
                Shape::Sin => y.cos(),
                Shape::Cos => -y.sin(),
                Shape::Sinh => y.cosh(),
                Shape::Cosh => y.sinh(),
                Shape::Affine => 1.0,
            }
    }

    fn same_family(&self, o: &ClosedForm) -> bool {
        self.shape == o.shape && self.frequency == o.frequency && self.shift == o.shift
    }
}

/// Samples on a strictly increasing grid from 0 to the edge length.
#[derive(Debug, Clone, PartialEq)]
pub struct Sampled {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl Sampled {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() || grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::ShapeMismatch);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite sample".into()));
        }
        Ok(Sampled { grid, values })
    }

    fn stencil(&self, x: f64) -> usize {
        let n = self.grid.len();
        if n <= 4 {
            return 0;
        }
        let i = self.grid.partition_point(|&g| g < x).clamp(1, n - 1);
        // four points around [grid[i-1], grid[i]]
        (i as isize - 2).clamp(0, n as isize - 4) as usize
    }

    pub fn eval(&self, x: f64) -> f64 {
        let s = self.stencil(x);
        let m = (self.grid.len() - s).min(4);
        let (g, v) = (&self.grid[s..s + m], &self.values[s..s + m]);
        let mut out = 0.0;
        for i in 0..m {
            let mut l = 1.0;
            for j in 0..m {
                if j != i {
                    l *= (x - g[j]) / (g[i] - g[j]);
                }
            }
            out += v[i] * l;
        }
        out
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let s = self.stencil(x);
        let m = (self.grid.len() - s).min(4);
        let (g, v) = (&self.grid[s..s + m], &self.values[s..s + m]);
        let mut out = 0.0;
        for i in 0..m {
            let mut dl = 0.0;
            for k in 0..m {
                if k == i {
                    continue;
                }
                let mut term = 1.0 / (g[i] - g[k]);
                for j in 0..m {
                    if j != i && j != k {
                        term *= (x - g[j]) / (g[i] - g[j]);
                    }
                }
                dl += term;
            }
            out += v[i] * dl;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EdgeFn {
    Closed(ClosedForm),
    /// Finite sum of closed forms with distinct shape/frequency/shift.
    Sum(Vec<ClosedForm>),
    Sampled(Sampled),
}

impl EdgeFn {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            EdgeFn::Closed(c) => c.eval(x),
            EdgeFn::Sum(t) => t.iter().map(|c| c.eval(x)).sum(),
            EdgeFn::Sampled(s) => s.eval(x),
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        match self {
            EdgeFn::Closed(c) => c.deriv(x),
            EdgeFn::Sum(t) => t.iter().map(|c| c.deriv(x)).sum(),
            EdgeFn::Sampled(s) => s.deriv(x),
        }
    }

    fn terms(&self) -> Option<&[ClosedForm]> {
        match self {
            EdgeFn::Closed(c) => Some(core::slice::from_ref(c)),
            EdgeFn::Sum(t) => Some(t),
            EdgeFn::Sampled(_) => None,
        }
    }

    /// Largest angular frequency present, used to size quadrature panels.
    pub fn frequency(&self) -> f64 {
        match self {
            EdgeFn::Closed(c) if c.amplitude != 0.0 => c.frequency.abs(),
            EdgeFn::Closed(_) => 0.0,
            EdgeFn::Sum(t) => t.iter().filter(|c| c.amplitude != 0.0).map(|c| c.frequency.abs()).fold(0.0, f64::max),
            EdgeFn::Sampled(s) => {
                let h = s.grid.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
                core::f64::consts::PI / (4.0 * h)
            }
        }
    }
}

/// Function on a network: one component per edge, in the network's edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFunction {
    pub lengths: Vec<f64>,
    pub edges: Vec<EdgeFn>,
}

/// Points per edge used for uniform exports and reconstructions.
pub const EXPORT_POINTS: usize = 256;

pub fn uniform_grid(length: f64, points: usize) -> Vec<f64> {
    let m = points.max(2) - 1;
    (0..=m).map(|i| if i == m { length } else { length * i as f64 / m as f64 }).collect()
}

impl PiecewiseFunction {
    pub fn zero(lengths: &[f64]) -> Self {
        PiecewiseFunction { lengths: lengths.to_vec(), edges: lengths.iter().map(|_| EdgeFn::Closed(ClosedForm::zero())).collect() }
    }

    pub fn closed(lengths: &[f64], parts: Vec<ClosedForm>) -> Self {
        PiecewiseFunction { lengths: lengths.to_vec(), edges: parts.into_iter().map(EdgeFn::Closed).collect() }
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn eval(&self, edge: usize, x: f64) -> f64 {
        self.edges[edge].eval(x)
    }

    pub fn deriv(&self, edge: usize, x: f64) -> f64 {
        self.edges[edge].deriv(x)
    }

    /// Samples every edge on `points` uniform points.
    pub fn sample(&self, points: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
        self.lengths
            .iter()
            .zip(&self.edges)
            .map(|(&l, f)| {
                let g = uniform_grid(l, points);
                let v = g.iter().map(|&x| f.eval(x)).collect();
                (g, v)
            })
            .collect()
    }

    /// Sampled copy on uniform grids.
    pub fn to_sampled(&self, points: usize) -> Self {
        let edges = self
            .sample(points)
            .into_iter()
            .map(|(grid, values)| EdgeFn::Sampled(Sampled { grid, values }))
            .collect();
        PiecewiseFunction { lengths: self.lengths.clone(), edges }
    }

    pub fn scale(&self, a: f64) -> Self {
        let edges = self
            .edges
            .iter()
            .map(|f| match f {
                EdgeFn::Closed(c) => EdgeFn::Closed(ClosedForm { amplitude: c.amplitude * a, ..*c }),
                EdgeFn::Sum(t) => EdgeFn::Sum(t.iter().map(|c| ClosedForm { amplitude: c.amplitude * a, ..*c }).collect()),
                EdgeFn::Sampled(s) => EdgeFn::Sampled(Sampled { grid: s.grid.clone(), values: s.values.iter().map(|v| v * a).collect() }),
            })
            .collect();
        PiecewiseFunction { lengths: self.lengths.clone(), edges }
    }

    /// `sum_i coeffs[i] * fs[i]`; stays closed-form (a single term or a sum
    /// of terms) unless some input is sampled, in which case the result is
    /// sampled on that grid or on `EXPORT_POINTS` uniform points.
    pub fn linear_combination(coeffs: &[f64], fs: &[&PiecewiseFunction]) -> Result<Self> {
        let first = fs.first().ok_or(Error::ShapeMismatch)?;
        let ne = first.num_edges();
        if coeffs.len() != fs.len() || fs.iter().any(|f| f.num_edges() != ne || f.lengths != first.lengths) {
            return Err(Error::ShapeMismatch);
        }
        let mut edges = Vec::with_capacity(ne);
        for e in 0..ne {
            let closed = fs.iter().all(|f| f.edges[e].terms().is_some());
            if closed {
                let mut acc: Vec<ClosedForm> = Vec::new();
                for (c, f) in coeffs.iter().zip(fs) {
                    for t in f.edges[e].terms().unwrap() {
                        if *c == 0.0 || t.amplitude == 0.0 {
                            continue;
                        }
                        match acc.iter_mut().find(|a| a.same_family(t)) {
                            Some(a) => a.amplitude += c * t.amplitude,
                            None => acc.push(ClosedForm { amplitude: c * t.amplitude, ..*t }),
                        }
                    }
                }
                acc.retain(|a| a.amplitude != 0.0);
                edges.push(match acc.len() {
                    0 => EdgeFn::Closed(ClosedForm::zero()),
                    1 => EdgeFn::Closed(acc[0]),
                    _ => EdgeFn::Sum(acc),
                });
                continue;
            }
            let grid = match fs.iter().find_map(|f| match &f.edges[e] {
                EdgeFn::Sampled(s) => Some(s.grid.clone()),
                _ => None,
            }) {
                Some(g) => g,
                None => uniform_grid(first.lengths[e], EXPORT_POINTS),
            };
            let values = grid.iter().map(|&x| coeffs.iter().zip(fs).map(|(c, f)| c * f.edges[e].eval(x)).sum()).collect();
            edges.push(EdgeFn::Sampled(Sampled { grid, values }));
        }
        Ok(PiecewiseFunction { lengths: first.lengths.clone(), edges })
    }

    /// True when the component on `edge` is identically zero.
    pub fn edge_is_zero(&self, edge: usize) -> bool {
        match &self.edges[edge] {
            EdgeFn::Closed(c) => c.amplitude == 0.0,
            EdgeFn::Sum(t) => t.iter().all(|c| c.amplitude == 0.0),
            EdgeFn::Sampled(s) => s.values.iter().all(|v| *v == 0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_interpolation_is_exact_on_cubics() {
        let grid = uniform_grid(2.0, 9);
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x * x;
        let s = Sampled::new(grid.clone(), grid.iter().map(|&x| f(x)).collect()).unwrap();
        for x in [0.0, 0.13, 1.0, 1.77, 2.0] {
            assert!((s.eval(x) - f(x)).abs() < 1e-13);
            assert!((s.deriv(x) - (-2.0 + 1.5 * x * x)).abs() < 1e-12);
        }
    }

    #[test]
    fn combination_stays_closed() {
        let l = [1.0, 1.0];
        let a = PiecewiseFunction::closed(&l, alloc::vec![ClosedForm::new(Shape::Sin, 1.0, 3.0), ClosedForm::zero()]);
        let b = PiecewiseFunction::closed(&l, alloc::vec![ClosedForm::new(Shape::Sin, 2.0, 3.0), ClosedForm::new(Shape::Sinh, 1.0, 1.0)]);
        let c = PiecewiseFunction::linear_combination(&[1.0, -0.5], &[&a, &b]).unwrap();
        assert!(matches!(c.edges[0], EdgeFn::Closed(ClosedForm { amplitude, .. }) if amplitude == 0.0));
        assert!(matches!(c.edges[1], EdgeFn::Closed(ClosedForm { shape: Shape::Sinh, amplitude, .. }) if amplitude == -0.5));
    }
}
