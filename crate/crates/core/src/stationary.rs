//! Stationary problem `-k_j ψ_j'' = f_j`: edgewise double integration,
//! coupling through the transmission system, weak-form residuals.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::func::{EdgeFn, PiecewiseFunction, Sampled};
use crate::graph::{Boundary, Network, VertexKind};
use crate::quad::GaussLegendre;
use crate::wellposed::{assemble_transmission, resonance_verdict, EndValue, SourceMoments};

pub type EdgeSource = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum SourcePart {
    Function(EdgeSource),
    Sampled(Sampled),
}

impl SourcePart {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            SourcePart::Function(f) => f(x),
            SourcePart::Sampled(s) => s.eval(x),
        }
    }
}

impl core::fmt::Debug for SourcePart {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SourcePart::Function(_) => f.write_str("Function(..)"),
            SourcePart::Sampled(s) => write!(f, "Sampled({} points)", s.grid.len()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SourceTerm {
    pub parts: Vec<SourcePart>,
    pub order: usize,
    pub panels: usize,
}

impl SourceTerm {
    /// Default rule: order 8, 16 panels per edge.
    pub fn new(parts: Vec<SourcePart>) -> Self {
        SourceTerm { parts, order: 8, panels: 16 }
    }

    pub fn constant(n_edges: usize, value: f64) -> Self {
        Self::new((0..n_edges).map(|_| SourcePart::Function(Arc::new(move |_| value))).collect())
    }

    pub fn from_fn<F: Fn(usize, f64) -> f64 + Send + Sync + Clone + 'static>(n_edges: usize, f: F) -> Self {
        Self::new((0..n_edges).map(|j| { let f = f.clone(); SourcePart::Function(Arc::new(move |x| f(j, x))) }).collect())
    }

    pub fn with_rule(mut self, order: usize, panels: usize) -> Self {
        self.order = order;
        self.panels = panels;
        self
    }

    fn check(&self, n: usize) -> Result<GaussLegendre> {
        if self.parts.len() != n {
            return Err(Error::ShapeMismatch);
        }
        if self.panels == 0 {
            return Err(Error::InvalidArgument("panels must be at least 1".into()));
        }
        GaussLegendre::new(self.order)
    }

    /// `(∫_0^L f, ∫_0^L (L - s) f(s) ds)` for every edge.
    pub fn moments(&self, net: &Network) -> Result<SourceMoments> {
        let g = self.check(net.num_edges())?;
        let mut m = SourceMoments::zero(net.num_edges());
        for (j, e) in net.edges.iter().enumerate() {
            let p = &self.parts[j];
            let l = e.length;
            m.f1[j] = g.integrate(|x| p.eval(x), 0.0, l, self.panels);
            m.f2[j] = g.integrate(|x| (l - x) * p.eval(x), 0.0, l, self.panels);
        }
        Ok(m)
    }
}

/// Cumulative `F1(x) = ∫_0^x f` and `F2(x) = ∫_0^x (x - s) f(s) ds` on `grid`.
fn cumulative(g: &GaussLegendre, f: &SourcePart, grid: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut f1 = alloc::vec![0.0; grid.len()];
    let mut f2 = alloc::vec![0.0; grid.len()];
    for i in 1..grid.len() {
        let (a, b) = (grid[i - 1], grid[i]);
        let i1 = g.panel(&|x| f.eval(x), a, b);
        let i2 = g.panel(&|x| (b - x) * f.eval(x), a, b);
        f1[i] = f1[i - 1] + i1;
        f2[i] = f2[i - 1] + (b - a) * f1[i - 1] + i2;
    }
    (f1, f2)
}

fn solution_grid(length: f64, panels: usize) -> Vec<f64> {
    crate::func::uniform_grid(length, 4 * panels + 1)
}

fn neumann_only(net: &Network) -> bool {
    net.is_star() && (0..net.num_edges()).all(|j| net.star_boundary(j) == Boundary::Neumann)
}

/// Solves the stationary problem; refuses resonant networks.
pub fn solve_stationary(net: &Network, f: &SourceTerm) -> Result<PiecewiseFunction> {
    if !neumann_only(net) {
        let v = resonance_verdict(net)?;
        if !v.well_posed {
            return Err(Error::ResonantNetwork { margin: v.margin });
        }
    }
    solve_stationary_unchecked(net, f)
}

/// Same as [`solve_stationary`] without the resonance refusal; fails only
/// when the transmission matrix is exactly singular.
pub fn solve_stationary_unchecked(net: &Network, f: &SourceTerm) -> Result<PiecewiseFunction> {
    let g = f.check(net.num_edges())?;
    let m = f.moments(net)?;
    let mut sys = assemble_transmission(net, &m)?;
    let k = net.conductivities();
    let l = net.lengths();
    if neumann_only(net) {
        let total: f64 = m.f1.iter().sum();
        let scale: f64 = m.f1.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        if total.abs() > 1e-10 * scale {
            return Err(Error::IncompatibleSource { mean: total });
        }
        // pin psi = 0 at the external vertex of the lowest edge id
        let j = (0..net.num_edges()).min_by_key(|&j| net.edges[j].id).unwrap();
        let last = net.num_edges() - 1;
        sys.matrix.row_mut(last).fill(0.0);
        sys.matrix[(last, j)] = 1.0;
        sys.rhs[last] = -m.f2[j] / k[j];
    }
    let v = sys.solve().ok_or(Error::ResonantNetwork { margin: 0.0 })?;
    let value = |e: EndValue| match e {
        EndValue::Zero => Some(0.0),
        EndValue::Free => None,
        EndValue::Unknown(i) => Some(v[i]),
    };
    let mut edges = Vec::with_capacity(net.num_edges());
    for (j, &(from, to)) in sys.ends.iter().enumerate() {
        let b = value(to).ok_or(Error::Internal("free value at a junction end".into()))?;
        // psi(x) = a + c x - F2(x)/k
        let (a, c) = match value(from) {
            Some(a) => (a, (b - a + m.f2[j] / k[j]) / l[j]),
            None => (b + m.f2[j] / k[j], 0.0),
        };
        let grid = solution_grid(l[j], f.panels);
        let (_, f2) = cumulative(&g, &f.parts[j], &grid);
        let values = grid.iter().zip(&f2).map(|(&x, &q)| a + c * x - q / k[j]).collect();
        edges.push(EdgeFn::Sampled(Sampled { grid, values }));
    }
    Ok(PiecewiseFunction { lengths: l, edges })
}

/// Largest violation of the network's vertex conditions by `psi`.
pub fn vertex_violation(net: &Network, psi: &PiecewiseFunction) -> Result<f64> {
    if psi.num_edges() != net.num_edges() {
        return Err(Error::ShapeMismatch);
    }
    let mut worst: f64 = 0.0;
    for c in &net.conditions {
        let mut values = Vec::new();
        let mut flux = 0.0;
        for (j, e) in net.edges.iter().enumerate() {
            let k = e.conductivity;
            if e.from == c.vertex {
                values.push(psi.eval(j, 0.0));
                flux -= k * psi.deriv(j, 0.0);
                if c.kind == VertexKind::Neumann {
                    worst = worst.max((k * psi.deriv(j, 0.0)).abs());
                }
            }
            if e.to == c.vertex {
                values.push(psi.eval(j, e.length));
                flux += k * psi.deriv(j, e.length);
                if c.kind == VertexKind::Neumann {
                    worst = worst.max((k * psi.deriv(j, e.length)).abs());
                }
            }
        }
        match c.kind {
            VertexKind::Dirichlet => worst = values.iter().fold(worst, |w, v| w.max(v.abs())),
            VertexKind::Neumann => {}
            VertexKind::Kirchhoff => {
                let v0 = values[0];
                worst = values.iter().fold(worst, |w, v| w.max((v - v0).abs()));
                worst = worst.max(flux.abs());
            }
        }
    }
    Ok(worst)
}

/// Hat test functions per edge used by [`residual_norm`].
pub const HAT_TESTS: usize = 32;

/// Max of the weak-form residual over interior hats and the vertex violation.
pub fn residual_norm(net: &Network, psi: &PiecewiseFunction, f: &SourceTerm) -> Result<f64> {
    let g = f.check(net.num_edges())?;
    if psi.num_edges() != net.num_edges() {
        return Err(Error::ShapeMismatch);
    }
    let mut worst = vertex_violation(net, psi)?;
    for (j, e) in net.edges.iter().enumerate() {
        let h = e.length / (HAT_TESTS + 1) as f64;
        let node = |i: usize| i as f64 * h;
        let vals: Vec<f64> = (0..HAT_TESTS + 2).map(|i| psi.eval(j, if i == HAT_TESTS + 1 { e.length } else { node(i) })).collect();
        let p = &f.parts[j];
        for i in 1..=HAT_TESTS {
            let a = e.conductivity * (2.0 * vals[i] - vals[i - 1] - vals[i + 1]) / h;
            let (x0, x1, x2) = (node(i - 1), node(i), node(i + 1));
            let rise = g.integrate(|x| p.eval(x) * (x - x0) / h, x0, x1, 4);
            let fall = g.integrate(|x| p.eval(x) * (x2 - x) / h, x1, x2, 4);
            worst = worst.max((a - rise - fall).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_star, build_tadpole2, Boundary::*};

    #[test]
    fn interval_parabola() {
        let g = build_star(&[1.0, 1.0], &[1.0, 1.0], &[Dirichlet, Dirichlet]).unwrap();
        let f = SourceTerm::constant(2, 1.0);
        let psi = solve_stationary(&g, &f).unwrap();
        // edge 1 covers [0,1] of the interval, edge 2 covers [2,1] reversed
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            let exact = x * (2.0 - x) / 2.0;
            assert!((psi.eval(0, x) - exact).abs() < 1e-14);
            assert!((psi.eval(1, x) - exact).abs() < 1e-14);
        }
        assert!(residual_norm(&g, &psi, &f).unwrap() < 1e-10);
    }

    #[test]
    fn zero_source_zero_solution() {
        let g = build_tadpole2(2.0, 1.0, 1.0, -1.0).unwrap();
        let psi = solve_stationary(&g, &SourceTerm::constant(2, 0.0)).unwrap();
        for j in 0..2 {
            assert!(psi.sample(9)[j].1.iter().all(|v| v.abs() < 1e-15));
        }
    }

    #[test]
    fn perturbed_node_shows_up() {
        let g = build_star(&[1.0, 1.0], &[1.0, 1.0], &[Dirichlet, Dirichlet]).unwrap();
        let f = SourceTerm::constant(2, 1.0);
        let mut psi = solve_stationary(&g, &f).unwrap();
        if let EdgeFn::Sampled(s) = &mut psi.edges[0] {
            let mid = s.values.len() / 2;
            s.values[mid] += 0.01;
        }
        assert!(residual_norm(&g, &psi, &f).unwrap() > 1e-4);
    }

    #[test]
    fn resonant_refused_and_neumann_compatibility() {
        let g = build_star(&[1.0; 3], &[1.0, 1.0, -2.0], &[Dirichlet; 3]).unwrap();
        assert!(matches!(solve_stationary(&g, &SourceTerm::constant(3, 1.0)), Err(Error::ResonantNetwork { .. })));
        let g = build_star(&[1.0, 1.0], &[1.0, -3.0], &[Neumann, Neumann]).unwrap();
        assert!(matches!(solve_stationary(&g, &SourceTerm::constant(2, 1.0)), Err(Error::IncompatibleSource { .. })));
        let f = SourceTerm::from_fn(2, |j, _| if j == 0 { 1.0 } else { -1.0 });
        let psi = solve_stationary(&g, &f).unwrap();
        assert!(psi.eval(0, 0.0).abs() < 1e-14);
        assert!(residual_norm(&g, &psi, &f).unwrap() < 1e-10);
    }
}
