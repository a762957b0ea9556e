//! Finite-difference oracle for the standard and pseudo operators.
//!
//! Each edge carries a uniform mesh with `ceil(L/h)` intervals. Interior rows
//! are central second differences, Neumann ends use ghost reflection and
//! Kirchhoff vertices use one-sided three-point flux stencils, so the scheme
//! is second order throughout.
//!
//! Eigenvalues and solves are computed by exact reduction: on every edge the
//! discrete solutions of the interior rows form a two-dimensional space
//! spanned by the recurrence solutions `P` (`P_0 = 1, P_1 = 0`) and `Q`
//! (`Q_0 = 0, Q_1 = 1`). What remains is a small matrix `B(λ)` acting on two
//! coefficients per edge plus one value per Kirchhoff vertex. Its entries are
//! polynomials in `λ`, so `det B` has no poles and vanishes exactly on the
//! discrete spectrum. A dense assembly is kept for cross-checks on coarse
//! meshes.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use signet_core::graph::{Network, VertexKind};
use signet_core::roots::bisect;
use signet_core::spectra::Operator;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FdDiscretization {
    pub network: Network,
    pub operator: Operator,
    /// Target mesh width.
    pub h: f64,
    /// Intervals per edge.
    pub intervals: Vec<usize>,
    /// Actual mesh width per edge, `L_j / intervals_j`.
    pub steps: Vec<f64>,
}

/// Discrete eigenvalue with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdEigen {
    pub lambda: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdSolution {
    /// Node coordinates per edge.
    pub grids: Vec<Vec<f64>>,
    pub values: Vec<Vec<f64>>,
    /// Condition estimate of the scaled junction system.
    pub condition: f64,
}

impl FdSolution {
    /// Discrete L² norm of `self - other` evaluated at the mesh nodes
    /// (trapezoid rule).
    pub fn l2_distance(&self, other: impl Fn(usize, f64) -> f64) -> f64 {
        let mut s = 0.0;
        for (e, (g, v)) in self.grids.iter().zip(&self.values).enumerate() {
            let d: Vec<f64> = g.iter().zip(v).map(|(&x, &u)| u - other(e, x)).collect();
            s += trapezoid_sq(g, &d);
        }
        s.sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.grids.iter().zip(&self.values).map(|(g, v)| trapezoid_sq(g, v)).sum::<f64>().sqrt()
    }
}

fn trapezoid_sq(g: &[f64], v: &[f64]) -> f64 {
    g.windows(2).zip(v.windows(2)).map(|(x, u)| 0.5 * (x[1] - x[0]) * (u[0] * u[0] + u[1] * u[1])).sum()
}

pub fn fd_assemble(network: &Network, h: f64, operator: Operator) -> Result<FdDiscretization> {
    network.validate()?;
    let lmin = network.lengths().into_iter().fold(f64::INFINITY, f64::min);
    if !(h > 0.0) || h > lmin / 8.0 {
        return Err(Error::MeshTooCoarse { h, limit: lmin / 8.0 });
    }
    let intervals: Vec<usize> = network.edges.iter().map(|e| ((e.length / h) * (1.0 - 1e-12)).ceil().max(2.0) as usize).collect();
    let steps = network.edges.iter().zip(&intervals).map(|(e, &n)| e.length / n as f64).collect();
    Ok(FdDiscretization { network: network.clone(), operator, h, intervals, steps })
}

/// End of an edge: which node and what condition holds there.
#[derive(Debug, Clone, Copy)]
enum End {
    Dirichlet,
    Neumann,
    Vertex(usize),
}

impl FdDiscretization {
    /// Mass weight of edge `j`: 1 for the standard operator, `k_j` for the pseudo one.
    fn weight(&self, j: usize) -> f64 {
        match self.operator {
            Operator::Standard => 1.0,
            Operator::Pseudo => self.network.edges[j].conductivity,
        }
    }

    /// `h² w / k`, the factor multiplying `λ` in the recurrence.
    fn rho_h2(&self, j: usize) -> f64 {
        self.steps[j] * self.steps[j] * self.weight(j) / self.network.edges[j].conductivity
    }

    fn junctions(&self) -> Vec<String> {
        self.network.junctions()
    }

    fn ends(&self, j: usize, junctions: &[String]) -> (End, End) {
        let e = &self.network.edges[j];
        let end = |v: &str| match self.network.condition(v) {
            Some(VertexKind::Dirichlet) => End::Dirichlet,
            Some(VertexKind::Neumann) => End::Neumann,
            _ => End::Vertex(junctions.iter().position(|w| w == v).unwrap()),
        };
        (end(&e.from), end(&e.to))
    }

    /// Recurrence solutions `P`, `Q` and a particular solution `R` for the
    /// source `s` (already multiplied by `h² w / k`), all of length `n + 1`.
    fn recurrences(&self, j: usize, lambda: f64, s: Option<&[f64]>) -> [Vec<f64>; 3] {
        let n = self.intervals[j];
        let x = lambda * self.rho_h2(j);
        let p = self.forward(j, x, 1.0, 0.0);
        let q = self.forward(j, x, 0.0, 1.0);
        let mut r = vec![0.0; n + 1];
        if let Some(s) = s {
            let mut d = 0.0;
            for i in 1..n {
                d -= x * r[i] + s[i];
                r[i + 1] = r[i] + d;
            }
        }
        [p, q, r]
    }

    /// Junction matrix `B(λ)` with rows and columns scaled to unit size, plus
    /// the right-hand side produced by a particular solution when a source is
    /// given. Column order: `(c_j, d_j)` per edge, then vertex values.
    fn solve_system(&self, lambda: f64, source: Option<&[Vec<f64>]>) -> Junction {
        let junctions = self.junctions();
        let ne = self.network.num_edges();
        let dim = 2 * ne + junctions.len();
        let mut b = DMatrix::zeros(dim, dim);
        let mut rhs = DVector::zeros(dim);
        let mut sols = Vec::with_capacity(ne);
        let flux_row = |v: usize| 2 * ne + v;
        let x = lambda;
        for j in 0..ne {
            let k = self.network.edges[j].conductivity;
            let h = self.steps[j];
            let n = self.intervals[j];
            let scaled: Option<Vec<f64>> = source.map(|f| f[j].iter().map(|v| v * h * h * self.weight(j) / k).collect());
            let sol = self.recurrences(j, x, scaled.as_deref());
            let (from, to) = self.ends(j, &junctions);
            let half = 1.0 - 0.5 * x * self.rho_h2(j);
            let [p, q, r] = &sol;
            let (cc, cd) = (2 * j, 2 * j + 1);
            // from-end row
            let row = 2 * j;
            match from {
                End::Dirichlet => {
                    b[(row, cc)] = 1.0;
                }
                End::Neumann => {
                    // u_1 = (1 - xρh²/2) u_0 - h² w f_0 /(2k)
                    b[(row, cc)] = -half;
                    b[(row, cd)] = 1.0;
                    if let Some(s) = &scaled {
                        rhs[row] = -0.5 * s[0];
                    }
                }
                End::Vertex(v) => {
                    b[(row, cc)] = 1.0;
                    b[(row, 2 * ne + v)] = -1.0;
                    let fr = flux_row(v);
                    // -k(-3u_0 + 4u_1 - u_2)/(2h)
                    let w = -k / (2.0 * h);
                    b[(fr, cc)] += w * (-3.0 * p[0] + 4.0 * p[1] - p[2]);
                    b[(fr, cd)] += w * (-3.0 * q[0] + 4.0 * q[1] - q[2]);
                    rhs[fr] -= w * (-3.0 * r[0] + 4.0 * r[1] - r[2]);
                }
            }
            let row = 2 * j + 1;
            match to {
                End::Dirichlet => {
                    b[(row, cc)] = p[n];
                    b[(row, cd)] = q[n];
                    rhs[row] = -r[n];
                }
                End::Neumann => {
                    // u_{n-1} - (1 - xρh²/2) u_n = -h² w f_n /(2k)
                    b[(row, cc)] = p[n - 1] - half * p[n];
                    b[(row, cd)] = q[n - 1] - half * q[n];
                    let sn = scaled.as_ref().map_or(0.0, |s| s[n]);
                    rhs[row] = -(r[n - 1] - half * r[n]) - 0.5 * sn;
                }
                End::Vertex(v) => {
                    b[(row, cc)] = p[n];
                    b[(row, cd)] = q[n];
                    b[(row, 2 * ne + v)] = -1.0;
                    rhs[row] = -r[n];
                    let fr = flux_row(v);
                    // +k(3u_n - 4u_{n-1} + u_{n-2})/(2h)
                    let w = k / (2.0 * h);
                    b[(fr, cc)] += w * (3.0 * p[n] - 4.0 * p[n - 1] + p[n - 2]);
                    b[(fr, cd)] += w * (3.0 * q[n] - 4.0 * q[n - 1] + q[n - 2]);
                    rhs[fr] -= w * (3.0 * r[n] - 4.0 * r[n - 1] + r[n - 2]);
                }
            }
            sols.push(sol);
        }
        // positive scalings keep the sign of det B; columns are scaled by the
        // size of the recurrence solution so that a column of roundoff stays small
        let mut col_scale = vec![1.0; dim];
        for (j, [p, q, _]) in sols.iter().enumerate() {
            col_scale[2 * j] = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            col_scale[2 * j + 1] = q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        }
        for c in 0..dim {
            b.column_mut(c).scale_mut(col_scale[c]);
        }
        for r in 0..dim {
            let m = b.row(r).norm();
            if m > 0.0 {
                b.row_mut(r).scale_mut(1.0 / m);
                rhs[r] /= m;
            }
        }
        Junction { matrix: b, rhs, col_scale, solutions: sols }
    }

    /// Homogeneous junction matrix built on well-conditioned edge bases: an
    /// edge with an external end carries the single solution anchored there;
    /// an edge between two junctions carries `P, Q` where it oscillates and
    /// the two solutions vanishing at either end where it does not. Every
    /// basis solution is normalized to unit maximum and flux rows by a fixed
    /// factor, so the sign of the determinant is continuous on each side of
    /// `λ = 0`.
    pub fn eigen_system(&self, lambda: f64) -> DMatrix<f64> {
        let junctions = self.junctions();
        let ne = self.network.num_edges();
        let mut cols = Vec::with_capacity(2 * ne);
        for j in 0..ne {
            let (from, to) = self.ends(j, &junctions);
            let x = lambda * self.rho_h2(j);
            let half = 1.0 - 0.5 * x;
            let n = self.intervals[j];
            let basis: Vec<Vec<f64>> = match (from, to) {
                (End::Dirichlet, _) => vec![self.forward(j, x, 0.0, 1.0)],
                (End::Neumann, _) => vec![self.forward(j, x, 1.0, half)],
                (End::Vertex(_), End::Dirichlet) => vec![self.backward(j, x, 0.0, 1.0)],
                (End::Vertex(_), End::Neumann) => vec![self.backward(j, x, 1.0, half)],
                (End::Vertex(_), End::Vertex(_)) if x > 0.0 => vec![self.forward(j, x, 1.0, 0.0), self.forward(j, x, 0.0, 1.0)],
                (End::Vertex(_), End::Vertex(_)) => vec![self.forward(j, x, 0.0, 1.0), self.backward(j, x, 0.0, 1.0)],
            };
            for u in basis {
                let m = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                cols.push((j, from, to, half, n, u.into_iter().map(|v| v / m).collect::<Vec<f64>>()));
            }
        }
        let nc = cols.len();
        let dim = nc + junctions.len();
        let mut b = DMatrix::zeros(dim, dim);
        // one row per edge-end that is not the anchoring external end
        let mut row = 0;
        let mut j_prev = usize::MAX;
        let mut end_rows: Vec<(usize, usize)> = Vec::new(); // (from-row, to-row) per edge, usize::MAX if none
        for (j, from, to, ..) in &cols {
            if *j == j_prev {
                continue;
            }
            j_prev = *j;
            let fr = if matches!(from, End::Vertex(_)) { row += 1; row - 1 } else { usize::MAX };
            let tr = if matches!(from, End::Vertex(_)) && !matches!(to, End::Vertex(_)) {
                usize::MAX
            } else {
                row += 1;
                row - 1
            };
            end_rows.push((fr, tr));
        }
        debug_assert_eq!(row, nc);
        for (c, (j, from, to, half, n, u)) in cols.iter().enumerate() {
            let (fr, tr) = end_rows[*j];
            let k = self.network.edges[*j].conductivity;
            let h = self.steps[*j];
            let n = *n;
            if let End::Vertex(v) = from {
                b[(fr, c)] = u[0];
                b[(fr, nc + v)] = -1.0;
                b[(nc + v, c)] += -k / (2.0 * h) * (-3.0 * u[0] + 4.0 * u[1] - u[2]);
            }
            match to {
                End::Vertex(v) => {
                    b[(tr, c)] = u[n];
                    b[(tr, nc + v)] = -1.0;
                    b[(nc + v, c)] += k / (2.0 * h) * (3.0 * u[n] - 4.0 * u[n - 1] + u[n - 2]);
                }
                _ if matches!(from, End::Vertex(_)) => {}
                End::Dirichlet => b[(tr, c)] = u[n],
                End::Neumann => b[(tr, c)] = u[n - 1] - half * u[n],
            }
        }
        // value rows are O(1) already; flux rows get a fixed scale so that a
        // row of roundoff is not blown up
        let mut flux_scale = vec![0.0; junctions.len()];
        for j in 0..ne {
            let (from, to) = self.ends(j, &junctions);
            for end in [from, to] {
                if let End::Vertex(v) = end {
                    flux_scale[v] += self.network.edges[j].conductivity.abs();
                }
            }
        }
        for (v, m) in flux_scale.iter().enumerate() {
            b.row_mut(nc + v).scale_mut(1.0 / m);
        }
        b
    }

    /// Solution of the interior rows with `u_0 = a, u_1 = b`.
    fn forward(&self, j: usize, x: f64, a: f64, b: f64) -> Vec<f64> {
        let n = self.intervals[j];
        let mut u = vec![0.0; n + 1];
        u[0] = a;
        u[1] = b;
        // difference form; 2 - x would lose the digits of x ~ λh²
        let mut d = b - a;
        for i in 1..n {
            d -= x * u[i];
            u[i + 1] = u[i] + d;
        }
        u
    }

    /// Solution of the interior rows with `u_n = a, u_{n-1} = b`.
    fn backward(&self, j: usize, x: f64, a: f64, b: f64) -> Vec<f64> {
        let mut u = self.forward(j, x, a, b);
        u.reverse();
        u
    }

    /// Sign-stable secular function: the scaled junction determinant.
    pub fn secular(&self, lambda: f64) -> f64 {
        self.eigen_system(lambda).determinant()
    }

    /// Number of singular values of the junction matrix at or below `tol`;
    /// its entries are of unit size.
    pub fn nullity(&self, lambda: f64, tol: f64) -> usize {
        self.eigen_system(lambda).singular_values().iter().filter(|&&s| s <= tol).count()
    }

    /// Chain eigenvalues of every edge with Dirichlet or Neumann ends, where
    /// eigenvalues of higher multiplicity can sit.
    fn candidates(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for j in 0..self.network.num_edges() {
            let n = self.intervals[j] as f64;
            let c = self.rho_h2(j);
            let mut push = |theta: f64| {
                let l = 4.0 * (0.5 * theta).sin().powi(2) / c;
                if l > lo && l < hi {
                    out.push(l);
                }
            };
            for m in 1..self.intervals[j] {
                push(m as f64 * std::f64::consts::PI / n);
            }
            for m in 1..=self.intervals[j] {
                push((m as f64 - 0.5) * std::f64::consts::PI / n);
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * b.abs());
        out
    }

    /// Sampling step in `λ` near `lambda`: an eighth of the local wavelength
    /// of the stiffest edge, in terms of `sqrt|λ|`.
    fn sample_step(&self, lambda: f64) -> f64 {
        let w = (0..self.network.num_edges())
            .map(|j| self.network.edges[j].length * (self.weight(j) / self.network.edges[j].conductivity).abs().sqrt())
            .fold(0.0, f64::max);
        let dt = std::f64::consts::PI / (8.0 * w);
        let t = lambda.abs().sqrt();
        (2.0 * t * dt + dt * dt).max(1e-9)
    }
}

struct Junction {
    matrix: DMatrix<f64>,
    rhs: DVector<f64>,
    col_scale: Vec<f64>,
    solutions: Vec<[Vec<f64>; 3]>,
}

/// Singular-value thresholds at a bisected root and at a chain eigenvalue.
const ROOT_TOL: f64 = 1e-9;
const CANDIDATE_TOL: f64 = 1e-11;

/// Discrete eigenvalues in `window` with multiplicities, ascending.
///
/// Odd-multiplicity eigenvalues show up as sign changes of the junction
/// determinant. Chain eigenvalues, where clusters can sit, are inserted as
/// sample pairs `c(1 ± 1e-11)` and additionally tested through the nullity
/// of the junction matrix, which catches even multiplicities.
pub fn fd_spectrum(disc: &FdDiscretization, window: (f64, f64)) -> Result<Vec<FdEigen>> {
    let (lo, hi) = window;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Core(signet_core::Error::InvalidArgument("window must be a finite interval".into())));
    }
    let cands = disc.candidates(lo, hi);
    let mut roots: Vec<FdEigen> = Vec::new();
    // the edge bases change at λ = 0, so each side stops just short of it
    let eps = 1e-9 * disc.sample_step(0.0);
    let sides = [(lo, if hi >= 0.0 { -eps } else { hi }), (if lo <= 0.0 { eps } else { lo }, hi)];
    for (a, b) in sides {
        if !(a < b) {
            continue;
        }
        let mut xs: Vec<f64> = Vec::new();
        let mut x = a;
        while x < b {
            xs.push(x);
            x += disc.sample_step(x).min(disc.sample_step(b)).min(b - a);
        }
        xs.push(b);
        for &c in cands.iter().filter(|&&c| c > a && c < b) {
            let e = 1e-11 * c.abs();
            xs.extend([c - e, c + e]);
        }
        xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
        xs.dedup();
        let fs: Vec<f64> = xs.iter().map(|&x| disc.secular(x)).collect();
        let mut found = Vec::new();
        sign_changes(disc, &xs, &fs, REFINE_DEPTH, &mut found)?;
        for r in found {
            push_root(&mut roots, disc, r);
        }
    }
    let mut extra = Vec::new();
    let zero = if lo <= 0.0 && hi >= 0.0 { Some(0.0) } else { None };
    for c in cands.iter().copied().chain(zero) {
        let m = disc.nullity(c, CANDIDATE_TOL);
        if m == 0 {
            continue;
        }
        let near = roots.iter_mut().find(|e| (e.lambda - c).abs() <= 1e-7 * c.abs().max(1e-9));
        match near {
            // the scan already holds this eigenvalue
            Some(e) if (e.lambda - c).abs() <= 1e-9 * c.abs().max(1e-9) => {
                e.lambda = c;
                e.multiplicity = e.multiplicity.max(m);
            }
            // a simple root next to the candidate makes a single small singular value there
            Some(_) if m == 1 => {}
            _ => extra.push(FdEigen { lambda: c, multiplicity: m }),
        }
    }
    roots.extend(extra);
    roots.sort_by(|a, b| a.lambda.partial_cmp(&b.lambda).unwrap());
    Ok(roots)
}

const REFINE_DEPTH: usize = 4;
const REFINE_POINTS: usize = 16;

/// Roots from sign changes of sampled `secular`. A local minimum of `|f|`
/// without a sign change may hide a close pair of roots; its neighbourhood
/// is resampled, `depth` times at most.
fn sign_changes(disc: &FdDiscretization, xs: &[f64], fs: &[f64], depth: usize, out: &mut Vec<f64>) -> Result<()> {
    for i in 0..xs.len() {
        if fs[i] == 0.0 {
            out.push(xs[i]);
        } else if i + 1 < xs.len() && fs[i] * fs[i + 1] < 0.0 {
            out.push(bisect(&|l| disc.secular(l), xs[i], xs[i + 1]).map_err(|e| Error::ConvergenceFailure(e.to_string()))?);
        } else if depth > 0
            && i > 0
            && i + 1 < xs.len()
            && fs[i - 1] * fs[i] > 0.0
            && fs[i] * fs[i + 1] > 0.0
            && fs[i].abs() < fs[i - 1].abs()
            && fs[i].abs() < fs[i + 1].abs()
        {
            let (a, b) = (xs[i - 1], xs[i + 1]);
            let sub: Vec<f64> = (0..=REFINE_POINTS).map(|m| a + (b - a) * m as f64 / REFINE_POINTS as f64).collect();
            let fsub: Vec<f64> = sub.iter().map(|&x| disc.secular(x)).collect();
            // endpoints carry no sign change, so only interior pairs can appear
            sign_changes(disc, &sub, &fsub, depth - 1, out)?;
        }
    }
    Ok(())
}

fn push_root(out: &mut Vec<FdEigen>, disc: &FdDiscretization, r: f64) {
    if out.iter().any(|e| (e.lambda - r).abs() <= 1e-12 * r.abs().max(1e-12)) {
        return;
    }
    let m = disc.nullity(r, ROOT_TOL).max(1);
    out.push(FdEigen { lambda: r, multiplicity: m });
}

/// The `count` eigenvalues of smallest modulus inside `window`, repeated by
/// multiplicity and sorted ascending.
pub fn fd_eigenvalues(disc: &FdDiscretization, count: usize, window: (f64, f64)) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::Core(signet_core::Error::InvalidArgument("count must be at least 1".into())));
    }
    let spec = fd_spectrum(disc, window)?;
    let mut all: Vec<f64> = spec.iter().flat_map(|e| std::iter::repeat(e.lambda).take(e.multiplicity)).collect();
    all.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
    all.truncate(count);
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(all)
}

/// Clusters holding the `count` eigenvalues of smallest modulus (counted with
/// multiplicity), ascending. The symmetric window grows until it holds them.
pub fn fd_lowest(disc: &FdDiscretization, count: usize) -> Result<Vec<FdEigen>> {
    if count == 0 {
        return Err(Error::Core(signet_core::Error::InvalidArgument("count must be at least 1".into())));
    }
    let net = &disc.network;
    let kmax = net.edges.iter().map(|e| e.conductivity.abs()).fold(0.0, f64::max);
    let total: f64 = net.lengths().iter().sum();
    let mut w = kmax * (std::f64::consts::PI * (count as f64 + 1.0) / total).powi(2);
    for _ in 0..12 {
        let spec = fd_spectrum(disc, (-w, w))?;
        if spec.iter().map(|e| e.multiplicity).sum::<usize>() >= count {
            let mut by_mod = spec;
            by_mod.sort_by(|a, b| a.lambda.abs().partial_cmp(&b.lambda.abs()).unwrap());
            let mut out = Vec::new();
            let mut n = 0;
            for e in by_mod {
                if n >= count {
                    break;
                }
                n += e.multiplicity;
                out.push(e);
            }
            out.sort_by(|a, b| a.lambda.partial_cmp(&b.lambda).unwrap());
            return Ok(out);
        }
        w *= 4.0;
    }
    Err(Error::ConvergenceFailure(format!("fewer than {count} eigenvalues below {w}")))
}

/// Solves `-(k u')' = f` (standard) or `-u'' = f` with `k`-weighted fluxes
/// (pseudo); `f` holds node samples per edge.
pub fn fd_solve(disc: &FdDiscretization, f: &[Vec<f64>]) -> Result<FdSolution> {
    if f.len() != disc.network.num_edges() || f.iter().zip(&disc.intervals).any(|(v, &n)| v.len() != n + 1) {
        return Err(Error::Core(signet_core::Error::ShapeMismatch));
    }
    let sys = disc.solve_system(0.0, Some(f));
    let sv = sys.matrix.singular_values();
    let condition = sv.max() / sv.min();
    if !(condition < 1e14) {
        return Err(Error::SingularSystem);
    }
    let coef = sys.matrix.clone().lu().solve(&sys.rhs).ok_or(Error::SingularSystem)?;
    let mut grids = Vec::new();
    let mut values = Vec::new();
    for (j, [p, q, r]) in sys.solutions.iter().enumerate() {
        let c = coef[2 * j] * sys.col_scale[2 * j];
        let d = coef[2 * j + 1] * sys.col_scale[2 * j + 1];
        grids.push(node_grid(disc, j));
        values.push(p.iter().zip(q).zip(r).map(|((&pi, &qi), &ri)| c * pi + d * qi + ri).collect());
    }
    Ok(FdSolution { grids, values, condition })
}

/// Node samples of `f(edge, x)` on the mesh.
pub fn sample_source(disc: &FdDiscretization, f: impl Fn(usize, f64) -> f64) -> Vec<Vec<f64>> {
    (0..disc.network.num_edges()).map(|j| node_grid(disc, j).into_iter().map(|x| f(j, x)).collect()).collect()
}

pub fn node_grid(disc: &FdDiscretization, j: usize) -> Vec<f64> {
    (0..=disc.intervals[j]).map(|i| i as f64 * disc.steps[j]).collect()
}

/// Full stiffness matrix and diagonal mass over every node of every edge,
/// with vertex conditions as coupling rows of zero mass.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSystem {
    pub stiffness: DMatrix<f64>,
    pub mass: DVector<f64>,
    /// Global index of node `i` of edge `j` is `offsets[j] + i`.
    pub offsets: Vec<usize>,
}

/// Dense assembly, meant for coarse meshes.
pub fn fd_dense(disc: &FdDiscretization) -> DenseSystem {
    let ne = disc.network.num_edges();
    let mut offsets = Vec::with_capacity(ne);
    let mut dim = 0;
    for &n in &disc.intervals {
        offsets.push(dim);
        dim += n + 1;
    }
    let mut k_mat = DMatrix::zeros(dim, dim);
    let mut mass = DVector::zeros(dim);
    let junctions = disc.junctions();
    let mut first_end: Vec<Option<usize>> = vec![None; junctions.len()];
    // flux contributions collected per junction, written once every end is known
    let mut flux: Vec<Vec<(usize, f64)>> = vec![Vec::new(); junctions.len()];
    for j in 0..ne {
        let (o, n, h) = (offsets[j], disc.intervals[j], disc.steps[j]);
        let k = disc.network.edges[j].conductivity;
        let w = disc.weight(j);
        let c = k / (h * h);
        for i in 1..n {
            k_mat[(o + i, o + i - 1)] = -c;
            k_mat[(o + i, o + i)] = 2.0 * c;
            k_mat[(o + i, o + i + 1)] = -c;
            mass[o + i] = w;
        }
        let (from, to) = disc.ends(j, &junctions);
        for (end, node, inner) in [(from, 0usize, 1usize), (to, n, n - 1)] {
            let row = o + node;
            match end {
                End::Dirichlet => k_mat[(row, row)] = 1.0,
                End::Neumann => {
                    k_mat[(row, row)] = 2.0 * c;
                    k_mat[(row, o + inner)] = -2.0 * c;
                    mass[row] = w;
                }
                End::Vertex(v) => {
                    let second = if node == 0 { 2 } else { n - 2 };
                    // -k ψ'(0) and +k ψ'(L) share the stencil (3, -4, 1) from the end inward
                    let s = k / (2.0 * h);
                    flux[v].extend([(row, 3.0 * s), (o + inner, -4.0 * s), (o + second, s)]);
                    match first_end[v] {
                        None => first_end[v] = Some(row),
                        Some(f) => {
                            k_mat[(row, row)] = 1.0;
                            k_mat[(row, f)] = -1.0;
                        }
                    }
                }
            }
        }
    }
    for (v, terms) in flux.iter().enumerate() {
        let row = first_end[v].unwrap();
        for &(col, val) in terms {
            k_mat[(row, col)] += val;
        }
    }
    DenseSystem { stiffness: k_mat, mass, offsets }
}

impl DenseSystem {
    /// Eliminates the zero-mass rows: `(K_dd - K_dc K_cc⁻¹ K_cd) u = λ M_d u`,
    /// returned as `M_d⁻¹ S`.
    pub fn reduced(&self) -> Result<DMatrix<f64>> {
        let dynamic: Vec<usize> = (0..self.mass.len()).filter(|&i| self.mass[i] != 0.0).collect();
        let constrained: Vec<usize> = (0..self.mass.len()).filter(|&i| self.mass[i] == 0.0).collect();
        let pick = |r: &[usize], c: &[usize]| DMatrix::from_fn(r.len(), c.len(), |i, j| self.stiffness[(r[i], c[j])]);
        let kdd = pick(&dynamic, &dynamic);
        let kdc = pick(&dynamic, &constrained);
        let kcd = pick(&constrained, &dynamic);
        let kcc = pick(&constrained, &constrained);
        let x = kcc.lu().solve(&kcd).ok_or(Error::SingularSystem)?;
        let mut s = kdd - kdc * x;
        for (i, &d) in dynamic.iter().enumerate() {
            s.row_mut(i).scale_mut(1.0 / self.mass[d]);
        }
        Ok(s)
    }
}

/// All eigenvalues of the dense reduced problem, sorted by real part.
pub fn fd_dense_eigenvalues(disc: &FdDiscretization) -> Result<Vec<Complex64>> {
    let a = fd_dense(disc).reduced()?;
    if a.nrows() > 4000 {
        return Err(Error::Core(signet_core::Error::InvalidArgument("dense solve limited to 4000 unknowns".into())));
    }
    let mut ev: Vec<Complex64> = a.complex_eigenvalues().iter().copied().collect();
    if ev.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::ConvergenceFailure("dense eigensolver".into()));
    }
    ev.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use signet_core::graph::{build_star, build_tadpole2, Boundary, Edge, Topology, VertexCondition};
    use std::f64::consts::PI;

    fn interval() -> Network {
        build_star(&[0.5, 0.5], &[1.0, 1.0], &[Boundary::Dirichlet; 2]).unwrap()
    }

    fn single_edge() -> Network {
        let net = Network {
            edges: vec![Edge { id: 1, length: 1.0, conductivity: 1.0, from: "a".into(), to: "b".into() }],
            conditions: vec![
                VertexCondition { vertex: "a".into(), kind: VertexKind::Dirichlet },
                VertexCondition { vertex: "b".into(), kind: VertexKind::Dirichlet },
            ],
            topology: Topology::General,
        };
        net.validate().unwrap();
        net
    }

    #[test]
    fn structured_matches_dense() {
        let nets = [
            build_star(&[1.0, 1.0, 1.0], &[1.0, 1.0, -0.5], &[Boundary::Dirichlet; 3]).unwrap(),
            build_star(&[1.0, 0.7, 1.3], &[2.0, -1.0, -0.5], &[Boundary::Dirichlet, Boundary::Neumann, Boundary::Dirichlet]).unwrap(),
            build_tadpole2(1.0, 0.7, 1.0, -2.0).unwrap(),
        ];
        for net in &nets {
            for op in [Operator::Standard, Operator::Pseudo] {
                let d = fd_assemble(net, 1.0 / 24.0, op).unwrap();
                let dense = fd_dense_eigenvalues(&d).unwrap();
                let real: Vec<f64> = dense.iter().filter(|z| z.im.abs() < 1e-8).map(|z| z.re).filter(|l| l.abs() < 300.0).collect();
                let mut fast = fd_eigenvalues(&d, 1000, (-300.0, 300.0)).unwrap();
                fast.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let mut real = real;
                real.sort_by(|a, b| a.partial_cmp(b).unwrap());
                assert_eq!(fast.len(), real.len(), "{op:?} {:?}\n{fast:?}\n{real:?}", net.topology);
                for (a, b) in fast.iter().zip(&real) {
                    assert!((a - b).abs() < 1e-7 * b.abs().max(1.0), "{a} {b}");
                }
            }
        }
    }

    #[test]
    fn classical_interval() {
        let d = fd_assemble(&single_edge(), 1e-3, Operator::Standard).unwrap();
        let ev = fd_eigenvalues(&d, 5, (0.0, 400.0)).unwrap();
        assert_eq!(ev.len(), 5);
        for (n, l) in ev.iter().enumerate() {
            let want = ((n + 1) as f64 * PI).powi(2);
            // leading error of the three-point Laplacian is λ²h²/12
            let bound = if n < 3 { 1e-5 } else { 1.05 * want * 1e-6 / 12.0 };
            assert!((l - want).abs() < bound * want, "{l} {want}");
        }
        for net in [interval(), build_star(&[1.0, 1.0], &[1.0, 1.0], &[Boundary::Dirichlet; 2]).unwrap()] {
            let len: f64 = net.lengths().iter().sum();
            let d = fd_assemble(&net, 1e-3, Operator::Standard).unwrap();
            let ev = fd_eigenvalues(&d, 4, (0.0, 200.0)).unwrap();
            for (n, l) in ev.iter().enumerate() {
                let want = ((n + 1) as f64 * PI / len).powi(2);
                assert!((l - want).abs() < 2e-5 * want, "{l} {want}");
            }
        }
    }

    #[test]
    fn pseudo_clusters() {
        let net = build_star(&[1.0; 4], &[1.0, 1.0, -2.0, -2.0], &[Boundary::Dirichlet; 4]).unwrap();
        let d = fd_assemble(&net, 1e-3, Operator::Pseudo).unwrap();
        let spec = fd_spectrum(&d, (0.0, 45.0)).unwrap();
        // λ = π²/4 simple, π² with multiplicity 3, 9π²/4 simple, 4π² triple
        let m: Vec<usize> = spec.iter().map(|e| e.multiplicity).collect();
        assert_eq!(m, vec![1, 3, 1, 3]);
        assert!((spec[1].lambda - PI * PI).abs() < 1e-2);
    }

    #[test]
    fn close_pairs_are_not_skipped() {
        // two roots 0.14 apart in sqrt(λ), closer than one scan step
        let net = build_star(&[1.0, 2f64.sqrt(), 3f64.sqrt()], &[1.0, 1.0, -0.5], &[Boundary::Dirichlet; 3]).unwrap();
        let d = fd_assemble(&net, 1e-3, Operator::Pseudo).unwrap();
        let spec = fd_spectrum(&d, (150.0, 180.0)).unwrap();
        let l: Vec<f64> = spec.iter().map(|e| e.lambda).collect();
        assert_eq!(l.len(), 2, "{l:?}");
        assert!((l[0] - 163.13).abs() < 0.05 && (l[1] - 166.73).abs() < 0.05, "{l:?}");
        assert_eq!(fd_lowest(&d, 5).unwrap().len(), 5);
    }

    #[test]
    fn mesh_guard_and_solve() {
        assert!(matches!(fd_assemble(&interval(), 0.07, Operator::Standard), Err(Error::MeshTooCoarse { .. })));
        let d = fd_assemble(&interval(), 1e-3, Operator::Standard).unwrap();
        let f = sample_source(&d, |_, _| 1.0);
        let s = fd_solve(&d, &f).unwrap();
        // quadratics are reproduced exactly; the interval is split at its midpoint
        let err = s.l2_distance(|_, x| 0.5 * x * (1.0 - x));
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn near_resonance_blows_up_condition() {
        let mut last = 0.0;
        for eps in [1e-1, 1e-3, 1e-5] {
            let net = build_star(&[1.0, 1.0], &[1.0, -1.0 - eps], &[Boundary::Dirichlet; 2]).unwrap();
            let d = fd_assemble(&net, 1e-2, Operator::Standard).unwrap();
            let c = fd_solve(&d, &sample_source(&d, |_, _| 1.0)).unwrap().condition;
            assert!(c > last * 10.0);
            last = c;
        }
        let net = build_star(&[1.0, 1.0], &[1.0, -1.0], &[Boundary::Dirichlet; 2]).unwrap();
        let d = fd_assemble(&net, 1e-2, Operator::Standard).unwrap();
        assert_eq!(fd_solve(&d, &sample_source(&d, |_, _| 1.0)), Err(Error::SingularSystem));
    }
}
