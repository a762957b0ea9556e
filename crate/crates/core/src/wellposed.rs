//! Resonance criteria: closed-form forbidden ratios, the coercivity
//! certificate for variable conductivities, and the transmission matrix test.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{Boundary, Network, Topology};

/// Relative margin below which a network is declared resonant.
pub const RESONANCE_TOL: f64 = 1e-12;

/// `D/(N-D)`, the forbidden value of `|k-|` on an equilateral two-phase star with `k+ = 1`.
pub fn star_dirichlet_forbidden_ratio(d: usize, n: usize) -> Result<f64> {
    if d == 0 || d >= n {
        return Err(Error::BadPartition { d, n });
    }
    Ok(d as f64 / (n - d) as f64)
}

/// Forbidden `|k-|/k+` when positive edges have length `l_plus` and negative ones `l_minus`.
pub fn star_dirichlet_forbidden_ratio_lengths(d: usize, n: usize, l_plus: f64, l_minus: f64) -> Result<f64> {
    let r = star_dirichlet_forbidden_ratio(d, n)?;
    if !(l_plus > 0.0 && l_minus > 0.0) {
        return Err(Error::InvalidArgument("lengths must be positive".into()));
    }
    Ok(r * l_minus / l_plus)
}

/// Envelope `0 < inf <= |k_j(x)| <= sup` of one edge's conductivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeBound {
    pub inf: f64,
    pub sup: f64,
    pub length: f64,
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoercivityCertificate {
    pub case_used: u8,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub bounds: Vec<EdgeBound>,
}

/// Evaluates both sufficient inequalities; case 1 wins when both hold.
/// When neither holds the report carries case 1's sides.
pub fn coercivity_certificate(bounds: &[EdgeBound]) -> Result<CoercivityCertificate> {
    for b in bounds {
        if !(b.inf > 0.0 && b.inf <= b.sup && b.length > 0.0) {
            return Err(Error::InvalidArgument(format!("bad envelope {b:?}")));
        }
    }
    let pos: Vec<&EdgeBound> = bounds.iter().filter(|b| b.positive).collect();
    let neg: Vec<&EdgeBound> = bounds.iter().filter(|b| !b.positive).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::DegeneratePartition);
    }
    let d = pos.len() as f64;
    let m = neg.len() as f64;
    let max_ratio = |s: &[&EdgeBound]| s.iter().map(|b| b.sup / b.length).fold(f64::NEG_INFINITY, f64::max);
    let sum_ratio = |s: &[&EdgeBound]| s.iter().map(|b| b.length / b.inf).sum::<f64>();
    let (lhs1, rhs1) = (max_ratio(&neg) * sum_ratio(&pos), d * d / m);
    let (lhs2, rhs2) = (max_ratio(&pos) * sum_ratio(&neg), m * m / d);
    let (case_used, lhs, rhs) = if lhs1 < rhs1 {
        (1, lhs1, rhs1)
    } else if lhs2 < rhs2 {
        (2, lhs2, rhs2)
    } else {
        (1, lhs1, rhs1)
    };
    Ok(CoercivityCertificate { case_used, lhs, rhs, holds: lhs < rhs, bounds: bounds.to_vec() })
}

/// Per-edge integrals of the source: `f1 = ∫_0^L f`, `f2 = ∫_0^L ∫_0^t f(s) ds dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceMoments {
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
}

impl SourceMoments {
    pub fn zero(n: usize) -> Self {
        SourceMoments { f1: vec![0.0; n], f2: vec![0.0; n] }
    }
}

/// Value at one end of an edge as seen by the transmission system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EndValue {
    /// Dirichlet end, value 0.
    Zero,
    /// Neumann end, slope 0; value follows from the other end.
    Free,
    Unknown(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionSystem {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub unknown_labels: Vec<String>,
    /// `(from-end, to-end)` mapping for every edge.
    pub ends: Vec<(EndValue, EndValue)>,
}

impl TransmissionSystem {
    pub fn determinant(&self) -> f64 {
        self.matrix.clone().lu().determinant()
    }

    /// `|det|` over the product of row norms; scale-free and in [0, 1].
    pub fn margin(&self) -> f64 {
        let mut norms = 1.0;
        for r in self.matrix.row_iter() {
            let n = r.norm();
            if n == 0.0 {
                return 0.0;
            }
            norms *= n;
        }
        self.determinant().abs() / norms
    }

    pub fn solve(&self) -> Option<DVector<f64>> {
        self.matrix.clone().lu().solve(&self.rhs)
    }
}

/// Builds `M v = F` for stars and both tadpoles.
pub fn assemble_transmission(net: &Network, m: &SourceMoments) -> Result<TransmissionSystem> {
    let ne = net.num_edges();
    if m.f1.len() != ne || m.f2.len() != ne {
        return Err(Error::ShapeMismatch);
    }
    let l: Vec<f64> = net.lengths();
    let k: Vec<f64> = net.conductivities();
    let (f1, f2) = (&m.f1, &m.f2);
    match net.topology {
        Topology::StarDirichlet | Topology::StarMixed => {
            let mut a = DMatrix::zeros(ne, ne);
            let mut rhs = DVector::zeros(ne);
            for r in 0..ne - 1 {
                a[(r, r)] = 1.0;
                a[(r, r + 1)] = -1.0;
            }
            let mut ends = Vec::with_capacity(ne);
            let mut last = 0.0;
            for j in 0..ne {
                last += f1[j];
                match net.star_boundary(j) {
                    Boundary::Dirichlet => {
                        a[(ne - 1, j)] = k[j] / l[j];
                        last -= f2[j] / l[j];
                        ends.push((EndValue::Zero, EndValue::Unknown(j)));
                    }
                    Boundary::Neumann => ends.push((EndValue::Free, EndValue::Unknown(j))),
                }
            }
            rhs[ne - 1] = last;
            let unknown_labels = net.edges.iter().map(|e| format!("psi{}(L{})", e.id, e.id)).collect();
            Ok(TransmissionSystem { matrix: a, rhs, unknown_labels, ends })
        }
        Topology::Tadpole2 => {
            let a2 = k[1] / l[1];
            // the loop enters the junction at both ends, so its fluxes cancel
            let matrix = DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 0.0, 1.0, 0.0, -1.0, 0.0, a2, 0.0]);
            let rhs = DVector::from_vec(vec![0.0, 0.0, f1[0] + f1[1] - f2[1] / l[1]]);
            Ok(TransmissionSystem {
                matrix,
                rhs,
                unknown_labels: vec!["psi1(L1)".to_string(), "psi2(L2)".to_string(), "psi1(0)".to_string()],
                ends: vec![(EndValue::Unknown(2), EndValue::Unknown(0)), (EndValue::Zero, EndValue::Unknown(1))],
            })
        }
        Topology::Tadpole3 => {
            let r: Vec<f64> = (0..3).map(|j| k[j] / l[j]).collect();
            #[rustfmt::skip]
            let matrix = DMatrix::from_row_slice(5, 5, &[
                1.0, -1.0, 0.0, 0.0, 0.0,
                0.0, 1.0, -1.0, 0.0, 0.0,
                0.0, 0.0, 0.0, 1.0, -1.0,
                r[0], r[1], 0.0, -r[0], -r[1],
                r[0], r[1], r[2], -r[0], -r[1],
            ]);
            let rhs = DVector::from_vec(vec![
                0.0,
                0.0,
                0.0,
                -(f2[0] / l[0] + f2[1] / l[1]),
                f1[0] + f1[1] + f1[2] - f2[0] / l[0] - f2[1] / l[1] - f2[2] / l[2],
            ]);
            Ok(TransmissionSystem {
                matrix,
                rhs,
                unknown_labels: ["psi1(L1)", "psi2(L2)", "psi3(L3)", "psi1(0)", "psi2(0)"].iter().map(|s| s.to_string()).collect(),
                ends: vec![
                    (EndValue::Unknown(3), EndValue::Unknown(0)),
                    (EndValue::Unknown(4), EndValue::Unknown(1)),
                    (EndValue::Zero, EndValue::Unknown(2)),
                ],
            })
        }
        Topology::General => Err(Error::UnsupportedTopology),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    /// `|k-| != D/(N-D)` on an equilateral two-phase Dirichlet star.
    StarEquilateralRatio,
    /// `sum over Dirichlet edges of k_l/L_l != 0`.
    StarDirichletSum,
    /// Only Neumann ends: unique up to constants, never well-posed.
    NeumannOnly,
    /// Tadpole with two edges: the tail conductivity alone.
    TadpoleTail,
    /// `-k1/k2 != L1/L2` on the three-edge tadpole.
    TadpoleRatio,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceVerdict {
    pub well_posed: bool,
    pub criterion: Criterion,
    /// The quantity whose vanishing means resonance.
    pub critical_value: Option<f64>,
    /// Closed-form forbidden `|k-|` for equilateral two-phase Dirichlet stars.
    pub forbidden_ratio: Option<f64>,
    pub margin: f64,
    pub determinant: f64,
}

/// Two-phase equilateral data `(D, N, k+, k-)` when the star has that shape.
pub fn two_phase_equilateral(net: &Network) -> Option<(usize, usize, f64, f64)> {
    if net.topology != Topology::StarDirichlet {
        return None;
    }
    let e = &net.edges;
    let l0 = e[0].length;
    let kp = e.iter().find(|x| x.conductivity > 0.0)?.conductivity;
    let km = e.iter().find(|x| x.conductivity < 0.0)?.conductivity;
    let same = e.iter().all(|x| x.length == l0 && (x.conductivity == kp || x.conductivity == km));
    let d = e.iter().filter(|x| x.conductivity > 0.0).count();
    same.then_some((d, e.len(), kp, km))
}

pub fn resonance_verdict(net: &Network) -> Result<ResonanceVerdict> {
    let sys = assemble_transmission(net, &SourceMoments::zero(net.num_edges()))?;
    let det = sys.determinant();
    let margin = sys.margin();
    let k = net.conductivities();
    let l = net.lengths();
    let (criterion, critical_value, forbidden_ratio) = match net.topology {
        Topology::StarDirichlet | Topology::StarMixed => {
            let dirichlet: Vec<usize> = (0..net.num_edges()).filter(|&j| net.star_boundary(j) == Boundary::Dirichlet).collect();
            if dirichlet.is_empty() {
                (Criterion::NeumannOnly, Some(0.0), None)
            } else {
                let sum: f64 = dirichlet.iter().map(|&j| k[j] / l[j]).sum();
                if (det.abs() - sum.abs()).abs() > 1e-9 * sum.abs().max(1.0) {
                    return Err(Error::Internal(format!("determinant {det} disagrees with flux sum {sum}")));
                }
                match two_phase_equilateral(net) {
                    Some((d, n, kp, km)) => {
                        let ratio = star_dirichlet_forbidden_ratio(d, n)? * kp;
                        let closed_resonant = ((km.abs() - ratio) / ratio).abs() < RESONANCE_TOL;
                        if closed_resonant != (margin < RESONANCE_TOL) && sum.abs() > 1e-9 {
                            return Err(Error::Internal(format!("ratio test and determinant disagree for k- = {km}")));
                        }
                        (Criterion::StarEquilateralRatio, Some(sum), Some(ratio))
                    }
                    None => (Criterion::StarDirichletSum, Some(sum), None),
                }
            }
        }
        Topology::Tadpole2 => (Criterion::TadpoleTail, Some(k[1] / l[1]), None),
        Topology::Tadpole3 => (Criterion::TadpoleRatio, Some(k[0] / l[0] + k[1] / l[1]), None),
        Topology::General => return Err(Error::UnsupportedTopology),
    };
    Ok(ResonanceVerdict { well_posed: margin > RESONANCE_TOL, criterion, critical_value, forbidden_ratio, margin, determinant: det })
}
