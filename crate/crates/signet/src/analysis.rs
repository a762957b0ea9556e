//! Maps a parsed network onto the closed-form spectrum it supports.
//!
//! The closed forms fix the positive conductivity (the tadpole head) at 1.
//! Dividing the operator by that value keeps the eigenfunctions; standard
//! eigenvalues scale by it and pseudo eigenvalues do not move.

use signet_core::graph::{Boundary, Network, PartitionSummary, Topology};
use signet_core::spectra::{
    spectrum_star_equilateral_pseudo, spectrum_star_equilateral_standard, spectrum_star_irrational_pseudo,
    spectrum_star_irrational_standard, spectrum_star_mixed_pseudo, spectrum_star_mixed_standard, spectrum_tadpole_pseudo,
    spectrum_tadpole_standard, Operator, Spectrum,
};
use signet_core::Error as CoreError;

use crate::error::Result;

#[derive(Debug, Clone)]
pub struct Analysis {
    /// Eigenpairs in the network's own edge order and units.
    pub spectrum: Spectrum,
    /// Conductivity the closed forms were normalised by.
    pub scale: f64,
    /// Negative over positive conductivity.
    pub ratio: f64,
}

fn unsupported(why: &str) -> CoreError {
    CoreError::InvalidArgument(format!("no closed-form spectrum: {why}"))
}

/// `(k+, k-)` when the network uses exactly two conductivities of opposite sign.
pub fn two_phase(net: &Network) -> Option<(f64, f64)> {
    let kp = net.edges.iter().map(|e| e.conductivity).find(|&k| k > 0.0)?;
    let km = net.edges.iter().map(|e| e.conductivity).find(|&k| k < 0.0)?;
    net.edges.iter().all(|e| e.conductivity == kp || e.conductivity == km).then_some((kp, km))
}

fn class_of(net: &Network, j: usize) -> usize {
    let pos = net.edges[j].conductivity > 0.0;
    let dir = net.star_boundary(j) == Boundary::Dirichlet;
    match (pos, dir) {
        (true, true) => 0,
        (true, false) => 1,
        (false, true) => 2,
        (false, false) => 3,
    }
}

fn equilateral(l: &[f64]) -> bool {
    l.iter().all(|&x| x == l[0])
}

/// Closed-form spectrum of a two-phase star or two-edge tadpole.
pub fn spectrum_of(net: &Network, op: Operator, n_max: usize) -> Result<Analysis> {
    let lengths = net.lengths();
    let (spectrum, scale, ratio, order) = match net.topology {
        Topology::StarDirichlet | Topology::StarMixed => {
            let (kp, km) = two_phase(net).ok_or_else(|| unsupported("star conductivities must take one positive and one negative value"))?;
            let r = km / kp;
            let p = net.partition_summary()?;
            // closed forms index edges in class order D+, N+, D-, N-
            let mut order: Vec<usize> = (0..net.num_edges()).collect();
            order.sort_by_key(|&j| class_of(net, j));
            let l: Vec<f64> = order.iter().map(|&j| lengths[j]).collect();
            let s = if net.topology == Topology::StarDirichlet && equilateral(&l) && l[0] == 1.0 {
                match op {
                    Operator::Standard => spectrum_star_equilateral_standard(p.d, p.n, r, n_max)?,
                    Operator::Pseudo => spectrum_star_equilateral_pseudo(p.d, p.n, r, n_max)?,
                }
            } else if net.topology == Topology::StarDirichlet && !equilateral(&l) {
                match op {
                    Operator::Standard => spectrum_star_irrational_standard(&l, p.d, r, n_max)?,
                    Operator::Pseudo => spectrum_star_irrational_pseudo(&l, p.d, r, n_max)?,
                }
            } else {
                let counts = PartitionSummary::new(p.nd_plus, p.nn_plus, p.nd_minus, p.nn_minus);
                match op {
                    Operator::Standard => spectrum_star_mixed_standard(counts, r, &l, n_max)?,
                    Operator::Pseudo => spectrum_star_mixed_pseudo(counts, r, &l, n_max)?,
                }
            };
            (s, kp, r, order)
        }
        Topology::Tadpole2 => {
            let (k1, k2) = (net.edges[0].conductivity, net.edges[1].conductivity);
            if k1 * k2 >= 0.0 {
                return Err(unsupported("tadpole conductivities must change sign").into());
            }
            let r = k2 / k1;
            let s = match op {
                Operator::Standard => spectrum_tadpole_standard(lengths[0], lengths[1], r, n_max)?,
                Operator::Pseudo => spectrum_tadpole_pseudo(lengths[0], lengths[1], r, n_max)?,
            };
            (s, k1, r, vec![0, 1])
        }
        _ => return Err(unsupported("only stars and two-edge tadpoles have closed forms").into()),
    };
    Ok(Analysis { spectrum: relabel(spectrum, net, scale, &order), scale, ratio })
}

/// Moves edge `i` of every eigenfunction to `order[i]`, attaches `net` and
/// rescales standard eigenvalues by `scale`.
fn relabel(mut s: Spectrum, net: &Network, scale: f64, order: &[usize]) -> Spectrum {
    for p in s.positive.iter_mut().chain(s.negative.iter_mut()) {
        for f in &mut p.functions {
            let mut edges = f.edges.clone();
            let mut lengths = f.lengths.clone();
            for (i, &j) in order.iter().enumerate() {
                edges[j] = f.edges[i].clone();
                lengths[j] = f.lengths[i];
            }
            f.edges = edges;
            f.lengths = lengths;
        }
        if s.operator == Operator::Standard {
            p.lambda *= scale;
        }
    }
    if s.operator == Operator::Standard && scale < 0.0 {
        std::mem::swap(&mut s.positive, &mut s.negative);
    }
    s.network = net.clone();
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_network;
    use signet_core::basis::{gram_report, Weight};
    use std::f64::consts::PI;

    #[test]
    fn pseudo_equilateral_is_scale_free() {
        let text = "edge 1 length=1 conductivity=3 from=a to=c\nedge 2 length=1 conductivity=-3 from=b to=c\nedge 3 length=1 conductivity=-3 from=d to=c\nbc a dirichlet\nbc b dirichlet\nbc d dirichlet\nbc c kirchhoff\n";
        let a = spectrum_of(&parse_network(text).unwrap(), Operator::Pseudo, 10).unwrap();
        assert_eq!(a.ratio, -1.0);
        for (n, p) in a.spectrum.positive.iter().take(10).enumerate() {
            let n = (n + 1) as f64;
            assert!((p.lambda - n * n * PI * PI / 4.0).abs() < 1e-9 * p.lambda, "{}", p.lambda);
        }
    }

    #[test]
    fn standard_eigenvalues_scale_with_k_plus() {
        let mk = |kp: f64, km: f64| format!("edge 1 length=1 conductivity={kp} from=a to=c\nedge 2 length=1 conductivity={km} from=b to=c\nbc a dirichlet\nbc b dirichlet\nbc c kirchhoff\n");
        let one = spectrum_of(&parse_network(&mk(1.0, -0.5)).unwrap(), Operator::Standard, 5).unwrap().spectrum;
        let two = spectrum_of(&parse_network(&mk(2.0, -1.0)).unwrap(), Operator::Standard, 5).unwrap().spectrum;
        for (a, b) in one.lambdas().iter().zip(two.lambdas()) {
            assert!((2.0 * a - b).abs() < 1e-12 * b.abs().max(1.0));
        }
        assert_eq!(two.network.conductivities(), vec![2.0, -1.0]);
    }

    #[test]
    fn mixed_star_keeps_file_edge_order() {
        // file order D-, N+, D+ becomes D+, N+, D- inside the closed form
        let text = "edge 5 length=1 conductivity=-0.5 from=a to=c\nedge 6 length=1 conductivity=1 from=b to=c\nedge 7 length=1 conductivity=1 from=d to=c\nbc a dirichlet\nbc b neumann\nbc d dirichlet\nbc c kirchhoff\n";
        let net = parse_network(text).unwrap();
        let a = spectrum_of(&net, Operator::Standard, 6).unwrap();
        let ids: Vec<u32> = a.spectrum.network.edges.iter().map(|e| e.id).collect();
        assert_eq!(ids, vec![6, 7, 5]);
        let g = gram_report(&a.spectrum, &Weight::Plain).unwrap();
        assert!(g.max_deviation() < 1e-9);
        // Dirichlet ends vanish
        for m in a.spectrum.modes() {
            assert!(m.function.eval(1, 0.0).abs() < 1e-12);
            assert!(m.function.eval(2, 0.0).abs() < 1e-12);
        }
    }

    #[test]
    fn general_graphs_are_refused() {
        let text = "edge 1 length=1 conductivity=1 from=a to=b\nbc a dirichlet\nbc b dirichlet\n";
        assert!(spectrum_of(&parse_network(text).unwrap(), Operator::Standard, 3).is_err());
    }
}
