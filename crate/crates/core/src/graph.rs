//! Metric-graph data model: edges with length, conductivity and orientation,
//! vertex conditions, and canonical builders for stars and tadpoles.
//!
//! Every edge carries a local coordinate running from 0 at `from` to `length`
//! at `to`. Kirchhoff fluxes are signed: `+k ψ'(L)` at the to-end and
//! `-k ψ'(0)` at the from-end.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub type VertexId = String;

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: u32,
    pub length: f64,
    pub conductivity: f64,
    pub from: VertexId,
    pub to: VertexId,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.from == self.to
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexKind {
    Dirichlet,
    Neumann,
    Kirchhoff,
}

impl VertexKind {
    pub fn name(self) -> &'static str {
        match self {
            VertexKind::Dirichlet => "dirichlet",
            VertexKind::Neumann => "neumann",
            VertexKind::Kirchhoff => "kirchhoff",
        }
    }
}

/// Boundary condition at the external end of a star edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Dirichlet,
    Neumann,
}

impl From<Boundary> for VertexKind {
    fn from(b: Boundary) -> Self {
        match b {
            Boundary::Dirichlet => VertexKind::Dirichlet,
            Boundary::Neumann => VertexKind::Neumann,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexCondition {
    pub vertex: VertexId,
    pub kind: VertexKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topology {
    StarDirichlet,
    StarMixed,
    Tadpole2,
    Tadpole3,
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PartitionSummary {
    pub d: usize,
    pub n: usize,
    pub nd_plus: usize,
    pub nn_plus: usize,
    pub nd_minus: usize,
    pub nn_minus: usize,
}

impl PartitionSummary {
    pub fn new(nd_plus: usize, nn_plus: usize, nd_minus: usize, nn_minus: usize) -> Self {
        PartitionSummary {
            d: nd_plus + nn_plus,
            n: nd_plus + nn_plus + nd_minus + nn_minus,
            nd_plus,
            nn_plus,
            nd_minus,
            nn_minus,
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.nd_plus + self.nn_plus == self.d
            && self.nd_minus + self.nn_minus == self.n - self.d
            && self.d <= self.n
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub edges: Vec<Edge>,
    pub conditions: Vec<VertexCondition>,
    pub topology: Topology,
}

fn check_edge(id: u32, length: f64, k: f64) -> Result<()> {
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::NonpositiveLength(id));
    }
    if k == 0.0 || !k.is_finite() {
        return Err(Error::ZeroConductivity(id));
    }
    Ok(())
}

/// Star with `N` edges meeting at a Kirchhoff center `c`; edge `j` runs from
/// its external vertex `b<j>` to `c`. Positive edges precede negative ones.
pub fn build_star(lengths: &[f64], conductivities: &[f64], boundary: &[Boundary]) -> Result<Network> {
    let n = lengths.len();
    if conductivities.len() != n || boundary.len() != n {
        return Err(Error::InvalidArgument("star lists differ in length".into()));
    }
    if n < 2 {
        return Err(Error::EmptyGraph);
    }
    let mut edges = Vec::with_capacity(n);
    let mut conditions = Vec::with_capacity(n + 1);
    for j in 0..n {
        let id = j as u32 + 1;
        check_edge(id, lengths[j], conductivities[j])?;
        let ext = format!("b{id}");
        edges.push(Edge { id, length: lengths[j], conductivity: conductivities[j], from: ext.clone(), to: "c".to_string() });
        conditions.push(VertexCondition { vertex: ext, kind: boundary[j].into() });
    }
    conditions.push(VertexCondition { vertex: "c".to_string(), kind: VertexKind::Kirchhoff });
    let mut net = Network { edges, conditions, topology: Topology::General };
    net.canonicalize();
    net.topology = net.classify();
    net.validate()?;
    Ok(net)
}

/// Two-edge tadpole: loop `e1` at `v`, tail `e2` from the Dirichlet vertex `x` to `v`.
pub fn build_tadpole2(l1: f64, l2: f64, k1: f64, k2: f64) -> Result<Network> {
    check_edge(1, l1, k1)?;
    check_edge(2, l2, k2)?;
    let net = Network {
        edges: alloc::vec![
            Edge { id: 1, length: l1, conductivity: k1, from: "v".into(), to: "v".into() },
            Edge { id: 2, length: l2, conductivity: k2, from: "x".into(), to: "v".into() },
        ],
        conditions: alloc::vec![
            VertexCondition { vertex: "x".into(), kind: VertexKind::Dirichlet },
            VertexCondition { vertex: "v".into(), kind: VertexKind::Kirchhoff },
        ],
        topology: Topology::Tadpole2,
    };
    net.validate()?;
    Ok(net)
}

/// Three-edge tadpole: `e1`, `e2` run from `w` to `v`, tail `e3` from the Dirichlet vertex `x` to `v`.
pub fn build_tadpole3(lengths: [f64; 3], conductivities: [f64; 3]) -> Result<Network> {
    for j in 0..3 {
        check_edge(j as u32 + 1, lengths[j], conductivities[j])?;
    }
    let froms = ["w", "w", "x"];
    let edges = (0..3)
        .map(|j| Edge {
            id: j as u32 + 1,
            length: lengths[j],
            conductivity: conductivities[j],
            from: froms[j].into(),
            to: "v".into(),
        })
        .collect();
    let net = Network {
        edges,
        conditions: alloc::vec![
            VertexCondition { vertex: "x".into(), kind: VertexKind::Dirichlet },
            VertexCondition { vertex: "w".into(), kind: VertexKind::Kirchhoff },
            VertexCondition { vertex: "v".into(), kind: VertexKind::Kirchhoff },
        ],
        topology: Topology::Tadpole3,
    };
    net.validate()?;
    Ok(net)
}

impl Network {
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.length).collect()
    }

    pub fn conductivities(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.conductivity).collect()
    }

    pub fn is_star(&self) -> bool {
        matches!(self.topology, Topology::StarDirichlet | Topology::StarMixed)
    }

    pub fn condition(&self, v: &str) -> Option<VertexKind> {
        self.conditions.iter().find(|c| c.vertex == v).map(|c| c.kind)
    }

    /// Condition at the from-end of edge `j`.
    pub fn from_kind(&self, j: usize) -> Option<VertexKind> {
        self.condition(&self.edges[j].from)
    }

    /// Boundary kind at the external end of star edge `j`.
    pub fn star_boundary(&self, j: usize) -> Boundary {
        match self.from_kind(j) {
            Some(VertexKind::Neumann) => Boundary::Neumann,
            _ => Boundary::Dirichlet,
        }
    }

    pub fn degrees(&self) -> BTreeMap<&str, usize> {
        let mut deg = BTreeMap::new();
        for e in &self.edges {
            *deg.entry(e.from.as_str()).or_insert(0) += 1;
            *deg.entry(e.to.as_str()).or_insert(0) += 1;
        }
        deg
    }

    /// Class counts of a star network.
    pub fn partition_summary(&self) -> Result<PartitionSummary> {
        if !self.is_star() {
            return Err(Error::UnsupportedTopology);
        }
        let mut p = PartitionSummary { n: self.edges.len(), ..Default::default() };
        for (j, e) in self.edges.iter().enumerate() {
            let dir = self.star_boundary(j) == Boundary::Dirichlet;
            match (e.conductivity > 0.0, dir) {
                (true, true) => p.nd_plus += 1,
                (true, false) => p.nn_plus += 1,
                (false, true) => p.nd_minus += 1,
                (false, false) => p.nn_minus += 1,
            }
        }
        p.d = p.nd_plus + p.nn_plus;
        Ok(p)
    }

    /// Stable reorder of star edges: positive conductivities first.
    pub fn canonicalize(&mut self) {
        if self.classify_star().is_some() {
            let (mut pos, neg): (Vec<Edge>, Vec<Edge>) = self.edges.drain(..).partition(|e| e.conductivity > 0.0);
            pos.extend(neg);
            self.edges = pos;
        }
    }

    fn classify_star(&self) -> Option<Topology> {
        let kirch: Vec<&VertexCondition> = self.conditions.iter().filter(|c| c.kind == VertexKind::Kirchhoff).collect();
        if kirch.len() != 1 || self.edges.len() < 2 {
            return None;
        }
        let c = &kirch[0].vertex;
        let deg = self.degrees();
        let mut mixed = false;
        for e in &self.edges {
            if &e.to != c || e.is_loop() || deg.get(e.from.as_str()) != Some(&1) {
                return None;
            }
            match self.condition(&e.from) {
                Some(VertexKind::Dirichlet) => {}
                Some(VertexKind::Neumann) => mixed = true,
                _ => return None,
            }
        }
        Some(if mixed { Topology::StarMixed } else { Topology::StarDirichlet })
    }

    /// Infers the topology tag from the structure.
    pub fn classify(&self) -> Topology {
        if let Some(t) = self.classify_star() {
            return t;
        }
        let e = &self.edges;
        let kind = |v: &str| self.condition(v);
        if e.len() == 2
            && e[0].is_loop()
            && e[1].to == e[0].to
            && kind(&e[0].to) == Some(VertexKind::Kirchhoff)
            && kind(&e[1].from) == Some(VertexKind::Dirichlet)
            && self.conditions.len() == 2
        {
            return Topology::Tadpole2;
        }
        if e.len() == 3
            && e[0].from == e[1].from
            && e[0].to == e[1].to
            && e[2].to == e[0].to
            && e[0].from != e[0].to
            && e[2].from != e[0].from
            && e[2].from != e[0].to
            && kind(&e[0].from) == Some(VertexKind::Kirchhoff)
            && kind(&e[0].to) == Some(VertexKind::Kirchhoff)
            && kind(&e[2].from) == Some(VertexKind::Dirichlet)
            && self.conditions.len() == 3
        {
            return Topology::Tadpole3;
        }
        Topology::General
    }

    /// Checks every structural invariant; builders call this on their output.
    pub fn validate(&self) -> Result<()> {
        if self.edges.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut ids: Vec<u32> = self.edges.iter().map(|e| e.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Validation("duplicate edge id".into()));
        }
        for e in &self.edges {
            check_edge(e.id, e.length, e.conductivity)?;
        }
        let deg = self.degrees();
        for c in &self.conditions {
            if self.conditions.iter().filter(|d| d.vertex == c.vertex).count() != 1 {
                return Err(Error::Validation(format!("vertex {} has several conditions", c.vertex)));
            }
        }
        for (v, &d) in &deg {
            let Some(kind) = self.condition(v) else {
                return Err(Error::Validation(format!("vertex {v} has no condition")));
            };
            match kind {
                VertexKind::Dirichlet | VertexKind::Neumann if d != 1 => {
                    return Err(Error::Validation(format!("{} vertex {v} has degree {d}", kind.name())));
                }
                VertexKind::Kirchhoff if d < 2 => {
                    return Err(Error::Validation(format!("kirchhoff vertex {v} has degree {d}")));
                }
                _ => {}
            }
        }
        for c in &self.conditions {
            if !deg.contains_key(c.vertex.as_str()) {
                return Err(Error::Validation(format!("condition on unknown vertex {}", c.vertex)));
            }
        }
        if !self.is_connected() {
            return Err(Error::Validation("graph is not connected".into()));
        }
        let inferred = self.classify();
        if self.topology != Topology::General && inferred != self.topology {
            return Err(Error::Validation(format!("topology tag {:?} does not match structure {:?}", self.topology, inferred)));
        }
        if self.is_star() {
            let positive_first = self.edges.windows(2).all(|w| !(w[0].conductivity < 0.0 && w[1].conductivity > 0.0));
            if !positive_first {
                return Err(Error::Validation("star edges are not in canonical order".into()));
            }
        }
        Ok(())
    }

    fn is_connected(&self) -> bool {
        let verts: Vec<&str> = self.degrees().keys().copied().collect();
        let mut seen = alloc::vec![false; verts.len()];
        let idx = |v: &str| verts.iter().position(|w| *w == v).unwrap();
        let mut stack = alloc::vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for e in &self.edges {
                let (a, b) = (idx(&e.from), idx(&e.to));
                for (p, q) in [(a, b), (b, a)] {
                    if p == i && !seen[q] {
                        seen[q] = true;
                        stack.push(q);
                    }
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Signed flux orientation of edge `j` at vertex `v`: `+1` at the to-end,
    /// `-1` at the from-end (a loop contributes both).
    pub fn flux_signs(&self, j: usize, v: &str) -> (bool, bool) {
        let e = &self.edges[j];
        (e.from == v, e.to == v)
    }

    /// Kirchhoff vertices in order of first appearance.
    pub fn junctions(&self) -> Vec<VertexId> {
        let mut out: Vec<VertexId> = Vec::new();
        for e in &self.edges {
            for v in [&e.from, &e.to] {
                if self.condition(v) == Some(VertexKind::Kirchhoff) && !out.contains(v) {
                    out.push(v.clone());
                }
            }
        }
        out
    }
}
