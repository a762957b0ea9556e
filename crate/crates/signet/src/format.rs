//! Line-oriented network description:
//!
//! ```text
//! # comment
//! edge <id> length=<float> conductivity=<float> from=<vertex> to=<vertex>
//! bc <vertex> dirichlet|neumann|kirchhoff
//! ```

use std::fmt::Write as _;

use signet_core::graph::{Edge, Network, Topology, VertexCondition, VertexKind};

use crate::error::{Error, Result};

const EDGE_KEYS: [&str; 4] = ["length", "conductivity", "from", "to"];

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse { line, reason: reason.into() }
}

fn vertex_token(line: usize, s: &str) -> Result<String> {
    if s.is_empty() || s.contains('=') || s.starts_with('#') {
        return Err(parse_err(line, format!("bad vertex id {s:?}")));
    }
    Ok(s.to_string())
}

fn float(line: usize, key: &str, s: &str) -> Result<f64> {
    let v: f64 = s.parse().map_err(|_| parse_err(line, format!("{key}: not a number: {s:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("{key}: not finite: {s:?}")));
    }
    Ok(v)
}

fn parse_edge(line: usize, tokens: &[&str]) -> Result<Edge> {
    let id_tok = tokens.first().ok_or_else(|| parse_err(line, "edge needs an id"))?;
    let id: u32 = id_tok.parse().map_err(|_| parse_err(line, format!("bad edge id {id_tok:?}")))?;
    let mut vals: [Option<&str>; 4] = [None; 4];
    for t in &tokens[1..] {
        let (k, v) = t.split_once('=').ok_or_else(|| parse_err(line, format!("expected key=value, got {t:?}")))?;
        let slot = EDGE_KEYS.iter().position(|&e| e == k).ok_or_else(|| parse_err(line, format!("unknown key {k:?}")))?;
        if vals[slot].replace(v).is_some() {
            return Err(parse_err(line, format!("duplicate key {k:?}")));
        }
    }
    let get = |i: usize| vals[i].ok_or_else(|| parse_err(line, format!("missing key {:?}", EDGE_KEYS[i])));
    Ok(Edge {
        id,
        length: float(line, "length", get(0)?)?,
        conductivity: float(line, "conductivity", get(1)?)?,
        from: vertex_token(line, get(2)?)?,
        to: vertex_token(line, get(3)?)?,
    })
}

fn parse_bc(line: usize, tokens: &[&str]) -> Result<VertexCondition> {
    let [v, kind] = tokens else {
        return Err(parse_err(line, "bc takes a vertex and a condition"));
    };
    let kind = match *kind {
        "dirichlet" => VertexKind::Dirichlet,
        "neumann" => VertexKind::Neumann,
        "kirchhoff" => VertexKind::Kirchhoff,
        other => return Err(parse_err(line, format!("unknown condition {other:?}"))),
    };
    Ok(VertexCondition { vertex: vertex_token(line, v)?, kind })
}

/// Parses and validates a network. Star edges are put in canonical order
/// (positive conductivities first, stable).
pub fn parse_network(text: &str) -> Result<Network> {
    let mut edges = Vec::new();
    let mut conditions = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = s.split_whitespace().collect();
        match tokens[0] {
            "edge" => edges.push(parse_edge(line, &tokens[1..])?),
            "bc" => conditions.push(parse_bc(line, &tokens[1..])?),
            other => return Err(parse_err(line, format!("unknown directive {other:?}"))),
        }
    }
    let mut net = Network { edges, conditions, topology: Topology::General };
    net.canonicalize();
    net.topology = net.classify();
    net.validate()?;
    Ok(net)
}

pub fn render_network(net: &Network) -> String {
    let mut out = String::new();
    for e in &net.edges {
        writeln!(out, "edge {} length={} conductivity={} from={} to={}", e.id, e.length, e.conductivity, e.from, e.to).unwrap();
    }
    for c in &net.conditions {
        writeln!(out, "bc {} {}", c.vertex, c.kind.name()).unwrap();
    }
    out
}

pub fn read_network(path: &std::path::Path) -> Result<Network> {
    let text = std::fs::read_to_string(path)?;
    parse_network(&text)
}
