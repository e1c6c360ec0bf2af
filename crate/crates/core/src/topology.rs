//! Directed trust topologies and the line-oriented `.trust` file format.
//!
//! ```text
//! # comment
//! node <id>
//! source <id>
//! dest <id>
//! edge <from> <to> <trust> [<untrust>]
//! ```
//!
//! Declarations may come in any order. Node order is the order of `node`
//! lines and drives every tie-break downstream.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::trust::{Complementarity, TrustError, TrustPair};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopologyError {
    #[error("invalid node id {0:?} (ids must be non-empty and contain no whitespace or '#')")]
    InvalidNodeId(String),
    #[error("node {0} declared twice")]
    DuplicateNode(String),
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("self-loop on node {0}")]
    SelfLoop(String),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(String, String),
    #[error("no source declared")]
    MissingSource,
    #[error("no destination declared")]
    MissingDestination,
    #[error("source and destination are both {0}")]
    SourceIsDestination(String),
    #[error("mesh needs at least one layer and every layer at least one node")]
    EmptyMesh,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("unknown directive")]
    UnknownDirective,
    #[error("wrong number of arguments")]
    Arity,
    #[error("not a number")]
    BadNumber,
    #[error("{0} declared more than once")]
    Redeclared(&'static str),
    #[error(transparent)]
    Trust(#[from] TrustError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// A parse failure pinned to a 1-based line and the token that caused it.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {kind} (at {token:?})")]
pub struct ParseError {
    pub line: usize,
    pub token: String,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn new(line: usize, token: impl Into<String>, kind: impl Into<ParseErrorKind>) -> Self {
        ParseError {
            line,
            token: token.into(),
            kind: kind.into(),
        }
    }
}

/// An immutable directed graph with a designated source and destination.
///
/// Equality is structural: node order, edge set with values, and endpoints.
#[derive(Debug, Clone)]
pub struct Topology {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    edges: BTreeMap<(usize, usize), TrustPair>,
    // Successor lists sorted by declaration index.
    successors: Vec<Vec<usize>>,
    source: usize,
    destination: usize,
}

impl PartialEq for Topology {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes
            && self.edges == other.edges
            && self.source == other.source
            && self.destination == other.destination
    }
}

impl Topology {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Node ids in declaration order.
    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_id(&self, idx: usize) -> &str {
        &self.nodes[idx]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn destination(&self) -> usize {
        self.destination
    }

    pub fn source_id(&self) -> &str {
        &self.nodes[self.source]
    }

    pub fn destination_id(&self) -> &str {
        &self.nodes[self.destination]
    }

    /// Successors of `idx` in declaration order.
    pub fn successors(&self, idx: usize) -> &[usize] {
        &self.successors[idx]
    }

    pub fn edge(&self, from: usize, to: usize) -> Option<TrustPair> {
        self.edges.get(&(from, to)).copied()
    }

    pub fn edge_by_id(&self, from: &str, to: &str) -> Option<TrustPair> {
        self.edge(self.index_of(from)?, self.index_of(to)?)
    }

    /// Edges ordered by (from, to) declaration index.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, TrustPair)> + '_ {
        self.edges.iter().map(|(&(f, t), &p)| (f, t, p))
    }

    /// Rebuilds the topology with `f` applied to every edge pair.
    pub fn map_edges(&self, mut f: impl FnMut(TrustPair) -> TrustPair) -> Topology {
        let mut out = self.clone();
        for pair in out.edges.values_mut() {
            *pair = f(*pair);
        }
        out
    }
}

/// Incremental construction with validation deferred to [`build`].
///
/// [`build`]: TopologyBuilder::build
#[derive(Debug, Clone, Default)]
pub struct TopologyBuilder {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<(String, String, TrustPair)>,
    source: Option<String>,
    destination: Option<String>,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && !id.chars().any(|c| c.is_whitespace() || c == '#')
}

impl TopologyBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&mut self, id: &str) -> Result<&mut Self, TopologyError> {
        if !valid_id(id) {
            return Err(TopologyError::InvalidNodeId(id.to_string()));
        }
        if self.index.contains_key(id) {
            return Err(TopologyError::DuplicateNode(id.to_string()));
        }
        self.index.insert(id.to_string(), self.nodes.len());
        self.nodes.push(id.to_string());
        Ok(self)
    }

    pub fn edge(&mut self, from: &str, to: &str, pair: TrustPair) -> &mut Self {
        self.edges.push((from.to_string(), to.to_string(), pair));
        self
    }

    /// Replaces the value of an already added edge, or adds it.
    pub fn set_edge(&mut self, from: &str, to: &str, pair: TrustPair) -> &mut Self {
        match self.edges.iter_mut().find(|(f, t, _)| f == from && t == to) {
            Some(entry) => entry.2 = pair,
            None => self.edges.push((from.to_string(), to.to_string(), pair)),
        }
        self
    }

    pub fn source(&mut self, id: &str) -> &mut Self {
        self.source = Some(id.to_string());
        self
    }

    pub fn destination(&mut self, id: &str) -> &mut Self {
        self.destination = Some(id.to_string());
        self
    }

    fn resolve(&self, id: &str) -> Result<usize, TopologyError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| TopologyError::UnknownNode(id.to_string()))
    }

    fn add_resolved_edge(
        &self,
        edges: &mut BTreeMap<(usize, usize), TrustPair>,
        from: &str,
        to: &str,
        pair: TrustPair,
    ) -> Result<(), TopologyError> {
        let f = self.resolve(from)?;
        let t = self.resolve(to)?;
        if f == t {
            return Err(TopologyError::SelfLoop(from.to_string()));
        }
        if edges.insert((f, t), pair).is_some() {
            return Err(TopologyError::DuplicateEdge(
                from.to_string(),
                to.to_string(),
            ));
        }
        Ok(())
    }

    fn endpoints(&self) -> Result<(usize, usize), TopologyError> {
        let source = self.source.as_deref().ok_or(TopologyError::MissingSource)?;
        let destination = self
            .destination
            .as_deref()
            .ok_or(TopologyError::MissingDestination)?;
        let (s, d) = (self.resolve(source)?, self.resolve(destination)?);
        if s == d {
            return Err(TopologyError::SourceIsDestination(source.to_string()));
        }
        Ok((s, d))
    }

    pub fn build(&self) -> Result<Topology, TopologyError> {
        let mut edges = BTreeMap::new();
        for (from, to, pair) in &self.edges {
            self.add_resolved_edge(&mut edges, from, to, *pair)?;
        }
        let (source, destination) = self.endpoints()?;
        Ok(assemble(
            self.nodes.clone(),
            self.index.clone(),
            edges,
            source,
            destination,
        ))
    }
}

fn assemble(
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    edges: BTreeMap<(usize, usize), TrustPair>,
    source: usize,
    destination: usize,
) -> Topology {
    let mut successors = vec![Vec::new(); nodes.len()];
    // BTreeMap iteration keeps each list sorted by target index.
    for &(f, t) in edges.keys() {
        successors[f].push(t);
    }
    Topology {
        nodes,
        index,
        edges,
        successors,
        source,
        destination,
    }
}

/// A parsed file: the topology plus the line each declaration came from.
#[derive(Debug, Clone, PartialEq)]
pub struct TopologyDocument {
    pub topology: Topology,
    pub node_lines: Vec<usize>,
    pub edge_lines: BTreeMap<(usize, usize), usize>,
    pub source_line: usize,
    pub destination_line: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ParseOptions {
    pub complementarity: Complementarity,
}

fn parse_number(line: usize, token: &str) -> Result<f64, ParseError> {
    let ok = !token.is_empty()
        && token
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'));
    match token.parse::<f64>() {
        Ok(v) if ok => Ok(v),
        _ => Err(ParseError::new(line, token, ParseErrorKind::BadNumber)),
    }
}

pub fn parse_topology(text: &str) -> Result<Topology, ParseError> {
    parse_document(text, ParseOptions::default()).map(|doc| doc.topology)
}

pub fn parse_topology_with(text: &str, options: ParseOptions) -> Result<Topology, ParseError> {
    parse_document(text, options).map(|doc| doc.topology)
}

pub fn parse_document(text: &str, options: ParseOptions) -> Result<TopologyDocument, ParseError> {
    let mut builder = TopologyBuilder::new();
    let mut node_lines = Vec::new();
    let mut edge_decls: Vec<(usize, String, String, TrustPair)> = Vec::new();
    let mut source: Option<(usize, String)> = None;
    let mut destination: Option<(usize, String)> = None;
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let Some(&directive) = tokens.first() else {
            continue;
        };
        let args = &tokens[1..];
        match directive {
            "node" => {
                let [id] = args else {
                    return Err(ParseError::new(line, directive, ParseErrorKind::Arity));
                };
                builder
                    .node(id)
                    .map_err(|e| ParseError::new(line, *id, e))?;
                node_lines.push(line);
            }
            "source" | "dest" => {
                let [id] = args else {
                    return Err(ParseError::new(line, directive, ParseErrorKind::Arity));
                };
                let slot = if directive == "source" {
                    &mut source
                } else {
                    &mut destination
                };
                if slot.is_some() {
                    let what = if directive == "source" {
                        "source"
                    } else {
                        "dest"
                    };
                    return Err(ParseError::new(line, *id, ParseErrorKind::Redeclared(what)));
                }
                *slot = Some((line, id.to_string()));
            }
            "edge" => {
                let (from, to, trust_tok, untrust_tok) = match args {
                    [f, t, tr] => (*f, *t, *tr, None),
                    [f, t, tr, u] => (*f, *t, *tr, Some(*u)),
                    _ => return Err(ParseError::new(line, directive, ParseErrorKind::Arity)),
                };
                let trust = parse_number(line, trust_tok)?;
                let untrust = untrust_tok.map(|t| parse_number(line, t)).transpose()?;
                let pair =
                    TrustPair::with_rule(trust, untrust, options.complementarity).map_err(|e| {
                        let token = match &e {
                            TrustError::OutOfRange {
                                name: "untrust", ..
                            } => untrust_tok.unwrap_or(trust_tok),
                            TrustError::NotComplementary { .. } => untrust_tok.unwrap_or(trust_tok),
                            _ => trust_tok,
                        };
                        ParseError::new(line, token, e)
                    })?;
                edge_decls.push((line, from.to_string(), to.to_string(), pair));
            }
            other => {
                return Err(ParseError::new(
                    line,
                    other,
                    ParseErrorKind::UnknownDirective,
                ));
            }
        }
    }

    let eof = last_line + 1;
    let mut edges = BTreeMap::new();
    let mut edge_lines = BTreeMap::new();
    for (line, from, to, pair) in &edge_decls {
        builder
            .add_resolved_edge(&mut edges, from, to, *pair)
            .map_err(|e| {
                let token = match &e {
                    TopologyError::UnknownNode(id) => id.clone(),
                    _ => format!("{from} {to}"),
                };
                ParseError::new(*line, token, e)
            })?;
        edge_lines.insert((builder.index[from], builder.index[to]), *line);
    }

    let (source_line, source_id) =
        source.ok_or_else(|| ParseError::new(eof, "source", TopologyError::MissingSource))?;
    let (destination_line, destination_id) = destination
        .ok_or_else(|| ParseError::new(eof, "dest", TopologyError::MissingDestination))?;
    let s = builder
        .resolve(&source_id)
        .map_err(|e| ParseError::new(source_line, source_id.as_str(), e))?;
    let d = builder
        .resolve(&destination_id)
        .map_err(|e| ParseError::new(destination_line, destination_id.as_str(), e))?;
    if s == d {
        return Err(ParseError::new(
            destination_line,
            destination_id.as_str(),
            TopologyError::SourceIsDestination(destination_id.clone()),
        ));
    }

    let TopologyBuilder { nodes, index, .. } = builder;
    Ok(TopologyDocument {
        topology: assemble(nodes, index, edges, s, d),
        node_lines,
        edge_lines,
        source_line,
        destination_line,
    })
}

/// Canonical text: nodes, then source/dest, then edges in (from, to)
/// declaration order. Numbers use the shortest form that parses back to the
/// same value.
pub fn serialize_topology(t: &Topology) -> String {
    let mut out = String::new();
    for id in t.nodes() {
        let _ = writeln!(out, "node {id}");
    }
    let _ = writeln!(out, "source {}", t.source_id());
    let _ = writeln!(out, "dest {}", t.destination_id());
    for (f, to, pair) in t.edges() {
        let _ = writeln!(
            out,
            "edge {} {} {} {}",
            t.node_id(f),
            t.node_id(to),
            pair.trust(),
            pair.untrust()
        );
    }
    out
}

fn mesh_builder(layer_sizes: &[usize], pair: TrustPair) -> Result<TopologyBuilder, TopologyError> {
    if layer_sizes.is_empty() || layer_sizes.contains(&0) {
        return Err(TopologyError::EmptyMesh);
    }
    let mut b = TopologyBuilder::new();
    b.node("S")?;
    let mut layers: Vec<Vec<String>> = vec![vec!["S".to_string()]];
    let mut next = 1;
    for &size in layer_sizes {
        let layer: Vec<String> = (next..next + size).map(|n| n.to_string()).collect();
        for id in &layer {
            b.node(id)?;
        }
        next += size;
        layers.push(layer);
    }
    b.node("D")?;
    layers.push(vec!["D".to_string()]);
    for pair_of_layers in layers.windows(2) {
        for from in &pair_of_layers[0] {
            for to in &pair_of_layers[1] {
                b.edge(from, to, pair);
            }
        }
    }
    b.source("S").destination("D");
    Ok(b)
}

/// Layered mesh: `S`, layers numbered consecutively from 1, `D`, with every
/// node of one layer linked to every node of the next.
pub fn generate_mesh(layer_sizes: &[usize], pair: TrustPair) -> Result<Topology, TopologyError> {
    mesh_builder(layer_sizes, pair)?.build()
}

/// Edge values known for the 4-3-4 reference network. All other edges of
/// the mesh carry [`TrustPair::INDIFFERENT`].
pub const FIXTURE_EDGES: [(&str, &str, f64, f64); 6] = [
    ("S", "3", 0.95, 0.05),
    ("3", "7", 0.6, 0.4),
    ("7", "11", 0.9, 0.1),
    ("11", "D", 0.8, 0.2),
    ("S", "1", 0.8, 0.2),
    ("1", "7", 0.8, 0.2),
];

/// The 13-node, 32-edge reference network (source `S`, layers 1-4, 5-7,
/// 8-11, destination `D`).
pub fn paper_fixture() -> Topology {
    let mut b = mesh_builder(&[4, 3, 4], TrustPair::INDIFFERENT).expect("fixed mesh shape");
    for (from, to, trust, untrust) in FIXTURE_EDGES {
        let pair = TrustPair::new(trust, untrust).expect("fixture values are valid");
        b.set_edge(from, to, pair);
    }
    b.build().expect("fixture is a valid topology")
}

/// Header written in front of the serialized fixture.
pub const FIXTURE_HEADER: &str = "\
# Reference P2P network: S -> {1..4} -> {5..7} -> {8..11} -> D, full
# bipartite links between consecutive layers.
# Known edge values: S-3, 3-7, 7-11, 11-D, S-1, 1-7.
# Every other edge is the placeholder 0.5 0.5 (indifferent), which is
# below every known trust value.
";

pub fn paper_fixture_text() -> String {
    format!("{FIXTURE_HEADER}{}", serialize_topology(&paper_fixture()))
}
