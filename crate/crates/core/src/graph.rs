//! Compact metric graphs with Dirichlet pendant ends and Neumann–Kirchhoff
//! interior vertices, plus the flower-graph subclass.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexCondition {
    Dirichlet,
    Kirchhoff,
}

/// An edge parameterised as `[0, length]`, with `x = 0` at `from`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge<T> {
    pub id: String,
    pub from: usize,
    pub to: usize,
    pub length: T,
}

impl<T> Edge<T> {
    pub fn is_loop(&self) -> bool {
        self.from == self.to
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph<T> {
    vertices: Vec<String>,
    edges: Vec<Edge<T>>,
    conditions: Vec<VertexCondition>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub connected: bool,
    pub pendant_vertices: Vec<String>,
    pub degrees: Vec<(String, usize)>,
    pub total_length: f64,
}

impl<T: Scalar> MetricGraph<T> {
    /// Builds a graph from named vertices and edges. Vertices missing from
    /// `conditions` are Kirchhoff. Only referential integrity is checked here;
    /// see [`MetricGraph::validate`] for the structural invariants.
    pub fn from_parts<S: Into<String>>(
        vertices: Vec<S>,
        edges: Vec<(S, S, S, T)>,
        conditions: &BTreeMap<String, VertexCondition>,
    ) -> Result<Self> {
        let vertices: Vec<String> = vertices.into_iter().map(Into::into).collect();
        let mut index = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(Error::DuplicateId(v.clone()));
            }
        }
        let lookup = |name: &str| index.get(name).copied().ok_or_else(|| Error::UnknownVertex(name.to_string()));
        let mut seen = HashMap::new();
        let mut out = Vec::with_capacity(edges.len());
        for (id, from, to, length) in edges {
            let id: String = id.into();
            if seen.insert(id.clone(), ()).is_some() {
                return Err(Error::DuplicateId(id));
            }
            let from = lookup(&from.into())?;
            let to = lookup(&to.into())?;
            out.push(Edge { id, from, to, length });
        }
        let mut conds = vec![VertexCondition::Kirchhoff; vertices.len()];
        for (name, cond) in conditions {
            conds[lookup(name)?] = *cond;
        }
        Ok(Self { vertices, edges: out, conditions: conds })
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn condition(&self, vertex: usize) -> VertexCondition {
        self.conditions[vertex]
    }

    pub fn is_dirichlet(&self, vertex: usize) -> bool {
        self.conditions[vertex] == VertexCondition::Dirichlet
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    /// Degree of every vertex; a self-loop contributes two.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertices.len()];
        for e in &self.edges {
            deg[e.from] += 1;
            deg[e.to] += 1;
        }
        deg
    }

    pub fn total_length(&self) -> T {
        self.edges.iter().map(|e| e.length).sum()
    }

    /// Copy of the graph with one edge length replaced.
    pub fn with_edge_length(&self, edge: usize, length: T) -> Self {
        let mut g = self.clone();
        g.edges[edge].length = length;
        g
    }

    /// Copy of the graph with every length multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        let mut g = self.clone();
        for e in &mut g.edges {
            e.length = e.length * factor;
        }
        g
    }

    pub fn validate(&self) -> Result<ValidationReport> {
        if self.edges.is_empty() {
            return Err(Error::EmptyGraph);
        }
        for e in &self.edges {
            if !(e.length > T::zero()) || !e.length.is_finite() {
                return Err(Error::NonpositiveLength { edge: e.id.clone(), length: e.length.as_f64() });
            }
        }

        let n = self.vertices.len();
        let mut adj = vec![Vec::new(); n];
        for e in &self.edges {
            adj[e.from].push(e.to);
            adj[e.to].push(e.from);
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        let unreachable = seen.iter().filter(|s| !**s).count();
        if unreachable > 0 {
            return Err(Error::DisconnectedGraph { root: self.vertices[0].clone(), unreachable });
        }

        let deg = self.degrees();
        let mut pendants = Vec::new();
        for (v, cond) in self.conditions.iter().enumerate() {
            if *cond == VertexCondition::Dirichlet {
                if deg[v] != 1 {
                    return Err(Error::DirichletNotPendant { vertex: self.vertices[v].clone(), degree: deg[v] });
                }
                pendants.push(self.vertices[v].clone());
            }
        }
        if pendants.is_empty() {
            return Err(Error::NoPendant);
        }

        Ok(ValidationReport {
            vertex_count: n,
            edge_count: self.edges.len(),
            connected: true,
            pendant_vertices: pendants,
            degrees: self.vertices.iter().cloned().zip(deg).collect(),
            total_length: self.total_length().as_f64(),
        })
    }

    /// Recognises a single Dirichlet stem joined to self-loops at one
    /// Kirchhoff vertex. Loop lengths are halved.
    pub fn as_flower(&self) -> Option<FlowerSpec<T>> {
        if self.vertices.len() != 2 {
            return None;
        }
        let dirichlet: Vec<usize> = (0..2).filter(|&v| self.is_dirichlet(v)).collect();
        if dirichlet.len() != 1 {
            return None;
        }
        let root = dirichlet[0];
        let center = 1 - root;
        let mut stem = None;
        let mut loops = Vec::new();
        for e in &self.edges {
            if e.is_loop() {
                if e.from != center {
                    return None;
                }
                loops.push(e.length / T::lit(2.0));
            } else if stem.replace(e.length).is_some() {
                return None;
            }
        }
        FlowerSpec::new(stem?, loops).ok()
    }
}

/// Stem of length `L` joined to `N` loops of half-lengths `L_1..L_N`.
/// `N = 0` is the interval `[0, L]` with a Neumann end at `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowerSpec<T> {
    pub stem_length: T,
    pub loop_half_lengths: Vec<T>,
}

impl<T: Scalar> FlowerSpec<T> {
    pub fn new(stem_length: T, loop_half_lengths: Vec<T>) -> Result<Self> {
        if !(stem_length > T::zero()) || !stem_length.is_finite() {
            return Err(Error::NonpositiveLength { edge: "stem".into(), length: stem_length.as_f64() });
        }
        for (j, l) in loop_half_lengths.iter().enumerate() {
            if !(*l > T::zero()) || !l.is_finite() {
                return Err(Error::NonpositiveLength { edge: format!("loop{}", j + 1), length: l.as_f64() });
            }
        }
        Ok(Self { stem_length, loop_half_lengths })
    }

    pub fn interval(length: T) -> Result<Self> {
        Self::new(length, Vec::new())
    }

    pub fn symmetric(stem_length: T, half_length: T, loops: usize) -> Result<Self> {
        Self::new(stem_length, vec![half_length; loops])
    }

    pub fn loop_count(&self) -> usize {
        self.loop_half_lengths.len()
    }

    /// Vertex `v0` (Dirichlet) joined by edge `stem` to `v1`, which carries
    /// the self-loops `loop1..loopN` of total length `2 L_j`.
    pub fn to_graph(&self) -> MetricGraph<T> {
        let mut edges = vec![("stem".to_string(), "v0".to_string(), "v1".to_string(), self.stem_length)];
        for (j, l) in self.loop_half_lengths.iter().enumerate() {
            edges.push((format!("loop{}", j + 1), "v1".into(), "v1".into(), *l * T::lit(2.0)));
        }
        let conditions = BTreeMap::from([
            ("v0".to_string(), VertexCondition::Dirichlet),
            ("v1".to_string(), VertexCondition::Kirchhoff),
        ]);
        MetricGraph::from_parts(vec!["v0".to_string(), "v1".to_string()], edges, &conditions)
            .expect("flower graph construction is well-formed")
    }

    pub fn cast<U: Scalar>(&self) -> FlowerSpec<U> {
        FlowerSpec {
            stem_length: U::lit(self.stem_length.as_f64()),
            loop_half_lengths: self.loop_half_lengths.iter().map(|l| U::lit(l.as_f64())).collect(),
        }
    }
}

/// JSON graph description: either an explicit edge list or the flower
/// shorthand with TOTAL loop lengths.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphDoc {
    Flower { flower: FlowerDoc },
    Explicit { edges: Vec<EdgeDoc>, conditions: BTreeMap<String, VertexCondition> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowerDoc {
    pub stem: f64,
    #[serde(default)]
    pub loops: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub id: String,
    pub from: String,
    pub to: String,
    pub length: f64,
}

impl GraphDoc {
    pub fn into_graph<T: Scalar>(self) -> Result<MetricGraph<T>> {
        match self {
            GraphDoc::Flower { flower } => {
                let spec =
                    FlowerSpec::new(T::lit(flower.stem), flower.loops.iter().map(|l| T::lit(l / 2.0)).collect())?;
                Ok(spec.to_graph())
            }
            GraphDoc::Explicit { edges, conditions } => {
                let mut names: Vec<String> = Vec::new();
                let mut push = |n: &str| {
                    if !names.iter().any(|m| m == n) {
                        names.push(n.to_string());
                    }
                };
                for e in &edges {
                    push(&e.from);
                    push(&e.to);
                }
                for k in conditions.keys() {
                    push(k);
                }
                let edges = edges.into_iter().map(|e| (e.id, e.from, e.to, T::lit(e.length))).collect();
                MetricGraph::from_parts(names, edges, &conditions)
            }
        }
    }
}

/// Parses the JSON graph format (explicit or flower shorthand).
pub fn parse_graph_json<T: Scalar>(text: &str) -> Result<MetricGraph<T>> {
    let doc: GraphDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    doc.into_graph()
}
