//! Metric network representation.
//!
//! A network is a finite collection of vertices joined by edges, each edge
//! identified with an interval `[0, L]` carrying a uniform grid. Fields on the
//! network are sampled per edge including both endpoints, so functions may
//! jump across a vertex while staying smooth inside every edge. Interior
//! vertices (degree >= 2) carry the junction data used by all solvers: edge
//! weights `gamma`, a stickiness coefficient `eta >= 0` and a running cost
//! rate `theta`. Boundary vertices (degree 1) are reflecting and carry no
//! junction data.

mod calculus;
mod field;
mod spec;

pub use field::{EdgeField, GraphMeasure};
pub use spec::{EdgeSpec, NetworkSpec, VertexSpec};

pub(crate) use calculus::{one_sided_d1, one_sided_d1_order3, one_sided_d2};

use crate::error::NetError;
use crate::report::Warning;

/// Identifies which end of an edge a vertex sits at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    /// The vertex at parameter 0.
    Start,
    /// The vertex at parameter `L`.
    End,
}

impl Endpoint {
    /// Orientation sign of the edge at this endpoint: +1 at `L`, -1 at 0.
    pub fn orientation(self) -> f64 {
        match self {
            Endpoint::Start => -1.0,
            Endpoint::End => 1.0,
        }
    }

    /// Sample index of this endpoint on a grid with `n` points.
    pub fn sample_index(self, n: usize) -> usize {
        match self {
            Endpoint::Start => 0,
            Endpoint::End => n - 1,
        }
    }
}

/// Per-edge data: endpoints, length, diffusivity and grid resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeData {
    /// Vertex index at parameter 0.
    pub from: usize,
    /// Vertex index at parameter `L`.
    pub to: usize,
    pub length: f64,
    pub diffusivity: f64,
    /// Number of sample nodes on the edge, both endpoints included.
    pub grid_points: usize,
}

impl EdgeData {
    /// Grid spacing.
    pub fn h(&self) -> f64 {
        self.length / (self.grid_points - 1) as f64
    }

    /// Arclength of sample `i`.
    pub fn x(&self, i: usize) -> f64 {
        self.h() * i as f64
    }

    pub fn endpoint_vertex(&self, end: Endpoint) -> usize {
        match end {
            Endpoint::Start => self.from,
            Endpoint::End => self.to,
        }
    }
}

/// Per-vertex data. `gamma` keys exactly the incident edges, sorted by edge
/// index; it is empty for boundary vertices (the reflecting condition needs
/// no weights).
#[derive(Debug, Clone, PartialEq)]
pub struct VertexData {
    pub is_boundary: bool,
    pub eta: f64,
    pub theta: f64,
    pub gamma: Vec<(usize, f64)>,
}

/// An immutable metric network with validated junction data.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    vertices: Vec<VertexData>,
    edges: Vec<EdgeData>,
    vertex_ids: Vec<String>,
    edge_ids: Vec<String>,
    /// Per vertex: incident (edge, endpoint) pairs sorted by edge index.
    incidence: Vec<Vec<(usize, Endpoint)>>,
}

/// Tolerance for the junction weight normalization sum(mu*gamma) = 1.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Default relative tolerance for weighted-trace consistency checks.
pub const TRACE_TOL: f64 = 1e-8;

impl Network {
    /// Build and validate a network from its declarative description.
    ///
    /// Returns the network together with the non-fatal warnings produced
    /// during validation (ignored boundary data, rescaled weights).
    pub fn build(spec: &NetworkSpec) -> Result<(Self, Vec<Warning>), NetError> {
        spec::build(spec)
    }

    pub(crate) fn from_parts(
        vertices: Vec<VertexData>,
        edges: Vec<EdgeData>,
        vertex_ids: Vec<String>,
        edge_ids: Vec<String>,
    ) -> Self {
        let mut incidence = vec![Vec::new(); vertices.len()];
        for (e, edge) in edges.iter().enumerate() {
            incidence[edge.from].push((e, Endpoint::Start));
            incidence[edge.to].push((e, Endpoint::End));
        }
        for inc in &mut incidence {
            inc.sort_by_key(|&(e, _)| e);
        }
        Network { vertices, edges, vertex_ids, edge_ids, incidence }
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex(&self, v: usize) -> &VertexData {
        &self.vertices[v]
    }

    pub fn edge(&self, e: usize) -> &EdgeData {
        &self.edges[e]
    }

    pub fn vertex_id(&self, v: usize) -> &str {
        &self.vertex_ids[v]
    }

    pub fn edge_id(&self, e: usize) -> &str {
        &self.edge_ids[e]
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertex_ids.iter().position(|s| s == id)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edge_ids.iter().position(|s| s == id)
    }

    /// Incident (edge, endpoint) pairs at `v`, sorted by edge index.
    pub fn incident(&self, v: usize) -> &[(usize, Endpoint)] {
        &self.incidence[v]
    }

    /// Interior vertex indices in ascending order.
    pub fn interior_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertices.len()).filter(|&v| !self.vertices[v].is_boundary)
    }

    pub fn boundary_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertices.len()).filter(|&v| self.vertices[v].is_boundary)
    }

    /// Junction weight of `edge` at `vertex`.
    pub fn gamma(&self, vertex: usize, edge: usize) -> Result<f64, NetError> {
        self.vertices[vertex]
            .gamma
            .iter()
            .find(|&&(e, _)| e == edge)
            .map(|&(_, g)| g)
            .ok_or(NetError::NotIncident { edge, vertex })
    }

    /// Which endpoint of `edge` touches `vertex`.
    pub fn endpoint_at(&self, vertex: usize, edge: usize) -> Result<Endpoint, NetError> {
        self.incidence[vertex]
            .iter()
            .find(|&&(e, _)| e == edge)
            .map(|&(_, end)| end)
            .ok_or(NetError::NotIncident { edge, vertex })
    }

    /// Total length of the network.
    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    pub fn min_edge_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(f64::INFINITY, f64::min)
    }

    /// Largest grid spacing over all edges.
    pub fn max_h(&self) -> f64 {
        self.edges.iter().map(|e| e.h()).fold(0.0, f64::max)
    }

    /// A copy of the network with every edge grid refined by `factor`
    /// (n -> factor*(n-1)+1, so spacings divide exactly).
    pub fn refined(&self, factor: usize) -> Network {
        assert!(factor >= 1);
        let edges = self
            .edges
            .iter()
            .map(|e| EdgeData { grid_points: factor * (e.grid_points - 1) + 1, ..e.clone() })
            .collect();
        Network::from_parts(
            self.vertices.clone(),
            edges,
            self.vertex_ids.clone(),
            self.edge_ids.clone(),
        )
    }
}
