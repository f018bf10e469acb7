//! Declarative network description and validated construction.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{EdgeData, Endpoint, Network, VertexData, WEIGHT_SUM_TOL};
use crate::error::NetError;
use crate::report::Warning;

/// Optional per-vertex overrides. Vertices are harvested from the edge list;
/// entries here attach stickiness and cost data to interior vertices.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexSpec {
    pub id: String,
    #[serde(default)]
    pub eta: f64,
    #[serde(default)]
    pub theta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub id: String,
    pub from: String,
    pub to: String,
    pub length: f64,
    pub mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_from: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_to: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    #[serde(default)]
    pub vertices: Vec<VertexSpec>,
    pub edges: Vec<EdgeSpec>,
    #[serde(default)]
    pub normalize_gamma: bool,
}

impl NetworkSpec {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network spec serializes")
    }
}

/// Default grid resolution: at least 33 nodes, denser on long edges so the
/// spacing stays comparable across the network.
fn default_grid_points(length: f64, min_length: f64) -> usize {
    33.max((64.0 * length / min_length).ceil() as usize)
}

pub(super) fn build(spec: &NetworkSpec) -> Result<(Network, Vec<Warning>), NetError> {
    let mut warnings = Vec::new();

    // Harvest vertex ids from the edge list, in order of first appearance.
    let mut vertex_ids: Vec<String> = Vec::new();
    let mut index_of: HashMap<&str, usize> = HashMap::new();
    for e in &spec.edges {
        for id in [&e.from, &e.to] {
            if !index_of.contains_key(id.as_str()) {
                index_of.insert(id, vertex_ids.len());
                vertex_ids.push(id.clone());
            }
        }
    }

    let mut edge_ids = Vec::with_capacity(spec.edges.len());
    for e in &spec.edges {
        if edge_ids.contains(&e.id) {
            return Err(NetError::DuplicateId { id: e.id.clone() });
        }
        edge_ids.push(e.id.clone());
    }

    if spec.edges.is_empty() {
        return Err(NetError::ShapeMismatch("network has no edges".into()));
    }

    let min_length = spec
        .edges
        .iter()
        .map(|e| e.length)
        .fold(f64::INFINITY, f64::min)
        .max(f64::MIN_POSITIVE);

    let mut edges = Vec::with_capacity(spec.edges.len());
    for e in &spec.edges {
        if e.from == e.to {
            return Err(NetError::SelfLoop { edge: e.id.clone(), vertex: e.from.clone() });
        }
        if !(e.length > 0.0) {
            return Err(NetError::NonpositiveLength { edge: e.id.clone(), value: e.length });
        }
        if !(e.mu > 0.0) {
            return Err(NetError::NonpositiveDiffusivity { edge: e.id.clone(), value: e.mu });
        }
        let n = e.grid_points.unwrap_or_else(|| default_grid_points(e.length, min_length));
        if n < 3 {
            return Err(NetError::TooFewGridPoints { edge: e.id.clone(), value: n });
        }
        edges.push(EdgeData {
            from: index_of[e.from.as_str()],
            to: index_of[e.to.as_str()],
            length: e.length,
            diffusivity: e.mu,
            grid_points: n,
        });
    }

    // Vertex entries must reference vertices that actually occur in edges.
    let mut seen = HashMap::new();
    for v in &spec.vertices {
        if seen.insert(v.id.as_str(), ()).is_some() {
            return Err(NetError::DuplicateId { id: v.id.clone() });
        }
        if !index_of.contains_key(v.id.as_str()) {
            return Err(NetError::UnusedVertex { vertex: v.id.clone() });
        }
    }

    let degree = {
        let mut d = vec![0usize; vertex_ids.len()];
        for e in &edges {
            d[e.from] += 1;
            d[e.to] += 1;
        }
        d
    };

    // Connectivity over the undirected graph.
    {
        let mut adj = vec![Vec::new(); vertex_ids.len()];
        for e in &edges {
            adj[e.from].push(e.to);
            adj[e.to].push(e.from);
        }
        let mut reached = vec![false; vertex_ids.len()];
        let mut stack = vec![0usize];
        reached[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !reached[w] {
                    reached[w] = true;
                    stack.push(w);
                }
            }
        }
        if let Some(v) = reached.iter().position(|r| !r) {
            return Err(NetError::Disconnected { vertex: vertex_ids[v].clone() });
        }
    }

    let overrides: HashMap<&str, &VertexSpec> =
        spec.vertices.iter().map(|v| (v.id.as_str(), v)).collect();

    let mut vertices = Vec::with_capacity(vertex_ids.len());
    for (v, id) in vertex_ids.iter().enumerate() {
        let is_boundary = degree[v] == 1;
        let (mut eta, theta) = overrides
            .get(id.as_str())
            .map(|s| (s.eta, s.theta))
            .unwrap_or((0.0, 0.0));
        if is_boundary && eta != 0.0 {
            warnings.push(Warning::BoundaryDataIgnored { vertex: id.clone() });
            eta = 0.0;
        }
        if eta < 0.0 {
            return Err(NetError::NegativeEta { vertex: id.clone(), value: eta });
        }

        let mut gamma = Vec::new();
        if !is_boundary {
            for (e, edge_spec) in spec.edges.iter().enumerate() {
                let end = if edges[e].from == v {
                    Some(Endpoint::Start)
                } else if edges[e].to == v {
                    Some(Endpoint::End)
                } else {
                    None
                };
                let Some(end) = end else { continue };
                let g = match end {
                    Endpoint::Start => edge_spec.gamma_from,
                    Endpoint::End => edge_spec.gamma_to,
                };
                let g = g.ok_or_else(|| NetError::MissingGamma {
                    edge: edge_spec.id.clone(),
                    vertex: id.clone(),
                })?;
                if !(g > 0.0) {
                    return Err(NetError::NonpositiveGamma {
                        edge: edge_spec.id.clone(),
                        vertex: id.clone(),
                        value: g,
                    });
                }
                gamma.push((e, g));
            }
            gamma.sort_by_key(|&(e, _)| e);

            let sum: f64 = gamma.iter().map(|&(e, g)| edges[e].diffusivity * g).sum();
            if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
                if spec.normalize_gamma {
                    for (_, g) in &mut gamma {
                        *g /= sum;
                    }
                    warnings.push(Warning::GammaRescaled { vertex: id.clone(), factor: 1.0 / sum });
                } else {
                    return Err(NetError::WeightSum {
                        vertex: id.clone(),
                        sum,
                        tol: WEIGHT_SUM_TOL,
                    });
                }
            }
        } else {
            let has_gamma = spec.edges.iter().enumerate().any(|(e, s)| {
                (edges[e].from == v && s.gamma_from.is_some())
                    || (edges[e].to == v && s.gamma_to.is_some())
            });
            if has_gamma && !warnings.iter().any(|w| matches!(w, Warning::BoundaryDataIgnored { vertex } if vertex == id)) {
                warnings.push(Warning::BoundaryDataIgnored { vertex: id.clone() });
            }
        }

        vertices.push(VertexData { is_boundary, eta, theta, gamma });
    }

    Ok((Network::from_parts(vertices, edges, vertex_ids, edge_ids), warnings))
}
