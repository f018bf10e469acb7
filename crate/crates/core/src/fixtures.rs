//! Canonical test networks shared by unit tests, the self-test battery and
//! the acceptance suite.

use crate::net::{EdgeSpec, Network, NetworkSpec, VertexSpec};

fn edge(id: &str, from: &str, to: &str, length: f64, mu: f64, n: usize) -> EdgeSpec {
    EdgeSpec {
        id: id.into(),
        from: from.into(),
        to: to.into(),
        length,
        mu,
        grid_points: Some(n),
        gamma_from: None,
        gamma_to: None,
    }
}

/// One edge of unit length, two reflecting boundary vertices.
pub fn single_edge(n: usize) -> Network {
    let spec = NetworkSpec {
        vertices: vec![],
        edges: vec![edge("e0", "a", "b", 1.0, 1.0, n)],
        normalize_gamma: false,
    };
    Network::build(&spec).expect("fixture builds").0
}

/// Two unit edges meeting at a sticky center `c` with weights 1/2 each.
pub fn two_edge_star(eta: f64, n: usize) -> Network {
    two_edge_star_theta(eta, 0.0, n)
}

pub fn two_edge_star_theta(eta: f64, theta: f64, n: usize) -> Network {
    let mut e0 = edge("e0", "c", "a", 1.0, 1.0, n);
    e0.gamma_from = Some(0.5);
    let mut e1 = edge("e1", "c", "b", 1.0, 1.0, n);
    e1.gamma_from = Some(0.5);
    let spec = NetworkSpec {
        vertices: vec![VertexSpec { id: "c".into(), eta, theta }],
        edges: vec![e0, e1],
        normalize_gamma: false,
    };
    Network::build(&spec).expect("fixture builds").0
}

/// Three edges of different lengths and diffusivities joined at one sticky
/// vertex; weights chosen so that sum(mu*gamma) = 1 exactly.
pub fn three_edge_star(n: usize) -> Network {
    let mut e0 = edge("e0", "c", "a", 1.0, 1.0, n);
    e0.gamma_from = Some(0.4);
    let mut e1 = edge("e1", "c", "b", 0.8, 1.5, n);
    e1.gamma_from = Some(0.35 / 1.5);
    let mut e2 = edge("e2", "c", "d", 1.2, 0.7, n);
    e2.gamma_from = Some(0.25 / 0.7);
    let spec = NetworkSpec {
        vertices: vec![VertexSpec { id: "c".into(), eta: 0.3, theta: 0.2 }],
        edges: vec![e0, e1, e2],
        normalize_gamma: false,
    };
    Network::build(&spec).expect("fixture builds").0
}

/// A path of two interior vertices:  a -- v1 -- v2 -- b, with distinct
/// stickiness at each junction. Exercises the multi-dimensional junction
/// root-find.
pub fn two_junction_path(n: usize) -> Network {
    let mut e0 = edge("e0", "a", "v1", 1.0, 1.0, n);
    e0.gamma_to = Some(0.6);
    let mut e1 = edge("e1", "v1", "v2", 0.9, 1.0, n);
    e1.gamma_from = Some(0.4);
    e1.gamma_to = Some(0.5);
    let mut e2 = edge("e2", "v2", "b", 1.1, 1.0, n);
    e2.gamma_from = Some(0.5);
    let spec = NetworkSpec {
        vertices: vec![
            VertexSpec { id: "v1".into(), eta: 0.5, theta: 0.1 },
            VertexSpec { id: "v2".into(), eta: 0.2, theta: -0.3 },
        ],
        edges: vec![e0, e1, e2],
        normalize_gamma: false,
    };
    Network::build(&spec).expect("fixture builds").0
}

/// JSON text of the sticky two-edge star, used by CLI round-trip tests.
pub fn two_edge_star_json(eta: f64, n: usize) -> String {
    format!(
        r#"{{
  "vertices": [{{"id": "c", "eta": {eta}, "theta": 0.0}}],
  "edges": [
    {{"id": "e0", "from": "c", "to": "a", "length": 1.0, "mu": 1.0, "grid_points": {n}, "gamma_from": 0.5}},
    {{"id": "e1", "from": "c", "to": "b", "length": 1.0, "mu": 1.0, "grid_points": {n}, "gamma_from": 0.5}}
  ],
  "normalize_gamma": false
}}"#
    )
}
