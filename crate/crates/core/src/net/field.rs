//! Piecewise fields on the network and the split invariant measure.

use std::collections::BTreeMap;

use super::{Endpoint, Network};
use crate::error::NetError;

/// A function sampled on the per-edge grids, endpoint samples included.
///
/// Endpoint samples are stored redundantly (one per incident edge), so a
/// field may jump across a vertex; continuity is a property imposed by the
/// solvers, not by the data type.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeField {
    values: Vec<Vec<f64>>,
}

impl EdgeField {
    pub fn zeros(net: &Network) -> Self {
        EdgeField {
            values: (0..net.n_edges()).map(|e| vec![0.0; net.edge(e).grid_points]).collect(),
        }
    }

    pub fn constant(net: &Network, c: f64) -> Self {
        EdgeField {
            values: (0..net.n_edges()).map(|e| vec![c; net.edge(e).grid_points]).collect(),
        }
    }

    /// Sample `f(edge, x)` on every grid node.
    pub fn from_fn(net: &Network, mut f: impl FnMut(usize, f64) -> f64) -> Self {
        EdgeField {
            values: (0..net.n_edges())
                .map(|e| {
                    let d = net.edge(e);
                    (0..d.grid_points).map(|i| f(e, d.x(i))).collect()
                })
                .collect(),
        }
    }

    pub fn from_values(net: &Network, values: Vec<Vec<f64>>) -> Result<Self, NetError> {
        if values.len() != net.n_edges() {
            return Err(NetError::ShapeMismatch(format!(
                "expected {} edges, got {}",
                net.n_edges(),
                values.len()
            )));
        }
        for (e, v) in values.iter().enumerate() {
            if v.len() != net.edge(e).grid_points {
                return Err(NetError::ShapeMismatch(format!(
                    "edge `{}`: expected {} samples, got {}",
                    net.edge_id(e),
                    net.edge(e).grid_points,
                    v.len()
                )));
            }
        }
        Ok(EdgeField { values })
    }

    pub fn edge(&self, e: usize) -> &[f64] {
        &self.values[e]
    }

    pub fn edge_mut(&mut self, e: usize) -> &mut [f64] {
        &mut self.values[e]
    }

    pub fn n_edges(&self) -> usize {
        self.values.len()
    }

    /// Trace of the field at `vertex` along `edge` (the endpoint sample).
    pub fn trace(&self, net: &Network, vertex: usize, edge: usize) -> Result<f64, NetError> {
        let end = net.endpoint_at(vertex, edge)?;
        let vals = &self.values[edge];
        Ok(vals[end.sample_index(vals.len())])
    }

    pub fn trace_at(&self, edge: usize, end: Endpoint) -> f64 {
        let vals = &self.values[edge];
        vals[end.sample_index(vals.len())]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().flatten().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().flatten().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    /// Largest absolute difference against another field.
    pub fn max_abs_diff(&self, other: &EdgeField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    pub fn scale(&mut self, s: f64) {
        for v in self.values.iter_mut().flatten() {
            *v *= s;
        }
    }

    pub fn shift(&mut self, c: f64) {
        for v in self.values.iter_mut().flatten() {
            *v += c;
        }
    }

    /// self + t*(other - self), elementwise.
    pub fn lerp(&self, other: &EdgeField, t: f64) -> EdgeField {
        EdgeField {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect())
                .collect(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> EdgeField {
        EdgeField {
            values: self.values.iter().map(|v| v.iter().map(|&x| f(x)).collect()).collect(),
        }
    }

    /// Elementwise combination with another field of identical shape.
    pub fn zip_with(&self, other: &EdgeField, f: impl Fn(f64, f64) -> f64) -> EdgeField {
        EdgeField {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect())
                .collect(),
        }
    }

    pub fn iter_all(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().flatten().copied()
    }
}

/// Invariant-measure representation: an absolutely continuous density per
/// unit length plus one nonnegative atom per interior vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphMeasure {
    pub density: EdgeField,
    /// Atom weight per interior vertex index.
    pub atoms: BTreeMap<usize, f64>,
}

impl GraphMeasure {
    /// Interior mass plus atom mass.
    pub fn total_mass(&self, net: &Network) -> f64 {
        net.quadrature(&self.density) + self.atoms.values().sum::<f64>()
    }

    pub fn atom(&self, v: usize) -> f64 {
        self.atoms.get(&v).copied().unwrap_or(0.0)
    }

    /// Check the measure invariants: nonnegativity, unit mass, and atom
    /// consistency `atom[v] = eta_v * trace / gamma` across incident edges.
    pub fn validate(&self, net: &Network, tol: f64) -> Result<(), NetError> {
        if self.density.min() < -tol {
            return Err(NetError::ShapeMismatch(format!(
                "density has negative values (min {:.3e})",
                self.density.min()
            )));
        }
        for (&v, &a) in &self.atoms {
            if a < -tol {
                return Err(NetError::ShapeMismatch(format!(
                    "atom at vertex `{}` is negative ({:.3e})",
                    net.vertex_id(v),
                    a
                )));
            }
            let eta = net.vertex(v).eta;
            for &(e, _) in net.incident(v) {
                let g = net.gamma(v, e)?;
                let implied = eta * self.density.trace(net, v, e)? / g;
                if (implied - a).abs() > tol.max(1e-9 * (1.0 + a.abs())) {
                    return Err(NetError::ShapeMismatch(format!(
                        "atom at vertex `{}` inconsistent with trace on edge `{}`: {:.6e} vs {:.6e}",
                        net.vertex_id(v),
                        net.edge_id(e),
                        a,
                        implied
                    )));
                }
            }
        }
        let mass = self.total_mass(net);
        if (mass - 1.0).abs() > tol.max(1e-9) {
            return Err(NetError::ShapeMismatch(format!("total mass {mass:.12} is not 1")));
        }
        Ok(())
    }
}
