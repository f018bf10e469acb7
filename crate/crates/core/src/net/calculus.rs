//! Discrete calculus on per-edge grids: derivatives, traces and quadrature.
//!
//! All stencils are second order. Interior nodes use central differences;
//! endpoints use one-sided three-point (first derivative) and four-point
//! (second derivative) stencils, so vertex-flux residuals converge at the
//! same order as the interior scheme.

use super::{EdgeField, Endpoint, Network, TRACE_TOL};
use crate::error::NetError;

/// One-sided second-order first derivative at sample 0: (-3 f0 + 4 f1 - f2)/(2h).
pub(crate) fn one_sided_d1(vals: &[f64], h: f64, end: Endpoint) -> f64 {
    let n = vals.len();
    match end {
        Endpoint::Start => (-3.0 * vals[0] + 4.0 * vals[1] - vals[2]) / (2.0 * h),
        Endpoint::End => (3.0 * vals[n - 1] - 4.0 * vals[n - 2] + vals[n - 3]) / (2.0 * h),
    }
}

/// One-sided second-order second derivative at an endpoint (four points).
pub(crate) fn one_sided_d2(vals: &[f64], h: f64, end: Endpoint) -> f64 {
    let n = vals.len();
    match end {
        Endpoint::Start => {
            (2.0 * vals[0] - 5.0 * vals[1] + 4.0 * vals[2] - vals[3]) / (h * h)
        }
        Endpoint::End => {
            (2.0 * vals[n - 1] - 5.0 * vals[n - 2] + 4.0 * vals[n - 3] - vals[n - 4]) / (h * h)
        }
    }
}

/// Third-order one-sided first derivative, used to re-measure vertex fluxes
/// at a higher order than the solvers enforce.
pub(crate) fn one_sided_d1_order3(vals: &[f64], h: f64, end: Endpoint) -> f64 {
    let n = vals.len();
    match end {
        Endpoint::Start => {
            (-11.0 * vals[0] + 18.0 * vals[1] - 9.0 * vals[2] + 2.0 * vals[3]) / (6.0 * h)
        }
        Endpoint::End => {
            (11.0 * vals[n - 1] - 18.0 * vals[n - 2] + 9.0 * vals[n - 3] - 2.0 * vals[n - 4])
                / (6.0 * h)
        }
    }
}

impl Network {
    /// Derivative of `f` in the direction of each edge's parametrization.
    ///
    /// Central differences at interior nodes, one-sided second-order stencils
    /// at the endpoints; exact for fields quadratic on each edge.
    pub fn derivative(&self, f: &EdgeField) -> EdgeField {
        let mut out = EdgeField::zeros(self);
        for e in 0..self.n_edges() {
            let h = self.edge(e).h();
            let vals = f.edge(e);
            let n = vals.len();
            let d = out.edge_mut(e);
            d[0] = one_sided_d1(vals, h, Endpoint::Start);
            for i in 1..n - 1 {
                d[i] = (vals[i + 1] - vals[i - 1]) / (2.0 * h);
            }
            d[n - 1] = one_sided_d1(vals, h, Endpoint::End);
        }
        out
    }

    /// Second derivative along each edge, same ordering of accuracy.
    pub fn second_derivative(&self, f: &EdgeField) -> EdgeField {
        let mut out = EdgeField::zeros(self);
        for e in 0..self.n_edges() {
            let h = self.edge(e).h();
            let vals = f.edge(e);
            let n = vals.len();
            let d = out.edge_mut(e);
            if n >= 4 {
                d[0] = one_sided_d2(vals, h, Endpoint::Start);
                d[n - 1] = one_sided_d2(vals, h, Endpoint::End);
            } else {
                // Three-point fallback: first order, only hit on minimal grids.
                d[0] = (vals[0] - 2.0 * vals[1] + vals[2]) / (h * h);
                d[n - 1] = d[0];
            }
            for i in 1..n - 1 {
                d[i] = (vals[i - 1] - 2.0 * vals[i] + vals[i + 1]) / (h * h);
            }
        }
        out
    }

    /// Outward directional derivative of `f` at `vertex` along `edge`:
    /// the orientation sign times the endpoint derivative.
    pub fn outward_derivative(
        &self,
        f: &EdgeField,
        vertex: usize,
        edge: usize,
    ) -> Result<f64, NetError> {
        let end = self.endpoint_at(vertex, edge)?;
        let h = self.edge(edge).h();
        Ok(end.orientation() * one_sided_d1(f.edge(edge), h, end))
    }

    /// Composite trapezoid rule summed over all edges.
    pub fn quadrature(&self, f: &EdgeField) -> f64 {
        let mut total = 0.0;
        for e in 0..self.n_edges() {
            let h = self.edge(e).h();
            let vals = f.edge(e);
            let n = vals.len();
            let mut s = 0.5 * (vals[0] + vals[n - 1]);
            for &v in &vals[1..n - 1] {
                s += v;
            }
            total += h * s;
        }
        total
    }

    /// Mean value of `f` with respect to arclength.
    pub fn mean(&self, f: &EdgeField) -> f64 {
        self.quadrature(f) / self.total_length()
    }

    /// The common weighted trace `T_v[m]` of `m` at an interior vertex:
    /// per-edge ratios `trace/gamma` must agree within the relative
    /// tolerance; the gamma-weighted average is returned.
    pub fn trace_ratio(&self, m: &EdgeField, vertex: usize) -> Result<f64, NetError> {
        self.trace_ratio_with_tol(m, vertex, TRACE_TOL)
    }

    pub fn trace_ratio_with_tol(
        &self,
        m: &EdgeField,
        vertex: usize,
        tol: f64,
    ) -> Result<f64, NetError> {
        if self.vertex(vertex).is_boundary {
            return Err(NetError::NotInterior { vertex });
        }
        let mut ratios = Vec::new();
        let mut weights = Vec::new();
        for &(e, end) in self.incident(vertex) {
            let g = self.gamma(vertex, e)?;
            ratios.push(m.trace_at(e, end) / g);
            weights.push(g);
        }
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let scale = ratios.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let spread = if scale > 0.0 { (hi - lo) / scale } else { 0.0 };
        if spread > tol {
            return Err(NetError::InconsistentTrace { vertex, spread, tol });
        }
        let wsum: f64 = weights.iter().sum();
        Ok(ratios.iter().zip(&weights).map(|(r, w)| r * w).sum::<f64>() / wsum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_relative_eq;

    #[test]
    fn derivative_exact_for_affine() {
        let net = fixtures::single_edge(17);
        let f = EdgeField::from_fn(&net, |_, x| 3.0 * x - 1.0);
        let d = net.derivative(&f);
        for v in d.edge(0) {
            assert_relative_eq!(*v, 3.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn derivative_exact_for_quadratic() {
        let net = fixtures::single_edge(11);
        let f = EdgeField::from_fn(&net, |_, x| x * x);
        let d = net.derivative(&f);
        for (i, v) in d.edge(0).iter().enumerate() {
            let x = net.edge(0).x(i);
            assert_relative_eq!(*v, 2.0 * x, epsilon = 1e-12);
        }
    }

    #[test]
    fn derivative_second_order_on_sine() {
        let err = |n: usize| {
            let net = fixtures::single_edge(n);
            let f = EdgeField::from_fn(&net, |_, x| x.sin());
            let d = net.derivative(&f);
            d.edge(0)
                .iter()
                .enumerate()
                .map(|(i, v)| (v - net.edge(0).x(i).cos()).abs())
                .fold(0.0f64, f64::max)
        };
        let (e1, e2) = (err(33), err(65));
        assert!(e2 < e1 / 3.5, "expected ~4x error drop, got {e1:.3e} -> {e2:.3e}");
    }

    #[test]
    fn outward_derivative_signs() {
        let net = fixtures::single_edge(21);
        let f = EdgeField::from_fn(&net, |_, x| x);
        assert_relative_eq!(net.outward_derivative(&f, 0, 0).unwrap(), -1.0, epsilon = 1e-12);
        assert_relative_eq!(net.outward_derivative(&f, 1, 0).unwrap(), 1.0, epsilon = 1e-12);

        let c = EdgeField::constant(&net, 4.2);
        assert_relative_eq!(net.outward_derivative(&c, 0, 0).unwrap(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(net.outward_derivative(&c, 1, 0).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn outward_derivative_parabola_both_ends() {
        // f = x(1-x): derivative 1 at x=0, -1 at x=1; outward signs flip both to -1.
        let net = fixtures::single_edge(9);
        let f = EdgeField::from_fn(&net, |_, x| x * (1.0 - x));
        assert_relative_eq!(net.outward_derivative(&f, 0, 0).unwrap(), -1.0, epsilon = 1e-12);
        assert_relative_eq!(net.outward_derivative(&f, 1, 0).unwrap(), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn outward_derivative_rejects_non_incident() {
        let net = fixtures::two_edge_star(0.5, 17);
        let f = EdgeField::zeros(&net);
        // Edge 1 joins the center to the second tip; vertex 1 is the tip of edge 0.
        assert!(net.outward_derivative(&f, 1, 1).is_err());
    }

    #[test]
    fn quadrature_total_length_and_affine() {
        let net = fixtures::two_edge_star(0.5, 17);
        assert_relative_eq!(net.quadrature(&EdgeField::constant(&net, 1.0)), 2.0, epsilon = 1e-13);

        let single = fixtures::single_edge(13);
        let f = EdgeField::from_fn(&single, |_, x| x);
        assert_relative_eq!(single.quadrature(&f), 0.5, epsilon = 1e-13);
    }

    #[test]
    fn quadrature_second_order_on_square() {
        let net = fixtures::single_edge(101);
        let f = EdgeField::from_fn(&net, |_, x| x * x);
        let q = net.quadrature(&f);
        assert!((q - 1.0 / 3.0).abs() < 1e-4, "got {q}");
    }

    #[test]
    fn trace_ratio_weighted_average_and_rejection() {
        let net = fixtures::two_edge_star(0.5, 17);
        let center = net.vertex_index("c").unwrap();

        // m identically gamma on each incident edge -> ratio 1.
        let m = EdgeField::from_fn(&net, |_, _| 0.5);
        assert_relative_eq!(net.trace_ratio(&m, center).unwrap(), 1.0, epsilon = 1e-12);

        // Traces 1.0 and 2.0 with equal weights disagree.
        let mut bad = EdgeField::constant(&net, 1.0);
        for v in bad.edge_mut(1) {
            *v = 2.0;
        }
        assert!(matches!(
            net.trace_ratio_with_tol(&bad, center, 1e-8),
            Err(NetError::InconsistentTrace { .. })
        ));
    }

    #[test]
    fn trace_ratio_rejects_boundary_vertex() {
        let net = fixtures::single_edge(9);
        let f = EdgeField::zeros(&net);
        assert!(matches!(net.trace_ratio(&f, 0), Err(NetError::NotInterior { .. })));
    }

    #[test]
    fn derivative_quadrature_identity_for_affine_fields() {
        // quadrature(derivative(f)) telescopes to the endpoint differences for affine f.
        let net = fixtures::three_edge_star(33);
        let f = EdgeField::from_fn(&net, |e, x| (e as f64 + 1.0) * x - 0.3);
        let d = net.derivative(&f);
        let lhs = net.quadrature(&d);
        let rhs: f64 = (0..net.n_edges())
            .map(|e| {
                let vals = f.edge(e);
                vals[vals.len() - 1] - vals[0]
            })
            .sum();
        assert_relative_eq!(lhs, rhs, epsilon = 1e-12);
    }
}
