//! Stationary Fokker-Planck solver on the network.
//!
//! For a drift `b` (the drift of the diffusion itself), the invariant density
//! solves, edge by edge,
//!
//! ```text
//! mu m'' - (b m)' = 0            (conserved flux  J = mu m' - b m)
//! ```
//!
//! with weighted continuity `m/gamma` common across each interior vertex,
//! zero net flux at every vertex, and unit total mass once the vertex atoms
//! `eta_v * T_v[m]` are added. Linearity reduces the sticky normalization to
//! closed form: solve once for the density `m1` with unit interior mass, then
//! scale by `1/(1 + sum_v eta_v T_v[m1])`.
//!
//! Discretization: central differences inside the edges, one-sided
//! second-order stencils in the vertex-flux rows, trapezoid mass row. The
//! resulting linear system is reduced by static condensation: interior
//! samples of each edge are eliminated through tridiagonal solves, leaving a
//! small dense system on the endpoint traces.

mod testfn;

pub use testfn::{duality_residual, make_test_function, TestFunction, DOMAIN_TOL};

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{NetError, SolveError};
use crate::linalg::{solve_dense, solve_tridiagonal};
use crate::net::{EdgeField, Endpoint, GraphMeasure, Network};
use crate::report::{SolveReport, Warning};

/// Drift coefficient of the diffusion, sampled like any edge field; may jump
/// at the vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftField(pub EdgeField);

impl DriftField {
    pub fn zero(net: &Network) -> Self {
        DriftField(EdgeField::zeros(net))
    }

    pub fn constant(net: &Network, c: f64) -> Self {
        DriftField(EdgeField::constant(net, c))
    }

    pub fn from_fn(net: &Network, f: impl FnMut(usize, f64) -> f64) -> Self {
        DriftField(EdgeField::from_fn(net, f))
    }

    pub fn from_field(field: EdgeField) -> Result<Self, NetError> {
        if field.iter_all().any(|v| !v.is_finite()) {
            return Err(NetError::ShapeMismatch("drift contains non-finite values".into()));
        }
        Ok(DriftField(field))
    }

    pub fn field(&self) -> &EdgeField {
        &self.0
    }
}

/// Full stationary solution: the probability measure, the interior mass
/// fraction and the solve diagnostics.
#[derive(Debug, Clone)]
pub struct FPSolution {
    pub measure: GraphMeasure,
    /// Interior (absolutely continuous) mass; equals `quadrature(density)`.
    pub theta_star: f64,
    pub report: SolveReport,
}

/// Relative clamp band for trapezoid-level undershoots.
pub const POSITIVITY_TOL_REL: f64 = 1e-10;

/// Per-edge condensation data: interior samples expressed as linear
/// combinations of the two endpoint traces.
struct EdgeCondensation {
    /// Interior response to a unit value at the start endpoint.
    phi: Vec<f64>,
    /// Interior response to a unit value at the end endpoint.
    psi: Vec<f64>,
}

impl EdgeCondensation {
    /// Coefficients (on the start trace, end trace) of sample `i`.
    fn coeff(&self, i: usize, n: usize) -> (f64, f64) {
        if i == 0 {
            (1.0, 0.0)
        } else if i == n - 1 {
            (0.0, 1.0)
        } else {
            (self.phi[i - 1], self.psi[i - 1])
        }
    }
}

fn condense_edge(net: &Network, e: usize, b: &DriftField) -> Result<EdgeCondensation, SolveError> {
    let d = net.edge(e);
    let n = d.grid_points;
    let h = d.h();
    let mu = d.diffusivity;
    let bv = b.0.edge(e);
    let m = n - 2;

    // Row for interior node i: a*m[i-1] + diag*m[i] + c*m[i+1] = 0.
    let a = |i: usize| mu / (h * h) + bv[i - 1] / (2.0 * h);
    let c = |i: usize| mu / (h * h) - bv[i + 1] / (2.0 * h);
    let diag = -2.0 * mu / (h * h);

    let mut lower = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let diags = vec![diag; m];
    for (j, i) in (1..=m).enumerate() {
        if j > 0 {
            lower[j] = a(i);
        }
        if j + 1 < m {
            upper[j] = c(i);
        }
    }

    let mut rhs_phi = vec![0.0; m];
    rhs_phi[0] = -a(1);
    let mut rhs_psi = vec![0.0; m];
    rhs_psi[m - 1] = -c(n - 2);

    let phi = solve_tridiagonal(&lower, &diags, &upper, rhs_phi)?;
    let psi = solve_tridiagonal(&lower, &diags, &upper, rhs_psi)?;
    Ok(EdgeCondensation { phi, psi })
}

/// Solve for the density with unit interior mass (no vertex atoms yet).
///
/// Returned field is strictly positive for connected networks; undershoots
/// inside the clamp band are zeroed and the mass renormalized, anything worse
/// aborts with a refinement hint.
pub fn solve_unit_mass(net: &Network, b: &DriftField) -> Result<(EdgeField, SolveReport), SolveError> {
    let ne = net.n_edges();
    let dim = 2 * ne;
    let cond: Vec<EdgeCondensation> =
        (0..ne).map(|e| condense_edge(net, e, b)).collect::<Result<_, _>>()?;

    let trace_col = |e: usize, end: Endpoint| match end {
        Endpoint::Start => 2 * e,
        Endpoint::End => 2 * e + 1,
    };

    let mut mat = DMatrix::<f64>::zeros(dim, dim);
    let mut rhs = DVector::<f64>::zeros(dim);
    let mut row = 0usize;
    let mut flux_row_of_vertex = vec![usize::MAX; net.n_vertices()];

    for v in 0..net.n_vertices() {
        let inc = net.incident(v);
        if !net.vertex(v).is_boundary {
            // Weighted continuity against the first incident edge.
            let (e0, end0) = inc[0];
            let g0 = net.gamma(v, e0)?;
            for &(e, end) in &inc[1..] {
                let g = net.gamma(v, e)?;
                mat[(row, trace_col(e, end))] += 1.0 / g;
                mat[(row, trace_col(e0, end0))] -= 1.0 / g0;
                row += 1;
            }
        }
        // Net flux: sum over incident edges of n*(mu m' - b m) at the vertex,
        // expressed through the one-sided stencil and the condensation.
        flux_row_of_vertex[v] = row;
        for &(e, end) in inc {
            let d = net.edge(e);
            let n = d.grid_points;
            let h = d.h();
            let mu = d.diffusivity;
            let sgn = end.orientation();
            let b_trace = b.0.trace_at(e, end);

            // n * mu * m'(endpoint): stencil samples and weights.
            let (idx, w): ([usize; 3], [f64; 3]) = match end {
                Endpoint::Start => ([0, 1, 2], [-3.0, 4.0, -1.0]),
                Endpoint::End => ([n - 1, n - 2, n - 3], [3.0, -4.0, 1.0]),
            };
            for (i, wi) in idx.iter().zip(w) {
                let (c0, c1) = cond[e].coeff(*i, n);
                let factor = sgn * mu * wi / (2.0 * h);
                mat[(row, trace_col(e, Endpoint::Start))] += factor * c0;
                mat[(row, trace_col(e, Endpoint::End))] += factor * c1;
            }
            // -n * b * m at the vertex.
            mat[(row, trace_col(e, end))] += -sgn * b_trace;
        }
        row += 1;
    }
    debug_assert_eq!(row, dim);

    // The flux rows are redundant by one; replace the flux row at the lowest
    // indexed interior vertex (or the first boundary vertex on a network
    // without junctions) by the trapezoid mass row.
    let replaced = net
        .interior_vertices()
        .next()
        .or_else(|| net.boundary_vertices().next())
        .expect("network has vertices");
    let r = flux_row_of_vertex[replaced];
    for j in 0..dim {
        mat[(r, j)] = 0.0;
    }
    for e in 0..ne {
        let d = net.edge(e);
        let n = d.grid_points;
        let h = d.h();
        let (mut w0, mut w1) = (0.5, 0.5);
        for i in 1..n - 1 {
            let (c0, c1) = cond[e].coeff(i, n);
            w0 += c0;
            w1 += c1;
        }
        mat[(r, trace_col(e, Endpoint::Start))] = h * w0;
        mat[(r, trace_col(e, Endpoint::End))] = h * w1;
    }
    rhs[r] = 1.0;

    let traces = solve_dense(mat, rhs)?;

    let mut values = Vec::with_capacity(ne);
    for e in 0..ne {
        let n = net.edge(e).grid_points;
        let t0 = traces[trace_col(e, Endpoint::Start)];
        let t1 = traces[trace_col(e, Endpoint::End)];
        let mut vals = vec![0.0; n];
        for i in 0..n {
            let (c0, c1) = cond[e].coeff(i, n);
            vals[i] = c0 * t0 + c1 * t1;
        }
        values.push(vals);
    }
    let mut m = EdgeField::from_values(net, values).map_err(SolveError::Net)?;

    let mut report = SolveReport { iterations: 1, converged: true, ..Default::default() };
    let tau_pos = POSITIVITY_TOL_REL * m.max_abs();
    let min = m.min();
    if min < -tau_pos {
        return Err(SolveError::NegativeDensity { min, tol: tau_pos });
    }
    if min < 0.0 {
        report.warn(Warning::DensityClamped { min });
        for e in 0..ne {
            for v in m.edge_mut(e) {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        let mass = net.quadrature(&m);
        m.scale(1.0 / mass);
    }
    if m.min() <= 0.0 && min >= 0.0 {
        // A zero without an undershoot means strict positivity failed outright.
        report.warn(Warning::Note("density touches zero".into()));
    }
    let res = weak_residuals(net, b, &m);
    report.achieved_tol = res.max_flux;
    report.record(res.max_flux);
    Ok((m, report))
}

/// Scale the unit-mass density so that interior mass plus vertex atoms is 1.
pub fn solve_stationary(net: &Network, b: &DriftField) -> Result<FPSolution, SolveError> {
    let (m1, mut report) = solve_unit_mass(net, b)?;
    let mut s = 0.0;
    let mut traces = BTreeMap::new();
    for v in net.interior_vertices() {
        let t = net.trace_ratio(&m1, v).map_err(SolveError::Net)?;
        s += net.vertex(v).eta * t;
        traces.insert(v, t);
    }
    let theta_star = 1.0 / (1.0 + s);
    let mut density = m1;
    density.scale(theta_star);
    let atoms: BTreeMap<usize, f64> = traces
        .into_iter()
        .map(|(v, t)| (v, net.vertex(v).eta * theta_star * t))
        .collect();
    report.achieved_tol =
        report.achieved_tol.max((net.quadrature(&density) - theta_star).abs());
    Ok(FPSolution { measure: GraphMeasure { density, atoms }, theta_star, report })
}

/// Residual diagnostics for a candidate density.
#[derive(Debug, Clone, Copy)]
pub struct FpResiduals {
    /// Largest interior collocation residual of `mu m'' - (b m)'`.
    pub max_interior: f64,
    /// Largest vertex net-flux residual (one-sided stencils), including the
    /// flux row replaced by the mass normalization.
    pub max_flux: f64,
    /// Largest relative spread of the weighted traces at interior vertices.
    pub max_continuity: f64,
}

/// Evaluate how well `m` satisfies the discrete stationary system for `b`.
pub fn weak_residuals(net: &Network, b: &DriftField, m: &EdgeField) -> FpResiduals {
    let bm = m.zip_with(b.field(), |x, y| x * y);
    let d2m = net.second_derivative(m);
    let dbm = net.derivative(&bm);
    let mut max_interior = 0.0f64;
    for e in 0..net.n_edges() {
        let mu = net.edge(e).diffusivity;
        let n = net.edge(e).grid_points;
        for i in 1..n - 1 {
            max_interior = max_interior.max((mu * d2m.edge(e)[i] - dbm.edge(e)[i]).abs());
        }
    }
    let mut max_flux = 0.0f64;
    for v in 0..net.n_vertices() {
        let mut flux = 0.0;
        for &(e, end) in net.incident(v) {
            let mu = net.edge(e).diffusivity;
            let sgn = end.orientation();
            let dm = net.outward_derivative(m, v, e).expect("incident");
            flux += mu * dm - sgn * b.0.trace_at(e, end) * m.trace_at(e, end);
        }
        max_flux = max_flux.max(flux.abs());
    }
    let mut max_continuity = 0.0f64;
    for v in net.interior_vertices() {
        let mut ratios: Vec<f64> = Vec::new();
        for &(e, end) in net.incident(v) {
            let g = net.gamma(v, e).expect("incident");
            ratios.push(m.trace_at(e, end) / g);
        }
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let scale = ratios.iter().fold(0.0f64, |a, r| a.max(r.abs())).max(1e-300);
        max_continuity = max_continuity.max((hi - lo) / scale);
    }
    FpResiduals { max_interior, max_flux, max_continuity }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_relative_eq;

    #[test]
    fn single_edge_zero_drift_is_uniform() {
        let net = fixtures::single_edge(33);
        let (m, _) = solve_unit_mass(&net, &DriftField::zero(&net)).unwrap();
        for v in m.edge(0) {
            assert_relative_eq!(*v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn star_zero_drift_unit_mass_closed_form() {
        // Piecewise constant c*gamma with total mass 1: c = 1, m = 0.5.
        let net = fixtures::two_edge_star(0.5, 65);
        let (m, _) = solve_unit_mass(&net, &DriftField::zero(&net)).unwrap();
        for e in 0..2 {
            for v in m.edge(e) {
                assert_relative_eq!(*v, 0.5, epsilon = 1e-12);
            }
        }
        let center = net.vertex_index("c").unwrap();
        assert_relative_eq!(net.trace_ratio(&m, center).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_drift_exponential_density() {
        // b = 1, mu = 1 on [0,1]: zero flux forces m' = m, so m = e^x/(e-1).
        let ns = [33usize, 65, 129, 257];
        let mut errs = Vec::new();
        for &n in &ns {
            let net = fixtures::single_edge(n);
            let (m, _) = solve_unit_mass(&net, &DriftField::constant(&net, 1.0)).unwrap();
            let scale = std::f64::consts::E - 1.0;
            let err = m
                .edge(0)
                .iter()
                .enumerate()
                .map(|(i, v)| (v - net.edge(0).x(i).exp() / scale).abs())
                .fold(0.0f64, f64::max);
            errs.push(err);
        }
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 1.9, "observed order {order:.2} (errors {errs:?})");
        }
    }

    #[test]
    fn sticky_star_measure_closed_form() {
        let net = fixtures::two_edge_star(0.5, 65);
        let sol = solve_stationary(&net, &DriftField::zero(&net)).unwrap();
        let center = net.vertex_index("c").unwrap();
        assert_relative_eq!(sol.theta_star, 2.0 / 3.0, epsilon = 1e-10);
        for e in 0..2 {
            for v in sol.measure.density.edge(e) {
                assert_relative_eq!(*v, 1.0 / 3.0, epsilon = 1e-10);
            }
        }
        assert_relative_eq!(sol.measure.atom(center), 1.0 / 3.0, epsilon = 1e-10);
        assert_relative_eq!(
            net.trace_ratio(&sol.measure.density, center).unwrap(),
            2.0 / 3.0,
            epsilon = 1e-10
        );
        assert_relative_eq!(sol.measure.total_mass(&net), 1.0, epsilon = 1e-12);
        sol.measure.validate(&net, 1e-9).unwrap();
    }

    #[test]
    fn nonsticky_star_has_no_atoms() {
        let net = fixtures::two_edge_star(0.0, 33);
        let sol = solve_stationary(&net, &DriftField::zero(&net)).unwrap();
        assert_relative_eq!(sol.theta_star, 1.0, epsilon = 1e-12);
        assert!(sol.measure.atoms.values().all(|&a| a == 0.0));
    }

    #[test]
    fn single_edge_has_empty_atoms_any_drift() {
        let net = fixtures::single_edge(41);
        let b = DriftField::from_fn(&net, |_, x| (2.0 * x - 1.0).sin());
        let sol = solve_stationary(&net, &b).unwrap();
        assert!(sol.measure.atoms.is_empty());
        assert_relative_eq!(sol.theta_star, 1.0, epsilon = 1e-12);
        assert_relative_eq!(net.quadrature(&sol.measure.density), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn unit_mass_scaling_is_linear() {
        // m^theta = theta * m^1 comes from the same linear system.
        let net = fixtures::three_edge_star(33);
        let b = DriftField::from_fn(&net, |e, x| 0.3 * (e as f64 + 1.0) * (x * 2.0).cos());
        let (m1, _) = solve_unit_mass(&net, &b).unwrap();
        let sol = solve_stationary(&net, &b).unwrap();
        let scaled = {
            let mut f = m1.clone();
            f.scale(sol.theta_star);
            f
        };
        assert!(sol.measure.density.max_abs_diff(&scaled) < 1e-14);
    }

    #[test]
    fn drift_stability_gap_decreases() {
        // b^n = b + 1/n converges uniformly; solutions converge monotonically
        // in n for this family.
        let net = fixtures::two_edge_star(0.5, 65);
        let b = DriftField::from_fn(&net, |_, x| x.cos());
        let limit = solve_stationary(&net, &b).unwrap();
        let mut gaps = Vec::new();
        for k in 0..5 {
            let step = 1.0 / (2.0f64.powi(k)); // 1, 1/2, 1/4, ...
            let bn = DriftField::from_field(b.0.map(|v| v + step)).unwrap();
            let sol = solve_stationary(&net, &bn).unwrap();
            gaps.push(sol.measure.density.max_abs_diff(&limit.measure.density));
        }
        for w in gaps.windows(2) {
            assert!(w[1] < w[0], "gap sequence not decreasing: {gaps:?}");
        }
        assert!(*gaps.last().unwrap() < gaps[0] / 8.0);
    }

    #[test]
    fn h1_norm_bounded_by_l1_norm_across_refinement() {
        // Discrete analogue of the a priori estimate ||m||_{H1} <= C ||m||_{L1}:
        // the constant must not blow up as the grid refines.
        let b_fun = |_: usize, x: f64| 0.7 * (3.0 * x).sin();
        let mut ratios = Vec::new();
        for &n in &[33usize, 65, 129, 257] {
            let net = fixtures::two_edge_star(0.5, n);
            let b = DriftField::from_fn(&net, b_fun);
            let (m, _) = solve_unit_mass(&net, &b).unwrap();
            let dm = net.derivative(&m);
            let l2 = net.quadrature(&m.zip_with(&m, |a, b| a * b)).sqrt();
            let dl2 = net.quadrature(&dm.zip_with(&dm, |a, b| a * b)).sqrt();
            let l1 = net.quadrature(&m.map(f64::abs));
            ratios.push((l2 * l2 + dl2 * dl2).sqrt() / l1);
        }
        let first = ratios[0];
        for r in &ratios {
            assert!(*r < 1.5 * first + 1.0, "H1/L1 ratio drifts: {ratios:?}");
        }
    }

    #[test]
    fn flux_residuals_shrink_under_refinement() {
        let errs: Vec<f64> = [33usize, 65, 129]
            .iter()
            .map(|&n| {
                let net = fixtures::two_edge_star(0.5, n);
                let b = DriftField::from_fn(&net, |_, x| 0.5 * (2.0 * x).cos());
                let (m, _) = solve_unit_mass(&net, &b).unwrap();
                weak_residuals(&net, &b, &m).max_flux
            })
            .collect();
        assert!(errs[1] < errs[0] / 3.0, "{errs:?}");
        assert!(errs[2] < errs[1] / 3.0, "{errs:?}");
    }

    #[test]
    fn negative_density_error_mentions_refinement() {
        let err = SolveError::NegativeDensity { min: -1e-3, tol: 1e-10 };
        assert!(err.to_string().contains("refine"));
    }
}
