//! Random test functions in the discrete generator domain, and the
//! stationarity (duality) residual.
//!
//! A field `f` is an admissible test function when it is single-valued at the
//! vertices, smooth along every edge, and its vertex derivative data satisfy
//!
//! ```text
//! eta_v Gf(v) + sum_a mu_a gamma_{v,a} df_a(v) = 0    (interior vertices)
//! df_a(v) = 0                                         (boundary vertices)
//! ```
//!
//! with `Gf = mu f'' + b f'`. The generator below enforces these conditions
//! exactly at grid level (through the same one-sided stencils the solvers
//! use) by adding one quintic correction per edge, so the stationarity
//! identity `int Gf dm = 0` can be tested without hand-built fixtures.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DriftField, FPSolution};
use crate::error::SolveError;
use crate::linalg::solve_dense;
use crate::net::{EdgeField, Endpoint, Network};

/// Default tolerance on the generator-domain conditions.
pub const DOMAIN_TOL: f64 = 1e-6;

/// A smooth field together with its single vertex values and the common
/// generator value at each vertex.
#[derive(Debug, Clone)]
pub struct TestFunction {
    pub field: EdgeField,
    /// f(v), one value per vertex (the endpoint samples agree with it).
    pub vertex_value: Vec<f64>,
    /// Gf(v), one value per vertex, common across incident edges.
    pub generator_value: Vec<f64>,
}

/// Discrete endpoint functionals of a sample vector: value, first and second
/// derivative in edge coordinates, via the one-sided stencils.
fn endpoint_functionals(vals: &[f64], h: f64, end: Endpoint) -> (f64, f64, f64) {
    let n = vals.len();
    let value = vals[end.sample_index(n)];
    let d1 = crate::net::one_sided_d1(vals, h, end);
    let d2 = crate::net::one_sided_d2(vals, h, end);
    (value, d1, d2)
}

/// Deterministic-from-seed admissible test function for the generator with
/// drift `b`. Requires at least 6 samples per edge.
pub fn make_test_function(
    seed: u64,
    net: &Network,
    b: &DriftField,
) -> Result<TestFunction, SolveError> {
    for e in 0..net.n_edges() {
        if net.edge(e).grid_points < 6 {
            return Err(SolveError::Invalid(format!(
                "edge `{}` needs >= 6 grid points for test-function projection",
                net.edge_id(e)
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Smooth low-frequency base field per edge. Amplitudes fall off fast so
    // the fourth derivative (which drives the discretization error of the
    // duality pairing) stays small.
    let mut base = EdgeField::zeros(net);
    for e in 0..net.n_edges() {
        let l = net.edge(e).length;
        let coeffs: Vec<(f64, f64)> = (1..=2)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        let d = net.edge(e);
        for i in 0..d.grid_points {
            let x = d.x(i);
            let mut v = 0.0;
            for (k, (a, phase)) in coeffs.iter().enumerate() {
                let k = (k + 1) as f64;
                v += 0.2 * a / (k * k) * (k * std::f64::consts::PI * x / l + phase).cos();
            }
            base.edge_mut(e)[i] = v;
        }
    }

    // Vertex targets: value, outward first derivative and in-edge second
    // derivative per incident edge, chosen so the domain conditions hold.
    let nv = net.n_vertices();
    let mut vertex_value = vec![0.0; nv];
    let mut generator_value = vec![0.0; nv];
    // Per edge endpoint: target (value, directional d1, d2).
    let mut targets: Vec<[(f64, f64, f64); 2]> = vec![[(0.0, 0.0, 0.0); 2]; net.n_edges()];

    for v in 0..nv {
        let cv = rng.gen_range(-0.5..0.5);
        vertex_value[v] = cv;
        let inc = net.incident(v);
        if net.vertex(v).is_boundary {
            let (e, end) = inc[0];
            let curv = rng.gen_range(-1.0..1.0);
            let slot = if end == Endpoint::Start { 0 } else { 1 };
            // Outward derivative zero <=> directional derivative zero.
            targets[e][slot] = (cv, 0.0, curv);
            let b_trace = b.0.trace_at(e, end);
            generator_value[v] = net.edge(e).diffusivity * curv + b_trace * 0.0;
        } else {
            let eta = net.vertex(v).eta;
            let weights: Vec<f64> = inc
                .iter()
                .map(|&(e, _)| net.edge(e).diffusivity * net.gamma(v, e).expect("incident"))
                .collect();
            let mut outward: Vec<f64> = inc.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
            let gv = if eta > 0.0 {
                -weights.iter().zip(&outward).map(|(w, o)| w * o).sum::<f64>() / eta
            } else {
                // Classical Kirchhoff: project the slopes onto sum(w*o) = 0.
                let dot: f64 = weights.iter().zip(&outward).map(|(w, o)| w * o).sum();
                let norm2: f64 = weights.iter().map(|w| w * w).sum();
                for (o, w) in outward.iter_mut().zip(&weights) {
                    *o -= dot * w / norm2;
                }
                rng.gen_range(-1.0..1.0)
            };
            generator_value[v] = gv;
            for (k, &(e, end)) in inc.iter().enumerate() {
                let d = net.edge(e);
                let sgn = end.orientation();
                let directional = sgn * outward[k];
                let b_trace = b.0.trace_at(e, end);
                // Gf = mu f'' + b f' must equal gv at the vertex.
                let d2 = (gv - b_trace * directional) / d.diffusivity;
                let slot = if end == Endpoint::Start { 0 } else { 1 };
                targets[e][slot] = (cv, directional, d2);
            }
        }
    }

    // One quintic correction per edge, solved against the *discrete*
    // endpoint functionals so the targets hold exactly at grid level.
    let mut field = base;
    for e in 0..net.n_edges() {
        let d = net.edge(e);
        let n = d.grid_points;
        let h = d.h();
        let l = d.length;

        let basis: Vec<Vec<f64>> = (0..6)
            .map(|j| (0..n).map(|i| (d.x(i) / l).powi(j as i32)).collect())
            .collect();
        let mut a = DMatrix::<f64>::zeros(6, 6);
        let mut rhs = DVector::<f64>::zeros(6);
        let current = field.edge(e);
        for (slot, end) in [(0usize, Endpoint::Start), (1, Endpoint::End)] {
            let (tv, t1, t2) = targets[e][slot];
            let (cv, c1, c2) = endpoint_functionals(current, h, end);
            for (j, bj) in basis.iter().enumerate() {
                let (bv, b1, b2) = endpoint_functionals(bj, h, end);
                a[(3 * slot, j)] = bv;
                a[(3 * slot + 1, j)] = b1;
                a[(3 * slot + 2, j)] = b2;
            }
            rhs[3 * slot] = tv - cv;
            rhs[3 * slot + 1] = t1 - c1;
            rhs[3 * slot + 2] = t2 - c2;
        }
        // One step of iterative refinement keeps the constraint residual at
        // round-off even though the stencil rows scale like 1/h^2.
        let coeff = solve_dense(a.clone(), rhs.clone())?;
        let resid = &rhs - &a * DVector::from_vec(coeff.clone());
        let corr = solve_dense(a, resid)?;
        let coeff: Vec<f64> = coeff.iter().zip(&corr).map(|(c, dc)| c + dc).collect();

        let vals = field.edge_mut(e);
        for i in 0..n {
            let mut q = 0.0;
            for (j, c) in coeff.iter().enumerate() {
                q += c * basis[j][i];
            }
            vals[i] += q;
        }
    }

    Ok(TestFunction { field, vertex_value, generator_value })
}

/// Residuals of the generator-domain conditions for `f` under drift `b`.
pub struct DomainResiduals {
    /// Largest mismatch between endpoint samples and the stored vertex value.
    pub continuity: f64,
    /// Largest spread of per-edge generator traces at a vertex.
    pub generator_spread: f64,
    /// Largest interior-vertex balance residual `eta Gf + sum mu gamma df`.
    pub vertex_balance: f64,
    /// Largest outward derivative at a boundary vertex.
    pub boundary_neumann: f64,
}

impl DomainResiduals {
    pub fn max(&self) -> f64 {
        self.continuity
            .max(self.generator_spread)
            .max(self.vertex_balance)
            .max(self.boundary_neumann)
    }
}

/// Evaluate the domain-condition residuals of `f` at grid level.
pub fn domain_residuals(net: &Network, f: &TestFunction, b: &DriftField) -> DomainResiduals {
    let mut out = DomainResiduals {
        continuity: 0.0,
        generator_spread: 0.0,
        vertex_balance: 0.0,
        boundary_neumann: 0.0,
    };
    for v in 0..net.n_vertices() {
        let inc = net.incident(v);
        let mut gen_traces = Vec::new();
        for &(e, end) in inc {
            let d = net.edge(e);
            let vals = f.field.edge(e);
            let (value, d1, d2) = endpoint_functionals(vals, d.h(), end);
            out.continuity = out.continuity.max((value - f.vertex_value[v]).abs());
            let b_trace = b.0.trace_at(e, end);
            gen_traces.push(d.diffusivity * d2 + b_trace * d1);
            if net.vertex(v).is_boundary {
                out.boundary_neumann = out.boundary_neumann.max((end.orientation() * d1).abs());
            }
        }
        let gv = gen_traces.iter().sum::<f64>() / gen_traces.len() as f64;
        for g in &gen_traces {
            out.generator_spread = out.generator_spread.max((g - gv).abs());
        }
        if !net.vertex(v).is_boundary {
            let mut balance = net.vertex(v).eta * gv;
            for &(e, _) in inc {
                let g = net.gamma(v, e).expect("incident");
                let dout = net.outward_derivative(&f.field, v, e).expect("incident");
                balance += net.edge(e).diffusivity * g * dout;
            }
            out.vertex_balance = out.vertex_balance.max(balance.abs());
        }
    }
    out
}

/// The stationarity residual `|int Gf dm|` of the solved invariant measure
/// against an admissible test function.
///
/// Rejects `f` when the domain conditions fail beyond `tol` (the identity
/// only holds on the generator's domain). For the exact measure the result
/// is O(h^2) * ||f||.
pub fn duality_residual(
    net: &Network,
    f: &TestFunction,
    sol: &FPSolution,
    b: &DriftField,
    tol: f64,
) -> Result<f64, SolveError> {
    let res = domain_residuals(net, f, b);
    if res.max() > tol {
        return Err(SolveError::NotInDomain { residual: res.max(), tol });
    }

    let df = net.derivative(&f.field);
    let d2f = net.second_derivative(&f.field);
    let mut gf = EdgeField::zeros(net);
    for e in 0..net.n_edges() {
        let mu = net.edge(e).diffusivity;
        let bv = b.0.edge(e);
        let out = gf.edge_mut(e);
        for i in 0..out.len() {
            out[i] = mu * d2f.edge(e)[i] + bv[i] * df.edge(e)[i];
        }
    }

    let interior = net.quadrature(&gf.zip_with(&sol.measure.density, |x, y| x * y));
    // Atom weights are exactly eta_v * T_v[m], so the vertex part of the
    // integral is sum_v atom_v * Gf(v).
    let mut vertex_part = 0.0;
    for (&v, &atom) in &sol.measure.atoms {
        let inc = net.incident(v);
        let gv = inc
            .iter()
            .map(|&(e, end)| {
                let d = net.edge(e);
                let (_, d1, d2) = endpoint_functionals(f.field.edge(e), d.h(), end);
                d.diffusivity * d2 + b.0.trace_at(e, end) * d1
            })
            .sum::<f64>()
            / inc.len() as f64;
        vertex_part += atom * gv;
    }
    Ok((interior + vertex_part).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::fp::{solve_stationary, DriftField};

    #[test]
    fn construction_satisfies_domain_conditions_to_roundoff() {
        for seed in 0..5u64 {
            let net = fixtures::two_edge_star(0.5, 65);
            let b = DriftField::from_fn(&net, |_, x| (1.5 * x).cos());
            let f = make_test_function(seed, &net, &b).unwrap();
            let res = domain_residuals(&net, &f, &b);
            assert!(res.max() < 1e-12, "seed {seed}: residual {:.3e}", res.max());
        }
    }

    #[test]
    fn boundary_vertices_get_exact_neumann_data() {
        let net = fixtures::single_edge(33);
        let b = DriftField::zero(&net);
        let f = make_test_function(0, &net, &b).unwrap();
        let res = domain_residuals(&net, &f, &b);
        assert!(res.boundary_neumann < 1e-12);
    }

    #[test]
    fn same_seed_reproduces_the_field() {
        let net = fixtures::three_edge_star(33);
        let b = DriftField::constant(&net, 0.3);
        let f1 = make_test_function(7, &net, &b).unwrap();
        let f2 = make_test_function(7, &net, &b).unwrap();
        assert_eq!(f1.field, f2.field);
        assert_eq!(f1.vertex_value, f2.vertex_value);
    }

    #[test]
    fn constant_test_function_gives_zero_residual() {
        let net = fixtures::two_edge_star(0.5, 33);
        let b = DriftField::zero(&net);
        let sol = solve_stationary(&net, &b).unwrap();
        let f = TestFunction {
            field: EdgeField::constant(&net, 3.0),
            vertex_value: vec![3.0; net.n_vertices()],
            generator_value: vec![0.0; net.n_vertices()],
        };
        let r = duality_residual(&net, &f, &sol, &b, DOMAIN_TOL).unwrap();
        assert!(r < 1e-12, "residual {r:.3e}");
    }

    #[test]
    fn violating_vertex_condition_is_rejected() {
        let net = fixtures::two_edge_star(0.5, 33);
        let b = DriftField::zero(&net);
        let sol = solve_stationary(&net, &b).unwrap();
        let mut f = make_test_function(3, &net, &b).unwrap();
        // Break the junction balance by tilting one edge's samples by x.
        let d = net.edge(0);
        for i in 0..d.grid_points {
            f.field.edge_mut(0)[i] += d.x(i);
        }
        let err = duality_residual(&net, &f, &sol, &b, DOMAIN_TOL);
        assert!(matches!(err, Err(SolveError::NotInDomain { .. })));
    }

    #[test]
    fn duality_residual_small_and_second_order() {
        let cases: [(&str, fn(usize) -> crate::net::Network, fn(usize, f64) -> f64); 2] = [
            ("sticky star", |n| fixtures::two_edge_star(0.5, n), |_, _| 0.0),
            ("single edge drift", fixtures::single_edge, |_, _| 1.0),
        ];
        for (name, make, drift) in cases {
            for seed in 0..6u64 {
                let mut residuals = Vec::new();
                for &n in &[65usize, 129] {
                    let net = make(n);
                    let b = DriftField::from_fn(&net, drift);
                    let sol = solve_stationary(&net, &b).unwrap();
                    let f = make_test_function(seed, &net, &b).unwrap();
                    residuals.push(duality_residual(&net, &f, &sol, &b, DOMAIN_TOL).unwrap());
                }
                assert!(
                    residuals[0] < 1e-3,
                    "{name} seed {seed}: residual {:.3e} too large",
                    residuals[0]
                );
                let order = (residuals[0] / residuals[1]).log2();
                assert!(
                    order > 1.5 || residuals[1] < 1e-10,
                    "{name} seed {seed}: order {order:.2} ({residuals:?})"
                );
            }
        }
    }
}
