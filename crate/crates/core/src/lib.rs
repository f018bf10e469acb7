//! Solvers for stationary mean field games on metric networks whose agents
//! diffuse along the edges and can stick at the junctions.
//!
//! The crate is organized around the coupled PDE system on a network:
//!
//! * [`net`] — the metric network, piecewise fields and discrete calculus;
//! * [`fp`] — the stationary Fokker-Planck solver producing the invariant
//!   measure (edge density plus one atom per sticky vertex) and the
//!   generator-duality test harness;
//! * [`hjb`] — discounted and ergodic Hamilton-Jacobi-Bellman solvers with
//!   generalized Kirchhoff junction conditions, plus the Hamiltonian models;
//! * [`mfg`] — the damped fixed-point iteration coupling the two solvers and
//!   the duality-based uniqueness diagnostics;
//! * [`sim`] — a continuous-time Markov chain approximation of the sticky
//!   diffusion with Monte Carlo estimators that cross-validate the PDE
//!   solvers;
//! * [`io`] — CSV/JSON serialization of fields and measures.

pub mod error;
pub mod fixtures;
pub mod fp;
pub mod hjb;
pub mod io;
pub mod linalg;
pub mod mfg;
pub mod net;
pub mod report;
pub mod sim;

pub use error::{NetError, SolveError};
pub use net::{EdgeField, GraphMeasure, Network, NetworkSpec};
pub use report::{SolveReport, Warning};
