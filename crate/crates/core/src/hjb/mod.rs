//! Hamilton-Jacobi-Bellman solvers (under construction).
