//! Stochastic simulator (under construction).
