//! Mean field game fixed point (under construction).
