//! Serialization (under construction).
