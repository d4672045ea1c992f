//! Exact HP lattice protein structure prediction.

pub mod lattice;
pub mod model;
pub mod cores;
pub mod solver;
pub mod oracle;
pub mod predict;
pub mod cli;
