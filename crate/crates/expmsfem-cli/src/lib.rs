//! Configuration schema and sweep driver behind the `expmsfem` benchmark
//! binary, exposed as a library so the pieces are testable in isolation.

pub mod config;
pub mod runner;
