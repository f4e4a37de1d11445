//! Synthesis, quantification, and cloning of graph-theoretic workloads,
//! with core-type clustering and mesh sizing for many-core co-design.

pub mod algobank;
pub mod cli;
pub mod cloner;
pub mod codesign;
pub mod control_flow;
pub mod dist;
pub mod error;
pub mod generator;
pub mod hypergraph;
pub mod locality;
pub mod profile;
pub mod report;
pub mod scan;

pub use error::{ForgeError, Result};
