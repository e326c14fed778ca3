//! Simulation and statistical checks for the k-nearest-neighbour random
//! geometric graph: sampling and exact graph construction, component and
//! grid-charge analysis, the local box events with their tile certificate,
//! Poisson-approximation statistics and a reproducible parallel harness.

pub mod error;
pub mod graph;
pub mod harness;
pub mod local;
pub mod model;
pub mod rng;
pub mod stats;

pub use error::{LabError, Result};
pub use graph::{BadEventFlags, ComponentSummary, GridPoint};
pub use model::{KnnGraph, Point, PointSet, Region};
