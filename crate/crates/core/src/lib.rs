//! Laplacian calculus on finite weighted graphs with a vertex measure,
//! together with numerical verification of the gradient estimate for
//! positive functions and its consequences: Harnack inequalities for the
//! heat equation with potential, heat-kernel comparisons, and eigenvalue
//! bounds.
//!
//! ```
//! use graphgrad::{graph::WeightedGraph, function::VertexFunction, operators, report::CheckOptions};
//!
//! let g = WeightedGraph::undirected(vec![1.0, 1.0], &[(0, 1, 1.0)]).unwrap();
//! let u = VertexFunction::new(vec![1.0, 2.0]);
//! let report = operators::check_gradient_estimate(&g, &u, &CheckOptions::default()).unwrap();
//! assert!(report.passed);
//! ```

pub mod campaign;
pub mod error;
pub mod function;
pub mod generate;
pub mod graph;
pub mod harnack;
pub mod heat;
pub mod io;
pub mod operators;
pub mod report;
pub mod spectral;

pub use error::{Error, Result};
pub use function::VertexFunction;
pub use graph::{GraphConstants, WeightedGraph};
pub use report::{CheckOptions, CheckReport};
