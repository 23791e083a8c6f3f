//! Combinatorial mesh calculus: discrete exterior calculus on quasi-cubical
//! cell complexes, with primal and mixed solvers for scalar transport.

pub mod complex;
pub mod error;
pub mod forman;
pub mod geometry;
pub mod io;
pub mod operators;
pub mod solvers;
pub mod viz;

pub use complex::{CellComplex, CellId, Chain, Cochain, SubMesh, ValidationReport, Violation};
pub use error::{CmcError, Result};
pub use forman::{forman_subdivide, IntervalCell, OrthogonalPair, QuasiCubicalMesh};
pub use operators::{cup, inner_product, InnerProduct, MetricData, RiemannianMesh, ZeroTraceSpace};
