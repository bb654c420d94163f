//! Correlation harvesting by pairs of Unruh–DeWitt detectors coupled linearly
//! or quadratically to a massless scalar field: density-matrix elements,
//! their independent reference evaluations, cutoff-divergence diagnostics and
//! the entanglement and mutual-information measures built from them.

pub mod correlators;
pub mod divergence;
pub mod elements;
pub mod measures;
pub mod oracle;
pub mod quadrature;
pub mod specfun;

pub use num_complex::Complex64;

pub use correlators::{CorrelatorError, SpacetimePair};
pub use divergence::{DivergenceError, LogFit, SweepResult, SweepRow, Verdict, VerdictCriteria};
pub use elements::{element, Coupling, ElementError, ElementResult, Params, Term};
pub use measures::{CorrelationMeasures, DensityMatrix4, ElementSet, MeasuresError};
pub use oracle::{OracleError, OracleSpec};
pub use quadrature::{QuadResult, QuadratureError, QuadratureSpec};
pub use specfun::SpecfunError;
