//! Nonlocal (2+1)-dimensional KdV-type wave equations over a periodic box.

pub mod bathymetry;
pub mod boussinesq;
pub mod calculus;
pub mod elliptic;
pub mod equations;
pub mod error;
pub mod evolve;
pub mod io;
pub mod operators;
pub mod params;
pub mod profile;
pub mod solutions;
pub mod table;

pub use error::{Error, Result};
pub use bathymetry::{Bathymetry, Segment};
pub use equations::{EquationId, GardnerForm, ResidualReport, WaveEquation};
pub use operators::{Axis2, Field2D, Grid2D, Spectrum};
pub use params::{CaseId, PhysicalParams};
pub use solutions::{Frame, SolutionFamily, SolutionKind, WaveMetrics, WaveParams};
