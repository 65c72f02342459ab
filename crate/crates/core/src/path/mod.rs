//! Path following: the dispersion curve is traced by integrating the
//! tangent ODE obtained from differentiating the collocation equations.

pub mod dopri;
pub mod seed;
pub mod solution;
pub mod system;

pub use dopri::{adaptive_integrate, dopri_step, IntegrateOptions, Step, Trajectory};
pub use seed::{export_seed, import_seed, SeedRecord};
pub use solution::{pf_angular, pf_radial, PathOptions, PathSolution, PathSource};
pub use system::{assemble_angular, assemble_radial, derivative, BlockSystem};
