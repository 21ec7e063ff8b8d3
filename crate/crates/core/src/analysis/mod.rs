//! Relaxation fits, scaling collapses, bootstrap errors and the
//! critical-slowing-down check.

pub mod bootstrap;
pub mod collapse;
pub mod csd;
pub mod optim;
pub mod relax;

pub use bootstrap::{bootstrap_errors, BootstrapErrors, DEFAULT_RESAMPLES, MIN_RESAMPLES};
pub use collapse::{
    band_slice, collapse_1d, collapse_2d, collapsed_surface, detuning, refit_1d, refit_2d,
    Collapse1dOptions, Collapse2dOptions, CollapseMode, CollapsedPoint, ScalingFitResult,
    ScalingPoint, SurfacePoint,
};
pub use csd::{csd_consistency, CsdReport};
pub use relax::{fit_relaxation, RelaxationFit};
