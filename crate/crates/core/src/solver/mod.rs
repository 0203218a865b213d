//! Time stepping for `W_t = Div(a(W) DW) + F(W)` and `W_t = Div(a(W) DW) + G(W)W`
//! with the regularization `a(W) + εId`.
//!
//! The default scheme freezes `a(Wⁿ)`, treats diffusion implicitly in
//! conservative flux form and the reaction explicitly. An explicit scheme
//! sharing the same assembly is available for cross-checks.

mod model;
mod scheme;

pub use model::{
    ellipticity_probe, kirchhoff_transform, spectral_gap_check, DiffusionModel, EllipticityReport, MatrixMap,
    PotentialMap, Preset, ProbeQuotient, Reaction, ScalarMap, SpectralGap, VectorMap,
};
pub use scheme::{
    assemble, explicit_stability_bound, flux_lower_bound, simulate, step, FluxBound, Scheme, Snapshot, SolverConfig,
    State, StepDiagnostics, StepStats, Termination, Trajectory, BLOW_UP_THRESHOLD,
};
