//! Exact dictionary between random walks drifting toward a hard wall and
//! pinned random-line (solid-on-solid) bridge models on the nonnegative
//! integers.
//!
//! A walk bridge conditioned to start and end at the wall has law
//! Z^-1 prod_n P(X_{n+1} | X_n); a pinned line has Gibbs law
//! Z^-1 prod_n e^{-W(X_n, X_{n+1})} prod_n e^{-V(X_n)}. The translation
//! between the two is exact, not asymptotic:
//!
//! * [`rw_to_sos`] turns kernels into edge energies W and site potentials
//!   V, for strict +-1 walks, acceptance walks with holding, and banded
//!   steps.
//! * [`sos_to_rw`] inverts potentials back into walks via the continued
//!   fraction, closed-form well solutions, and the ground state of the
//!   symmetric transfer kernel.
//! * [`bridge`] computes bridge partition functions, exact path laws,
//!   height marginals, and exact samples, on either side of the
//!   dictionary.
//! * [`phase`] classifies wetting phases: tail-exponent fits, closed-form
//!   wall criteria, and a finite-size growth diagnostic.
//! * [`verify`] runs the end-to-end self-checks with pinned tolerances.
//!
//! Every model lives on the finite lattice {0..cutoff}; steps past the
//! cutoff are redirected to holding there, so quantitative statements are
//! reliable below cutoff/2.

pub mod bridge;
pub mod error;
pub mod io;
pub mod model;
pub mod phase;
pub mod presets;
pub mod rw_to_sos;
pub mod sos_to_rw;
pub mod verify;

pub use error::{Error, Result};
pub use model::{
    detailed_balance_residual, reversing_potential, validate_kernel, w_from_detailed_balance,
    BridgePath, EdgeCoupling, EdgeEnergies, GroundState, KernelStructure, KernelViolation,
    Regime, RegimeReport, SosModel, TailCoupling, Verdict, ViolationKind, WalkKernel, WallMode,
};

pub use bridge::{
    bridge_log_prob_rw, bridge_log_weight_sos, enumerate_bridges, height_marginal, log_partition,
    marginal_mean, path_log_weight, sample_bridge, BridgeSampler, BridgeSystem,
};
pub use phase::{
    classify, mean_height_diagnostic, phase_scan, scan_point, tail_delta_from_coupling,
    tail_delta_from_potential, wall_phase_closed_form, DiagnosticOptions, HeightDiagnostic,
    ScanOptions, ScanPoint, ScanRow, TailFit,
};
pub use rw_to_sos::{
    general_metropolis_kernel, kernel_from_phi, metropolis_full_kernel, metropolis_reflect_kernel,
    phi_from_rates, sos_from_general, sos_from_metropolis, sos_from_phi, BaseStepKernel,
};
pub use sos_to_rw::{
    continued_fraction_invert, double_step_analysis, ground_state_from_walk, kernel_from_sos,
    perron_ground_state, square_well_analysis, up_weight_sequence, CfInversion,
    DoubleStepAnalysis, DoubleStepRoot, SquareWellAnalysis, TranslatedKernel,
};
pub use verify::{run_all, CriterionResult, Tolerances};
