//! Quasi-stationary model of second-harmonic generation driven by multimode
//! squeezed vacuum: per-mode Gaussian-state algebra, the parametric gain and
//! mode-counting integrals, the SHG conversion split into coherent and
//! incoherent parts, a Poisson detection chain, weighted origin-pass fits,
//! and figure-style sweep scenarios with deterministic seeding.

pub mod analysis;
pub mod constants;
pub mod error;
pub mod experiments;
pub mod measurement;
pub mod mode_state;
pub mod oracle;
pub mod pdc;
pub mod quadrature;
pub mod shg;

pub use analysis::{
    efficiency_from_fit, find_crossover, find_crossover_refined, fit, FitModel, FitResult,
};
pub use error::{Error, Result};
pub use experiments::{
    calibrate, fixed_gain_scan, run_scenario, CalibrationOutcome, ExperimentConfig, RunOutput,
    Scenario, ScenarioSummary, SweepAxis, SweepRow, SweepSpec,
};
pub use measurement::{
    aperture_fraction, background_subtract, derive_row_seed, simulate_counts, CountRun,
    DetectionChain, Subtracted,
};
pub use mode_state::{
    fock_oracle, moments, two_photon_moments, FockOracle, SqueezedModeState, TwoPhotonMoments,
    GAIN_GUARD,
};
pub use oracle::{OracleCheck, OracleReport};
pub use pdc::{
    coupling_lambda, invert_flux, mode_density, mode_number_lowgain, narrowing_ratio, peak_gain,
    photon_energy, sv_summary, CrystalParams, PumpPulse, SpectralWindow, SvFieldSummary,
};
pub use quadrature::{gain_integrals, gain_integrals_raw, GainIntegrals, Grid};
pub use shg::{
    classical_shg, enhancement_ratio, eshg_from_sv, matched_classical, ClassicalPulse,
    EnhancementMode, ShgCoupling, ShgResult,
};
