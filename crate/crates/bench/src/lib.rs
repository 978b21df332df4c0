//! Shared fixtures for the benchmarks: one reference operating point so
//! every bench exercises the same regime the sweeps spend their time in.

use eshg_core::{photon_energy, CrystalParams, PumpPulse, SpectralWindow};

/// High-gain end of the standard sweep: 120 μJ through the default crystal.
pub fn reference_point() -> (CrystalParams, PumpPulse, SpectralWindow, f64) {
    let crystal = CrystalParams::default();
    let pump = PumpPulse { pulse_energy: 120e-6, ..PumpPulse::default() };
    let window = SpectralWindow::default();
    let n_pump = pump.pulse_energy / photon_energy(crystal.lambda_pump);
    (crystal, pump, window, n_pump)
}
