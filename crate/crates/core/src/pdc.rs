//! Parametric down-conversion: the dimensionless coupling Λ, mode counting,
//! and the quasi-stationary local-gain model of the squeezed-vacuum field.

use crate::constants::{gaussian_volume, gaussian_volume_factor, HBAR, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::mode_state::GAIN_GUARD;
use crate::quadrature::{gain_integrals, gain_integrals_raw, Grid, HALF_EXTENT};

/// Convention constant: entanglement duration × temporal bandwidth.
pub const WINDOW_TIME_PRODUCT: f64 = 5.625;
/// Convention constant: entanglement size × angular bandwidth.
pub const WINDOW_SPACE_PRODUCT: f64 = 6.6;

/// Nonlinear crystal cut for degenerate collinear type-I operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrystalParams {
    pub length: f64,
    pub d_eff: f64,
    pub n_pump: f64,
    pub n_sv: f64,
    pub lambda_pump: f64,
    pub lambda_sv: f64,
}

impl Default for CrystalParams {
    /// 2-mm BBO, d_eff = 1.79 pm/V, n = 1.66 at both 515 nm and 1030 nm.
    fn default() -> Self {
        CrystalParams {
            length: 2e-3,
            d_eff: 1.79e-12,
            n_pump: 1.66,
            n_sv: 1.66,
            lambda_pump: 515e-9,
            lambda_sv: 1030e-9,
        }
    }
}

impl CrystalParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("length", self.length),
            ("n_pump", self.n_pump),
            ("n_sv", self.n_sv),
            ("lambda_pump", self.lambda_pump),
            ("lambda_sv", self.lambda_sv),
        ];
        for (name, v) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Domain(format!("crystal {name} = {v} must be > 0")));
            }
        }
        if !self.d_eff.is_finite() || self.d_eff < 0.0 {
            return Err(Error::Domain(format!("crystal d_eff = {} must be ≥ 0", self.d_eff)));
        }
        // degenerate collinear type-I: the SV sits at twice the pump wavelength
        let rel = (self.lambda_sv - 2.0 * self.lambda_pump).abs() / self.lambda_sv;
        if rel > 1e-6 {
            return Err(Error::Domain(format!(
                "lambda_sv = {} is not 2·lambda_pump = {} (relative mismatch {rel:.2e})",
                self.lambda_sv,
                2.0 * self.lambda_pump
            )));
        }
        Ok(())
    }
}

/// Gaussian pump pulse described by its intensity FWHMs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpPulse {
    pub pulse_energy: f64,
    pub beam_fwhm: f64,
    pub duration_fwhm: f64,
    pub rep_rate: f64,
}

impl Default for PumpPulse {
    fn default() -> Self {
        PumpPulse {
            pulse_energy: 1e-6,
            beam_fwhm: 1.5e-3,
            duration_fwhm: 185e-15,
            rep_rate: 500e3,
        }
    }
}

impl PumpPulse {
    pub fn validate(&self) -> Result<()> {
        if !self.pulse_energy.is_finite() || self.pulse_energy < 0.0 {
            return Err(Error::Domain(format!(
                "pulse_energy = {} must be ≥ 0",
                self.pulse_energy
            )));
        }
        for (name, v) in [
            ("beam_fwhm", self.beam_fwhm),
            ("duration_fwhm", self.duration_fwhm),
            ("rep_rate", self.rep_rate),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Domain(format!("pump {name} = {v} must be > 0")));
            }
        }
        Ok(())
    }

    /// Spatiotemporal volume (π/(4 ln 2))^{3/2}·F_b²·F_t, in m²·s.
    pub fn volume(&self) -> f64 {
        gaussian_volume(self.beam_fwhm, self.duration_fwhm)
    }

    /// Photon number at the given pump wavelength.
    pub fn photons(&self, lambda_pump: f64) -> f64 {
        self.pulse_energy / photon_energy(lambda_pump)
    }
}

/// Energy of one photon at `wavelength` metres.
pub fn photon_energy(wavelength: f64) -> f64 {
    HBAR * 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / wavelength
}

/// Spectral/angular acceptance and the reciprocal entanglement cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralWindow {
    pub temporal_bandwidth: f64,
    pub angular_bandwidth: f64,
    pub ent_duration: f64,
    pub ent_size: f64,
}

impl Default for SpectralWindow {
    fn default() -> Self {
        SpectralWindow {
            temporal_bandwidth: 125e12,
            angular_bandwidth: 300e3,
            ent_duration: 45e-15,
            ent_size: 22e-6,
        }
    }
}

impl SpectralWindow {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("temporal_bandwidth", self.temporal_bandwidth),
            ("angular_bandwidth", self.angular_bandwidth),
            ("ent_duration", self.ent_duration),
            ("ent_size", self.ent_size),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Domain(format!("window {name} = {v} must be > 0")));
            }
        }
        // the entanglement cell is tied to the bandwidths by fixed
        // reciprocal-pair products of the chosen convention
        let tp = self.ent_duration * self.temporal_bandwidth;
        if (tp - WINDOW_TIME_PRODUCT).abs() / WINDOW_TIME_PRODUCT > 1e-3 {
            return Err(Error::Domain(format!(
                "ent_duration·temporal_bandwidth = {tp} deviates from {WINDOW_TIME_PRODUCT}"
            )));
        }
        let sp = self.ent_size * self.angular_bandwidth;
        if (sp - WINDOW_SPACE_PRODUCT).abs() / WINDOW_SPACE_PRODUCT > 1e-3 {
            return Err(Error::Domain(format!(
                "ent_size·angular_bandwidth = {sp} deviates from {WINDOW_SPACE_PRODUCT}"
            )));
        }
        Ok(())
    }
}

/// One operating point of the squeezed-vacuum field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvFieldSummary {
    pub n_sv_per_pulse: f64,
    pub k_m: f64,
    /// Photons per mode; equals sinh²(g0) by construction.
    pub n_per_mode: f64,
    pub beam_fwhm: f64,
    pub duration_fwhm: f64,
    pub g0: f64,
}

/// Dimensionless parametric coupling per √photon:
/// Λ = 2·l_c·d_eff·√(ħω_P·ω_SV²/(2ε₀·n_P·n_SV²·c³·V_P)).
pub fn coupling_lambda(crystal: &CrystalParams, pump: &PumpPulse) -> Result<f64> {
    crystal.validate()?;
    pump.validate()?;
    let v_p = pump.volume();
    if v_p <= 0.0 {
        return Err(Error::Domain(format!("pump volume V_P = {v_p} must be > 0")));
    }
    let two_pi_c = 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT;
    let omega_p = two_pi_c / crystal.lambda_pump;
    let omega_sv = two_pi_c / crystal.lambda_sv;
    let c3 = SPEED_OF_LIGHT.powi(3);
    let inner = HBAR * omega_p * omega_sv * omega_sv
        / (2.0 * crate::constants::VACUUM_PERMITTIVITY
            * crystal.n_pump
            * crystal.n_sv
            * crystal.n_sv
            * c3
            * v_p);
    Ok(2.0 * crystal.length * crystal.d_eff * inner.sqrt())
}

/// Peak gain g0 = Λ·√N_P. Caller guarantees n_pump_photons ≥ 0.
pub fn peak_gain(lambda: f64, n_pump_photons: f64) -> f64 {
    lambda * n_pump_photons.sqrt()
}

/// Low-gain mode count K_m(0) = (F_t/τ_ent)·(F_b/s_ent)².
pub fn mode_number_lowgain(pump: &PumpPulse, window: &SpectralWindow) -> f64 {
    let transverse = pump.beam_fwhm / window.ent_size;
    (pump.duration_fwhm / window.ent_duration) * transverse * transverse
}

/// Mode density D = K_m(0)/V_P, in m⁻²·s⁻¹; calibrated so the low-gain
/// limit of the volume integral reproduces K_m(0) exactly.
pub fn mode_density(pump: &PumpPulse, window: &SpectralWindow) -> f64 {
    mode_number_lowgain(pump, window) / pump.volume()
}

/// FWHM ratio of the sinh²(g0·f) profile to the pump intensity profile,
/// found by bisecting sinh²(g0·f(x)) = ½·sinh²(g0) on the peak slice.
/// Equals 1 in the low-gain limit and shrinks with g0.
pub fn narrowing_ratio(g0: f64) -> Result<f64> {
    if !g0.is_finite() || g0 < 0.0 {
        return Err(Error::Domain(format!("gain g0 = {g0} must be finite and ≥ 0")));
    }
    if g0 > GAIN_GUARD {
        return Err(Error::GainOverflow { g: g0, limit: GAIN_GUARD });
    }
    if g0 == 0.0 {
        return Ok(1.0); // limit convention: the intensity profile itself
    }
    const A: f64 = 2.0 * std::f64::consts::LN_2;
    let half_peak = 0.5 * g0.sinh().powi(2);
    let excess = |x: f64| (g0 * (-A * x * x).exp()).sinh().powi(2) - half_peak;
    let (mut lo, mut hi) = (0.0, HALF_EXTENT);
    debug_assert!(excess(lo) > 0.0 && excess(hi) < 0.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // x is the half-width in units where the pump intensity FWHM is 1
    Ok(lo + hi)
}

/// Evaluates the quasi-stationary model at pump photon number `n_pump_photons`:
/// N_SV = D·∫sinh²(g0·f) over the pump volume, K_m = N_SV/sinh²(g0), and the
/// narrowed beam/duration FWHMs.
pub fn sv_summary(
    crystal: &CrystalParams,
    pump: &PumpPulse,
    window: &SpectralWindow,
    n_pump_photons: f64,
    grid: Grid,
) -> Result<SvFieldSummary> {
    window.validate()?;
    if !n_pump_photons.is_finite() || n_pump_photons < 0.0 {
        return Err(Error::Domain(format!(
            "pump photon number {n_pump_photons} must be ≥ 0"
        )));
    }
    let lambda = coupling_lambda(crystal, pump)?;
    let g0 = peak_gain(lambda, n_pump_photons);
    if g0 > GAIN_GUARD {
        return Err(Error::GainOverflow { g: g0, limit: GAIN_GUARD });
    }
    let k0 = mode_number_lowgain(pump, window);
    if g0 == 0.0 {
        return Ok(SvFieldSummary {
            n_sv_per_pulse: 0.0,
            k_m: k0,
            n_per_mode: 0.0,
            beam_fwhm: pump.beam_fwhm,
            duration_fwhm: pump.duration_fwhm,
            g0: 0.0,
        });
    }
    let ints = gain_integrals(g0, grid)?;
    // D·F_b²·F_t·Ĵ₂ collapses to K_m(0)·Ĵ₂/(π/(4 ln 2))^{3/2}
    let n_sv = k0 * ints.j2 / gaussian_volume_factor();
    let n_per_mode = g0.sinh().powi(2);
    let w = narrowing_ratio(g0)?;
    Ok(SvFieldSummary {
        n_sv_per_pulse: n_sv,
        k_m: n_sv / n_per_mode,
        n_per_mode,
        beam_fwhm: w * pump.beam_fwhm,
        duration_fwhm: w * pump.duration_fwhm,
        g0,
    })
}

/// Finds the pump photon number delivering `target` SV photons per pulse
/// *after* a transmission `t`, i.e. solves t·N_SV(N_P) = target. Residual
/// below 1e−9 relative on the refined model curve.
pub fn invert_flux(
    crystal: &CrystalParams,
    pump: &PumpPulse,
    window: &SpectralWindow,
    target: f64,
    t: f64,
    grid: Grid,
) -> Result<f64> {
    window.validate()?;
    if !target.is_finite() || target < 0.0 {
        return Err(Error::Domain(format!("target flux {target} must be ≥ 0")));
    }
    if !t.is_finite() || t <= 0.0 || t > 1.0 {
        return Err(Error::Domain(format!("transmission t = {t} outside (0, 1]")));
    }
    if target == 0.0 {
        return Ok(0.0);
    }
    let lambda = coupling_lambda(crystal, pump)?;
    let k0 = mode_number_lowgain(pump, window);
    let vpf = gaussian_volume_factor();
    let needed = target / t;
    if lambda == 0.0 {
        return Err(Error::Range(format!(
            "target {target} unreachable: coupling is zero"
        )));
    }
    let reachable = k0 * gain_integrals(GAIN_GUARD, grid)?.j2 / vpf;
    if needed > reachable {
        return Err(Error::Range(format!(
            "target {target} at t = {t} needs N_SV = {needed:.3e}, beyond {reachable:.3e} \
             at the g0 ≤ {GAIN_GUARD} guard"
        )));
    }

    // bracketed bisection on a cheap solver grid, then a secant polish
    // against the refined model curve
    let solver = Grid { points_per_axis: 65 };
    let coarse = |g: f64| -> Result<f64> { Ok(k0 * gain_integrals_raw(g, solver)?.j2 / vpf) };
    let (mut lo, mut hi) = (0.0f64, GAIN_GUARD);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if coarse(mid)? < needed {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let refined = |g: f64| -> Result<f64> { Ok(k0 * gain_integrals(g, grid)?.j2 / vpf) };
    let mut g1 = 0.5 * (lo + hi);
    let mut g0 = (g1 * (1.0 + 1e-6)).min(GAIN_GUARD);
    let mut y1 = refined(g1)? - needed;
    let mut y0 = refined(g0)? - needed;
    for _ in 0..10 {
        if y1.abs() <= 1e-12 * needed || y1 == y0 {
            break;
        }
        let next = (g1 - y1 * (g1 - g0) / (y1 - y0)).clamp(f64::MIN_POSITIVE, GAIN_GUARD);
        g0 = g1;
        y0 = y1;
        g1 = next;
        y1 = refined(g1)? - needed;
    }
    let rel = y1.abs() / needed;
    if rel > 1e-9 {
        return Err(Error::Convergence {
            quantity: "invert_flux residual",
            rel_change: rel,
            limit: 1e-9,
        });
    }
    Ok((g1 / lambda).powi(2))
}
