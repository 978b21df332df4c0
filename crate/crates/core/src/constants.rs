//! Physical constants (SI, CODATA 2018) and geometry factors shared by the
//! pump, down-conversion and second-harmonic models.

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Reduced Planck constant, J*s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

/// Volume of a 3-D Gaussian intensity profile expressed through its
/// full-widths at half maximum: V = (pi / (4 ln 2))^(3/2) * Fb^2 * Ft.
///
/// Fb is the transverse intensity FWHM (same in both axes), Ft the pulse
/// duration FWHM; the result carries units m^2 * s when Fb is in metres and
/// Ft in seconds.
pub fn gaussian_volume(beam_fwhm: f64, duration_fwhm: f64) -> f64 {
    gaussian_volume_factor() * beam_fwhm * beam_fwhm * duration_fwhm
}

/// The dimensionless prefactor (pi / (4 ln 2))^(3/2) ~ 1.2061.
pub fn gaussian_volume_factor() -> f64 {
    let a = std::f64::consts::PI / (4.0 * std::f64::consts::LN_2);
    a.powf(1.5)
}
