//! Trapezoidal quadrature of the gain-profile integrals over the pump's
//! spatiotemporal volume.
//!
//! Everything is evaluated in normalized coordinates u = (x/F_b, y/F_b,
//! t/F_t) where the pump *intensity* FWHM is 1 per axis, so the amplitude
//! profile is f(u) = exp(−2 ln 2 |u|²) and the box ±3 per axis contains the
//! profile down to e⁻¹²·⁵ of the peak amplitude.

use crate::error::{Error, Result};
use crate::mode_state::GAIN_GUARD;

/// Integration half-extent per axis, in intensity-FWHM units.
pub const HALF_EXTENT: f64 = 3.0;

/// Default points per axis (full axis, including both endpoints; odd so the
/// peak is sampled exactly).
pub const DEFAULT_POINTS: usize = 129;

/// Amplitude-profile exponent: f(x) = e^(−A·x²) with the intensity FWHM = 1.
const A: f64 = 2.0 * std::f64::consts::LN_2;

/// Grid resolution for the separable product rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    pub points_per_axis: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { points_per_axis: DEFAULT_POINTS }
    }
}

impl Grid {
    pub fn new(points_per_axis: usize) -> Result<Self> {
        if points_per_axis < 3 || points_per_axis % 2 == 0 {
            return Err(Error::Domain(format!(
                "grid needs an odd point count ≥ 3 per axis, got {points_per_axis}"
            )));
        }
        Ok(Grid { points_per_axis })
    }

    fn doubled(self) -> Self {
        Grid { points_per_axis: 2 * (self.points_per_axis - 1) + 1 }
    }
}

/// Box integrals of sinh²(g₀f) and sinh⁴(g₀f) over the normalized volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainIntegrals {
    pub j2: f64,
    pub j4: f64,
}

/// Single-grid evaluation, no refinement check. Exploits the profile's
/// mirror symmetry per axis and its permutation symmetry across axes, so
/// only the ordered non-negative octant is visited.
pub fn gain_integrals_raw(g0: f64, grid: Grid) -> Result<GainIntegrals> {
    if !g0.is_finite() || g0 < 0.0 {
        return Err(Error::Domain(format!("gain g0 = {g0} must be finite and ≥ 0")));
    }
    if g0 > GAIN_GUARD {
        return Err(Error::GainOverflow { g: g0, limit: GAIN_GUARD });
    }
    let grid = Grid::new(grid.points_per_axis)?;
    if g0 == 0.0 {
        return Ok(GainIntegrals { j2: 0.0, j4: 0.0 });
    }

    let n = grid.points_per_axis;
    let h = 2.0 * HALF_EXTENT / (n - 1) as f64;
    let half = (n + 1) / 2; // points on [0, HALF_EXTENT]

    // Folded per-axis trapezoid weights: the origin and the outer endpoint
    // keep weight h, every interior positive node stands in for its mirror.
    let mut amp = Vec::with_capacity(half);
    let mut w = Vec::with_capacity(half);
    for i in 0..half {
        let x = i as f64 * h;
        amp.push((-A * x * x).exp());
        w.push(if i == 0 || i == half - 1 { h } else { 2.0 * h });
    }

    let mut j2 = 0.0;
    let mut j4 = 0.0;
    for i in 0..half {
        let fi = amp[i];
        let wi = w[i];
        for j in i..half {
            let fij = fi * amp[j];
            let wij = wi * w[j];
            for l in j..half {
                // multiplicity of the ordered triple under axis permutation
                let perm = if i == j && j == l {
                    1.0
                } else if i == j || j == l {
                    3.0
                } else {
                    6.0
                };
                let s = (g0 * fij * amp[l]).sinh();
                let s2 = s * s;
                let weight = perm * wij * w[l];
                j2 += weight * s2;
                j4 += weight * s2 * s2;
            }
        }
    }
    Ok(GainIntegrals { j2, j4 })
}

/// Evaluates on `grid` and on a grid with doubled resolution; errors if
/// either integral moves by more than 0.1%, otherwise returns the refined
/// values.
pub fn gain_integrals(g0: f64, grid: Grid) -> Result<GainIntegrals> {
    const LIMIT: f64 = 1e-3;
    let coarse = gain_integrals_raw(g0, grid)?;
    let refined = gain_integrals_raw(g0, grid.doubled())?;
    for (quantity, c, r) in
        [("j2", coarse.j2, refined.j2), ("j4", coarse.j4, refined.j4)]
    {
        if r == 0.0 {
            continue; // both vanish only at g0 = 0
        }
        let rel_change = ((r - c) / r).abs();
        if rel_change > LIMIT {
            return Err(Error::Convergence { quantity, rel_change, limit: LIMIT });
        }
    }
    Ok(refined)
}
