//! Per-mode Gaussian-state algebra for squeezed vacuum: moments, the
//! beamsplitter loss channel, two-photon moments, and an independent
//! truncated Fock-space oracle.

use crate::error::{Error, Result};

/// Squeeze gains above this make sinh²(g) (~5.9e16 at 20) large enough to
/// start eating double-precision headroom in downstream fourth moments.
pub const GAIN_GUARD: f64 = 20.0;

/// A single squeezed-vacuum mode after cumulative intensity transmission
/// `eta`. Phase is tracked nowhere: only the magnitude of the anomalous
/// moment matters for phase-insensitive count rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezedModeState {
    g: f64,
    eta: f64,
}

impl SqueezedModeState {
    pub fn new(g: f64, eta: f64) -> Result<Self> {
        check_gain(g)?;
        if !eta.is_finite() || !(0.0..=1.0).contains(&eta) {
            return Err(Error::Domain(format!(
                "transmission eta = {eta} outside [0, 1]"
            )));
        }
        Ok(Self { g, eta })
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Mean photon number, eta·sinh²(g).
    pub fn n(&self) -> f64 {
        self.eta * self.g.sinh().powi(2)
    }

    /// Anomalous-moment magnitude |⟨aa⟩| = eta·sinh(g)cosh(g).
    pub fn m(&self) -> f64 {
        self.eta * self.g.sinh() * self.g.cosh()
    }

    /// Beamsplitter channel with intensity transmission `t`: n → t·n,
    /// m → t·m, g unchanged. Composes multiplicatively in t.
    pub fn apply_loss(&self, t: f64) -> Result<Self> {
        if !t.is_finite() || !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("transmission t = {t} outside [0, 1]")));
        }
        Ok(Self { g: self.g, eta: self.eta * t })
    }

    /// m² − n(n+1); zero only for a pure state (eta = 1), negative otherwise.
    pub fn purity_defect(&self) -> f64 {
        let n = self.n();
        self.m().powi(2) - n * (n + 1.0)
    }
}

fn check_gain(g: f64) -> Result<()> {
    if !g.is_finite() || g < 0.0 {
        return Err(Error::Domain(format!("gain g = {g} must be finite and ≥ 0")));
    }
    if g > GAIN_GUARD {
        return Err(Error::GainOverflow { g, limit: GAIN_GUARD });
    }
    Ok(())
}

/// Pure-state moments (n, m) = (sinh²(g), sinh(g)cosh(g)).
pub fn moments(g: f64) -> Result<(f64, f64)> {
    check_gain(g)?;
    Ok((g.sinh().powi(2), g.sinh() * g.cosh()))
}

/// The pointwise ingredients of second-harmonic conversion driven by a
/// Gaussian state: coherent pair term m², incoherent term 2n².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPhotonMoments {
    pub coherent: f64,
    pub incoherent: f64,
    pub total: f64,
}

pub fn two_photon_moments(state: &SqueezedModeState) -> TwoPhotonMoments {
    let n = state.n();
    let m2 = state.m().powi(2);
    let incoherent = 2.0 * n * n;
    TwoPhotonMoments { coherent: m2, incoherent, total: incoherent + m2 }
}

/// Truncated photon-number distribution of a pure squeezed vacuum, plus the
/// moments summed directly from it. Serves as an independent cross-check of
/// the closed-form state algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOracle {
    /// P(k) for k = 0..=cutoff; odd entries are exactly zero.
    pub probabilities: Vec<f64>,
    /// Probability mass beyond the cutoff.
    pub tail: f64,
    /// Σ k·P(k) over the kept states.
    pub n: f64,
    /// n(n+1) with the summed n (pure-state identity).
    pub m_squared: f64,
    /// Σ k(k−1)·P(k), i.e. ⟨a†a†aa⟩.
    pub two_photon: f64,
}

/// Even-photon probabilities follow P(0) = 1/cosh(g) and
/// P(2k+2) = P(2k)·tanh²(g)·(2k+1)/(2k+2), the squared two-photon
/// amplitudes of the squeezed vacuum. Errors if the tail mass beyond
/// `cutoff` exceeds 1e−8, reporting the cutoff that would suffice.
pub fn fock_oracle(g: f64, cutoff: usize) -> Result<FockOracle> {
    if !g.is_finite() || !(0.0..=1.5).contains(&g) {
        return Err(Error::Domain(format!("oracle gain g = {g} outside [0, 1.5]")));
    }
    if cutoff % 2 != 0 || cutoff < 20 {
        return Err(Error::Domain(format!("cutoff {cutoff} must be even and ≥ 20")));
    }

    let r2 = g.tanh().powi(2);
    let mut probabilities = vec![0.0; cutoff + 1];
    let mut p = 1.0 / g.cosh();
    let mut k = 0usize;
    probabilities[0] = p;
    while k + 2 <= cutoff {
        p *= r2 * (k + 1) as f64 / (k + 2) as f64;
        k += 2;
        probabilities[k] = p;
    }

    // Extend the recurrence past the cutoff to measure the discarded mass
    // and, when it is too large, the cutoff that brings it under 1e-8.
    let mut tail_terms = Vec::new();
    let mut tail = 0.0;
    loop {
        p *= r2 * (k + 1) as f64 / (k + 2) as f64;
        k += 2;
        tail += p;
        tail_terms.push(p);
        if p < 1e-18 * (1.0 + tail) || k > 100_000 {
            break;
        }
    }
    if tail > 1e-8 {
        let mut remaining = tail;
        let mut required = cutoff;
        for term in &tail_terms {
            required += 2;
            remaining -= term;
            if remaining <= 1e-8 {
                break;
            }
        }
        return Err(Error::Truncation { cutoff, tail, required });
    }

    let mut n = 0.0;
    let mut two_photon = 0.0;
    for (k, pk) in probabilities.iter().enumerate() {
        let kf = k as f64;
        n += kf * pk;
        two_photon += kf * (kf - 1.0) * pk;
    }
    Ok(FockOracle { probabilities, tail, n, m_squared: n * (n + 1.0), two_photon })
}
