//! Detection chain: PMT efficiency, far-field aperture, background
//! subtraction, and Poisson-noisy synthetic counts for fit-recovery runs.

use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionChain {
    pub pmt_qe: f64,
    pub aperture_diameter: f64,
    pub incoherent_farfield_diameter: f64,
    /// Counts per pulse from everything the crystal rotation removes.
    pub background_rate: f64,
    pub rep_rate: f64,
    pub acquisition_time: f64,
}

impl Default for DetectionChain {
    /// 40% QE, 1 mm aperture against a 12 mm incoherent far field,
    /// 5 minutes at 500 kHz.
    fn default() -> Self {
        DetectionChain {
            pmt_qe: 0.40,
            aperture_diameter: 1e-3,
            incoherent_farfield_diameter: 12e-3,
            background_rate: 0.0,
            rep_rate: 500e3,
            acquisition_time: 300.0,
        }
    }
}

impl DetectionChain {
    pub fn validate(&self) -> Result<()> {
        if !self.pmt_qe.is_finite() || !(0.0..=1.0).contains(&self.pmt_qe) {
            return Err(Error::Domain(format!("pmt_qe = {} outside [0, 1]", self.pmt_qe)));
        }
        for (name, v) in [
            ("aperture_diameter", self.aperture_diameter),
            ("incoherent_farfield_diameter", self.incoherent_farfield_diameter),
            ("rep_rate", self.rep_rate),
            ("acquisition_time", self.acquisition_time),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Domain(format!("detection {name} = {v} must be > 0")));
            }
        }
        if self.aperture_diameter > self.incoherent_farfield_diameter {
            return Err(Error::Domain(format!(
                "aperture {} larger than the incoherent far field {}",
                self.aperture_diameter, self.incoherent_farfield_diameter
            )));
        }
        if !self.background_rate.is_finite() || self.background_rate < 0.0 {
            return Err(Error::Domain(format!(
                "background_rate = {} must be ≥ 0",
                self.background_rate
            )));
        }
        Ok(())
    }

    pub fn pulses(&self) -> u64 {
        (self.rep_rate * self.acquisition_time).round() as u64
    }
}

/// Solid-angle fraction of the incoherent far field admitted by the
/// aperture; the coherent component passes in full.
pub fn aperture_fraction(chain: &DetectionChain) -> f64 {
    (chain.aperture_diameter / chain.incoherent_farfield_diameter).powi(2)
}

/// One acquisition: Poisson counts at the PMT for a fixed seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountRun {
    pub total_counts: u64,
    pub pulses: u64,
}

impl CountRun {
    /// Counts per pulse, before any efficiency rescaling.
    pub fn raw_mean(&self) -> f64 {
        self.total_counts as f64 / self.pulses as f64
    }

    /// √N counting error per pulse, before rescaling.
    pub fn raw_std(&self) -> f64 {
        (self.total_counts as f64).sqrt() / self.pulses as f64
    }

    /// Mean rescaled to photon units by the quantum efficiency.
    pub fn mean_photons(&self, pmt_qe: f64) -> f64 {
        self.raw_mean() / pmt_qe
    }

    pub fn std_photons(&self, pmt_qe: f64) -> f64 {
        self.raw_std() / pmt_qe
    }
}

/// Draws the total detected counts for `mean_photons_per_pulse` of signal
/// (background added on top, both scaled by the QE). Deterministic in
/// `seed`.
pub fn simulate_counts(
    mean_photons_per_pulse: f64,
    chain: &DetectionChain,
    seed: u64,
) -> Result<CountRun> {
    chain.validate()?;
    if !mean_photons_per_pulse.is_finite() || mean_photons_per_pulse < 0.0 {
        return Err(Error::Domain(format!(
            "mean photons/pulse = {mean_photons_per_pulse} must be ≥ 0"
        )));
    }
    let pulses = chain.pulses();
    if pulses == 0 {
        return Err(Error::Domain("acquisition covers zero pulses".into()));
    }
    let lambda =
        chain.pmt_qe * (mean_photons_per_pulse + chain.background_rate) * pulses as f64;
    let total_counts = if lambda == 0.0 {
        0
    } else {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        Poisson::new(lambda)
            .map_err(|e| Error::Domain(format!("invalid Poisson mean {lambda}: {e}")))?
            .sample(&mut rng) as u64
    };
    Ok(CountRun { total_counts, pulses })
}

/// Background-corrected rate in counts per pulse with the √N errors of the
/// two runs propagated in quadrature. Negative means are reported as-is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subtracted {
    pub mean: f64,
    pub std: f64,
}

impl Subtracted {
    /// Rescale to photon units ("data rescaled accordingly").
    pub fn to_photons(&self, pmt_qe: f64) -> Subtracted {
        Subtracted { mean: self.mean / pmt_qe, std: self.std / pmt_qe }
    }
}

pub fn background_subtract(signal: &CountRun, background: &CountRun) -> Result<Subtracted> {
    if signal.pulses != background.pulses {
        return Err(Error::Shape(format!(
            "signal covers {} pulses but background covers {}",
            signal.pulses, background.pulses
        )));
    }
    let pulses = signal.pulses as f64;
    Ok(Subtracted {
        mean: (signal.total_counts as f64 - background.total_counts as f64) / pulses,
        std: ((signal.total_counts + background.total_counts) as f64).sqrt() / pulses,
    })
}

/// Decorrelated per-row RNG stream: two rounds of the splitmix64 finalizer
/// over (seed, stream index).
pub fn derive_row_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn aperture_fraction_examples() {
        let chain = DetectionChain::default();
        let f = aperture_fraction(&chain);
        assert_relative_eq!(f, 0.00694, max_relative = 1e-3);
        assert!(f < 0.007);

        let open = DetectionChain { aperture_diameter: 12e-3, ..chain };
        assert_eq!(aperture_fraction(&open), 1.0);

        let halved = DetectionChain { aperture_diameter: 0.5e-3, ..chain };
        assert_relative_eq!(aperture_fraction(&halved), f / 4.0, max_relative = 1e-12);

        // scale-invariant under common rescaling
        let scaled = DetectionChain {
            aperture_diameter: 3e-3,
            incoherent_farfield_diameter: 36e-3,
            ..chain
        };
        assert_relative_eq!(aperture_fraction(&scaled), f, max_relative = 1e-12);
    }

    #[test]
    fn chain_validation() {
        let bad = DetectionChain { pmt_qe: 1.4, ..DetectionChain::default() };
        assert!(matches!(bad.validate(), Err(Error::Domain(_))));
        let bad = DetectionChain { aperture_diameter: 13e-3, ..DetectionChain::default() };
        assert!(matches!(bad.validate(), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_mean_zero_background_draws_nothing() {
        let run = simulate_counts(0.0, &DetectionChain::default(), 7).unwrap();
        assert_eq!(run.total_counts, 0);
        assert_eq!(run.pulses, 150_000_000);
    }

    #[test]
    fn counts_near_expectation() {
        // 2.1e−6 photons/pulse · 0.4 QE · 1.5e8 pulses ≈ 126 expected counts
        let run = simulate_counts(2.1e-6, &DetectionChain::default(), 42).unwrap();
        assert!((60..=200).contains(&run.total_counts), "counts = {}", run.total_counts);
    }

    #[test]
    fn determinism_same_seed() {
        let chain = DetectionChain { background_rate: 1e-7, ..DetectionChain::default() };
        let a = simulate_counts(2.1e-6, &chain, 1234).unwrap();
        let b = simulate_counts(2.1e-6, &chain, 1234).unwrap();
        assert_eq!(a, b);
        let c = simulate_counts(2.1e-6, &chain, 1235).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn subtraction_frozen_example() {
        let signal = CountRun { total_counts: 126, pulses: 150_000_000 };
        let background = CountRun { total_counts: 26, pulses: 150_000_000 };
        let sub = background_subtract(&signal, &background).unwrap();
        assert_relative_eq!(sub.mean, 6.666666666666667e-7, max_relative = 1e-12);
        assert_relative_eq!(sub.std, 152.0f64.sqrt() / 1.5e8, max_relative = 1e-12);

        // equal runs: zero mean, nonzero spread
        let even = background_subtract(&background, &background).unwrap();
        assert_eq!(even.mean, 0.0);
        assert!(even.std > 0.0);
    }

    #[test]
    fn subtraction_shape_error() {
        let signal = CountRun { total_counts: 126, pulses: 150_000_000 };
        let background = CountRun { total_counts: 26, pulses: 100_000_000 };
        assert!(matches!(
            background_subtract(&signal, &background),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn subtraction_is_linear() {
        let signal = CountRun { total_counts: 500, pulses: 1_000_000 };
        let background = CountRun { total_counts: 80, pulses: 1_000_000 };
        let sub = background_subtract(&signal, &background).unwrap();
        assert_eq!(sub.mean + background.raw_mean(), signal.raw_mean());
    }

    #[test]
    fn monte_carlo_mean_matches_analytic() {
        let chain = DetectionChain {
            rep_rate: 500e3,
            acquisition_time: 10.0,
            ..DetectionChain::default()
        };
        let mean = 2.1e-6;
        let pulses = chain.pulses() as f64;
        let expected = chain.pmt_qe * mean * pulses;
        let trials = 1000;
        let mut sum = 0.0;
        for seed in 0..trials {
            sum += simulate_counts(mean, &chain, seed).unwrap().total_counts as f64;
        }
        let sample_mean = sum / trials as f64;
        // combined standard error of the Monte-Carlo average
        let se = (expected / trials as f64).sqrt();
        assert!(
            (sample_mean - expected).abs() < 3.0 * se,
            "mean {sample_mean} vs expected {expected} (se {se})"
        );
    }

    #[test]
    fn row_seeds_are_spread_out() {
        let a = derive_row_seed(42, 0);
        let b = derive_row_seed(42, 1);
        let c = derive_row_seed(43, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_row_seed(42, 0));
    }
}
