//! Scenario runner: each figure-style sweep end-to-end — model curves,
//! optional Poisson noise, fits, and summary scalars/crossovers — plus the
//! beta calibration routine.

use std::collections::BTreeMap;
use std::fmt;

use crate::analysis::{self, FitModel, FitResult};
use crate::constants::gaussian_volume_factor;
use crate::error::{Error, Result};
use crate::measurement::{
    aperture_fraction, background_subtract, derive_row_seed, simulate_counts, DetectionChain,
};
use crate::pdc::{
    coupling_lambda, mode_number_lowgain, narrowing_ratio, peak_gain, photon_energy, sv_summary,
    CrystalParams, PumpPulse, SpectralWindow, SvFieldSummary,
};
use crate::quadrature::{gain_integrals_raw, Grid};
use crate::shg::{
    classical_shg, enhancement_ratio, eshg_from_sv, matched_classical, EnhancementMode,
    ShgCoupling, ShgResult,
};

pub const SCHEMA_PDC_SWEEP: &str = "pdc_sweep";
pub const SCHEMA_LOSS_SWEEP: &str = "loss_sweep";
pub const SCHEMA_FIXED_GAIN_SCAN: &str = "fixed_gain_scan";
pub const SCHEMA_ENHANCEMENT: &str = "enhancement";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Fig2a,
    Fig2b,
    Fig3a,
    Fig3b,
    Fig4,
    Calibrate,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Fig2a,
        Scenario::Fig2b,
        Scenario::Fig3a,
        Scenario::Fig3b,
        Scenario::Fig4,
        Scenario::Calibrate,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Fig2a => "fig2a",
            Scenario::Fig2b => "fig2b",
            Scenario::Fig3a => "fig3a",
            Scenario::Fig3b => "fig3b",
            Scenario::Fig4 => "fig4",
            Scenario::Calibrate => "calibrate",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepAxis {
    #[default]
    PumpEnergy,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        "pump_energy"
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pump_energy" => Ok(SweepAxis::PumpEnergy),
            other => Err(Error::Config(format!("unknown sweep axis '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub log_spacing: bool,
}

impl Default for SweepSpec {
    /// 1–120 μJ, logarithmic, 25 points.
    fn default() -> Self {
        SweepSpec {
            axis: SweepAxis::PumpEnergy,
            start: 1e-6,
            stop: 120e-6,
            points: 25,
            log_spacing: true,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.start.is_finite() || !self.stop.is_finite() || self.start <= 0.0 {
            return Err(Error::Config(format!(
                "sweep start {} must be finite and > 0",
                self.start
            )));
        }
        if self.stop <= self.start {
            return Err(Error::Config(format!(
                "sweep stop {} must exceed start {}",
                self.stop, self.start
            )));
        }
        if self.points < 3 {
            return Err(Error::Config(format!("sweep needs ≥ 3 points, got {}", self.points)));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                if self.log_spacing {
                    self.start * (self.stop / self.start).powf(f)
                } else {
                    self.start + (self.stop - self.start) * f
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub crystal: CrystalParams,
    pub pump: PumpPulse,
    pub window: SpectralWindow,
    pub coupling: ShgCoupling,
    pub detection: DetectionChain,
    pub sweep: SweepSpec,
    /// Fractional losses; each scans a transmission t = 1 − loss alongside
    /// the lossless curve.
    pub losses: Vec<f64>,
    pub seed: u64,
    pub noise: bool,
    pub output: Option<String>,
}

impl ExperimentConfig {
    /// Defaults for a scenario, including its conventional loss list
    /// (30%/50% for the fixed-flux scan, 60%/90% for the crossover scan).
    pub fn for_scenario(scenario: Scenario) -> Self {
        let crystal = CrystalParams::default();
        let losses = match scenario {
            Scenario::Fig3a => vec![0.3, 0.5],
            Scenario::Fig3b => vec![0.6, 0.9],
            _ => Vec::new(),
        };
        ExperimentConfig {
            scenario,
            crystal,
            pump: PumpPulse::default(),
            window: SpectralWindow::default(),
            coupling: ShgCoupling::new(crystal),
            detection: DetectionChain::default(),
            sweep: SweepSpec::default(),
            losses,
            seed: 17,
            noise: false,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.crystal.validate()?;
        self.pump.validate()?;
        self.window.validate()?;
        self.coupling.validate()?;
        self.detection.validate()?;
        self.sweep.validate()?;
        if self.coupling.crystal != self.crystal {
            return Err(Error::Config(
                "SHG coupling crystal differs from the PDC crystal".into(),
            ));
        }
        for &loss in &self.losses {
            if !loss.is_finite() || !(0.0..1.0).contains(&loss) {
                return Err(Error::Config(format!("loss {loss} outside [0, 1)")));
            }
        }
        Ok(())
    }

    /// Transmissions scanned by the loss scenarios: 1 followed by 1 − loss.
    pub fn transmissions(&self) -> Vec<f64> {
        std::iter::once(1.0).chain(self.losses.iter().map(|l| 1.0 - l)).collect()
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig::for_scenario(Scenario::Fig2a)
    }
}

/// One sweep point. The optional columns are populated only by the
/// scenarios that define them (classical comparison, noisy detection).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub pump_energy: f64,
    /// Transmission t of this row's curve; 1 on the lossless curve.
    pub loss_transmission: f64,
    pub n_pump: f64,
    pub g0: f64,
    pub n_sv: f64,
    /// Photons arriving at the SHG crystal, t·N_SV.
    pub flux_at_crystal: f64,
    pub k_m: f64,
    pub n_per_mode: f64,
    pub beam_fwhm: f64,
    pub duration_fwhm: f64,
    pub shg: ShgResult,
    pub shg_classical: Option<f64>,
    pub enhancement_coherent: Option<f64>,
    pub enhancement_total: Option<f64>,
    pub detected_mean: Option<f64>,
    pub detected_std: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct ScenarioSummary {
    pub scalars: BTreeMap<String, f64>,
    pub fits: Vec<(String, FitResult)>,
    /// Crossing locations per labeled curve; an empty list records that the
    /// search ran and found none.
    pub crossovers: Vec<(String, Vec<f64>)>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub scenario: Scenario,
    pub schema: &'static str,
    pub schema_version: u32,
    pub rows: Vec<SweepRow>,
    pub summary: ScenarioSummary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationOutcome {
    pub beta: f64,
    pub nonlinearity_scale: f64,
    pub path_efficiency: f64,
    pub achieved_crossover: f64,
}

pub fn run_scenario(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    match config.scenario {
        Scenario::Fig2a | Scenario::Fig2b => run_pdc_sweep(config),
        Scenario::Fig3a | Scenario::Fig3b => run_loss_sweep(config),
        Scenario::Fig4 => run_enhancement(config),
        Scenario::Calibrate => Err(Error::Config(
            "scenario 'calibrate' produces no sweep table; run calibrate() instead".into(),
        )),
    }
}

/// The gain stage runs on the same reduced nonlinearity the conversion
/// stage uses: `nonlinearity_scale` corrects the crystal's literature d_eff
/// once, and that one knob propagates to both Λ and σ.
fn effective_gain_crystal(cfg: &ExperimentConfig) -> CrystalParams {
    CrystalParams {
        d_eff: cfg.coupling.nonlinearity_scale * cfg.crystal.d_eff,
        ..cfg.crystal
    }
}

struct SweepContext<'a> {
    cfg: &'a ExperimentConfig,
    /// Crystal with the reduced d_eff, used for every gain-stage call.
    crystal: CrystalParams,
    grid: Grid,
    photon: f64,
    aperture: f64,
}

impl<'a> SweepContext<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Self {
        SweepContext {
            cfg,
            crystal: effective_gain_crystal(cfg),
            grid: Grid::default(),
            photon: photon_energy(cfg.crystal.lambda_pump),
            aperture: aperture_fraction(&cfg.detection),
        }
    }

    fn pdc_row(&self, energy: f64) -> Result<SweepRow> {
        self.build_row(energy, 1.0, ShgResult::ZERO)
    }

    fn loss_row(&self, energy: f64, t: f64) -> Result<SweepRow> {
        let cfg = self.cfg;
        let n_pump = energy / self.photon;
        let shg = eshg_from_sv(
            &self.crystal,
            &cfg.pump,
            &cfg.window,
            n_pump,
            t,
            &cfg.coupling,
            self.aperture,
            self.grid,
        )?;
        self.build_row(energy, t, shg)
    }

    fn build_row(&self, energy: f64, t: f64, shg: ShgResult) -> Result<SweepRow> {
        let cfg = self.cfg;
        let n_pump = energy / self.photon;
        let s = sv_summary(&self.crystal, &cfg.pump, &cfg.window, n_pump, self.grid)?;
        Ok(SweepRow {
            pump_energy: energy,
            loss_transmission: t,
            n_pump,
            g0: s.g0,
            n_sv: s.n_sv_per_pulse,
            flux_at_crystal: t * s.n_sv_per_pulse,
            k_m: s.k_m,
            n_per_mode: s.n_per_mode,
            beam_fwhm: s.beam_fwhm,
            duration_fwhm: s.duration_fwhm,
            shg,
            shg_classical: None,
            enhancement_coherent: None,
            enhancement_total: None,
            detected_mean: None,
            detected_std: None,
        })
    }
}

fn run_pdc_sweep(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let ctx = SweepContext::new(cfg);
    let rows = cfg.sweep.values().iter().map(|&e| ctx.pdc_row(e)).collect::<Result<Vec<_>>>()?;
    let mut summary = ScenarioSummary::default();
    let lambda = coupling_lambda(&ctx.crystal, &cfg.pump)?;
    let k0 = mode_number_lowgain(&cfg.pump, &cfg.window);
    match cfg.scenario {
        Scenario::Fig2a => {
            // finite-difference probe at g0 = 1e-3 against the analytic
            // low-gain slope K_m(0)·Λ².
            let probe = (1e-3 / lambda).powi(2);
            let s = sv_summary(&ctx.crystal, &cfg.pump, &cfg.window, probe, ctx.grid)?;
            summary.scalars.insert("coupling_lambda".into(), lambda);
            summary.scalars.insert("mode_number_lowgain".into(), k0);
            summary.scalars.insert("lowgain_slope_analytic".into(), k0 * lambda * lambda);
            summary
                .scalars
                .insert("lowgain_slope_model".into(), s.n_sv_per_pulse / probe);
        }
        _ => {
            let first = rows.first().expect("validated sweep has ≥ 3 points");
            let last = rows.last().expect("validated sweep has ≥ 3 points");
            summary.scalars.insert("k_m_first".into(), first.k_m);
            summary.scalars.insert("k_m_last".into(), last.k_m);
            summary.scalars.insert("beam_fwhm_last".into(), last.beam_fwhm);
            summary.scalars.insert("duration_fwhm_last".into(), last.duration_fwhm);
            summary
                .scalars
                .insert("narrowing_ratio_last".into(), last.beam_fwhm / cfg.pump.beam_fwhm);
        }
    }
    Ok(RunOutput {
        scenario: cfg.scenario,
        schema: SCHEMA_PDC_SWEEP,
        schema_version: SCHEMA_VERSION,
        rows,
        summary,
    })
}

/// Counting floor for fit weights: a run that happened to record zero
/// counts still carries one-count resolution, not infinite precision.
fn sigma_floor(detection: &DetectionChain) -> f64 {
    1.0 / (detection.pmt_qe * detection.pulses() as f64)
}

fn run_loss_sweep(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let ctx = SweepContext::new(cfg);
    let energies = cfg.sweep.values();
    let ts = cfg.transmissions();
    let mut rows = Vec::with_capacity(ts.len() * energies.len());
    let mut stream = 0u64;
    for &t in &ts {
        for &e in &energies {
            let mut row = ctx.loss_row(e, t)?;
            if cfg.noise {
                let signal = simulate_counts(
                    row.shg.total_detectable_coherent,
                    &cfg.detection,
                    derive_row_seed(cfg.seed, 2 * stream),
                )?;
                let background =
                    simulate_counts(0.0, &cfg.detection, derive_row_seed(cfg.seed, 2 * stream + 1))?;
                let photons =
                    background_subtract(&signal, &background)?.to_photons(cfg.detection.pmt_qe);
                row.detected_mean = Some(photons.mean);
                row.detected_std = Some(photons.std);
            }
            stream += 1;
            rows.push(row);
        }
    }

    let model = match cfg.scenario {
        Scenario::Fig3a => FitModel::Linear,
        _ => FitModel::LinearPlusQuadratic,
    };
    let prefix = match model {
        FitModel::Linear => "linear",
        _ => "lin_quad",
    };
    let mut summary = ScenarioSummary::default();
    let n = energies.len();
    let floor = sigma_floor(&cfg.detection);
    let mut slopes = Vec::with_capacity(ts.len());
    for (ci, &t) in ts.iter().enumerate() {
        let curve = &rows[ci * n..(ci + 1) * n];
        let xs: Vec<f64> = curve.iter().map(|r| r.flux_at_crystal).collect();
        let (ys, sigmas): (Vec<f64>, Option<Vec<f64>>) = if cfg.noise {
            (
                curve.iter().map(|r| r.detected_mean.unwrap_or(0.0)).collect(),
                Some(
                    curve
                        .iter()
                        .map(|r| match r.detected_std {
                            Some(s) if s > 0.0 => s,
                            _ => floor,
                        })
                        .collect(),
                ),
            )
        } else {
            (curve.iter().map(|r| r.shg.total_detectable_coherent).collect(), None)
        };
        let fit = analysis::fit(&xs, &ys, sigmas.as_deref(), model)?;
        slopes.push(fit.coefficients[0]);
        summary.fits.push((format!("{prefix}_t{t:.2}"), fit));
    }

    if cfg.scenario == Scenario::Fig3a {
        let (eta, eta_sigma) = analysis::efficiency_from_fit(&summary.fits[0].1)?;
        summary.scalars.insert("efficiency".into(), eta);
        summary.scalars.insert("efficiency_sigma".into(), eta_sigma);
        for (i, &t) in ts.iter().enumerate().skip(1) {
            summary
                .scalars
                .insert(format!("slope_ratio_t{t:.2}"), slopes[i] / slopes[0]);
        }
        add_purple_points(&ctx, *energies.last().expect("≥ 3 points"), &ts, &mut summary)?;
    } else {
        for &t in ts.iter().skip(1) {
            match loss_crossover(cfg, t) {
                Ok((flux, n_m)) => {
                    summary.scalars.insert(format!("crossover_flux_t{t:.2}"), flux);
                    summary.scalars.insert(format!("crossover_n_m_t{t:.2}"), n_m);
                    summary
                        .crossovers
                        .push((format!("detectable_vs_noloss_t{t:.2}"), vec![flux]));
                }
                Err(Error::NotFound(_)) => {
                    summary.crossovers.push((format!("detectable_vs_noloss_t{t:.2}"), vec![]));
                }
                Err(e) => return Err(e),
            }
        }
    }

    Ok(RunOutput {
        scenario: cfg.scenario,
        schema: SCHEMA_LOSS_SWEEP,
        schema_version: SCHEMA_VERSION,
        rows,
        summary,
    })
}

/// The fixed-gain extraction: hold the pump at `energy`, dial the
/// transmission, and record (t·N_SV, output) — the points collapse onto a
/// pure quadratic because the coherent output scales as t² while the
/// delivered flux scales as t.
fn add_purple_points(
    ctx: &SweepContext,
    energy: f64,
    ts: &[f64],
    summary: &mut ScenarioSummary,
) -> Result<()> {
    let mut xs = Vec::with_capacity(ts.len());
    let mut ys = Vec::with_capacity(ts.len());
    for &t in ts {
        let row = ctx.loss_row(energy, t)?;
        summary
            .scalars
            .insert(format!("purple_flux_t{t:.2}"), row.flux_at_crystal);
        summary
            .scalars
            .insert(format!("purple_shg_t{t:.2}"), row.shg.total_detectable_coherent);
        xs.push(row.flux_at_crystal);
        ys.push(row.shg.total_detectable_coherent);
    }
    if xs.len() < 2 {
        // no losses configured: the extraction degenerates to one point,
        // which pins no quadratic
        return Ok(());
    }
    let fit = analysis::fit(&xs, &ys, None, FitModel::PureQuadratic)?;
    let ss_res: f64 = fit.residuals.iter().map(|r| r * r).sum();
    let ss_tot: f64 = ys.iter().map(|y| y * y).sum();
    summary.scalars.insert("purple_r_squared".into(), 1.0 - ss_res / ss_tot);
    summary.fits.push(("purple_quadratic".into(), fit));
    Ok(())
}

/// Solver grid for the loss-crossover search. The crossing condition is a
/// ratio of the same quadratures on both curves, so grid error cancels;
/// 65 points match the refined result to 8 digits at a fraction of the cost.
const CROSSOVER_GRID: usize = 65;
const BISECT_ITERS: usize = 60;

fn bisect_root<F>(f: F, mut lo: f64, mut hi: f64, f_lo: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut sign_lo = f_lo > 0.0;
    for _ in 0..BISECT_ITERS {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == sign_lo {
            lo = mid;
            sign_lo = fm > 0.0;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Where the lossy detectable-output curve overtakes the lossless one when
/// both are read against the flux arriving at the crystal. Parameterized by
/// the lossless gain g₀; the lossy partner point carries gain g_t with
/// t·N_SV(g_t) = N_SV(g₀). Returns (crossover flux, lossless ⟨n⟩_m there).
fn loss_crossover(cfg: &ExperimentConfig, t: f64) -> Result<(f64, f64)> {
    let grid = Grid::new(CROSSOVER_GRID)?;
    let lambda = coupling_lambda(&effective_gain_crystal(cfg), &cfg.pump)?;
    let photon = photon_energy(cfg.crystal.lambda_pump);
    let g_min = peak_gain(lambda, cfg.sweep.start / photon);
    let g_max = peak_gain(lambda, cfg.sweep.stop / photon);
    let two_af = 2.0 * aperture_fraction(&cfg.detection);
    let beta = cfg.coupling.beta;
    let j2 = |g: f64| gain_integrals_raw(g, grid).map(|i| i.j2);
    // detectable output ∝ t²·(J2 + (β + 2·af)·J4)
    let detectable = |g: f64| gain_integrals_raw(g, grid).map(|i| i.j2 + (beta + two_af) * i.j4);

    let j2_max = j2(g_max)?;
    let j2_min = j2(g_min)?;
    // largest lossless gain whose flux-matched lossy partner stays ≤ g_max
    let cap = t * j2_max;
    if j2_min >= cap {
        return Err(Error::NotFound(format!(
            "sweep range cannot flux-match t = {t}: J2({g_min:.3}) ≥ t·J2({g_max:.3})"
        )));
    }
    let g_hi = bisect_root(|g| Ok(j2(g)? - cap), g_min, g_max, j2_min - cap)?;

    let partner = |g0: f64| -> Result<f64> {
        let target = j2(g0)? / t;
        bisect_root(|g| Ok(j2(g)? - target), g0, g_max, -target)
    };
    let diff = |g0: f64| -> Result<f64> { Ok(t * t * detectable(partner(g0)?)? - detectable(g0)?) };

    let d_lo = diff(g_min)?;
    let d_hi = diff(g_hi)?;
    if d_lo.signum() == d_hi.signum() {
        return Err(Error::NotFound(format!(
            "lossy curve (t = {t}) never overtakes the lossless one inside the sweep range"
        )));
    }
    let g_cross = bisect_root(diff, g_min, g_hi, d_lo)?;
    let k0 = mode_number_lowgain(&cfg.pump, &cfg.window);
    let flux = k0 * j2(g_cross)? / gaussian_volume_factor();
    Ok((flux, g_cross.sinh().powi(2)))
}

/// Coherent-only enhancement at per-mode population ⟨n⟩_m, reduced to
/// quadratures: matching the classical pulse to the SV profile cancels the
/// mode density and pump volume, leaving
/// 2^{3/2}·(π/(4 ln 2))^{3/2}·w̃³·(J2 + β·J4)/J2².
/// Exactly the row pipeline's ratio (asserted in the scenario tests).
pub fn coherent_enhancement_reduced(n_per_mode: f64, beta: f64, grid: Grid) -> Result<f64> {
    if !n_per_mode.is_finite() || n_per_mode <= 0.0 {
        return Err(Error::Domain(format!("n_per_mode = {n_per_mode} must be > 0")));
    }
    let g0 = n_per_mode.sqrt().asinh();
    let ints = gain_integrals_raw(g0, grid)?;
    let w = narrowing_ratio(g0)?;
    Ok(8.0_f64.sqrt() * gaussian_volume_factor() * w.powi(3) * (ints.j2 + beta * ints.j4)
        / (ints.j2 * ints.j2))
}

fn run_enhancement(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let ctx = SweepContext::new(cfg);
    let mut rows = Vec::with_capacity(cfg.sweep.points);
    for &e in &cfg.sweep.values() {
        let mut row = ctx.loss_row(e, 1.0)?;
        let summary = SvFieldSummary {
            n_sv_per_pulse: row.n_sv,
            k_m: row.k_m,
            n_per_mode: row.n_per_mode,
            beam_fwhm: row.beam_fwhm,
            duration_fwhm: row.duration_fwhm,
            g0: row.g0,
        };
        let classical = classical_shg(&matched_classical(&summary, &cfg.crystal), &cfg.coupling)?;
        row.shg_classical = Some(classical.total());
        row.enhancement_coherent =
            Some(enhancement_ratio(&row.shg, &classical, EnhancementMode::CoherentOnly)?);
        row.enhancement_total =
            Some(enhancement_ratio(&row.shg, &classical, EnhancementMode::Total)?);
        rows.push(row);
    }

    let mut summary = ScenarioSummary::default();
    let xs: Vec<f64> = rows.iter().map(|r| r.n_per_mode).collect();
    let coherent: Vec<f64> = rows.iter().map(|r| r.enhancement_coherent.unwrap()).collect();
    let total: Vec<f64> = rows.iter().map(|r| r.enhancement_total.unwrap()).collect();

    let beta = cfg.coupling.beta;
    let grid = ctx.grid;
    match analysis::find_crossover_refined(&xs, &coherent, |x| {
        coherent_enhancement_reduced(x, beta, grid)
    }) {
        Ok(crossings) => {
            if let Some(&x) = crossings.iter().find(|&&x| x > 1.0) {
                summary.scalars.insert("crossover_coherent_n_m".into(), x);
            }
            summary.crossovers.push(("coherent".into(), crossings));
        }
        Err(Error::NotFound(_)) => summary.crossovers.push(("coherent".into(), vec![])),
        Err(e) => return Err(e),
    }
    match analysis::find_crossover(&xs, &total) {
        Ok(crossings) => summary.crossovers.push(("total".into(), crossings)),
        Err(Error::NotFound(_)) => summary.crossovers.push(("total".into(), vec![])),
        Err(e) => return Err(e),
    }
    let (i_min, r_min) = total
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("validated sweep has ≥ 3 points");
    summary.scalars.insert("total_ratio_min".into(), *r_min);
    summary.scalars.insert("total_ratio_min_n_m".into(), xs[i_min]);

    Ok(RunOutput {
        scenario: cfg.scenario,
        schema: SCHEMA_ENHANCEMENT,
        schema_version: SCHEMA_VERSION,
        rows,
        summary,
    })
}

/// Fixed-gain loss scan as its own table: pump held at the sweep maximum,
/// transmission dialed through 1 and the configured losses.
pub fn fixed_gain_scan(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    if cfg.losses.is_empty() {
        return Err(Error::Config("fixed-gain scan needs a non-empty loss list".into()));
    }
    let ctx = SweepContext::new(cfg);
    let energy = cfg.sweep.stop;
    let ts = cfg.transmissions();
    let rows =
        ts.iter().map(|&t| ctx.loss_row(energy, t)).collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.flux_at_crystal).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.shg.total_detectable_coherent).collect();
    let mut summary = ScenarioSummary::default();
    let fit = analysis::fit(&xs, &ys, None, FitModel::PureQuadratic)?;
    let ss_res: f64 = fit.residuals.iter().map(|r| r * r).sum();
    let ss_tot: f64 = ys.iter().map(|y| y * y).sum();
    summary.scalars.insert("r_squared".into(), 1.0 - ss_res / ss_tot);
    summary.fits.push(("quadratic".into(), fit));
    Ok(RunOutput {
        scenario: cfg.scenario,
        schema: SCHEMA_FIXED_GAIN_SCAN,
        schema_version: SCHEMA_VERSION,
        rows,
        summary,
    })
}

const CALIBRATION_TARGET: f64 = 9.3;
const CALIBRATION_TOL: f64 = 0.05;

/// Fixes nonlinearity_scale = 0.92 and path_efficiency = 0.90 outright and
/// solves for the beta that puts the coherent-only enhancement crossover at
/// ⟨n⟩_m = 9.3 ± 0.05. Fails if that would need beta outside (0, 1].
pub fn calibrate(cfg: &ExperimentConfig) -> Result<CalibrationOutcome> {
    cfg.validate()?;
    let grid = Grid::default();
    let crossover = |beta: f64| -> Result<f64> {
        // the reduced ratio is strictly decreasing in g over this bracket
        let (lo, hi) = (0.2, 6.0);
        let f = |g: f64| {
            let ints = gain_integrals_raw(g, grid)?;
            let w = narrowing_ratio(g)?;
            Ok(8.0_f64.sqrt() * gaussian_volume_factor() * w.powi(3)
                * (ints.j2 + beta * ints.j4)
                / (ints.j2 * ints.j2)
                - 1.0)
        };
        let g = bisect_root(f, lo, hi, f(lo)?)?;
        Ok(g.sinh().powi(2))
    };

    let at_unity = crossover(1.0)?;
    if (at_unity - CALIBRATION_TARGET).abs() <= CALIBRATION_TOL {
        return Ok(CalibrationOutcome {
            beta: 1.0,
            nonlinearity_scale: 0.92,
            path_efficiency: 0.90,
            achieved_crossover: at_unity,
        });
    }
    if at_unity < CALIBRATION_TARGET - CALIBRATION_TOL {
        return Err(Error::Calibration(format!(
            "coherent-only crossover reaches only ⟨n⟩_m = {at_unity:.4} at beta = 1; \
             moving it to {CALIBRATION_TARGET} needs beta > 1, outside (0, 1]"
        )));
    }
    // crossover grows with beta, so overshoot at beta = 1 bisects downward
    let beta = bisect_root(
        |b| Ok(crossover(b)? - CALIBRATION_TARGET),
        1e-6,
        1.0,
        crossover(1e-6)? - CALIBRATION_TARGET,
    )?;
    let achieved = crossover(beta)?;
    if (achieved - CALIBRATION_TARGET).abs() > CALIBRATION_TOL {
        return Err(Error::Calibration(format!(
            "beta bisection stalled at crossover ⟨n⟩_m = {achieved:.4}"
        )));
    }
    Ok(CalibrationOutcome {
        beta,
        nonlinearity_scale: 0.92,
        path_efficiency: 0.90,
        achieved_crossover: achieved,
    })
}
