//! CSV emission and run metadata.
//!
//! Each run writes a UTF-8, comma-separated table whose first line is the
//! schema header, one row per sweep point in sweep order, floats in
//! scientific notation with nine significant digits. A sibling `.meta`
//! file records the schema name and version, the seed, a SHA-256 of the
//! canonical config, and the run's summary scalars, fits, and crossings —
//! enough to reproduce or audit the table. Headers are versioned: any
//! column change must bump the schema version, and the golden-file tests
//! pin both.

use crate::config::serialize_config;
use eshg_core::{Error, ExperimentConfig, Result, RunOutput, SweepRow};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub struct Schema {
    pub name: &'static str,
    pub version: u32,
    pub header: &'static str,
}

pub const PDC_SWEEP: Schema = Schema {
    name: "pdc_sweep",
    version: 1,
    header: "pump_energy_j,n_pump,g0,n_sv,k_m,n_per_mode,beam_fwhm_m,duration_fwhm_m",
};

pub const LOSS_SWEEP: Schema = Schema {
    name: "loss_sweep",
    version: 1,
    header: "pump_energy_j,transmission,n_pump,g0,n_sv,flux_at_crystal,coh_linear,\
             coh_quadratic,incoherent_in_aperture,total_detectable_coherent,\
             detected_mean,detected_std",
};

pub const FIXED_GAIN_SCAN: Schema = Schema {
    name: "fixed_gain_scan",
    version: 1,
    header: "transmission,flux_at_crystal,total_detectable_coherent",
};

pub const ENHANCEMENT: Schema = Schema {
    name: "enhancement",
    version: 1,
    header: "pump_energy_j,n_pump,g0,n_sv,n_per_mode,beam_fwhm_m,duration_fwhm_m,\
             shg_sv,shg_classical,enhancement_coherent,enhancement_total",
};

pub const ALL_SCHEMAS: [&Schema; 4] = [&PDC_SWEEP, &LOSS_SWEEP, &FIXED_GAIN_SCAN, &ENHANCEMENT];

pub fn schema_for(out: &RunOutput) -> Result<&'static Schema> {
    let schema = ALL_SCHEMAS
        .iter()
        .copied()
        .find(|s| s.name == out.schema)
        .ok_or_else(|| Error::Config(format!("no emitter for schema '{}'", out.schema)))?;
    if schema.version != out.schema_version {
        return Err(Error::Config(format!(
            "schema '{}' is v{} but the emitter knows v{}; update the header and bump together",
            out.schema, out.schema_version, schema.version
        )));
    }
    Ok(schema)
}

fn sci(v: f64) -> String {
    format!("{v:.8e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(sci).unwrap_or_default()
}

fn push_row(text: &mut String, schema: &Schema, r: &SweepRow) {
    let cells: Vec<String> = match schema.name {
        "pdc_sweep" => vec![
            sci(r.pump_energy),
            sci(r.n_pump),
            sci(r.g0),
            sci(r.n_sv),
            sci(r.k_m),
            sci(r.n_per_mode),
            sci(r.beam_fwhm),
            sci(r.duration_fwhm),
        ],
        "loss_sweep" => vec![
            sci(r.pump_energy),
            sci(r.loss_transmission),
            sci(r.n_pump),
            sci(r.g0),
            sci(r.n_sv),
            sci(r.flux_at_crystal),
            sci(r.shg.coh_linear),
            sci(r.shg.coh_quadratic),
            sci(r.shg.incoherent_in_aperture),
            sci(r.shg.total_detectable_coherent),
            opt(r.detected_mean),
            opt(r.detected_std),
        ],
        "fixed_gain_scan" => vec![
            sci(r.loss_transmission),
            sci(r.flux_at_crystal),
            sci(r.shg.total_detectable_coherent),
        ],
        "enhancement" => vec![
            sci(r.pump_energy),
            sci(r.n_pump),
            sci(r.g0),
            sci(r.n_sv),
            sci(r.n_per_mode),
            sci(r.beam_fwhm),
            sci(r.duration_fwhm),
            sci(r.shg.total_detectable_coherent),
            opt(r.shg_classical),
            opt(r.enhancement_coherent),
            opt(r.enhancement_total),
        ],
        other => unreachable!("schema_for admits only known schemas, got '{other}'"),
    };
    text.push_str(&cells.join(","));
    text.push('\n');
}

/// Renders the full CSV text: header line, then one line per row.
pub fn csv_text(out: &RunOutput) -> Result<String> {
    let schema = schema_for(out)?;
    let mut text = String::with_capacity(64 * (out.rows.len() + 1));
    text.push_str(schema.header);
    text.push('\n');
    for row in &out.rows {
        push_row(&mut text, schema, row);
    }
    Ok(text)
}

pub fn config_sha256(cfg: &ExperimentConfig) -> String {
    let digest = Sha256::digest(serialize_config(cfg).as_bytes());
    let mut hex = String::with_capacity(64);
    for byte in digest {
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}

/// Renders the `.meta` sidecar: provenance first, then the run summary.
pub fn metadata_text(out: &RunOutput, cfg: &ExperimentConfig) -> Result<String> {
    let schema = schema_for(out)?;
    let mut s = String::new();
    let _ = writeln!(s, "schema = {}", schema.name);
    let _ = writeln!(s, "schema_version = {}", schema.version);
    let _ = writeln!(s, "scenario = {}", out.scenario.name());
    let _ = writeln!(s, "rows = {}", out.rows.len());
    let _ = writeln!(s, "seed = {}", cfg.seed);
    let _ = writeln!(s, "noise = {}", cfg.noise);
    let _ = writeln!(s, "config_sha256 = {}", config_sha256(cfg));
    for (key, value) in &out.summary.scalars {
        let _ = writeln!(s, "summary.{key} = {}", sci(*value));
    }
    for (name, fit) in &out.summary.fits {
        let coeffs: Vec<String> = fit
            .coefficients
            .iter()
            .zip(&fit.uncertainties)
            .map(|(c, u)| format!("{} ± {}", sci(*c), sci(*u)))
            .collect();
        let _ = writeln!(
            s,
            "fit.{name} = {} (reduced chi² {:.3})",
            coeffs.join(", "),
            fit.reduced_chi_square
        );
    }
    for (label, crossings) in &out.summary.crossovers {
        let xs: Vec<String> = crossings.iter().map(|x| sci(*x)).collect();
        let _ = writeln!(s, "crossing.{label} = [{}]", xs.join(", "));
    }
    Ok(s)
}

pub fn meta_path(csv: &Path) -> PathBuf {
    let mut name = csv.file_name().unwrap_or_default().to_os_string();
    name.push(".meta");
    csv.with_file_name(name)
}

/// Writes `path` and its `.meta` sibling.
pub fn write_outputs(path: &Path, out: &RunOutput, cfg: &ExperimentConfig) -> Result<()> {
    let wrap = |e: std::io::Error, p: &Path| {
        Error::Config(format!("cannot write {}: {e}", p.display()))
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| wrap(e, dir))?;
    }
    fs::write(path, csv_text(out)?).map_err(|e| wrap(e, path))?;
    let meta = meta_path(path);
    fs::write(&meta, metadata_text(out, cfg)?).map_err(|e| wrap(e, &meta))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use eshg_core::{run_scenario, Scenario};

    #[test]
    fn csv_has_header_plus_one_line_per_row() {
        let mut cfg = ExperimentConfig::for_scenario(Scenario::Fig2a);
        cfg.sweep.points = 3;
        let out = run_scenario(&cfg).unwrap();
        let text = csv_text(&out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], PDC_SWEEP.header);
        for line in &lines[1..] {
            assert_eq!(line.matches(',').count(), PDC_SWEEP.header.matches(',').count());
        }
        // nine significant digits, scientific
        assert!(lines[1].starts_with("1.00000000e-6,"), "{}", lines[1]);
    }

    #[test]
    fn headers_match_their_column_counts_across_schemas() {
        for schema in ALL_SCHEMAS {
            assert!(!schema.header.contains(' '), "{} header has spaces", schema.name);
            assert_eq!(schema.version, 1);
        }
    }

    #[test]
    fn metadata_names_schema_seed_and_config_hash() {
        let mut cfg = ExperimentConfig::for_scenario(Scenario::Fig2a);
        cfg.sweep.points = 3;
        cfg.seed = 41;
        let out = run_scenario(&cfg).unwrap();
        let meta = metadata_text(&out, &cfg).unwrap();
        assert!(meta.contains("schema = pdc_sweep"));
        assert!(meta.contains("schema_version = 1"));
        assert!(meta.contains("seed = 41"));
        assert!(meta.contains("rows = 3"));
        let hash_line =
            meta.lines().find(|l| l.starts_with("config_sha256 = ")).expect("hash line");
        assert_eq!(hash_line.len(), "config_sha256 = ".len() + 64);
        assert!(meta.contains("summary.coupling_lambda = "));
    }

    #[test]
    fn detected_columns_are_empty_without_noise_and_filled_with_it() {
        let mut cfg = ExperimentConfig::for_scenario(Scenario::Fig3a);
        cfg.sweep.points = 3;
        cfg.losses = vec![0.3];
        let quiet = csv_text(&run_scenario(&cfg).unwrap()).unwrap();
        assert!(quiet.lines().nth(1).unwrap().ends_with(",,"), "{quiet}");
        cfg.noise = true;
        let noisy = csv_text(&run_scenario(&cfg).unwrap()).unwrap();
        assert!(!noisy.lines().nth(1).unwrap().ends_with(",,"), "{noisy}");
    }

    #[test]
    fn meta_path_appends_the_suffix() {
        assert_eq!(meta_path(Path::new("runs/a.csv")), Path::new("runs/a.csv.meta"));
    }
}
