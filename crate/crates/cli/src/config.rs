//! Sectioned `key = value` config files with unit suffixes.
//!
//! Six sections are recognized: `[crystal]`, `[pump]`, `[window]`,
//! `[coupling]`, `[detection]`, `[sweep]`. Every section and key is
//! optional; omitted ones fall back to the scenario defaults, so an empty
//! file is a valid config. Values may carry a unit suffix of the key's
//! dimension (`2 mm`, `120uJ`, `185 fs`, `1.79 pm/V`, `300 /mm`); bare
//! numbers are SI. Unknown sections or keys, malformed values, and
//! out-of-range settings are errors that name the offending line and key.

use eshg_core::{Error, ExperimentConfig, Result, Scenario, SweepAxis};
use std::collections::BTreeMap;
use std::fmt::Write as _;

const SECTIONS: &[(&str, &[&str])] = &[
    ("crystal", &["length", "d_eff", "n_pump", "n_sv", "lambda_pump", "lambda_sv"]),
    ("pump", &["pulse_energy", "beam_fwhm", "duration_fwhm", "rep_rate"]),
    ("window", &["temporal_bandwidth", "angular_bandwidth", "ent_duration", "ent_size"]),
    ("coupling", &["beta", "nonlinearity_scale", "path_efficiency"]),
    (
        "detection",
        &[
            "pmt_qe",
            "aperture_diameter",
            "farfield_diameter",
            "background_rate",
            "rep_rate",
            "acquisition_time",
        ],
    ),
    (
        "sweep",
        &[
            "scenario", "axis", "start", "stop", "points", "spacing", "losses", "seed",
            "noise", "output",
        ],
    ),
];

struct Dimension {
    name: &'static str,
    units: &'static [(&'static str, f64)],
}

const LENGTH: Dimension = Dimension {
    name: "length",
    units: &[("m", 1.0), ("mm", 1e-3), ("um", 1e-6), ("nm", 1e-9), ("pm", 1e-12)],
};
const TIME: Dimension = Dimension {
    name: "time",
    units: &[("s", 1.0), ("ms", 1e-3), ("us", 1e-6), ("ns", 1e-9), ("ps", 1e-12), ("fs", 1e-15)],
};
const ENERGY: Dimension = Dimension {
    name: "energy",
    units: &[("J", 1.0), ("mJ", 1e-3), ("uJ", 1e-6), ("nJ", 1e-9), ("pJ", 1e-12)],
};
const FREQUENCY: Dimension = Dimension {
    name: "frequency",
    units: &[("Hz", 1.0), ("kHz", 1e3), ("MHz", 1e6), ("GHz", 1e9), ("THz", 1e12)],
};
const INVERSE_LENGTH: Dimension = Dimension {
    name: "inverse length",
    units: &[("1/m", 1.0), ("1/mm", 1e3), ("1/um", 1e6), ("/m", 1.0), ("/mm", 1e3), ("/um", 1e6)],
};
const NONLINEARITY: Dimension = Dimension {
    name: "nonlinearity",
    units: &[("pm/V", 1e-12), ("m/V", 1.0)],
};
const BARE: Dimension = Dimension { name: "dimensionless", units: &[] };

struct RawEntry {
    value: String,
    line: usize,
}

/// `(section, key)` → value; line 0 marks a command-line override.
type RawMap = BTreeMap<(String, String), RawEntry>;

fn place(line: usize) -> String {
    if line == 0 { "override".into() } else { format!("line {line}") }
}

fn section_keys(name: &str) -> Option<&'static [&'static str]> {
    SECTIONS.iter().find(|(s, _)| *s == name).map(|(_, keys)| *keys)
}

/// Cuts a `#` comment off a line; the hash must start the line or follow
/// whitespace, so paths like `runs/a#1.csv` survive.
fn strip_comment(line: &str) -> &str {
    let mut prev_ws = true;
    for (i, c) in line.char_indices() {
        if c == '#' && prev_ws {
            return &line[..i];
        }
        prev_ws = c.is_whitespace();
    }
    line
}

fn raw_map(text: &str) -> Result<RawMap> {
    let mut map = RawMap::new();
    let mut section: Option<&'static str> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = strip_comment(raw).trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| Error::Config(format!("line {line}: expected '[section]'")))?
                .trim();
            let (canon, _) = SECTIONS
                .iter()
                .find(|(s, _)| *s == name)
                .ok_or_else(|| Error::Config(format!("line {line}: unknown section '[{name}]'")))?;
            section = Some(canon);
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {line}: expected 'key = value', got '{body}'"))
        })?;
        let (key, value) = (key.trim(), value.trim());
        let sec = section.ok_or_else(|| {
            Error::Config(format!("line {line}: key '{key}' appears before any [section]"))
        })?;
        if !section_keys(sec).unwrap_or(&[]).contains(&key) {
            return Err(Error::Config(format!("line {line}: unknown key '{key}' in [{sec}]")));
        }
        let slot = (sec.to_string(), key.to_string());
        if let Some(prev) = map.get(&slot) {
            return Err(Error::Config(format!(
                "line {line}: duplicate key {sec}.{key} (already set at line {})",
                prev.line
            )));
        }
        map.insert(slot, RawEntry { value: value.to_string(), line });
    }
    Ok(map)
}

/// Folds `--set section.key=value` arguments into the raw map, replacing
/// any file-supplied value. The key must exist in the schema.
fn apply_overrides(map: &mut RawMap, overrides: &[String]) -> Result<()> {
    for spec in overrides {
        let (path, value) = spec.split_once('=').ok_or_else(|| {
            Error::Config(format!("override '{spec}': expected section.key=value"))
        })?;
        let (sec, key) = path.trim().split_once('.').ok_or_else(|| {
            Error::Config(format!("override '{spec}': expected section.key=value"))
        })?;
        let (sec, key) = (sec.trim(), key.trim());
        let keys = section_keys(sec)
            .ok_or_else(|| Error::Config(format!("override '{spec}': unknown section '{sec}'")))?;
        if !keys.contains(&key) {
            return Err(Error::Config(format!(
                "override '{spec}': unknown key '{key}' in [{sec}]"
            )));
        }
        map.insert(
            (sec.to_string(), key.to_string()),
            RawEntry { value: value.trim().to_string(), line: 0 },
        );
    }
    Ok(())
}

/// Parses a number with an optional unit suffix of the given dimension,
/// returning the SI value. Errors carry no location; the caller adds it.
fn quantity(value: &str, dim: &Dimension) -> std::result::Result<f64, String> {
    let finite = |v: f64| {
        if v.is_finite() { Ok(v) } else { Err(format!("= {value} is not finite")) }
    };
    if let Ok(v) = value.parse::<f64>() {
        return finite(v);
    }
    if let Some((num, unit)) = value.rsplit_once(char::is_whitespace) {
        if let Some((_, scale)) = dim.units.iter().find(|(u, _)| *u == unit) {
            if let Ok(v) = num.trim().parse::<f64>() {
                return finite(v * scale);
            }
        }
    }
    // attached suffix, e.g. "2mm": longest unit first so "mm" wins over "m"
    let mut units: Vec<(&str, f64)> = dim.units.to_vec();
    units.sort_by_key(|(u, _)| std::cmp::Reverse(u.len()));
    for (u, scale) in units {
        if let Some(prefix) = value.strip_suffix(u) {
            if let Ok(v) = prefix.trim_end().parse::<f64>() {
                return finite(v * scale);
            }
        }
    }
    if dim.units.is_empty() {
        Err(format!("= '{value}' is not a plain number ({} key, no unit suffix)", dim.name))
    } else {
        let names: Vec<&str> = dim.units.iter().map(|(u, _)| *u).collect();
        Err(format!("= '{value}' is not a number with a {} unit ({})", dim.name, names.join(", ")))
    }
}

fn pos(v: f64) -> std::result::Result<f64, String> {
    if v > 0.0 { Ok(v) } else { Err(format!("= {v} must be > 0")) }
}

fn nonneg(v: f64) -> std::result::Result<f64, String> {
    if v >= 0.0 { Ok(v) } else { Err(format!("= {v} must be ≥ 0")) }
}

fn unit_closed(v: f64) -> std::result::Result<f64, String> {
    if (0.0..=1.0).contains(&v) { Ok(v) } else { Err(format!("= {v} outside [0, 1]")) }
}

fn unit_half_open_low(v: f64) -> std::result::Result<f64, String> {
    if v > 0.0 && v <= 1.0 { Ok(v) } else { Err(format!("= {v} outside (0, 1]")) }
}

fn parse_bool(value: &str) -> std::result::Result<bool, String> {
    match value {
        "true" | "on" | "1" => Ok(true),
        "false" | "off" | "0" => Ok(false),
        other => Err(format!("= '{other}' is not a boolean (true/false/on/off/1/0)")),
    }
}

fn parse_losses(value: &str) -> std::result::Result<Vec<f64>, String> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|tok| {
            let v = tok
                .trim()
                .parse::<f64>()
                .map_err(|_| format!("entry '{}' is not a number", tok.trim()))?;
            if (0.0..1.0).contains(&v) {
                Ok(v)
            } else {
                Err(format!("entry {v} outside [0, 1)"))
            }
        })
        .collect()
}

fn set_value(
    cfg: &mut ExperimentConfig,
    sec: &str,
    key: &str,
    value: &str,
) -> std::result::Result<(), String> {
    match (sec, key) {
        ("crystal", "length") => cfg.crystal.length = pos(quantity(value, &LENGTH)?)?,
        ("crystal", "d_eff") => cfg.crystal.d_eff = pos(quantity(value, &NONLINEARITY)?)?,
        ("crystal", "n_pump") => cfg.crystal.n_pump = pos(quantity(value, &BARE)?)?,
        ("crystal", "n_sv") => cfg.crystal.n_sv = pos(quantity(value, &BARE)?)?,
        ("crystal", "lambda_pump") => cfg.crystal.lambda_pump = pos(quantity(value, &LENGTH)?)?,
        ("crystal", "lambda_sv") => cfg.crystal.lambda_sv = pos(quantity(value, &LENGTH)?)?,
        ("pump", "pulse_energy") => cfg.pump.pulse_energy = pos(quantity(value, &ENERGY)?)?,
        ("pump", "beam_fwhm") => cfg.pump.beam_fwhm = pos(quantity(value, &LENGTH)?)?,
        ("pump", "duration_fwhm") => cfg.pump.duration_fwhm = pos(quantity(value, &TIME)?)?,
        ("pump", "rep_rate") => cfg.pump.rep_rate = pos(quantity(value, &FREQUENCY)?)?,
        ("window", "temporal_bandwidth") => {
            cfg.window.temporal_bandwidth = pos(quantity(value, &FREQUENCY)?)?;
        }
        ("window", "angular_bandwidth") => {
            cfg.window.angular_bandwidth = pos(quantity(value, &INVERSE_LENGTH)?)?;
        }
        ("window", "ent_duration") => cfg.window.ent_duration = pos(quantity(value, &TIME)?)?,
        ("window", "ent_size") => cfg.window.ent_size = pos(quantity(value, &LENGTH)?)?,
        ("coupling", "beta") => cfg.coupling.beta = unit_half_open_low(quantity(value, &BARE)?)?,
        ("coupling", "nonlinearity_scale") => {
            cfg.coupling.nonlinearity_scale = unit_half_open_low(quantity(value, &BARE)?)?;
        }
        ("coupling", "path_efficiency") => {
            cfg.coupling.path_efficiency = unit_half_open_low(quantity(value, &BARE)?)?;
        }
        ("detection", "pmt_qe") => cfg.detection.pmt_qe = unit_closed(quantity(value, &BARE)?)?,
        ("detection", "aperture_diameter") => {
            cfg.detection.aperture_diameter = pos(quantity(value, &LENGTH)?)?;
        }
        ("detection", "farfield_diameter") => {
            cfg.detection.incoherent_farfield_diameter = pos(quantity(value, &LENGTH)?)?;
        }
        ("detection", "background_rate") => {
            cfg.detection.background_rate = nonneg(quantity(value, &BARE)?)?;
        }
        ("detection", "rep_rate") => cfg.detection.rep_rate = pos(quantity(value, &FREQUENCY)?)?,
        ("detection", "acquisition_time") => {
            cfg.detection.acquisition_time = pos(quantity(value, &TIME)?)?;
        }
        // consumed before the apply pass, to pick the defaults
        ("sweep", "scenario") => {}
        ("sweep", "axis") => {
            cfg.sweep.axis = value
                .parse::<SweepAxis>()
                .map_err(|_| format!("= '{value}' is not a sweep axis (expected pump_energy)"))?;
        }
        ("sweep", "start") => cfg.sweep.start = pos(quantity(value, &ENERGY)?)?,
        ("sweep", "stop") => cfg.sweep.stop = pos(quantity(value, &ENERGY)?)?,
        ("sweep", "points") => {
            let n = value.parse::<usize>().map_err(|_| format!("= '{value}' is not a count"))?;
            if n < 3 {
                return Err(format!("= {n} is too few points (need ≥ 3)"));
            }
            cfg.sweep.points = n;
        }
        ("sweep", "spacing") => {
            cfg.sweep.log_spacing = match value {
                "log" => true,
                "linear" => false,
                other => return Err(format!("= '{other}' is not a spacing (log, linear)")),
            };
        }
        ("sweep", "losses") => cfg.losses = parse_losses(value)?,
        ("sweep", "seed") => {
            cfg.seed = value.parse::<u64>().map_err(|_| format!("= '{value}' is not a seed"))?;
        }
        ("sweep", "noise") => cfg.noise = parse_bool(value)?,
        ("sweep", "output") => cfg.output = Some(value.to_string()),
        _ => unreachable!("key membership is checked while reading"),
    }
    Ok(())
}

/// Builds a full config from file text plus `--set` overrides. The scenario
/// comes from the subcommand (`default_scenario`) unless the file sets
/// `sweep.scenario`, which must then be one of `allowed`. Defaults for the
/// chosen scenario fill every omitted key, and the assembled config is
/// validated as a whole.
pub fn parse_config(
    text: &str,
    default_scenario: Scenario,
    allowed: &[Scenario],
    overrides: &[String],
) -> Result<ExperimentConfig> {
    let mut raw = raw_map(text)?;
    apply_overrides(&mut raw, overrides)?;

    let scenario = match raw.get(&("sweep".to_string(), "scenario".to_string())) {
        Some(entry) => {
            let sc: Scenario = entry.value.parse().map_err(|e: Error| {
                Error::Config(format!("{}: sweep.scenario {e}", place(entry.line)))
            })?;
            if !allowed.contains(&sc) {
                let names: Vec<&str> = allowed.iter().map(Scenario::name).collect();
                return Err(Error::Config(format!(
                    "{}: sweep.scenario = {} not valid here (expected one of: {})",
                    place(entry.line),
                    sc.name(),
                    names.join(", ")
                )));
            }
            sc
        }
        None => default_scenario,
    };

    let mut cfg = ExperimentConfig::for_scenario(scenario);
    for ((sec, key), entry) in &raw {
        set_value(&mut cfg, sec, key, &entry.value).map_err(|msg| {
            Error::Config(format!("{}: {sec}.{key} {msg}", place(entry.line)))
        })?;
    }
    // a single [crystal] section feeds both stages
    cfg.coupling.crystal = cfg.crystal;
    cfg.validate()?;
    Ok(cfg)
}

/// Canonical text form: every section, every key, SI values. Floats print
/// in the shortest round-trip form, so `parse(serialize(cfg))` reproduces
/// `cfg` exactly.
pub fn serialize_config(cfg: &ExperimentConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "[crystal]");
    let _ = writeln!(s, "length = {:e}", cfg.crystal.length);
    let _ = writeln!(s, "d_eff = {:e}", cfg.crystal.d_eff);
    let _ = writeln!(s, "n_pump = {:e}", cfg.crystal.n_pump);
    let _ = writeln!(s, "n_sv = {:e}", cfg.crystal.n_sv);
    let _ = writeln!(s, "lambda_pump = {:e}", cfg.crystal.lambda_pump);
    let _ = writeln!(s, "lambda_sv = {:e}", cfg.crystal.lambda_sv);
    let _ = writeln!(s, "\n[pump]");
    let _ = writeln!(s, "pulse_energy = {:e}", cfg.pump.pulse_energy);
    let _ = writeln!(s, "beam_fwhm = {:e}", cfg.pump.beam_fwhm);
    let _ = writeln!(s, "duration_fwhm = {:e}", cfg.pump.duration_fwhm);
    let _ = writeln!(s, "rep_rate = {:e}", cfg.pump.rep_rate);
    let _ = writeln!(s, "\n[window]");
    let _ = writeln!(s, "temporal_bandwidth = {:e}", cfg.window.temporal_bandwidth);
    let _ = writeln!(s, "angular_bandwidth = {:e}", cfg.window.angular_bandwidth);
    let _ = writeln!(s, "ent_duration = {:e}", cfg.window.ent_duration);
    let _ = writeln!(s, "ent_size = {:e}", cfg.window.ent_size);
    let _ = writeln!(s, "\n[coupling]");
    let _ = writeln!(s, "beta = {:e}", cfg.coupling.beta);
    let _ = writeln!(s, "nonlinearity_scale = {:e}", cfg.coupling.nonlinearity_scale);
    let _ = writeln!(s, "path_efficiency = {:e}", cfg.coupling.path_efficiency);
    let _ = writeln!(s, "\n[detection]");
    let _ = writeln!(s, "pmt_qe = {:e}", cfg.detection.pmt_qe);
    let _ = writeln!(s, "aperture_diameter = {:e}", cfg.detection.aperture_diameter);
    let _ = writeln!(s, "farfield_diameter = {:e}", cfg.detection.incoherent_farfield_diameter);
    let _ = writeln!(s, "background_rate = {:e}", cfg.detection.background_rate);
    let _ = writeln!(s, "rep_rate = {:e}", cfg.detection.rep_rate);
    let _ = writeln!(s, "acquisition_time = {:e}", cfg.detection.acquisition_time);
    let _ = writeln!(s, "\n[sweep]");
    let _ = writeln!(s, "scenario = {}", cfg.scenario.name());
    let _ = writeln!(s, "axis = {}", cfg.sweep.axis.name());
    let _ = writeln!(s, "start = {:e}", cfg.sweep.start);
    let _ = writeln!(s, "stop = {:e}", cfg.sweep.stop);
    let _ = writeln!(s, "points = {}", cfg.sweep.points);
    let _ = writeln!(s, "spacing = {}", if cfg.sweep.log_spacing { "log" } else { "linear" });
    let losses: Vec<String> = cfg.losses.iter().map(|l| format!("{l:e}")).collect();
    let _ = writeln!(s, "losses = {}", losses.join(", "));
    let _ = writeln!(s, "seed = {}", cfg.seed);
    let _ = writeln!(s, "noise = {}", cfg.noise);
    if let Some(out) = &cfg.output {
        let _ = writeln!(s, "output = {out}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn parse(text: &str) -> Result<ExperimentConfig> {
        parse_config(text, Scenario::Fig2a, &Scenario::ALL, &[])
    }

    #[test]
    fn empty_text_gives_scenario_defaults() {
        let cfg = parse("").unwrap();
        assert_eq!(cfg, ExperimentConfig::for_scenario(Scenario::Fig2a));
        // an empty section behaves the same as an absent one
        let cfg = parse("[crystal]\n").unwrap();
        assert_eq!(cfg.crystal.length, 2e-3);
        assert_eq!(cfg.crystal.d_eff, 1.79e-12);
    }

    #[test]
    fn unit_suffixes_scale_into_si() {
        let cfg = parse(
            "[crystal]\nlength = 2mm\nd_eff = 1.79 pm/V\nlambda_pump = 515 nm\n\
             lambda_sv = 1030 nm\n\n[pump]\npulse_energy = 120 uJ\nduration_fwhm = 185fs\n\
             rep_rate = 500 kHz\n\n[window]\nangular_bandwidth = 300 /mm\n",
        )
        .unwrap();
        assert_eq!(cfg.crystal.length, 2.0 * 1e-3);
        assert_eq!(cfg.crystal.d_eff, 1.79 * 1e-12);
        assert_eq!(cfg.crystal.lambda_pump, 515.0 * 1e-9);
        assert_eq!(cfg.pump.pulse_energy, 120.0 * 1e-6);
        assert_eq!(cfg.pump.duration_fwhm, 185.0 * 1e-15);
        assert_eq!(cfg.pump.rep_rate, 500.0 * 1e3);
        assert_eq!(cfg.window.angular_bandwidth, 300.0 * 1e3);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let cfg = parse(
            "# run notes\n\n[pump]\npulse_energy = 3 uJ # mid-range\n\n# trailing comment\n",
        )
        .unwrap();
        assert_eq!(cfg.pump.pulse_energy, 3e-6);
    }

    #[test]
    fn unknown_names_are_rejected_with_locations() {
        let err = parse("[cristal]\nlength = 2mm\n").unwrap_err().to_string();
        assert!(err.contains("line 1") && err.contains("cristal"), "{err}");

        let err = parse("[detection]\npmt_q = 0.4\n").unwrap_err().to_string();
        assert!(err.contains("line 2") && err.contains("pmt_q"), "{err}");

        let err = parse("length = 2mm\n").unwrap_err().to_string();
        assert!(err.contains("before any [section]"), "{err}");
    }

    #[test]
    fn out_of_range_values_name_line_and_key() {
        let err = parse("[detection]\n\npmt_qe = 1.4\n").unwrap_err().to_string();
        assert!(err.contains("line 3") && err.contains("pmt_qe"), "{err}");
        assert!(err.contains("outside [0, 1]"), "{err}");

        let err = parse("[sweep]\npoints = 2\n").unwrap_err().to_string();
        assert!(err.contains("line 2") && err.contains("points"), "{err}");

        let err = parse("[sweep]\nlosses = 0.3, 1.0\n").unwrap_err().to_string();
        assert!(err.contains("losses") && err.contains("outside [0, 1)"), "{err}");

        let err = parse("[crystal]\nlength = -2 mm\n").unwrap_err().to_string();
        assert!(err.contains("must be > 0"), "{err}");
    }

    #[test]
    fn malformed_values_report_the_dimension() {
        let err = parse("[pump]\npulse_energy = fast\n").unwrap_err().to_string();
        assert!(err.contains("energy"), "{err}");
        let err = parse("[coupling]\nbeta = 0.5 uJ\n").unwrap_err().to_string();
        assert!(err.contains("plain number"), "{err}");
        let err = parse("[pump]\npulse_energy = nan\n").unwrap_err().to_string();
        assert!(err.contains("pulse_energy"), "{err}");
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        let err = parse("[pump]\npulse_energy = 1 uJ\npulse_energy = 2 uJ\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 3") && err.contains("already set at line 2"), "{err}");
    }

    #[test]
    fn scenario_key_must_match_the_allowed_family() {
        let text = "[sweep]\nscenario = fig3b\n";
        let cfg =
            parse_config(text, Scenario::Fig3a, &[Scenario::Fig3a, Scenario::Fig3b], &[]).unwrap();
        assert_eq!(cfg.scenario, Scenario::Fig3b);
        assert_eq!(cfg.losses, vec![0.6, 0.9]);

        let err = parse_config(text, Scenario::Fig2a, &[Scenario::Fig2a], &[])
            .unwrap_err()
            .to_string();
        assert!(err.contains("fig3b") && err.contains("expected one of: fig2a"), "{err}");
    }

    #[test]
    fn overrides_replace_file_values_and_are_schema_checked() {
        let text = "[pump]\npulse_energy = 1 uJ\n";
        let cfg = parse_config(
            text,
            Scenario::Fig2a,
            &Scenario::ALL,
            &["pump.pulse_energy=7 uJ".into(), "sweep.seed=99".into()],
        )
        .unwrap();
        assert_eq!(cfg.pump.pulse_energy, 7e-6);
        assert_eq!(cfg.seed, 99);

        let err =
            parse_config(text, Scenario::Fig2a, &Scenario::ALL, &["sweep.pts=9".into()])
                .unwrap_err()
                .to_string();
        assert!(err.contains("pts"), "{err}");

        let err = parse_config(
            text,
            Scenario::Fig2a,
            &Scenario::ALL,
            &["detection.pmt_qe=1.4".into()],
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("override") && err.contains("pmt_qe"), "{err}");
    }

    #[test]
    fn whole_config_constraints_still_apply() {
        // per-key checks pass, but the pair violates the harmonic relation
        let err = parse("[crystal]\nlambda_pump = 515 nm\nlambda_sv = 900 nm\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("lambda"), "{err}");
    }

    fn random_config(rng: &mut StdRng) -> ExperimentConfig {
        let scenario = Scenario::ALL[rng.gen_range(0..Scenario::ALL.len())];
        let mut cfg = ExperimentConfig::for_scenario(scenario);
        cfg.crystal.length = 1e-3 * rng.gen_range(0.5..5.0);
        cfg.crystal.d_eff = 1e-12 * rng.gen_range(0.5..3.0);
        cfg.crystal.n_pump = rng.gen_range(1.3..2.2);
        cfg.crystal.n_sv = rng.gen_range(1.3..2.2);
        cfg.crystal.lambda_pump = 1e-9 * rng.gen_range(400.0..800.0);
        cfg.crystal.lambda_sv = 2.0 * cfg.crystal.lambda_pump;
        cfg.pump.pulse_energy = 1e-6 * rng.gen_range(0.2..200.0);
        cfg.pump.beam_fwhm = 1e-3 * rng.gen_range(0.5..3.0);
        cfg.pump.duration_fwhm = 1e-15 * rng.gen_range(50.0..400.0);
        cfg.pump.rep_rate = 1e3 * rng.gen_range(10.0..2000.0);
        cfg.window.ent_duration = 1e-15 * rng.gen_range(20.0..90.0);
        cfg.window.temporal_bandwidth = 5.625 / cfg.window.ent_duration;
        cfg.window.ent_size = 1e-6 * rng.gen_range(10.0..50.0);
        cfg.window.angular_bandwidth = 6.6 / cfg.window.ent_size;
        cfg.coupling.beta = rng.gen_range(0.05..1.0);
        cfg.coupling.nonlinearity_scale = rng.gen_range(0.1..1.0);
        cfg.coupling.path_efficiency = rng.gen_range(0.1..1.0);
        cfg.detection.pmt_qe = rng.gen_range(0.05..1.0);
        cfg.detection.aperture_diameter = 1e-3 * rng.gen_range(0.3..3.0);
        cfg.detection.incoherent_farfield_diameter =
            cfg.detection.aperture_diameter * rng.gen_range(2.0..15.0);
        cfg.detection.background_rate =
            if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(1e-9..1e-5) };
        cfg.detection.rep_rate = 1e3 * rng.gen_range(10.0..2000.0);
        cfg.detection.acquisition_time = rng.gen_range(1.0..1000.0);
        cfg.sweep.start = 1e-6 * rng.gen_range(0.05..2.0);
        cfg.sweep.stop = 1e-6 * rng.gen_range(50.0..300.0);
        cfg.sweep.points = rng.gen_range(3..40);
        cfg.sweep.log_spacing = rng.gen_bool(0.5);
        cfg.losses = (0..rng.gen_range(0..3)).map(|_| rng.gen_range(0.0..0.95)).collect();
        cfg.seed = rng.gen();
        cfg.noise = rng.gen_bool(0.5);
        cfg.output = if rng.gen_bool(0.5) { Some("runs/out.csv".into()) } else { None };
        cfg.coupling.crystal = cfg.crystal;
        cfg
    }

    #[test]
    fn serialize_then_parse_is_identity_on_randomized_configs() {
        let mut rng = StdRng::seed_from_u64(0x5eed);
        for trial in 0..20 {
            let cfg = random_config(&mut rng);
            let text = serialize_config(&cfg);
            let back = parse_config(&text, cfg.scenario, &Scenario::ALL, &[])
                .unwrap_or_else(|e| panic!("trial {trial}: {e}\n{text}"));
            assert_eq!(back, cfg, "trial {trial}");
        }
    }
}
