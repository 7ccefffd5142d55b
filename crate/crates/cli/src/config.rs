//! Sectioned key-value run configuration.
//!
//! The on-disk format is INI-style: `[section]` headers, `key = value`
//! lines, `#`/`;` comments. All energies are meV and all durations ns; the
//! library's internal picosecond convention never leaks into config files.
//! Every diagnostic carries `path:line:` so a bad config is a one-glance fix.

use std::collections::BTreeMap;
use std::path::Path;

use dotchain::analysis::SweepScheme;
use dotchain::params::{DeviceParams, PS_PER_NS};
use dotchain::protocols::{AdiabaticConfig, AutoPs, ProtocolConfig, PulseGatedConfig};
use dotchain::evolution::DEFAULT_RAMP_TOL;

use crate::CliError;

/// Output serialization format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Where and how artifacts are written; `path = -` (or no path) is stdout.
#[derive(Debug, Clone)]
pub struct OutputSettings {
    pub format: OutputFormat,
    pub path: Option<String>,
}

impl Default for OutputSettings {
    fn default() -> Self {
        Self { format: OutputFormat::Csv, path: None }
    }
}

/// Sweep grid settings (defaults reproduce the standard 33-point θ grid).
#[derive(Debug, Clone)]
pub struct SweepSettings {
    pub theta_points: usize,
    pub theta_range: (f64, f64),
    pub phi_values: Vec<f64>,
    pub delta_u_values: Vec<f64>,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            theta_points: 33,
            theta_range: (0.0, std::f64::consts::PI),
            phi_values: vec![0.0],
            delta_u_values: vec![0.0],
        }
    }
}

/// What the `calibrate` subcommand optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalibrateMode {
    /// Wait time only, with the rest of the schedule fixed.
    Wait,
    /// Joint gate-duration and wait search (pulse-gated only).
    Gate,
}

#[derive(Debug, Clone)]
pub struct CalibrateSettings {
    pub mode: CalibrateMode,
    /// Search window in ns; `None` selects a protocol-appropriate default.
    pub window_ns: Option<(f64, f64)>,
    pub grid_points: usize,
}

impl Default for CalibrateSettings {
    fn default() -> Self {
        Self { mode: CalibrateMode::Wait, window_ns: None, grid_points: 41 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ChainSettings {
    pub n_dots: usize,
}

impl Default for ChainSettings {
    fn default() -> Self {
        Self { n_dots: 4 }
    }
}

/// Extra knobs for the free-evolution study.
#[derive(Debug, Clone, Copy)]
pub struct FreeEvolutionSettings {
    pub duration_ns: f64,
    pub sample_dt_ns: f64,
    pub threshold: f64,
}

/// Fully validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: DeviceParams,
    pub scheme: SweepScheme,
    pub free_evolution: Option<FreeEvolutionSettings>,
    pub sweep: SweepSettings,
    pub output: OutputSettings,
    pub calibrate: CalibrateSettings,
    pub chain: ChainSettings,
    /// Ramp refinement tolerance forwarded to the propagator builder.
    pub ramp_tol: f64,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read config `{}`: {e}", path.display()))
        })?;
        Self::parse(&path.display().to_string(), &text)
    }

    pub fn parse(path: &str, text: &str) -> Result<Self, CliError> {
        let mut doc = Document::parse(path, text)?;

        let mut device = doc.section("device")?;
        let params = DeviceParams::with_mu(
            device.require_f64("t_mev")?,
            device.require_f64("je_mev")?,
            device.require_f64("u_mev")?,
            device.require_f64("k_mev")?,
            device.f64_or("mu_mev", 0.0)?,
        )
        .map_err(|e| device.section_error(e.to_string()))?;
        device.finish()?;

        let mut protocol = doc.section("protocol")?;
        let scheme_name = protocol.require_str("scheme")?;
        let ramp_tol = protocol.f64_or("ramp_tol", DEFAULT_RAMP_TOL)?;
        let (scheme, free_evolution) = match scheme_name.as_str() {
            "pulse_gated" => {
                let cfg = PulseGatedConfig {
                    eps_resonant: protocol.require_f64("eps_resonant_mev")?,
                    d_p: protocol.require_f64("d_p_mev")?,
                    gate_duration: protocol.auto_ns_or("gate_duration_ns", AutoPs::Auto)?,
                    wait_time: protocol.auto_ns_or("wait_time_ns", AutoPs::Auto)?,
                    pre_hold: protocol.f64_or("pre_hold_ns", 0.0)? * PS_PER_NS,
                    post_hold: protocol.f64_or("post_hold_ns", 0.0)? * PS_PER_NS,
                };
                cfg.validate().map_err(|e| protocol.section_error(e.to_string()))?;
                (SweepScheme::PulseGated(cfg), None)
            }
            "adiabatic" => {
                let cfg = AdiabaticConfig {
                    d_ad: protocol.require_f64("d_ad_mev")?,
                    ramp_duration_ns: protocol.require_f64("ramp_duration_ns")?,
                    eps_mid: protocol.f64_or("eps_mid_mev", -1.0)?,
                    wait_time: protocol.auto_ns_or("wait_time_ns", AutoPs::Auto)?,
                    eps_resonant: protocol.f64_or("eps_resonant_mev", 5.0)?,
                };
                cfg.validate().map_err(|e| protocol.section_error(e.to_string()))?;
                (SweepScheme::Adiabatic(cfg), None)
            }
            "free_evolution" => {
                let settings = FreeEvolutionSettings {
                    duration_ns: protocol.require_f64("duration_ns")?,
                    sample_dt_ns: protocol.f64_or("sample_dt_ns", 0.001)?,
                    threshold: protocol.f64_or("threshold", 0.7)?,
                };
                (
                    SweepScheme::FreeEvolution { duration_ns: settings.duration_ns },
                    Some(settings),
                )
            }
            other => {
                return Err(protocol.section_error(format!(
                    "unknown scheme `{other}` (expected pulse_gated, adiabatic or free_evolution)"
                )));
            }
        };
        protocol.finish()?;

        let mut sweep = SweepSettings::default();
        if let Some(mut s) = doc.optional_section("sweep") {
            sweep.theta_points = s.usize_or("theta_points", sweep.theta_points)?;
            sweep.theta_range = (
                s.f64_or("theta_min", sweep.theta_range.0)?,
                s.f64_or("theta_max", sweep.theta_range.1)?,
            );
            sweep.phi_values = s.f64_list_or("phi_list", sweep.phi_values)?;
            sweep.delta_u_values = s.f64_list_or("delta_u_list", sweep.delta_u_values)?;
            s.finish()?;
        }

        let mut output = OutputSettings::default();
        if let Some(mut s) = doc.optional_section("output") {
            output.format = match s.str_or("format", "csv")?.as_str() {
                "csv" => OutputFormat::Csv,
                "json" => OutputFormat::Json,
                other => {
                    return Err(s.section_error(format!(
                        "unknown output format `{other}` (expected csv or json)"
                    )))
                }
            };
            output.path = s.take_str("path")?.filter(|p| p != "-");
            s.finish()?;
        }

        let mut calibrate = CalibrateSettings::default();
        if let Some(mut s) = doc.optional_section("calibrate") {
            calibrate.mode = match s.str_or("mode", "wait")?.as_str() {
                "wait" => CalibrateMode::Wait,
                "gate" => CalibrateMode::Gate,
                other => {
                    return Err(s.section_error(format!(
                        "unknown calibrate mode `{other}` (expected wait or gate)"
                    )))
                }
            };
            let lo = s.take_f64("window_lo_ns")?;
            let hi = s.take_f64("window_hi_ns")?;
            calibrate.window_ns = match (lo, hi) {
                (Some(lo), Some(hi)) => Some((lo, hi)),
                (None, None) => None,
                _ => {
                    return Err(s.section_error(
                        "window_lo_ns and window_hi_ns must be given together".into(),
                    ))
                }
            };
            calibrate.grid_points = s.usize_or("grid_points", calibrate.grid_points)?;
            s.finish()?;
        }

        let mut chain = ChainSettings::default();
        if let Some(mut s) = doc.optional_section("chain") {
            chain.n_dots = s.usize_or("n_dots", chain.n_dots)?;
            s.finish()?;
        }

        doc.finish()?;
        Ok(Self { params, scheme, free_evolution, sweep, output, calibrate, chain, ramp_tol })
    }

    /// The transfer protocol, for subcommands that need an actual schedule.
    pub fn protocol(&self) -> Result<ProtocolConfig, CliError> {
        match self.scheme {
            SweepScheme::PulseGated(cfg) => Ok(ProtocolConfig::PulseGated(cfg)),
            SweepScheme::Adiabatic(cfg) => Ok(ProtocolConfig::Adiabatic(cfg)),
            SweepScheme::FreeEvolution { .. } => Err(CliError::Config(
                "this subcommand needs scheme = pulse_gated or adiabatic".into(),
            )),
        }
    }
}

/// A parsed document: sections are consumed by the typed readers above, and
/// anything left over (unknown sections or keys) is reported as an error.
struct Document {
    path: String,
    sections: BTreeMap<String, RawSection>,
}

struct RawSection {
    line: usize,
    entries: BTreeMap<String, (String, usize)>,
}

impl Document {
    fn parse(path: &str, text: &str) -> Result<Self, CliError> {
        let mut sections: BTreeMap<String, RawSection> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                let name = name.trim().to_string();
                if sections.contains_key(&name) {
                    return Err(CliError::Config(format!(
                        "{path}:{lineno}: duplicate section `[{name}]`"
                    )));
                }
                sections.insert(
                    name.clone(),
                    RawSection { line: lineno, entries: BTreeMap::new() },
                );
                current = Some(name);
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!(
                    "{path}:{lineno}: expected `key = value` or `[section]`, got `{line}`"
                )));
            };
            let Some(section) = &current else {
                return Err(CliError::Config(format!(
                    "{path}:{lineno}: `{}` appears before any `[section]` header",
                    key.trim()
                )));
            };
            let key = key.trim().to_string();
            let entries = &mut sections.get_mut(section).expect("current section exists").entries;
            if entries.contains_key(&key) {
                return Err(CliError::Config(format!(
                    "{path}:{lineno}: duplicate key `{key}` in `[{section}]`"
                )));
            }
            entries.insert(key, (value.trim().to_string(), lineno));
        }
        Ok(Self { path: path.to_string(), sections })
    }

    fn section(&mut self, name: &str) -> Result<SectionReader, CliError> {
        self.optional_section(name).ok_or_else(|| {
            CliError::Config(format!("{}: missing required section `[{name}]`", self.path))
        })
    }

    fn optional_section(&mut self, name: &str) -> Option<SectionReader> {
        self.sections.remove(name).map(|raw| SectionReader {
            path: self.path.clone(),
            name: name.to_string(),
            raw,
        })
    }

    fn finish(self) -> Result<(), CliError> {
        if let Some((name, raw)) = self.sections.into_iter().next() {
            return Err(CliError::Config(format!(
                "{}:{}: unknown section `[{name}]`",
                self.path, raw.line
            )));
        }
        Ok(())
    }
}

struct SectionReader {
    path: String,
    name: String,
    raw: RawSection,
}

impl SectionReader {
    fn section_error(&self, msg: String) -> CliError {
        CliError::Config(format!("{}:{}: [{}]: {msg}", self.path, self.raw.line, self.name))
    }

    fn key_error(&self, key: &str, line: usize, msg: &str) -> CliError {
        CliError::Config(format!("{}:{line}: key `{key}`: {msg}", self.path))
    }

    fn take_str(&mut self, key: &str) -> Result<Option<String>, CliError> {
        Ok(self.raw.entries.remove(key).map(|(v, _)| v))
    }

    fn require_str(&mut self, key: &str) -> Result<String, CliError> {
        self.take_str(key)?.ok_or_else(|| {
            self.section_error(format!("missing required key `{key}`"))
        })
    }

    fn str_or(&mut self, key: &str, default: &str) -> Result<String, CliError> {
        Ok(self.take_str(key)?.unwrap_or_else(|| default.to_string()))
    }

    fn take_f64(&mut self, key: &str) -> Result<Option<f64>, CliError> {
        match self.raw.entries.remove(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| self.key_error(key, line, &format!("invalid number `{v}`"))),
        }
    }

    fn require_f64(&mut self, key: &str) -> Result<f64, CliError> {
        self.take_f64(key)?.ok_or_else(|| {
            self.section_error(format!("missing required key `{key}`"))
        })
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        Ok(self.take_f64(key)?.unwrap_or(default))
    }

    fn usize_or(&mut self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.raw.entries.remove(key) {
            None => Ok(default),
            Some((v, line)) => v
                .parse::<usize>()
                .map_err(|_| self.key_error(key, line, &format!("invalid integer `{v}`"))),
        }
    }

    /// Duration that is either the literal `auto` or a fixed value in ns
    /// (stored in ps, the library's internal unit).
    fn auto_ns_or(&mut self, key: &str, default: AutoPs) -> Result<AutoPs, CliError> {
        match self.raw.entries.remove(key) {
            None => Ok(default),
            Some((v, _)) if v == "auto" => Ok(AutoPs::Auto),
            Some((v, line)) => v
                .parse::<f64>()
                .map(|ns| AutoPs::Fixed(ns * PS_PER_NS))
                .map_err(|_| {
                    self.key_error(key, line, &format!("expected `auto` or a number, got `{v}`"))
                }),
        }
    }

    fn f64_list_or(&mut self, key: &str, default: Vec<f64>) -> Result<Vec<f64>, CliError> {
        match self.raw.entries.remove(key) {
            None => Ok(default),
            Some((v, line)) => v
                .split(',')
                .map(|item| {
                    item.trim().parse::<f64>().map_err(|_| {
                        self.key_error(key, line, &format!("invalid number `{}`", item.trim()))
                    })
                })
                .collect(),
        }
    }

    fn finish(self) -> Result<(), CliError> {
        if let Some((key, (_, line))) = self.raw.entries.iter().next() {
            return Err(self.key_error(key, *line, "unknown key"));
        }
        Ok(())
    }
}
