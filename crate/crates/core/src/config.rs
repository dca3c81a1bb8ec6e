//! Run configuration: flat `key = value` text with dotted namespaces.
//!
//! Lines starting with `#` and blank lines are ignored. Every key carries its
//! unit in the name. Unknown keys are rejected, and relative line-list paths
//! are resolved against the directory holding the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::constants::nm_to_wavenumber;
use crate::fts::{ApodizationWindow, WindowKind};
use crate::grid::{GridError, WavenumberGrid};
use crate::interferogram::{DispersionConfig, NoiseConfig, ScanConfig};
use crate::linelist::{AbsorptionOptions, GasConditions};
use crate::optics::{CavityConfig, SpdcConfig, SpectralShape};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: bad value {value:?} for `{key}`: {reason}")]
    BadValue { line: usize, key: String, value: String, reason: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GasConfig {
    pub name: String,
    /// Mole fraction.
    pub concentration: f64,
    pub linelist_path: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub cavity: CavityConfig,
    pub spdc: SpdcConfig,
    pub scan: ScanConfig,
    pub dispersion: DispersionConfig,
    pub noise: NoiseConfig,
    /// cm
    pub cell_length: f64,
    pub conditions: GasConditions,
    /// Sorted by species name.
    pub gases: Vec<GasConfig>,
    pub apodization: ApodizationWindow,
    pub zero_fill: usize,
    pub threshold: f64,
    /// Fit band per species, cm⁻¹.
    pub fit_bands: BTreeMap<String, (f64, f64)>,
    pub snr_window: (f64, f64),
    pub grid: WavenumberGrid,
    pub absorption: AbsorptionOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        let fit_bands = [("CH4", (2850.0, 3150.0)), ("N2O", (2500.0, 2630.0))]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        Self {
            cavity: CavityConfig::default(),
            spdc: SpdcConfig::default(),
            scan: ScanConfig::default(),
            dispersion: DispersionConfig::default(),
            noise: NoiseConfig::default(),
            cell_length: 2.0,
            conditions: GasConditions::default(),
            gases: Vec::new(),
            apodization: ApodizationWindow::default(),
            zero_fill: 4,
            threshold: 0.1,
            fit_bands,
            snr_window: (3150.0, 3250.0),
            grid: WavenumberGrid::span(1900.0, 3900.0, 0.02).expect("default grid is valid"),
            absorption: AbsorptionOptions::default(),
        }
    }
}

struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

impl Entry<'_> {
    fn bad(&self, reason: impl Into<String>) -> ConfigError {
        ConfigError::BadValue {
            line: self.line,
            key: self.key.to_string(),
            value: self.value.to_string(),
            reason: reason.into(),
        }
    }

    fn parse<T: FromStr>(&self) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.value.parse::<T>().map_err(|e| self.bad(e.to_string()))
    }

    fn number(&self) -> Result<f64, ConfigError> {
        let v: f64 = self.parse()?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.bad("not a finite number"))
        }
    }

    /// Two numbers separated by whitespace and/or a comma, low first.
    fn interval(&self) -> Result<(f64, f64), ConfigError> {
        let parts: Vec<&str> = self.value.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        let [a, b] = parts.as_slice() else {
            return Err(self.bad("expected two numbers `lo hi`"));
        };
        let (lo, hi): (f64, f64) = (a.parse().map_err(|_| self.bad("lo is not a number"))?, b.parse().map_err(|_| self.bad("hi is not a number"))?);
        if !(lo < hi) {
            return Err(self.bad("lo must be below hi"));
        }
        Ok((lo, hi))
    }
}

#[derive(Default)]
struct GasDraft {
    concentration: Option<f64>,
    linelist_path: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Parse config text; relative paths are taken relative to `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen = BTreeMap::new();
        let mut gases: BTreeMap<String, GasDraft> = BTreeMap::new();
        let (mut grid_start, mut grid_stop, mut grid_step) = (cfg.grid.start(), cfg.grid.stop(), cfg.grid.step());
        let mut apod_fwhm_cm = cfg.apodization.fwhm;
        let mut common_band = None;
        let mut species_bands = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(ConfigError::Syntax { line, text: raw.to_string() });
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(ConfigError::Syntax { line, text: raw.to_string() });
            }
            if seen.insert(key.to_string(), line).is_some() {
                return Err(ConfigError::DuplicateKey { line, key: key.to_string() });
            }
            let e = Entry { line, key, value };
            match key {
                "cavity.finesse" => cfg.cavity.finesse = e.number()?,
                "cavity.coupling_efficiency" => cfg.cavity.coupling_efficiency = e.number()?,
                "cavity.pump_power_mw" => cfg.cavity.pump_power_in = e.number()? * 1e-3,
                "spdc.pump_wavelength_nm" => cfg.spdc.pump_wavenumber = nm_to_wavenumber(e.number()?),
                "spdc.center_cm1" => cfg.spdc.idler_center_wavenumber = e.number()?,
                "spdc.fwhm_cm1" => cfg.spdc.phase_matching_bandwidth = e.number()?,
                "spdc.shape" => cfg.spdc.spectral_shape = e.parse::<SpectralShape>()?,
                "spdc.max_visibility" => cfg.spdc.max_visibility = e.number()?,
                "spdc.base_pair_rate" => cfg.spdc.base_pair_rate = e.number()?,
                "spdc.detection_efficiency" => cfg.spdc.detection_efficiency = e.number()?,
                "scan.opd_max_cm" => cfg.scan.opd_max = e.number()?,
                "scan.opd_step_um" => cfg.scan.opd_step = e.number()? * 1e-4,
                "scan.dwell_s" => cfg.scan.dwell_time = e.number()?,
                "scan.averages" => cfg.scan.scans_to_average = e.parse()?,
                "dispersion.beta2" => cfg.dispersion.beta2 = e.number()?,
                "dispersion.center_cm1" => cfg.dispersion.center = e.number()?,
                "noise.seed" => cfg.noise.rng_seed = e.parse()?,
                "noise.enabled" => cfg.noise.enabled = e.parse()?,
                "noise.background_cps" => cfg.noise.detector_background = e.number()?,
                "cell.length_cm" => cfg.cell_length = e.number()?,
                "cell.temperature_k" => cfg.conditions.temperature = e.number()?,
                "cell.pressure_atm" => cfg.conditions.pressure = e.number()?,
                "apodization.kind" => cfg.apodization.kind = e.parse::<WindowKind>()?,
                "apodization.fwhm_mm_opd" => apod_fwhm_cm = e.number()? * 0.1,
                "fft.zero_fill" => cfg.zero_fill = e.parse()?,
                "transmission.threshold" => cfg.threshold = e.number()?,
                "snr.window_cm1" => cfg.snr_window = e.interval()?,
                "fit.band_cm1" => common_band = Some(e.interval()?),
                "grid.start_cm1" => grid_start = e.number()?,
                "grid.stop_cm1" => grid_stop = e.number()?,
                "grid.step_cm1" => grid_step = e.number()?,
                "linelist.cutoff_cm1" => cfg.absorption.cutoff = e.number()?,
                "linelist.pressure_shift" => cfg.absorption.pressure_shift = e.parse()?,
                "linelist.self_broadening" => cfg.absorption.self_broadening = e.parse()?,
                _ => {
                    if let Some(species) = key.strip_prefix("fit.band_cm1.").filter(|s| valid_species(s)) {
                        species_bands.push((species.to_string(), e.interval()?));
                    } else if let Some(rest) = key.strip_prefix("gas.") {
                        let Some((species, field)) = rest.rsplit_once('.').filter(|(s, _)| valid_species(s)) else {
                            return Err(ConfigError::UnknownKey { line, key: key.to_string() });
                        };
                        let draft = gases.entry(species.to_string()).or_default();
                        match field {
                            "concentration" => draft.concentration = Some(e.number()?),
                            "linelist_path" => draft.linelist_path = Some(base_dir.join(value)),
                            _ => return Err(ConfigError::UnknownKey { line, key: key.to_string() }),
                        }
                    } else {
                        return Err(ConfigError::UnknownKey { line, key: key.to_string() });
                    }
                }
            }
        }

        cfg.apodization.fwhm = match cfg.apodization.kind {
            WindowKind::Gaussian => apod_fwhm_cm,
            WindowKind::Boxcar => f64::INFINITY,
        };
        cfg.grid = WavenumberGrid::span(grid_start, grid_stop, grid_step).map_err(|e: GridError| ConfigError::Invalid(format!("grid: {e}")))?;
        for (name, draft) in gases {
            let concentration = draft
                .concentration
                .ok_or_else(|| ConfigError::Invalid(format!("gas.{name}.concentration is missing")))?;
            let linelist_path = draft
                .linelist_path
                .ok_or_else(|| ConfigError::Invalid(format!("gas.{name}.linelist_path is missing")))?;
            cfg.gases.push(GasConfig { name, concentration, linelist_path });
        }
        // A bare `fit.band_cm1` covers every configured gas without a band of its own.
        if let Some(band) = common_band {
            for gas in &cfg.gases {
                cfg.fit_bands.insert(gas.name.clone(), band);
            }
        }
        cfg.fit_bands.extend(species_bands);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let inv = |e: &dyn std::fmt::Display| ConfigError::Invalid(e.to_string());
        self.cavity.validate().map_err(|e| inv(&e))?;
        self.spdc.validate().map_err(|e| inv(&e))?;
        self.scan.validate().map_err(|e| inv(&e))?;
        self.conditions.validate().map_err(|e| inv(&e))?;
        self.apodization.validate().map_err(|e| inv(&e))?;
        if !(self.cell_length > 0.0) {
            return Err(ConfigError::Invalid("cell.length_cm must be positive".into()));
        }
        if self.zero_fill == 0 {
            return Err(ConfigError::Invalid("fft.zero_fill must be at least 1".into()));
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(ConfigError::Invalid("transmission.threshold must lie in (0, 1]".into()));
        }
        if !(self.absorption.cutoff > 0.0) {
            return Err(ConfigError::Invalid("linelist.cutoff_cm1 must be positive".into()));
        }
        if self.grid.stop() > self.scan.nyquist_wavenumber() {
            return Err(ConfigError::Invalid(format!(
                "grid reaches {} cm-1, beyond the {} cm-1 Nyquist limit of the scan step",
                self.grid.stop(),
                self.scan.nyquist_wavenumber()
            )));
        }
        let mut total = 0.0;
        for g in &self.gases {
            if !(g.concentration >= 0.0 && g.concentration <= 1.0) {
                return Err(ConfigError::Invalid(format!("gas.{}.concentration must lie in [0, 1]", g.name)));
            }
            total += g.concentration;
        }
        if total > 1.0 {
            return Err(ConfigError::Invalid(format!("gas concentrations sum to {total} > 1")));
        }
        Ok(())
    }

    /// Enhancement factor implied by the cavity settings.
    pub fn enhancement(&self) -> f64 {
        crate::optics::cavity_enhancement(&self.cavity).unwrap_or(f64::NAN)
    }

    pub fn fit_band(&self, species: &str) -> Option<(f64, f64)> {
        self.fit_bands.get(species).copied()
    }
}

fn valid_species(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}
