//! Delimited text files for every pipeline artifact.
//!
//! Each file starts with a `# column names` header, followed by `# key = value`
//! metadata lines and whitespace-separated rows. Floats are written in Rust's
//! shortest round-trip form, so rewriting a file that was read back gives the
//! same bytes.

use std::io::{BufRead, Write};

use thiserror::Error;

use crate::fts::{self, AmplitudeSpectrum, ApodizationWindow, WindowKind};
use crate::grid::WavenumberGrid;
use crate::interferogram::{Interferogram, InterferogramMeta, NoiseConfig, OpdAxis, ScanConfig};
use crate::linelist::AbsorptionSpectrum;
use crate::retrieval::{FitResult, TransmissionSpectrum};

pub const INTERFEROGRAM_HEADER: &str = "# opd_cm counts";
pub const SPECTRUM_HEADER: &str = "# wavenumber_cm-1 amplitude psd";
pub const TRANSMISSION_HEADER: &str = "# wavenumber_cm-1 transmission";
pub const ABSORPTION_HEADER: &str = "# wavenumber_cm-1 alpha_cm-1";
pub const RESIDUALS_HEADER: &str = "# wavenumber_cm-1 residual";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("expected header {expected:?}, found {found:?}")]
    Header { expected: &'static str, found: String },
    #[error("line {line}: {reason}")]
    Row { line: usize, reason: String },
    #[error("missing metadata key `{0}`")]
    MissingMeta(&'static str),
    #[error("bad metadata `{key}` = {value:?}")]
    BadMeta { key: String, value: String },
    #[error("axis is not uniform")]
    NonUniformAxis,
    #[error("file holds no data rows")]
    Empty,
}

/// Ordered `key = value` pairs carried in `#` comment lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata(pub Vec<(String, String)>);

impl Metadata {
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.0.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn require<T: std::str::FromStr>(&self, key: &'static str) -> Result<T, FormatError> {
        let v = self.get(key).ok_or(FormatError::MissingMeta(key))?;
        v.parse().map_err(|_| FormatError::BadMeta { key: key.to_string(), value: v.to_string() })
    }

    fn write(&self, w: &mut impl Write) -> std::io::Result<()> {
        for (k, v) in &self.0 {
            writeln!(w, "# {k} = {v}")?;
        }
        Ok(())
    }
}

struct Table {
    meta: Metadata,
    rows: Vec<Vec<f64>>,
}

fn read_table(r: impl BufRead, header: &'static str, columns: usize) -> Result<Table, FormatError> {
    let mut lines = r.lines();
    let first = lines.next().transpose()?.unwrap_or_default();
    if first.trim() != header {
        return Err(FormatError::Header { expected: header, found: first });
    }
    let mut meta = Metadata::default();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let n = i + 2;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(c) = t.strip_prefix('#') {
            if let Some((k, v)) = c.split_once('=') {
                meta.push(k.trim(), v.trim());
            }
            continue;
        }
        let row = t
            .split_whitespace()
            .map(|s| s.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| FormatError::Row { line: n, reason: e.to_string() })?;
        if row.len() != columns {
            return Err(FormatError::Row { line: n, reason: format!("expected {columns} columns, found {}", row.len()) });
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(FormatError::Empty);
    }
    Ok(Table { meta, rows })
}

fn uniform_grid(points: &[f64]) -> Result<WavenumberGrid, FormatError> {
    WavenumberGrid::from_points(points).map_err(|_| FormatError::NonUniformAxis)
}

pub fn write_interferogram(w: &mut impl Write, ifg: &Interferogram) -> std::io::Result<()> {
    writeln!(w, "{INTERFEROGRAM_HEADER}")?;
    let m = &ifg.meta;
    let mut meta = Metadata::default();
    meta.push("scan.opd_max_cm", m.scan.opd_max);
    meta.push("scan.opd_step_cm", m.scan.opd_step);
    meta.push("scan.dwell_s", m.scan.dwell_time);
    meta.push("scan.averages", m.scan.scans_to_average);
    meta.push("noise.enabled", m.noise.enabled);
    meta.push("noise.seed", m.noise.rng_seed);
    meta.push("noise.background_cps", m.noise.detector_background);
    meta.push("enhancement", m.enhancement);
    meta.push("averaged", m.averaged);
    for (k, v) in &m.provenance {
        meta.push(k.clone(), v);
    }
    meta.write(w)?;
    for (i, c) in ifg.counts.iter().enumerate() {
        writeln!(w, "{} {}", ifg.axis.at(i), c)?;
    }
    Ok(())
}

const IFG_KEYS: [&str; 9] = [
    "scan.opd_max_cm",
    "scan.opd_step_cm",
    "scan.dwell_s",
    "scan.averages",
    "noise.enabled",
    "noise.seed",
    "noise.background_cps",
    "enhancement",
    "averaged",
];

pub fn read_interferogram(r: impl BufRead) -> Result<Interferogram, FormatError> {
    let table = read_table(r, INTERFEROGRAM_HEADER, 2)?;
    let opd: Vec<f64> = table.rows.iter().map(|r| r[0]).collect();
    let axis = OpdAxis::from_points(&opd).map_err(|_| FormatError::NonUniformAxis)?;
    let m = &table.meta;
    let scan = ScanConfig {
        opd_max: m.require("scan.opd_max_cm")?,
        opd_step: m.require("scan.opd_step_cm")?,
        dwell_time: m.require("scan.dwell_s")?,
        scans_to_average: m.require("scan.averages")?,
    };
    let noise = NoiseConfig {
        enabled: m.require("noise.enabled")?,
        rng_seed: m.require("noise.seed")?,
        detector_background: m.require("noise.background_cps")?,
    };
    let provenance = m.0.iter().filter(|(k, _)| !IFG_KEYS.contains(&k.as_str())).cloned().collect();
    Ok(Interferogram {
        axis: OpdAxis { step: scan.opd_step, half_len: axis.half_len },
        counts: table.rows.iter().map(|r| r[1]).collect(),
        meta: InterferogramMeta {
            scan,
            noise,
            enhancement: m.require("enhancement")?,
            averaged: m.require("averaged")?,
            provenance,
        },
    })
}

/// What a spectrum remembers about how it was made: the window, the scan axis and zero-fill.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstrumentInfo {
    pub window: ApodizationWindow,
    pub axis: OpdAxis,
    pub zero_fill: usize,
}

impl InstrumentInfo {
    pub fn to_metadata(&self) -> Metadata {
        let mut m = Metadata::default();
        m.push("apodization.kind", self.window.kind);
        if self.window.kind == WindowKind::Gaussian {
            m.push("apodization.fwhm_cm_opd", self.window.fwhm);
        }
        m.push("opd_step_cm", self.axis.step);
        m.push("opd_half_len", self.axis.half_len);
        m.push("fft.zero_fill", self.zero_fill);
        m.push("ils_fwhm_cm1", fts::ils_fwhm(&self.window, self.axis.opd_max()));
        m
    }

    pub fn from_metadata(m: &Metadata) -> Result<Self, FormatError> {
        let kind: WindowKind = m.require("apodization.kind")?;
        let window = match kind {
            WindowKind::Gaussian => ApodizationWindow::gaussian(m.require("apodization.fwhm_cm_opd")?),
            WindowKind::Boxcar => ApodizationWindow::boxcar(),
        };
        Ok(Self {
            window,
            axis: OpdAxis { step: m.require("opd_step_cm")?, half_len: m.require("opd_half_len")? },
            zero_fill: m.require("fft.zero_fill")?,
        })
    }
}

pub fn write_spectrum(w: &mut impl Write, s: &AmplitudeSpectrum, meta: &Metadata) -> std::io::Result<()> {
    writeln!(w, "{SPECTRUM_HEADER}")?;
    meta.write(w)?;
    for (i, (a, p)) in s.amplitude.iter().zip(&s.psd).enumerate() {
        writeln!(w, "{} {} {}", s.grid.at(i), a, p)?;
    }
    Ok(())
}

pub fn read_spectrum(r: impl BufRead) -> Result<(AmplitudeSpectrum, Metadata), FormatError> {
    let table = read_table(r, SPECTRUM_HEADER, 3)?;
    let nu: Vec<f64> = table.rows.iter().map(|r| r[0]).collect();
    let grid = uniform_grid(&nu)?;
    let spectrum = AmplitudeSpectrum {
        grid,
        amplitude: table.rows.iter().map(|r| r[1]).collect(),
        psd: table.rows.iter().map(|r| r[2]).collect(),
    };
    Ok((spectrum, table.meta))
}

/// Writes the valid band only.
pub fn write_transmission(w: &mut impl Write, t: &TransmissionSpectrum, meta: &Metadata) -> std::io::Result<()> {
    writeln!(w, "{TRANSMISSION_HEADER}")?;
    let (lo, hi) = t.valid_band();
    writeln!(w, "# valid_band_cm1 = {lo} {hi}")?;
    meta.write(w)?;
    for i in t.valid.clone() {
        writeln!(w, "{} {}", t.grid.at(i), t.t[i])?;
    }
    Ok(())
}

pub fn read_transmission(r: impl BufRead) -> Result<(TransmissionSpectrum, Metadata), FormatError> {
    let table = read_table(r, TRANSMISSION_HEADER, 2)?;
    let nu: Vec<f64> = table.rows.iter().map(|r| r[0]).collect();
    let grid = uniform_grid(&nu)?;
    let t = TransmissionSpectrum { grid, t: table.rows.iter().map(|r| r[1]).collect(), valid: 0..nu.len() };
    Ok((t, table.meta))
}

pub fn write_absorption(w: &mut impl Write, a: &AbsorptionSpectrum) -> std::io::Result<()> {
    writeln!(w, "{ABSORPTION_HEADER}")?;
    for (i, v) in a.alpha.iter().enumerate() {
        writeln!(w, "{} {}", a.grid.at(i), v)?;
    }
    Ok(())
}

pub fn read_absorption(r: impl BufRead) -> Result<AbsorptionSpectrum, FormatError> {
    let table = read_table(r, ABSORPTION_HEADER, 2)?;
    let nu: Vec<f64> = table.rows.iter().map(|r| r[0]).collect();
    Ok(AbsorptionSpectrum { grid: uniform_grid(&nu)?, alpha: table.rows.iter().map(|r| r[1]).collect() })
}

/// Four significant digits, plain decimal notation where sensible.
fn sig4(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    if (-4..6).contains(&mag) {
        let decimals = (3 - mag).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.3e}")
    }
}

/// `c ± σ` in percent, both to four significant digits.
pub fn format_percent(c: f64, sigma: f64) -> String {
    format!("{} ± {} %", sig4(c * 100.0), sig4(sigma * 100.0))
}

/// Concise notation in percent with a two-digit uncertainty, e.g. `0.3001(11) %`.
pub fn concise_percent(c: f64, sigma: f64) -> String {
    let (v, s) = (c * 100.0, sigma * 100.0);
    if !(s > 0.0) || !s.is_finite() || !v.is_finite() {
        return format_percent(c, sigma);
    }
    let mut decimals = 1 - s.log10().floor() as i32;
    if (s * 10f64.powi(decimals)).round() >= 100.0 {
        decimals -= 1;
    }
    let digits = (s * 10f64.powi(decimals)).round() as u64;
    if decimals >= 0 {
        let d = decimals as usize;
        format!("{v:.d$}({digits}) %")
    } else {
        format!("{} ± {} %", sig4(v), sig4(s))
    }
}

pub fn write_fit_report(w: &mut impl Write, fit: &FitResult) -> std::io::Result<()> {
    for (k, name) in fit.species.iter().enumerate() {
        let (c, s) = (fit.concentrations[k], fit.sigmas[k]);
        writeln!(w, "species = {name}")?;
        writeln!(w, "concentration = {c}")?;
        writeln!(w, "sigma = {s}")?;
        writeln!(w, "concentration_percent = {}", format_percent(c, s))?;
        writeln!(w, "concise = {}", concise_percent(c, s))?;
    }
    writeln!(w, "band_cm1 = {} {}", fit.band.0, fit.band.1)?;
    writeln!(w, "bins = {}", fit.residuals.len())?;
    writeln!(w, "reduced_chi2 = {}", fit.reduced_chi2)?;
    writeln!(w, "iterations = {}", fit.iterations)?;
    writeln!(w, "converged = {}", fit.converged)?;
    Ok(())
}

pub fn write_residuals(w: &mut impl Write, fit: &FitResult) -> std::io::Result<()> {
    writeln!(w, "{RESIDUALS_HEADER}")?;
    for (nu, r) in fit.wavenumbers.iter().zip(&fit.residuals) {
        writeln!(w, "{nu} {r}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percent_formatting() {
        assert_eq!(format_percent(0.003001, 0.000011), "0.3001 ± 0.001100 %");
        assert_eq!(concise_percent(0.003001, 0.000011), "0.3001(11) %");
        assert_eq!(concise_percent(0.0095, 0.0002), "0.950(20) %");
        assert_eq!(concise_percent(0.0030004, 0.0000012), "0.30004(12) %");
        assert_eq!(concise_percent(0.5, 0.0996), "50(10) %");
    }

    #[test]
    fn interferogram_round_trip_is_byte_stable() {
        let scan = ScanConfig { opd_max: 0.001, ..Default::default() };
        let ifg = crate::interferogram::from_expected(
            (0..21).map(|i| 1.0 + i as f64 / 3.0).collect(),
            &scan,
            &NoiseConfig::noiseless(),
            55.0,
            crate::exec::Exec::Sequential,
        );
        let mut a = Vec::new();
        write_interferogram(&mut a, &ifg).unwrap();
        let back = read_interferogram(&a[..]).unwrap();
        assert_eq!(back, ifg);
        let mut b = Vec::new();
        write_interferogram(&mut b, &back).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn wrong_header_and_bad_rows() {
        assert!(matches!(read_spectrum(&b"# nope\n1 2 3\n"[..]), Err(FormatError::Header { .. })));
        let text = format!("{TRANSMISSION_HEADER}\n1 0.5\n2 x\n");
        assert!(matches!(read_transmission(text.as_bytes()), Err(FormatError::Row { line: 3, .. })));
        let text = format!("{ABSORPTION_HEADER}\n1 0.5\n2 0.1\n4 0.2\n");
        assert!(matches!(read_absorption(text.as_bytes()), Err(FormatError::NonUniformAxis)));
    }
}
