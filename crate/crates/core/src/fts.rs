//! Fourier-transform analysis of interferograms: apodization, magnitude
//! spectra and the instrument line shape (ILS).
//!
//! Spectra are magnitudes of the plain DFT `X_k = Σ_j y_j e^{−2πi k j / N}`
//! with no phase correction, so any smooth spectral phase of the instrument
//! (crystal dispersion in particular) drops out.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::exec::{self, Exec};
use crate::grid::{GridError, WavenumberGrid};
use crate::interferogram::{Interferogram, OpdAxis};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FtsError {
    #[error("zero-fill factor must be at least 1")]
    ZeroFill,
    #[error("OPD axis is not uniform")]
    NonUniformAxis,
    #[error("Gaussian window needs a positive FWHM, got {0}")]
    BadWindow(f64),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowKind {
    Gaussian,
    Boxcar,
}

impl std::str::FromStr for WindowKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "boxcar" => Ok(Self::Boxcar),
            _ => Err(format!("unknown apodization {s:?} (expected gaussian or boxcar)")),
        }
    }
}

impl std::fmt::Display for WindowKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Gaussian => "gaussian",
            Self::Boxcar => "boxcar",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApodizationWindow {
    pub kind: WindowKind,
    /// FWHM in OPD, cm. Ignored for boxcar.
    pub fwhm: f64,
}

impl Default for ApodizationWindow {
    /// 3.4 mm FWHM in mirror displacement, i.e. 6.8 mm of OPD.
    fn default() -> Self {
        Self { kind: WindowKind::Gaussian, fwhm: 0.68 }
    }
}

impl ApodizationWindow {
    pub fn gaussian(fwhm: f64) -> Self {
        Self { kind: WindowKind::Gaussian, fwhm }
    }

    pub fn boxcar() -> Self {
        Self { kind: WindowKind::Boxcar, fwhm: f64::INFINITY }
    }

    pub fn validate(&self) -> Result<(), FtsError> {
        match self.kind {
            WindowKind::Gaussian if !(self.fwhm > 0.0) => Err(FtsError::BadWindow(self.fwhm)),
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn weight(&self, x: f64) -> f64 {
        match self.kind {
            WindowKind::Gaussian => (-4.0 * LN_2 * x * x / (self.fwhm * self.fwhm)).exp(),
            WindowKind::Boxcar => 1.0,
        }
    }
}

/// Subtract the mean count, then multiply by the window centered at zero OPD.
pub fn apodize(ifg: &Interferogram, win: &ApodizationWindow) -> Result<Interferogram, FtsError> {
    win.validate()?;
    let mean = ifg.mean();
    let counts = ifg
        .counts
        .iter()
        .enumerate()
        .map(|(i, &c)| (c - mean) * win.weight(ifg.axis.at(i)))
        .collect();
    let mut meta = ifg.meta.clone();
    meta.provenance.push(("apodization.kind".into(), win.kind.to_string()));
    if win.kind == WindowKind::Gaussian {
        meta.provenance.push(("apodization.fwhm_cm_opd".into(), win.fwhm.to_string()));
    }
    Ok(Interferogram { axis: ifg.axis, counts, meta })
}

/// Full complex DFT of the counts, zero-filled to `zero_fill × N` points.
pub fn transform(ifg: &Interferogram, zero_fill: usize) -> Result<Vec<Complex64>, FtsError> {
    if zero_fill == 0 {
        return Err(FtsError::ZeroFill);
    }
    let n_pad = ifg.counts.len() * zero_fill;
    let mut buf = vec![Complex64::new(0.0, 0.0); n_pad];
    for (b, &c) in buf.iter_mut().zip(&ifg.counts) {
        *b = Complex64::new(c, 0.0);
    }
    FftPlanner::new().plan_fft_forward(n_pad).process(&mut buf);
    Ok(buf)
}

/// One-sided magnitude spectrum on bins `k/(N_pad·Δx)`, `k = 0..=N_pad/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSpectrum {
    pub grid: WavenumberGrid,
    pub amplitude: Vec<f64>,
    pub psd: Vec<f64>,
}

impl AmplitudeSpectrum {
    pub fn new(grid: WavenumberGrid, amplitude: Vec<f64>) -> Self {
        let psd = amplitude.iter().map(|a| a * a).collect();
        Self { grid, amplitude, psd }
    }

    pub fn peak(&self) -> (usize, f64) {
        self.amplitude
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::MIN), |b, (i, v)| if v > b.1 { (i, v) } else { b })
    }

    /// Contiguous band around the peak where the amplitude stays at or above `fraction` of it.
    pub fn band_above(&self, fraction: f64) -> (usize, usize) {
        let (ip, peak) = self.peak();
        let thr = fraction * peak;
        let mut lo = ip;
        while lo > 0 && self.amplitude[lo - 1] >= thr {
            lo -= 1;
        }
        let mut hi = ip;
        while hi + 1 < self.amplitude.len() && self.amplitude[hi + 1] >= thr {
            hi += 1;
        }
        (lo, hi)
    }
}

pub fn to_spectrum(ifg: &Interferogram, zero_fill: usize) -> Result<AmplitudeSpectrum, FtsError> {
    let full = transform(ifg, zero_fill)?;
    let n_pad = full.len();
    let grid = WavenumberGrid::new(0.0, 1.0 / (n_pad as f64 * ifg.axis.step), n_pad / 2 + 1)?;
    let amplitude = full[..=n_pad / 2].iter().map(|v| v.norm()).collect();
    Ok(AmplitudeSpectrum::new(grid, amplitude))
}

/// Analytic ILS width, cm⁻¹.
///
/// Gaussian window: 4 ln2/(π·FWHM_opd), the width of its Fourier pair.
/// Boxcar over ±opd_max: 1.207/(2·opd_max), the width of the sinc.
pub fn ils_fwhm(win: &ApodizationWindow, opd_max: f64) -> f64 {
    match win.kind {
        WindowKind::Gaussian => 4.0 * LN_2 / (PI * win.fwhm),
        WindowKind::Boxcar => 1.207 / (2.0 * opd_max),
    }
}

/// Unnormalized ILS of the sampled window, K(Δ) = Σ_j w(x_j) cos(2πΔx_j).
pub fn ils_value(win: &ApodizationWindow, axis: &OpdAxis, delta: f64) -> f64 {
    (0..axis.len())
        .map(|i| {
            let x = axis.at(i);
            win.weight(x) * (2.0 * PI * (delta * x).fract()).cos()
        })
        .sum()
}

/// FWHM of the sampled window's transform, found by bisection on K(Δ) = K(0)/2.
pub fn measured_ils_fwhm(win: &ApodizationWindow, axis: &OpdAxis) -> f64 {
    let k0 = ils_value(win, axis, 0.0);
    let mut hi = ils_fwhm(win, axis.opd_max()) * 0.05;
    while ils_value(win, axis, hi) > 0.5 * k0 {
        hi *= 1.5;
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if ils_value(win, axis, mid) > 0.5 * k0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo + hi
}

/// ILS sampled at multiples of a fine wavenumber step, unit area, truncated at ±5 FWHM.
#[derive(Debug, Clone, PartialEq)]
pub struct IlsKernel {
    pub step: f64,
    /// Values at offsets `(i − half)·step`.
    pub values: Vec<f64>,
    pub fwhm: f64,
}

impl IlsKernel {
    pub fn from_window(win: &ApodizationWindow, axis: &OpdAxis, step: f64) -> Result<Self, FtsError> {
        Self::from_window_with(Exec::default(), win, axis, step)
    }

    pub fn from_window_with(exec: Exec, win: &ApodizationWindow, axis: &OpdAxis, step: f64) -> Result<Self, FtsError> {
        win.validate()?;
        let fwhm = measured_ils_fwhm(win, axis);
        let half = (5.0 * fwhm / step).ceil() as usize;
        let mut values = exec::map_indexed(exec, 2 * half + 1, |i| {
            ils_value(win, axis, (i as f64 - half as f64) * step)
        });
        let area: f64 = values.iter().sum::<f64>() * step;
        for v in &mut values {
            *v /= area;
        }
        Ok(Self { step, values, fwhm })
    }

    pub fn half_len(&self) -> usize {
        self.values.len() / 2
    }
}

/// Correlation of spectral noise between bins `lag·bin_step` apart:
/// ρ(Δ) = Σ w² cos(2πΔx) / Σ w², for lags `0..=max_lag`.
pub fn noise_correlation(win: &ApodizationWindow, axis: &OpdAxis, bin_step: f64, max_lag: usize) -> Vec<f64> {
    let w2: Vec<(f64, f64)> = (0..axis.len())
        .map(|i| {
            let x = axis.at(i);
            (x, win.weight(x).powi(2))
        })
        .collect();
    let norm: f64 = w2.iter().map(|p| p.1).sum();
    let rho_at = |lag: usize| {
        let d = lag as f64 * bin_step;
        w2.iter().map(|&(x, w)| w * (2.0 * PI * (d * x).fract()).cos()).sum::<f64>() / norm
    };
    (0..=max_lag).map(|lag| if lag == 0 { 1.0 } else { rho_at(lag) }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interferogram::{from_expected, NoiseConfig, ScanConfig};

    fn ifg_from(f: impl Fn(f64) -> f64, scan: &ScanConfig) -> Interferogram {
        let axis = scan.axis();
        let counts = (0..axis.len()).map(|i| f(axis.at(i))).collect();
        from_expected(counts, scan, &NoiseConfig::noiseless(), 1.0, Exec::Sequential)
    }

    #[test]
    fn boxcar_only_removes_mean() {
        let scan = ScanConfig { opd_max: 0.01, ..Default::default() };
        let ifg = ifg_from(|x| 10.0 + (x * 3000.0).sin(), &scan);
        let out = apodize(&ifg, &ApodizationWindow::boxcar()).unwrap();
        let m = ifg.mean();
        for (a, b) in out.counts.iter().zip(&ifg.counts) {
            assert_eq!(*a, b - m);
        }
    }

    #[test]
    fn gaussian_window_values() {
        let w = ApodizationWindow::gaussian(0.68);
        assert_eq!(w.weight(0.0), 1.0);
        assert!((w.weight(0.34) - 0.5).abs() < 1e-15);
        assert!(ApodizationWindow::gaussian(0.0).validate().is_err());
    }

    #[test]
    fn cosine_peak_lands_on_its_bin() {
        let scan = ScanConfig::default();
        let ifg = ifg_from(|x| 100.0 * (2.0 * PI * 2900.0 * x).cos(), &scan);
        let ap = apodize(&ifg, &ApodizationWindow::boxcar()).unwrap();
        let s = to_spectrum(&ap, 1).unwrap();
        let (ip, _) = s.peak();
        assert!((s.grid.at(ip) - 2900.0).abs() <= s.grid.step());
    }

    #[test]
    fn parseval_identity() {
        let scan = ScanConfig { opd_max: 0.05, ..Default::default() };
        let ifg = ifg_from(|x| (2.0 * PI * 2500.0 * x).cos() + 0.3 * (x * 1e4).sin() + 0.1, &scan);
        let full = transform(&ifg, 1).unwrap();
        let lhs: f64 = ifg.counts.iter().map(|c| c * c).sum();
        let mean_psd = full.iter().map(|v| v.norm_sqr()).sum::<f64>() / full.len() as f64;
        assert!((lhs - mean_psd).abs() <= 1e-10 * lhs);
    }

    #[test]
    fn ils_examples() {
        let g = ils_fwhm(&ApodizationWindow::gaussian(0.68), 0.8);
        assert!((g - 1.30).abs() < 0.005, "{g}");
        let b = ils_fwhm(&ApodizationWindow::boxcar(), 1.207);
        assert!((b - 0.5).abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for f in [0.1, 1.0, 10.0, 100.0, 1e4] {
            let v = ils_fwhm(&ApodizationWindow::gaussian(f), 1.0);
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn kernel_is_unit_area_and_symmetric() {
        let axis = ScanConfig::default().axis();
        let k = IlsKernel::from_window(&ApodizationWindow::default(), &axis, 0.02).unwrap();
        let area: f64 = k.values.iter().sum::<f64>() * k.step;
        assert!((area - 1.0).abs() < 1e-12);
        let n = k.values.len();
        for i in 0..n / 2 {
            assert!((k.values[i] - k.values[n - 1 - i]).abs() < 1e-12 * k.values[n / 2]);
        }
    }

    #[test]
    fn noise_correlation_starts_at_one_and_decays() {
        let axis = ScanConfig::default().axis();
        let rho = noise_correlation(&ApodizationWindow::default(), &axis, 0.156, 60);
        assert_eq!(rho.len(), 61);
        assert_eq!(rho[0], 1.0);
        assert!(rho[1] < 1.0 && rho[1] > 0.9);
        // Squared window is a Gaussian of FWHM 0.68/√2 cm; its transform is ~1.8 cm⁻¹ wide.
        assert!(rho[60].abs() < 1e-3);
    }
}
