//! Forward model of the detected signal-light interferogram.
//!
//! Expected counts at optical path difference x are
//!
//! ```text
//! N(x) = t·k · Σ_ν s(ν)Δν · ½[1 + V(ν) cos(2πνx + φ(ν))] + b·t·k
//! ```
//!
//! with dwell time t, k averaged scans, detected pair density s, visibility
//! V = V_max·τ, dispersion phase φ and detector background b. All OPD axes
//! are optical path difference, i.e. twice the idler-mirror displacement.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rustfft::FftPlanner;
use thiserror::Error;

use crate::exec::{self, Exec};
use crate::grid::{Spectrum, WavenumberGrid};
use crate::optics::{SpdcConfig, TransmissionCurve};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InterferogramError {
    #[error("source spectrum and transmission curve are on different grids")]
    GridMismatch,
    #[error("OPD step {step} cm exceeds the Nyquist limit {limit} cm for {nu_max} cm⁻¹")]
    NyquistViolation { step: f64, limit: f64, nu_max: f64 },
    #[error("interferogram axes or scan settings differ")]
    AxisMismatch,
    #[error("nothing to average")]
    Empty,
    #[error("invalid scan: {0}")]
    InvalidScan(String),
    #[error("OPD axis is not uniform and symmetric about zero")]
    BadAxis,
    #[error("amplitude transmission {0} outside [0, 1]")]
    TransmissionOutOfRange(f64),
    #[error("fringe fit is singular")]
    SingularFit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    /// Scan covers OPD ∈ [−opd_max, +opd_max], cm.
    pub opd_max: f64,
    /// cm
    pub opd_step: f64,
    /// Integration time per OPD sample and scan, s.
    pub dwell_time: f64,
    pub scans_to_average: u32,
}

impl Default for ScanConfig {
    /// 0.8 cm OPD at 1 µm steps; the 16 001 samples of one scan take 7.6 s.
    fn default() -> Self {
        let opd_max = 0.8;
        let opd_step = 1e-4;
        let samples = 2.0 * (opd_max / opd_step as f64).round() + 1.0;
        Self { opd_max, opd_step, dwell_time: 7.6 / samples, scans_to_average: 50 }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<(), InterferogramError> {
        let bad = |m: &str| Err(InterferogramError::InvalidScan(m.to_string()));
        if !(self.opd_max > 0.0) {
            return bad("opd_max must be positive");
        }
        if !(self.opd_step > 0.0 && self.opd_step <= self.opd_max) {
            return bad("opd_step must be positive and at most opd_max");
        }
        if !(self.dwell_time > 0.0) {
            return bad("dwell time must be positive");
        }
        if self.scans_to_average == 0 {
            return bad("at least one scan is required");
        }
        Ok(())
    }

    pub fn axis(&self) -> OpdAxis {
        OpdAxis { step: self.opd_step, half_len: (self.opd_max / self.opd_step).round() as usize }
    }

    /// Largest wavenumber sampled without aliasing, cm⁻¹.
    pub fn nyquist_wavenumber(&self) -> f64 {
        1.0 / (2.0 * self.opd_step)
    }

    /// Total integration time per OPD sample over all averaged scans, s.
    pub fn integration_time(&self) -> f64 {
        self.dwell_time * self.scans_to_average as f64
    }
}

/// Symmetric uniform axis `x_j = j·step`, `j ∈ [−half_len, half_len]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpdAxis {
    pub step: f64,
    pub half_len: usize,
}

impl OpdAxis {
    pub fn len(&self) -> usize {
        2 * self.half_len + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn at(&self, i: usize) -> f64 {
        (i as f64 - self.half_len as f64) * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.at(i)).collect()
    }

    pub fn opd_max(&self) -> f64 {
        self.half_len as f64 * self.step
    }

    /// Recover the axis from explicit OPD values (e.g. read from a file).
    pub fn from_points(points: &[f64]) -> Result<Self, InterferogramError> {
        let n = points.len();
        if n < 3 || n % 2 == 0 {
            return Err(InterferogramError::BadAxis);
        }
        let half_len = n / 2;
        let step = (points[n - 1] - points[0]) / (n - 1) as f64;
        if !(step > 0.0) {
            return Err(InterferogramError::BadAxis);
        }
        let axis = Self { step, half_len };
        let tol = 1e-6 * step;
        if points.iter().enumerate().any(|(i, &x)| (x - axis.at(i)).abs() > tol) {
            return Err(InterferogramError::BadAxis);
        }
        Ok(axis)
    }
}

/// Quadratic spectral phase φ(ν) = β₂ (ν − ν₀)² standing in for crystal dispersion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionConfig {
    /// rad·cm²
    pub beta2: f64,
    /// cm⁻¹
    pub center: f64,
}

impl Default for DispersionConfig {
    fn default() -> Self {
        Self { beta2: 2.0e-5, center: 2900.0 }
    }
}

impl DispersionConfig {
    pub fn none() -> Self {
        Self { beta2: 0.0, ..Self::default() }
    }

    #[inline]
    pub fn phase(&self, nu: f64) -> f64 {
        let d = nu - self.center;
        self.beta2 * d * d
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    pub enabled: bool,
    pub rng_seed: u64,
    /// Additive detector background, counts/s.
    pub detector_background: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { enabled: true, rng_seed: 20_220_901, detector_background: 0.0 }
    }
}

impl NoiseConfig {
    pub fn noiseless() -> Self {
        Self { enabled: false, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterferogramMeta {
    pub scan: ScanConfig,
    pub noise: NoiseConfig,
    pub enhancement: f64,
    /// Number of interferograms averaged into this one.
    pub averaged: usize,
    /// Free-form `key = value` provenance, kept in insertion order.
    pub provenance: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interferogram {
    pub axis: OpdAxis,
    /// Detected signal photons per OPD sample, summed over the averaged scans.
    pub counts: Vec<f64>,
    pub meta: InterferogramMeta,
}

impl Interferogram {
    pub fn opd(&self) -> Vec<f64> {
        self.axis.points()
    }

    pub fn mean(&self) -> f64 {
        self.counts.iter().sum::<f64>() / self.counts.len() as f64
    }

    /// Sample nearest to zero OPD.
    pub fn center_value(&self) -> f64 {
        self.counts[self.axis.half_len]
    }
}

/// How the cosine sum over the wavenumber grid is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SynthesisMethod {
    /// FFT when the grid and OPD steps are commensurate, direct summation otherwise.
    #[default]
    Auto,
    /// Horner evaluation per OPD sample; parallel over samples.
    Direct,
    /// One inverse FFT of length 1/(Δν·Δx). Fails over to `Direct` when not applicable.
    Fft,
}

const MAX_FFT_LEN: usize = 1 << 24;

fn fft_length(grid: &WavenumberGrid, step: f64) -> Option<usize> {
    let inv = 1.0 / (grid.step() * step);
    let n = inv.round();
    ((inv - n).abs() <= 1e-9 * n && n >= 1.0 && n as usize <= MAX_FFT_LEN).then_some(n as usize)
}

/// Complex fringe weights a_k = ½ t·k · s_kΔν · V_k · e^{iφ_k} and the DC level.
fn fringe_weights(
    spdc: &Spectrum,
    tau: &TransmissionCurve,
    cfg: &SpdcConfig,
    disp: &DispersionConfig,
    scan: &ScanConfig,
    background: f64,
) -> Result<(Vec<Complex64>, f64), InterferogramError> {
    let t = scan.integration_time();
    let dnu = spdc.grid.step();
    let mut dc = 0.0;
    let mut weights = Vec::with_capacity(spdc.grid.len());
    for (k, (&s, &tr)) in spdc.values.iter().zip(&tau.tau_roundtrip).enumerate() {
        if !(0.0..=1.0).contains(&tr) {
            return Err(InterferogramError::TransmissionOutOfRange(tr));
        }
        let half = 0.5 * t * s * dnu;
        dc += half;
        let v = cfg.max_visibility * tr;
        weights.push(Complex64::from_polar(half * v, disp.phase(spdc.grid.at(k))));
    }
    Ok((weights, dc + background * t))
}

/// Noiseless expected counts on the scan axis.
pub fn expected_counts(
    spdc: &Spectrum,
    tau: &TransmissionCurve,
    cfg: &SpdcConfig,
    disp: &DispersionConfig,
    scan: &ScanConfig,
    background: f64,
) -> Result<Vec<f64>, InterferogramError> {
    expected_counts_with(Exec::default(), SynthesisMethod::Auto, spdc, tau, cfg, disp, scan, background)
}

#[allow(clippy::too_many_arguments)]
pub fn expected_counts_with(
    exec: Exec,
    method: SynthesisMethod,
    spdc: &Spectrum,
    tau: &TransmissionCurve,
    cfg: &SpdcConfig,
    disp: &DispersionConfig,
    scan: &ScanConfig,
    background: f64,
) -> Result<Vec<f64>, InterferogramError> {
    scan.validate()?;
    if !spdc.grid.matches(&tau.grid) {
        return Err(InterferogramError::GridMismatch);
    }
    let nu_max = spdc.grid.stop();
    if nu_max > scan.nyquist_wavenumber() {
        return Err(InterferogramError::NyquistViolation {
            step: scan.opd_step,
            limit: 1.0 / (2.0 * nu_max),
            nu_max,
        });
    }
    let (weights, dc) = fringe_weights(spdc, tau, cfg, disp, scan, background)?;
    let axis = scan.axis();
    let fft_len = match method {
        SynthesisMethod::Direct => None,
        _ => fft_length(&spdc.grid, scan.opd_step),
    };
    let modulation = match fft_len {
        Some(n) => modulation_fft(&weights, &spdc.grid, &axis, n),
        None => modulation_direct(exec, &weights, &spdc.grid, &axis),
    };
    Ok(modulation.into_iter().map(|m| dc + m).collect())
}

/// Re Σ_k a_k e^{i2π(ν₀ + kΔν)x_j} by Horner's rule in z = e^{i2πΔν x_j}.
fn modulation_direct(exec: Exec, weights: &[Complex64], grid: &WavenumberGrid, axis: &OpdAxis) -> Vec<f64> {
    exec::map_indexed(exec, axis.len(), |j| {
        let x = axis.at(j);
        let z = Complex64::from_polar(1.0, 2.0 * PI * (grid.step() * x).fract());
        let mut acc = Complex64::new(0.0, 0.0);
        for &a in weights.iter().rev() {
            acc = acc * z + a;
        }
        let offset = Complex64::from_polar(1.0, 2.0 * PI * (grid.start() * x).fract());
        (acc * offset).re
    })
}

/// Same sum through one inverse FFT: with Δν·Δx = 1/N the phases repeat with period N.
fn modulation_fft(weights: &[Complex64], grid: &WavenumberGrid, axis: &OpdAxis, n: usize) -> Vec<f64> {
    let start_bins = grid.start() / grid.step();
    let aligned = (start_bins - start_bins.round()).abs() < 1e-6;
    let k0 = if aligned { start_bins.round() as i64 } else { 0 };
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (k, &a) in weights.iter().enumerate() {
        buf[(k0 + k as i64).rem_euclid(n as i64) as usize] += a;
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    (0..axis.len())
        .map(|i| {
            let j = i as i64 - axis.half_len as i64;
            let v = buf[j.rem_euclid(n as i64) as usize];
            if aligned {
                v.re
            } else {
                (v * Complex64::from_polar(1.0, 2.0 * PI * (grid.start() * axis.at(i)).fract())).re
            }
        })
        .collect()
}

/// Independent Poisson draw per sample; sample `i` always uses ChaCha stream `i` of the seed.
pub fn draw_counts(exec: Exec, expected: &[f64], seed: u64) -> Vec<f64> {
    let base = ChaCha8Rng::seed_from_u64(seed);
    exec::map_indexed(exec, expected.len(), |i| {
        let lambda = expected[i];
        if !(lambda > 0.0) {
            return 0.0;
        }
        let mut rng = base.clone();
        rng.set_stream(i as u64);
        rng.set_word_pos(0);
        match Poisson::new(lambda) {
            Ok(p) => p.sample(&mut rng),
            // Beyond the sampler's range the normal limit is exact to many digits.
            Err(_) => lambda,
        }
    })
}

/// Full forward model: expected counts, then shot noise if enabled.
#[allow(clippy::too_many_arguments)]
pub fn synthesize(
    spdc: &Spectrum,
    tau: &TransmissionCurve,
    cfg: &SpdcConfig,
    disp: &DispersionConfig,
    scan: &ScanConfig,
    noise: &NoiseConfig,
    enhancement: f64,
) -> Result<Interferogram, InterferogramError> {
    let expected = expected_counts(spdc, tau, cfg, disp, scan, noise.detector_background)?;
    Ok(from_expected(expected, scan, noise, enhancement, Exec::default()))
}

/// Wrap precomputed expected counts, drawing shot noise when enabled.
pub fn from_expected(expected: Vec<f64>, scan: &ScanConfig, noise: &NoiseConfig, enhancement: f64, exec: Exec) -> Interferogram {
    let counts = if noise.enabled { draw_counts(exec, &expected, noise.rng_seed) } else { expected };
    Interferogram {
        axis: scan.axis(),
        counts,
        meta: InterferogramMeta { scan: *scan, noise: *noise, enhancement, averaged: 1, provenance: Vec::new() },
    }
}

/// Pointwise mean of interferograms recorded with identical axes and scan settings.
pub fn average(scans: &[Interferogram]) -> Result<Interferogram, InterferogramError> {
    let first = scans.first().ok_or(InterferogramError::Empty)?;
    for s in &scans[1..] {
        if s.axis != first.axis || s.meta.scan != first.meta.scan || s.counts.len() != first.counts.len() {
            return Err(InterferogramError::AxisMismatch);
        }
    }
    let k = scans.len() as f64;
    let counts = (0..first.counts.len())
        .map(|i| scans.iter().map(|s| s.counts[i]).sum::<f64>() / k)
        .collect();
    let mut meta = first.meta.clone();
    meta.averaged = scans.iter().map(|s| s.meta.averaged).sum();
    Ok(Interferogram { axis: first.axis, counts, meta })
}

/// Fringe contrast at `nu0` from a linear fit of `a + b cos(2πν₀x) + c sin(2πν₀x)`
/// over |x| ≤ `half_window`; returns √(b² + c²)/a.
pub fn fringe_contrast(ifg: &Interferogram, nu0: f64, half_window: f64) -> Result<f64, InterferogramError> {
    let mut ata = nalgebra::Matrix3::<f64>::zeros();
    let mut atb = nalgebra::Vector3::<f64>::zeros();
    for (i, &y) in ifg.counts.iter().enumerate() {
        let x = ifg.axis.at(i);
        if x.abs() > half_window {
            continue;
        }
        let ph = 2.0 * PI * nu0 * x;
        let row = nalgebra::Vector3::new(1.0, ph.cos(), ph.sin());
        ata += row * row.transpose();
        atb += row * y;
    }
    let sol = ata.lu().solve(&atb).ok_or(InterferogramError::SingularFit)?;
    Ok((sol[1] * sol[1] + sol[2] * sol[2]).sqrt() / sol[0])
}

/// Magnitude of the analytic signal of the mean-free interferogram.
pub fn envelope(ifg: &Interferogram) -> Vec<f64> {
    let n = ifg.counts.len();
    let mean = ifg.mean();
    let mut buf: Vec<Complex64> = ifg.counts.iter().map(|&c| Complex64::new(c - mean, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        if k == 0 || (n % 2 == 0 && k == n / 2) {
            continue;
        } else if k < n.div_ceil(2) {
            *v *= 2.0;
        } else {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|v| v.norm() / n as f64).collect()
}

/// Full width at half maximum of the centerburst envelope, cm of OPD.
pub fn envelope_fwhm(ifg: &Interferogram) -> f64 {
    let env = envelope(ifg);
    let (imax, &peak) = env
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("interferogram is never empty");
    let half = 0.5 * peak;
    let crossing = |dir: isize| -> f64 {
        let mut i = imax as isize;
        loop {
            let next = i + dir;
            if next < 0 || next as usize >= env.len() {
                return ifg.axis.at(i as usize);
            }
            let (a, b) = (env[i as usize], env[next as usize]);
            if b < half {
                let frac = (a - half) / (a - b);
                return ifg.axis.at(i as usize) + dir as f64 * frac * ifg.axis.step;
            }
            i = next;
        }
    };
    crossing(1) - crossing(-1)
}
