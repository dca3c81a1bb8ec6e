//! Transmission quotient, 100 %-line SNR and concentration fitting.
//!
//! The quotient is taken on amplitude spectra. The fringe visibility at ν̃ is
//! proportional to the round-trip amplitude transmission exp(−cαL), the
//! transform amplitude is proportional to the fringe weight, so
//! sample/reference amplitude is exp(−cαL) seen through the ILS. A PSD
//! quotient would square that factor and double every fitted concentration.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::fts::{self, AmplitudeSpectrum, ApodizationWindow, FtsError, IlsKernel, WindowKind};
use crate::grid::WavenumberGrid;
use crate::interferogram::OpdAxis;
use crate::linelist::AbsorptionSpectrum;

/// Reported when the 100 % line has zero variance.
pub const SNR_CAP: f64 = 1e12;

pub const DEFAULT_THRESHOLD: f64 = 0.1;

const MAX_ITERATIONS: usize = 100;
const STEP_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RetrievalError {
    #[error("sample and reference spectra are on different grids")]
    GridMismatch,
    #[error("no bins reach {threshold} of the reference peak")]
    EmptyValidBand { threshold: f64 },
    #[error("window {lo}..{hi} cm-1 is not inside the valid band {band_lo}..{band_hi} cm-1")]
    WindowOutsideBand { lo: f64, hi: f64, band_lo: f64, band_hi: f64 },
    #[error("ILS kernel ({kernel} points) is wider than the modeled band ({band} points)")]
    KernelWiderThanBand { kernel: usize, band: usize },
    #[error("fit band has {bins} bins for {params} parameters")]
    TooFewBins { bins: usize, params: usize },
    #[error("normal matrix is singular")]
    SingularNormalMatrix,
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Fts(#[from] FtsError),
}

/// Sample/reference amplitude quotient. `t` is NaN outside `valid`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionSpectrum {
    pub grid: WavenumberGrid,
    pub t: Vec<f64>,
    /// Bin indices of the valid band.
    pub valid: Range<usize>,
}

impl TransmissionSpectrum {
    pub fn valid_band(&self) -> (f64, f64) {
        (self.grid.at(self.valid.start), self.grid.at(self.valid.end - 1))
    }

    /// Bins of `[lo, hi]`, or an error unless they lie inside the valid band.
    pub fn bins_within(&self, lo: f64, hi: f64) -> Result<Range<usize>, RetrievalError> {
        let (band_lo, band_hi) = self.valid_band();
        let r = self.grid.index_range(lo, hi);
        if lo < band_lo || hi > band_hi || r.is_empty() {
            return Err(RetrievalError::WindowOutsideBand { lo, hi, band_lo, band_hi });
        }
        Ok(r)
    }
}

pub fn transmission(
    sample: &AmplitudeSpectrum,
    reference: &AmplitudeSpectrum,
    threshold: f64,
) -> Result<TransmissionSpectrum, RetrievalError> {
    if !sample.grid.matches(&reference.grid) || sample.amplitude.len() != reference.amplitude.len() {
        return Err(RetrievalError::GridMismatch);
    }
    let (_, peak) = reference.peak();
    if !(peak > 0.0) || !(threshold > 0.0 && threshold <= 1.0) {
        return Err(RetrievalError::EmptyValidBand { threshold });
    }
    let (lo, hi) = reference.band_above(threshold);
    let valid = lo..hi + 1;
    let t = (0..reference.amplitude.len())
        .map(|i| if valid.contains(&i) { sample.amplitude[i] / reference.amplitude[i] } else { f64::NAN })
        .collect();
    Ok(TransmissionSpectrum { grid: reference.grid, t, valid })
}

/// 1/σ of `t` over a feature-free window. The window must not contain absorption lines; that is not checked.
pub fn snr_100line(t: &TransmissionSpectrum, window: (f64, f64)) -> Result<f64, RetrievalError> {
    let bins = t.bins_within(window.0, window.1)?;
    let v = &t.t[bins];
    if v.len() < 2 {
        return Err(RetrievalError::Domain("SNR window holds fewer than two bins".into()));
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Ok(if var > 0.0 { (1.0 / var.sqrt()).min(SNR_CAP) } else { SNR_CAP })
}

/// Shot-noise scaling of the SNR with pump enhancement.
pub fn snr_scaling(snr_ref: f64, e_ref: f64, e_new: f64) -> Result<f64, RetrievalError> {
    if !(snr_ref > 0.0 && e_ref > 0.0 && e_new > 0.0) {
        return Err(RetrievalError::Domain(format!(
            "SNR scaling needs positive inputs, got snr {snr_ref}, E {e_ref} -> {e_new}"
        )));
    }
    Ok(snr_ref * (e_new / e_ref).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesModel {
    pub name: String,
    pub alpha: AbsorptionSpectrum,
}

/// Everything the forward model T_th(c) needs besides the concentrations.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelContext {
    pub species: Vec<SpeciesModel>,
    pub cell_length: f64,
    pub ils: IlsKernel,
    /// Window and scan behind the spectra, used to correlate bin noise in the uncertainty.
    pub instrument: Option<(ApodizationWindow, OpdAxis)>,
}

impl ModelContext {
    pub fn new(species: Vec<SpeciesModel>, cell_length: f64, ils: IlsKernel) -> Result<Self, RetrievalError> {
        let Some(first) = species.first() else {
            return Err(RetrievalError::Domain("model needs at least one species".into()));
        };
        if !(cell_length > 0.0) {
            return Err(RetrievalError::Domain(format!("cell length {cell_length} cm must be positive")));
        }
        let grid = first.alpha.grid;
        if species.iter().any(|s| !s.alpha.grid.matches(&grid)) {
            return Err(RetrievalError::GridMismatch);
        }
        if ((ils.step - grid.step()) / grid.step()).abs() > 1e-9 {
            return Err(RetrievalError::Domain(format!(
                "ILS step {} differs from absorption grid step {}",
                ils.step,
                grid.step()
            )));
        }
        let area: f64 = ils.values.iter().sum::<f64>() * ils.step;
        if (area - 1.0).abs() > 1e-9 {
            return Err(RetrievalError::Domain(format!("ILS kernel area {area} is not 1")));
        }
        Ok(Self { species, cell_length, ils, instrument: None })
    }

    /// Kernel from the apodization window over the scan, on the absorption grid step.
    pub fn from_window(
        species: Vec<SpeciesModel>,
        cell_length: f64,
        win: &ApodizationWindow,
        axis: &OpdAxis,
    ) -> Result<Self, RetrievalError> {
        let step = species
            .first()
            .map(|s| s.alpha.grid.step())
            .ok_or_else(|| RetrievalError::Domain("model needs at least one species".into()))?;
        let ils = IlsKernel::from_window(win, axis, step)?;
        let mut ctx = Self::new(species, cell_length, ils)?;
        ctx.instrument = Some((*win, *axis));
        Ok(ctx)
    }

    pub fn fine_grid(&self) -> WavenumberGrid {
        self.species[0].alpha.grid
    }

    /// Same context restricted to the named species, in the given order.
    pub fn select(&self, names: &[&str]) -> Result<Self, RetrievalError> {
        let species = names
            .iter()
            .map(|n| {
                self.species
                    .iter()
                    .find(|s| s.name == *n)
                    .cloned()
                    .ok_or_else(|| RetrievalError::Domain(format!("no absorption model for species {n:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { species, ..self.clone() })
    }
}

/// Forward model restricted to the fine-grid stretch that a set of bins needs.
struct Evaluator<'a> {
    ctx: &'a ModelContext,
    fine: Range<usize>,
    bins: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    fn new(ctx: &'a ModelContext, bins: Vec<f64>) -> Result<Self, RetrievalError> {
        let grid = ctx.fine_grid();
        let (lo, hi) = bins
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let margin = (ctx.ils.half_len() + 3) as f64 * grid.step();
        let fine = grid.index_range(lo - margin, hi + margin);
        if ctx.ils.values.len() > fine.len() {
            return Err(RetrievalError::KernelWiderThanBand { kernel: ctx.ils.values.len(), band: fine.len() });
        }
        Ok(Self { ctx, fine, bins })
    }

    /// Discrete convolution with the kernel, edges replicated.
    fn convolve(&self, x: &[f64]) -> Vec<f64> {
        let k = &self.ctx.ils.values;
        let h = self.ctx.ils.half_len() as isize;
        let n = x.len() as isize;
        let step = self.ctx.ils.step;
        (0..n)
            .map(|i| {
                let mut acc = 0.0;
                for (m, &w) in k.iter().enumerate() {
                    let j = (i + m as isize - h).clamp(0, n - 1);
                    acc += w * x[j as usize];
                }
                acc * step
            })
            .collect()
    }

    /// Four-point Lagrange interpolation of a fine-grid curve at the bins.
    fn sample(&self, fine_values: &[f64]) -> Vec<f64> {
        let grid = self.ctx.fine_grid();
        let x0 = grid.at(self.fine.start);
        let n = fine_values.len() as isize;
        self.bins
            .iter()
            .map(|&nu| {
                let u = (nu - x0) / grid.step();
                let i = (u.floor() as isize).clamp(1, n - 3);
                let f = u - i as f64;
                let p = |d: isize| fine_values[(i + d) as usize];
                let w_m1 = -f * (f - 1.0) * (f - 2.0) / 6.0;
                let w_0 = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
                let w_1 = -(f + 1.0) * f * (f - 2.0) / 2.0;
                let w_2 = (f + 1.0) * f * (f - 1.0) / 6.0;
                w_m1 * p(-1) + w_0 * p(0) + w_1 * p(1) + w_2 * p(2)
            })
            .collect()
    }

    fn exponent_factor(&self, c: &[f64]) -> Vec<f64> {
        let l = self.ctx.cell_length;
        self.fine
            .clone()
            .map(|j| {
                let e: f64 = self.ctx.species.iter().zip(c).map(|(s, ck)| ck * s.alpha.alpha[j]).sum();
                (-e * l).exp()
            })
            .collect()
    }

    fn model(&self, c: &[f64]) -> Vec<f64> {
        self.sample(&self.convolve(&self.exponent_factor(c)))
    }

    /// Model and its Jacobian columns ∂T/∂c_k = f * (−α_k L e^{−ΣcαL}).
    fn model_and_jacobian(&self, c: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let e = self.exponent_factor(c);
        let l = self.ctx.cell_length;
        let m = self.sample(&self.convolve(&e));
        let jac = self
            .ctx
            .species
            .iter()
            .map(|s| {
                let d: Vec<f64> = self.fine.clone().zip(&e).map(|(j, ej)| -s.alpha.alpha[j] * l * ej).collect();
                self.sample(&self.convolve(&d))
            })
            .collect();
        (m, jac)
    }
}

fn check_concentrations(c: &[f64], ctx: &ModelContext) -> Result<(), RetrievalError> {
    if c.len() != ctx.species.len() {
        return Err(RetrievalError::Domain(format!(
            "{} concentrations for {} species",
            c.len(),
            ctx.species.len()
        )));
    }
    if let Some(bad) = c.iter().find(|v| !v.is_finite()) {
        return Err(RetrievalError::Domain(format!("concentration {bad} is not finite")));
    }
    Ok(())
}

/// T_th(ν̃) = [exp(−Σ_k c_k α_k L) * f](ν̃) evaluated at `points`.
pub fn model_transmission(c: &[f64], ctx: &ModelContext, points: &[f64]) -> Result<Vec<f64>, RetrievalError> {
    check_concentrations(c, ctx)?;
    if let Some(bad) = c.iter().find(|v| **v < 0.0) {
        return Err(RetrievalError::Domain(format!("concentration {bad} is negative")));
    }
    if points.is_empty() {
        return Ok(Vec::new());
    }
    Ok(Evaluator::new(ctx, points.to_vec())?.model(c))
}

/// Model on the fine absorption grid itself over `[lo, hi]`, before interpolation.
pub fn model_transmission_fine(c: &[f64], ctx: &ModelContext, lo: f64, hi: f64) -> Result<FineCurve, RetrievalError> {
    check_concentrations(c, ctx)?;
    let grid = ctx.fine_grid();
    let r = grid.index_range(lo, hi);
    let ev = Evaluator::new(ctx, vec![grid.at(r.start), grid.at(r.end - 1)])?;
    let full = ev.convolve(&ev.exponent_factor(c));
    let off = r.start - ev.fine.start;
    Ok(FineCurve { start: r.start, values: full[off..off + r.len()].to_vec() })
}

/// Values on a contiguous index range of the fine grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FineCurve {
    pub start: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub species: Vec<String>,
    pub concentrations: Vec<f64>,
    /// One standard error.
    pub sigmas: Vec<f64>,
    pub band: (f64, f64),
    /// Bin wavenumbers of the fit band.
    pub wavenumbers: Vec<f64>,
    /// Measured minus model per bin.
    pub residuals: Vec<f64>,
    /// Residual sum of squares over (bins − parameters).
    pub reduced_chi2: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn fit_bins(t: &TransmissionSpectrum, band: (f64, f64), params: usize) -> Result<(Vec<f64>, Vec<f64>), RetrievalError> {
    let bins = t.bins_within(band.0, band.1)?;
    if bins.len() <= params {
        return Err(RetrievalError::TooFewBins { bins: bins.len(), params });
    }
    let nu = bins.clone().map(|i| t.grid.at(i)).collect();
    let y = t.t[bins].to_vec();
    Ok((nu, y))
}

/// Σ_bins (t − T_th(c))² over the band.
pub fn objective(c: &[f64], t: &TransmissionSpectrum, ctx: &ModelContext, band: (f64, f64)) -> Result<f64, RetrievalError> {
    check_concentrations(c, ctx)?;
    let (nu, y) = fit_bins(t, band, c.len())?;
    let m = Evaluator::new(ctx, nu)?.model(c);
    Ok(y.iter().zip(&m).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// Analytic gradient of [`objective`]: −2 Jᵀ r.
pub fn objective_gradient(
    c: &[f64],
    t: &TransmissionSpectrum,
    ctx: &ModelContext,
    band: (f64, f64),
) -> Result<Vec<f64>, RetrievalError> {
    check_concentrations(c, ctx)?;
    let (nu, y) = fit_bins(t, band, c.len())?;
    let (m, jac) = Evaluator::new(ctx, nu)?.model_and_jacobian(c);
    Ok(jac
        .iter()
        .map(|col| -2.0 * col.iter().zip(y.iter().zip(&m)).map(|(j, (a, b))| j * (a - b)).sum::<f64>())
        .collect())
}

/// Noise correlation between bins of the given spacing, or white noise when unknown.
fn bin_correlation(ctx: &ModelContext, bin_step: f64) -> Vec<f64> {
    let Some((win, axis)) = &ctx.instrument else {
        return vec![1.0];
    };
    // Reach of the squared window's transform; boxcar tails fall off slowly, so allow more lags.
    let reach = match win.kind {
        WindowKind::Gaussian => 6.0 * fts::ils_fwhm(&ApodizationWindow::gaussian(win.fwhm / 2f64.sqrt()), 0.0),
        WindowKind::Boxcar => 20.0 * fts::ils_fwhm(win, axis.opd_max()),
    };
    let max_lag = ((reach / bin_step).ceil() as usize).max(1);
    fts::noise_correlation(win, axis, bin_step, max_lag)
}

/// Levenberg–Marquardt on Σ (t − T_th(c))².
///
/// Stops when every component's relative step falls below 1e-8, or after
/// 100 iterations with `converged = false`. The covariance is the sandwich
/// s² A⁻¹ (Jᵀ R J) A⁻¹ with A = JᵀJ, s² the residual variance and R the
/// bin-to-bin noise correlation implied by zero-filling and apodization;
/// with white noise it reduces to s² A⁻¹.
pub fn fit_concentration(
    t: &TransmissionSpectrum,
    ctx: &ModelContext,
    init: &[f64],
    band: (f64, f64),
) -> Result<FitResult, RetrievalError> {
    check_concentrations(init, ctx)?;
    if let Some(bad) = init.iter().find(|v| **v < 0.0) {
        return Err(RetrievalError::Domain(format!("initial concentration {bad} is negative")));
    }
    let p = init.len();
    let (nu, y) = fit_bins(t, band, p)?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(RetrievalError::Domain("transmission is not finite inside the fit band".into()));
    }
    let ev = Evaluator::new(ctx, nu.clone())?;
    let n = y.len();

    let ssr_of = |m: &[f64]| y.iter().zip(m).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    let normal = |jac: &[Vec<f64>], m: &[f64]| {
        let a = DMatrix::from_fn(p, p, |i, k| jac[i].iter().zip(&jac[k]).map(|(u, v)| u * v).sum::<f64>());
        let g = DVector::from_fn(p, |i, _| jac[i].iter().zip(y.iter().zip(m)).map(|(j, (a, b))| j * (a - b)).sum::<f64>());
        (a, g)
    };

    let mut c = init.to_vec();
    let (mut m, mut jac) = ev.model_and_jacobian(&c);
    let mut ssr = ssr_of(&m);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (a, g) = normal(&jac, &m);
        if a.diagonal().iter().all(|d| *d == 0.0) {
            return Err(RetrievalError::SingularNormalMatrix);
        }
        let mut accepted = false;
        while lambda < 1e16 {
            let mut damped = a.clone();
            for i in 0..p {
                damped[(i, i)] += lambda * a[(i, i)].max(f64::MIN_POSITIVE);
            }
            let Some(step) = damped.lu().solve(&g) else {
                return Err(RetrievalError::SingularNormalMatrix);
            };
            let trial: Vec<f64> = c.iter().zip(step.iter()).map(|(ci, s)| ci + s).collect();
            let m_trial = ev.model(&trial);
            let ssr_trial = ssr_of(&m_trial);
            let small = c
                .iter()
                .zip(step.iter())
                .all(|(ci, s)| s.abs() <= STEP_TOLERANCE * ci.abs().max(f64::MIN_POSITIVE));
            if ssr_trial <= ssr {
                c = trial;
                ssr = ssr_trial;
                lambda = (lambda * 0.1).max(1e-12);
                accepted = true;
                if small {
                    converged = true;
                }
                break;
            }
            if small {
                converged = true;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted && !converged {
            // No descent direction left at any damping: already at the minimum to working precision.
            converged = true;
        }
        (m, jac) = ev.model_and_jacobian(&c);
        if converged {
            break;
        }
    }

    let (a, _) = normal(&jac, &m);
    let a_inv = a.clone().try_inverse().ok_or(RetrievalError::SingularNormalMatrix)?;
    let dof = (n - p) as f64;
    let s2 = ssr / dof;
    let rho = bin_correlation(ctx, t.grid.step());
    let mut meat = DMatrix::<f64>::zeros(p, p);
    for i in 0..p {
        for k in 0..p {
            let (ji, jk) = (&jac[i], &jac[k]);
            let mut acc: f64 = ji.iter().zip(jk).map(|(u, v)| u * v).sum();
            for (lag, &r) in rho.iter().enumerate().skip(1) {
                if lag >= n {
                    break;
                }
                let cross: f64 = (0..n - lag).map(|q| ji[q] * jk[q + lag] + ji[q + lag] * jk[q]).sum();
                acc += r * cross;
            }
            meat[(i, k)] = acc;
        }
    }
    let cov = &a_inv * meat * &a_inv * s2;
    let sigmas = (0..p).map(|i| cov[(i, i)].max(0.0).sqrt()).collect();
    let residuals = y.iter().zip(&m).map(|(a, b)| a - b).collect();

    Ok(FitResult {
        species: ctx.species.iter().map(|s| s.name.clone()).collect(),
        concentrations: c,
        sigmas,
        band,
        wavenumbers: nu,
        residuals,
        reduced_chi2: s2,
        iterations,
        converged,
    })
}
