//! End-to-end experiment: configuration in, interferograms, spectra and fits out.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use thiserror::Error;

use crate::config::{ConfigError, GasConfig, RunConfig};
use crate::exec::Exec;
use crate::fts::{self, AmplitudeSpectrum, FtsError};
use crate::grid::{Spectrum, WavenumberGrid};
use crate::interferogram::{self, Interferogram, InterferogramError, NoiseConfig, SynthesisMethod};
use crate::io::InstrumentInfo;
use crate::linelist::{self, AbsorptionSpectrum, GasConditions, LineList, LineListError};
use crate::optics::{self, OpticsError, TransmissionCurve};
use crate::retrieval::{self, FitResult, ModelContext, RetrievalError, SpeciesModel, TransmissionSpectrum};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error(transparent)]
    LineList(#[from] LineListError),
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error(transparent)]
    Interferogram(#[from] InterferogramError),
    #[error(transparent)]
    Fts(#[from] FtsError),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
}

/// Mixes a tag into a seed (splitmix64 finalizer) so that derived noise streams never coincide.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const SAMPLE_TAG: u64 = 0x5A4D_504C;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPair {
    pub reference: Interferogram,
    pub sample: Interferogram,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub reference: AmplitudeSpectrum,
    pub sample: AmplitudeSpectrum,
    pub transmission: TransmissionSpectrum,
    pub instrument: InstrumentInfo,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: RunConfig,
    pub lists: Vec<(GasConfig, LineList)>,
}

impl Experiment {
    /// Reads every configured line list.
    pub fn load(config: RunConfig) -> Result<Self, PipelineError> {
        let mut lists = Vec::with_capacity(config.gases.len());
        for gas in &config.gases {
            let file = File::open(&gas.linelist_path).map_err(|e| PipelineError::Input {
                path: gas.linelist_path.clone(),
                message: e.to_string(),
            })?;
            let list = linelist::load_linelist(BufReader::new(file), &gas.name).map_err(|e| PipelineError::Input {
                path: gas.linelist_path.clone(),
                message: e.to_string(),
            })?;
            lists.push((gas.clone(), list));
        }
        Ok(Self { config, lists })
    }

    pub fn enhancement(&self) -> Result<f64, PipelineError> {
        Ok(optics::cavity_enhancement(&self.config.cavity)?)
    }

    pub fn spdc_density(&self) -> Result<Spectrum, PipelineError> {
        let p = self.config.cavity.intracavity_power()?;
        Ok(optics::spdc_spectral_density(&self.config.spdc, p, &self.config.grid)?)
    }

    /// Pure-species α for every gas at the cell conditions, self-broadened at its own mole fraction.
    pub fn absorption(&self, exec: Exec, grid: &WavenumberGrid) -> Result<Vec<(String, f64, AbsorptionSpectrum)>, PipelineError> {
        self.lists
            .iter()
            .map(|(gas, list)| {
                let cond = GasConditions { self_fraction: gas.concentration, ..self.config.conditions };
                let a = linelist::absorption_coefficient_with(exec, list, grid, &cond, &self.config.absorption)?;
                Ok((gas.name.clone(), gas.concentration, a))
            })
            .collect()
    }

    pub fn sample_transmission(&self, exec: Exec) -> Result<TransmissionCurve, PipelineError> {
        let grid = self.config.grid;
        let alphas = self.absorption(exec, &grid)?;
        let mix: Vec<(&AbsorptionSpectrum, f64)> = alphas.iter().filter(|a| a.1 > 0.0).map(|a| (&a.2, a.1)).collect();
        if mix.is_empty() {
            return Ok(TransmissionCurve::transparent(grid));
        }
        Ok(optics::transmission_from_alpha(&mix, self.config.cell_length, &grid)?)
    }

    /// Reference (all concentrations zero) and sample interferograms.
    pub fn simulate(&self, exec: Exec) -> Result<SimulatedPair, PipelineError> {
        let cfg = &self.config;
        let e = self.enhancement()?;
        let density = self.spdc_density()?;
        let tau = self.sample_transmission(exec)?;
        let arm = |tau: &TransmissionCurve, noise: NoiseConfig, label: &str| -> Result<Interferogram, PipelineError> {
            let expected = interferogram::expected_counts_with(
                exec,
                SynthesisMethod::Auto,
                &density,
                tau,
                &cfg.spdc,
                &cfg.dispersion,
                &cfg.scan,
                noise.detector_background,
            )?;
            let mut ifg = interferogram::from_expected(expected, &cfg.scan, &noise, e, exec);
            ifg.meta.provenance.push(("arm".into(), label.into()));
            for (gas, _) in &self.lists {
                let c = if label == "reference" { 0.0 } else { gas.concentration };
                ifg.meta.provenance.push((format!("gas.{}.concentration", gas.name), c.to_string()));
            }
            ifg.meta.provenance.push(("cell.length_cm".into(), cfg.cell_length.to_string()));
            ifg.meta.provenance.push(("dispersion.beta2".into(), cfg.dispersion.beta2.to_string()));
            Ok(ifg)
        };
        let reference = arm(&TransmissionCurve::transparent(cfg.grid), cfg.noise, "reference")?;
        let sample_noise = NoiseConfig { rng_seed: derive_seed(cfg.noise.rng_seed, SAMPLE_TAG), ..cfg.noise };
        let sample = arm(&tau, sample_noise, "sample")?;
        Ok(SimulatedPair { reference, sample })
    }

    pub fn instrument(&self) -> InstrumentInfo {
        InstrumentInfo { window: self.config.apodization, axis: self.config.scan.axis(), zero_fill: self.config.zero_fill }
    }

    pub fn spectrum(&self, ifg: &Interferogram) -> Result<AmplitudeSpectrum, PipelineError> {
        spectrum_of(ifg, &self.instrument())
    }

    pub fn analyze(&self, pair: &SimulatedPair) -> Result<Analysis, PipelineError> {
        let reference = self.spectrum(&pair.reference)?;
        let sample = self.spectrum(&pair.sample)?;
        let transmission = retrieval::transmission(&sample, &reference, self.config.threshold)?;
        Ok(Analysis { reference, sample, transmission, instrument: self.instrument() })
    }

    /// Model for one species over its fit band, air-broadened (the fit does not know the mixture).
    pub fn model_context(&self, exec: Exec, species: &str, band: (f64, f64), instrument: &InstrumentInfo) -> Result<ModelContext, PipelineError> {
        let (_, list) = self
            .lists
            .iter()
            .find(|(g, _)| g.name == species)
            .ok_or_else(|| RetrievalError::Domain(format!("no line list configured for species {species:?}")))?;
        let kernel_reach = 6.0 * fts::ils_fwhm(&instrument.window, instrument.axis.opd_max()).max(1.0);
        let step = self.config.grid.step();
        let grid = WavenumberGrid::span(band.0 - kernel_reach - 1.0, band.1 + kernel_reach + 1.0, step)
            .map_err(LineListError::from)?;
        let cond = GasConditions { self_fraction: 0.0, ..self.config.conditions };
        let alpha = linelist::absorption_coefficient_with(exec, list, &grid, &cond, &self.config.absorption)?;
        Ok(ModelContext::from_window(
            vec![SpeciesModel { name: species.to_string(), alpha }],
            self.config.cell_length,
            &instrument.window,
            &instrument.axis,
        )?)
    }

    /// Fits every configured gas that has a fit band, each on its own band.
    pub fn fit_all(&self, exec: Exec, t: &TransmissionSpectrum, instrument: &InstrumentInfo) -> Result<Vec<FitResult>, PipelineError> {
        let mut out = Vec::new();
        for (gas, _) in &self.lists {
            let Some(band) = self.config.fit_band(&gas.name) else { continue };
            let ctx = self.model_context(exec, &gas.name, band, instrument)?;
            out.push(retrieval::fit_concentration(t, &ctx, &[INITIAL_GUESS], band)?);
        }
        Ok(out)
    }

    pub fn snr(&self, t: &TransmissionSpectrum) -> Result<f64, PipelineError> {
        Ok(retrieval::snr_100line(t, self.config.snr_window)?)
    }
}

/// Starting concentration for fits, a typical trace-gas level.
pub const INITIAL_GUESS: f64 = 1e-3;

pub fn spectrum_of(ifg: &Interferogram, instrument: &InstrumentInfo) -> Result<AmplitudeSpectrum, PipelineError> {
    let ap = fts::apodize(ifg, &instrument.window)?;
    Ok(fts::to_spectrum(&ap, instrument.zero_fill)?)
}
