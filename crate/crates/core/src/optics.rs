//! Pump-enhancement cavity, SPDC emission and the induced-coherence visibility law.
//!
//! The source is assumed to work in the spontaneous, low-gain regime: the
//! pair rate is strictly proportional to the intra-cavity pump power and the
//! fringe visibility is strictly proportional to the amplitude transmission
//! of the idler arm.

use std::f64::consts::{LN_2, PI};

use thiserror::Error;

use crate::constants::{nm_to_wavenumber, photon_energy};
use crate::grid::{Spectrum, WavenumberGrid};
use crate::linelist::{self, AbsorptionOptions, AbsorptionSpectrum, GasConditions, LineList, LineListError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpticsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("grid [{start}, {stop}] cm⁻¹ covers only {covered:.2e} of the emission band")]
    GridOutsideSupport { start: f64, stop: f64, covered: f64 },
    #[error("grids of the absorption spectra differ")]
    GridMismatch,
    #[error(transparent)]
    LineList(#[from] LineListError),
}

/// Passive pump cavity around the nonlinear crystal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityConfig {
    pub finesse: f64,
    /// Lumped impedance-matching and mode-coupling efficiency, (0, 1].
    pub coupling_efficiency: f64,
    /// Incident pump power, W.
    pub pump_power_in: f64,
}

impl Default for CavityConfig {
    fn default() -> Self {
        Self { finesse: 290.0, coupling_efficiency: 0.596, pump_power_in: 0.100 }
    }
}

impl CavityConfig {
    pub fn validate(&self) -> Result<(), OpticsError> {
        if !(self.finesse >= 1.0) {
            return Err(OpticsError::InvalidConfig("finesse must be at least 1"));
        }
        if !(self.coupling_efficiency > 0.0 && self.coupling_efficiency <= 1.0) {
            return Err(OpticsError::InvalidConfig("coupling efficiency must lie in (0, 1]"));
        }
        if !(self.pump_power_in >= 0.0) {
            return Err(OpticsError::InvalidConfig("pump power must be non-negative"));
        }
        Ok(())
    }

    /// Pump power circulating at the crystal, W.
    pub fn intracavity_power(&self) -> Result<f64, OpticsError> {
        Ok(cavity_enhancement(self)? * self.pump_power_in)
    }
}

/// Power enhancement E = (F/π)·η of the pump cavity.
pub fn cavity_enhancement(cfg: &CavityConfig) -> Result<f64, OpticsError> {
    cfg.validate()?;
    Ok(cfg.finesse / PI * cfg.coupling_efficiency)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralShape {
    Gaussian,
    SincSquared,
}

impl std::str::FromStr for SpectralShape {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "sinc_squared" | "sinc2" => Ok(Self::SincSquared),
            _ => Err(format!("unknown spectral shape {s:?} (expected gaussian or sinc_squared)")),
        }
    }
}

impl std::fmt::Display for SpectralShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Gaussian => "gaussian",
            Self::SincSquared => "sinc_squared",
        })
    }
}

/// Half-maximum point of sinc²(u) = (sin u / u)².
const SINC2_HALF_MAX: f64 = 1.391_557_377_251_1;

/// Light-exposure target used to calibrate the default pair rate: 60 nW of
/// idler at the sample for 100 mW incident pump and E = 55.
const DEFAULT_IDLER_POWER_W: f64 = 60e-9;
const DEFAULT_INTRACAVITY_POWER_W: f64 = 0.100 * 55.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpdcConfig {
    /// cm⁻¹
    pub pump_wavenumber: f64,
    /// cm⁻¹
    pub idler_center_wavenumber: f64,
    /// FWHM of the emitted spectral density, cm⁻¹.
    pub phase_matching_bandwidth: f64,
    pub spectral_shape: SpectralShape,
    /// Emitted pairs·s⁻¹·W⁻¹ of intra-cavity pump power.
    pub base_pair_rate: f64,
    /// Fraction of emitted signal photons that end up as detector counts.
    pub detection_efficiency: f64,
    /// Fringe visibility with a fully transparent idler arm.
    pub max_visibility: f64,
}

impl Default for SpdcConfig {
    fn default() -> Self {
        let idler = 2900.0;
        Self {
            pump_wavenumber: nm_to_wavenumber(775.0),
            idler_center_wavenumber: idler,
            phase_matching_bandwidth: 700.0,
            spectral_shape: SpectralShape::Gaussian,
            base_pair_rate: DEFAULT_IDLER_POWER_W / (photon_energy(idler) * DEFAULT_INTRACAVITY_POWER_W),
            detection_efficiency: 0.0126,
            max_visibility: 0.8,
        }
    }
}

impl SpdcConfig {
    pub fn validate(&self) -> Result<(), OpticsError> {
        if !(self.idler_center_wavenumber > 0.0 && self.idler_center_wavenumber < self.pump_wavenumber) {
            return Err(OpticsError::InvalidConfig("idler center must lie between 0 and the pump wavenumber"));
        }
        if !(self.phase_matching_bandwidth > 0.0) {
            return Err(OpticsError::InvalidConfig("phase-matching bandwidth must be positive"));
        }
        if !(self.base_pair_rate > 0.0) {
            return Err(OpticsError::InvalidConfig("base pair rate must be positive"));
        }
        if !(self.detection_efficiency > 0.0 && self.detection_efficiency <= 1.0) {
            return Err(OpticsError::InvalidConfig("detection efficiency must lie in (0, 1]"));
        }
        if !(self.max_visibility > 0.0 && self.max_visibility <= 1.0) {
            return Err(OpticsError::InvalidConfig("max visibility must lie in (0, 1]"));
        }
        Ok(())
    }

    /// Unit-area emission shape at `nu`, cm.
    pub fn shape(&self, nu: f64) -> f64 {
        let d = nu - self.idler_center_wavenumber;
        let fwhm = self.phase_matching_bandwidth;
        match self.spectral_shape {
            SpectralShape::Gaussian => {
                let sigma = fwhm / (2.0 * (2.0 * LN_2).sqrt());
                (-0.5 * (d / sigma).powi(2)).exp() / (sigma * (2.0 * PI).sqrt())
            }
            SpectralShape::SincSquared => {
                let a = 2.0 * SINC2_HALF_MAX / fwhm;
                let u = a * d;
                let s = if u == 0.0 { 1.0 } else { u.sin() / u };
                s * s * a / PI
            }
        }
    }

    /// Idler power leaving the crystal toward the sample, W.
    pub fn idler_power(&self, pump_intracavity_power: f64) -> f64 {
        self.base_pair_rate * pump_intracavity_power * photon_energy(self.idler_center_wavenumber)
    }
}

/// Idler wavenumber from energy conservation ν̃_i = ν̃_p − ν̃_s.
pub fn idler_wavenumber(pump_wavenumber: f64, signal_wavenumber: f64) -> Result<f64, OpticsError> {
    if !(signal_wavenumber > 0.0 && signal_wavenumber < pump_wavenumber) {
        return Err(OpticsError::Domain(format!(
            "signal {signal_wavenumber} cm⁻¹ must lie in (0, {pump_wavenumber})"
        )));
    }
    Ok(pump_wavenumber - signal_wavenumber)
}

/// Inverse of [`idler_wavenumber`].
pub fn signal_wavenumber(pump_wavenumber: f64, idler_wavenumber: f64) -> Result<f64, OpticsError> {
    if !(idler_wavenumber > 0.0 && idler_wavenumber < pump_wavenumber) {
        return Err(OpticsError::Domain(format!(
            "idler {idler_wavenumber} cm⁻¹ must lie in (0, {pump_wavenumber})"
        )));
    }
    Ok(pump_wavenumber - idler_wavenumber)
}

/// Detected pair-rate density, pairs·s⁻¹ per cm⁻¹, for the given intra-cavity pump power.
///
/// Strictly proportional to the pump power (no parametric gain).
pub fn spdc_spectral_density(
    cfg: &SpdcConfig,
    pump_intracavity_power: f64,
    grid: &WavenumberGrid,
) -> Result<Spectrum, OpticsError> {
    cfg.validate()?;
    if !(pump_intracavity_power >= 0.0) {
        return Err(OpticsError::Domain(format!("pump power {pump_intracavity_power} W must be non-negative")));
    }
    let shape: Vec<f64> = grid.points().map(|nu| cfg.shape(nu)).collect();
    let covered = shape.iter().sum::<f64>() * grid.step();
    if covered <= 1e-3 {
        return Err(OpticsError::GridOutsideSupport { start: grid.start(), stop: grid.stop(), covered });
    }
    let rate = cfg.base_pair_rate * cfg.detection_efficiency * pump_intracavity_power;
    Ok(Spectrum::new(*grid, shape.into_iter().map(|s| rate * s).collect()))
}

/// V = V_max · τ.
pub fn visibility(tau_roundtrip: f64, cfg: &SpdcConfig) -> Result<f64, OpticsError> {
    if !(0.0..=1.0).contains(&tau_roundtrip) {
        return Err(OpticsError::Domain(format!("amplitude transmission {tau_roundtrip} outside [0, 1]")));
    }
    Ok(cfg.max_visibility * tau_roundtrip)
}

/// Round-trip amplitude transmission of the idler arm.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionCurve {
    pub grid: WavenumberGrid,
    pub tau_roundtrip: Vec<f64>,
}

impl TransmissionCurve {
    pub fn transparent(grid: WavenumberGrid) -> Self {
        Self { grid, tau_roundtrip: vec![1.0; grid.len()] }
    }

    pub fn constant(grid: WavenumberGrid, tau: f64) -> Self {
        Self { grid, tau_roundtrip: vec![tau; grid.len()] }
    }
}

/// τ(ν̃) = exp(−Σ_k c_k α_k(ν̃) L) from precomputed pure-species absorption coefficients.
///
/// The idler crosses the cell twice. Each pass has amplitude transmission
/// exp(−c α L / 2), so the round trip carries exp(−c α L): the same number as
/// the single-pass *intensity* Beer–Lambert factor. This is why the visibility,
/// and therefore the amplitude-spectrum quotient, follows exp(−c α L) exactly.
pub fn transmission_from_alpha(
    mixtures: &[(&AbsorptionSpectrum, f64)],
    cell_length: f64,
    grid: &WavenumberGrid,
) -> Result<TransmissionCurve, OpticsError> {
    if !(cell_length > 0.0) {
        return Err(OpticsError::Domain(format!("cell length {cell_length} cm must be positive")));
    }
    let mut exponent = vec![0.0; grid.len()];
    for (alpha, c) in mixtures {
        if !(*c >= 0.0) {
            return Err(OpticsError::Domain(format!("concentration {c} must be non-negative")));
        }
        if !alpha.grid.matches(grid) {
            return Err(OpticsError::GridMismatch);
        }
        for (e, a) in exponent.iter_mut().zip(&alpha.alpha) {
            *e += c * a * cell_length;
        }
    }
    let total: f64 = mixtures.iter().map(|(_, c)| c).sum();
    if total > 1.0 + 1e-12 {
        return Err(OpticsError::Domain(format!("concentrations sum to {total} > 1")));
    }
    Ok(TransmissionCurve { grid: *grid, tau_roundtrip: exponent.into_iter().map(|e| (-e).exp()).collect() })
}

/// Line-by-line round-trip transmission of a gas mixture in the idler arm.
///
/// Each species is broadened with its own mole fraction as the self-broadening share.
pub fn roundtrip_transmission(
    mixtures: &[(&LineList, f64)],
    cell_length: f64,
    cond: &GasConditions,
    grid: &WavenumberGrid,
    opts: &AbsorptionOptions,
) -> Result<TransmissionCurve, OpticsError> {
    let mut alphas = Vec::with_capacity(mixtures.len());
    for (list, c) in mixtures {
        if *c == 0.0 {
            continue;
        }
        let cond = GasConditions { self_fraction: c.clamp(0.0, 1.0), ..*cond };
        alphas.push((linelist::absorption_coefficient(list, grid, &cond, opts)?, *c));
    }
    let refs: Vec<_> = alphas.iter().map(|(a, c)| (a, *c)).collect();
    transmission_from_alpha(&refs, cell_length, grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn idler_examples() {
        let pump = nm_to_wavenumber(775.0);
        assert!((pump - 12903.2258).abs() < 1e-3);
        let idler = idler_wavenumber(12903.2, 10000.0).unwrap();
        assert!((idler - 2903.2).abs() < 1e-9);
        assert!((1e4 / idler - 3.444).abs() < 1e-3);
        assert_eq!(idler_wavenumber(pump, pump / 2.0).unwrap(), pump / 2.0);
        let s = signal_wavenumber(12903.2, 2777.8).unwrap();
        assert!((s - 10125.4).abs() < 1e-9);
        assert!((1e7 / s - 987.6).abs() < 0.05);
        assert!(idler_wavenumber(pump, pump).is_err());
        assert!(idler_wavenumber(pump, -1.0).is_err());
    }

    #[test]
    fn enhancement_examples() {
        let e = |f, c| cavity_enhancement(&CavityConfig { finesse: f, coupling_efficiency: c, pump_power_in: 0.1 }).unwrap();
        assert!((e(PI, 1.0) - 1.0).abs() < 1e-15);
        assert!((e(290.0, 0.596) - 55.0).abs() < 0.05);
        assert!((e(290.0, 1.0) - 92.31).abs() < 0.01);
        assert!(cavity_enhancement(&CavityConfig { finesse: 0.5, ..Default::default() }).is_err());
        assert!(cavity_enhancement(&CavityConfig { coupling_efficiency: 0.0, ..Default::default() }).is_err());
    }

    #[test]
    fn gaussian_half_max_positions() {
        let cfg = SpdcConfig::default();
        let grid = WavenumberGrid::span(1900.0, 3900.0, 1.0).unwrap();
        let s = spdc_spectral_density(&cfg, 5.5, &grid).unwrap();
        let at = |nu: f64| s.values[grid.index_range(nu - 0.1, nu + 0.1).start];
        let peak = at(2900.0);
        assert!((at(2550.0) / peak - 0.5).abs() < 1e-12);
        assert!((at(3250.0) / peak - 0.5).abs() < 1e-12);
    }

    #[test]
    fn shapes_have_unit_area() {
        for shape in [SpectralShape::Gaussian, SpectralShape::SincSquared] {
            let cfg = SpdcConfig { spectral_shape: shape, ..Default::default() };
            let grid = WavenumberGrid::span(-200_000.0, 200_000.0, 0.5).unwrap();
            let area: f64 = grid.points().map(|nu| cfg.shape(nu)).sum::<f64>() * 0.5;
            // sinc² tails beyond the window hold about 4e-4 of the area
            assert!((area - 1.0).abs() < 1e-3, "{shape}: {area}");
        }
        let cfg = SpdcConfig { spectral_shape: SpectralShape::SincSquared, ..Default::default() };
        let peak = cfg.shape(2900.0);
        assert!((cfg.shape(2900.0 + 350.0) / peak - 0.5).abs() < 1e-9);
    }

    #[test]
    fn density_zero_power_and_support() {
        let cfg = SpdcConfig::default();
        let grid = WavenumberGrid::span(2000.0, 3800.0, 1.0).unwrap();
        let s = spdc_spectral_density(&cfg, 0.0, &grid).unwrap();
        assert!(s.values.iter().all(|&v| v == 0.0));
        let far = WavenumberGrid::span(9000.0, 9100.0, 1.0).unwrap();
        assert!(matches!(spdc_spectral_density(&cfg, 1.0, &far), Err(OpticsError::GridOutsideSupport { .. })));
    }

    #[test]
    fn default_pair_rate_gives_sixty_nanowatts() {
        let cfg = SpdcConfig::default();
        let p = cfg.idler_power(CavityConfig::default().intracavity_power().unwrap());
        assert!((p - 60e-9).abs() < 0.1e-9, "{p}");
    }

    #[test]
    fn visibility_examples() {
        let cfg = SpdcConfig { max_visibility: 0.8, ..Default::default() };
        assert_eq!(visibility(0.0, &cfg).unwrap(), 0.0);
        assert_eq!(visibility(1.0, &cfg).unwrap(), 0.8);
        assert!((visibility(0.5, &cfg).unwrap() - 0.4).abs() < 1e-15);
        assert!(visibility(1.1, &cfg).is_err());
        assert!(visibility(-0.1, &cfg).is_err());
    }

    #[test]
    fn transmission_from_alpha_examples() {
        let grid = WavenumberGrid::span(3000.0, 3001.0, 0.5).unwrap();
        let a = AbsorptionSpectrum { grid, alpha: vec![LN_2 / (0.003 * 2.0); 3] };
        let t = transmission_from_alpha(&[(&a, 0.003)], 2.0, &grid).unwrap();
        assert!(t.tau_roundtrip.iter().all(|&x| (x - 0.5).abs() < 1e-15));
        let t0 = transmission_from_alpha(&[(&a, 0.0)], 2.0, &grid).unwrap();
        assert!(t0.tau_roundtrip.iter().all(|&x| x == 1.0));
        assert!(transmission_from_alpha(&[(&a, 0.6), (&a, 0.6)], 2.0, &grid).is_err());
        assert!(transmission_from_alpha(&[(&a, 0.1)], 0.0, &grid).is_err());
    }
}
