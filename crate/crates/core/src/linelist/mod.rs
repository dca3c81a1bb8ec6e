//! Line-by-line absorption: HITRAN line lists, Voigt line shapes and
//! pure-species absorption coefficients.
//!
//! Line intensities are used as tabulated at 296 K; there is no partition-sum
//! temperature conversion. The temperature only enters the number density,
//! the Doppler width and the pressure-broadening exponent.

mod absorption;
mod par;
mod voigt;

use thiserror::Error;

use crate::grid::GridError;

pub use absorption::{absorption_coefficient, absorption_coefficient_with, AbsorptionOptions, AbsorptionSpectrum};
pub use par::{load_linelist, parse_par_record, retained_fields, to_par_record, RECORD_LEN, RETAINED_COLUMNS};
pub use voigt::{faddeeva, gaussian_profile, lorentz_profile, voigt_profile};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LineListError {
    #[error("record {record}: expected at least 160 characters, found {len}")]
    RecordTooShort { record: usize, len: usize },
    #[error("record {record}: cannot parse columns {}-{} ({text:?})", columns.0, columns.1)]
    FieldParse { record: usize, columns: (usize, usize), text: String },
    #[error("record {record}: {reason}")]
    InvalidLine { record: usize, reason: &'static str },
    #[error("line list is empty")]
    EmptyLineList,
    #[error("both Voigt widths are zero")]
    DegenerateWidths,
    #[error("Voigt widths must be non-negative (doppler {doppler_hwhm}, lorentz {lorentz_hwhm})")]
    InvalidWidths { doppler_hwhm: f64, lorentz_hwhm: f64 },
    #[error("no molecular mass for molecule {molec_id} isotopologue {iso}")]
    UnknownIsotopologue { molec_id: u8, iso: u8 },
    #[error("value of {field} does not fit its fixed-width column")]
    FieldOverflow { field: &'static str },
    #[error("invalid gas conditions: {0}")]
    InvalidConditions(&'static str),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("i/o error: {0}")]
    Io(String),
}

/// One molecular transition as tabulated in HITRAN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralLine {
    pub molec_id: u8,
    pub local_iso_id: u8,
    /// Line center, cm⁻¹.
    pub nu0: f64,
    /// Intensity at 296 K, cm⁻¹/(molecule·cm⁻²).
    pub sw: f64,
    /// Air-broadened HWHM at 296 K, cm⁻¹/atm.
    pub gamma_air: f64,
    /// Self-broadened HWHM at 296 K, cm⁻¹/atm.
    pub gamma_self: f64,
    /// Lower-state energy, cm⁻¹.
    pub elower: f64,
    /// Temperature exponent of `gamma_air`.
    pub n_air: f64,
    /// Air pressure shift, cm⁻¹/atm.
    pub delta_air: f64,
}

impl SpectralLine {
    fn validate(&self, record: usize) -> Result<(), LineListError> {
        let bad = |reason| Err(LineListError::InvalidLine { record, reason });
        if !(self.nu0 > 0.0) {
            return bad("nu0 must be positive");
        }
        if !(self.sw >= 0.0) {
            return bad("sw must be non-negative");
        }
        if !(self.gamma_air >= 0.0 && self.gamma_self >= 0.0) {
            return bad("broadening coefficients must be non-negative");
        }
        Ok(())
    }

    /// Molecular mass in atomic mass units, for the isotopologues we know about.
    pub fn mass_amu(&self) -> Result<f64, LineListError> {
        molecular_mass(self.molec_id, self.local_iso_id)
    }
}

/// Masses of the principal isotopologues of the HITRAN molecules 1–7.
pub fn molecular_mass(molec_id: u8, iso: u8) -> Result<f64, LineListError> {
    let m = match (molec_id, iso) {
        (1, 1) => 18.010565,
        (1, 2) => 20.014811,
        (1, 3) => 19.014780,
        (1, 4) => 19.016740,
        (2, 1) => 43.989830,
        (2, 2) => 44.993185,
        (2, 3) => 45.994076,
        (3, 1) => 47.984745,
        (4, 1) => 44.001062,
        (4, 2) | (4, 3) => 44.998096,
        (4, 4) => 46.005308,
        (5, 1) => 27.994915,
        (5, 2) => 28.998270,
        (5, 3) => 29.999161,
        (6, 1) => 16.031300,
        (6, 2) => 17.034655,
        (6, 3) => 17.037475,
        (6, 4) => 18.040830,
        (7, 1) => 31.989830,
        (7, 2) => 33.994076,
        _ => return Err(LineListError::UnknownIsotopologue { molec_id, iso }),
    };
    Ok(m)
}

/// Transitions of one species, sorted by line center.
#[derive(Debug, Clone, PartialEq)]
pub struct LineList {
    species_tag: String,
    lines: Vec<SpectralLine>,
}

impl LineList {
    pub fn new(species_tag: impl Into<String>, mut lines: Vec<SpectralLine>) -> Result<Self, LineListError> {
        if lines.is_empty() {
            return Err(LineListError::EmptyLineList);
        }
        for (i, l) in lines.iter().enumerate() {
            l.validate(i + 1)?;
        }
        lines.sort_by(|a, b| a.nu0.total_cmp(&b.nu0));
        Ok(Self { species_tag: species_tag.into(), lines })
    }

    pub fn species_tag(&self) -> &str {
        &self.species_tag
    }

    pub fn lines(&self) -> &[SpectralLine] {
        &self.lines
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// A copy with every intensity multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let lines = self.lines.iter().map(|l| SpectralLine { sw: l.sw * factor, ..*l }).collect();
        Self { species_tag: self.species_tag.clone(), lines }
    }
}

/// Thermodynamic state of the gas in the cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasConditions {
    /// K
    pub temperature: f64,
    /// atm
    pub pressure: f64,
    /// Mole fraction of the absorbing species used to mix self and air broadening.
    pub self_fraction: f64,
}

impl Default for GasConditions {
    fn default() -> Self {
        Self { temperature: 296.0, pressure: 1.0, self_fraction: 0.0 }
    }
}

impl GasConditions {
    pub fn validate(&self) -> Result<(), LineListError> {
        if !(self.temperature > 0.0) {
            return Err(LineListError::InvalidConditions("temperature must be positive"));
        }
        if !(self.pressure > 0.0) {
            return Err(LineListError::InvalidConditions("pressure must be positive"));
        }
        if !(0.0..=1.0).contains(&self.self_fraction) {
            return Err(LineListError::InvalidConditions("self-broadening fraction must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Total number density p/(k_B T), molecule·cm⁻³.
    pub fn number_density(&self) -> f64 {
        self.pressure * crate::constants::ATM_PA / (crate::constants::BOLTZMANN * self.temperature) * 1e-6
    }
}
