use std::f64::consts::LN_2;

use crate::constants::{AMU, BOLTZMANN, SPEED_OF_LIGHT};
use crate::exec::{self, Exec};
use crate::grid::{Spectrum, WavenumberGrid};

use super::voigt::{gaussian_profile, lorentz_profile, voigt_unchecked};
use super::{GasConditions, LineList, LineListError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsorptionOptions {
    /// Lines farther than this from a grid point do not contribute there, cm⁻¹.
    pub cutoff: f64,
    pub pressure_shift: bool,
    /// Mix `gamma_self` in by the species mole fraction; otherwise air broadening only.
    pub self_broadening: bool,
}

impl Default for AbsorptionOptions {
    fn default() -> Self {
        Self { cutoff: 25.0, pressure_shift: true, self_broadening: true }
    }
}

/// Pure-species absorption coefficient α(ν̃) in cm⁻¹, so that `exp(-c α L)` is
/// the intensity transmission of a path `L` at mole fraction `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionSpectrum {
    pub grid: WavenumberGrid,
    pub alpha: Vec<f64>,
}

impl AbsorptionSpectrum {
    pub fn zeros(grid: WavenumberGrid) -> Self {
        Self { grid, alpha: vec![0.0; grid.len()] }
    }

    pub fn as_spectrum(&self) -> Spectrum {
        Spectrum::new(self.grid, self.alpha.clone())
    }
}

#[derive(Clone, Copy)]
struct Shape {
    center: f64,
    strength: f64,
    doppler: f64,
    lorentz: f64,
}

impl Shape {
    #[inline]
    fn eval(&self, nu: f64) -> f64 {
        let d = nu - self.center;
        let v = if self.lorentz == 0.0 {
            gaussian_profile(d, self.doppler)
        } else if self.doppler == 0.0 {
            lorentz_profile(d, self.lorentz)
        } else {
            voigt_unchecked(d, self.doppler, self.lorentz)
        };
        self.strength * v
    }
}

pub fn absorption_coefficient(
    list: &LineList,
    grid: &WavenumberGrid,
    cond: &GasConditions,
    opts: &AbsorptionOptions,
) -> Result<AbsorptionSpectrum, LineListError> {
    absorption_coefficient_with(Exec::default(), list, grid, cond, opts)
}

/// α(ν̃) = n_tot Σ_j S_j V(ν̃ − ν_j − δ_j p; γ_D,j, γ_L,j).
///
/// Each grid point sums its lines in ascending center order, so the result
/// is bit-identical under any execution policy.
pub fn absorption_coefficient_with(
    exec: Exec,
    list: &LineList,
    grid: &WavenumberGrid,
    cond: &GasConditions,
    opts: &AbsorptionOptions,
) -> Result<AbsorptionSpectrum, LineListError> {
    cond.validate()?;
    if list.is_empty() {
        return Err(LineListError::EmptyLineList);
    }
    let t = cond.temperature;
    let p = cond.pressure;
    let x_self = if opts.self_broadening { cond.self_fraction } else { 0.0 };

    let mut shapes = Vec::with_capacity(list.len());
    for line in list.lines() {
        let mass = line.mass_amu()? * AMU;
        let center = line.nu0 + if opts.pressure_shift { line.delta_air * p } else { 0.0 };
        let doppler = line.nu0 * (2.0 * LN_2 * BOLTZMANN * t / mass).sqrt() / SPEED_OF_LIGHT;
        let lorentz = (296.0 / t).powf(line.n_air) * p * ((1.0 - x_self) * line.gamma_air + x_self * line.gamma_self);
        if doppler == 0.0 && lorentz == 0.0 {
            return Err(LineListError::DegenerateWidths);
        }
        shapes.push(Shape { center, strength: line.sw, doppler, lorentz });
    }
    shapes.sort_by(|a, b| a.center.total_cmp(&b.center));

    let n_tot = cond.number_density();
    let cutoff = opts.cutoff;
    let shapes = &shapes;
    let alpha = exec::map_indexed(exec, grid.len(), |i| {
        let nu = grid.at(i);
        let lo = shapes.partition_point(|s| s.center < nu - cutoff);
        let hi = shapes.partition_point(|s| s.center <= nu + cutoff);
        let sum: f64 = shapes[lo..hi].iter().map(|s| s.eval(nu)).sum();
        n_tot * sum
    });
    Ok(AbsorptionSpectrum { grid: *grid, alpha })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linelist::SpectralLine;

    fn line(nu0: f64, sw: f64) -> SpectralLine {
        SpectralLine {
            molec_id: 6,
            local_iso_id: 1,
            nu0,
            sw,
            gamma_air: 0.06,
            gamma_self: 0.08,
            elower: 100.0,
            n_air: 0.75,
            delta_air: -0.006,
        }
    }

    #[test]
    fn lines_beyond_cutoff_give_zero() {
        let list = LineList::new("CH4", vec![line(3018.0, 1e-19)]).unwrap();
        let grid = WavenumberGrid::span(2500.0, 2600.0, 0.5).unwrap();
        let a = absorption_coefficient(&list, &grid, &GasConditions::default(), &AbsorptionOptions::default()).unwrap();
        assert!(a.alpha.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_line_peak_matches_closed_formula() {
        let list = LineList::new("CH4", vec![line(3018.0, 1e-19)]).unwrap();
        let opts = AbsorptionOptions { pressure_shift: false, self_broadening: false, ..Default::default() };
        let grid = WavenumberGrid::span(3017.0, 3019.0, 0.001).unwrap();
        let cond = GasConditions::default();
        let a = absorption_coefficient(&list, &grid, &cond, &opts).unwrap();
        let i0 = grid.index_range(3018.0 - 1e-7, 3018.0 + 1e-7).start;

        // Independent hand evaluation at 296 K, 1 atm.
        let n_tot: f64 = 101_325.0 / (1.380_649e-23 * 296.0) * 1e-6;
        assert!((n_tot - 2.479e19).abs() < 0.001e19);
        let m: f64 = 16.0313 * 1.660_539_066_60e-27;
        let gd = 3018.0 * (2.0 * LN_2 * 1.380_649e-23 * 296.0 / m).sqrt() / 299_792_458.0;
        let v0 = super::super::voigt_profile(0.0, gd, 0.06).unwrap();
        let expected = n_tot * 1e-19 * v0;
        assert!((a.alpha[i0] - expected).abs() <= 1e-12 * expected, "{} vs {}", a.alpha[i0], expected);
        let peak = a.alpha.iter().cloned().fold(0.0, f64::max);
        assert_eq!(peak, a.alpha[i0]);
    }

    #[test]
    fn pressure_shift_moves_peak() {
        let list = LineList::new("CH4", vec![line(3018.0, 1e-19)]).unwrap();
        let grid = WavenumberGrid::span(3017.0, 3019.0, 0.001).unwrap();
        let cond = GasConditions { pressure: 2.0, ..Default::default() };
        let a = absorption_coefficient(&list, &grid, &cond, &AbsorptionOptions::default()).unwrap();
        let imax = (0..grid.len()).max_by(|&i, &j| a.alpha[i].total_cmp(&a.alpha[j])).unwrap();
        assert!((grid.at(imax) - (3018.0 - 0.012)).abs() < 1.5e-3);
    }

    #[test]
    fn rejects_bad_conditions() {
        let list = LineList::new("CH4", vec![line(3018.0, 1e-19)]).unwrap();
        let grid = WavenumberGrid::span(3017.0, 3019.0, 0.01).unwrap();
        let cond = GasConditions { temperature: 0.0, ..Default::default() };
        assert!(absorption_coefficient(&list, &grid, &cond, &AbsorptionOptions::default()).is_err());
    }
}
