use proptest::prelude::*;
use qfts_core::grid::WavenumberGrid;
use qfts_core::linelist::{AbsorptionOptions, AbsorptionSpectrum, GasConditions, LineList, SpectralLine};
use qfts_core::optics::{
    cavity_enhancement, idler_wavenumber, roundtrip_transmission, signal_wavenumber, spdc_spectral_density,
    transmission_from_alpha, visibility, CavityConfig, SpdcConfig,
};

fn rel(a: f64, b: f64) -> f64 {
    if a == b { 0.0 } else { (a - b).abs() / a.abs().max(b.abs()) }
}

fn grid() -> WavenumberGrid {
    WavenumberGrid::span(1900.0, 3900.0, 0.5).unwrap()
}

fn bumpy_alpha(grid: WavenumberGrid, centers: &[f64], width: f64) -> AbsorptionSpectrum {
    let alpha = grid
        .points()
        .map(|nu| centers.iter().map(|c| 3.0 / (1.0 + ((nu - c) / width).powi(2))).sum())
        .collect();
    AbsorptionSpectrum { grid, alpha }
}

fn line(nu0: f64, sw: f64, molec_id: u8) -> SpectralLine {
    SpectralLine {
        molec_id,
        local_iso_id: 1,
        nu0,
        sw,
        gamma_air: 0.07,
        gamma_self: 0.09,
        elower: 50.0,
        n_air: 0.7,
        delta_air: -0.003,
    }
}

#[test]
fn enhancement_is_monotone() {
    let mut last = 0.0;
    for finesse in [1.0, 10.0, 100.0, 290.0, 1000.0] {
        let e = cavity_enhancement(&CavityConfig { finesse, ..CavityConfig::default() }).unwrap();
        assert!(e > last);
        last = e;
    }
    let mut last = 0.0;
    for coupling in [0.01, 0.1, 0.5, 0.596, 1.0] {
        let e = cavity_enhancement(&CavityConfig { coupling_efficiency: coupling, ..CavityConfig::default() }).unwrap();
        assert!(e > last);
        last = e;
    }
}

#[test]
fn mixture_curve_is_product_of_single_species_curves() {
    let g = WavenumberGrid::span(2990.0, 3010.0, 0.01).unwrap();
    let a = LineList::new("CH4", vec![line(2995.0, 2e-20, 6), line(3002.0, 1e-20, 6)]).unwrap();
    let b = LineList::new("N2O", vec![line(3000.0, 4e-20, 4)]).unwrap();
    let cond = GasConditions::default();
    let opts = AbsorptionOptions::default();
    let both = roundtrip_transmission(&[(&a, 0.003), (&b, 0.009)], 2.0, &cond, &g, &opts).unwrap();
    let only_a = roundtrip_transmission(&[(&a, 0.003), (&b, 0.0)], 2.0, &cond, &g, &opts).unwrap();
    let only_b = roundtrip_transmission(&[(&a, 0.0), (&b, 0.009)], 2.0, &cond, &g, &opts).unwrap();
    for i in 0..g.len() {
        let product = only_a.tau_roundtrip[i] * only_b.tau_roundtrip[i];
        assert!(rel(both.tau_roundtrip[i], product) <= 1e-12);
    }
    assert!(both.tau_roundtrip.iter().cloned().fold(1.0, f64::min) < 0.99);
}

proptest! {
    #[test]
    fn signal_idler_round_trip(pump in 5000.0..20000.0f64, frac in 0.01..0.99f64) {
        let signal = pump * frac;
        let idler = idler_wavenumber(pump, signal).unwrap();
        prop_assert_eq!(idler, pump - signal);
        // Two subtractions, each exact to half an ulp of the pump.
        prop_assert!((signal_wavenumber(pump, idler).unwrap() - signal).abs() <= 2.0 * f64::EPSILON * pump);
    }

    #[test]
    fn density_is_homogeneous_in_pump_power(p in 0.0..10.0f64, a in 0.0..100.0f64) {
        let cfg = SpdcConfig::default();
        let g = grid();
        let base = spdc_spectral_density(&cfg, p, &g).unwrap();
        let scaled = spdc_spectral_density(&cfg, a * p, &g).unwrap();
        for (x, y) in base.values.iter().zip(&scaled.values) {
            prop_assert!(rel(a * x, *y) <= 1e-12);
        }
    }

    #[test]
    fn visibility_is_linear(tau in 0.0..=1.0f64, a in 0.0..=1.0f64, vmax in 0.01..=1.0f64) {
        let cfg = SpdcConfig { max_visibility: vmax, ..SpdcConfig::default() };
        let v = visibility(tau, &cfg).unwrap();
        prop_assert!(rel(visibility(a * tau, &cfg).unwrap(), a * v) <= 1e-15);
    }

    #[test]
    fn exponents_add(c1 in 0.0..0.5f64, c2 in 0.0..0.5f64, length in 0.1..10.0f64) {
        let g = WavenumberGrid::span(2900.0, 3100.0, 0.1).unwrap();
        let a = bumpy_alpha(g, &[2950.0, 3010.0], 0.3);
        let b = bumpy_alpha(g, &[3000.0, 3070.0], 0.8);
        let both = transmission_from_alpha(&[(&a, c1), (&b, c2)], length, &g).unwrap();
        let ta = transmission_from_alpha(&[(&a, c1)], length, &g).unwrap();
        let tb = transmission_from_alpha(&[(&b, c2)], length, &g).unwrap();
        for i in 0..g.len() {
            let product = ta.tau_roundtrip[i] * tb.tau_roundtrip[i];
            prop_assert!(rel(both.tau_roundtrip[i], product) <= 1e-12);
            prop_assert!((0.0..=1.0).contains(&both.tau_roundtrip[i]));
        }
    }
}
