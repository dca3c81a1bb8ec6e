use std::io::Cursor;
use std::path::Path;

use proptest::prelude::*;
use qfts_core::config::{ConfigError, RunConfig};
use qfts_core::exec::Exec;
use qfts_core::fts::{AmplitudeSpectrum, ApodizationWindow, WindowKind};
use qfts_core::grid::WavenumberGrid;
use qfts_core::interferogram::{from_expected, NoiseConfig, ScanConfig};
use qfts_core::io::{self, FormatError, InstrumentInfo, Metadata};
use qfts_core::linelist::AbsorptionSpectrum;
use qfts_core::retrieval::TransmissionSpectrum;

#[test]
fn paths_resolve_against_the_config_directory() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("conf")).unwrap();
    let path = dir.path().join("conf/run.conf");
    std::fs::write(&path, "gas.CH4.concentration = 0.003\ngas.CH4.linelist_path = ../lists/ch4.par\n").unwrap();
    let cfg = RunConfig::load(&path).unwrap();
    assert_eq!(cfg.gases[0].linelist_path, dir.path().join("conf/../lists/ch4.par"));
}

#[test]
fn every_documented_key_is_accepted() {
    let text = "\
cavity.finesse = 290
cavity.coupling_efficiency = 0.596
cavity.pump_power_mw = 100
spdc.center_cm1 = 2900
spdc.fwhm_cm1 = 700
spdc.max_visibility = 0.8
spdc.base_pair_rate = 2.1e8
scan.opd_max_cm = 0.8
scan.opd_step_um = 1
scan.dwell_s = 0.000475
scan.averages = 50
dispersion.beta2 = 2e-5
noise.seed = 7
noise.enabled = false
cell.length_cm = 2
gas.N2O.concentration = 0.009
gas.N2O.linelist_path = n2o.par
apodization.kind = boxcar
apodization.fwhm_mm_opd = 6.8
fit.band_cm1 = 2500 2630
snr.window_cm1 = 3150, 3250
";
    let cfg = RunConfig::parse(text, Path::new("/data")).unwrap();
    assert!((cfg.cavity.pump_power_in - 0.1).abs() < 1e-15);
    assert!((cfg.scan.opd_step - 1e-4).abs() < 1e-18);
    assert_eq!(cfg.scan.scans_to_average, 50);
    assert_eq!(cfg.apodization.kind, WindowKind::Boxcar);
    assert_eq!(cfg.snr_window, (3150.0, 3250.0));
    assert_eq!(cfg.fit_band("N2O"), Some((2500.0, 2630.0)));
    assert!(!cfg.noise.enabled);
}

#[test]
fn unknown_key_is_rejected_with_its_line() {
    match RunConfig::parse("cell.length_cm = 2\n\nspdc.fwhm = 700\n", Path::new(".")) {
        Err(ConfigError::UnknownKey { line, key }) => assert_eq!((line, key.as_str()), (3, "spdc.fwhm")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn spectrum_and_instrument_round_trip() {
    let grid = WavenumberGrid::new(0.0, 0.15623, 50).unwrap();
    let spec = AmplitudeSpectrum::new(grid, (0..50).map(|i| (i as f64 * 0.37).sin().abs() * 1e7).collect());
    let info = InstrumentInfo { window: ApodizationWindow::gaussian(0.68), axis: ScanConfig::default().axis(), zero_fill: 4 };
    let mut buf = Vec::new();
    io::write_spectrum(&mut buf, &spec, &info.to_metadata()).unwrap();
    let (back, meta) = io::read_spectrum(Cursor::new(&buf)).unwrap();
    assert_eq!(back.amplitude, spec.amplitude);
    assert_eq!(back.psd, spec.psd);
    assert!(back.grid.matches(&spec.grid));
    assert_eq!(InstrumentInfo::from_metadata(&meta).unwrap(), info);
    let ils: f64 = meta.get("ils_fwhm_cm1").unwrap().parse().unwrap();
    assert!((ils - 1.30).abs() < 0.005);
}

#[test]
fn transmission_keeps_only_the_valid_band() {
    let grid = WavenumberGrid::new(2000.0, 0.5, 20).unwrap();
    let mut t = vec![f64::NAN; 20];
    for (i, v) in t.iter_mut().enumerate().take(15).skip(4) {
        *v = 1.0 - 0.01 * i as f64;
    }
    let spec = TransmissionSpectrum { grid, t: t.clone(), valid: 4..15 };
    let mut buf = Vec::new();
    io::write_transmission(&mut buf, &spec, &Metadata::default()).unwrap();
    let (back, meta) = io::read_transmission(Cursor::new(&buf)).unwrap();
    assert_eq!(back.t, t[4..15].to_vec());
    assert_eq!(back.grid.start(), 2002.0);
    assert_eq!(meta.get("valid_band_cm1"), Some("2002 2007"));
}

#[test]
fn absorption_round_trip_and_header_check() {
    let grid = WavenumberGrid::new(3000.0, 0.02, 5).unwrap();
    let a = AbsorptionSpectrum { grid, alpha: vec![0.0, 1e-3, 2.5, 1e-3, 0.0] };
    let mut buf = Vec::new();
    io::write_absorption(&mut buf, &a).unwrap();
    assert!(String::from_utf8_lossy(&buf).starts_with("# wavenumber_cm-1 alpha_cm-1\n"));
    assert_eq!(io::read_absorption(Cursor::new(&buf)).unwrap().alpha, a.alpha);
    assert!(matches!(io::read_spectrum(Cursor::new(&buf)), Err(FormatError::Header { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn interferogram_round_trip(seed in any::<u64>(), level in 0.0..1e6f64, half_len in 1usize..200) {
        let scan = ScanConfig { opd_max: half_len as f64 * 1e-4, opd_step: 1e-4, dwell_time: 0.01, scans_to_average: 3 };
        let expected = vec![level; 2 * half_len + 1];
        let noise = NoiseConfig { enabled: true, rng_seed: seed, detector_background: 0.5 };
        let mut ifg = from_expected(expected, &scan, &noise, 55.0, Exec::Sequential);
        ifg.meta.provenance.push(("arm".into(), "sample".into()));
        let mut buf = Vec::new();
        io::write_interferogram(&mut buf, &ifg).unwrap();
        let back = io::read_interferogram(Cursor::new(&buf)).unwrap();
        let mut again = Vec::new();
        io::write_interferogram(&mut again, &back).unwrap();
        prop_assert_eq!(&back.counts, &ifg.counts);
        prop_assert_eq!(back.meta.noise, ifg.meta.noise);
        prop_assert_eq!(buf, again);
    }
}

#[test]
fn species_band_overrides_common_band() {
    let text = "gas.CH4.concentration = 0.003\ngas.CH4.linelist_path = a.par\ngas.N2O.concentration = 0.009\ngas.N2O.linelist_path = b.par\nfit.band_cm1.N2O = 2500 2630\nfit.band_cm1 = 2900 3100\n";
    let cfg = RunConfig::parse(text, Path::new(".")).unwrap();
    assert_eq!(cfg.fit_band("CH4"), Some((2900.0, 3100.0)));
    assert_eq!(cfg.fit_band("N2O"), Some((2500.0, 2630.0)));
}
