mod common;

use common::quad::voigt_by_quadrature;
use qfts_core::linelist::{gaussian_profile, lorentz_profile, voigt_profile};

#[test]
fn spec_point_matches_quadrature() {
    let v = voigt_profile(0.05, 0.03, 0.02).unwrap();
    let q = voigt_by_quadrature(0.05, 0.03, 0.02);
    assert!(((v - q) / q).abs() <= 1e-6, "{v} vs {q}");
}

#[test]
fn lattice_matches_quadrature() {
    let detunings = [0.0, 0.02, 0.05, 0.2, 1.0];
    let dopplers = [0.003, 0.01, 0.03, 0.1];
    let lorentzes = [0.001, 0.01, 0.05, 0.1, 0.5];
    let mut worst = 0.0f64;
    for &d in &detunings {
        for &gd in &dopplers {
            for &gl in &lorentzes {
                let v = voigt_profile(d, gd, gl).unwrap();
                let q = voigt_by_quadrature(d, gd, gl);
                let rel = ((v - q) / q).abs();
                worst = worst.max(rel);
                assert!(rel <= 1e-6, "d={d} gd={gd} gl={gl}: {v} vs {q} (rel {rel:e})");
            }
        }
    }
    eprintln!("worst relative error {worst:e}");
}

#[test]
fn pure_limits_pointwise() {
    for i in 0..200 {
        let d = -1.0 + 0.01 * i as f64;
        let g = voigt_profile(d, 0.04, 0.0).unwrap();
        let gc = gaussian_profile(d, 0.04);
        assert!(gc == 0.0 || ((g - gc) / gc).abs() <= 1e-9);
        let l = voigt_profile(d, 0.0, 0.07).unwrap();
        let lc = lorentz_profile(d, 0.07);
        assert!(((l - lc) / lc).abs() <= 1e-9);
    }
}

#[test]
fn area_within_wing_truncation() {
    for &(gd, gl) in &[(0.01, 0.06), (0.03, 0.02), (0.05, 0.001), (0.002, 0.1)] {
        let w = 50.0 * f64::max(gd, gl);
        let n = 200_000;
        let h = 2.0 * w / n as f64;
        let area: f64 = (0..=n)
            .map(|i| {
                let x = -w + i as f64 * h;
                let wt = if i == 0 || i == n { 0.5 } else { 1.0 };
                wt * voigt_profile(x, gd, gl).unwrap()
            })
            .sum::<f64>()
            * h;
        // A pure Lorentzian cut at ±50 HWHM keeps (2/π)·atan(50) = 0.98727 of its
        // area, so the 0.99 floor only holds once the Doppler width is comparable.
        let floor = if gd >= 0.5 * gl { 0.99 } else { 2.0 / std::f64::consts::PI * 50f64.atan() - 1e-6 };
        assert!((floor..=1.0 + 1e-9).contains(&area), "gd={gd} gl={gl} area={area}");
    }
}
