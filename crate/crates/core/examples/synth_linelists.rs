//! Writes the synthetic band line lists under `data/`.
//!
//! The lists mimic the CH4 ν3 band near 3019 cm⁻¹ and the N2O 2ν1 band near
//! 2563 cm⁻¹: rigid-rotor P/Q/R branches with Boltzmann intensities, split
//! CH4 J manifolds, and a sprinkling of weak lines. Positions and widths are
//! plausible, not database values.
//!
//! Usage: cargo run -p qfts-core --example synth_linelists [out_dir]

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use qfts_core::linelist::{to_par_record, SpectralLine};
use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// hc/k in cm·K.
const C2: f64 = 1.438_776_877;
const T_REF: f64 = 296.0;

fn boltzmann(e_lower: f64) -> f64 {
    (-C2 * e_lower / T_REF).exp()
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn ch4(rng: &mut ChaCha8Rng) -> Vec<SpectralLine> {
    let (nu0, b, zeta) = (3018.92, 5.241, 0.055);
    let band_strength = 1.1e-17;
    let mut raw = Vec::new();

    for j in 0..=16u32 {
        let jf = j as f64;
        let e = b * jf * (jf + 1.0);
        // Spherical-top nuclear-spin and degeneracy factor, smoothed.
        let pop = (2.0 * jf + 1.0).powi(2) * boltzmann(e);
        let m_r = jf + 1.0;
        let m_p = -jf;
        let components = (j + 1).min(5);
        for (m, hl, max_j) in [(m_r, (jf + 1.0) / (2.0 * jf + 1.0), 11), (m_p, jf / (2.0 * jf + 1.0), 16)] {
            if j > max_j || hl == 0.0 {
                continue;
            }
            let center = nu0 + 2.0 * b * (1.0 - zeta) * m - 0.003 * m * m;
            let spread = 0.04 * jf;
            for k in 0..components {
                let offset = if components == 1 {
                    0.0
                } else {
                    spread * (2.0 * k as f64 / (components - 1) as f64 - 1.0) + 0.01 * (unit(rng) - 0.5)
                };
                raw.push((center + offset, pop * hl / components as f64, j));
            }
        }
        if j >= 1 {
            let q = nu0 - 0.02 * jf * (jf + 1.0) / 10.0;
            raw.push((q, 0.25 * pop / (2.0 * jf + 1.0), j));
        }
    }
    let total: f64 = raw.iter().map(|r| r.1).sum();
    let mut lines: Vec<SpectralLine> = raw
        .into_iter()
        .map(|(nu, w, j)| SpectralLine {
            molec_id: 6,
            local_iso_id: 1,
            nu0: nu,
            sw: band_strength * w / total,
            gamma_air: 0.065 - 0.0012 * j as f64,
            gamma_self: 0.08 - 0.001 * j as f64,
            elower: b * j as f64 * (j as f64 + 1.0),
            n_air: 0.72,
            delta_air: -0.0055,
        })
        .collect();

    // Hot-band and combination-band clutter, kept below 3150 cm⁻¹.
    for _ in 0..1400 {
        let nu = 2850.0 + 299.0 * unit(rng);
        let sw = 10f64.powf(-23.0 + 2.3 * unit(rng));
        let j = (unit(rng) * 15.0) as u32;
        lines.push(SpectralLine {
            molec_id: 6,
            local_iso_id: 1,
            nu0: nu,
            sw,
            gamma_air: 0.065 - 0.0012 * j as f64,
            gamma_self: 0.08 - 0.001 * j as f64,
            elower: 100.0 + 1500.0 * unit(rng),
            n_air: 0.72,
            delta_air: -0.0055,
        });
    }
    lines
}

fn n2o() -> Vec<SpectralLine> {
    let (nu0, b, alpha) = (2563.339, 0.4190, 0.0017);
    let band_strength = 2.0e-18;
    let mut raw = Vec::new();
    for j in 0..=80u32 {
        let jf = j as f64;
        let e = b * jf * (jf + 1.0);
        let pop = (2.0 * jf + 1.0) * boltzmann(e);
        let b_up = b - alpha;
        let r = nu0 + b_up * (jf + 1.0) * (jf + 2.0) - b * jf * (jf + 1.0);
        let p = nu0 + b_up * (jf - 1.0) * jf - b * jf * (jf + 1.0);
        if (2500.0..=2630.0).contains(&r) {
            raw.push((r, pop * (jf + 1.0) / (2.0 * jf + 1.0), j));
        }
        if j >= 1 && (2500.0..=2630.0).contains(&p) {
            raw.push((p, pop * jf / (2.0 * jf + 1.0), j));
        }
    }
    let total: f64 = raw.iter().map(|r| r.1).sum();
    raw.into_iter()
        .map(|(nu, w, j)| SpectralLine {
            molec_id: 4,
            local_iso_id: 1,
            nu0: nu,
            sw: band_strength * w / total,
            gamma_air: 0.085 - 0.0003 * j as f64,
            gamma_self: 0.105 - 0.0003 * j as f64,
            elower: b * j as f64 * (j as f64 + 1.0),
            n_air: 0.75,
            delta_air: -0.0021,
        })
        .collect()
}

fn write(path: PathBuf, mut lines: Vec<SpectralLine>) -> std::io::Result<()> {
    lines.sort_by(|a, b| a.nu0.total_cmp(&b.nu0));
    let mut f = fs::File::create(&path)?;
    for l in &lines {
        writeln!(f, "{}", to_par_record(l).expect("line fits the record layout"))?;
    }
    println!("{}: {} lines", path.display(), lines.len());
    Ok(())
}

fn main() -> std::io::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data"));
    fs::create_dir_all(&out)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3018);
    write(out.join("ch4_band.par"), ch4(&mut rng))?;
    write(out.join("n2o_band.par"), n2o())?;
    Ok(())
}
