//! Runs the full pipeline on a config and prints SNR and fits.
//!
//! Usage: cargo run --release -p qfts-core --example calibrate -- configs/mixture.conf

use std::time::Instant;

use qfts_core::config::RunConfig;
use qfts_core::exec::Exec;
use qfts_core::io::concise_percent;
use qfts_core::pipeline::Experiment;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "configs/mixture.conf".into());
    let t0 = Instant::now();
    let exp = Experiment::load(RunConfig::load(path.as_ref())?)?;
    let pair = exp.simulate(Exec::default())?;
    println!("simulate {:.2?}", t0.elapsed());
    let an = exp.analyze(&pair)?;
    let (lo, hi) = an.transmission.valid_band();
    println!("valid band {lo:.1}..{hi:.1} ({:.0} cm-1)", hi - lo);
    println!("snr {:.1}", exp.snr(&an.transmission)?);
    for fit in exp.fit_all(Exec::default(), &an.transmission, &an.instrument)? {
        println!(
            "{} c = {} sigma = {:.3e} chi2 = {:.3e} iters {} conv {}",
            fit.species[0],
            concise_percent(fit.concentrations[0], fit.sigmas[0]),
            fit.sigmas[0],
            fit.reduced_chi2,
            fit.iterations,
            fit.converged
        );
    }
    println!("total {:.2?}", t0.elapsed());
    Ok(())
}
