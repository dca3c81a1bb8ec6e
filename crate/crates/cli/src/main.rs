//! `qfts`: simulate, transform and fit undetected-photon FTIR measurements.
//!
//! Exit codes: 0 success, 2 configuration error, 3 I/O or input-format error,
//! 4 numerical failure.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qfts_core::config::{ConfigError, RunConfig};
use qfts_core::exec::Exec;
use qfts_core::fts::{ApodizationWindow, WindowKind};
use qfts_core::io::{self, FormatError, InstrumentInfo, Metadata};
use qfts_core::pipeline::{self, Experiment, PipelineError, INITIAL_GUESS};
use qfts_core::retrieval;

#[derive(Parser)]
#[command(name = "qfts", version, about = "Undetected-photon Fourier-transform spectroscopy pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write `<out>.ref.ifg` (nitrogen-filled cell) and `<out>.smp.ifg` (configured mixture).
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apodize and transform an interferogram into an amplitude spectrum.
    Spectrum {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Take window and zero-fill defaults from this config.
        #[arg(long)]
        config: Option<PathBuf>,
        /// gaussian or boxcar
        #[arg(long)]
        window: Option<WindowKind>,
        /// Gaussian window FWHM in mm of OPD.
        #[arg(long)]
        fwhm_mm_opd: Option<f64>,
        #[arg(long)]
        zero_fill: Option<usize>,
    },
    /// Sample/reference amplitude quotient.
    Transmit {
        #[arg(long)]
        sample: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = retrieval::DEFAULT_THRESHOLD)]
        threshold: f64,
    },
    /// SNR of the 100 % line in a feature-free window.
    Snr {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Window in cm⁻¹ (lo hi); overrides the config.
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        window: Option<Vec<f64>>,
    },
    /// Fit concentrations, each species on its own band.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Restrict to these species (default: every gas with a fit band).
        #[arg(long)]
        species: Vec<String>,
        /// Band in cm⁻¹ (lo hi); only with a single species.
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        band: Option<Vec<f64>>,
        /// Report file; residuals go to `<out>.<species>.resid`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pure-species absorption coefficient of one configured gas on the config grid.
    Alpha {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        species: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Io(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Io(_) => 3,
            Failure::Numerical(_) => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Io(m) => write!(f, "I/O error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Config(c) => c.into(),
            PipelineError::Input { .. } => Failure::Io(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<retrieval::RetrievalError> for Failure {
    fn from(e: retrieval::RetrievalError) -> Self {
        Failure::Numerical(e.to_string())
    }
}

impl From<qfts_core::fts::FtsError> for Failure {
    fn from(e: qfts_core::fts::FtsError) -> Self {
        Failure::Numerical(e.to_string())
    }
}

fn read_with<T>(path: &Path, f: impl FnOnce(BufReader<File>) -> Result<T, FormatError>) -> Result<T, Failure> {
    let file = File::open(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    f(BufReader::new(file)).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), Failure> {
    let io_err = |e: std::io::Error| Failure::Io(format!("{}: {e}", path.display()));
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    f(&mut w).and_then(|_| w.flush()).map_err(io_err)
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn interval(v: &[f64]) -> Result<(f64, f64), Failure> {
    match v {
        [lo, hi] if lo < hi => Ok((*lo, *hi)),
        _ => Err(Failure::Config(format!("interval {v:?} must be `lo hi` with lo < hi"))),
    }
}

fn simulate(config: &Path, out: &Path) -> Result<(), Failure> {
    let exp = Experiment::load(RunConfig::load(config)?)?;
    let pair = exp.simulate(Exec::default())?;
    let ref_path = with_suffix(out, ".ref.ifg");
    let smp_path = with_suffix(out, ".smp.ifg");
    write_with(&ref_path, |w| io::write_interferogram(w, &pair.reference))?;
    write_with(&smp_path, |w| io::write_interferogram(w, &pair.sample))?;
    println!("wrote {} and {}", ref_path.display(), smp_path.display());
    Ok(())
}

fn spectrum(
    input: &Path,
    out: &Path,
    config: Option<&Path>,
    window: Option<WindowKind>,
    fwhm_mm_opd: Option<f64>,
    zero_fill: Option<usize>,
) -> Result<(), Failure> {
    let cfg = match config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let ifg = read_with(input, io::read_interferogram)?;
    let kind = window.unwrap_or(cfg.apodization.kind);
    let win = match kind {
        WindowKind::Gaussian => ApodizationWindow::gaussian(fwhm_mm_opd.map_or(cfg.apodization.fwhm, |mm| mm * 0.1)),
        WindowKind::Boxcar => ApodizationWindow::boxcar(),
    };
    win.validate().map_err(|e| Failure::Config(e.to_string()))?;
    let instrument = InstrumentInfo { window: win, axis: ifg.axis, zero_fill: zero_fill.unwrap_or(cfg.zero_fill) };
    let spec = pipeline::spectrum_of(&ifg, &instrument)?;
    let mut meta = instrument.to_metadata();
    for (k, v) in &ifg.meta.provenance {
        meta.push(k.clone(), v);
    }
    write_with(out, |w| io::write_spectrum(w, &spec, &meta))?;
    let (lo, hi) = spec.band_above(cfg.threshold);
    println!(
        "wrote {} ({} bins, ILS FWHM {:.3} cm-1, band above {} of peak: {:.1}..{:.1} cm-1)",
        out.display(),
        spec.amplitude.len(),
        meta.get("ils_fwhm_cm1").and_then(|v| v.parse::<f64>().ok()).unwrap_or(f64::NAN),
        cfg.threshold,
        spec.grid.at(lo),
        spec.grid.at(hi)
    );
    Ok(())
}

fn transmit(sample: &Path, reference: &Path, out: &Path, threshold: f64) -> Result<(), Failure> {
    let (smp, smp_meta) = read_with(sample, io::read_spectrum)?;
    let (rf, _) = read_with(reference, io::read_spectrum)?;
    let t = retrieval::transmission(&smp, &rf, threshold)?;
    let mut meta = Metadata::default();
    if let Ok(info) = InstrumentInfo::from_metadata(&smp_meta) {
        meta = info.to_metadata();
    }
    meta.push("transmission.threshold", threshold);
    write_with(out, |w| io::write_transmission(w, &t, &meta))?;
    let (lo, hi) = t.valid_band();
    println!("wrote {} (valid band {lo:.2}..{hi:.2} cm-1)", out.display());
    Ok(())
}

fn snr(input: &Path, config: Option<&Path>, window: Option<&[f64]>) -> Result<(), Failure> {
    let cfg = match config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let window = match window {
        Some(w) => interval(w)?,
        None => cfg.snr_window,
    };
    let (t, _) = read_with(input, io::read_transmission)?;
    let value = retrieval::snr_100line(&t, window)?;
    println!("snr_100line = {value}");
    println!("window_cm1 = {} {}", window.0, window.1);
    Ok(())
}

fn fit(input: &Path, config: &Path, species: &[String], band: Option<&[f64]>, out: Option<&Path>) -> Result<(), Failure> {
    let exp = Experiment::load(RunConfig::load(config)?)?;
    let (t, meta) = read_with(input, io::read_transmission)?;
    let instrument = InstrumentInfo::from_metadata(&meta).map_err(|e| Failure::Io(format!("{}: {e}", input.display())))?;
    let names: Vec<String> = if species.is_empty() {
        exp.lists.iter().map(|(g, _)| g.name.clone()).filter(|n| exp.config.fit_band(n).is_some()).collect()
    } else {
        species.to_vec()
    };
    if band.is_some() && names.len() != 1 {
        return Err(Failure::Config("--band needs exactly one --species".into()));
    }
    if names.is_empty() {
        return Err(Failure::Config("no species with a fit band to fit".into()));
    }
    let mut report = Vec::new();
    for name in &names {
        let band = match band {
            Some(b) => interval(b)?,
            None => exp
                .config
                .fit_band(name)
                .ok_or_else(|| Failure::Config(format!("no fit.band_cm1.{name} configured")))?,
        };
        let ctx = exp.model_context(Exec::default(), name, band, &instrument)?;
        let result = retrieval::fit_concentration(&t, &ctx, &[INITIAL_GUESS], band)?;
        let (c, s) = (result.concentrations[0], result.sigmas[0]);
        println!(
            "{name}: c = {}  [{}]  (1 sigma, band {}..{} cm-1, {} iterations{})",
            io::format_percent(c, s),
            io::concise_percent(c, s),
            band.0,
            band.1,
            result.iterations,
            if result.converged { "" } else { ", NOT converged" }
        );
        io::write_fit_report(&mut report, &result).map_err(|e| Failure::Io(e.to_string()))?;
        if let Some(out) = out {
            write_with(&with_suffix(out, &format!(".{name}.resid")), |w| io::write_residuals(w, &result))?;
        }
        if !result.converged {
            if let Some(out) = out {
                write_with(out, |w| w.write_all(&report))?;
            }
            return Err(Failure::Numerical(format!("fit for {name} did not converge in {} iterations", result.iterations)));
        }
    }
    if let Some(out) = out {
        write_with(out, |w| w.write_all(&report))?;
    }
    Ok(())
}

fn alpha(config: &Path, species: &str, out: &Path) -> Result<(), Failure> {
    let exp = Experiment::load(RunConfig::load(config)?)?;
    let grid = exp.config.grid;
    let all = exp.absorption(Exec::default(), &grid)?;
    let (_, _, a) = all
        .iter()
        .find(|(n, _, _)| n == species)
        .ok_or_else(|| Failure::Config(format!("species {species:?} is not configured")))?;
    write_with(out, |w| io::write_absorption(w, a))?;
    println!("wrote {}", out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate { config, out } => simulate(&config, &out),
        Command::Spectrum { input, out, config, window, fwhm_mm_opd, zero_fill } => {
            spectrum(&input, &out, config.as_deref(), window, fwhm_mm_opd, zero_fill)
        }
        Command::Transmit { sample, reference, out, threshold } => transmit(&sample, &reference, &out, threshold),
        Command::Snr { input, config, window } => snr(&input, config.as_deref(), window.as_deref()),
        Command::Fit { input, config, species, band, out } => fit(&input, &config, &species, band.as_deref(), out.as_deref()),
        Command::Alpha { config, species, out } => alpha(&config, &species, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qfts: {e}");
            ExitCode::from(e.code())
        }
    }
}
