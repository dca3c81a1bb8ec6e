//! Simulation and analysis of Fourier-transform infrared spectroscopy with
//! undetected photons.
//!
//! A nonlinear interferometer pumps a crystal inside a cavity; the mid-IR idler
//! passes the gas cell, and its absorption shows up as reduced fringe
//! visibility in the visible signal arm. This crate models that chain end to end:
//!
//! - [`linelist`]: `.par` records, Voigt profiles, absorption coefficients
//! - [`optics`]: cavity enhancement, SPDC spectrum, visibility and cell transmission
//! - [`interferogram`]: noiseless synthesis, dispersion, Poisson detection and averaging
//! - [`fts`]: apodization, zero-filled FFT, instrument line shape
//! - [`retrieval`]: transmission quotient, 100 % line SNR, Levenberg-Marquardt fit
//! - [`config`], [`io`], [`pipeline`]: run files, text formats and the glue the CLI uses
//!
//! Wavenumbers are in cm⁻¹, OPD in cm, concentrations are mole fractions.
//! Kernels take an [`exec::Exec`] and give bit-identical results under either policy.

pub mod constants;
pub mod exec;
pub mod grid;
pub mod linelist;
pub mod optics;
pub mod interferogram;
pub mod fts;
pub mod retrieval;
pub mod config;
pub mod io;
pub mod pipeline;
