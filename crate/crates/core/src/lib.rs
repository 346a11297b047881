//! LoRa physical-layer performance laboratory.
//!
//! Chirp-spread-spectrum modulation and detection, exact discrete-time
//! channel models for multipath and same-SF interference, closed-form DFT
//! spectra, semi-analytical symbol-error-rate engines for coherent and
//! non-coherent detection, and a deterministic Monte Carlo simulator to
//! cross-validate them. A CLI (`lora-phy-lab`) sweeps SNR grids and
//! reproduces canned experiments as CSV files.
//!
//! ```
//! use num_complex::Complex64;
//! use lora_phy_lab::channel::MultipathChannel;
//! use lora_phy_lab::montecarlo::sigma2_from_snr_db;
//! use lora_phy_lab::ser_mpc::ser_mpc_noncoherent;
//! use lora_phy_lab::special_fn::gauss_hermite;
//! use lora_phy_lab::waveform::LoRaParams;
//!
//! let p = LoRaParams::new(7)?;
//! let ch = MultipathChannel::two_path(Complex64::new(0.7, 0.0), 1, p)?;
//! let gh = gauss_hermite(15)?;
//! let ser = ser_mpc_noncoherent(&ch, sigma2_from_snr_db(-10.0), p, &gh);
//! assert!(ser > 0.0 && ser < 1.0);
//! # Ok::<(), lora_phy_lab::Error>(())
//! ```

pub mod analytic_dft;
pub mod channel;
pub mod cli;
pub mod error;
pub mod montecarlo;
pub mod ser_interference;
pub mod ser_mpc;
pub mod special_fn;
pub mod waveform;

pub use error::{Error, Result};

// Compile and run the guide's code blocks as part of `cargo test`.
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
pub struct BookIntroduction;
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/waveform.md")]
pub struct BookWaveform;
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/channels.md")]
pub struct BookChannels;
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/spectra.md")]
pub struct BookSpectra;
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/error-rates.md")]
pub struct BookErrorRates;
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/interference.md")]
pub struct BookInterference;
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/montecarlo.md")]
pub struct BookMonteCarlo;
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
pub struct BookCli;
