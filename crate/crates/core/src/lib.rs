//! Faster-than-Nyquist (FTN) single-carrier link simulator.
//!
//! Symbols are shaped with a root raised-cosine pulse at a period `T = γ·T₀`
//! shorter than the Nyquist period, pass through a tap-delay-line channel and
//! a matched filter, and are recovered with block frequency-domain
//! equalization. Two block receivers are provided: overlap FDE, which needs
//! no guard interval and trims the edges of each equalized window, and the
//! conventional cyclic-prefix FDE used as a baseline. Equalizer weights come
//! in three flavours: white-noise MMSE, full colored-noise MMSE and its
//! one-tap diagonal approximation.
//!
//! Module map:
//!
//! * [`pulse`]: root raised-cosine impulse and its Nyquist autocorrelation.
//! * [`channel`]: tap-delay-line channels and their symbol-rate equivalents.
//! * [`ftnlink`]: BPSK mapping, colored matched-filter noise, received-stream
//!   synthesis and an oversampled waveform reference.
//! * [`equalizer`]: circulant spectra, MMSE weights, overlap and CP receivers.
//! * [`harness`]: BER and per-position RMSE experiment drivers.
//! * [`cli`]: the `ftnsim` command-line front end.
//! * [`oracle`]: dense-matrix reference computations used by `selfcheck`.

pub mod channel;
pub mod cli;
pub mod equalizer;
mod error;
mod fft;
pub mod ftnlink;
pub mod harness;
pub mod oracle;
pub mod pulse;

pub use error::{Error, Result};

/// Complex baseband sample type used throughout the crate.
pub type C64 = num_complex::Complex64;
