//! Root raised-cosine shaping pulse and its raised-cosine autocorrelation.
//!
//! With `x = t / T₀` the transmit/receive pulse is
//!
//! ```text
//!          sin(πx(1−β)) + 4βx·cos(πx(1+β))
//! h(t) =  ─────────────────────────────────  / √T₀
//!               πx·(1 − (4βx)²)
//! ```
//!
//! normalized to unit energy, and its autocorrelation is the raised-cosine
//! Nyquist pulse
//!
//! ```text
//! g(t) = sinc(x)·cos(πβx) / (1 − (2βx)²),   sinc(x) = sin(πx)/(πx).
//! ```
//!
//! Both functions are evaluated exactly for every `t`; truncation to `|t| ≤ νT`
//! is the business of the consumers in [`crate::channel`] and
//! [`crate::equalizer`].

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Relative distance to a removable singularity below which the limit
/// formula replaces the closed form.
const SINGULAR_TOL: f64 = 1e-8;

/// Root raised-cosine pulse parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    /// Roll-off factor β in (0, 1].
    pub rolloff: f64,
    /// Nyquist symbol period T₀ in seconds.
    pub t0: f64,
    /// Truncation half-width ν, counted in FTN symbol periods.
    pub nu: usize,
}

impl PulseSpec {
    pub fn new(rolloff: f64, t0: f64, nu: usize) -> Result<Self> {
        if !(rolloff > 0.0 && rolloff <= 1.0) {
            return Err(Error::invalid("rolloff", format!("{rolloff} not in (0, 1]")));
        }
        if !(t0 > 0.0 && t0.is_finite()) {
            return Err(Error::invalid("t0", format!("{t0} must be positive")));
        }
        if nu == 0 {
            return Err(Error::invalid("nu", "must be at least 1"));
        }
        Ok(Self { rolloff, t0, nu })
    }

    /// Root raised-cosine impulse response h(t), in 1/√s.
    pub fn rrc_impulse(&self, t: f64) -> f64 {
        let beta = self.rolloff;
        let x = t / self.t0;
        let scale = 1.0 / self.t0.sqrt();

        if x.abs() < SINGULAR_TOL {
            return scale * (1.0 - beta + 4.0 * beta / PI);
        }
        let bx = 4.0 * beta * x;
        if (1.0 - bx * bx).abs() < SINGULAR_TOL {
            let arg = PI / (4.0 * beta);
            return scale
                * (beta / SQRT_2)
                * ((1.0 + 2.0 / PI) * arg.sin() + (1.0 - 2.0 / PI) * arg.cos());
        }

        let num = (PI * x * (1.0 - beta)).sin() + bx * (PI * x * (1.0 + beta)).cos();
        let den = PI * x * (1.0 - bx * bx);
        scale * num / den
    }

    /// Raised-cosine autocorrelation g(t) of [`Self::rrc_impulse`];
    /// g(0) = 1 and g(k·T₀) = 0 for every non-zero integer k.
    pub fn nyquist_autocorr(&self, t: f64) -> f64 {
        let beta = self.rolloff;
        let x = t / self.t0;
        let bx = 2.0 * beta * x;
        if (1.0 - bx * bx).abs() < SINGULAR_TOL {
            return FRAC_PI_4 * sinc(1.0 / (2.0 * beta));
        }
        sinc(x) * (PI * beta * x).cos() / (1.0 - bx * bx)
    }

    /// g(t), forced to zero outside `|t| ≤ ν·T` for the symbol period `t_sym`.
    pub fn truncated_autocorr(&self, t: f64, t_sym: f64) -> f64 {
        if t.abs() > self.nu as f64 * t_sym * (1.0 + 1e-12) {
            0.0
        } else {
            self.nyquist_autocorr(t)
        }
    }
}

/// Normalized sinc, `sin(πx)/(πx)`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}
