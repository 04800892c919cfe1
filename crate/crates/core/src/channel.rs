//! Tap-delay-line channels and their symbol-rate discrete equivalent.
//!
//! The composite response of pulse, channel and matched filter is
//! `q(t) = Σ_k c_k · g(t − τ_k)`; sampling it at the FTN period `T = γ·T₀`
//! over `n ∈ [n_min, n_max]` gives the taps used by the block model, with
//! `n_min = −ν + ⌈T_min/T⌉` and `n_max = ν + ⌊T_max/T⌋`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::pulse::PulseSpec;
use crate::{Error, Result, C64};

/// Slack used when rounding `T_min/T`, `T_max/T` to integers so that delays
/// lying on the symbol grid are not pushed across by floating-point noise.
const GRID_EPS: f64 = 1e-9;

/// Continuous-time channel `c(t) = Σ_k c_k δ(t − τ_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TapDelayLineJson", into = "TapDelayLineJson")]
pub struct TapDelayLine {
    delays: Vec<f64>,
    gains: Vec<C64>,
}

impl TapDelayLine {
    pub fn new(delays: Vec<f64>, gains: Vec<C64>) -> Result<Self> {
        if delays.is_empty() {
            return Err(Error::invalid("delays", "channel needs at least one tap"));
        }
        if delays.len() != gains.len() {
            return Err(Error::invalid(
                "gains",
                format!("{} gains for {} delays", gains.len(), delays.len()),
            ));
        }
        if delays.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::invalid("delays", "delays must be finite and non-negative"));
        }
        if delays.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("delays", "delays must be strictly increasing"));
        }
        Ok(Self { delays, gains })
    }

    pub fn delays(&self) -> &[f64] {
        &self.delays
    }

    pub fn gains(&self) -> &[C64] {
        &self.gains
    }

    pub fn t_min(&self) -> f64 {
        self.delays[0]
    }

    pub fn t_max(&self) -> f64 {
        *self.delays.last().unwrap()
    }

    pub fn num_taps(&self) -> usize {
        self.delays.len()
    }
}

/// On-disk form: `{"delays_s": [...], "gains_re": [...], "gains_im": [...]}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TapDelayLineJson {
    delays_s: Vec<f64>,
    gains_re: Vec<f64>,
    gains_im: Vec<f64>,
}

impl TryFrom<TapDelayLineJson> for TapDelayLine {
    type Error = Error;

    fn try_from(j: TapDelayLineJson) -> Result<Self> {
        if j.gains_re.len() != j.gains_im.len() {
            return Err(Error::invalid("gains_im", "length differs from gains_re"));
        }
        let gains = j
            .gains_re
            .iter()
            .zip(&j.gains_im)
            .map(|(&re, &im)| C64::new(re, im))
            .collect();
        TapDelayLine::new(j.delays_s, gains)
    }
}

impl From<TapDelayLine> for TapDelayLineJson {
    fn from(ch: TapDelayLine) -> Self {
        TapDelayLineJson {
            gains_re: ch.gains.iter().map(|g| g.re).collect(),
            gains_im: ch.gains.iter().map(|g| g.im).collect(),
            delays_s: ch.delays,
        }
    }
}

/// Single unit tap at zero delay (the AWGN case).
pub fn identity_channel() -> TapDelayLine {
    TapDelayLine {
        delays: vec![0.0],
        gains: vec![C64::new(1.0, 0.0)],
    }
}

/// Rayleigh block-fading channel with `num_taps` equally spaced taps over
/// `[0, span]` and a uniform power-delay profile of unit total average power.
pub fn rayleigh_channel(num_taps: usize, span: f64, rng_seed: u64) -> Result<TapDelayLine> {
    if num_taps < 2 {
        return Err(Error::invalid("num_taps", format!("{num_taps} < 2")));
    }
    if !(span > 0.0 && span.is_finite()) {
        return Err(Error::invalid("span", format!("{span} must be positive")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let sd = (0.5 / num_taps as f64).sqrt();
    let normal = Normal::new(0.0, sd).expect("finite sd");
    let delays = (0..num_taps)
        .map(|m| m as f64 * span / (num_taps - 1) as f64)
        .collect();
    let gains = (0..num_taps)
        .map(|_| C64::new(normal.sample(&mut rng), normal.sample(&mut rng)))
        .collect();
    TapDelayLine::new(delays, gains)
}

/// Continuous composite response `q(t) = Σ_k c_k·g(t − τ_k)`, untruncated.
pub fn combined_response(spec: &PulseSpec, ch: &TapDelayLine, t: f64) -> C64 {
    ch.delays
        .iter()
        .zip(&ch.gains)
        .map(|(&tau, &c)| c * spec.nyquist_autocorr(t - tau))
        .sum()
}

/// Symbol-rate taps `q[n]` of a channel sampled at period `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteChannel {
    taps: Vec<C64>,
    n_min: i64,
    n_max: i64,
    t: f64,
}

impl DiscreteChannel {
    /// `taps[i]` holds `q[n_min + i]`.
    pub fn new(taps: Vec<C64>, n_min: i64, t: f64) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::invalid("taps", "empty"));
        }
        let n_max = n_min + taps.len() as i64 - 1;
        Ok(Self { taps, n_min, n_max, t })
    }

    pub fn taps(&self) -> &[C64] {
        &self.taps
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.n_max
    }

    /// Sampling (symbol) period T.
    pub fn period(&self) -> f64 {
        self.t
    }

    /// Channel memory `n_max − n_min`.
    pub fn span(&self) -> usize {
        (self.n_max - self.n_min) as usize
    }

    /// `q[n]`, zero outside `[n_min, n_max]`.
    pub fn tap(&self, n: i64) -> C64 {
        if n < self.n_min || n > self.n_max {
            C64::new(0.0, 0.0)
        } else {
            self.taps[(n - self.n_min) as usize]
        }
    }
}

/// `(n_min, n_max)` for a pulse/channel pair sampled at `T = γ·T₀`.
pub fn index_bounds(spec: &PulseSpec, ch: &TapDelayLine, gamma: f64) -> (i64, i64) {
    let t = gamma * spec.t0;
    let nu = spec.nu as i64;
    let n_min = -nu + (ch.t_min() / t - GRID_EPS).ceil() as i64;
    let n_max = nu + (ch.t_max() / t + GRID_EPS).floor() as i64;
    (n_min, n_max)
}

/// Samples `q(nT)` on `[n_min, n_max]`, dropping every term `g(nT − τ_k)` with
/// `|nT − τ_k| > νT`.
pub fn discretize(spec: &PulseSpec, ch: &TapDelayLine, gamma: f64) -> Result<DiscreteChannel> {
    check_gamma(gamma)?;
    let t = gamma * spec.t0;
    let (n_min, n_max) = index_bounds(spec, ch, gamma);
    let taps = (n_min..=n_max)
        .map(|n| {
            let tn = n as f64 * t;
            ch.delays
                .iter()
                .zip(&ch.gains)
                .map(|(&tau, &c)| c * spec.truncated_autocorr(tn - tau, t))
                .sum()
        })
        .collect();
    DiscreteChannel::new(taps, n_min, t)
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("gamma", format!("{gamma} not in (0, 1]")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const G_0_8: f64 = 0.200_751_449_129_401_02;
    const G_1_6: f64 = -0.098_122_705_972_353_9;

    fn spec() -> PulseSpec {
        PulseSpec::new(0.5, 1.0, 10).unwrap()
    }

    #[test]
    fn identity_is_single_unit_tap() {
        let ch = identity_channel();
        assert_eq!(ch.delays(), &[0.0]);
        assert_eq!(ch.gains(), &[C64::new(1.0, 0.0)]);
        assert_eq!(ch.t_min(), 0.0);
        assert_eq!(ch.t_max(), 0.0);
    }

    #[test]
    fn tap_delay_line_validation() {
        let g = C64::new(1.0, 0.0);
        assert!(TapDelayLine::new(vec![], vec![]).is_err());
        assert!(TapDelayLine::new(vec![0.0, 0.0], vec![g, g]).is_err());
        assert!(TapDelayLine::new(vec![1.0, 0.5], vec![g, g]).is_err());
        assert!(TapDelayLine::new(vec![-1.0], vec![g]).is_err());
        assert!(TapDelayLine::new(vec![0.0], vec![g, g]).is_err());
    }

    #[test]
    fn nyquist_rate_identity_is_delta() {
        let d = discretize(&spec(), &identity_channel(), 1.0).unwrap();
        assert_eq!((d.n_min(), d.n_max()), (-10, 10));
        for n in -10..=10 {
            let want = if n == 0 { 1.0 } else { 0.0 };
            assert!((d.tap(n) - want).norm() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn ftn_identity_taps() {
        let d = discretize(&spec(), &identity_channel(), 0.8).unwrap();
        assert!((d.tap(0).re - 1.0).abs() < 1e-15);
        assert!((d.tap(1).re - G_0_8).abs() < 1e-12);
        assert!((d.tap(-1).re - G_0_8).abs() < 1e-12);
        assert!((d.tap(2).re - G_1_6).abs() < 1e-12);
        for n in 1..=10 {
            assert_eq!(d.tap(n), d.tap(-n));
            assert_eq!(d.tap(n).im, 0.0);
        }
    }

    #[test]
    fn rejects_gamma_out_of_range() {
        assert!(discretize(&spec(), &identity_channel(), 0.0).is_err());
        assert!(discretize(&spec(), &identity_channel(), 1.01).is_err());
    }

    #[test]
    fn combined_response_shift_and_sum() {
        let s = spec();
        let a = C64::new(0.3, -0.7);
        let ch = TapDelayLine::new(vec![0.37], vec![a]).unwrap();
        for t in [-2.0, -0.1, 0.0, 0.37, 1.5] {
            let want = a * s.nyquist_autocorr(t - 0.37);
            assert!((combined_response(&s, &ch, t) - want).norm() < 1e-15);
        }
        let two = TapDelayLine::new(vec![0.0, 1.0], vec![C64::new(1.0, 0.0); 2]).unwrap();
        assert!((combined_response(&s, &two, 0.0) - 1.0).norm() < 1e-12);
        let id = identity_channel();
        assert_eq!(combined_response(&s, &id, 0.8).re, s.nyquist_autocorr(0.8));
    }

    #[test]
    fn rayleigh_layout_and_determinism() {
        let t = 0.765;
        let ch = rayleigh_channel(10, 16.0 * t, 42).unwrap();
        assert_eq!(ch.num_taps(), 10);
        assert_eq!(ch.t_min(), 0.0);
        assert!((ch.t_max() - 16.0 * t).abs() < 1e-12);
        assert_eq!(ch, rayleigh_channel(10, 16.0 * t, 42).unwrap());
        assert_ne!(ch, rayleigh_channel(10, 16.0 * t, 43).unwrap());
        assert!(rayleigh_channel(1, 1.0, 0).is_err());
    }

    #[test]
    fn rayleigh_bounds_cover_sixteen_periods() {
        for gamma in [0.667, 0.719, 0.765, 0.849, 1.0] {
            let ch = rayleigh_channel(10, 16.0 * gamma, 1).unwrap();
            let (lo, hi) = index_bounds(&spec(), &ch, gamma);
            assert_eq!((lo, hi), (-10, 26), "gamma={gamma}");
        }
    }

    #[test]
    fn rayleigh_unit_average_power() {
        let trials = 100_000;
        let total: f64 = (0..trials)
            .map(|s| {
                rayleigh_channel(10, 16.0, s)
                    .unwrap()
                    .gains()
                    .iter()
                    .map(|g| g.norm_sqr())
                    .sum::<f64>()
            })
            .sum();
        let mean = total / trials as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean power {mean}");
    }

    #[test]
    fn json_round_trip_and_schema() {
        let ch = rayleigh_channel(4, 3.0, 9).unwrap();
        let text = serde_json::to_string(&ch).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v.get("delays_s").is_some() && v.get("gains_re").is_some() && v.get("gains_im").is_some());
        let back: TapDelayLine = serde_json::from_str(&text).unwrap();
        assert_eq!(back, ch);
        let bad = r#"{"delays_s":[1.0,0.0],"gains_re":[1,1],"gains_im":[0,0]}"#;
        assert!(serde_json::from_str::<TapDelayLine>(bad).is_err());
    }
}
