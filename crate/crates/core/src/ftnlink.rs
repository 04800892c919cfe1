//! Transmit symbols, matched-filter noise and the sampled received stream
//! `r[n] = Σ_m q[n−m]·s[m] + η[n]`.
//!
//! The sampled noise is colored: `E{η[n]η*[m]} = N₀·g((n−m)T)`. Two
//! generators are provided. [`colored_noise`] colors a white draw with the
//! symmetric square root of a circulant embedding of the banded Toeplitz
//! covariance (exact for any length, `O(L log L)`), and
//! [`colored_noise_block`] factors the dense Toeplitz matrix directly.
//! [`waveform_oracle`] simulates the continuous-time chain on a fine grid and
//! serves as an independent reference for the discrete model.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::{self, DiscreteChannel, TapDelayLine};
use crate::fft::FftPair;
use crate::pulse::PulseSpec;
use crate::{Error, Result, C64};

/// Eigenvalues above `-EIG_CLIP_TOL·N₀` are clipped to zero; anything more
/// negative means the covariance is broken.
pub const EIG_CLIP_TOL: f64 = 1e-8;

/// A sequence of transmitted symbols with nominal power σ_s².
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolStream {
    pub symbols: Vec<C64>,
    pub sigma2: f64,
}

impl SymbolStream {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// BPSK mapping: bit 0 → `+√σ_s²`, bit 1 → `−√σ_s²`.
pub fn modulate_bpsk(bits: &[u8], sigma2: f64) -> Result<SymbolStream> {
    if sigma2.is_nan() || sigma2 <= 0.0 {
        return Err(Error::invalid("sigma2", format!("{sigma2} must be positive")));
    }
    let a = sigma2.sqrt();
    let symbols = bits
        .iter()
        .map(|&b| C64::new(if b == 0 { a } else { -a }, 0.0))
        .collect();
    Ok(SymbolStream { symbols, sigma2 })
}

/// Uniform random bits from a seeded generator.
pub fn random_bits(len: usize, rng: &mut impl Rng) -> Vec<u8> {
    (0..len).map(|_| rng.random::<bool>() as u8).collect()
}

/// Stationary matched-filter noise statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub n0: f64,
    /// `N₀·g(d·T)` for `d = 0..=D`; lags beyond `D` are taken as zero.
    pub cov_lags: Vec<f64>,
}

impl NoiseModel {
    /// Covariance lags `N₀·g(dγT₀)` up to `max_lag`, without ν-truncation.
    pub fn new(spec: &PulseSpec, gamma: f64, n0: f64, max_lag: usize) -> Result<Self> {
        channel::check_gamma(gamma)?;
        if !(n0 >= 0.0 && n0.is_finite()) {
            return Err(Error::invalid("n0", format!("{n0} must be non-negative")));
        }
        let t = gamma * spec.t0;
        let cov_lags = (0..=max_lag)
            .map(|d| n0 * spec.nyquist_autocorr(d as f64 * t))
            .collect();
        Ok(Self { n0, cov_lags })
    }

    /// Lag bandwidth D used by the block experiments: `n_max − n_min + N`.
    pub fn block_bandwidth(dch: &DiscreteChannel, n: usize) -> usize {
        dch.span() + n
    }

    pub fn max_lag(&self) -> usize {
        self.cov_lags.len() - 1
    }

    /// Covariance at lag `d` (symmetric, zero past `D`).
    pub fn lag(&self, d: i64) -> f64 {
        self.cov_lags
            .get(d.unsigned_abs() as usize)
            .copied()
            .unwrap_or(0.0)
    }
}

fn complex_normal(rng: &mut impl Rng, var: f64) -> C64 {
    let sd = (0.5 * var).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(sd * re, sd * im)
}

/// Zero-mean circular Gaussian vector with covariance `C[n,m] = cov(n−m)`.
///
/// The banded covariance is embedded in a circulant of size
/// `L ≥ max(length + D, 2D + 1)`, whose eigenvalues are the DFT of the
/// wrapped lags; the leading `length × length` block of that circulant is
/// exactly the requested Toeplitz matrix.
pub fn colored_noise(model: &NoiseModel, length: usize, rng_seed: u64) -> Result<Vec<C64>> {
    if length == 0 {
        return Err(Error::invalid("length", "must be at least 1"));
    }
    if model.n0 == 0.0 {
        return Ok(vec![C64::new(0.0, 0.0); length]);
    }
    let d = model.max_lag();
    let l = (length + d).max(2 * d + 1).next_power_of_two();

    let mut eig = vec![C64::new(0.0, 0.0); l];
    eig[0].re = model.cov_lags[0];
    for (k, &c) in model.cov_lags.iter().enumerate().skip(1) {
        eig[k].re = c;
        eig[l - k].re = c;
    }
    let fft = FftPair::new(l);
    fft.forward(&mut eig);

    let floor = -EIG_CLIP_TOL * model.n0;
    let min_eig = eig.iter().map(|e| e.re).fold(f64::INFINITY, f64::min);
    if min_eig < floor {
        return Err(Error::NotPositiveSemidefinite { eigenvalue: min_eig });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let scale = 1.0 / (l as f64).sqrt();
    let mut buf: Vec<C64> = eig
        .iter()
        .map(|e| complex_normal(&mut rng, 1.0) * (e.re.max(0.0).sqrt() * scale))
        .collect();
    fft.inverse(&mut buf);
    buf.truncate(length);
    Ok(buf)
}

/// Dense-factorization variant of [`colored_noise`] for short blocks: the
/// Toeplitz covariance is eigendecomposed and a white draw is colored with
/// its symmetric square root.
pub fn colored_noise_block(model: &NoiseModel, length: usize, rng_seed: u64) -> Result<Vec<C64>> {
    if length == 0 {
        return Err(Error::invalid("length", "must be at least 1"));
    }
    if model.n0 == 0.0 {
        return Ok(vec![C64::new(0.0, 0.0); length]);
    }
    let cov = DMatrix::from_fn(length, length, |i, j| model.lag(i as i64 - j as i64));
    let eig = SymmetricEigen::new(cov);
    let min_eig = eig.eigenvalues.min();
    if min_eig < -EIG_CLIP_TOL * model.n0 {
        return Err(Error::NotPositiveSemidefinite { eigenvalue: min_eig });
    }
    let sqrt_vals = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    let root = &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.transpose();

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let white: Vec<C64> = (0..length).map(|_| complex_normal(&mut rng, 1.0)).collect();
    Ok((0..length)
        .map(|i| (0..length).map(|j| white[j] * root[(i, j)]).sum())
        .collect())
}

/// Noise-free part of the received stream.
///
/// Element `i` of the result is `r[n_max + i] = Σ_l q[l]·s[n_max + i − l]`,
/// i.e. only samples whose whole channel memory is covered by `symbols`.
pub fn convolve_symbols(symbols: &[C64], dch: &DiscreteChannel) -> Result<Vec<C64>> {
    let span = dch.span();
    if symbols.len() <= span {
        return Err(Error::TooShort {
            needed: span + 1,
            got: symbols.len(),
        });
    }
    // Tap order reversed so that the inner loop walks forward in memory:
    // r[n_max+i] = Σ_e q[n_max−e]·s[i+e].
    let rev: Vec<C64> = dch.taps().iter().rev().copied().collect();
    Ok(symbols
        .windows(span + 1)
        .map(|w| w.iter().zip(&rev).map(|(s, q)| s * q).sum())
        .collect())
}

/// Received samples `r[n]` for `n ∈ [n_max, len−1+n_min]` (see
/// [`convolve_symbols`] for indexing) with a [`colored_noise`] draw added.
/// The noise depends only on `rng_seed` and the output length.
pub fn synthesize_received(
    sym: &SymbolStream,
    dch: &DiscreteChannel,
    model: &NoiseModel,
    rng_seed: u64,
) -> Result<Vec<C64>> {
    let mut r = convolve_symbols(&sym.symbols, dch)?;
    if model.n0 > 0.0 {
        let eta = colored_noise(model, r.len(), rng_seed)?;
        r.iter_mut().zip(eta).for_each(|(x, e)| *x += e);
    }
    Ok(r)
}

/// Rational FTN factor `γ = num/den`, as needed by the fine-grid oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub num: u32,
    pub den: u32,
}

impl Ratio {
    pub const MAX_DEN: u32 = 64;

    pub fn new(num: u32, den: u32) -> Result<Self> {
        if den == 0 || den > Self::MAX_DEN {
            return Err(Error::invalid("gamma", format!("denominator {den} outside 1..=64")));
        }
        if num == 0 || num > den {
            return Err(Error::invalid("gamma", format!("{num}/{den} not in (0, 1]")));
        }
        Ok(Self { num, den })
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// Smallest pulse half-width of the waveform oracle, in `T₀`.
const ORACLE_MIN_HALF_WIDTH: usize = 80;

/// Fine-grid samples per T₀ for a given denominator.
fn oversampling(gamma: Ratio) -> usize {
    16 * gamma.den as usize
}

/// Continuous-time reference for [`synthesize_received`].
///
/// Impulses spaced `T = γT₀` are shaped with `h` on a grid of `Δ = T₀/L`
/// (`L = 16·den`), passed through the channel (tap delays rounded to the
/// grid), corrupted by white noise of variance `N₀/Δ` per fine sample,
/// matched-filtered with `Δ·Σ y[m]h(mΔ − t)` and sampled every `T`. The pulse
/// is truncated at `±max(ν + 4, 80)·T₀`. Output indexing matches
/// [`synthesize_received`].
pub fn waveform_oracle(
    sym: &SymbolStream,
    spec: &PulseSpec,
    ch: &TapDelayLine,
    gamma: Ratio,
    n0: f64,
    rng_seed: u64,
) -> Result<Vec<C64>> {
    let g = gamma.value();
    let (n_min, n_max) = channel::index_bounds(spec, ch, g);
    let span = (n_max - n_min) as usize;
    let s_len = sym.len();
    if s_len <= span {
        return Err(Error::TooShort {
            needed: span + 1,
            got: s_len,
        });
    }

    let l = oversampling(gamma);
    let dt = spec.t0 / l as f64;
    let step = 16 * gamma.num as usize;
    let half = (spec.nu + 4).max(ORACLE_MIN_HALF_WIDTH) * l;
    let h: Vec<f64> = (0..=2 * half)
        .map(|k| spec.rrc_impulse((k as f64 - half as f64) * dt))
        .collect();

    let tap_offsets: Vec<usize> = ch.delays().iter().map(|&d| (d / dt).round() as usize).collect();
    let max_off = *tap_offsets.last().unwrap();

    // Fine array index i ↔ time (i − origin)·Δ.
    let origin = 2 * half;
    let fine_len = origin + (s_len - 1) * step + 2 * half + max_off + 1;

    let mut x = vec![C64::new(0.0, 0.0); fine_len];
    for (n, &s) in sym.symbols.iter().enumerate() {
        let start = origin + n * step - half;
        for (k, &hk) in h.iter().enumerate() {
            x[start + k] += s * hk;
        }
    }
    let mut y = vec![C64::new(0.0, 0.0); fine_len];
    for (&off, &c) in tap_offsets.iter().zip(ch.gains()) {
        for i in off..fine_len {
            y[i] += c * x[i - off];
        }
    }
    if n0 > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let var = n0 / dt;
        y.iter_mut().for_each(|v| *v += complex_normal(&mut rng, var));
    }

    let first = n_max as usize;
    let last = (s_len as i64 - 1 + n_min) as usize;
    Ok((first..=last)
        .map(|n| {
            let centre = origin + n * step;
            let window = &y[centre - half..=centre + half];
            window.iter().zip(&h).map(|(v, &hk)| v * hk).sum::<C64>() * dt
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{discretize, identity_channel};

    const G_0_8: f64 = 0.200_751_449_129_401_02;

    fn spec() -> PulseSpec {
        PulseSpec::new(0.5, 1.0, 10).unwrap()
    }

    #[test]
    fn bpsk_mapping() {
        let s = modulate_bpsk(&[0, 1, 1], 1.0).unwrap();
        let re: Vec<f64> = s.symbols.iter().map(|c| c.re).collect();
        assert_eq!(re, vec![1.0, -1.0, -1.0]);
        assert_eq!(modulate_bpsk(&[0], 4.0).unwrap().symbols[0], C64::new(2.0, 0.0));
        assert!(modulate_bpsk(&[0], 0.0).is_err());
    }

    #[test]
    fn bpsk_stream_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = modulate_bpsk(&random_bits(200_000, &mut rng), 2.0).unwrap();
        let n = s.len() as f64;
        let mean: C64 = s.symbols.iter().sum::<C64>() / n;
        let power = s.symbols.iter().map(|c| c.norm_sqr()).sum::<f64>() / n;
        assert!(mean.norm() < 0.02);
        assert!((power - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_noise_is_silent() {
        let m = NoiseModel::new(&spec(), 0.8, 0.0, 16).unwrap();
        assert!(colored_noise(&m, 10, 1).unwrap().iter().all(|z| z.norm() == 0.0));
        assert!(colored_noise_block(&m, 10, 1).unwrap().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn noise_model_lags() {
        let m = NoiseModel::new(&spec(), 0.8, 0.5, 40).unwrap();
        assert_eq!(m.cov_lags[0], 0.5);
        assert!((m.cov_lags[1] - 0.5 * G_0_8).abs() < 1e-12);
        assert_eq!(m.lag(-1), m.lag(1));
        assert_eq!(m.lag(41), 0.0);
        assert!(NoiseModel::new(&spec(), 0.8, -1.0, 4).is_err());
    }

    #[test]
    fn broken_covariance_is_rejected() {
        // Lag-1 correlation above 1/2 of the variance is not a valid MA(1)
        // covariance.
        let bad = NoiseModel {
            n0: 1.0,
            cov_lags: vec![1.0, 0.9],
        };
        assert!(matches!(
            colored_noise(&bad, 64, 0),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
        assert!(matches!(
            colored_noise_block(&bad, 64, 0),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn noise_is_seed_deterministic() {
        let m = NoiseModel::new(&spec(), 0.8, 1.0, 30).unwrap();
        assert_eq!(colored_noise(&m, 100, 5).unwrap(), colored_noise(&m, 100, 5).unwrap());
        assert_ne!(colored_noise(&m, 100, 5).unwrap(), colored_noise(&m, 100, 6).unwrap());
    }

    #[test]
    fn noiseless_flat_nyquist_passes_symbols() {
        let dch = discretize(&spec(), &identity_channel(), 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sym = modulate_bpsk(&random_bits(100, &mut rng), 1.0).unwrap();
        let m = NoiseModel::new(&spec(), 1.0, 0.0, 10).unwrap();
        let r = synthesize_received(&sym, &dch, &m, 0).unwrap();
        assert_eq!(r.len(), 100 - 20);
        for (i, v) in r.iter().enumerate() {
            assert!((v - sym.symbols[i + 10]).norm() < 1e-12);
        }
    }

    #[test]
    fn impulse_response_readout() {
        let dch = discretize(&spec(), &identity_channel(), 0.8).unwrap();
        let span = dch.span();
        // one symbol in the middle of a zero stream
        let mut symbols = vec![C64::new(0.0, 0.0); 3 * span + 1];
        let at = span + span / 2;
        symbols[at] = C64::new(1.0, 0.0);
        let r = convolve_symbols(&symbols, &dch).unwrap();
        for n in dch.n_min()..=dch.n_max() {
            // absolute r index at+n ↔ element at+n−n_max
            let idx = (at as i64 + n - dch.n_max()) as usize;
            assert!((r[idx] - dch.tap(n)).norm() < 1e-15, "n={n}");
        }
    }

    #[test]
    fn two_symbol_isi() {
        let dch = discretize(&spec(), &identity_channel(), 0.8).unwrap();
        let span = dch.span();
        let mut symbols = vec![C64::new(0.0, 0.0); 3 * span];
        let at = span;
        symbols[at] = C64::new(1.0, 0.0);
        symbols[at + 1] = C64::new(1.0, 0.0);
        let r = convolve_symbols(&symbols, &dch).unwrap();
        let idx = (at as i64 - dch.n_max()) as usize;
        let want = 1.0 + G_0_8;
        assert!((r[idx].re - (dch.tap(0).re + dch.tap(-1).re)).abs() < 1e-15);
        assert!((r[idx].re - want).abs() < 1e-12);
    }

    #[test]
    fn rejects_short_streams() {
        let dch = discretize(&spec(), &identity_channel(), 0.8).unwrap();
        let sym = modulate_bpsk(&[0; 20], 1.0).unwrap();
        let m = NoiseModel::new(&spec(), 0.8, 0.0, 4).unwrap();
        assert!(matches!(
            synthesize_received(&sym, &dch, &m, 0),
            Err(Error::TooShort { .. })
        ));
    }

    #[test]
    fn ratio_validation() {
        assert!(Ratio::new(4, 5).is_ok());
        assert!(Ratio::new(1, 65).is_err());
        assert!(Ratio::new(6, 5).is_err());
        assert!(Ratio::new(0, 5).is_err());
    }
}
