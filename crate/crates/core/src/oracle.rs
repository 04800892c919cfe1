//! Brute-force dense-matrix references.
//!
//! Everything here is written straight from the block-model definitions with
//! explicit matrices and literal sums, without FFTs, so it can check the fast
//! paths in [`crate::equalizer`]. Sizes are meant to stay small (`N ≤ 128`).

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{discretize, identity_channel, DiscreteChannel};
use crate::equalizer::{self, BlockConfig, Weights};
use crate::pulse::PulseSpec;
use crate::{Result, C64};

/// Unitary DFT matrix, `D[n,m] = e^{−j2πnm/N}/√N`.
pub fn dft_matrix(n: usize) -> DMatrix<C64> {
    let s = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(n, n, |r, c| {
        C64::from_polar(s, -2.0 * PI * ((r * c) % n) as f64 / n as f64)
    })
}

/// `(Q₀, Q₁)` of the block model: `Q₀[i, i+e] = q[n_max − e]` for
/// `0 ≤ e ≤ n_max − n_min`, and `Q₁` holds the taps that spill past the
/// right edge, wrapped into the bottom-left corner.
pub fn block_matrices(dch: &DiscreteChannel, n: usize) -> (DMatrix<C64>, DMatrix<C64>) {
    let span = dch.span() as i64;
    let n_i = n as i64;
    let q0 = DMatrix::from_fn(n, n, |i, j| {
        let e = j as i64 - i as i64;
        if (0..=span).contains(&e) {
            dch.tap(dch.n_max() - e)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let q1 = DMatrix::from_fn(n, n, |i, j| {
        let e = j as i64 + n_i - i as i64;
        if (0..=span).contains(&e) {
            dch.tap(dch.n_max() - e)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    (q0, q1)
}

/// `Dᴴ·diag(λ)·D`.
pub fn circulant_from_spectrum(lambda: &[C64]) -> DMatrix<C64> {
    let d = dft_matrix(lambda.len());
    let diag = DMatrix::from_diagonal(&DVector::from_column_slice(lambda));
    d.adjoint() * diag * d
}

/// Toeplitz `C[n,m] = N₀·g((n−m)T)`, evaluated entry by entry.
pub fn toeplitz_covariance(spec: &PulseSpec, gamma: f64, n0: f64, n: usize) -> DMatrix<C64> {
    let t = gamma * spec.t0;
    DMatrix::from_fn(n, n, |i, j| {
        C64::new(n0 * spec.nyquist_autocorr((i as f64 - j as f64) * t), 0.0)
    })
}

/// Time-domain MMSE operator `σ²Qᴴ(σ²QQᴴ + C)⁻¹` with `Q = Q₀ + Q₁`.
pub fn time_domain_mmse(q: &DMatrix<C64>, cov: &DMatrix<C64>, sigma2: f64) -> Option<DMatrix<C64>> {
    let s = C64::new(sigma2, 0.0);
    let a = q * q.adjoint() * s + cov;
    a.try_inverse().map(|inv| q.adjoint() * inv * s)
}

/// Literal double sum
/// `Φ_η[k] = (N₀/N)·Σ_l Σ_m g((l−m)T)·e^{−j2π(l−m)k/N}` (complex result).
pub fn psd_double_sum(spec: &PulseSpec, gamma: f64, n0: f64, n: usize) -> Vec<C64> {
    let t = gamma * spec.t0;
    (0..n)
        .map(|k| {
            let mut acc = C64::new(0.0, 0.0);
            for l in 0..n {
                for m in 0..n {
                    let d = l as f64 - m as f64;
                    acc += C64::from_polar(spec.nyquist_autocorr(d * t), -2.0 * PI * d * k as f64 / n as f64);
                }
            }
            acc * (n0 / n as f64)
        })
        .collect()
}

/// `(0, I_M, 0)·Dᴴ·W·D·r` with every factor as an explicit matrix.
pub fn overlap_block_dense(r: &[C64], cfg: &BlockConfig, w: &Weights) -> Vec<C64> {
    let n = cfg.n;
    let d = dft_matrix(n);
    let wm = match w {
        Weights::Diagonal(v) => DMatrix::from_diagonal(&DVector::from_column_slice(v)),
        Weights::Full(m) => m.clone(),
    };
    let y = d.adjoint() * wm * &d * DVector::from_column_slice(r);
    y.iter().skip(cfg.p).take(cfg.m).copied().collect()
}

fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Random complex channel taps on `[n_min, n_min + len)`.
pub fn random_channel(rng: &mut impl Rng, n_min: i64, len: usize) -> DiscreteChannel {
    let taps = (0..len)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    DiscreteChannel::new(taps, n_min, 1.0).expect("non-empty taps")
}

/// Outcome of one self-check.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub error: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.error.is_finite() && self.error <= self.tolerance
    }
}

/// Max deviation between `build_spectrum` turned back into a matrix and the
/// explicit `Q₀ + Q₁`.
pub fn circulant_error(dch: &DiscreteChannel, n: usize) -> Result<f64> {
    let spectrum = equalizer::build_spectrum(dch, n)?;
    let (q0, q1) = block_matrices(dch, n);
    Ok(max_abs_diff(&circulant_from_spectrum(&spectrum.lambda), &(q0 + q1)))
}

/// Max deviation between `Dᴴ W_c D` and the time-domain MMSE operator.
pub fn mmse_equivalence_error(
    spec: &PulseSpec,
    dch: &DiscreteChannel,
    gamma: f64,
    n0: f64,
    sigma2: f64,
    n: usize,
) -> Result<f64> {
    let spectrum = equalizer::build_spectrum(dch, n)?;
    let w = equalizer::weight_colored_full(&spectrum, spec, gamma, n0, sigma2)?;
    let Weights::Full(wm) = &w.weights else {
        unreachable!("colored_full yields a dense weight")
    };
    let d = dft_matrix(n);
    let freq = d.adjoint() * wm * &d;
    let (q0, q1) = block_matrices(dch, n);
    let cov = toeplitz_covariance(spec, gamma, n0, n);
    let time = time_domain_mmse(&(q0 + q1), &cov, sigma2)
        .ok_or_else(|| crate::Error::Singular("time-domain oracle".into()))?;
    Ok(max_abs_diff(&freq, &time))
}

/// Max deviation between `noise_psd` and the literal double sum, including
/// the discarded imaginary part.
pub fn psd_error(spec: &PulseSpec, gamma: f64, n0: f64, n: usize) -> Result<f64> {
    let fast = equalizer::noise_psd(spec, gamma, n0, n)?;
    let slow = psd_double_sum(spec, gamma, n0, n);
    Ok(fast
        .iter()
        .zip(&slow)
        .map(|(f, s)| (C64::new(*f, 0.0) - s).norm())
        .fold(0.0, f64::max))
}

/// Max deviation between `overlap_fde` on a single window and the dense
/// `(0,I,0)·Dᴴ W D r`.
pub fn overlap_dense_error(
    r: &[C64],
    cfg: &BlockConfig,
    w: &equalizer::WeightSet,
    dch: &DiscreteChannel,
) -> Result<f64> {
    let fast = equalizer::overlap_fde(&r[..cfg.n], cfg, w, dch)?;
    let slow = overlap_block_dense(&r[..cfg.n], cfg, &w.weights);
    Ok(fast
        .iter()
        .zip(&slow)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max))
}

/// The small-`N` oracle suite run by `ftnsim selfcheck`.
pub fn selfcheck() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f);
    let spec = PulseSpec::new(0.5, 1.0, 10)?;
    let mut checks = Vec::new();

    for n in [8usize, 16, 32] {
        let dch = random_channel(&mut rng, -2, 6);
        checks.push(Check {
            name: format!("circulant reconstruction N={n}"),
            error: circulant_error(&dch, n)?,
            tolerance: 1e-10,
        });
    }

    let spec_short = PulseSpec::new(0.5, 1.0, 4)?;
    for (gamma, n) in [(0.8, 16usize), (0.714, 32)] {
        let dch = discretize(&spec_short, &identity_channel(), gamma)?;
        checks.push(Check {
            name: format!("frequency/time MMSE equivalence N={n} gamma={gamma}"),
            error: mmse_equivalence_error(&spec_short, &dch, gamma, 0.3, 1.0, n)?,
            tolerance: 1e-9,
        });
    }

    for (gamma, n) in [(0.8, 64usize), (0.714, 128)] {
        checks.push(Check {
            name: format!("noise PSD single vs double sum N={n} gamma={gamma}"),
            error: psd_error(&spec, gamma, 0.7, n)?,
            tolerance: 1e-10,
        });
    }

    let dch = random_channel(&mut rng, -3, 7);
    let cfg = BlockConfig::new(32, 4, 4)?;
    let spectrum = equalizer::build_spectrum(&dch, 32)?;
    let w = equalizer::weight_white(&spectrum, 0.1, 1.0)?;
    let r: Vec<C64> = (0..32)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    checks.push(Check {
        name: "overlap block vs dense matrix N=32".into(),
        error: overlap_dense_error(&r, &cfg, &w, &dch)?,
        tolerance: 1e-12,
    });

    Ok(checks)
}
