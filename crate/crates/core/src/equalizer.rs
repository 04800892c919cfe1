//! Block frequency-domain equalization.
//!
//! A received window `r[k] = (r[k] … r[k+N−1])ᵀ` obeys
//! `r[k] = Q s[k] + Q₁(s[k+N] − s[k]) + η[k]` with `s[k]` starting at
//! `s[k − n_max]` and `Q` circulant. With the unitary DFT `D`,
//! `Q = Dᴴ Λ D`, and an equalizer weight `W` acts on the window as
//! `Dᴴ W D r[k]`.
//!
//! Weights:
//!
//! * white: `W_w = Λᴴ(ΛΛᴴ + N₀/σ_s²·I)⁻¹`,
//! * colored (full): `W_c = Λᴴ(ΛΛᴴ + D·C·Dᴴ/σ_s²)⁻¹`, `C[n,m] = N₀·g((n−m)T)`,
//! * colored (diagonal): `W̃_c = Λᴴ(ΛΛᴴ + Φ_η/σ_s²)⁻¹`, `Φ_η = diag(D·C·Dᴴ)`.
//!
//! Overlap FDE keeps `M = N − p − q` outputs of each equalized window and
//! slides the window by `M`; the CP baseline equalizes cyclically extended
//! blocks and keeps all `N` outputs.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::channel::DiscreteChannel;
use crate::fft::FftPair;
use crate::ftnlink::{self, NoiseModel, SymbolStream};
use crate::pulse::PulseSpec;
use crate::{Error, Result, C64};

/// Bins with `|Λ_k|² < NEAR_NULL·max|Λ|²` and no noise term are regularized
/// with `NEAR_NULL·max|Λ|²`.
pub const NEAR_NULL: f64 = 1e-12;

/// Overlap-FDE geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockConfig {
    pub n: usize,
    pub p: usize,
    pub q_discard: usize,
    pub m: usize,
}

impl BlockConfig {
    pub fn new(n: usize, p: usize, q_discard: usize) -> Result<Self> {
        if p + q_discard >= n {
            return Err(Error::invalid(
                "p",
                format!("p + q = {} leaves no output in a block of {n}", p + q_discard),
            ));
        }
        Ok(Self {
            n,
            p,
            q_discard,
            m: n - p - q_discard,
        })
    }

    /// Rejects channels whose memory does not fit in one block.
    pub fn check_channel(&self, dch: &DiscreteChannel) -> Result<()> {
        check_block_len(self.n, dch)
    }
}

fn check_block_len(n: usize, dch: &DiscreteChannel) -> Result<()> {
    if n < dch.span() + 1 {
        return Err(Error::invalid(
            "n",
            format!("block size {n} shorter than channel span {}", dch.span() + 1),
        ));
    }
    Ok(())
}

/// Eigenvalues `Λ_k` of the circulant channel matrix `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct CirculantSpectrum {
    pub lambda: Vec<C64>,
}

impl CirculantSpectrum {
    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }
}

/// First column of `Q`: entry 0 is `q[n_max]`, entry `N−d` is `q[n_max−d]`.
pub fn circulant_first_column(dch: &DiscreteChannel, n: usize) -> Result<Vec<C64>> {
    check_block_len(n, dch)?;
    let mut col = vec![C64::new(0.0, 0.0); n];
    col[0] = dch.tap(dch.n_max());
    for d in 1..=dch.span() {
        col[n - d] = dch.tap(dch.n_max() - d as i64);
    }
    Ok(col)
}

/// Unnormalized DFT of the first column of `Q`, i.e.
/// `Λ_k = Σ_l q[l]·e^{+j2πk(n_max−l)/N}`.
pub fn build_spectrum(dch: &DiscreteChannel, n: usize) -> Result<CirculantSpectrum> {
    let mut col = circulant_first_column(dch, n)?;
    FftPair::new(n).forward(&mut col);
    Ok(CirculantSpectrum { lambda: col })
}

/// Diagonal of `D·E{ηηᴴ}·Dᴴ`:
/// `Φ_η[k] = (N₀/N)·Σ_{|d|<N} (N−|d|)·g(dT)·e^{−j2πdk/N}`.
///
/// Negative and opposite lags are folded onto one length-`N` sequence so the
/// sum becomes a single DFT. The result is real; tiny negatives are clipped.
pub fn noise_psd(spec: &PulseSpec, gamma: f64, n0: f64, n: usize) -> Result<Vec<f64>> {
    crate::channel::check_gamma(gamma)?;
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    if n0 == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let t = gamma * spec.t0;
    let nf = n as f64;
    let mut a: Vec<C64> = vec![C64::new(0.0, 0.0); n];
    a[0].re = nf * spec.nyquist_autocorr(0.0);
    for (d, ad) in a.iter_mut().enumerate().skip(1) {
        // lag +d plus lag −(n−d), which lands on the same DFT exponent
        let fwd = (nf - d as f64) * spec.nyquist_autocorr(d as f64 * t);
        let back = d as f64 * spec.nyquist_autocorr((n - d) as f64 * t);
        ad.re = fwd + back;
    }
    FftPair::new(n).forward(&mut a);
    Ok(a.iter().map(|v| (n0 / nf * v.re).max(0.0)).collect())
}

/// Which MMSE weight is in use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    White,
    ColoredDiag,
    ColoredFull,
}

impl std::fmt::Display for WeightKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            WeightKind::White => "white",
            WeightKind::ColoredDiag => "colored_diag",
            WeightKind::ColoredFull => "colored_full",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Weights {
    /// One tap per bin.
    Diagonal(Vec<C64>),
    /// Dense `N × N` weight in the DFT domain.
    Full(DMatrix<C64>),
}

/// An FDE weight together with the noise spectrum it was designed for.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSet {
    pub kind: WeightKind,
    pub weights: Weights,
    pub psd: Vec<f64>,
}

impl WeightSet {
    pub fn len(&self) -> usize {
        self.psd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psd.is_empty()
    }

    /// Per-bin weights; `None` for the full matrix.
    pub fn diag(&self) -> Option<&[C64]> {
        match &self.weights {
            Weights::Diagonal(d) => Some(d),
            Weights::Full(_) => None,
        }
    }

    /// Builds the weight of `kind` for the given channel spectrum and noise.
    pub fn design(
        kind: WeightKind,
        spectrum: &CirculantSpectrum,
        spec: &PulseSpec,
        gamma: f64,
        n0: f64,
        sigma2: f64,
    ) -> Result<Self> {
        match kind {
            WeightKind::White => weight_white(spectrum, n0, sigma2),
            WeightKind::ColoredDiag => {
                let psd = noise_psd(spec, gamma, n0, spectrum.len())?;
                weight_colored_diag(spectrum, &psd, sigma2)
            }
            WeightKind::ColoredFull => weight_colored_full(spectrum, spec, gamma, n0, sigma2),
        }
    }
}

fn check_sigma2(sigma2: f64) -> Result<()> {
    if sigma2 > 0.0 && sigma2.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("sigma2", format!("{sigma2} must be positive")))
    }
}

/// `Λ_k* / (|Λ_k|² + noise_k)` with the zero-noise regularization rule.
fn one_tap_mmse(lambda: &[C64], noise: impl Fn(usize) -> f64) -> Result<Vec<C64>> {
    let peak = lambda.iter().map(|l| l.norm_sqr()).fold(0.0, f64::max);
    let floor = NEAR_NULL * peak;
    let mut regularized = 0usize;
    let w = lambda
        .iter()
        .enumerate()
        .map(|(k, &l)| {
            let mag2 = l.norm_sqr();
            let nk = noise(k);
            if nk > 0.0 {
                return Ok(l.conj() / (mag2 + nk));
            }
            if mag2 == 0.0 {
                return Err(Error::SpectralNull { bin: k });
            }
            if mag2 < floor {
                regularized += 1;
                return Ok(l.conj() / (mag2 + floor));
            }
            Ok(l.conj() / mag2)
        })
        .collect::<Result<Vec<_>>>()?;
    if regularized > 0 {
        log::warn!("{regularized} near-null bins regularized with eps = {NEAR_NULL:e}");
    }
    Ok(w)
}

/// White-noise MMSE weight `Λ_k*/(|Λ_k|² + N₀/σ_s²)`.
pub fn weight_white(spectrum: &CirculantSpectrum, n0: f64, sigma2: f64) -> Result<WeightSet> {
    check_sigma2(sigma2)?;
    let ratio = n0 / sigma2;
    let diag = one_tap_mmse(&spectrum.lambda, |_| ratio)?;
    Ok(WeightSet {
        kind: WeightKind::White,
        weights: Weights::Diagonal(diag),
        psd: vec![n0; spectrum.len()],
    })
}

/// Diagonal colored-noise weight `Λ_k*/(|Λ_k|² + Φ_η[k]/σ_s²)`.
pub fn weight_colored_diag(spectrum: &CirculantSpectrum, psd: &[f64], sigma2: f64) -> Result<WeightSet> {
    check_sigma2(sigma2)?;
    if psd.len() != spectrum.len() {
        return Err(Error::invalid(
            "psd",
            format!("{} bins for a spectrum of {}", psd.len(), spectrum.len()),
        ));
    }
    let psd: Vec<f64> = psd.iter().map(|&v| v.max(0.0)).collect();
    let diag = one_tap_mmse(&spectrum.lambda, |k| psd[k] / sigma2)?;
    Ok(WeightSet {
        kind: WeightKind::ColoredDiag,
        weights: Weights::Diagonal(diag),
        psd,
    })
}

/// `N × N` Toeplitz covariance `C[n,m] = N₀·g((n−m)T)` of one noise window.
pub fn noise_covariance(spec: &PulseSpec, gamma: f64, n0: f64, n: usize) -> Result<DMatrix<f64>> {
    let model = NoiseModel::new(spec, gamma, n0, n.saturating_sub(1))?;
    Ok(DMatrix::from_fn(n, n, |i, j| model.lag(i as i64 - j as i64)))
}

/// `D·C·Dᴴ` for the unitary DFT, computed with two passes of column FFTs.
fn dft_conjugate(cov: &DMatrix<f64>) -> DMatrix<C64> {
    let n = cov.nrows();
    let fft = FftPair::new(n);
    let mut m = cov.map(|v| C64::new(v, 0.0));
    fft_columns(&fft, &mut m);
    // F·(F·C)ᴴ = F·C·Fᴴ because C is symmetric.
    let mut m = m.adjoint();
    fft_columns(&fft, &mut m);
    m / C64::new(n as f64, 0.0)
}

fn fft_columns(fft: &FftPair, m: &mut DMatrix<C64>) {
    for mut col in m.column_iter_mut() {
        fft.forward(col.as_mut_slice());
    }
}

/// Full colored-noise MMSE weight
/// `W_c = Λᴴ(ΛΛᴴ + D·C·Dᴴ/σ_s²)⁻¹`. Cubic in `N`; meant for `N ≤ 1024`.
pub fn weight_colored_full(
    spectrum: &CirculantSpectrum,
    spec: &PulseSpec,
    gamma: f64,
    n0: f64,
    sigma2: f64,
) -> Result<WeightSet> {
    check_sigma2(sigma2)?;
    let n = spectrum.len();
    let cov = noise_covariance(spec, gamma, n0, n)?;
    let noise_f = dft_conjugate(&cov);
    let psd: Vec<f64> = (0..n).map(|k| noise_f[(k, k)].re.max(0.0)).collect();

    let mut a = noise_f / C64::new(sigma2, 0.0);
    for (k, l) in spectrum.lambda.iter().enumerate() {
        a[(k, k)] += l.norm_sqr();
    }
    // enforce exact Hermitian symmetry before factoring
    let a = (&a + a.adjoint()) * C64::new(0.5, 0.0);
    let inv = match a.clone().cholesky() {
        Some(ch) => ch.inverse(),
        None => a
            .try_inverse()
            .ok_or_else(|| Error::Singular(format!("N={n}, N0={n0}")))?,
    };
    if inv.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Singular(format!("N={n}, N0={n0}")));
    }
    let mut w = inv;
    for (k, l) in spectrum.lambda.iter().enumerate() {
        let c = l.conj();
        w.row_mut(k).iter_mut().for_each(|v| *v *= c);
    }
    Ok(WeightSet {
        kind: WeightKind::ColoredFull,
        weights: Weights::Full(w),
        psd,
    })
}

/// Applies `Dᴴ W D` to length-`N` windows.
pub struct BlockEqualizer<'a> {
    weights: &'a WeightSet,
    fft: FftPair,
}

impl<'a> BlockEqualizer<'a> {
    pub fn new(weights: &'a WeightSet) -> Self {
        Self {
            fft: FftPair::new(weights.len()),
            weights,
        }
    }

    pub fn block_len(&self) -> usize {
        self.fft.len()
    }

    /// Full (untrimmed) equalizer output for one window.
    pub fn apply(&self, window: &[C64]) -> Vec<C64> {
        let n = self.block_len();
        assert_eq!(window.len(), n, "window length must equal the block size");
        let mut buf = window.to_vec();
        self.fft.forward(&mut buf);
        let mut buf = match &self.weights.weights {
            Weights::Diagonal(d) => {
                buf.iter_mut().zip(d).for_each(|(x, w)| *x *= w);
                buf
            }
            Weights::Full(w) => {
                let x = nalgebra::DVector::from_vec(buf);
                (w * x).data.into()
            }
        };
        self.fft.inverse(&mut buf);
        let scale = 1.0 / n as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
        buf
    }
}

/// Overlap FDE over a received stream.
///
/// `r[0]` is taken as the first block origin `k₀`; block `j` covers
/// `r[jM .. jM+N)`. Output element `e` estimates `s[k₀ − n_max + p + e]`, so
/// for a stream produced by [`ftnlink::synthesize_received`] (where
/// `k₀ = n_max`) it estimates symbol `p + e`. Returns `M` estimates per block.
pub fn overlap_fde(
    r: &[C64],
    cfg: &BlockConfig,
    w: &WeightSet,
    dch: &DiscreteChannel,
) -> Result<Vec<C64>> {
    cfg.check_channel(dch)?;
    if w.len() != cfg.n {
        return Err(Error::invalid(
            "weights",
            format!("{} bins for block size {}", w.len(), cfg.n),
        ));
    }
    if r.len() < cfg.n {
        return Err(Error::TooShort {
            needed: cfg.n,
            got: r.len(),
        });
    }
    let blocks = (r.len() - cfg.n) / cfg.m + 1;
    let eq = BlockEqualizer::new(w);
    let mut out = Vec::with_capacity(blocks * cfg.m);
    for j in 0..blocks {
        let start = j * cfg.m;
        let y = eq.apply(&r[start..start + cfg.n]);
        out.extend_from_slice(&y[cfg.p..cfg.p + cfg.m]);
    }
    Ok(out)
}

/// CP-FDE geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CpConfig {
    pub n: usize,
    pub cp_len: usize,
}

/// Cyclic-prefix FDE baseline over a stream of whole `N`-symbol blocks.
///
/// Each block is extended with a copy of its last `cp_len` symbols, the
/// extended blocks are transmitted back to back (silence before and after
/// the burst), and the receiver window of block `b` starts `n_min` samples
/// from the block's first data symbol. With `cp_len ≥ n_max − n_min` the
/// window is exactly circular; shorter prefixes leave residual interference
/// in the estimates. Returns one estimate per input symbol.
pub fn cp_fde_chain(
    sym: &SymbolStream,
    dch: &DiscreteChannel,
    cfg: &CpConfig,
    w: &WeightSet,
    model: &NoiseModel,
    rng_seed: u64,
) -> Result<Vec<C64>> {
    let n = cfg.n;
    check_block_len(n, dch)?;
    if w.len() != n {
        return Err(Error::invalid("weights", format!("{} bins for block size {n}", w.len())));
    }
    if cfg.cp_len > n {
        return Err(Error::invalid("cp_len", format!("{} exceeds block size {n}", cfg.cp_len)));
    }
    if sym.is_empty() || !sym.len().is_multiple_of(n) {
        return Err(Error::invalid(
            "symbols",
            format!("{} symbols is not a whole number of {n}-blocks", sym.len()),
        ));
    }
    let span = dch.span();
    let blocks = sym.len() / n;
    let ext = n + cfg.cp_len;
    let zero = C64::new(0.0, 0.0);

    let mut x = Vec::with_capacity(2 * span + blocks * ext);
    x.resize(span, zero);
    for block in sym.symbols.chunks_exact(n) {
        x.extend_from_slice(&block[n - cfg.cp_len..]);
        x.extend_from_slice(block);
    }
    x.resize(x.len() + span, zero);

    let stream = SymbolStream {
        symbols: x,
        sigma2: sym.sigma2,
    };
    let r = ftnlink::synthesize_received(&stream, dch, model, rng_seed)?;

    // r[i] is the sample at x-index n_max + i; the window of a block whose
    // data starts at x-index a0 begins at a0 + n_min, i.e. r[a0 − span].
    // Its equalized output i estimates block symbol (i − span) mod N.
    let eq = BlockEqualizer::new(w);
    let mut out = Vec::with_capacity(sym.len());
    for b in 0..blocks {
        let a0 = span + b * ext + cfg.cp_len;
        let start = a0 - span;
        let y = eq.apply(&r[start..start + n]);
        out.extend((0..n).map(|j| y[(j + span) % n]));
    }
    Ok(out)
}

/// Hard BPSK decisions: bit 0 when `Re ≥ 0` (ties go to 0), bit 1 otherwise.
pub fn detect_bpsk(estimates: &[C64]) -> Vec<u8> {
    estimates.iter().map(|e| u8::from(e.re < 0.0)).collect()
}
