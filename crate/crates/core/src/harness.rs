//! Experiment drivers: BER sweeps, per-position RMSE and rate accounting.
//!
//! A sweep point is simulated in frames of [`BLOCKS_PER_FRAME`] FDE blocks.
//! Frames are seeded from `rng_seed`, the point index and the frame index
//! only, so any two configurations with the same seed see the same bits and
//! the same noise draws. Frames run [`FRAMES_PER_WAVE`] at a time on the
//! rayon pool and their counts are summed in frame order, which keeps the
//! stopping decision (and therefore every [`ResultRow`]) independent of the
//! thread count.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use crate::channel::{self, DiscreteChannel, TapDelayLine};
use crate::equalizer::{self, BlockConfig, BlockEqualizer, CpConfig, WeightKind, WeightSet};
use crate::ftnlink::{self, NoiseModel};
use crate::pulse::PulseSpec;
use crate::{Error, Result, C64};

/// Symbol variance used by every experiment.
pub const SIGMA2: f64 = 1.0;
pub const BLOCKS_PER_FRAME: usize = 50;
pub const FRAMES_PER_WAVE: usize = 8;
pub const RAYLEIGH_TAPS: usize = 10;
/// Rayleigh delay spread in FTN symbol periods.
pub const RAYLEIGH_SPREAD_SYMBOLS: f64 = 16.0;
/// Hard cap on simulated bits, as a multiple of `min_bits`.
pub const BIT_CAP_FACTOR: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    BerCp,
    BerOverlap,
    RmsePosition,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::BerCp => "ber_cp",
            Mode::BerOverlap => "ber_overlap",
            Mode::RmsePosition => "rmse_position",
        })
    }
}

/// Channel selection, written in configs as `"awgn"`, `"rayleigh(K)"`
/// (K independent draws per point at least) or `"file:PATH"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ChannelKind {
    Awgn,
    Rayleigh { draws: usize },
    File(PathBuf),
}

impl TryFrom<String> for ChannelKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        let t = s.trim();
        if t == "awgn" {
            return Ok(ChannelKind::Awgn);
        }
        if let Some(path) = t.strip_prefix("file:") {
            if path.is_empty() {
                return Err(Error::invalid("channel", "empty file path"));
            }
            return Ok(ChannelKind::File(PathBuf::from(path)));
        }
        if let Some(inner) = t.strip_prefix("rayleigh(").and_then(|r| r.strip_suffix(')')) {
            let draws: usize = inner
                .trim()
                .parse()
                .map_err(|_| Error::invalid("channel", format!("bad draw count in {t:?}")))?;
            if draws == 0 {
                return Err(Error::invalid("channel", "rayleigh draw count must be positive"));
            }
            return Ok(ChannelKind::Rayleigh { draws });
        }
        Err(Error::invalid(
            "channel",
            format!("{t:?} is not awgn, rayleigh(K) or file:PATH"),
        ))
    }
}

impl From<ChannelKind> for String {
    fn from(c: ChannelKind) -> String {
        match c {
            ChannelKind::Awgn => "awgn".into(),
            ChannelKind::Rayleigh { draws } => format!("rayleigh({draws})"),
            ChannelKind::File(p) => format!("file:{}", p.display()),
        }
    }
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(g) => vec![g],
        OneOrMany::Many(v) => v,
    })
}

fn default_n() -> usize {
    512
}
fn default_nu() -> usize {
    10
}
fn default_rolloff() -> f64 {
    0.5
}
fn default_channel() -> ChannelKind {
    ChannelKind::Awgn
}
fn default_weight() -> WeightKind {
    WeightKind::ColoredDiag
}
fn default_min_bits() -> u64 {
    200_000
}
fn default_max_errors() -> u64 {
    200
}

/// One experiment, as read from a JSON config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    /// One value or a list; the sweep runs every γ against every Eb/N₀.
    #[serde(deserialize_with = "one_or_many")]
    pub gamma: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ebn0_db: Vec<f64>,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_nu")]
    pub nu: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cp_len: Option<usize>,
    #[serde(default = "default_channel")]
    pub channel: ChannelKind,
    #[serde(default = "default_weight")]
    pub weight_kind: WeightKind,
    #[serde(default = "default_min_bits")]
    pub min_bits: u64,
    #[serde(default = "default_max_errors")]
    pub max_errors: u64,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default = "default_rolloff")]
    pub rolloff: f64,
    /// Noise level for RMSE runs and weight dumps (BER runs derive it).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0: Option<f64>,
    /// Number of FDE blocks averaged by RMSE runs (default 1000).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<usize>,
}

fn forbid<T>(field: &str, v: &Option<T>, mode: Mode) -> Result<()> {
    if v.is_some() {
        return Err(Error::invalid(field, format!("not used in mode {mode}")));
    }
    Ok(())
}

fn require<T: Copy>(field: &str, v: Option<T>, mode: Mode) -> Result<T> {
    v.ok_or_else(|| Error::invalid(field, format!("required in mode {mode}")))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn pulse(&self) -> Result<PulseSpec> {
        PulseSpec::new(self.rolloff, 1.0, self.nu)
    }

    pub fn validate(&self) -> Result<()> {
        let mode = self.mode;
        if self.gamma.is_empty() {
            return Err(Error::invalid("gamma", "no values given"));
        }
        for &g in &self.gamma {
            channel::check_gamma(g).map_err(|_| Error::invalid("gamma", format!("{g} not in (0, 1]")))?;
        }
        if self.n < 2 {
            return Err(Error::invalid("n", format!("{} < 2", self.n)));
        }
        self.pulse()?;
        if let Some(n0) = self.n0 {
            if !(n0 >= 0.0 && n0.is_finite()) {
                return Err(Error::invalid("n0", format!("{n0} must be non-negative")));
            }
        }
        match mode {
            Mode::BerCp | Mode::BerOverlap => {
                if self.ebn0_db.is_empty() {
                    return Err(Error::invalid("ebn0_db", "no values given"));
                }
                if let Some(x) = self.ebn0_db.iter().find(|x| !x.is_finite()) {
                    return Err(Error::invalid("ebn0_db", format!("{x} is not finite")));
                }
                if self.min_bits == 0 {
                    return Err(Error::invalid("min_bits", "must be positive"));
                }
                if self.max_errors == 0 {
                    return Err(Error::invalid("max_errors", "must be positive"));
                }
                forbid("blocks", &self.blocks, mode)?;
                forbid("n0", &self.n0, mode)?;
            }
            Mode::RmsePosition => {
                if !self.ebn0_db.is_empty() {
                    return Err(Error::invalid("ebn0_db", "not used in mode rmse_position; set n0"));
                }
                if matches!(self.channel, ChannelKind::Rayleigh { .. }) {
                    return Err(Error::invalid("channel", "rmse_position needs a fixed channel"));
                }
                if self.blocks == Some(0) {
                    return Err(Error::invalid("blocks", "must be positive"));
                }
            }
        }
        match mode {
            Mode::BerOverlap => {
                let p = require("p", self.p, mode)?;
                let q = require("q", self.q, mode)?;
                BlockConfig::new(self.n, p, q)?;
                forbid("cp_len", &self.cp_len, mode)?;
            }
            Mode::BerCp => {
                let cp = require("cp_len", self.cp_len, mode)?;
                if cp > self.n {
                    return Err(Error::invalid("cp_len", format!("{cp} exceeds n = {}", self.n)));
                }
                forbid("p", &self.p, mode)?;
                forbid("q", &self.q, mode)?;
            }
            Mode::RmsePosition => {
                forbid("p", &self.p, mode)?;
                forbid("q", &self.q, mode)?;
                forbid("cp_len", &self.cp_len, mode)?;
            }
        }
        Ok(())
    }

    /// Rate of the configured scheme at `gamma`.
    pub fn rate(&self, gamma: f64) -> f64 {
        let cp = if self.mode == Mode::BerCp { self.cp_len } else { None };
        spectral_efficiency(gamma, self.rolloff, self.n, cp)
    }
}

/// `N₀ = σ_s² / 10^{Eb/N₀/10}` with `E_b = σ_s²` (BPSK, unit-energy pulse).
pub fn ebn0_to_n0(ebn0_db: f64, sigma2: f64) -> f64 {
    sigma2 / 10f64.powf(ebn0_db / 10.0)
}

/// BPSK rate in bps/Hz: `1/(γ(1+β))`, times `N/(N+cp)` with a prefix.
pub fn spectral_efficiency(gamma: f64, rolloff: f64, n: usize, cp_len: Option<usize>) -> f64 {
    let base = 1.0 / (gamma * (1.0 + rolloff));
    match cp_len {
        Some(cp) => base * n as f64 / (n + cp) as f64,
        None => base,
    }
}

/// Stopping rule applied to every BER point, in words.
pub fn stopping_rule(cfg: &ExperimentConfig) -> String {
    let mut s = format!(
        "stop when bits >= {} and (errors >= {} or bits >= {})",
        cfg.min_bits,
        cfg.max_errors,
        BIT_CAP_FACTOR * cfg.min_bits
    );
    if let ChannelKind::Rayleigh { draws } = cfg.channel {
        s.push_str(&format!(
            ", with at least {draws} channel draws (one per {BLOCKS_PER_FRAME} blocks)"
        ));
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub mode: Mode,
    pub gamma: f64,
    pub rate_bps_hz: f64,
    pub ebn0_db: f64,
    pub bits_simulated: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub wall_seconds: f64,
}

/// A sweep point that could not be simulated.
#[derive(Debug)]
pub struct PointFailure {
    pub gamma: f64,
    pub ebn0_db: f64,
    pub error: Error,
}

#[derive(Debug, Default)]
pub struct BerReport {
    pub rows: Vec<ResultRow>,
    pub failures: Vec<PointFailure>,
}

/// Channel, weights and noise statistics for one channel realization.
struct Link {
    dch: DiscreteChannel,
    weights: WeightSet,
    model: NoiseModel,
}

impl Link {
    fn new(cfg: &ExperimentConfig, spec: &PulseSpec, ch: &TapDelayLine, gamma: f64, n0: f64) -> Result<Self> {
        let dch = channel::discretize(spec, ch, gamma)?;
        let spectrum = equalizer::build_spectrum(&dch, cfg.n)?;
        let weights = WeightSet::design(cfg.weight_kind, &spectrum, spec, gamma, n0, SIGMA2)?;
        let model = NoiseModel::new(spec, gamma, n0, NoiseModel::block_bandwidth(&dch, cfg.n))?;
        Ok(Self { dch, weights, model })
    }
}

/// Tap-delay line of a fixed (non-fading) channel.
pub fn fixed_channel(kind: &ChannelKind) -> Result<Option<TapDelayLine>> {
    match kind {
        ChannelKind::Awgn => Ok(Some(channel::identity_channel())),
        ChannelKind::File(path) => {
            let text = std::fs::read_to_string(path)?;
            Ok(Some(serde_json::from_str(&text)?))
        }
        ChannelKind::Rayleigh { .. } => Ok(None),
    }
}

/// One Rayleigh draw for FTN factor `gamma` (delays span 16 symbol periods).
pub fn rayleigh_draw(gamma: f64, seed: u64) -> Result<TapDelayLine> {
    channel::rayleigh_channel(RAYLEIGH_TAPS, RAYLEIGH_SPREAD_SYMBOLS * gamma, seed)
}

struct Counts {
    bits: u64,
    errors: u64,
}

fn count_errors(est: &[C64], bits: &[u8]) -> Counts {
    let decided = equalizer::detect_bpsk(est);
    let errors = decided.iter().zip(bits).filter(|(a, b)| a != b).count() as u64;
    Counts {
        bits: decided.len() as u64,
        errors,
    }
}

fn point_seed(rng_seed: u64, point: usize) -> u64 {
    rng_seed ^ ((point as u64) << 40)
}

fn run_frame(
    cfg: &ExperimentConfig,
    spec: &PulseSpec,
    gamma: f64,
    n0: f64,
    fixed: Option<&Link>,
    frame_seed: u64,
) -> Result<Counts> {
    let mut rng = ChaCha8Rng::seed_from_u64(frame_seed);
    let channel_seed = rng.next_u64();
    let noise_seed = rng.next_u64();
    let drawn;
    let link = match fixed {
        Some(l) => l,
        None => {
            drawn = Link::new(cfg, spec, &rayleigh_draw(gamma, channel_seed)?, gamma, n0)?;
            &drawn
        }
    };
    let n = cfg.n;
    match cfg.mode {
        Mode::BerOverlap => {
            let bc = BlockConfig::new(n, cfg.p.unwrap_or(0), cfg.q.unwrap_or(0))?;
            let len = (BLOCKS_PER_FRAME - 1) * bc.m + n + link.dch.span();
            let bits = ftnlink::random_bits(len, &mut rng);
            let sym = ftnlink::modulate_bpsk(&bits, SIGMA2)?;
            let r = ftnlink::synthesize_received(&sym, &link.dch, &link.model, noise_seed)?;
            let est = equalizer::overlap_fde(&r, &bc, &link.weights, &link.dch)?;
            Ok(count_errors(&est, &bits[bc.p..bc.p + est.len()]))
        }
        Mode::BerCp => {
            let cc = CpConfig {
                n,
                cp_len: cfg.cp_len.unwrap_or(0),
            };
            let bits = ftnlink::random_bits(BLOCKS_PER_FRAME * n, &mut rng);
            let sym = ftnlink::modulate_bpsk(&bits, SIGMA2)?;
            let est = equalizer::cp_fde_chain(&sym, &link.dch, &cc, &link.weights, &link.model, noise_seed)?;
            Ok(count_errors(&est, &bits))
        }
        Mode::RmsePosition => Err(Error::invalid("mode", "rmse_position is not a BER mode")),
    }
}

fn run_point(
    cfg: &ExperimentConfig,
    spec: &PulseSpec,
    fixed_ch: Option<&TapDelayLine>,
    gamma: f64,
    ebn0_db: f64,
    point: usize,
) -> Result<ResultRow> {
    let start = Instant::now();
    let n0 = ebn0_to_n0(ebn0_db, SIGMA2);
    let fixed = fixed_ch
        .map(|ch| Link::new(cfg, spec, ch, gamma, n0))
        .transpose()?;
    let min_frames = match cfg.channel {
        ChannelKind::Rayleigh { draws } => draws as u64,
        _ => 0,
    };
    let base = point_seed(cfg.rng_seed, point);
    let cap = BIT_CAP_FACTOR.saturating_mul(cfg.min_bits);
    let (mut bits, mut errors, mut frames) = (0u64, 0u64, 0u64);
    loop {
        let wave: Vec<Result<Counts>> = (0..FRAMES_PER_WAVE as u64)
            .into_par_iter()
            .map(|i| run_frame(cfg, spec, gamma, n0, fixed.as_ref(), base.wrapping_add(frames + i)))
            .collect();
        for c in wave {
            let c = c?;
            bits += c.bits;
            errors += c.errors;
        }
        frames += FRAMES_PER_WAVE as u64;
        let enough = bits >= cfg.min_bits && (errors >= cfg.max_errors || bits >= cap);
        if enough && frames >= min_frames {
            break;
        }
    }
    let row = ResultRow {
        mode: cfg.mode,
        gamma,
        rate_bps_hz: cfg.rate(gamma),
        ebn0_db,
        bits_simulated: bits,
        bit_errors: errors,
        ber: errors as f64 / bits as f64,
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    log::info!(
        "gamma={gamma} ebn0={ebn0_db} dB: {errors}/{bits} errors, {frames} frames, {:.2} s",
        row.wall_seconds
    );
    Ok(row)
}

/// Runs every (γ, Eb/N₀) point of a BER sweep. Configuration problems are
/// returned as `Err`; a point whose simulation fails is reported in
/// [`BerReport::failures`] and the sweep carries on.
pub fn run_ber(cfg: &ExperimentConfig) -> Result<BerReport> {
    cfg.validate()?;
    if cfg.mode == Mode::RmsePosition {
        return Err(Error::invalid("mode", "rmse_position is not a BER mode"));
    }
    let spec = cfg.pulse()?;
    let fixed_ch = fixed_channel(&cfg.channel)?;
    if let Some(ch) = &fixed_ch {
        for &g in &cfg.gamma {
            equalizer::BlockConfig::new(cfg.n, 0, 0)?.check_channel(&channel::discretize(&spec, ch, g)?)?;
        }
    }
    let mut report = BerReport::default();
    let mut point = 0usize;
    for &gamma in &cfg.gamma {
        for &ebn0_db in &cfg.ebn0_db {
            match run_point(cfg, &spec, fixed_ch.as_ref(), gamma, ebn0_db, point) {
                Ok(row) => report.rows.push(row),
                Err(error) => {
                    log::error!("gamma={gamma} ebn0={ebn0_db} dB failed: {error}");
                    report.failures.push(PointFailure { gamma, ebn0_db, error });
                }
            }
            point += 1;
        }
    }
    Ok(report)
}

/// Per-position RMSE of the untrimmed FDE output for one γ.
#[derive(Debug, Clone, PartialEq)]
pub struct RmseCurve {
    pub gamma: f64,
    pub rmse: Vec<f64>,
}

/// Averages `|y[i] − s[i]|²` over independent blocks, where `y` is the full
/// equalized window and `s[i]` the symbol that window position `i` targets.
pub fn run_rmse(cfg: &ExperimentConfig) -> Result<Vec<RmseCurve>> {
    cfg.validate()?;
    if cfg.mode != Mode::RmsePosition {
        return Err(Error::invalid("mode", format!("{} is not rmse_position", cfg.mode)));
    }
    let spec = cfg.pulse()?;
    let ch = fixed_channel(&cfg.channel)?.expect("validated as fixed");
    let n0 = cfg.n0.unwrap_or(0.0);
    let blocks = cfg.blocks.unwrap_or(1000);
    let n = cfg.n;
    cfg.gamma
        .iter()
        .enumerate()
        .map(|(gi, &gamma)| {
            let link = Link::new(cfg, &spec, &ch, gamma, n0)?;
            let eq = BlockEqualizer::new(&link.weights);
            let len = n + link.dch.span();
            let base = point_seed(cfg.rng_seed, gi);
            let per_block: Vec<Result<Vec<f64>>> = (0..blocks as u64)
                .into_par_iter()
                .map(|b| {
                    let mut rng = ChaCha8Rng::seed_from_u64(base.wrapping_add(b));
                    let noise_seed: u64 = rng.random();
                    let bits = ftnlink::random_bits(len, &mut rng);
                    let sym = ftnlink::modulate_bpsk(&bits, SIGMA2)?;
                    let r = ftnlink::synthesize_received(&sym, &link.dch, &link.model, noise_seed)?;
                    let y = eq.apply(&r);
                    Ok(y.iter().zip(&sym.symbols).map(|(a, s)| (a - s).norm_sqr()).collect())
                })
                .collect();
            let mut acc = vec![0.0; n];
            for sq in per_block {
                acc.iter_mut().zip(sq?).for_each(|(a, v)| *a += v);
            }
            Ok(RmseCurve {
                gamma,
                rmse: acc.iter().map(|a| (a / blocks as f64).sqrt()).collect(),
            })
        })
        .collect()
}

/// One row of a weight dump.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightRow {
    pub bin: usize,
    pub lambda: C64,
    pub psd: f64,
    pub w_white: C64,
    pub w_colored: C64,
}

/// Per-bin `Λ_k`, `Φ_η[k]`, `W_w[k]` and `W̃_c[k]` for the first γ of the
/// config. The noise level is `n0` if set, else the first Eb/N₀ point, else
/// zero. A Rayleigh channel is drawn from `rng_seed`.
pub fn dump_weights(cfg: &ExperimentConfig) -> Result<Vec<WeightRow>> {
    cfg.validate()?;
    let spec = cfg.pulse()?;
    let gamma = cfg.gamma[0];
    let n0 = cfg
        .n0
        .or_else(|| cfg.ebn0_db.first().map(|&e| ebn0_to_n0(e, SIGMA2)))
        .unwrap_or(0.0);
    let ch = match fixed_channel(&cfg.channel)? {
        Some(ch) => ch,
        None => rayleigh_draw(gamma, cfg.rng_seed)?,
    };
    let dch = channel::discretize(&spec, &ch, gamma)?;
    let spectrum = equalizer::build_spectrum(&dch, cfg.n)?;
    let white = equalizer::weight_white(&spectrum, n0, SIGMA2)?;
    let psd = equalizer::noise_psd(&spec, gamma, n0, cfg.n)?;
    let colored = equalizer::weight_colored_diag(&spectrum, &psd, SIGMA2)?;
    let (ww, wc) = (white.diag().expect("diagonal"), colored.diag().expect("diagonal"));
    Ok((0..cfg.n)
        .map(|k| WeightRow {
            bin: k,
            lambda: spectrum.lambda[k],
            psd: psd[k],
            w_white: ww[k],
            w_colored: wc[k],
        })
        .collect())
}

pub const BER_HEADER: &str = "mode,gamma,rate_bps_hz,ebn0_db,bits,errors,ber,seconds";
pub const WEIGHTS_HEADER: &str =
    "bin,lambda_re,lambda_im,psd,w_white_re,w_white_im,w_colored_re,w_colored_im";

pub fn write_ber_csv(out: &mut impl Write, rows: &[ResultRow]) -> std::io::Result<()> {
    writeln!(out, "{BER_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{:e},{:.3}",
            r.mode, r.gamma, r.rate_bps_hz, r.ebn0_db, r.bits_simulated, r.bit_errors, r.ber, r.wall_seconds
        )?;
    }
    Ok(())
}

/// `position,rmse` for one curve; with several curves one `rmse_<γ>` column
/// per curve.
pub fn write_rmse_csv(out: &mut impl Write, curves: &[RmseCurve]) -> std::io::Result<()> {
    if curves.len() == 1 {
        writeln!(out, "position,rmse")?;
    } else {
        let cols: Vec<String> = curves.iter().map(|c| format!("rmse_{}", c.gamma)).collect();
        writeln!(out, "position,{}", cols.join(","))?;
    }
    let n = curves.first().map_or(0, |c| c.rmse.len());
    for i in 0..n {
        let vals: Vec<String> = curves.iter().map(|c| format!("{:e}", c.rmse[i])).collect();
        writeln!(out, "{i},{}", vals.join(","))?;
    }
    Ok(())
}

pub fn write_weights_csv(out: &mut impl Write, rows: &[WeightRow]) -> std::io::Result<()> {
    writeln!(out, "{WEIGHTS_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.bin, r.lambda.re, r.lambda.im, r.psd, r.w_white.re, r.w_white.im, r.w_colored.re, r.w_colored.im
        )?;
    }
    Ok(())
}
