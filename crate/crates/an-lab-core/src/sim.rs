//! Seeded Monte Carlo link simulation: source symbols, AN symbols from any
//! design, receiver noise, and (for fading runs) Rayleigh channel draws,
//! with symbol-error counting and binomial confidence intervals.
//!
//! # Determinism
//!
//! Work is split into fixed-size shards (one fading block per shard for the
//! Rayleigh runs). Each shard seeds its own ChaCha8 stream from a splitmix64
//! hash of `(seed, stream_id, domain, shard index)`, and shard results are
//! integer error counts merged by summation, so an estimate is bit-identical
//! across runs and across thread counts. All randomness is drawn as `f64`
//! and converted, keeping the consumed stream independent of the scalar
//! type.

use num_complex::Complex;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::design::TwoPointPowerLaw;
use crate::error::{Error, Result};
use crate::qam::Constellation;
use crate::scalar::{as_f64, real, Real};
use crate::ser::{InstantaneousContext, StatisticalContext};

/// Trials per parallel shard of a fixed-channel run.
pub const SHARD_TRIALS: u64 = 1 << 16;

/// Default symbols per quasi-static fading block.
pub const DEFAULT_SYMBOLS_PER_BLOCK: u64 = 100;

const DOMAIN_FIXED: u64 = 1;
const DOMAIN_RAYLEIGH: u64 = 2;
const DOMAIN_INSTANTANEOUS: u64 = 3;
const DOMAIN_FREE: u64 = 4;

/// Names a reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSpec {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// A standalone generator on this stream, for ad-hoc draws outside the
    /// sharded simulators.
    pub fn rng(&self) -> ChaCha8Rng {
        shard_rng(*self, DOMAIN_FREE, 0)
    }
}

fn splitmix_step(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the 256-bit ChaCha8 key for one shard of one simulation domain.
fn shard_rng(spec: RngSpec, domain: u64, shard: u64) -> ChaCha8Rng {
    let mut state = spec.seed;
    for salt in [spec.stream_id, domain, shard] {
        let mixed = splitmix_step(&mut state);
        state ^= mixed ^ salt.wrapping_mul(0xD6E8_FEB8_6659_FD93);
    }
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix_step(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// A symbol-level AN source. Every variant's empirical mean power converges
/// to its declared budget (`NoAn` to zero).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnGenerator<T> {
    /// Two-point amplitude law. `theta_h`/`theta_g` are the channel phases
    /// the design was equalized against; support points whose phase choice
    /// is `None` (statistical designs) draw their phase uniformly instead.
    TwoPoint {
        law: TwoPointPowerLaw<T>,
        theta_h: T,
        theta_g: T,
    },
    /// Constant complex AN symbol `sqrt(power) e^{j theta_z}`.
    Deterministic { power: T, theta_z: T },
    /// Circularly symmetric complex Gaussian with mean power `mean_power`.
    Gaussian { mean_power: T },
    /// Power uniform on `[0, 2 mean_power]`, phase uniform.
    UniformPower { mean_power: T },
    /// Power exponential with the given mean, phase uniform.
    ExponentialPower { mean_power: T },
    /// No artificial noise.
    NoAn,
}

impl<T: Real> AnGenerator<T> {
    /// Stable lowercase label used in CSV output.
    pub fn label(&self) -> &'static str {
        match self {
            AnGenerator::TwoPoint { .. } => "two-point",
            AnGenerator::Deterministic { .. } => "deterministic",
            AnGenerator::Gaussian { .. } => "gaussian",
            AnGenerator::UniformPower { .. } => "uniform-power",
            AnGenerator::ExponentialPower { .. } => "exponential-power",
            AnGenerator::NoAn => "none",
        }
    }

    /// Declared mean power `E|z|^2`.
    pub fn mean_power(&self) -> T {
        match self {
            AnGenerator::TwoPoint { law, .. } => law.expected_power(),
            AnGenerator::Deterministic { power, .. } => *power,
            AnGenerator::Gaussian { mean_power }
            | AnGenerator::UniformPower { mean_power }
            | AnGenerator::ExponentialPower { mean_power } => *mean_power,
            AnGenerator::NoAn => T::zero(),
        }
    }
}

/// Draws one AN symbol.
///
/// Draw protocol (fixed, part of the reproducibility contract): `TwoPoint`
/// consumes one uniform for the support choice plus, only when the chosen
/// point's phase is `None`, one uniform for the phase; `Gaussian` consumes
/// two normals; the power mixtures consume one uniform for the power and one
/// for the phase; `Deterministic` and `NoAn` consume nothing.
pub fn draw_an_symbol<T: Real, R: Rng>(gen: &AnGenerator<T>, rng: &mut R) -> Complex<T> {
    let two_pi = 2.0 * std::f64::consts::PI;
    match gen {
        AnGenerator::TwoPoint {
            law,
            theta_h,
            theta_g,
        } => {
            let u: f64 = rng.random();
            let (power, choice) = if u < as_f64(law.p) {
                (law.x2, law.phase2)
            } else {
                (law.x1, law.phase1)
            };
            let theta = match choice {
                Some(c) => *theta_h - *theta_g + c.theta::<T>(),
                None => real::<T>(rng.random::<f64>() * two_pi),
            };
            Complex::from_polar(power.sqrt(), theta)
        }
        AnGenerator::Deterministic { power, theta_z } => {
            Complex::from_polar(power.sqrt(), *theta_z)
        }
        AnGenerator::Gaussian { mean_power } => {
            let scale = (*mean_power / real::<T>(2.0)).sqrt();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex::new(scale * real::<T>(re), scale * real::<T>(im))
        }
        AnGenerator::UniformPower { mean_power } => {
            let power = real::<T>(rng.random::<f64>() * 2.0) * *mean_power;
            let theta = real::<T>(rng.random::<f64>() * two_pi);
            Complex::from_polar(power.sqrt(), theta)
        }
        AnGenerator::ExponentialPower { mean_power } => {
            let power = -*mean_power * real::<T>((1.0 - rng.random::<f64>()).ln());
            let theta = real::<T>(rng.random::<f64>() * two_pi);
            Complex::from_polar(power.sqrt(), theta)
        }
        AnGenerator::NoAn => Complex::new(T::zero(), T::zero()),
    }
}

/// Binomial SER estimate with a 95% normal-approximation interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SerEstimate {
    pub mean: f64,
    pub half_width_95: f64,
    pub n_trials: u64,
    pub n_errors: u64,
}

impl SerEstimate {
    fn from_counts(n_errors: u64, n_trials: u64) -> Self {
        let mean = n_errors as f64 / n_trials as f64;
        let half_width_95 = 1.96 * (mean * (1.0 - mean) / n_trials as f64).sqrt();
        Self {
            mean,
            half_width_95,
            n_trials,
            n_errors,
        }
    }
}

/// Sample-mean estimate (for averages of analytic values rather than error
/// counts), with a 95% interval from the sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub half_width_95: f64,
    pub n_samples: u64,
}

/// One demodulate-and-detect trial against channel `(h, g)`; `equalizer`
/// must be `conj(h)/|h|` and `h_mag` its magnitude.
#[inline]
fn run_trial<T: Real, R: Rng>(
    constellation: &Constellation<T>,
    h: Complex<T>,
    g: Complex<T>,
    equalizer: Complex<T>,
    h_mag: T,
    sigma: T,
    gen: &AnGenerator<T>,
    rng: &mut R,
) -> bool {
    let m_index = rng.random_range(0..constellation.order() as usize);
    let s = constellation.point(m_index);
    let z = draw_an_symbol(gen, rng);
    let n_re: f64 = rng.sample(StandardNormal);
    let n_im: f64 = rng.sample(StandardNormal);
    let noise = Complex::new(sigma * real::<T>(n_re), sigma * real::<T>(n_im));
    let y = h * s + g * z + noise;
    let detected = crate::qam::min_distance_detect(constellation, h_mag, equalizer * y);
    detected != m_index
}

/// Estimates the fixed-channel SER of Eq-style trials: uniform source
/// symbol, AN from `gen`, complex Gaussian noise of per-dimension standard
/// deviation sigma, coherent demodulation, minimum-distance detection.
pub fn simulate_ser_fixed_channel<T: Real>(
    ctx: &InstantaneousContext<T>,
    gen: &AnGenerator<T>,
    n_trials: u64,
    rng: RngSpec,
) -> Result<SerEstimate> {
    if !(ctx.channel.h.norm() > T::zero()) {
        return Err(Error::DegenerateChannel(
            "h = 0 leaves nothing to demodulate",
        ));
    }
    if n_trials < 10_000 {
        return Err(Error::invalid(format!(
            "n_trials must be at least 10^4, got {n_trials}"
        )));
    }
    let h = ctx.channel.h;
    let g = ctx.channel.g;
    let h_mag = h.norm();
    let equalizer = h.conj() / h_mag;
    let sigma = ctx.noise.sigma();
    let constellation = ctx.constellation;

    let n_shards = n_trials.div_ceil(SHARD_TRIALS);
    let n_errors: u64 = (0..n_shards)
        .into_par_iter()
        .map(|shard| {
            let mut shard_rng = shard_rng(rng, DOMAIN_FIXED, shard);
            let start = shard * SHARD_TRIALS;
            let count = SHARD_TRIALS.min(n_trials - start);
            let mut errors = 0u64;
            for _ in 0..count {
                if run_trial(
                    &constellation,
                    h,
                    g,
                    equalizer,
                    h_mag,
                    sigma,
                    gen,
                    &mut shard_rng,
                ) {
                    errors += 1;
                }
            }
            errors
        })
        .sum();
    Ok(SerEstimate::from_counts(n_errors, n_trials))
}

/// Estimates the Rayleigh-fading ASER with quasi-static blocks: each block
/// draws `h ~ CN(0, sigma_h^2)`, `g ~ CN(0, sigma_g^2)` and runs
/// `symbols_per_block` fixed-channel trials; errors pool across blocks.
/// One block is one deterministic shard.
pub fn simulate_aser_rayleigh<T: Real>(
    sctx: &StatisticalContext<T>,
    gen: &AnGenerator<T>,
    n_blocks: u64,
    symbols_per_block: u64,
    rng: RngSpec,
) -> Result<SerEstimate> {
    if n_blocks < 1_000 {
        return Err(Error::invalid(format!(
            "n_blocks must be at least 10^3, got {n_blocks}"
        )));
    }
    if symbols_per_block == 0 {
        return Err(Error::invalid("symbols_per_block must be positive"));
    }
    let h_scale = (sctx.stats.sigma_h_sq / real::<T>(2.0)).sqrt();
    let g_scale = (sctx.stats.sigma_g_sq / real::<T>(2.0)).sqrt();
    let sigma = sctx.noise.sigma();
    let constellation = sctx.constellation;

    let n_errors: u64 = (0..n_blocks)
        .into_par_iter()
        .map(|block| {
            let mut block_rng = shard_rng(rng, DOMAIN_RAYLEIGH, block);
            let (h, g) = draw_block_channel(h_scale, g_scale, &mut block_rng);
            let h_mag = h.norm();
            let equalizer = h.conj() / h_mag;
            let mut errors = 0u64;
            for _ in 0..symbols_per_block {
                if run_trial(
                    &constellation,
                    h,
                    g,
                    equalizer,
                    h_mag,
                    sigma,
                    gen,
                    &mut block_rng,
                ) {
                    errors += 1;
                }
            }
            errors
        })
        .sum();
    Ok(SerEstimate::from_counts(
        n_errors,
        n_blocks * symbols_per_block,
    ))
}

fn draw_block_channel<T: Real, R: Rng>(
    h_scale: T,
    g_scale: T,
    rng: &mut R,
) -> (Complex<T>, Complex<T>) {
    let h_re: f64 = rng.sample(StandardNormal);
    let h_im: f64 = rng.sample(StandardNormal);
    let g_re: f64 = rng.sample(StandardNormal);
    let g_im: f64 = rng.sample(StandardNormal);
    (
        Complex::new(h_scale * real::<T>(h_re), h_scale * real::<T>(h_im)),
        Complex::new(g_scale * real::<T>(g_re), g_scale * real::<T>(g_im)),
    )
}

/// Estimates `E_{h,g}[SER_max]` for the instantaneous design over Rayleigh
/// fading: per channel draw, run the two-point optimizer and record its
/// analytic objective. This averages analytic values (no symbol-level
/// noise), so the interval comes from the sample standard deviation.
pub fn simulate_instantaneous_design_over_fading<T: Real>(
    sctx: &StatisticalContext<T>,
    p_bar: T,
    n_channel_draws: u64,
    rng: RngSpec,
) -> Result<MeanEstimate> {
    if n_channel_draws < 200 {
        return Err(Error::invalid(format!(
            "n_channel_draws must be at least 200, got {n_channel_draws}"
        )));
    }
    let h_scale = (sctx.stats.sigma_h_sq / real::<T>(2.0)).sqrt();
    let g_scale = (sctx.stats.sigma_g_sq / real::<T>(2.0)).sqrt();
    let values: Vec<f64> = (0..n_channel_draws)
        .into_par_iter()
        .map(|draw| {
            let mut draw_rng = shard_rng(rng, DOMAIN_INSTANTANEOUS, draw);
            let (h, g) = draw_block_channel(h_scale, g_scale, &mut draw_rng);
            let ctx = InstantaneousContext {
                constellation: sctx.constellation,
                channel: crate::qam::ChannelRealization { h, g },
                noise: sctx.noise,
            };
            crate::design::optimize_two_point_instantaneous(p_bar, &ctx)
                .map(|report| as_f64(report.achieved_ser))
                .map_err(|err| Error::OptimizerFailure {
                    draw_index: draw as usize,
                    reason: err.to_string(),
                })
        })
        .collect::<Result<Vec<f64>>>()?;

    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(MeanEstimate {
        mean,
        half_width_95: 1.96 * (variance / n).sqrt(),
        n_samples: n_channel_draws,
    })
}
