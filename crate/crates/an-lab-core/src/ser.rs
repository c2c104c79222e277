//! Closed-form symbol error rates of square M-QAM under artificial noise
//! (AN) at an ideal coherent receiver.
//!
//! # Model
//!
//! The receiver observes `y = h m + g z + n` and applies ideal coherent
//! demodulation followed by minimum-distance detection. Conditioned on the
//! equalized AN sample `s = (h* g / |h|) z`, the SER admits the product form
//!
//! ```text
//! SER(s) = c (xi + eta) - c^2 xi eta,
//! xi  = Q((|h|a - s_r)/sigma) + Q((|h|a + s_r)/sigma),
//! eta = Q((|h|a - s_i)/sigma) + Q((|h|a + s_i)/sigma),
//! ```
//!
//! with `c = (sqrt(M)-1)/sqrt(M)`. All averaged quantities below reduce to
//! mixtures of this conditional form:
//!
//! * a two-value amplitude distribution (the optimal AN law),
//! * circular Gaussian AN (a larger effective noise floor),
//! * Rayleigh-faded channels (exponential SNR mixing in closed form),
//! * uniform or exponential AN power densities (adaptive quadrature).

use num_complex::Complex;

use crate::design::PhaseChoice;
use crate::error::{Error, Result};
use crate::qam::{q_function, ChannelRealization, Constellation, NoiseModel};
use crate::quad;
use crate::scalar::{as_f64, real, Real};

/// Everything needed to evaluate conditional (fixed-channel) error rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstantaneousContext<T> {
    pub constellation: Constellation<T>,
    pub channel: ChannelRealization<T>,
    pub noise: NoiseModel<T>,
}

impl<T: Real> InstantaneousContext<T> {
    /// Normalized decision distance `A = |h| a / sigma`.
    pub fn amp_ratio(&self) -> T {
        self.channel.h.norm() * self.constellation.half_min_distance() / self.noise.sigma()
    }

    /// Normalized interference gain `|g| / sigma`: multiplies AN amplitudes.
    pub fn interference_gain(&self) -> T {
        self.channel.g.norm() / self.noise.sigma()
    }
}

/// Second-order channel statistics for Rayleigh-faded links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelStats<T> {
    /// `E|h|^2` of the source-to-relay link.
    pub sigma_h_sq: T,
    /// `E|g|^2` of the jammer-to-relay link.
    pub sigma_g_sq: T,
}

/// Everything needed to evaluate channel-averaged error rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatisticalContext<T> {
    pub constellation: Constellation<T>,
    pub stats: ChannelStats<T>,
    pub noise: NoiseModel<T>,
    /// Mean symbol energy, cached from the constellation.
    pub e_m: T,
}

impl<T: Real> StatisticalContext<T> {
    /// Builds the context, deriving `e_m` from the constellation.
    pub fn new(
        constellation: Constellation<T>,
        stats: ChannelStats<T>,
        noise: NoiseModel<T>,
    ) -> Self {
        let e_m = constellation.mean_energy();
        Self {
            constellation,
            stats,
            noise,
            e_m,
        }
    }
}

/// Conditional SER given the equalized AN sample `s`.
pub fn ser_given_s<T: Real>(ctx: &InstantaneousContext<T>, s: Complex<T>) -> T {
    let sigma = ctx.noise.sigma();
    let ha = ctx.channel.h.norm() * ctx.constellation.half_min_distance();
    let c = ctx.constellation.boundary_fraction();
    let xi = q_function((ha - s.re) / sigma) + q_function((ha + s.re) / sigma);
    let eta = q_function((ha - s.im) / sigma) + q_function((ha + s.im) / sigma);
    c * (xi + eta) - c * c * xi * eta
}

/// Conditional SER for an AN symbol of amplitude `z_amp` whose equalized
/// phase is `theta`, i.e. `s = |g| z_amp e^{i theta}`.
pub fn ser_phase_amp<T: Real>(ctx: &InstantaneousContext<T>, z_amp: T, theta: T) -> T {
    let a_ratio = ctx.amp_ratio();
    let b = ctx.interference_gain() * z_amp;
    let c = ctx.constellation.boundary_fraction();
    let xi = q_function(a_ratio - b * theta.cos()) + q_function(a_ratio + b * theta.cos());
    let eta = q_function(a_ratio - b * theta.sin()) + q_function(a_ratio + b * theta.sin());
    c * (xi + eta) - c * c * xi * eta
}

/// Best-phase SER at a given amplitude: the larger of the two candidate
/// phases `theta = 0` (rotated-QAM alignment) and `theta = pi/4` (QAM
/// alignment), which are the only maximizer candidates. Exact ties resolve
/// to the rotated choice.
pub fn ser_best_phase<T: Real>(ctx: &InstantaneousContext<T>, z_amp: T) -> (T, PhaseChoice) {
    let rotated = ser_phase_amp(ctx, z_amp, T::zero());
    let qam = ser_phase_amp(ctx, z_amp, T::FRAC_PI_4());
    if qam > rotated {
        (qam, PhaseChoice::Qam)
    } else {
        (rotated, PhaseChoice::RotatedQam)
    }
}

/// Error floor with no usable signal: `(M - 1) / M`, the SER of a uniform
/// random guess and the common limit of every curve as AN power grows.
pub fn non_informative_ser<T: Real>(order: u32) -> T {
    real::<T>(f64::from(order - 1) / f64::from(order))
}

/// Expected best-phase SER of a two-point amplitude law with support
/// `{sqrt(x1), sqrt(x2)}` meeting the mean power budget `p_bar`.
///
/// Requires `0 <= x1 <= p_bar <= x2`; the point masses are then forced to
/// `P[x2] = (p_bar - x1)/(x2 - x1)`. The degenerate case `x1 = x2 = p_bar`
/// is the deterministic law.
pub fn ser_expected_two_point<T: Real>(
    ctx: &InstantaneousContext<T>,
    p_bar: T,
    x1: T,
    x2: T,
) -> Result<T> {
    check_two_point_ordering(p_bar, x1, x2)?;
    if x2 - x1 <= T::zero() {
        return Ok(ser_best_phase(ctx, p_bar.sqrt()).0);
    }
    let w2 = (p_bar - x1) / (x2 - x1);
    let w1 = (x2 - p_bar) / (x2 - x1);
    Ok(w1 * ser_best_phase(ctx, x1.sqrt()).0 + w2 * ser_best_phase(ctx, x2.sqrt()).0)
}

pub(crate) fn check_two_point_ordering<T: Real>(p_bar: T, x1: T, x2: T) -> Result<()> {
    if !(p_bar > T::zero()) {
        return Err(Error::invalid(format!("p_bar must be positive, got {p_bar}")));
    }
    if x1 < T::zero() || x1 > p_bar || x2 < p_bar {
        return Err(Error::PowerLawOrdering {
            x1: as_f64(x1),
            p_bar: as_f64(p_bar),
            x2: as_f64(x2),
        });
    }
    Ok(())
}

/// SER under circular Gaussian AN with mean energy `e_z` per symbol period:
/// the AN folds into the noise floor, `sigma'^2 = sigma^2 + |g|^2 (E_z/T_m)/2`,
/// giving the plain AWGN expression at the reduced ratio.
pub fn ser_gaussian_an<T: Real>(ctx: &InstantaneousContext<T>, e_z: T) -> Result<T> {
    if e_z < T::zero() || !e_z.is_finite() {
        return Err(Error::invalid(format!(
            "e_z must be nonnegative and finite, got {e_z}"
        )));
    }
    let g_sq = ctx.channel.g.norm_sqr();
    let mean_power = e_z / ctx.constellation.symbol_period();
    let sigma_eff = (ctx.noise.sigma_sq() + g_sq * mean_power * real::<T>(0.5)).sqrt();
    let a_eff = ctx.channel.h.norm() * ctx.constellation.half_min_distance() / sigma_eff;
    let c = ctx.constellation.boundary_fraction();
    let q = q_function(a_eff);
    let four = real::<T>(4.0);
    Ok(four * c * q - four * c * c * q * q)
}

/// Rayleigh-averaged SER for a fixed AN power `x = |z|^2` (phase-independent).
///
/// Averaging the conditional AWGN SER over the exponential instantaneous SNR
/// with mean `gbar = sigma_h^2 E_m / (N_0 + T_m sigma_g^2 x)` yields
///
/// ```text
/// ASER(x) = 2c (1 - sqrt(r)) - c^2 [1 - sqrt(r) (4/pi) atan(1/sqrt(r))],
/// r = 1.5 gbar / (M - 1 + 1.5 gbar).
/// ```
pub fn aser_fixed_an_power<T: Real>(sctx: &StatisticalContext<T>, x: T) -> Result<T> {
    if x < T::zero() {
        return Err(Error::invalid(format!("an power must be >= 0, got {x}")));
    }
    let t_m = sctx.constellation.symbol_period();
    let gbar = sctx.stats.sigma_h_sq * sctx.e_m / (sctx.noise.n0() + t_m * sctx.stats.sigma_g_sq * x);
    let c = sctx.constellation.boundary_fraction();
    let m_minus_1 = real::<T>(f64::from(sctx.constellation.order() - 1));
    let b = real::<T>(1.5) * gbar;
    let r = b / (m_minus_1 + b);
    let sqrt_r = r.sqrt();
    let atan_term = ((m_minus_1 + b) / b).sqrt().atan();
    let two = real::<T>(2.0);
    let four_over_pi = real::<T>(4.0) / T::PI();
    Ok(two * c * (T::one() - sqrt_r) - c * c * (T::one() - sqrt_r * four_over_pi * atan_term))
}

/// Expected Rayleigh-averaged SER of a two-point power law (see
/// [`ser_expected_two_point`] for the ordering contract).
pub fn aser_expected_two_point<T: Real>(
    sctx: &StatisticalContext<T>,
    p_bar: T,
    x1: T,
    x2: T,
) -> Result<T> {
    check_two_point_ordering(p_bar, x1, x2)?;
    if x2 - x1 <= T::zero() {
        return aser_fixed_an_power(sctx, p_bar);
    }
    let w2 = (p_bar - x1) / (x2 - x1);
    let w1 = (x2 - p_bar) / (x2 - x1);
    Ok(w1 * aser_fixed_an_power(sctx, x1)? + w2 * aser_fixed_an_power(sctx, x2)?)
}

/// Continuous AN power densities with mean `p_bar` used as baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerMixture {
    /// Uniform on `[0, 2 p_bar]`.
    Uniform,
    /// Exponential with mean `p_bar`.
    Exponential,
}

/// Rayleigh-averaged SER when the AN power is drawn from a continuous
/// density instead of an optimized two-point law.
///
/// Evaluated by adaptive Gauss-Kronrod quadrature to an absolute tolerance
/// of 1e-8. The exponential tail beyond `46 p_bar` is folded in analytically
/// against the non-informative limit; its weight (about 1e-20) is below any
/// representable effect on the result.
pub fn aser_mixture<T: Real>(
    sctx: &StatisticalContext<T>,
    mixture: PowerMixture,
    p_bar: T,
) -> Result<T> {
    if !(p_bar > T::zero()) || !p_bar.is_finite() {
        return Err(Error::invalid(format!("p_bar must be positive, got {p_bar}")));
    }
    let tol = real::<T>(1e-8);
    match mixture {
        PowerMixture::Uniform => {
            let hi = real::<T>(2.0) * p_bar;
            let density = (hi).recip();
            Ok(quad::integrate(
                |x| aser_fixed_an_power(sctx, x).unwrap_or_else(|_| T::zero()) * density,
                T::zero(),
                hi,
                tol,
            ))
        }
        PowerMixture::Exponential => {
            let cut = real::<T>(46.0) * p_bar;
            let inv_mean = p_bar.recip();
            let body = quad::integrate(
                |x| {
                    aser_fixed_an_power(sctx, x).unwrap_or_else(|_| T::zero())
                        * (-x * inv_mean).exp()
                        * inv_mean
                },
                T::zero(),
                cut,
                tol,
            );
            let tail =
                non_informative_ser::<T>(sctx.constellation.order()) * (-cut * inv_mean).exp();
            Ok(body + tail)
        }
    }
}
