//! Square M-QAM primitives: the Gaussian tail function, constellation
//! geometry, energy normalization, and ideal coherent detection.
//!
//! # Conventions
//!
//! * A square constellation of order `M` has side `L = sqrt(M)` and per-axis
//!   amplitude levels `(2k + 1 - L) * a` for `k = 0..L`, where `a` is half
//!   the minimum distance between neighboring points.
//! * Points are indexed row-major, in-phase axis outer: `index = i * L + l`
//!   places the I level at `i` and the Q level at `l`.
//! * The mean symbol energy is `E_m = (2/3) * a^2 * T_m * (M - 1)` for a
//!   symbol period `T_m`, and the per-dimension noise deviation obeys
//!   `sigma^2 = N_0 / (2 * T_m)` exactly.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{as_f64, real, Real};

/// Gaussian tail probability `Q(x) = P[N(0,1) > x]`.
///
/// Computed as `erfc(x / sqrt(2)) / 2`; relative error stays below 1e-12
/// for `|x| <= 8`.
pub fn q_function<T: Real>(x: T) -> T {
    let half = real::<T>(0.5);
    half * (x * T::FRAC_1_SQRT_2()).erfc()
}

/// Square M-QAM constellation with explicit energy normalization inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constellation<T> {
    order: u32,
    side: u32,
    half_min_distance: T,
    symbol_period: T,
}

impl<T: Real> Constellation<T> {
    /// Builds a constellation from its order `M`, half minimum distance
    /// `a > 0`, and symbol period `T_m > 0`.
    ///
    /// `M` must be a perfect square with side at least 2 (4, 16, 64, ...).
    pub fn new(order: u32, half_min_distance: T, symbol_period: T) -> Result<Self> {
        let side = (f64::from(order)).sqrt().round() as u32;
        if side < 2 || side * side != order {
            return Err(Error::invalid(format!(
                "order must be a perfect square >= 4, got {order}"
            )));
        }
        if !(half_min_distance > T::zero()) || !half_min_distance.is_finite() {
            return Err(Error::invalid(format!(
                "half_min_distance must be positive and finite, got {half_min_distance}"
            )));
        }
        if !(symbol_period > T::zero()) || !symbol_period.is_finite() {
            return Err(Error::invalid(format!(
                "symbol_period must be positive and finite, got {symbol_period}"
            )));
        }
        Ok(Self {
            order,
            side,
            half_min_distance,
            symbol_period,
        })
    }

    /// Builds a constellation matching a target mean symbol energy.
    pub fn from_energy(order: u32, mean_energy: T, symbol_period: T) -> Result<Self> {
        let a = half_distance_from_energy(mean_energy, symbol_period, order)?;
        Self::new(order, a, symbol_period)
    }

    /// Constellation order `M`.
    pub fn order(&self) -> u32 {
        self.order
    }

    /// Side length `L = sqrt(M)`.
    pub fn side(&self) -> u32 {
        self.side
    }

    /// Half the minimum distance between neighboring points.
    pub fn half_min_distance(&self) -> T {
        self.half_min_distance
    }

    /// Symbol period `T_m`.
    pub fn symbol_period(&self) -> T {
        self.symbol_period
    }

    /// Fraction of per-axis decisions that see a neighbor on both sides:
    /// `c = (sqrt(M) - 1) / sqrt(M)`. This is the combinatorial constant in
    /// every SER expression below.
    pub fn boundary_fraction(&self) -> T {
        let side = real::<T>(f64::from(self.side));
        (side - T::one()) / side
    }

    /// Mean symbol energy `E_m = (2/3) a^2 T_m (M - 1)`.
    pub fn mean_energy(&self) -> T {
        let a = self.half_min_distance;
        real::<T>(2.0 / 3.0) * a * a * self.symbol_period * real::<T>(f64::from(self.order - 1))
    }

    /// Per-axis amplitude level `(2k + 1 - L) * a` for `k` in `0..L`.
    pub fn level(&self, k: u32) -> T {
        debug_assert!(k < self.side);
        let offset = 2.0 * f64::from(k) + 1.0 - f64::from(self.side);
        real::<T>(offset) * self.half_min_distance
    }

    /// Point at a row-major index (I axis outer, Q axis inner).
    pub fn point(&self, index: usize) -> Complex<T> {
        debug_assert!(index < self.order as usize);
        let i = index as u32 / self.side;
        let l = index as u32 % self.side;
        Complex::new(self.level(i), self.level(l))
    }

    /// All `M` points in row-major order.
    pub fn points(&self) -> Vec<Complex<T>> {
        (0..self.order as usize).map(|idx| self.point(idx)).collect()
    }
}

/// Half minimum distance achieving mean energy `E_m`:
/// `a = sqrt(3 E_m / (2 T_m (M - 1)))`.
pub fn half_distance_from_energy<T: Real>(
    mean_energy: T,
    symbol_period: T,
    order: u32,
) -> Result<T> {
    if order < 4 {
        return Err(Error::invalid(format!("order must be >= 4, got {order}")));
    }
    if !(mean_energy > T::zero()) || !(symbol_period > T::zero()) {
        return Err(Error::invalid(format!(
            "mean_energy and symbol_period must be positive, got E_m={mean_energy}, T_m={symbol_period}"
        )));
    }
    let denom = real::<T>(2.0) * symbol_period * real::<T>(f64::from(order - 1));
    Ok((real::<T>(3.0) * mean_energy / denom).sqrt())
}

/// Normalized decision-distance-to-noise ratio
/// `a / sigma = sqrt(3 (E_m / N_0) / (M - 1))`, independent of `T_m`.
pub fn a_over_sigma<T: Real>(em_over_n0: T, order: u32) -> Result<T> {
    let side = (f64::from(order)).sqrt().round() as u32;
    if side < 2 || side * side != order {
        return Err(Error::invalid(format!(
            "order must be a perfect square >= 4, got {order}"
        )));
    }
    if !(em_over_n0 > T::zero()) {
        return Err(Error::invalid(format!(
            "em_over_n0 must be positive, got {em_over_n0}"
        )));
    }
    Ok((real::<T>(3.0) * em_over_n0 / real::<T>(f64::from(order - 1))).sqrt())
}

/// A fixed pair of complex channel gains: `h` on the source-to-relay link
/// and `g` on the jammer-to-relay link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRealization<T> {
    pub h: Complex<T>,
    pub g: Complex<T>,
}

/// Complex AWGN description tied to a symbol period: per-dimension variance
/// is `sigma^2 = N_0 / (2 T_m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel<T> {
    n0: T,
    sigma: T,
}

impl<T: Real> NoiseModel<T> {
    /// Builds the model from a one-sided spectral density `N_0 > 0` and the
    /// symbol period it is observed over.
    pub fn from_n0(n0: T, symbol_period: T) -> Result<Self> {
        if !(n0 > T::zero()) || !n0.is_finite() {
            return Err(Error::invalid(format!("n0 must be positive, got {n0}")));
        }
        if !(symbol_period > T::zero()) || !symbol_period.is_finite() {
            return Err(Error::invalid(format!(
                "symbol_period must be positive, got {symbol_period}"
            )));
        }
        let sigma = (n0 / (real::<T>(2.0) * symbol_period)).sqrt();
        Ok(Self { n0, sigma })
    }

    /// One-sided noise spectral density `N_0`.
    pub fn n0(&self) -> T {
        self.n0
    }

    /// Per-dimension noise standard deviation.
    pub fn sigma(&self) -> T {
        self.sigma
    }

    /// Per-dimension noise variance.
    pub fn sigma_sq(&self) -> T {
        self.sigma * self.sigma
    }
}

/// Ideal coherent demodulation: rotates the received sample by the
/// conjugate channel phase, `y_eq = (h* / |h|) y`.
///
/// Fails on `h = 0`, where the rotation is undefined.
pub fn coherent_demodulate<T: Real>(h: Complex<T>, y: Complex<T>) -> Result<Complex<T>> {
    let mag = h.norm();
    if !(mag > T::zero()) {
        return Err(Error::DegenerateChannel(
            "h = 0 leaves the demodulation rotation undefined",
        ));
    }
    Ok(h.conj() / mag * y)
}

/// Minimum-distance detection over the scaled constellation `|h| * points`.
///
/// Returns the row-major index minimizing `|y_eq - |h| p|`; exact ties go to
/// the lower index, matching an exhaustive scan with strict improvement.
/// Implemented by per-axis slicing, which factorizes the argmin exactly
/// (including the tie rule) because the metric separates over I and Q.
pub fn min_distance_detect<T: Real>(
    constellation: &Constellation<T>,
    h_mag: T,
    y_eq: Complex<T>,
) -> usize {
    let side = constellation.side();
    let i = nearest_level_index(constellation, h_mag, y_eq.re);
    let l = nearest_level_index(constellation, h_mag, y_eq.im);
    (i * side + l) as usize
}

/// Index of the per-axis level `(2k + 1 - L) |h| a` nearest to `u`, ties to
/// the lower `k`.
fn nearest_level_index<T: Real>(constellation: &Constellation<T>, h_mag: T, u: T) -> u32 {
    let side = constellation.side();
    let scale = h_mag * constellation.half_min_distance();
    // In units of the scaled level spacing: levels sit at 2k + 1 - L, so the
    // (real-valued) best k is (u/scale + L - 1) / 2. Half-down rounding via
    // ceil(t - 1/2) sends exact midpoints to the lower index.
    let t = (u / scale + real::<T>(f64::from(side - 1))) * real::<T>(0.5);
    let k = (t - real::<T>(0.5)).ceil();
    let k = as_f64(k);
    if !(k > 0.0) {
        0
    } else if k >= f64::from(side - 1) {
        side - 1
    } else {
        k as u32
    }
}
