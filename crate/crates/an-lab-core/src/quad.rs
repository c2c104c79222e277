//! Adaptive Gauss-Kronrod quadrature (7-15 pair).
//!
//! Used by the mixture-averaged error-rate formulas, which integrate a
//! smooth, bounded conditional error rate against a power density. The
//! integrand is cheap, so a plain bisection-adaptive scheme with the
//! classic G7/K15 rule comfortably reaches absolute tolerances around
//! 1e-8 without extrapolation machinery.

use crate::scalar::{real, Real};

/// Kronrod abscissae (positive half, including the midpoint 0).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_7,
    0.949_107_912_342_758_524_526_189_7,
    0.864_864_423_359_769_072_789_712_8,
    0.741_531_185_599_394_439_863_864_8,
    0.586_087_235_467_691_130_294_144_8,
    0.405_845_151_377_397_166_906_606_4,
    0.207_784_955_007_898_467_600_689_4,
    0.0,
];

/// Kronrod weights matching [`XGK`].
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_0,
    0.063_092_092_629_978_553_290_700_7,
    0.104_790_010_322_250_183_839_876_3,
    0.140_653_259_715_525_918_745_189_6,
    0.169_004_726_639_267_902_826_583_4,
    0.190_350_578_064_785_409_913_256_4,
    0.204_432_940_075_298_892_414_162_0,
    0.209_482_141_084_727_828_012_999_2,
];

/// Gauss weights for the embedded 7-point rule; its nodes are the
/// odd-indexed Kronrod abscissae plus the midpoint.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_4,
    0.279_705_391_489_276_667_901_467_8,
    0.381_830_050_505_118_944_950_369_8,
    0.417_959_183_673_469_387_755_102_0,
];

/// One G7/K15 evaluation on `[a, b]`.
///
/// Returns the Kronrod estimate and `|K15 - G7|` as its error proxy.
fn gauss_kronrod_15<T: Real>(f: &impl Fn(T) -> T, a: T, b: T) -> (T, T) {
    let half = real::<T>(0.5);
    let center = (a + b) * half;
    let half_len = (b - a) * half;

    let f_center = f(center);
    let mut kronrod = real::<T>(WGK[7]) * f_center;
    let mut gauss = real::<T>(WG[3]) * f_center;

    for j in 0..7 {
        let offset = real::<T>(XGK[j]) * half_len;
        let sum = f(center - offset) + f(center + offset);
        kronrod = kronrod + real::<T>(WGK[j]) * sum;
        if j % 2 == 1 {
            gauss = gauss + real::<T>(WG[j / 2]) * sum;
        }
    }

    let estimate = kronrod * half_len;
    let err = ((kronrod - gauss) * half_len).abs();
    (estimate, err)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `abs_tol`.
///
/// Subdivision splits the remaining tolerance evenly between halves, so the
/// summed error proxy stays below `abs_tol`. Intervals are abandoned (their
/// current estimate accepted) once bisected 48 times: at that point the
/// interval is narrower than f64 spacing for every practical input, and the
/// error proxy is dominated by rounding noise.
pub fn integrate<T: Real>(f: impl Fn(T) -> T, a: T, b: T, abs_tol: T) -> T {
    let mut total = T::zero();
    let mut stack: Vec<(T, T, T, u32)> = vec![(a, b, abs_tol, 0)];
    let half = real::<T>(0.5);

    while let Some((lo, hi, tol, depth)) = stack.pop() {
        let (estimate, err) = gauss_kronrod_15(&f, lo, hi);
        if err <= tol || depth >= 48 {
            total = total + estimate;
        } else {
            let mid = (lo + hi) * half;
            let child_tol = tol * half;
            stack.push((lo, mid, child_tol, depth + 1));
            stack.push((mid, hi, child_tol, depth + 1));
        }
    }
    total
}
