//! Exponential integral and the entire function `Ein(x) = γ + ln x + E₁(x)`.

use crate::scalar::Scalar;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const MAX_ITER: usize = 200;

/// `Ein(x) = Σ_{k≥1} (−1)^{k+1} x^k / (k · k!)`, summed directly for `x ≤ 1`.
///
/// Equal to `γ + ln x + E₁(x)` but free of the cancellation that form
/// suffers near zero.
fn ein_series<T: Scalar>(x: T) -> T {
    let mut term = x; // (−1)^{k+1} x^k / k!
    let mut sum = x;
    for k in 2..MAX_ITER {
        let kf = T::from_count(k);
        term = -term * x / kf;
        let contrib = term / kf;
        sum = sum + contrib;
        if contrib.abs() <= T::epsilon() * sum.abs() {
            break;
        }
    }
    sum
}

/// `E₁(x) e^{x}` by modified Lentz evaluation of the continued fraction, `x > 1`.
fn e1_scaled_cf<T: Scalar>(x: T) -> T {
    let tiny = T::min_positive_value() / T::epsilon();
    let one = T::one();
    let two = T::lit(2.0);
    let mut b = x + one;
    let mut c = one / tiny;
    let mut d = one / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let fi = T::from_count(i);
        let a = -fi * fi;
        b = b + two;
        d = one / (a * d + b);
        c = b + a / c;
        let delta = c * d;
        h = h * delta;
        if (delta - one).abs() <= T::epsilon() {
            break;
        }
    }
    h
}

/// Exponential integral `E₁(x) = ∫_x^∞ e^{−t}/t dt` for `x > 0`.
///
/// Series for `x ≤ 1`, continued fraction above. Returns `+∞` at zero and
/// NaN for negative input.
pub fn exp_integral_e1<T: Scalar>(x: T) -> T {
    if x < T::zero() || x.is_nan() {
        return T::nan();
    }
    if x == T::zero() {
        return T::infinity();
    }
    if x <= T::one() {
        ein_series(x) - T::lit(EULER_GAMMA) - x.ln()
    } else {
        e1_scaled_cf(x) * (-x).exp()
    }
}

/// `γ + ln x + E₁(x)`, with `Ein(0) = 0`.
pub fn ein<T: Scalar>(x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    if x <= T::one() {
        ein_series(x)
    } else {
        T::lit(EULER_GAMMA) + x.ln() + exp_integral_e1(x)
    }
}
