//! Numerical inverse Laplace transforms: fixed Talbot contour and
//! Gaver-Stehfest summation.
//!
//! Talbot is the workhorse (near machine precision for transforms analytic
//! off the negative real axis, which covers every `psi_W`-based transform in
//! this crate). Gaver-Stehfest is real-axis only and noticeably less
//! accurate at the stable order 14; it is kept as an independent cross-check
//! on the Talbot values.

use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math;

/// Fixed-Talbot inversion (Abate-Valko) of `transform` at time `t > 0`,
/// using `m` contour nodes.
pub fn talbot<F>(transform: F, t: f64, m: usize) -> Result<f64>
where
    F: Fn(Complex64) -> Complex64,
{
    if !(t > 0.0) {
        return Err(Error::Domain(String::from("talbot requires t > 0")));
    }
    let mf = m as f64;
    let r = 2.0 * mf / (5.0 * t);

    // k = 0 term: s = r on the real axis.
    let mut sum = 0.5 * math::exp(r * t) * transform(Complex64::new(r, 0.0)).re;

    for k in 1..m {
        let theta = k as f64 * math::PI / mf;
        let cot = math::cos(theta) / math::sin(theta);
        let s = Complex64::new(r * theta * cot, r * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        let term = (s * t).exp() * transform(s) * Complex64::new(1.0, sigma);
        sum += term.re;
    }
    let value = sum * r / mf;
    if !value.is_finite() {
        return Err(Error::InversionUnstable(String::from(
            "talbot sum is not finite",
        )));
    }
    Ok(value)
}

/// Stehfest summation weights for even order `n`.
pub fn stehfest_weights(n: usize) -> Vec<f64> {
    assert!(n >= 2 && n % 2 == 0, "stehfest order must be even");
    let half = n / 2;
    let fact = |k: usize| -> f64 {
        let mut v = 1.0;
        for i in 2..=k {
            v *= i as f64;
        }
        v
    };
    let mut weights = Vec::with_capacity(n);
    for k in 1..=n {
        let mut sum = 0.0;
        let j_lo = k.div_ceil(2);
        let j_hi = core::cmp::min(k, half);
        for j in j_lo..=j_hi {
            sum += math::powf(j as f64, half as f64) * fact(2 * j)
                / (fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k));
        }
        let sign = if (k + half) % 2 == 0 { 1.0 } else { -1.0 };
        weights.push(sign * sum);
    }
    weights
}

/// Gaver-Stehfest inversion of a real-axis `transform` at time `t > 0`.
///
/// Order 14 is the practical double-precision limit; higher orders amplify
/// roundoff faster than they converge.
pub fn gaver_stehfest<F>(transform: F, t: f64, order: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(t > 0.0) {
        return Err(Error::Domain(String::from(
            "gaver_stehfest requires t > 0",
        )));
    }
    let weights = stehfest_weights(order);
    let a = math::LN_2 / t;
    let mut sum = 0.0;
    for (k, w) in weights.iter().enumerate() {
        sum += w * transform(a * (k + 1) as f64);
    }
    let value = sum * a;
    if !value.is_finite() {
        return Err(Error::InversionUnstable(String::from(
            "gaver-stehfest sum is not finite",
        )));
    }
    Ok(value)
}
