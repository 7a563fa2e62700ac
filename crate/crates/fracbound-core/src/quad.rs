//! Quadrature kernels: adaptive Gauss-Kronrod on finite intervals and
//! fixed-order Gauss-Legendre rules.
//!
//! The adaptive routine is a plain globally-adaptive bisection scheme built
//! on the 7-15 Gauss-Kronrod pair, in the style of QUADPACK's QAG.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

// 7-15 Gauss-Kronrod pair, positive abscissae of the Kronrod rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of an adaptive integration: value and an absolute error estimate.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
}

/// Tolerances for the adaptive scheme. The defaults follow the crate-wide
/// quadrature policy (absolute 1e-10, relative 1e-8).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadTol {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadTol {
    fn default() -> Self {
        QuadTol {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_intervals: 2048,
        }
    }
}

/// One 7-15 Gauss-Kronrod evaluation on `[a, b]`.
fn kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut result_gauss = WG[3] * fc;
    let mut result_kronrod = WGK[7] * fc;

    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        result_kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            result_gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let value = result_kronrod * half;
    let err = math::abs((result_kronrod - result_gauss) * half);
    // QUADPACK-style error deflation would need resasc; the plain difference
    // is conservative enough for the smooth integrands used here.
    (value, err)
}

/// Globally adaptive Gauss-Kronrod integration of `f` on `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: QuadTol) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
        });
    }

    struct Interval {
        a: f64,
        b: f64,
        value: f64,
        err: f64,
    }

    let (value, err) = kronrod_15(&f, a, b);
    let mut intervals = alloc::vec![Interval { a, b, value, err }];
    let mut total: f64 = value;
    let mut total_err: f64 = err;

    loop {
        let target = f64::max(tol.abs_tol, tol.rel_tol * math::abs(total));
        if total_err <= target {
            return Ok(QuadResult {
                value: total,
                abs_error: total_err,
            });
        }
        if intervals.len() >= tol.max_intervals {
            return Err(Error::QuadratureTolerance {
                achieved: total_err,
                requested: target,
            });
        }

        // Bisect the interval with the largest error estimate.
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .fold((0, 0.0), |(bi, be), (i, iv)| {
                if iv.err > be {
                    (i, iv.err)
                } else {
                    (bi, be)
                }
            });
        let iv = intervals.swap_remove(worst);
        total -= iv.value;
        total_err -= iv.err;

        let mid = 0.5 * (iv.a + iv.b);
        if mid <= iv.a || mid >= iv.b {
            // Interval no longer representable; give up refining it.
            total += iv.value;
            total_err += iv.err;
            return Ok(QuadResult {
                value: total,
                abs_error: total_err,
            });
        }
        for (lo, hi) in [(iv.a, mid), (mid, iv.b)] {
            let (v, e) = kronrod_15(&f, lo, hi);
            total += v;
            total_err += e;
            intervals.push(Interval {
                a: lo,
                b: hi,
                value: v,
                err: e,
            });
        }
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// computed by Newton iteration on the Legendre polynomial.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];

    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess.
        let mut x = math::cos(math::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n and P_n' by recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if math::abs(dx) < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (xs, ws) = gauss_legendre(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let nodes = xs.iter().map(|&x| c + h * x).collect();
    let weights = ws.iter().map(|&w| w * h).collect();
    (nodes, weights)
}
