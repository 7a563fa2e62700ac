//! Dirichlet Laplacian spectral data on intervals and axis-aligned boxes:
//! eigenpairs, projections of initial data, and the killed heat kernel.
//!
//! On the box `prod_i (0, M_i)` the eigenpairs are explicit:
//! `lambda_n = sum_i (n_i pi / M_i)^2` and
//! `phi_n(x) = prod_i sqrt(2/M_i) sin(n_i pi x_i / M_i)`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::quad;

/// Axis-aligned box `prod_i (0, M_i)`, `d <= 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    sides: Vec<f64>,
}

impl BoxDomain {
    pub fn new(sides: Vec<f64>) -> Result<Self> {
        if sides.is_empty() || sides.len() > 3 {
            return Err(Error::Domain(String::from(
                "box dimension must be 1, 2 or 3",
            )));
        }
        if sides.iter().any(|&m| !(m > 0.0) || !m.is_finite()) {
            return Err(Error::Domain(String::from(
                "box sides must be positive and finite",
            )));
        }
        Ok(BoxDomain { sides })
    }

    pub fn interval(m: f64) -> Result<Self> {
        BoxDomain::new(alloc::vec![m])
    }

    pub fn dims(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[f64] {
        &self.sides
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dims() && x.iter().zip(&self.sides).all(|(&xi, &m)| xi > 0.0 && xi < m)
    }

    pub fn volume(&self) -> f64 {
        self.sides.iter().product()
    }
}

/// One Dirichlet eigenpair of the (negative) Laplacian on a box.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub index: Vec<usize>,
    pub lambda: f64,
}

impl EigenPair {
    fn from_index(dom: &BoxDomain, index: Vec<usize>) -> Self {
        let lambda = index
            .iter()
            .zip(dom.sides())
            .map(|(&n, &m)| {
                let k = n as f64 * math::PI / m;
                k * k
            })
            .sum();
        EigenPair { index, lambda }
    }

    /// Evaluate the orthonormal eigenfunction at `x`.
    pub fn eval(&self, dom: &BoxDomain, x: &[f64]) -> f64 {
        let mut v = 1.0;
        for ((&n, &m), &xi) in self.index.iter().zip(dom.sides()).zip(x) {
            v *= math::sqrt(2.0 / m) * math::sin(n as f64 * math::PI * xi / m);
        }
        v
    }

    /// `sup_D |phi_n| = prod_i sqrt(2/M_i)`.
    pub fn sup_norm(&self, dom: &BoxDomain) -> f64 {
        dom.sides().iter().map(|&m| math::sqrt(2.0 / m)).product()
    }
}

/// First `n` eigenpairs sorted by eigenvalue ascending, ties broken
/// lexicographically on the multi-index. The enumeration is exhaustive up to
/// a per-axis cap that is grown until no admissible index can be missing.
pub fn enumerate_eigens(dom: &BoxDomain, n: usize) -> Vec<EigenPair> {
    assert!(n >= 1);
    let d = dom.dims();
    let mut cap = (math::powf(n as f64, 1.0 / d as f64) as usize).max(1) + 1;
    loop {
        let mut pairs = Vec::new();
        let mut index = alloc::vec![1usize; d];
        'enumerate: loop {
            pairs.push(EigenPair::from_index(dom, index.clone()));
            for axis in (0..d).rev() {
                if index[axis] < cap {
                    index[axis] += 1;
                    continue 'enumerate;
                }
                index[axis] = 1;
            }
            break;
        }
        pairs.sort_by(|a, b| {
            a.lambda
                .partial_cmp(&b.lambda)
                .unwrap()
                .then_with(|| a.index.cmp(&b.index))
        });
        if pairs.len() >= n {
            // Any index outside the cap has lambda at least lambda_min_out;
            // the enumeration is complete once the n-th eigenvalue is below it.
            let lambda_min_out: f64 = {
                let base: f64 = dom
                    .sides()
                    .iter()
                    .map(|&m| {
                        let k = math::PI / m;
                        k * k
                    })
                    .sum();
                let extra = dom
                    .sides()
                    .iter()
                    .map(|&m| {
                        let k = math::PI / m;
                        (((cap + 1) * (cap + 1) - 1) as f64) * k * k
                    })
                    .fold(f64::INFINITY, f64::min);
                base + extra
            };
            if pairs[n - 1].lambda < lambda_min_out {
                pairs.truncate(n);
                return pairs;
            }
        }
        cap += cap.div_ceil(2).max(1);
    }
}

/// Spectral coefficients `fbar(n)` of an initial datum, with the Parseval
/// residual `||f||_2^2 - sum fbar(n)^2` as a completeness diagnostic.
#[derive(Debug, Clone)]
pub struct SpectralCoefficients {
    pub pairs: Vec<EigenPair>,
    pub coeffs: Vec<f64>,
    pub f_l2_sq: f64,
    pub parseval_residual: f64,
}

/// Per-axis Gauss-Legendre node count for projecting onto modes up to
/// `max_index` on that axis: at least 4 nodes per oscillation.
fn axis_nodes(max_index: usize) -> usize {
    (4 * max_index + 8).max(24)
}

/// Project `f` onto the first `n` eigenfunctions by tensorized
/// Gauss-Legendre quadrature.
pub fn project<F: Fn(&[f64]) -> f64>(dom: &BoxDomain, f: F, n: usize) -> SpectralCoefficients {
    let pairs = enumerate_eigens(dom, n);
    let d = dom.dims();
    let max_per_axis: Vec<usize> = (0..d)
        .map(|axis| pairs.iter().map(|p| p.index[axis]).max().unwrap())
        .collect();
    let rules: Vec<(Vec<f64>, Vec<f64>)> = (0..d)
        .map(|axis| quad::gauss_legendre_on(axis_nodes(max_per_axis[axis]), 0.0, dom.sides()[axis]))
        .collect();

    // Tensor-product node walk; f and every phi_n are evaluated on the
    // shared grid in one pass.
    let mut coeffs = alloc::vec![0.0; pairs.len()];
    let mut f_l2_sq = 0.0;
    let mut idx = alloc::vec![0usize; d];
    let mut x = alloc::vec![0.0; d];
    'walk: loop {
        let mut w = 1.0;
        for axis in 0..d {
            x[axis] = rules[axis].0[idx[axis]];
            w *= rules[axis].1[idx[axis]];
        }
        let fx = f(&x);
        f_l2_sq += w * fx * fx;
        for (p, c) in pairs.iter().zip(coeffs.iter_mut()) {
            *c += w * fx * p.eval(dom, &x);
        }
        for axis in (0..d).rev() {
            idx[axis] += 1;
            if idx[axis] < rules[axis].0.len() {
                continue 'walk;
            }
            idx[axis] = 0;
        }
        break;
    }

    let sum_sq: f64 = coeffs.iter().map(|c| c * c).sum();
    SpectralCoefficients {
        pairs,
        coeffs,
        f_l2_sq,
        parseval_residual: f_l2_sq - sum_sq,
    }
}

/// Built-in initial data. Everything evaluates pointwise on the closed box
/// (zero outside), so projections and Monte Carlo terminal evaluations share
/// one definition.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialDatum {
    /// The eigenfunction with this multi-index.
    Eigenmode(Vec<usize>),
    /// Smooth bump `exp(-r^2 / (1 - r^2))` in the scaled radius
    /// `r^2 = sum ((x_i - center_i) / width_i)^2`, zero for `r >= 1`.
    Bump { center: Vec<f64>, width: Vec<f64> },
    /// Indicator of the sub-box `prod (lower_i, upper_i)`.
    Indicator { lower: Vec<f64>, upper: Vec<f64> },
    /// 1-d tabulated function with linear interpolation, zero outside the
    /// sample range.
    Tabulated1D { samples: Vec<(f64, f64)> },
    /// Finite linear combination.
    Combination(Vec<(f64, InitialDatum)>),
}

impl InitialDatum {
    pub fn eval(&self, dom: &BoxDomain, x: &[f64]) -> f64 {
        match self {
            InitialDatum::Eigenmode(index) => {
                EigenPair::from_index(dom, index.clone()).eval(dom, x)
            }
            InitialDatum::Bump { center, width } => {
                let r2: f64 = x
                    .iter()
                    .zip(center)
                    .zip(width)
                    .map(|((&xi, &c), &w)| {
                        let r = (xi - c) / w;
                        r * r
                    })
                    .sum();
                if r2 >= 1.0 {
                    0.0
                } else {
                    math::exp(-r2 / (1.0 - r2))
                }
            }
            InitialDatum::Indicator { lower, upper } => {
                let inside = x
                    .iter()
                    .zip(lower)
                    .zip(upper)
                    .all(|((&xi, &lo), &hi)| xi > lo && xi < hi);
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
            InitialDatum::Tabulated1D { samples } => {
                let xv = x[0];
                if samples.is_empty() || xv < samples[0].0 || xv > samples[samples.len() - 1].0 {
                    return 0.0;
                }
                match samples.binary_search_by(|&(s, _)| s.partial_cmp(&xv).unwrap()) {
                    Ok(i) => samples[i].1,
                    Err(i) => {
                        let (x0, y0) = samples[i - 1];
                        let (x1, y1) = samples[i];
                        y0 + (y1 - y0) * (xv - x0) / (x1 - x0)
                    }
                }
            }
            InitialDatum::Combination(terms) => {
                terms.iter().map(|(c, f)| c * f.eval(dom, x)).sum()
            }
        }
    }

    /// Sup-norm bound over the box (crude: sampled on a grid with a safety
    /// factor for the smooth cases, exact for indicators and eigenmodes).
    pub fn sup_bound(&self, dom: &BoxDomain) -> f64 {
        match self {
            InitialDatum::Eigenmode(index) => {
                EigenPair::from_index(dom, index.clone()).sup_norm(dom)
            }
            InitialDatum::Bump { .. } => 1.0,
            InitialDatum::Indicator { .. } => 1.0,
            InitialDatum::Tabulated1D { samples } => samples
                .iter()
                .map(|&(_, v)| math::abs(v))
                .fold(0.0, f64::max),
            InitialDatum::Combination(terms) => terms
                .iter()
                .map(|(c, f)| math::abs(*c) * f.sup_bound(dom))
                .sum(),
        }
    }
}

/// Truncated killed-semigroup heat kernel
/// `p_D(t,x,y) ~ sum_{n<=N} e^{-lambda_n t} phi_n(x) phi_n(y)`,
/// together with a crude bound on the dropped tail.
pub fn heat_kernel(
    dom: &BoxDomain,
    t: f64,
    x: &[f64],
    y: &[f64],
    n: usize,
) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(Error::Domain(String::from("heat_kernel requires t > 0")));
    }
    if !dom.contains(x) || !dom.contains(y) {
        return Err(Error::Domain(String::from(
            "heat_kernel arguments must lie inside the domain",
        )));
    }
    // Enumerate past the truncation point to estimate the tail.
    let extended = enumerate_eigens(dom, 2 * n + 16);
    let sup_sq: f64 = dom.sides().iter().map(|&m| 2.0 / m).product();
    let mut value = 0.0;
    for p in &extended[..n] {
        value += math::exp(-p.lambda * t) * p.eval(dom, x) * p.eval(dom, y);
    }
    let mut tail: f64 = extended[n..]
        .iter()
        .map(|p| sup_sq * math::exp(-p.lambda * t))
        .sum();
    // Geometric remainder past the extended enumeration.
    let last = extended.last().unwrap().lambda;
    let prev = extended[extended.len() - 2].lambda.min(last - 1e-12);
    let gap = (last - prev).max(last / extended.len() as f64);
    tail += sup_sq * math::exp(-last * t) / (1.0 - math::exp(-gap * t)).max(1e-300);
    Ok((value, tail))
}
