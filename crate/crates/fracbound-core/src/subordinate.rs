//! Stable and mixture subordinators `W`, their inverses `E_t` by discrete
//! first passage, and a histogram estimate of the density of `E_t`.
//!
//! Only finite mixtures of one-sided stable subordinators are directly
//! samplable, so density mixing measures are quantized to atoms first.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::mixing::{Atom, MixingMeasure, ORDER_MARGIN};
use crate::quad;
use crate::rng::PathRng;

/// Hard cap on the number of grid steps when extending a path towards a
/// first-passage target.
pub const MAX_PATH_STEPS: usize = 1 << 20;

/// Default atom count when quantizing a density measure for simulation.
pub const DEFAULT_QUANT_LEVELS: usize = 32;

/// A finite mixture subordinator `W_t = sum_j c_j W_t^{(beta_j)}` of
/// independent standard stable subordinators.
#[derive(Debug, Clone, PartialEq)]
pub struct SubordinatorSpec {
    /// `(beta_j, c_j)` pairs.
    components: Vec<(f64, f64)>,
}

impl SubordinatorSpec {
    pub fn new(components: Vec<(f64, f64)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidMeasure(String::from(
                "subordinator needs at least one component",
            )));
        }
        for &(beta, c) in &components {
            if !(beta > ORDER_MARGIN && beta < 1.0 - ORDER_MARGIN) {
                return Err(Error::InvalidMeasure(String::from(
                    "component orders must lie strictly inside (0, 1)",
                )));
            }
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::InvalidMeasure(String::from(
                    "component scales must be positive and finite",
                )));
            }
        }
        Ok(SubordinatorSpec { components })
    }

    pub fn single(beta: f64, scale: f64) -> Result<Self> {
        SubordinatorSpec::new(alloc::vec![(beta, scale)])
    }

    /// Components as `(beta_j, c_j)` pairs.
    pub fn components(&self) -> &[(f64, f64)] {
        &self.components
    }

    /// Build from a mixing measure. Atoms map directly through
    /// `c_j = (w_j Gamma(1-beta_j))^{1/beta_j}`; a density component is
    /// quantized at `levels` Gauss nodes in beta with the node weights
    /// `w Gamma(1-beta) p(beta)` mapped to scales the same way.
    pub fn from_measure(m: &MixingMeasure, levels: usize) -> Result<Self> {
        let mut components = Vec::new();
        for a in m.atoms() {
            let cb = a.weight * math::gamma(1.0 - a.beta);
            components.push((a.beta, math::powf(cb, 1.0 / a.beta)));
        }
        if let Some(d) = m.density() {
            let (nodes, weights) = quad::gauss_legendre_on(levels, d.beta0(), d.beta1());
            for (&b, &w) in nodes.iter().zip(&weights) {
                let cb = w * math::gamma(1.0 - b) * d.eval(b);
                if cb > 0.0 {
                    components.push((b, math::powf(cb, 1.0 / b)));
                }
            }
        }
        SubordinatorSpec::new(components)
    }

    /// The equivalent atomic mixing measure (`w_j = c_j^{beta_j} / Gamma(1-beta_j)`).
    pub fn to_measure(&self) -> Result<MixingMeasure> {
        let atoms = self
            .components
            .iter()
            .map(|&(beta, c)| Atom {
                beta,
                weight: MixingMeasure::atom_weight_for_scale(beta, c),
            })
            .collect();
        MixingMeasure::new(atoms, None)
    }

    /// `psi_W(s) = sum_j c_j^{beta_j} s^{beta_j}`.
    pub fn psi_w(&self, s: f64) -> f64 {
        self.components
            .iter()
            .map(|&(beta, c)| math::powf(c * s, beta))
            .sum()
    }
}

/// A subordinator path on the uniform operational-time grid `tau_k = k step`.
#[derive(Debug, Clone)]
pub struct SubordinatorPath {
    step: f64,
    /// `W(tau_k)`, nondecreasing, `values[0] = 0`.
    values: Vec<f64>,
}

impl SubordinatorPath {
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn last(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Right-continuous first passage on the grid:
    /// `E_t ~ min{tau_k : W(tau_k) > t}`. The discretization bias is at most
    /// one grid step.
    pub fn inverse_at(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(String::from("inverse_at requires t >= 0")));
        }
        // W is nondecreasing, so the first exceedance is a partition point.
        let k = self.values.partition_point(|&w| w <= t);
        if k == self.values.len() {
            return Err(Error::InsufficientHorizon {
                target: t,
                reached: self.last(),
            });
        }
        Ok(k as f64 * self.step)
    }
}

/// One increment of a standard stable subordinator over `dt`:
/// `dt^{1/beta} S` with `E[e^{-sS}] = e^{-s^beta}` (Kanter construction).
pub fn sample_stable_increment(beta: f64, dt: f64, rng: &mut PathRng) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Domain(String::from(
            "stable increments require beta in (0, 1)",
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::Domain(String::from(
            "stable increments require dt > 0",
        )));
    }
    let u = rng.uniform_to(math::PI);
    let w = rng.exponential();
    let s = math::sin(beta * u) / math::powf(math::sin(u), 1.0 / beta)
        * math::powf(math::sin((1.0 - beta) * u) / w, (1.0 - beta) / beta);
    Ok(math::powf(dt, 1.0 / beta) * s)
}

/// Exact draw of `W_tau` (stable marginals need no grid: `W_tau ~ tau^{1/beta} c S`
/// per component).
pub fn sample_w(spec: &SubordinatorSpec, tau: f64, rng: &mut PathRng) -> Result<f64> {
    let mut w = 0.0;
    for &(beta, c) in spec.components() {
        w += c * sample_stable_increment(beta, tau, rng)?;
    }
    Ok(w)
}

/// Sample a path on `[0, horizon]` with the given grid step.
pub fn sample_path(
    spec: &SubordinatorSpec,
    horizon: f64,
    step: f64,
    rng: &mut PathRng,
) -> Result<SubordinatorPath> {
    if !(step > 0.0) || !(horizon > 0.0) || step > horizon {
        return Err(Error::Domain(String::from(
            "sample_path requires 0 < step <= horizon",
        )));
    }
    let n = math::ceil(horizon / step) as usize;
    let mut path = SubordinatorPath {
        step,
        values: alloc::vec![0.0],
    };
    extend(spec, &mut path, n, rng)?;
    Ok(path)
}

/// Sample a path until `W` exceeds the physical time `target`, doubling the
/// grid length as needed (heavy-tailed waiting stalls fixed horizons), up to
/// [`MAX_PATH_STEPS`] steps.
pub fn sample_path_past(
    spec: &SubordinatorSpec,
    target: f64,
    step: f64,
    rng: &mut PathRng,
) -> Result<SubordinatorPath> {
    if !(step > 0.0) || !(target >= 0.0) {
        return Err(Error::Domain(String::from(
            "sample_path_past requires step > 0 and target >= 0",
        )));
    }
    let mut path = SubordinatorPath {
        step,
        values: alloc::vec![0.0],
    };
    let mut goal = 64usize;
    loop {
        let missing = goal - (path.values.len() - 1);
        extend(spec, &mut path, missing, rng)?;
        if path.last() > target {
            return Ok(path);
        }
        if goal >= MAX_PATH_STEPS {
            return Err(Error::InsufficientHorizon {
                target,
                reached: path.last(),
            });
        }
        goal = (goal * 2).min(MAX_PATH_STEPS);
    }
}

fn extend(
    spec: &SubordinatorSpec,
    path: &mut SubordinatorPath,
    steps: usize,
    rng: &mut PathRng,
) -> Result<()> {
    let mut w = path.last();
    for _ in 0..steps {
        for &(beta, c) in spec.components() {
            w += c * sample_stable_increment(beta, path.step, rng)?;
        }
        path.values.push(w);
    }
    Ok(())
}

/// Histogram estimate of the density `g(t, x)` of `E_t`.
#[derive(Debug, Clone)]
pub struct DensityEstimate {
    /// `bins + 1` bin edges, from 0 to the sample maximum.
    pub edges: Vec<f64>,
    /// Density value per bin (mass / width / paths).
    pub density: Vec<f64>,
    /// `int g_hat dx`; deviates from 1 only by binning/rounding error.
    pub integral: f64,
    /// Upper bound on the per-sample discretization bias (one grid step).
    pub bias_bound: f64,
    /// Set when the path count is too small for tight bands.
    pub wide_bands: bool,
}

impl DensityEstimate {
    /// Plug-in Laplace transform `int e^{-lambda x} g_hat(x) dx` evaluated at
    /// bin midpoints.
    pub fn laplace(&self, lambda: f64) -> f64 {
        let mut total = 0.0;
        for (i, &g) in self.density.iter().enumerate() {
            let width = self.edges[i + 1] - self.edges[i];
            let mid = 0.5 * (self.edges[i] + self.edges[i + 1]);
            total += g * width * math::exp(-lambda * mid);
        }
        total
    }
}

/// Estimate `g(t, .)` from `paths` first-passage samples, one RNG stream per
/// path index.
pub fn estimate_g(
    spec: &SubordinatorSpec,
    t: f64,
    paths: usize,
    step: f64,
    bins: usize,
    seed: u64,
) -> Result<DensityEstimate> {
    if !(t > 0.0) || paths == 0 || bins == 0 {
        return Err(Error::Domain(String::from(
            "estimate_g requires t > 0, paths >= 1, bins >= 1",
        )));
    }
    let mut samples = Vec::with_capacity(paths);
    for i in 0..paths {
        let mut rng = PathRng::stream(seed, i as u64);
        let path = sample_path_past(spec, t, step, &mut rng)?;
        samples.push(path.inverse_at(t)?);
    }
    let max = samples.iter().cloned().fold(0.0, f64::max).max(step);
    let width = max / bins as f64 * (1.0 + 1e-12);
    let mut counts = alloc::vec![0usize; bins];
    for &x in &samples {
        let b = ((x / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let edges: Vec<f64> = (0..=bins).map(|i| i as f64 * width).collect();
    let density: Vec<f64> = counts
        .iter()
        .map(|&c| c as f64 / (width * paths as f64))
        .collect();
    let integral = density.iter().map(|g| g * width).sum();
    Ok(DensityEstimate {
        edges,
        density,
        integral,
        bias_bound: step,
        wide_bands: paths < 1000,
    })
}
