//! Monte Carlo side of the story: `u(t,x) = E_x[f(B(E_t)) 1{tau_D(B) > E_t}]`
//! by killed Brownian motion run over the operational time `E_t`, the
//! commutation check of the two killing conventions, and a CTRW empirical
//! check.
//!
//! Convention pinned here once: the spatial generator is the full Laplacian
//! (no 1/2), so Brownian increments carry variance `2 dt` per axis.

use alloc::string::String;
use alloc::vec::Vec;

use crate::eigenbasis::BoxDomain;
use crate::error::{Error, Result};
use crate::math;
use crate::mixing::MixingMeasure;
use crate::rng::PathRng;
use crate::subordinate::{self, SubordinatorSpec};

/// Discretization knobs for the path estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McOptions {
    /// Euler step in operational time.
    pub euler_dt: f64,
    /// Subordinator grid step.
    pub sub_step: f64,
    /// Multiply in the Brownian-bridge boundary-crossing survival
    /// probability per step instead of relying on grid-point exits alone.
    pub bridge_correction: bool,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            euler_dt: 1e-3,
            sub_step: 1e-3,
            bridge_correction: false,
        }
    }
}

/// A mean/standard-error pair from a path ensemble.
#[derive(Debug, Clone)]
pub struct MCEstimate {
    pub t: f64,
    pub x: Vec<f64>,
    pub mean: f64,
    pub se: f64,
    pub paths: usize,
    pub options: McOptions,
}

/// Report of the two-indicator commutation check.
#[derive(Debug, Clone)]
pub struct CommutationReport {
    pub disagreement_rate: f64,
    pub paths: usize,
    pub options: McOptions,
}

/// Report of the CTRW-vs-diffusion comparison.
#[derive(Debug, Clone)]
pub struct CtrwReport {
    pub ctrw_mean: f64,
    pub ctrw_se: f64,
    pub mc_mean: f64,
    pub mc_se: f64,
    /// Difference in units of the combined standard error.
    pub z: f64,
}

fn check_interior(dom: &BoxDomain, x: &[f64]) -> Result<()> {
    if !dom.contains(x) {
        return Err(Error::Domain(String::from(
            "start point must lie strictly inside the domain",
        )));
    }
    Ok(())
}

/// Survival probability of one Brownian step against both faces of every
/// axis (bridge correction; increments have variance `2 dt`, so the crossing
/// probability against level `b` is `exp(-(b-x0)(b-x1)/dt)`).
fn bridge_survival(dom: &BoxDomain, x0: &[f64], x1: &[f64], dt: f64) -> f64 {
    let mut surv = 1.0;
    for i in 0..dom.dims() {
        let m = dom.sides()[i];
        surv *= 1.0 - math::exp(-(m - x0[i]) * (m - x1[i]) / dt);
        surv *= 1.0 - math::exp(-x0[i] * x1[i] / dt);
    }
    surv.max(0.0)
}

/// One path's contribution to `u(t, x)`: draw `E_t`, run Brownian motion for
/// that much operational time, return the (possibly bridge-weighted)
/// terminal value of `f`, or 0 on exit.
pub fn path_contribution<F: Fn(&[f64]) -> f64>(
    dom: &BoxDomain,
    f: &F,
    spec: &SubordinatorSpec,
    t: f64,
    x: &[f64],
    opts: McOptions,
    rng: &mut PathRng,
) -> Result<f64> {
    let path = subordinate::sample_path_past(spec, t, opts.sub_step, rng)?;
    let e_t = path.inverse_at(t)?;

    let mut pos: Vec<f64> = x.to_vec();
    let mut next = alloc::vec![0.0; pos.len()];
    let mut weight = 1.0;
    let mut remaining = e_t;
    while remaining > 0.0 {
        let dt = opts.euler_dt.min(remaining);
        remaining -= dt;
        let scale = math::sqrt(2.0 * dt);
        for (i, n) in next.iter_mut().enumerate() {
            *n = pos[i] + scale * rng.std_normal();
        }
        if !dom.contains(&next) {
            return Ok(0.0);
        }
        if opts.bridge_correction {
            weight *= bridge_survival(dom, &pos, &next, dt);
        }
        pos.copy_from_slice(&next);
    }
    Ok(weight * f(&pos))
}

/// Estimate `u(t, x)` from `paths` independent paths, one RNG stream per
/// path index; the reduction runs in path order, so the result is invariant
/// under any parallel scheduling of the per-path work.
pub fn estimate_u<F: Fn(&[f64]) -> f64>(
    dom: &BoxDomain,
    f: &F,
    spec: &SubordinatorSpec,
    t: f64,
    x: &[f64],
    paths: usize,
    opts: McOptions,
    seed: u64,
) -> Result<MCEstimate> {
    check_interior(dom, x)?;
    if paths < 2 {
        return Err(Error::Domain(String::from("need at least two paths")));
    }
    let mut values = Vec::with_capacity(paths);
    for i in 0..paths {
        let mut rng = PathRng::stream(seed, i as u64);
        values.push(path_contribution(dom, f, spec, t, x, opts, &mut rng)?);
    }
    Ok(reduce_estimate(t, x, &values, opts))
}

/// Fold an ordered list of per-path contributions into an estimate.
pub fn reduce_estimate(t: f64, x: &[f64], values: &[f64], opts: McOptions) -> MCEstimate {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    MCEstimate {
        t,
        x: x.to_vec(),
        mean,
        se: math::sqrt(var / n),
        paths: values.len(),
        options: opts,
    }
}

/// Per-path commutation probe: compare the indicator "B exits before
/// operational time E_t" with "the composed path B(E_s) exits before
/// physical time t". Equal in the continuum; disagreements are pure
/// discretization. Returns `true` on disagreement.
/// `s_step` is the physical-time grid on which the composed path is
/// observed; it must refine below the subordinator's typical increment for
/// the two indicators to see the same operational times.
pub fn commutation_disagreement(
    dom: &BoxDomain,
    spec: &SubordinatorSpec,
    t: f64,
    x: &[f64],
    opts: McOptions,
    s_step: f64,
    rng: &mut PathRng,
) -> Result<bool> {
    let path = subordinate::sample_path_past(spec, t, opts.sub_step, rng)?;
    let e_t = path.inverse_at(t)?;

    // Brownian grid over [0, E_t]
    let steps = math::ceil(e_t / opts.euler_dt) as usize;
    let mut positions: Vec<Vec<f64>> = Vec::with_capacity(steps + 1);
    positions.push(x.to_vec());
    let mut pos = x.to_vec();
    for k in 1..=steps {
        let dt = if k == steps {
            e_t - (steps - 1) as f64 * opts.euler_dt
        } else {
            opts.euler_dt
        };
        let scale = math::sqrt(2.0 * dt.max(0.0));
        for p in pos.iter_mut() {
            *p += scale * rng.std_normal();
        }
        positions.push(pos.clone());
    }

    // Indicator 1: exit anywhere on the operational grid up to E_t.
    let exit_direct = positions.iter().any(|p| !dom.contains(p));

    // Indicator 2: exit along the composed path B(E_s), s on the physical
    // grid of step s_step; E_s is piecewise constant between W-passages.
    let mut exit_composed = false;
    let mut s = s_step;
    while s <= t + 1e-15 {
        let e_s = path.inverse_at(s.min(t))?;
        let idx = ((e_s / opts.euler_dt) as usize).min(positions.len() - 1);
        if !dom.contains(&positions[idx]) {
            exit_composed = true;
            break;
        }
        s += s_step;
    }
    Ok(exit_direct != exit_composed)
}

/// Disagreement rate of the two killing conventions over an ensemble.
pub fn check_commutation(
    dom: &BoxDomain,
    spec: &SubordinatorSpec,
    t: f64,
    x: &[f64],
    paths: usize,
    opts: McOptions,
    s_step: f64,
    seed: u64,
) -> Result<CommutationReport> {
    check_interior(dom, x)?;
    let mut disagreements = 0usize;
    for i in 0..paths {
        let mut rng = PathRng::stream(seed, i as u64);
        if commutation_disagreement(dom, spec, t, x, opts, s_step, &mut rng)? {
            disagreements += 1;
        }
    }
    Ok(CommutationReport {
        disagreement_rate: disagreements as f64 / paths as f64,
        paths,
        options: opts,
    })
}

/// Cap on CTRW jumps per walker; prevents pathological spins at huge `c`.
const MAX_CTRW_JUMPS: usize = 50_000_000;

/// One CTRW walker: conditional Pareto waiting times
/// `P(J > u | beta) = c^{-1} u^{-beta}` with `beta` drawn from the
/// normalized atom measure, Gaussian jumps with variance `2/(c mass)` per
/// axis, killed at the boundary. Returns the terminal `f` value at physical
/// time `t` (0 if killed).
pub fn ctrw_walker<F: Fn(&[f64]) -> f64>(
    dom: &BoxDomain,
    f: &F,
    m: &MixingMeasure,
    t: f64,
    x: &[f64],
    c: f64,
    rng: &mut PathRng,
) -> Result<f64> {
    if m.density().is_some() {
        return Err(Error::RouteMismatch(String::from(
            "ctrw_walker needs an atoms-only measure",
        )));
    }
    let mass = m.total_mass()?;
    let jump_std = math::sqrt(2.0 / (c * mass));
    let mut pos: Vec<f64> = x.to_vec();
    let mut clock = 0.0;
    for _ in 0..MAX_CTRW_JUMPS {
        // waiting order from the normalized measure
        let mut pick = rng.uniform() * mass;
        let mut beta = m.atoms()[m.atoms().len() - 1].beta;
        for a in m.atoms() {
            if pick < a.weight {
                beta = a.beta;
                break;
            }
            pick -= a.weight;
        }
        let j = math::powf(c * rng.uniform(), -1.0 / beta);
        clock += j;
        if clock > t {
            return Ok(f(&pos));
        }
        for p in pos.iter_mut() {
            *p += jump_std * rng.std_normal();
        }
        if !dom.contains(&pos) {
            return Ok(0.0);
        }
    }
    Err(Error::InsufficientHorizon {
        target: t,
        reached: clock,
    })
}

/// Compare the CTRW ensemble mean against [`estimate_u`] for the diffusion
/// limit and report the z-score of the difference.
#[allow(clippy::too_many_arguments)]
pub fn ctrw_check<F: Fn(&[f64]) -> f64>(
    dom: &BoxDomain,
    f: &F,
    m: &MixingMeasure,
    t: f64,
    x: &[f64],
    walkers: usize,
    c: f64,
    opts: McOptions,
    seed: u64,
) -> Result<CtrwReport> {
    check_interior(dom, x)?;
    if walkers < 2 || !(c > 0.0) {
        return Err(Error::Domain(String::from(
            "ctrw_check needs walkers >= 2 and c > 0",
        )));
    }
    let mut values = Vec::with_capacity(walkers);
    for i in 0..walkers {
        let mut rng = PathRng::stream(seed, i as u64);
        values.push(ctrw_walker(dom, f, m, t, x, c, &mut rng)?);
    }
    let ctrw = reduce_estimate(t, x, &values, opts);

    let spec = SubordinatorSpec::from_measure(m, subordinate::DEFAULT_QUANT_LEVELS)?;
    let mc = estimate_u(dom, f, &spec, t, x, walkers, opts, seed ^ 0x9e3779b97f4a7c15)?;

    let combined = math::sqrt(ctrw.se * ctrw.se + mc.se * mc.se).max(1e-300);
    Ok(CtrwReport {
        ctrw_mean: ctrw.mean,
        ctrw_se: ctrw.se,
        mc_mean: mc.mean,
        mc_se: mc.se,
        z: (ctrw.mean - mc.mean) / combined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special;

    fn interval_pi() -> BoxDomain {
        BoxDomain::interval(math::PI).unwrap()
    }

    fn opts(dt: f64) -> McOptions {
        McOptions {
            euler_dt: dt,
            sub_step: dt,
            bridge_correction: false,
        }
    }

    #[test]
    fn zero_datum_exact_zero() {
        let dom = interval_pi();
        let spec = SubordinatorSpec::single(0.5, 1.0).unwrap();
        let est = estimate_u(&dom, &|_: &[f64]| 0.0, &spec, 1.0, &[1.5], 200, opts(0.01), 1)
            .unwrap();
        assert_eq!(est.mean, 0.0);
        assert_eq!(est.se, 0.0);
    }

    #[test]
    fn canonical_point_within_three_se() {
        // psi_W = s^{1/2}, f = sin, u(1, pi/2) = E_{1/2}(-1)
        let dom = interval_pi();
        let spec = SubordinatorSpec::single(0.5, 1.0).unwrap();
        let est = estimate_u(
            &dom,
            &|x: &[f64]| math::sin(x[0]),
            &spec,
            1.0,
            &[math::PI / 2.0],
            20_000,
            opts(5e-3),
            7,
        )
        .unwrap();
        let want = 0.427_583_576_155_807;
        assert!(
            (est.mean - want).abs() < 3.0 * est.se + 0.01,
            "{} vs {want} (se {})",
            est.mean,
            est.se
        );
    }

    #[test]
    fn small_time_recovers_datum() {
        let dom = interval_pi();
        let spec = SubordinatorSpec::single(0.5, 1.0).unwrap();
        let f = |x: &[f64]| math::sin(x[0]);
        let est = estimate_u(&dom, &f, &spec, 1e-4, &[1.0], 5_000, opts(1e-3), 3).unwrap();
        assert!(
            (est.mean - math::sin(1.0)).abs() < 3.0 * est.se + 0.02,
            "{}",
            est.mean
        );
    }

    #[test]
    fn submarkov_bound_and_monotone() {
        let dom = interval_pi();
        let spec = SubordinatorSpec::single(0.5, 1.0).unwrap();
        let one = |_: &[f64]| 1.0;
        let mut prev = 1.0 + 1e-9;
        for t in [0.25, 1.0, 4.0] {
            let est = estimate_u(&dom, &one, &spec, t, &[1.5], 4_000, opts(5e-3), 11).unwrap();
            assert!(est.mean >= 0.0 && est.mean <= 1.0);
            assert!(est.mean <= prev + 3.0 * est.se + 0.02, "t={t}");
            prev = est.mean;
        }
    }

    #[test]
    fn se_scales_like_inverse_sqrt_paths() {
        let dom = interval_pi();
        let spec = SubordinatorSpec::single(0.5, 1.0).unwrap();
        let f = |x: &[f64]| math::sin(x[0]);
        let se_at = |paths: usize| {
            estimate_u(&dom, &f, &spec, 1.0, &[1.5], paths, opts(0.01), 17)
                .unwrap()
                .se
        };
        let s1 = se_at(1_000);
        let s2 = se_at(4_000);
        let ratio = s1 / s2;
        assert!((ratio - 2.0).abs() < 0.4, "ratio {ratio}");
    }

    #[test]
    fn seed_determinism() {
        let dom = interval_pi();
        let spec = SubordinatorSpec::single(0.5, 1.0).unwrap();
        let f = |x: &[f64]| math::sin(x[0]);
        let a = estimate_u(&dom, &f, &spec, 0.5, &[1.0], 500, opts(0.01), 23).unwrap();
        let b = estimate_u(&dom, &f, &spec, 0.5, &[1.0], 500, opts(0.01), 23).unwrap();
        assert_eq!(a.mean, b.mean);
        assert_eq!(a.se, b.se);
    }

    #[test]
    fn bridge_correction_lowers_survival() {
        // grid exits miss boundary crossings, the bridge weight restores
        // (some of) them, so the corrected estimate of P(survive) is lower
        let dom = interval_pi();
        let spec = SubordinatorSpec::single(0.5, 1.0).unwrap();
        let one = |_: &[f64]| 1.0;
        let coarse = opts(0.05);
        let with = McOptions {
            bridge_correction: true,
            ..coarse
        };
        let plain = estimate_u(&dom, &one, &spec, 1.0, &[0.4], 4_000, coarse, 31).unwrap();
        let corrected = estimate_u(&dom, &one, &spec, 1.0, &[0.4], 4_000, with, 31).unwrap();
        assert!(
            corrected.mean < plain.mean,
            "{} vs {}",
            corrected.mean,
            plain.mean
        );
    }

    #[test]
    fn commutation_rate_small_and_refining() {
        let dom = interval_pi();
        let spec = SubordinatorSpec::single(0.5, 1.0).unwrap();
        let x = [math::PI / 2.0];
        let mut rates = Vec::new();
        for s_step in [1e-2, 1e-3, 1e-4] {
            let rep =
                check_commutation(&dom, &spec, 1.0, &x, 4_000, opts(0.01), s_step, 5).unwrap();
            rates.push(rep.disagreement_rate);
        }
        // non-increasing within MC noise, small at the finest level
        assert!(rates[2] <= rates[0] + 0.01, "{rates:?}");
        assert!(rates[2] < 0.02, "{rates:?}");
    }

    #[test]
    fn commutation_agrees_away_from_boundary() {
        // tiny t: paths stay near the center, both indicators say "no exit"
        let dom = interval_pi();
        let spec = SubordinatorSpec::single(0.5, 1.0).unwrap();
        let rep =
            check_commutation(&dom, &spec, 1e-4, &[math::PI / 2.0], 500, opts(1e-3), 1e-5, 9)
                .unwrap();
        assert_eq!(rep.disagreement_rate, 0.0);
    }

    #[test]
    fn ctrw_single_atom_z_score() {
        let dom = interval_pi();
        let m = MixingMeasure::single_atom(0.5, 1.0 / math::gamma(0.5)).unwrap();
        let f = |x: &[f64]| math::sin(x[0]);
        let rep = ctrw_check(
            &dom,
            &f,
            &m,
            1.0,
            &[math::PI / 2.0],
            10_000,
            1e4,
            opts(5e-3),
            13,
        )
        .unwrap();
        assert!(rep.z.abs() < 3.0, "z = {} ({} vs {})", rep.z, rep.ctrw_mean, rep.mc_mean);
        // and both estimators track the analytic value loosely
        let want = special::mittag_leffler(0.5, -1.0).unwrap();
        assert!((rep.ctrw_mean - want).abs() < 0.03, "{}", rep.ctrw_mean);
    }

    #[test]
    fn ctrw_z_stable_as_c_grows() {
        let dom = interval_pi();
        let m = MixingMeasure::single_atom(0.5, 1.0 / math::gamma(0.5)).unwrap();
        let f = |x: &[f64]| math::sin(x[0]);
        let mut zs = Vec::new();
        for c in [1e2, 1e3, 1e4] {
            let rep =
                ctrw_check(&dom, &f, &m, 1.0, &[1.5], 4_000, c, opts(5e-3), 19).unwrap();
            zs.push(rep.z.abs());
        }
        // limit-theorem direction: no systematic growth in |z|
        assert!(zs[2] < zs[0] + 3.0, "{zs:?}");
    }

    #[test]
    fn ctrw_zero_datum() {
        let dom = interval_pi();
        let m = MixingMeasure::single_atom(0.5, 1.0).unwrap();
        let rep = ctrw_check(&dom, &|_: &[f64]| 0.0, &m, 1.0, &[1.5], 200, 100.0, opts(0.01), 1)
            .unwrap();
        assert_eq!(rep.ctrw_mean, 0.0);
        assert_eq!(rep.mc_mean, 0.0);
    }

    #[test]
    fn domain_errors() {
        let dom = interval_pi();
        let spec = SubordinatorSpec::single(0.5, 1.0).unwrap();
        let f = |x: &[f64]| math::sin(x[0]);
        assert!(estimate_u(&dom, &f, &spec, 1.0, &[4.0], 100, opts(0.01), 1).is_err());
        assert!(estimate_u(&dom, &f, &spec, 1.0, &[1.0], 1, opts(0.01), 1).is_err());
        let density = MixingMeasure::new(
            alloc::vec![],
            Some(crate::mixing::DensityComponent::constant(0.25, 0.75, 2.0).unwrap()),
        )
        .unwrap();
        let mut rng = PathRng::stream(0, 0);
        assert!(ctrw_walker(&dom, &f, &density, 1.0, &[1.0], 100.0, &mut rng).is_err());
    }
}
