//! Subcommand implementations. Verification-style commands return
//! `Outcome::VerificationFailed` when the math fails its check (exit 2) and
//! `Outcome::Success` otherwise; configuration problems surface as errors
//! (exit 1).

use std::path::Path;

use anyhow::{anyhow, bail, Result};
use serde_json::json;

use fracbound_core::hkernel::{HEvaluator, HRoute};
use fracbound_core::rng::PathRng;
use fracbound_core::solver_mc;
use fracbound_core::solver_spectral::{self, TailBound};
use fracbound_core::subordinate;

use crate::config::RunConfig;
use crate::output::{self, Diagnostics};
use crate::parallel::map_paths;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    VerificationFailed,
}

fn config_echo(cfg: &RunConfig) -> serde_json::Value {
    serde_json::to_value(cfg).unwrap_or(serde_json::Value::Null)
}

fn parse_route(cfg: &RunConfig) -> Result<HRoute> {
    Ok(match cfg.route.as_deref().unwrap_or("auto") {
        "auto" => HRoute::Auto,
        "ml" | "mittag-leffler" => HRoute::MittagLeffler,
        "kochubei" => HRoute::Kochubei,
        "talbot" | "laplace" => HRoute::LaplaceTalbot,
        "stehfest" => HRoute::LaplaceStehfest,
        other => bail!("unknown h route {other:?}"),
    })
}

fn point_headers(dims: usize) -> Vec<String> {
    (1..=dims).map(|i| format!("x{i}")).collect()
}

pub fn solve_spectral(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let dom = cfg.domain()?;
    let datum = cfg.datum()?;
    let measure = cfg.measure()?;
    let times = cfg.times()?;
    let points = cfg.points()?;
    for p in points {
        if p.len() != dom.dims() {
            bail!("point dimension does not match the domain");
        }
    }

    let f = |x: &[f64]| datum.eval(&dom, x);
    let n = match (cfg.truncation, cfg.target_tail) {
        (Some(n), None) => n,
        (None, Some(tail)) => {
            let choice = solver_spectral::choose_truncation(&dom, f, tail)?;
            choice.n
        }
        (None, None) => bail!("config needs \"truncation\" or \"target_tail\""),
        (Some(_), Some(_)) => bail!("\"truncation\" and \"target_tail\" are mutually exclusive"),
    };
    let sol = solver_spectral::solve(&dom, f, &measure, n)?;
    let field = sol.field(times, points)?;

    let mut rows = Vec::new();
    for (k, &t) in field.times.iter().enumerate() {
        for (m, p) in field.points.iter().enumerate() {
            let mut row = vec![t];
            row.extend_from_slice(p);
            row.push(field.values[k][m]);
            row.push(field.error_estimate);
            rows.push(row);
        }
    }
    let mut header: Vec<String> = vec!["t".into()];
    header.extend(point_headers(dom.dims()));
    header.push("u".into());
    header.push("err".into());
    let hrefs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    output::write_csv(&out.join("solution.csv"), &hrefs, &rows)?;

    let mut diag = Diagnostics::new("solve-spectral", config_echo(cfg));
    diag.insert("truncation", json!(sol.truncation()));
    diag.insert("classical_hint", json!(sol.classical_hint()));
    diag.insert(
        "parseval_residual",
        json!(sol.coefficients().parseval_residual),
    );
    match sol.tail_bound() {
        TailBound::Uniform(v) => diag.insert("tail_bound_uniform", json!(v)),
        TailBound::ParsevalL2(v) => diag.insert("tail_bound_parseval_l2", json!(v)),
    }
    diag.write(out)?;
    Ok(Outcome::Success)
}

pub fn solve_mc(cfg: &RunConfig, out: &Path, seed: Option<u64>, threads: usize) -> Result<Outcome> {
    let dom = cfg.domain()?;
    let datum = cfg.datum()?;
    let spec = cfg.subordinator()?;
    let times = cfg.times()?;
    let points = cfg.points()?;
    let paths = cfg.paths.ok_or_else(|| anyhow!("config needs \"paths\""))?;
    let opts = cfg.mc_options();
    let seed = cfg.require_seed(seed)?;

    let f = |x: &[f64]| datum.eval(&dom, x);
    let mut rows = Vec::new();
    let mut combo = 0u64;
    for &t in times {
        for p in points {
            let base = combo * paths as u64;
            let values = map_paths(threads, paths, |i| {
                let mut rng = PathRng::stream(seed, base + i as u64);
                solver_mc::path_contribution(&dom, &f, &spec, t, p, opts, &mut rng)
            })?
            .into_iter()
            .collect::<std::result::Result<Vec<f64>, _>>()?;
            let est = solver_mc::reduce_estimate(t, p, &values, opts);
            let mut row = vec![t];
            row.extend_from_slice(p);
            row.extend_from_slice(&[est.mean, est.se, est.paths as f64]);
            rows.push(row);
            combo += 1;
        }
    }
    let mut header: Vec<String> = vec!["t".into()];
    header.extend(point_headers(dom.dims()));
    header.extend(["mean".into(), "se".into(), "paths".into()]);
    let hrefs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    output::write_csv(&out.join("mc.csv"), &hrefs, &rows)?;

    let mut diag = Diagnostics::new("solve-mc", config_echo(cfg));
    diag.insert("seed", json!(seed));
    diag.insert("paths", json!(paths));
    diag.insert("euler_dt", json!(opts.euler_dt));
    diag.insert("sub_step", json!(opts.sub_step));
    diag.write(out)?;
    Ok(Outcome::Success)
}

pub fn eval_h(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let measure = cfg.measure()?;
    let times = cfg.times()?;
    let lambdas = cfg
        .lambdas
        .as_deref()
        .filter(|l| !l.is_empty())
        .ok_or_else(|| anyhow!("config needs a nonempty \"lambdas\" list"))?;
    let route = parse_route(cfg)?;
    let ev = HEvaluator::new(measure).with_route(route);

    let mut rows = Vec::new();
    for &t in times {
        for &lambda in lambdas {
            let h = if t == 0.0 { 1.0 } else { ev.eval(t, lambda)? };
            rows.push(vec![t, lambda, h]);
        }
    }
    output::write_csv(&out.join("h.csv"), &["t", "lambda", "h"], &rows)?;

    let mut diag = Diagnostics::new("eval-h", config_echo(cfg));
    diag.insert("route", json!(route.name()));
    diag.write(out)?;
    Ok(Outcome::Success)
}

pub fn sample_subordinator(
    cfg: &RunConfig,
    out: &Path,
    seed: Option<u64>,
    threads: usize,
) -> Result<Outcome> {
    let spec = cfg.subordinator()?;
    let paths = cfg.paths.ok_or_else(|| anyhow!("config needs \"paths\""))?;
    let horizon = cfg.horizon.unwrap_or(1.0);
    let step = cfg.sub_step.unwrap_or(1e-2);
    let seed = cfg.require_seed(seed)?;
    let s_list = cfg
        .laplace_s
        .clone()
        .unwrap_or_else(|| vec![0.5, 1.0, 2.0]);
    let bins = cfg.bins.unwrap_or(64);
    let g_time = cfg.times.as_ref().and_then(|t| t.first().copied());

    let ends = map_paths(threads, paths, |i| {
        let mut rng = PathRng::stream(seed, i as u64);
        subordinate::sample_path(&spec, horizon, step, &mut rng).map(|p| p.last())
    })?
    .into_iter()
    .collect::<std::result::Result<Vec<f64>, _>>()?;

    let rows: Vec<Vec<f64>> = ends
        .iter()
        .enumerate()
        .map(|(i, &w)| vec![i as f64, w])
        .collect();
    output::write_csv(&out.join("subordinator.csv"), &["path", "w_end"], &rows)?;

    let mut laplace = Vec::new();
    for &s in &s_list {
        let transformed: Vec<f64> = ends.iter().map(|&w| (-s * w).exp()).collect();
        let n = transformed.len() as f64;
        let mean = transformed.iter().sum::<f64>() / n;
        let var = transformed
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / (n - 1.0);
        laplace.push(json!({
            "s": s,
            "empirical": mean,
            "se": (var / n).sqrt(),
            "exact": (-horizon * spec.psi_w(s)).exp(),
        }));
    }

    let mut diag = Diagnostics::new("sample-subordinator", config_echo(cfg));
    diag.insert("seed", json!(seed));
    diag.insert("laplace", json!(laplace));
    if let Some(t) = g_time {
        let est = subordinate::estimate_g(&spec, t, paths, step, bins, seed)?;
        diag.insert(
            "g_histogram",
            json!({
                "t": t,
                "edges": est.edges,
                "density": est.density,
                "integral": est.integral,
                "bias_bound": est.bias_bound,
                "wide_bands": est.wide_bands,
            }),
        );
    }
    diag.write(out)?;
    Ok(Outcome::Success)
}

pub fn verify(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let measure = cfg.measure()?;
    let times = cfg.times().map(|t| t.to_vec()).unwrap_or_else(|_| vec![0.5, 1.0, 2.0]);
    let lambdas = cfg
        .lambdas
        .clone()
        .unwrap_or_else(|| vec![1.0, 5.0, 25.0]);
    let route_tol = cfg.route_tolerance.unwrap_or(1e-4);
    let residual_tol = cfg.residual_tolerance.unwrap_or(1e-3);
    let dt = cfg.dt.unwrap_or(1e-3);

    let ev = HEvaluator::new(measure.clone());
    let mut checks = Vec::new();
    let mut all_pass = true;

    // route agreement across every applicable evaluation route
    let mut worst_spread: f64 = 0.0;
    for &t in &times {
        if t <= 0.0 {
            continue;
        }
        for &lambda in &lambdas {
            worst_spread = worst_spread.max(ev.route_agreement(t, lambda)?.spread);
        }
    }
    let pass = worst_spread <= route_tol;
    all_pass &= pass;
    checks.push(json!({
        "check": "h-route-agreement",
        "max_spread": worst_spread,
        "tolerance": route_tol,
        "pass": pass,
    }));

    // derivative bound |d_t h| <= lambda k(t) with 5% slack
    let positive_times: Vec<f64> = times.iter().copied().filter(|&t| t > 0.0).collect();
    let mut worst_ratio: f64 = 0.0;
    for &lambda in &lambdas {
        let rep = ev.dt_bound_check(lambda, &positive_times)?;
        worst_ratio = worst_ratio.max(rep.max_ratio);
    }
    let pass = worst_ratio <= 1.05;
    all_pass &= pass;
    checks.push(json!({
        "check": "dt-bound",
        "max_ratio": worst_ratio,
        "tolerance": 1.05,
        "pass": pass,
    }));

    // PDE residual, when a domain and datum are configured
    if cfg.domain.is_some() && cfg.datum.is_some() {
        let dom = cfg.domain()?;
        let datum = cfg.datum()?;
        let n = cfg.truncation.unwrap_or(8);
        let sol = solver_spectral::solve(&dom, |x| datum.eval(&dom, x), &measure, n)?;
        let points: Vec<Vec<f64>> = cfg
            .points
            .clone()
            .unwrap_or_else(|| vec![dom.sides().iter().map(|&m| m / 2.0).collect()]);
        let rep = solver_spectral::verify_residual(&sol, &positive_times, &points, dt)?;
        let pass = rep.max_rel <= residual_tol;
        all_pass &= pass;
        checks.push(json!({
            "check": "pde-residual",
            "max_abs": rep.max_abs,
            "max_rel": rep.max_rel,
            "tolerance": residual_tol,
            "pass": pass,
        }));
    }

    let mut diag = Diagnostics::new("verify", config_echo(cfg));
    diag.insert("checks", json!(checks));
    diag.insert("pass", json!(all_pass));
    diag.write(out)?;
    for c in &checks {
        let name = c["check"].as_str().unwrap_or("?");
        let status = if c["pass"].as_bool().unwrap_or(false) {
            "pass"
        } else {
            "FAIL"
        };
        println!("{name}: {status}");
    }
    Ok(if all_pass {
        Outcome::Success
    } else {
        Outcome::VerificationFailed
    })
}

pub fn verify_commutation(
    cfg: &RunConfig,
    out: &Path,
    seed: Option<u64>,
    threads: usize,
) -> Result<Outcome> {
    let dom = cfg.domain()?;
    let spec = cfg.subordinator()?;
    let t = *cfg
        .times()?
        .first()
        .ok_or_else(|| anyhow!("config needs a time"))?;
    let x = cfg.points()?[0].clone();
    let paths = cfg.paths.ok_or_else(|| anyhow!("config needs \"paths\""))?;
    let opts = cfg.mc_options();
    let s_steps = cfg
        .s_steps
        .clone()
        .unwrap_or_else(|| vec![1e-2, 1e-3, 1e-4]);
    let seed = cfg.require_seed(seed)?;

    let mut rates = Vec::new();
    for &s_step in &s_steps {
        let flags = map_paths(threads, paths, |i| {
            let mut rng = PathRng::stream(seed, i as u64);
            solver_mc::commutation_disagreement(&dom, &spec, t, &x, opts, s_step, &mut rng)
        })?
        .into_iter()
        .collect::<std::result::Result<Vec<bool>, _>>()?;
        let rate = flags.iter().filter(|&&d| d).count() as f64 / paths as f64;
        rates.push(rate);
    }

    let non_increasing = rates.windows(2).all(|w| w[1] <= w[0]);
    let finest_ok = *rates.last().unwrap() < 0.02;
    let pass = non_increasing && finest_ok;

    let rows: Vec<Vec<f64>> = s_steps
        .iter()
        .zip(&rates)
        .map(|(&s, &r)| vec![s, r])
        .collect();
    output::write_csv(
        &out.join("commutation.csv"),
        &["s_step", "disagreement_rate"],
        &rows,
    )?;
    let mut diag = Diagnostics::new("verify-commutation", config_echo(cfg));
    diag.insert("seed", json!(seed));
    diag.insert("rates", json!(rates));
    diag.insert("pass", json!(pass));
    diag.write(out)?;
    println!(
        "commutation: {} (rates {:?})",
        if pass { "pass" } else { "FAIL" },
        rates
    );
    Ok(if pass {
        Outcome::Success
    } else {
        Outcome::VerificationFailed
    })
}

pub fn ctrw(cfg: &RunConfig, out: &Path, seed: Option<u64>, threads: usize) -> Result<Outcome> {
    let dom = cfg.domain()?;
    let datum = cfg.datum()?;
    let measure = cfg.measure()?;
    let t = *cfg
        .times()?
        .first()
        .ok_or_else(|| anyhow!("config needs a time"))?;
    let x = cfg.points()?[0].clone();
    let walkers = cfg
        .walkers
        .or(cfg.paths)
        .ok_or_else(|| anyhow!("config needs \"walkers\""))?;
    let c = cfg.ctrw_scale.unwrap_or(1e4);
    let opts = cfg.mc_options();
    let seed = cfg.require_seed(seed)?;

    let f = |xx: &[f64]| datum.eval(&dom, xx);

    let ctrw_values = map_paths(threads, walkers, |i| {
        let mut rng = PathRng::stream(seed, i as u64);
        solver_mc::ctrw_walker(&dom, &f, &measure, t, &x, c, &mut rng)
    })?
    .into_iter()
    .collect::<std::result::Result<Vec<f64>, _>>()?;
    let ctrw_est = solver_mc::reduce_estimate(t, &x, &ctrw_values, opts);

    let spec = cfg.subordinator()?;
    let mc_seed = seed ^ 0x9e37_79b9_7f4a_7c15;
    let mc_values = map_paths(threads, walkers, |i| {
        let mut rng = PathRng::stream(mc_seed, i as u64);
        solver_mc::path_contribution(&dom, &f, &spec, t, &x, opts, &mut rng)
    })?
    .into_iter()
    .collect::<std::result::Result<Vec<f64>, _>>()?;
    let mc_est = solver_mc::reduce_estimate(t, &x, &mc_values, opts);

    let combined = (ctrw_est.se * ctrw_est.se + mc_est.se * mc_est.se)
        .sqrt()
        .max(1e-300);
    let both_zero = ctrw_est.mean == 0.0 && mc_est.mean == 0.0;
    let z = if both_zero {
        0.0
    } else {
        (ctrw_est.mean - mc_est.mean) / combined
    };
    let pass = z.abs() < 3.0;

    let mut diag = Diagnostics::new("ctrw", config_echo(cfg));
    diag.insert("seed", json!(seed));
    diag.insert("ctrw_mean", json!(ctrw_est.mean));
    diag.insert("ctrw_se", json!(ctrw_est.se));
    diag.insert("mc_mean", json!(mc_est.mean));
    diag.insert("mc_se", json!(mc_est.se));
    diag.insert("z", json!(z));
    diag.insert("pass", json!(pass));
    diag.write(out)?;
    println!("ctrw z-score: {z} ({})", if pass { "pass" } else { "FAIL" });
    Ok(if pass {
        Outcome::Success
    } else {
        Outcome::VerificationFailed
    })
}
