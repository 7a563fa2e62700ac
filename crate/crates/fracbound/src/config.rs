//! JSON run configuration and its translation into core types.
//!
//! One schema serves every subcommand; each command validates the subset of
//! fields it needs. Unknown fields are rejected so typos fail loudly.

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use fracbound_core::eigenbasis::{BoxDomain, InitialDatum};
use fracbound_core::mixing::{Atom, DensityComponent, MixingMeasure};
use fracbound_core::solver_mc::McOptions;
use fracbound_core::subordinate::{SubordinatorSpec, DEFAULT_QUANT_LEVELS};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Box side lengths (1 to 3 entries).
    #[serde(default)]
    pub domain: Option<Vec<f64>>,
    #[serde(default)]
    pub datum: Option<DatumConfig>,
    #[serde(default)]
    pub measure: Option<MeasureConfig>,
    /// Direct subordinator components; defaults to quantizing `measure`.
    #[serde(default)]
    pub subordinator: Option<Vec<ComponentConfig>>,

    /// Spectral truncation; mutually exclusive with `target_tail`.
    #[serde(default)]
    pub truncation: Option<usize>,
    #[serde(default)]
    pub target_tail: Option<f64>,

    #[serde(default)]
    pub times: Option<Vec<f64>>,
    #[serde(default)]
    pub lambdas: Option<Vec<f64>>,
    /// Evaluation points; each inner list is one point.
    #[serde(default)]
    pub points: Option<Vec<Vec<f64>>>,

    #[serde(default)]
    pub paths: Option<usize>,
    #[serde(default)]
    pub walkers: Option<usize>,
    #[serde(default)]
    pub euler_dt: Option<f64>,
    #[serde(default)]
    pub sub_step: Option<f64>,
    /// Physical observation grid for the commutation check.
    #[serde(default)]
    pub s_steps: Option<Vec<f64>>,
    /// Residual-check time step.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub bridge_correction: Option<bool>,
    /// CTRW time-scale parameter.
    #[serde(default)]
    pub ctrw_scale: Option<f64>,

    /// Operational horizon for `sample-subordinator`.
    #[serde(default)]
    pub horizon: Option<f64>,
    /// Laplace abscissae for the subordinator summary.
    #[serde(default)]
    pub laplace_s: Option<Vec<f64>>,
    #[serde(default)]
    pub bins: Option<usize>,

    /// h evaluation route: "auto" | "ml" | "kochubei" | "talbot" | "stehfest".
    #[serde(default)]
    pub route: Option<String>,

    /// Verification tolerances (route spread, residual, bound slack).
    #[serde(default)]
    pub route_tolerance: Option<f64>,
    #[serde(default)]
    pub residual_tolerance: Option<f64>,

    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DatumConfig {
    Zero,
    Eigenmode {
        index: Vec<usize>,
    },
    Bump {
        center: Vec<f64>,
        width: Vec<f64>,
    },
    Indicator {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Tabulated {
        samples: Vec<(f64, f64)>,
    },
    Combination {
        terms: Vec<(f64, DatumConfig)>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    #[serde(default)]
    pub atoms: Vec<AtomConfig>,
    #[serde(default)]
    pub density: Option<DensityConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    pub beta: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    /// Tabulated `(beta, p)` samples; two equal-p samples give a constant
    /// density.
    #[serde(default)]
    pub samples: Option<Vec<(f64, f64)>>,
    /// Shorthand for a constant density `p` on `[beta0, beta1]`.
    #[serde(default)]
    pub beta0: Option<f64>,
    #[serde(default)]
    pub beta1: Option<f64>,
    #[serde(default)]
    pub constant: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentConfig {
    pub beta: f64,
    pub scale: f64,
}

impl RunConfig {
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("config {} is not schema-valid", path.display()))
    }

    pub fn domain(&self) -> Result<BoxDomain> {
        let sides = self
            .domain
            .clone()
            .ok_or_else(|| anyhow!("config needs \"domain\""))?;
        Ok(BoxDomain::new(sides)?)
    }

    pub fn measure(&self) -> Result<MixingMeasure> {
        let mc = self
            .measure
            .as_ref()
            .ok_or_else(|| anyhow!("config needs \"measure\""))?;
        let atoms = mc
            .atoms
            .iter()
            .map(|a| Atom {
                beta: a.beta,
                weight: a.weight,
            })
            .collect();
        let density = match &mc.density {
            None => None,
            Some(d) => Some(build_density(d)?),
        };
        Ok(MixingMeasure::new(atoms, density)?)
    }

    pub fn datum(&self) -> Result<InitialDatum> {
        let dc = self
            .datum
            .as_ref()
            .ok_or_else(|| anyhow!("config needs \"datum\""))?;
        build_datum(dc)
    }

    pub fn subordinator(&self) -> Result<SubordinatorSpec> {
        if let Some(components) = &self.subordinator {
            let list = components.iter().map(|c| (c.beta, c.scale)).collect();
            return Ok(SubordinatorSpec::new(list)?);
        }
        let m = self
            .measure()
            .map_err(|_| anyhow!("config needs \"subordinator\" or \"measure\""))?;
        Ok(SubordinatorSpec::from_measure(&m, DEFAULT_QUANT_LEVELS)?)
    }

    pub fn mc_options(&self) -> McOptions {
        let defaults = McOptions::default();
        McOptions {
            euler_dt: self.euler_dt.unwrap_or(defaults.euler_dt),
            sub_step: self.sub_step.unwrap_or(defaults.sub_step),
            bridge_correction: self.bridge_correction.unwrap_or(false),
        }
    }

    /// Seed resolution: CLI flag wins, then config; stochastic commands
    /// require one.
    pub fn require_seed(&self, flag: Option<u64>) -> Result<u64> {
        flag.or(self.seed)
            .ok_or_else(|| anyhow!("this command is stochastic: provide \"seed\" in the config or --seed"))
    }

    pub fn times(&self) -> Result<&[f64]> {
        self.times
            .as_deref()
            .filter(|t| !t.is_empty())
            .ok_or_else(|| anyhow!("config needs a nonempty \"times\" list"))
    }

    pub fn points(&self) -> Result<&[Vec<f64>]> {
        self.points
            .as_deref()
            .filter(|p| !p.is_empty())
            .ok_or_else(|| anyhow!("config needs a nonempty \"points\" list"))
    }
}

fn build_density(d: &DensityConfig) -> Result<DensityComponent> {
    match (&d.samples, d.beta0, d.beta1, d.constant) {
        (Some(samples), None, None, None) => Ok(DensityComponent::new(samples.clone())?),
        (None, Some(b0), Some(b1), Some(p)) => Ok(DensityComponent::constant(b0, b1, p)?),
        _ => bail!("density needs either \"samples\" or all of beta0/beta1/constant"),
    }
}

fn build_datum(dc: &DatumConfig) -> Result<InitialDatum> {
    Ok(match dc {
        DatumConfig::Zero => InitialDatum::Combination(vec![]),
        DatumConfig::Eigenmode { index } => InitialDatum::Eigenmode(index.clone()),
        DatumConfig::Bump { center, width } => InitialDatum::Bump {
            center: center.clone(),
            width: width.clone(),
        },
        DatumConfig::Indicator { lower, upper } => InitialDatum::Indicator {
            lower: lower.clone(),
            upper: upper.clone(),
        },
        DatumConfig::Tabulated { samples } => InitialDatum::Tabulated1D {
            samples: samples.clone(),
        },
        DatumConfig::Combination { terms } => InitialDatum::Combination(
            terms
                .iter()
                .map(|(c, t)| Ok((*c, build_datum(t)?)))
                .collect::<Result<Vec<_>>>()?,
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_measure_config() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"measure": {"atoms": [{"beta": 0.5, "weight": 1.0}]}, "seed": 1}"#,
        )
        .unwrap();
        let m = cfg.measure().unwrap();
        assert_eq!(m.atoms().len(), 1);
        assert_eq!(cfg.require_seed(None).unwrap(), 1);
        assert_eq!(cfg.require_seed(Some(9)).unwrap(), 9);
    }

    #[test]
    fn density_shorthand_and_samples() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"measure": {"density": {"beta0": 0.25, "beta1": 0.75, "constant": 2.0}}}"#,
        )
        .unwrap();
        assert!(cfg.measure().unwrap().density().is_some());

        let cfg: RunConfig = serde_json::from_str(
            r#"{"measure": {"density": {"samples": [[0.3, 1.0], [0.6, 2.0]]}}}"#,
        )
        .unwrap();
        assert!(cfg.measure().unwrap().density().is_some());
    }

    #[test]
    fn datum_variants_parse() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{
                "domain": [3.141592653589793],
                "datum": {"kind": "combination", "terms": [
                    [1.0, {"kind": "eigenmode", "index": [1]}],
                    [0.5, {"kind": "indicator", "lower": [1.0], "upper": [2.0]}]
                ]}
            }"#,
        )
        .unwrap();
        let dom = cfg.domain().unwrap();
        let f = cfg.datum().unwrap();
        assert!(f.eval(&dom, &[1.5]).is_finite());
    }

    #[test]
    fn unknown_fields_rejected() {
        let r: std::result::Result<RunConfig, _> =
            serde_json::from_str(r#"{"measur": {"atoms": []}}"#);
        assert!(r.is_err());
    }

    #[test]
    fn subordinator_fallbacks() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"subordinator": [{"beta": 0.5, "scale": 1.0}]}"#,
        )
        .unwrap();
        assert_eq!(cfg.subordinator().unwrap().components().len(), 1);

        let cfg: RunConfig = serde_json::from_str(
            r#"{"measure": {"atoms": [{"beta": 0.5, "weight": 1.0}]}}"#,
        )
        .unwrap();
        assert_eq!(cfg.subordinator().unwrap().components().len(), 1);

        let cfg: RunConfig = serde_json::from_str("{}").unwrap();
        assert!(cfg.subordinator().is_err());
    }

    #[test]
    fn invalid_measure_values_fail() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"measure": {"atoms": [{"beta": 1.5, "weight": 1.0}]}}"#,
        )
        .unwrap();
        assert!(cfg.measure().is_err());
    }
}
