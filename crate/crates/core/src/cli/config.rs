//! Run configuration: a flat TOML file with one section per algorithm,
//! reloadable from a previously written JSON manifest for bit-exact
//! reproduction.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::hjb::HjbParams;
use crate::simulate::{PolicySpec, SimConfig};
use crate::truncexp::TemperatureRange;

/// The bundled paper preset; also reachable as `--config paper-preset`.
pub const PAPER_PRESET_TOML: &str = include_str!("../../presets/paper.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub experiment: ExperimentCfg,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<ConstantCfg>,
    #[serde(rename = "power-law", default, skip_serializing_if = "Option::is_none")]
    pub power_law: Option<PowerLawCfg>,
    #[serde(
        rename = "replica-exchange",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub replica_exchange: Option<ReplicaExchangeCfg>,
    #[serde(
        rename = "state-dependent",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub state_dependent: Option<StateDependentCfg>,
    #[serde(rename = "bang-bang", default, skip_serializing_if = "Option::is_none")]
    pub bang_bang: Option<BangBangCfg>,
    #[serde(
        rename = "sampled-relaxed",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub sampled_relaxed: Option<SampledRelaxedCfg>,
    #[serde(default)]
    pub hjb: HjbCfg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentCfg {
    pub objective: String,
    pub x0: f64,
    pub n_steps: usize,
    pub n_reps: usize,
    pub seed: u64,
    #[serde(default)]
    pub common_noise: bool,
    pub temp_lo: f64,
    pub temp_hi: f64,
    #[serde(default)]
    pub algorithms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantCfg {
    pub eta: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerLawCfg {
    pub eta: f64,
    pub d: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplicaExchangeCfg {
    pub eta: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDependentCfg {
    pub eta: f64,
    pub lambda: f64,
    pub rho: f64,
    /// Explicit `(v(0), v'(0))` for the HJB solve; when absent the shooting
    /// search over `n_inits` random pairs runs instead.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BangBangCfg {
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledRelaxedCfg {
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HjbCfg {
    pub domain: [f64; 2],
    pub step: f64,
    pub n_inits: u32,
    pub init_seed: u64,
    pub blowup_threshold: f64,
    pub pilot_reps: usize,
    pub pilot_steps: usize,
}

impl Default for HjbCfg {
    fn default() -> Self {
        Self {
            domain: [-8.0, 4.0],
            step: 1e-3,
            n_inits: 20,
            init_seed: 7,
            blowup_threshold: 1e8,
            pilot_reps: 50,
            pilot_steps: 200,
        }
    }
}

/// FNV-1a over the label, mixed through SplitMix64. Stable across platforms,
/// so per-algorithm noise streams are reproducible from the base seed alone.
pub fn derive_seed(base: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in label.bytes() {
        h ^= u64::from(byte);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = base ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Config {
    /// Loads from a TOML config, a JSON run manifest (re-using its embedded
    /// config), or the literal name `paper-preset`.
    pub fn load(source: &str) -> Result<Config, CliError> {
        if source == "paper-preset" {
            return toml::from_str(PAPER_PRESET_TOML)
                .map_err(|e| CliError::Config(format!("bundled preset is invalid: {e}")));
        }
        let path = Path::new(source);
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read `{source}`: {e}")))?;
        if path.extension().is_some_and(|e| e == "json") {
            if let Ok(manifest) = serde_json::from_str::<super::RunManifest>(&text) {
                return Ok(manifest.config);
            }
            return serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("invalid JSON config `{source}`: {e}")));
        }
        toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid TOML config `{source}`: {e}")))
    }

    pub fn paper_preset() -> Config {
        toml::from_str(PAPER_PRESET_TOML).expect("bundled preset parses")
    }

    pub fn temperature_range(&self) -> Result<TemperatureRange, CliError> {
        TemperatureRange::new(self.experiment.temp_lo, self.experiment.temp_hi)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    /// Cross-field validation beyond what deserialization enforces.
    pub fn validate(&self) -> Result<(), CliError> {
        let range = self.temperature_range()?;
        let e = &self.experiment;
        if !e.x0.is_finite() {
            return Err(CliError::Config(format!("x0 must be finite, got {}", e.x0)));
        }
        if e.n_steps < 1 || e.n_reps < 1 {
            return Err(CliError::Config(
                "n_steps and n_reps must be at least 1".to_string(),
            ));
        }
        for name in &e.algorithms {
            self.policy_spec(name)?;
        }
        if let Some(c) = &self.constant {
            if !range.contains(c.beta) {
                return Err(CliError::Config(format!(
                    "constant temperature {} outside the range [{}, {}]",
                    c.beta,
                    range.lo(),
                    range.hi()
                )));
            }
        }
        if let Some(p) = &self.power_law {
            if !(p.d > 0.0 && (0.5..=1.0).contains(&p.b)) {
                return Err(CliError::Config(format!(
                    "power-law needs d > 0 and b in [0.5, 1], got d = {}, b = {}",
                    p.d, p.b
                )));
            }
        }
        Ok(())
    }

    fn eta_of(&self, name: &str) -> Option<f64> {
        match name {
            "constant" => self.constant.as_ref().map(|c| c.eta),
            "power-law" => self.power_law.as_ref().map(|c| c.eta),
            "replica-exchange" => self.replica_exchange.as_ref().map(|c| c.eta),
            "state-dependent" => self.state_dependent.as_ref().map(|c| c.eta),
            "bang-bang" => self.bang_bang.as_ref().map(|c| c.eta),
            "sampled-relaxed" => self.sampled_relaxed.as_ref().map(|c| c.eta),
            _ => None,
        }
    }

    pub fn policy_spec(&self, name: &str) -> Result<PolicySpec, CliError> {
        let missing =
            |name: &str| CliError::Config(format!("config has no `[{name}]` section"));
        match name {
            "constant" => {
                let c = self.constant.as_ref().ok_or_else(|| missing(name))?;
                Ok(PolicySpec::Constant { beta: c.beta })
            }
            "power-law" => {
                let c = self.power_law.as_ref().ok_or_else(|| missing(name))?;
                Ok(PolicySpec::PowerLaw { d: c.d, b: c.b })
            }
            "replica-exchange" => {
                self.replica_exchange.as_ref().ok_or_else(|| missing(name))?;
                Ok(PolicySpec::ReplicaExchange)
            }
            "state-dependent" => {
                self.state_dependent.as_ref().ok_or_else(|| missing(name))?;
                Ok(PolicySpec::StateDependent)
            }
            "bang-bang" => {
                self.bang_bang.as_ref().ok_or_else(|| missing(name))?;
                Ok(PolicySpec::BangBang)
            }
            "sampled-relaxed" => {
                self.sampled_relaxed.as_ref().ok_or_else(|| missing(name))?;
                Ok(PolicySpec::SampledRelaxed)
            }
            other => Err(CliError::Config(format!("unknown algorithm `{other}`"))),
        }
    }

    /// The per-algorithm seed: the shared base seed under common noise,
    /// otherwise a stream derived from the base seed and the algorithm name.
    pub fn algo_seed(&self, name: &str) -> u64 {
        if self.experiment.common_noise {
            self.experiment.seed
        } else {
            derive_seed(self.experiment.seed, name)
        }
    }

    pub fn sim_config(&self, name: &str) -> Result<SimConfig, CliError> {
        let policy = self.policy_spec(name)?;
        let eta = self
            .eta_of(name)
            .ok_or_else(|| CliError::Config(format!("config has no `[{name}]` section")))?;
        Ok(SimConfig {
            eta,
            n_steps: self.experiment.n_steps,
            n_reps: self.experiment.n_reps,
            x0: self.experiment.x0,
            seed: self.algo_seed(name),
            objective: self.experiment.objective.clone(),
            policy,
            replica_gamma: self.replica_exchange.as_ref().map(|c| c.gamma),
        })
    }

    fn state_dependent_cfg(&self) -> Result<&StateDependentCfg, CliError> {
        self.state_dependent.as_ref().ok_or_else(|| {
            CliError::Config(
                "the HJB solve needs a `[state-dependent]` section (lambda, rho)".to_string(),
            )
        })
    }

    pub fn hjb_params(&self) -> Result<HjbParams, CliError> {
        let sd = self.state_dependent_cfg()?;
        let range = self.temperature_range()?;
        Ok(HjbParams {
            rho: sd.rho,
            lambda: sd.lambda,
            range,
            x_min: self.hjb.domain[0],
            x_max: self.hjb.domain[1],
            step: self.hjb.step,
            n_inits: self.hjb.n_inits,
            init_seed: self.hjb.init_seed,
            blowup_threshold: self.hjb.blowup_threshold,
        })
    }

    pub fn hjb_init_override(&self) -> Option<(f64, f64)> {
        self.state_dependent
            .as_ref()
            .and_then(|sd| sd.init)
            .map(|p| (p[0], p[1]))
    }

    /// The small state-dependent run used to score surviving shooting
    /// candidates against each other.
    pub fn pilot_sim_config(&self) -> Result<SimConfig, CliError> {
        let sd = self.state_dependent_cfg()?;
        Ok(SimConfig {
            eta: sd.eta,
            n_steps: self.hjb.pilot_steps,
            n_reps: self.hjb.pilot_reps,
            x0: self.experiment.x0,
            seed: derive_seed(self.experiment.seed, "hjb-pilot"),
            objective: self.experiment.objective.clone(),
            policy: PolicySpec::StateDependent,
            replica_gamma: None,
        })
    }

    pub fn needs_hjb(&self, algorithms: &[String]) -> bool {
        algorithms.iter().any(|name| {
            matches!(
                name.as_str(),
                "state-dependent" | "bang-bang" | "sampled-relaxed"
            )
        })
    }

    pub fn algo_seeds(&self, algorithms: &[String]) -> BTreeMap<String, u64> {
        algorithms
            .iter()
            .map(|name| (name.clone(), self.algo_seed(name)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_parses_and_validates() {
        let cfg = Config::paper_preset();
        cfg.validate().unwrap();
        assert_eq!(cfg.experiment.objective, "double-well");
        assert_eq!(cfg.experiment.algorithms.len(), 4);
        assert_eq!(cfg.constant.as_ref().unwrap().beta, 0.48828125);
        assert_eq!(cfg.state_dependent.as_ref().unwrap().lambda, 0.3125);
        assert_eq!(cfg.hjb_init_override(), Some((-0.2853, 1.1575)));
        let params = cfg.hjb_params().unwrap();
        params.validate().unwrap();
    }

    #[test]
    fn toml_round_trip_is_identity() {
        let cfg = Config::paper_preset();
        let text = toml::to_string(&cfg).unwrap();
        let back: Config = toml::from_str(&text).unwrap();
        assert_eq!(cfg, back);
        // and through JSON (the manifest path)
        let json = serde_json::to_string(&cfg).unwrap();
        let back: Config = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn seeds_are_stable_and_distinct_by_algorithm() {
        let cfg = Config::paper_preset();
        let a = cfg.algo_seed("constant");
        let b = cfg.algo_seed("power-law");
        assert_ne!(a, b);
        assert_eq!(a, cfg.algo_seed("constant"));
        let mut crn = cfg.clone();
        crn.experiment.common_noise = true;
        assert_eq!(crn.algo_seed("constant"), crn.algo_seed("power-law"));
    }

    #[test]
    fn validation_rejects_out_of_range_constant() {
        let mut cfg = Config::paper_preset();
        cfg.constant.as_mut().unwrap().beta = 1000.0;
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn validation_rejects_bad_power_law_exponent() {
        let mut cfg = Config::paper_preset();
        cfg.power_law.as_mut().unwrap().b = 0.2;
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn unknown_algorithm_is_a_config_error() {
        let mut cfg = Config::paper_preset();
        cfg.experiment.algorithms.push("annealing".to_string());
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }
}
