//! Pipeline configuration, read from TOML. Unknown keys are errors.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moo::Formulation;
use crate::sampling::QmcMode;
use crate::space::Variable;
use crate::surrogate::KernelKind;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxChoice {
    #[default]
    Nominal,
    Extended,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    #[default]
    TopK,
    Threshold,
    /// Keep the uncertain flags the problem (or the override) declares.
    Problem,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DoeConfig {
    pub size: usize,
    pub train: usize,
    #[serde(rename = "box")]
    pub domain: BoxChoice,
    /// Maximin exchange budget; default `10 * size * d`.
    pub exchanges: Option<usize>,
}

impl Default for DoeConfig {
    fn default() -> Self {
        DoeConfig {
            size: 234,
            train: 175,
            domain: BoxChoice::Nominal,
            exchanges: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurrogateConfig {
    /// Kernel per objective; objective `j` uses entry `min(j, len - 1)`.
    pub kernels: Vec<KernelKind>,
    pub restarts: usize,
    pub nugget: f64,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        SurrogateConfig {
            kernels: vec![KernelKind::Matern52, KernelKind::AbsExponential],
            restarts: 8,
            nugget: 1e-8,
        }
    }
}

impl SurrogateConfig {
    pub fn kernel_for(&self, j: usize) -> KernelKind {
        self.kernels[j.min(self.kernels.len() - 1)]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensitivityConfig {
    pub n_base: usize,
    pub selection: SelectionRule,
    /// Clamped to the problem dimension.
    pub top_k: usize,
    pub threshold: f64,
}

impl Default for SensitivityConfig {
    fn default() -> Self {
        SensitivityConfig {
            n_base: 4096,
            selection: SelectionRule::TopK,
            top_k: 5,
            threshold: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizeConfig {
    pub formulations: Vec<Formulation>,
    pub population: usize,
    pub generations: usize,
    pub outer_box: BoxChoice,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            formulations: Formulation::ALL.to_vec(),
            population: 150,
            generations: 300,
            outer_box: BoxChoice::Nominal,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RobustSection {
    pub n_expectation: usize,
    pub n_posterior: usize,
    pub inner_particles: usize,
    pub inner_iterations: usize,
    pub qmc: QmcMode,
    /// Run the PSO worst case during posterior analysis.
    pub posterior_worst_case: bool,
}

impl Default for RobustSection {
    fn default() -> Self {
        RobustSection {
            n_expectation: 128,
            n_posterior: 512,
            inner_particles: 40,
            inner_iterations: 60,
            qmc: QmcMode::MaximinLhs,
            posterior_worst_case: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZonesConfig {
    /// Objective whose natural value defines the zones.
    pub objective: usize,
    /// Empty means a single zone pairing the best design of each front.
    pub targets: Vec<f64>,
    pub tol: f64,
    /// Zone labels; default A, B, C, ...
    pub names: Vec<String>,
}

impl Default for ZonesConfig {
    fn default() -> Self {
        ZonesConfig {
            objective: 0,
            targets: Vec::new(),
            tol: 0.1,
            names: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub problem: String,
    /// Dimension of problems that have a free one.
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Replaces the problem's design space (same dimension).
    #[serde(default)]
    pub variables: Option<Vec<Variable>>,
    #[serde(default)]
    pub doe: DoeConfig,
    #[serde(default)]
    pub surrogate: SurrogateConfig,
    #[serde(default)]
    pub sensitivity: SensitivityConfig,
    #[serde(default)]
    pub optimize: OptimizeConfig,
    #[serde(default)]
    pub robust: RobustSection,
    #[serde(default)]
    pub zones: ZonesConfig,
}

impl PipelineConfig {
    /// Defaults for everything but the problem.
    pub fn for_problem(problem: &str) -> Self {
        PipelineConfig {
            problem: problem.to_string(),
            dim: None,
            seed: 0,
            out: None,
            variables: None,
            doe: DoeConfig::default(),
            surrogate: SurrogateConfig::default(),
            sensitivity: SensitivityConfig::default(),
            optimize: OptimizeConfig::default(),
            robust: RobustSection::default(),
            zones: ZonesConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        PipelineConfig::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let mut need = |ok: bool, msg: &str| {
            if !ok {
                problems.push(msg.to_string());
            }
        };
        need(self.doe.size >= 3, "doe.size must be >= 3");
        need(self.doe.train >= 2, "doe.train must be >= 2");
        need(self.doe.train < self.doe.size, "doe.train must be smaller than doe.size");
        need(!self.surrogate.kernels.is_empty(), "surrogate.kernels must not be empty");
        need(self.surrogate.restarts >= 1, "surrogate.restarts must be >= 1");
        need(self.surrogate.nugget > 0.0 && self.surrogate.nugget < 1e-4, "surrogate.nugget must lie in (0, 1e-4)");
        need(self.sensitivity.n_base >= 64, "sensitivity.n_base must be >= 64");
        need(self.sensitivity.threshold.is_finite(), "sensitivity.threshold must be finite");
        need(!self.optimize.formulations.is_empty(), "optimize.formulations must not be empty");
        let mut seen = self.optimize.formulations.clone();
        seen.sort_by_key(|f| f.name());
        seen.dedup();
        need(seen.len() == self.optimize.formulations.len(), "optimize.formulations has duplicates");
        need(
            self.optimize.population >= 4 && self.optimize.population % 2 == 0,
            "optimize.population must be even and >= 4",
        );
        need(self.optimize.generations >= 1, "optimize.generations must be >= 1");
        need(self.robust.n_expectation >= 1, "robust.n_expectation must be >= 1");
        need(self.robust.n_posterior >= 2, "robust.n_posterior must be >= 2");
        need(self.robust.inner_particles >= 2, "robust.inner_particles must be >= 2");
        need(self.zones.tol >= 0.0, "zones.tol must be >= 0");
        need(self.zones.targets.iter().all(|t| t.is_finite()), "zones.targets must be finite");
        need(
            self.zones.names.is_empty() || self.zones.names.len() == self.zones.targets.len(),
            "zones.names must match zones.targets in length",
        );
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    pub fn zone_names(&self) -> Vec<String> {
        if !self.zones.names.is_empty() {
            return self.zones.names.clone();
        }
        (0..self.zones.targets.len())
            .map(|i| {
                let letter = (b'A' + (i % 26) as u8) as char;
                if i < 26 {
                    letter.to_string()
                } else {
                    format!("{letter}{}", i / 26)
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = PipelineConfig::from_toml("problem = \"robust_1d\"\n").unwrap();
        assert_eq!(c, PipelineConfig::for_problem("robust_1d"));
        assert_eq!(c.doe.size, 234);
        assert_eq!(c.doe.train, 175);
        assert_eq!(c.sensitivity.top_k, 5);
        assert_eq!(c.optimize.population, 150);
        assert_eq!(c.surrogate.kernel_for(0), KernelKind::Matern52);
        assert_eq!(c.surrogate.kernel_for(5), KernelKind::AbsExponential);
    }

    #[test]
    fn full_config_parses() {
        let text = r#"
            problem = "motor_synthetic"
            seed = 7
            out = "runs/motor"

            [doe]
            size = 120
            train = 90
            box = "extended"

            [surrogate]
            kernels = ["abs_exponential"]

            [sensitivity]
            n_base = 1024
            selection = "threshold"
            threshold = 0.05

            [optimize]
            formulations = ["deterministic", "worst_case"]
            population = 40
            generations = 10
            outer_box = "extended"

            [robust]
            n_expectation = 64
            qmc = "sobol"

            [zones]
            targets = [430.0, 435.0]
            tol = 0.1
        "#;
        let c = PipelineConfig::from_toml(text).unwrap();
        assert_eq!(c.doe.domain, BoxChoice::Extended);
        assert_eq!(c.optimize.formulations, vec![Formulation::Deterministic, Formulation::WorstCase]);
        assert_eq!(c.robust.qmc, QmcMode::Sobol);
        assert_eq!(c.zone_names(), vec!["A", "B"]);
        let again = PipelineConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for text in [
            "problem = \"zdt1\"\npopulaton = 3\n",
            "problem = \"zdt1\"\n[optimize]\npopulaton = 100\n",
            "problem = \"zdt1\"\n[doe]\nsize = 10\nbogus = 1\n",
        ] {
            assert!(matches!(PipelineConfig::from_toml(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn invalid_counts_are_rejected() {
        for text in [
            "problem = \"zdt1\"\n[doe]\nsize = 10\ntrain = 10\n",
            "problem = \"zdt1\"\n[optimize]\nformulations = []\n",
            "problem = \"zdt1\"\n[optimize]\npopulation = 7\n",
            "problem = \"zdt1\"\n[sensitivity]\nn_base = 10\n",
            "problem = \"zdt1\"\n[optimize]\nformulations = [\"robust\"]\n",
        ] {
            assert!(matches!(PipelineConfig::from_toml(text), Err(Error::Config(_))), "{text}");
        }
    }
}
