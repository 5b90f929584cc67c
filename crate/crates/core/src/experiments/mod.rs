//! Desk-scale reproductions of the numerical studies: training success rates
//! against trainability, analytic vs sampled active-neuron laws, a comparison of
//! bias initializations, the sine-sum demo and tables of closed-form values.
//!
//! Every run is a pure function of its [`ExperimentConfig`]; [`write_outputs`]
//! stores the tables next to a manifest that replays the run.

mod dist_check;
mod init_compare;
mod success_rate;
mod table;
mod targets;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netcore::{InitScheme, OptimizerConfig, OptimizerMethod};
use crate::output::{write_json, Format, Table};

pub use dist_check::run_dist_check;
pub use init_compare::{compare_methods, run_init_compare, run_sine_demo, InitMethod, MethodSummary};
pub use success_rate::{run_success_rate, SuccessRow};
pub use table::run_trainability_table;
pub use targets::TargetId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    SuccessRate,
    DistCheck,
    InitCompare,
    SineDemo,
    TrainabilityTable,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 5] = [
        ExperimentId::SuccessRate,
        ExperimentId::DistCheck,
        ExperimentId::InitCompare,
        ExperimentId::SineDemo,
        ExperimentId::TrainabilityTable,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ExperimentId::SuccessRate => "success-rate",
            ExperimentId::DistCheck => "dist-check",
            ExperimentId::InitCompare => "init-compare",
            ExperimentId::SineDemo => "sine-demo",
            ExperimentId::TrainabilityTable => "trainability-table",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.id() == s)
            .ok_or_else(|| Error::config(format!("unknown experiment '{s}'")))
    }

    pub fn describe(self) -> &'static str {
        match self {
            ExperimentId::SuccessRate => "training success rate of shallow He-with-bias nets vs trainability (f1, f2)",
            ExperimentId::DistCheck => "analytic vs sampled active-neuron distributions of the first two layers",
            ExperimentId::InitCompare => "He without bias, He with bias and data-dependent init on f3/f4",
            ExperimentId::SineDemo => "the three initializations on sin(4πx) + sin(6πx), width 500",
            ExperimentId::TrainabilityTable => "closed-form trainability values with optional sampled cross-checks",
        }
    }
}

/// Optimizer fields that may be overridden in a config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerOverrides {
    pub method: Option<OptimizerMethod>,
    pub learning_rate: Option<f64>,
    pub momentum: Option<f64>,
    pub batch_size: Option<usize>,
    pub max_epochs: Option<usize>,
    pub history_every: Option<usize>,
}

impl OptimizerOverrides {
    pub fn apply(&self, base: &OptimizerConfig) -> OptimizerConfig {
        let mut o = base.clone();
        if let Some(v) = self.method {
            o.method = v;
        }
        if let Some(v) = self.learning_rate {
            o.learning_rate = v;
        }
        if let Some(v) = self.momentum {
            o.momentum = v;
        }
        if let Some(v) = self.batch_size {
            o.batch_size = v;
        }
        if let Some(v) = self.max_epochs {
            o.max_epochs = v;
        }
        if let Some(v) = self.history_every {
            o.history_every = v;
        }
        o
    }
}

/// Full description of one run. Unset fields take the per-experiment defaults of
/// [`ExperimentConfig::preset`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    #[serde(default)]
    pub target: Option<TargetId>,
    #[serde(default)]
    pub widths: Vec<usize>,
    #[serde(default = "one")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    /// Monte Carlo sample count (dist-check, trainability cross-checks).
    #[serde(default)]
    pub samples: u64,
    #[serde(default)]
    pub train_points: Option<usize>,
    #[serde(default)]
    pub test_points: Option<usize>,
    /// Input radius used by the analytic formulas and the dead-neuron counts.
    #[serde(default)]
    pub radius: Option<f64>,
    /// Full architecture for dist-check, e.g. `[1, 6, 4, 2]`.
    #[serde(default)]
    pub architecture: Option<Vec<usize>>,
    /// One scheme per layer for dist-check.
    #[serde(default)]
    pub schemes: Option<Vec<InitScheme>>,
    #[serde(default)]
    pub optimizer: OptimizerOverrides,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn one() -> usize {
    1
}

impl ExperimentConfig {
    /// Desk-scale defaults for `id`.
    pub fn preset(id: ExperimentId) -> Self {
        let base = Self {
            experiment: id,
            target: None,
            widths: vec![],
            replicates: 1,
            seed: 0,
            samples: 0,
            train_points: None,
            test_points: None,
            radius: None,
            architecture: None,
            schemes: None,
            optimizer: OptimizerOverrides::default(),
            output: None,
        };
        match id {
            ExperimentId::SuccessRate => Self {
                target: Some(TargetId::F1),
                widths: vec![2, 4, 8, 16],
                replicates: 200,
                train_points: Some(200),
                test_points: Some(1000),
                radius: Some(3f64.sqrt()),
                ..base
            },
            ExperimentId::DistCheck => Self {
                samples: 100_000,
                radius: Some(1.0),
                architecture: Some(vec![1, 6, 4, 2]),
                schemes: Some(vec![InitScheme::UnitSphereWithBias; 3]),
                ..base
            },
            ExperimentId::InitCompare => Self {
                target: Some(TargetId::F3),
                widths: vec![100],
                replicates: 10,
                train_points: Some(25),
                ..base
            },
            ExperimentId::SineDemo => Self {
                target: Some(TargetId::SineSum),
                widths: vec![500],
                replicates: 1,
                train_points: Some(100),
                ..base
            },
            ExperimentId::TrainabilityTable => Self {
                widths: vec![2, 4, 8, 16, 32, 64],
                radius: Some(1.0),
                ..base
            },
        }
    }

    /// Parses a config file, or the `config` entry of a manifest.
    pub fn from_json(text: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::config(format!("invalid JSON: {e}")))?;
        let v = match v.get("config") {
            Some(c) if v.get("manifest_version").is_some() => c.clone(),
            _ => v,
        };
        let cfg: Self = serde_json::from_value(v).map_err(|e| Error::config(format!("invalid config: {e}")))?;
        Ok(cfg.with_defaults())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Fills unset fields from the preset of the same experiment.
    pub fn with_defaults(mut self) -> Self {
        let p = Self::preset(self.experiment);
        if self.target.is_none() {
            self.target = p.target;
        }
        if self.widths.is_empty() {
            self.widths = p.widths;
        }
        if self.samples == 0 {
            self.samples = p.samples;
        }
        self.train_points = self.train_points.or(p.train_points);
        self.test_points = self.test_points.or(p.test_points);
        self.radius = self.radius.or(p.radius);
        self.architecture = self.architecture.or(p.architecture);
        self.schemes = self.schemes.or(p.schemes);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::config("replicates must be at least 1"));
        }
        if self.widths.contains(&0) {
            return Err(Error::config("widths must be positive"));
        }
        if let Some(r) = self.radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::config(format!("radius must be positive, got {r}")));
            }
        }
        let allowed: &[TargetId] = match self.experiment {
            ExperimentId::SuccessRate => &[TargetId::F1, TargetId::F2],
            ExperimentId::InitCompare => &[TargetId::F3, TargetId::F4, TargetId::SineSum],
            ExperimentId::SineDemo => &[TargetId::SineSum],
            _ => &[],
        };
        if !allowed.is_empty() {
            let t = self.target.ok_or_else(|| Error::config("a target is required"))?;
            if !allowed.contains(&t) {
                return Err(Error::config(format!("target '{}' is not valid for {}", t.id(), self.experiment.id())));
            }
            if self.widths.is_empty() {
                return Err(Error::config("at least one width is required"));
            }
        }
        Ok(())
    }
}

/// Named tables produced by one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub tables: Vec<(String, Table)>,
}

impl ExperimentOutput {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let cfg = cfg.clone().with_defaults();
    cfg.validate()?;
    match cfg.experiment {
        ExperimentId::SuccessRate => Ok(ExperimentOutput {
            tables: vec![("success_rate".into(), success_rate::to_table(&run_success_rate(&cfg)?))],
        }),
        ExperimentId::DistCheck => Ok(ExperimentOutput {
            tables: vec![("dist_check".into(), run_dist_check(&cfg)?)],
        }),
        ExperimentId::InitCompare => run_init_compare(&cfg),
        ExperimentId::SineDemo => run_sine_demo(&cfg),
        ExperimentId::TrainabilityTable => Ok(ExperimentOutput {
            tables: vec![("trainability".into(), run_trainability_table(&cfg)?)],
        }),
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    manifest_version: u32,
    library: &'static str,
    version: &'static str,
    seed: u64,
    format: Format,
    outputs: Vec<String>,
    config: &'a ExperimentConfig,
}

/// Writes each table as `<dir>/<name>.<ext>` plus `<dir>/manifest.json`, and
/// returns the paths written.
pub fn write_outputs(dir: &Path, cfg: &ExperimentConfig, out: &ExperimentOutput, format: Format) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for (name, table) in &out.tables {
        let p = dir.join(format!("{name}.{}", format.extension()));
        std::fs::write(&p, format.render(table))?;
        paths.push(p);
    }
    let manifest = Manifest {
        manifest_version: 1,
        library: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        format,
        outputs: paths
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect(),
        config: cfg,
    };
    let mp = dir.join("manifest.json");
    write_json(&mp, &manifest)?;
    paths.push(mp);
    Ok(paths)
}

/// Mean and sample standard deviation.
pub(crate) fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

pub(crate) fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for id in ExperimentId::ALL {
            ExperimentConfig::preset(id).validate().unwrap();
            assert_eq!(ExperimentId::parse(id.id()).unwrap(), id);
        }
        assert!(ExperimentId::parse("nope").is_err());
    }

    #[test]
    fn zero_replicates_is_a_config_error() {
        let mut c = ExperimentConfig::preset(ExperimentId::SuccessRate);
        c.replicates = 0;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn config_json_uses_snake_case_and_defaults() {
        let c = ExperimentConfig::from_json(r#"{"experiment": "success-rate", "target": "f2", "replicates": 3, "train_points": 50}"#).unwrap();
        assert_eq!(c.target, Some(TargetId::F2));
        assert_eq!(c.widths, vec![2, 4, 8, 16]);
        assert_eq!(c.train_points, Some(50));
        assert!(ExperimentConfig::from_json(r#"{"experiment": "success-rate", "bogus": 1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment": "init-compare", "target": "f1"}"#).unwrap().validate().is_err());
    }

    #[test]
    fn overrides_apply() {
        let o = OptimizerOverrides {
            learning_rate: Some(0.5),
            max_epochs: Some(3),
            ..Default::default()
        };
        let c = o.apply(&OptimizerConfig::sgd(1e-3, 128, 10, 0));
        assert_eq!((c.learning_rate, c.max_epochs, c.batch_size), (0.5, 3, 128));
    }

    #[test]
    fn stats_helpers() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
    }
}
