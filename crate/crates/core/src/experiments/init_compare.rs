use rayon::prelude::*;
use serde::Serialize;

use super::{mean_std, median, ExperimentConfig, ExperimentOutput, TargetId};
use crate::datadep::{default_params, init_datadep};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::netcore::{
    init_network, status_counts, train, Architecture, HistoryPoint, InitScheme, NetworkParams, OptimizerConfig,
};
use crate::output::Table;
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMethod {
    HeNoBias,
    HeWithBias,
    DataDependent,
}

impl InitMethod {
    pub const ALL: [InitMethod; 3] = [InitMethod::HeNoBias, InitMethod::HeWithBias, InitMethod::DataDependent];

    pub fn tag(self) -> &'static str {
        match self {
            InitMethod::HeNoBias => "he-no-bias",
            InitMethod::HeWithBias => "he-with-bias",
            InitMethod::DataDependent => "data-dependent",
        }
    }

    pub fn init(self, arch: &Architecture, data: &Dataset, seed: u64) -> Result<NetworkParams> {
        match self {
            InitMethod::HeNoBias => init_network(arch, &[InitScheme::HeNoBias; 2], seed),
            InitMethod::HeWithBias => init_network(arch, &[InitScheme::HeWithBias; 2], seed),
            InitMethod::DataDependent => {
                let n = arch.hidden()[0];
                let m = data.len();
                if n < m {
                    return Err(Error::config(format!("data-dependent init needs width ≥ {m} data points, got {n}")));
                }
                let cfg = default_params(&data.inputs, n as f64 / m as f64, data.input_dim())?;
                init_datadep(arch, &data.inputs, &cfg, seed)
            }
        }
    }
}

/// All replicates of one method.
#[derive(Debug, Clone)]
pub struct MethodSummary {
    pub method: InitMethod,
    pub final_rmse: Vec<f64>,
    /// Dead first-layer neurons (tentative or permanent) on the input ball.
    pub dead_initial: Vec<usize>,
    pub dead_final: Vec<usize>,
    pub histories: Vec<Vec<HistoryPoint>>,
    /// Trained network of the first replicate.
    pub first_trained: NetworkParams,
}

impl MethodSummary {
    pub fn median_final_rmse(&self) -> f64 {
        median(&self.final_rmse)
    }
}

type Run = (f64, usize, usize, Vec<HistoryPoint>, NetworkParams);

const TAG_TRAIN: u64 = 1;
const TAG_METHOD: u64 = 100;

fn default_optimizer(target: TargetId, points: usize) -> OptimizerConfig {
    let mut o = match target {
        TargetId::SineSum => OptimizerConfig::adam(1e-3, points, 5_000, 0),
        _ => OptimizerConfig::momentum(5e-3, 0.9, points, 20_000, 0),
    };
    o.history_every = if target == TargetId::SineSum { 50 } else { 100 };
    o
}

fn training_data(cfg: &ExperimentConfig, target: TargetId) -> Result<Dataset> {
    match target {
        TargetId::SineSum => target.grid_data(cfg.train_points.unwrap_or(100)),
        _ => target.uniform_data(cfg.train_points.unwrap_or(25), derive_seed(cfg.seed, TAG_TRAIN)),
    }
}

fn dead_count(net: &NetworkParams, r: f64) -> Result<usize> {
    Ok(status_counts(net, r, 0)?[0].dead())
}

/// Trains every method `replicates` times on the same data.
pub fn compare_methods(cfg: &ExperimentConfig) -> Result<Vec<MethodSummary>> {
    let target = cfg.target.ok_or_else(|| Error::config("a target is required"))?;
    if !matches!(target, TargetId::F3 | TargetId::F4 | TargetId::SineSum) {
        return Err(Error::config(format!("init-compare needs f3, f4 or sine-sum, got '{}'", target.id())));
    }
    if cfg.replicates == 0 {
        return Err(Error::config("replicates must be at least 1"));
    }
    let width = *cfg.widths.first().ok_or_else(|| Error::config("a width is required"))?;
    let data = training_data(cfg, target)?;
    let arch = Architecture::shallow(target.input_dim(), width, 1)?;
    let r = cfg.radius.unwrap_or(target.domain_radius());
    let base = cfg.optimizer.apply(&default_optimizer(target, data.len()));
    base.validate()?;

    let mut out = Vec::new();
    for (mi, method) in InitMethod::ALL.into_iter().enumerate() {
        let mseed = derive_seed(cfg.seed, TAG_METHOD + mi as u64);
        let runs: Vec<Result<Run>> = (0..cfg.replicates)
            .into_par_iter()
            .map(|k| {
                let rseed = derive_seed(mseed, k as u64);
                let net = method.init(&arch, &data, rseed)?;
                let opt = OptimizerConfig {
                    seed: derive_seed(rseed, 1),
                    ..base.clone()
                };
                let res = train(&net, &data, &opt)?;
                Ok((res.final_rmse(), dead_count(&net, r)?, dead_count(&res.params, r)?, res.history, res.params))
            })
            .collect();
        let mut s = MethodSummary {
            method,
            final_rmse: vec![],
            dead_initial: vec![],
            dead_final: vec![],
            histories: vec![],
            first_trained: NetworkParams::zeros(&arch),
        };
        for (k, run) in runs.into_iter().enumerate() {
            let (f, d0, d1, h, p) = run?;
            s.final_rmse.push(f);
            s.dead_initial.push(d0);
            s.dead_final.push(d1);
            s.histories.push(h);
            if k == 0 {
                s.first_trained = p;
            }
        }
        out.push(s);
    }
    Ok(out)
}

fn history_table(sums: &[MethodSummary]) -> Table {
    let mut t = Table::new(&["epoch", "method", "mean_rmse", "std_rmse", "replicates"]);
    for s in sums {
        for (i, h) in s.histories[0].iter().enumerate() {
            let vals: Vec<f64> = s.histories.iter().map(|hist| hist[i].rmse).collect();
            let (mean, sd) = mean_std(&vals);
            t.push(vec![h.epoch.into(), s.method.tag().into(), mean.into(), sd.into(), vals.len().into()]);
        }
    }
    t
}

fn summary_table(sums: &[MethodSummary]) -> Table {
    let mut t = Table::new(&["method", "replicate", "final_rmse", "dead_initial", "dead_final"]);
    for s in sums {
        for k in 0..s.final_rmse.len() {
            t.push(vec![
                s.method.tag().into(),
                k.into(),
                s.final_rmse[k].into(),
                s.dead_initial[k].into(),
                s.dead_final[k].into(),
            ]);
        }
    }
    t
}

/// Tables `history` (per-epoch mean and standard deviation of the training
/// RMSE) and `summary` (final RMSE and dead-neuron counts per replicate).
pub fn run_init_compare(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let sums = compare_methods(cfg)?;
    Ok(ExperimentOutput {
        tables: vec![("history".into(), history_table(&sums)), ("summary".into(), summary_table(&sums))],
    })
}

/// Same as [`run_init_compare`] on the sine sum, plus a `curves` table with the
/// target and the first trained network of each method on a fine grid.
pub fn run_sine_demo(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut cfg = cfg.clone();
    cfg.target = Some(TargetId::SineSum);
    let sums = compare_methods(&cfg)?;
    let mut cols = vec!["x", "target"];
    cols.extend(InitMethod::ALL.iter().map(|m| m.tag()));
    let mut curves = Table::new(&cols);
    let points = 401;
    for i in 0..points {
        let x = -1.0 + 2.0 * i as f64 / (points - 1) as f64;
        let mut row = vec![x.into(), TargetId::SineSum.eval(&[x]).into()];
        for s in &sums {
            row.push(s.first_trained.forward(&[x])?[0].into());
        }
        curves.push(row);
    }
    Ok(ExperimentOutput {
        tables: vec![
            ("history".into(), history_table(&sums)),
            ("summary".into(), summary_table(&sums)),
            ("curves".into(), curves),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::ExperimentId;

    fn small() -> ExperimentConfig {
        let mut c = ExperimentConfig::preset(ExperimentId::InitCompare);
        c.widths = vec![30];
        c.replicates = 2;
        c.optimizer.max_epochs = Some(200);
        c
    }

    #[test]
    fn datadep_starts_without_dead_neurons() {
        let sums = compare_methods(&small()).unwrap();
        let dd = sums.iter().find(|s| s.method == InitMethod::DataDependent).unwrap();
        assert!(dd.dead_initial.iter().all(|&d| d == 0));
        let nb = sums.iter().find(|s| s.method == InitMethod::HeNoBias).unwrap();
        assert!(nb.dead_initial.iter().all(|&d| d == 0));
    }

    #[test]
    fn tables_have_expected_shape() {
        let out = run_init_compare(&small()).unwrap();
        let h = out.table("history").unwrap();
        // epochs 0, 100, 200 for three methods
        assert_eq!(h.len(), 9);
        assert_eq!(out.table("summary").unwrap().len(), 6);
    }

    #[test]
    fn width_below_data_count_is_rejected_for_datadep() {
        let mut c = small();
        c.widths = vec![10];
        assert!(compare_methods(&c).is_err());
    }

    #[test]
    fn sine_demo_curves() {
        let mut c = ExperimentConfig::preset(ExperimentId::SineDemo);
        c.widths = vec![120];
        c.optimizer.max_epochs = Some(20);
        let out = run_sine_demo(&c).unwrap();
        let curves = out.table("curves").unwrap();
        assert_eq!(curves.len(), 401);
        assert_eq!(curves.columns.len(), 5);
    }
}
