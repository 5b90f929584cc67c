use rayon::prelude::*;
use serde::Serialize;

use super::ExperimentConfig;
use crate::error::{Error, Result};
use crate::netcore::{init_network, rmse, train, Architecture, InitScheme, OptimizerConfig};
use crate::output::Table;
use crate::rng::derive_seed;
use crate::trainability::shallow_trainability;

/// Test RMSE below which a run counts as a success.
pub const SUCCESS_THRESHOLD: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuccessRow {
    pub width: usize,
    pub replicates: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// `√(p(1 − p)/R)`.
    pub stderr: f64,
    /// Probability that at least `m` first-layer neurons are alive at initialization.
    pub trainability: f64,
    pub m: usize,
}

const TAG_TRAIN: u64 = 1;
const TAG_TEST: u64 = 2;
const TAG_INIT: u64 = 3;
const TAG_SGD: u64 = 4;

pub(super) fn default_optimizer() -> OptimizerConfig {
    let mut o = OptimizerConfig::sgd(1e-3, 128, 20_000, 0);
    o.history_every = 0;
    o
}

/// Trains `replicates` He-with-bias shallow networks per width on a fixed
/// training set and counts those whose test RMSE falls below 1e-2.
pub fn run_success_rate(cfg: &ExperimentConfig) -> Result<Vec<SuccessRow>> {
    let target = cfg.target.ok_or_else(|| Error::config("a target is required"))?;
    let m = target
        .minimal_width()
        .ok_or_else(|| Error::config(format!("success-rate needs f1 or f2, got '{}'", target.id())))?;
    if cfg.replicates == 0 {
        return Err(Error::config("replicates must be at least 1"));
    }
    let r = cfg.radius.unwrap_or(target.domain_radius());
    let train_set = target.uniform_data(cfg.train_points.unwrap_or(200), derive_seed(cfg.seed, TAG_TRAIN))?;
    let test_set = target.uniform_data(cfg.test_points.unwrap_or(1000), derive_seed(cfg.seed, TAG_TEST))?;
    let base = cfg.optimizer.apply(&default_optimizer());
    base.validate()?;

    let mut rows = Vec::with_capacity(cfg.widths.len());
    for &n in &cfg.widths {
        let arch = Architecture::shallow(1, n, 1)?;
        let wseed = derive_seed(cfg.seed, n as u64);
        let outcomes: Vec<Result<bool>> = (0..cfg.replicates)
            .into_par_iter()
            .map(|k| {
                let rseed = derive_seed(wseed, k as u64);
                let net = init_network(&arch, &[InitScheme::HeWithBias; 2], derive_seed(rseed, TAG_INIT))?;
                let opt = OptimizerConfig {
                    seed: derive_seed(rseed, TAG_SGD),
                    ..base.clone()
                };
                let out = train(&net, &train_set, &opt)?;
                Ok(rmse(&out.params, &test_set.inputs, &test_set.targets)? < SUCCESS_THRESHOLD)
            })
            .collect();
        let mut successes = 0;
        for o in outcomes {
            successes += o? as usize;
        }
        let reps = cfg.replicates as f64;
        let p = successes as f64 / reps;
        let trainability = if m > n {
            0.0
        } else {
            shallow_trainability(n, m, 1, r, &InitScheme::HeWithBias)?.value
        };
        rows.push(SuccessRow {
            width: n,
            replicates: cfg.replicates,
            successes,
            success_rate: p,
            stderr: (p * (1.0 - p) / reps).sqrt(),
            trainability,
            m,
        });
    }
    Ok(rows)
}

pub(super) fn to_table(rows: &[SuccessRow]) -> Table {
    let mut t = Table::new(&["width", "replicates", "successes", "success_rate", "stderr", "trainability", "m"]);
    for r in rows {
        t.push(vec![
            r.width.into(),
            r.replicates.into(),
            r.successes.into(),
            r.success_rate.into(),
            r.stderr.into(),
            r.trainability.into(),
            r.m.into(),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{ExperimentId, TargetId};

    fn small(target: TargetId) -> ExperimentConfig {
        let mut c = ExperimentConfig::preset(ExperimentId::SuccessRate);
        c.target = Some(target);
        c.widths = vec![1, 3];
        c.replicates = 3;
        c.train_points = Some(40);
        c.test_points = Some(50);
        c.optimizer.max_epochs = Some(20);
        c
    }

    #[test]
    fn rows_are_consistent_and_deterministic() {
        let a = run_success_rate(&small(TargetId::F2)).unwrap();
        assert_eq!(a, run_success_rate(&small(TargetId::F2)).unwrap());
        assert_eq!(a.len(), 2);
        assert_eq!(a[0].trainability, 0.0);
        assert_eq!(a[1].m, 4);
        for r in &a {
            assert!(r.successes <= r.replicates);
        }
    }

    #[test]
    fn trainability_uses_the_data_radius() {
        let rows = run_success_rate(&small(TargetId::F1)).unwrap();
        let want = shallow_trainability(3, 2, 1, 3f64.sqrt(), &InitScheme::HeWithBias).unwrap().value;
        assert_eq!(rows[1].trainability, want);
    }

    #[test]
    fn wrong_target_is_rejected() {
        assert!(run_success_rate(&small(TargetId::F3)).is_err());
    }
}
