use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::grad::Workspace;
use super::{rmse, NetworkParams};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerMethod {
    Sgd,
    /// Heavy ball: `v ← μ v + g`, `θ ← θ − η v`.
    Momentum,
    /// Adam with β = (0.9, 0.999), ε = 1e-8.
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub method: OptimizerMethod,
    pub learning_rate: f64,
    pub momentum: f64,
    /// Clamped to the dataset size, so any value ≥ n means full batch.
    pub batch_size: usize,
    pub max_epochs: usize,
    pub seed: u64,
    /// Record the training RMSE every this many epochs (and after the last one).
    /// 0 records only the initial and final values.
    pub history_every: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self::sgd(1e-3, 128, 1000, 0)
    }
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

impl OptimizerConfig {
    pub fn sgd(learning_rate: f64, batch_size: usize, max_epochs: usize, seed: u64) -> Self {
        Self {
            method: OptimizerMethod::Sgd,
            learning_rate,
            momentum: 0.0,
            batch_size,
            max_epochs,
            seed,
            history_every: 1,
        }
    }

    pub fn momentum(learning_rate: f64, momentum: f64, batch_size: usize, max_epochs: usize, seed: u64) -> Self {
        Self {
            method: OptimizerMethod::Momentum,
            momentum,
            ..Self::sgd(learning_rate, batch_size, max_epochs, seed)
        }
    }

    pub fn adam(learning_rate: f64, batch_size: usize, max_epochs: usize, seed: u64) -> Self {
        Self {
            method: OptimizerMethod::Adam,
            ..Self::sgd(learning_rate, batch_size, max_epochs, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config(format!("learning rate must be a finite nonnegative number, got {}", self.learning_rate)));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch size must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::config(format!("momentum must lie in [0, 1), got {}", self.momentum)));
        }
        Ok(())
    }
}

/// One entry of the training curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistoryPoint {
    pub epoch: usize,
    pub rmse: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: NetworkParams,
    /// Training RMSE, starting with epoch 0 (before any update).
    pub history: Vec<HistoryPoint>,
}

impl TrainOutcome {
    pub fn final_rmse(&self) -> f64 {
        self.history.last().map(|h| h.rmse).unwrap_or(f64::NAN)
    }
}

/// Minimizes the square loss on `data`; deterministic given `opt.seed`.
///
/// A learning rate of zero is accepted and leaves the parameters untouched.
pub fn train(params: &NetworkParams, data: &Dataset, opt: &OptimizerConfig) -> Result<TrainOutcome> {
    opt.validate()?;
    let arch = params.arch();
    if data.input_dim() != arch.input_dim() || data.output_dim() != arch.output_dim() {
        return Err(Error::DimensionMismatch {
            expected: arch.input_dim(),
            got: data.input_dim(),
            context: "dataset does not fit the network",
        });
    }
    let n = data.len();
    let batch = opt.batch_size.min(n);
    let mut p = params.clone();
    let mut grad = NetworkParams::zeros(arch);
    let mut ws = Workspace::new(params);
    let np = p.num_params();
    let mut m1 = vec![0.0; if opt.method == OptimizerMethod::Sgd { 0 } else { np }];
    let mut m2 = vec![0.0; if opt.method == OptimizerMethod::Adam { np } else { 0 }];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = seeded(opt.seed);
    let mut step: i32 = 0;
    let lr = opt.learning_rate;

    let record = |p: &NetworkParams, epoch: usize, hist: &mut Vec<HistoryPoint>| -> Result<()> {
        hist.push(HistoryPoint {
            epoch,
            rmse: rmse(p, &data.inputs, &data.targets)?,
        });
        Ok(())
    };
    let mut history = Vec::new();
    record(&p, 0, &mut history)?;

    for epoch in 1..=opt.max_epochs {
        if batch < n {
            order.shuffle(&mut rng);
        }
        for chunk in order.chunks(batch) {
            grad.layers_mut().iter_mut().for_each(|l| {
                l.weights.as_mut_slice().fill(0.0);
                l.biases.fill(0.0);
            });
            let scale = 1.0 / chunk.len() as f64;
            for &i in chunk {
                ws.accumulate(&p, &data.inputs[i], &data.targets[i], scale, &mut grad);
            }
            step = step.saturating_add(1);
            match opt.method {
                OptimizerMethod::Sgd => p.zip_apply(&grad, |_, w, g| *w -= lr * g),
                OptimizerMethod::Momentum => {
                    let mu = opt.momentum;
                    p.zip_apply(&grad, |k, w, g| {
                        m1[k] = mu * m1[k] + g;
                        *w -= lr * m1[k];
                    })
                }
                OptimizerMethod::Adam => {
                    let c1 = 1.0 - ADAM_BETA1.powi(step);
                    let c2 = 1.0 - ADAM_BETA2.powi(step);
                    p.zip_apply(&grad, |k, w, g| {
                        m1[k] = ADAM_BETA1 * m1[k] + (1.0 - ADAM_BETA1) * g;
                        m2[k] = ADAM_BETA2 * m2[k] + (1.0 - ADAM_BETA2) * g * g;
                        let mh = m1[k] / c1;
                        let vh = m2[k] / c2;
                        *w -= lr * mh / (vh.sqrt() + ADAM_EPS);
                    })
                }
            }
        }
        let due = opt.history_every > 0 && epoch % opt.history_every == 0;
        if due || epoch == opt.max_epochs {
            record(&p, epoch, &mut history)?;
        }
    }
    Ok(TrainOutcome { params: p, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::{init_network, neuron_status, Architecture, InitScheme, LifeState};

    fn abs_data(points: usize) -> Dataset {
        let xs = (0..points).map(|i| vec![-1.0 + 2.0 * i as f64 / (points - 1) as f64]).collect();
        Dataset::from_fn(xs, 1.0, |x| x[0].abs()).unwrap()
    }

    #[test]
    fn zero_learning_rate_is_a_no_op() {
        let net = init_network(&Architecture::new(vec![1, 5, 1]).unwrap(), &[InitScheme::HeWithBias; 2], 0).unwrap();
        for opt in [
            OptimizerConfig::sgd(0.0, 3, 20, 1),
            OptimizerConfig::momentum(0.0, 0.9, 3, 20, 1),
            OptimizerConfig::adam(0.0, 3, 20, 1),
        ] {
            let out = train(&net, &abs_data(10), &opt).unwrap();
            assert_eq!(out.params, net);
            assert_eq!(out.history.len(), 21);
            assert!(out.history.iter().all(|h| h.rmse == out.history[0].rmse));
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let net = init_network(&Architecture::new(vec![1, 5, 1]).unwrap(), &[InitScheme::HeWithBias; 2], 0).unwrap();
        let opt = OptimizerConfig::sgd(1e-2, 3, 50, 7);
        let a = train(&net, &abs_data(10), &opt).unwrap();
        let b = train(&net, &abs_data(10), &opt).unwrap();
        assert_eq!(a.params, b.params);
    }

    #[test]
    fn born_dead_neurons_are_frozen() {
        let arch = Architecture::new(vec![1, 10, 1]).unwrap();
        let mut net = init_network(&arch, &[InitScheme::HeWithBias; 2], 4).unwrap();
        net.layers_mut()[0].weights[(2, 0)] = -0.3;
        net.layers_mut()[0].biases[2] = -0.5;
        let dead: Vec<usize> = neuron_status(&net, 1.0, 0)
            .unwrap()
            .iter()
            .filter(|s| s.state == LifeState::PermanentlyDead)
            .map(|s| s.neuron)
            .collect();
        assert!(dead.contains(&2));
        for opt in [OptimizerConfig::sgd(1e-2, 4, 100, 2), OptimizerConfig::adam(1e-2, 4, 100, 2)] {
            let out = train(&net, &abs_data(12), &opt).unwrap();
            for &i in &dead {
                let before = (net.layer(0).weights[(i, 0)], net.layer(0).biases[i], net.layer(1).weights[(0, i)]);
                let after = (out.params.layer(0).weights[(i, 0)], out.params.layer(0).biases[i], out.params.layer(1).weights[(0, i)]);
                assert_eq!(before.0.to_bits(), after.0.to_bits());
                assert_eq!(before.1.to_bits(), after.1.to_bits());
                assert_eq!(before.2.to_bits(), after.2.to_bits());
            }
        }
    }

    #[test]
    fn learns_abs_in_most_runs() {
        let data = abs_data(10);
        let arch = Architecture::new(vec![1, 10, 1]).unwrap();
        let mut wins = 0;
        for seed in 0..20 {
            let net = init_network(&arch, &[InitScheme::HeWithBias; 2], 1000 + seed).unwrap();
            let mut opt = OptimizerConfig::adam(1e-2, 10, 3000, seed);
            opt.history_every = 0;
            let out = train(&net, &data, &opt).unwrap();
            if out.final_rmse() < 1e-2 {
                wins += 1;
            }
        }
        assert!(wins > 10, "{wins}/20");
    }

    #[test]
    fn invalid_configs() {
        assert!(OptimizerConfig::sgd(-1.0, 1, 1, 0).validate().is_err());
        assert!(OptimizerConfig::sgd(1.0, 0, 1, 0).validate().is_err());
        assert!(OptimizerConfig::momentum(1.0, 1.5, 1, 1, 0).validate().is_err());
    }
}
