use rand::Rng as _;
use serde::Serialize;

use super::{eval_piecewise_1d, sample_unit_sphere, NetworkParams};
use crate::error::{Error, Result};
use crate::rng::seeded;

/// Number of ball probes used for deeper layers when the input is not scalar.
pub const DEFAULT_PROBE_COUNT: usize = 4096;

const PROBE_SEED: u64 = 0x5EED_BA11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LifeState {
    Active,
    TentativelyDead,
    PermanentlyDead,
}

impl LifeState {
    pub fn is_dead(self) -> bool {
        self != LifeState::Active
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NeuronStatus {
    /// Hidden layer, starting at 1.
    pub layer: usize,
    pub neuron: usize,
    pub state: LifeState,
    /// Output `φ(N(x))` of a dead neuron; 0 for active ones.
    pub constant_value: f64,
    /// Largest pre-activation on the ball. Exact on layer 1 (`r‖w‖ + b`) and for
    /// scalar inputs, a probe maximum otherwise.
    pub max_pre_activation: f64,
}

/// Per hidden layer tally; the three counts add up to the width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct LayerCounts {
    pub layer: usize,
    pub active: usize,
    pub tentatively_dead: usize,
    pub permanently_dead: usize,
}

impl LayerCounts {
    pub fn dead(&self) -> usize {
        self.tentatively_dead + self.permanently_dead
    }

    pub fn width(&self) -> usize {
        self.active + self.dead()
    }
}

/// Quasi-uniform probes of `B_r(0)`: the centre, half on the sphere, half inside.
fn ball_probes(dim: usize, r: f64, count: usize) -> Vec<Vec<f64>> {
    let mut rng = seeded(PROBE_SEED);
    let mut pts = Vec::with_capacity(count + 1);
    pts.push(vec![0.0; dim]);
    for k in 0..count {
        let dir = sample_unit_sphere(dim, &mut rng);
        let rho = if k % 2 == 0 {
            r
        } else {
            r * rng.random::<f64>().powf(1.0 / dim as f64)
        };
        pts.push(dir.into_iter().map(|v| v * rho).collect());
    }
    pts
}

/// Life state of every hidden neuron on `B_r(0)`.
///
/// Layer 1 is decided exactly. Deeper layers are exact for scalar inputs
/// (via the knot expansion) and probe-based otherwise, with `probe_count`
/// points; a probe test can only miss activity, never invent it.
pub fn neuron_status(params: &NetworkParams, r: f64, probe_count: usize) -> Result<Vec<NeuronStatus>> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("radius must be positive and finite, got {r}")));
    }
    let arch = params.arch();
    let hidden = arch.depth() - 1;
    let mut out = Vec::with_capacity(arch.hidden().iter().sum());
    if hidden == 0 {
        return Ok(out);
    }

    let l1 = params.layer(0);
    for i in 0..l1.fan_out() {
        let w = l1.weights.row(i);
        let b = l1.biases[i];
        let wn = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        let max = r * wn + b;
        let dead = max <= 0.0 || wn == 0.0;
        out.push(NeuronStatus {
            layer: 1,
            neuron: i,
            state: if dead { LifeState::PermanentlyDead } else { LifeState::Active },
            constant_value: if dead { b.max(0.0) } else { 0.0 },
            max_pre_activation: max,
        });
    }
    if hidden == 1 {
        return Ok(out);
    }

    // (min, max, value at one point) of each deeper pre-activation
    let mut ranges: Vec<Vec<(f64, f64, f64)>> = Vec::with_capacity(hidden - 1);
    if arch.input_dim() == 1 {
        let pw = eval_piecewise_1d(params, r)?;
        for t in 1..hidden {
            ranges.push(
                (0..arch.widths()[t + 1])
                    .map(|i| {
                        let (lo, hi) = pw.range(t, i);
                        (lo, hi, pw.pre_activations[t][(i, 0)])
                    })
                    .collect(),
            );
        }
    } else {
        let probes = ball_probes(arch.input_dim(), r, probe_count.max(1));
        for t in 1..hidden {
            ranges.push(vec![(f64::INFINITY, f64::NEG_INFINITY, 0.0); arch.widths()[t + 1]]);
        }
        for (k, x) in probes.iter().enumerate() {
            let trace = params.forward_trace(x)?;
            for t in 1..hidden {
                for (i, &z) in trace.pre_activations[t].iter().enumerate() {
                    let e = &mut ranges[t - 1][i];
                    e.0 = e.0.min(z);
                    e.1 = e.1.max(z);
                    if k == 0 {
                        e.2 = z;
                    }
                }
            }
        }
    }

    for t in 1..hidden {
        let layer = params.layer(t);
        for (i, &(lo, hi, any)) in ranges[t - 1].iter().enumerate() {
            let dead = hi <= 0.0 || lo == hi;
            let sign_closed = layer.biases[i] <= 0.0 && layer.weights.row(i).iter().all(|&w| w <= 0.0);
            let state = match (dead, sign_closed) {
                (false, _) => LifeState::Active,
                (true, true) => LifeState::PermanentlyDead,
                (true, false) => LifeState::TentativelyDead,
            };
            out.push(NeuronStatus {
                layer: t + 1,
                neuron: i,
                state,
                constant_value: if dead { any.max(0.0) } else { 0.0 },
                max_pre_activation: hi,
            });
        }
    }
    Ok(out)
}

/// Tallies statuses per hidden layer of `widths` (the full architecture).
pub fn layer_counts(statuses: &[NeuronStatus], widths: &[usize]) -> Vec<LayerCounts> {
    let hidden = widths.len().saturating_sub(2);
    let mut counts: Vec<LayerCounts> = (1..=hidden)
        .map(|layer| LayerCounts {
            layer,
            ..Default::default()
        })
        .collect();
    for s in statuses {
        let c = &mut counts[s.layer - 1];
        match s.state {
            LifeState::Active => c.active += 1,
            LifeState::TentativelyDead => c.tentatively_dead += 1,
            LifeState::PermanentlyDead => c.permanently_dead += 1,
        }
    }
    counts
}

pub fn status_counts(params: &NetworkParams, r: f64, probe_count: usize) -> Result<Vec<LayerCounts>> {
    let st = neuron_status(params, r, probe_count)?;
    Ok(layer_counts(&st, params.arch().widths()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::netcore::{init_network, Architecture, InitScheme, Layer};

    fn shallow(w: Vec<f64>, b: Vec<f64>) -> NetworkParams {
        let n = w.len();
        NetworkParams::from_layers(vec![
            Layer {
                weights: Matrix::from_vec(n, 1, w).unwrap(),
                biases: b,
            },
            Layer {
                weights: Matrix::from_vec(1, n, vec![1.0; n]).unwrap(),
                biases: vec![0.0],
            },
        ])
        .unwrap()
    }

    #[test]
    fn first_layer_examples() {
        let net = shallow(vec![1.0, -1.0], vec![-2.0, 0.5]);
        let st = neuron_status(&net, 1.0, DEFAULT_PROBE_COUNT).unwrap();
        assert_eq!(st[0].state, LifeState::PermanentlyDead);
        assert_eq!(st[0].max_pre_activation, -1.0);
        assert_eq!(st[1].state, LifeState::Active);
        assert_eq!(st[1].max_pre_activation, 1.5);
    }

    #[test]
    fn zero_weight_positive_bias_is_dead_constant() {
        let net = shallow(vec![0.0], vec![0.7]);
        let st = neuron_status(&net, 1.0, 16).unwrap();
        assert_eq!(st[0].state, LifeState::PermanentlyDead);
        assert_eq!(st[0].constant_value, 0.7);
    }

    fn deep_with_second_layer(w2: Vec<f64>, b2: f64) -> NetworkParams {
        let n1 = w2.len();
        let w1: Vec<f64> = (0..n1).map(|i| if i % 2 == 0 { 1.0 } else { -0.5 }).collect();
        NetworkParams::from_layers(vec![
            Layer {
                weights: Matrix::from_vec(n1, 1, w1).unwrap(),
                biases: vec![0.1; n1],
            },
            Layer {
                weights: Matrix::from_vec(1, n1, w2).unwrap(),
                biases: vec![b2],
            },
            Layer {
                weights: Matrix::from_vec(1, 1, vec![1.0]).unwrap(),
                biases: vec![0.0],
            },
        ])
        .unwrap()
    }

    #[test]
    fn nonpositive_second_layer_is_permanently_dead() {
        let net = deep_with_second_layer(vec![-1.0, -0.3, 0.0], -0.2);
        let st = neuron_status(&net, 1.0, 64).unwrap();
        assert_eq!(st[3].layer, 2);
        assert_eq!(st[3].state, LifeState::PermanentlyDead);
    }

    #[test]
    fn dead_with_a_positive_weight_is_tentative() {
        // first neuron φ(x + 0.1) ≤ 1.1, weight 0.5 cannot beat bias -1
        let net = deep_with_second_layer(vec![0.5, -1.0], -1.0);
        let st = neuron_status(&net, 1.0, 64).unwrap();
        assert_eq!(st[2].state, LifeState::TentativelyDead);
    }

    #[test]
    fn probe_path_agrees_on_layer_two_signs() {
        let arch = Architecture::new(vec![2, 5, 4, 1]).unwrap();
        for seed in 0..20 {
            let net = init_network(&arch, &[InitScheme::HeWithBias; 3], seed).unwrap();
            let st = neuron_status(&net, 1.0, 512).unwrap();
            for s in st.iter().filter(|s| s.layer == 2) {
                let l = net.layer(1);
                let closed = l.biases[s.neuron] <= 0.0 && l.weights.row(s.neuron).iter().all(|&w| w <= 0.0);
                if closed {
                    assert_eq!(s.state, LifeState::PermanentlyDead);
                }
            }
        }
    }

    #[test]
    fn counts_add_up_to_widths() {
        let arch = Architecture::new(vec![1, 6, 4, 3, 1]).unwrap();
        for seed in 0..50 {
            let net = init_network(&arch, &[InitScheme::UnitSphereWithBias; 4], seed).unwrap();
            let counts = status_counts(&net, 1.0, 0).unwrap();
            assert_eq!(counts.len(), 3);
            for (c, &n) in counts.iter().zip(arch.hidden()) {
                assert_eq!(c.width(), n);
            }
        }
    }
}
