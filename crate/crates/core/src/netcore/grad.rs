use super::NetworkParams;
use crate::error::{Error, Result};

/// Scratch buffers for one forward/backward pass, reused across samples.
pub(crate) struct Workspace {
    /// `acts[0]` is the input, `acts[t]` the post-activation of layer `t`
    /// (the last one holds the raw output).
    acts: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    delta: Vec<Vec<f64>>,
}

impl Workspace {
    pub(crate) fn new(params: &NetworkParams) -> Self {
        let w = params.arch().widths();
        Self {
            acts: w.iter().map(|&n| vec![0.0; n]).collect(),
            pre: w[1..].iter().map(|&n| vec![0.0; n]).collect(),
            delta: w[1..].iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    fn forward(&mut self, params: &NetworkParams, x: &[f64]) {
        self.acts[0].copy_from_slice(x);
        let last = params.layers().len() - 1;
        for (t, layer) in params.layers().iter().enumerate() {
            let (before, after) = self.acts.split_at_mut(t + 1);
            let input = &before[t];
            let out = &mut after[0];
            let z = &mut self.pre[t];
            for i in 0..layer.fan_out() {
                let row = layer.weights.row(i);
                let mut acc = layer.biases[i];
                for (w, a) in row.iter().zip(input.iter()) {
                    acc += w * a;
                }
                z[i] = acc;
                out[i] = if t < last { acc.max(0.0) } else { acc };
            }
        }
    }

    /// Adds `scale · ∇‖N(x) − y‖²` to `grad` and returns `‖N(x) − y‖²`.
    pub(crate) fn accumulate(
        &mut self,
        params: &NetworkParams,
        x: &[f64],
        y: &[f64],
        scale: f64,
        grad: &mut NetworkParams,
    ) -> f64 {
        self.forward(params, x);
        let depth = params.layers().len();
        let out = &self.acts[depth];
        let mut sq = 0.0;
        for (k, (o, t)) in out.iter().zip(y).enumerate() {
            let e = o - t;
            sq += e * e;
            self.delta[depth - 1][k] = 2.0 * scale * e;
        }
        for t in (0..depth).rev() {
            if t + 1 < depth {
                // δ_t = (W_{t+1}ᵀ δ_{t+1}) ⊙ φ'(z_t), φ'(0) = 0
                let (lo, hi) = self.delta.split_at_mut(t + 1);
                let next = &hi[0];
                let cur = &mut lo[t];
                let w_next = &params.layer(t + 1).weights;
                for (i, c) in cur.iter_mut().enumerate() {
                    if self.pre[t][i] > 0.0 {
                        let mut acc = 0.0;
                        for (j, d) in next.iter().enumerate() {
                            acc += w_next[(j, i)] * d;
                        }
                        *c = acc;
                    } else {
                        *c = 0.0;
                    }
                }
            }
            let d = &self.delta[t];
            let a = &self.acts[t];
            let g = &mut grad.layers_mut()[t];
            for (i, &di) in d.iter().enumerate() {
                if di == 0.0 {
                    continue;
                }
                g.biases[i] += di;
                for (gw, &aj) in g.weights.row_mut(i).iter_mut().zip(a) {
                    *gw += di * aj;
                }
            }
        }
        sq
    }
}

fn check_batch(params: &NetworkParams, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<()> {
    if inputs.is_empty() {
        return Err(Error::config("empty batch"));
    }
    if inputs.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: inputs.len(),
            got: targets.len(),
            context: "targets per input",
        });
    }
    let (d, k) = (params.arch().input_dim(), params.arch().output_dim());
    for (x, y) in inputs.iter().zip(targets) {
        if x.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: x.len(), context: "network input" });
        }
        if y.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: y.len(), context: "network output" });
        }
    }
    Ok(())
}

/// Square loss `(1/B) Σ ‖N(x_i) − y_i‖²` and its exact gradient.
///
/// Entries of neurons whose pre-activation is nonpositive on the whole batch
/// are exactly zero.
pub fn loss_grad(params: &NetworkParams, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<(f64, NetworkParams)> {
    check_batch(params, inputs, targets)?;
    let mut grad = NetworkParams::zeros(params.arch());
    let mut ws = Workspace::new(params);
    let scale = 1.0 / inputs.len() as f64;
    let mut loss = 0.0;
    for (x, y) in inputs.iter().zip(targets) {
        loss += ws.accumulate(params, x, y, scale, &mut grad);
    }
    Ok((loss * scale, grad))
}

pub fn mse_loss(params: &NetworkParams, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<f64> {
    check_batch(params, inputs, targets)?;
    let mut total = 0.0;
    for (x, y) in inputs.iter().zip(targets) {
        let out = params.forward(x)?;
        total += out.iter().zip(y).map(|(o, t)| (o - t) * (o - t)).sum::<f64>();
    }
    Ok(total / inputs.len() as f64)
}

/// Root mean square error over all points and output components.
pub fn rmse(params: &NetworkParams, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<f64> {
    let k = params.arch().output_dim() as f64;
    Ok((mse_loss(params, inputs, targets)? / k).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::{init_network, Architecture, InitScheme};
    use crate::rng::seeded;
    use rand::Rng as _;

    fn random_batch(d: usize, k: usize, b: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut rng = seeded(seed);
        let xs = (0..b).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let ys = (0..b).map(|_| (0..k).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        (xs, ys)
    }

    #[test]
    fn matches_finite_differences() {
        let h = 1e-6;
        let mut checked = 0;
        for case in 0..50u64 {
            let d = 1 + (case % 3) as usize;
            let k = 1 + (case % 2) as usize;
            let arch = Architecture::new(vec![d, 5, 4, k]).unwrap();
            let net = init_network(&arch, &[InitScheme::HeWithBias; 3], case).unwrap();
            let (xs, ys) = random_batch(d, k, 7, 100 + case);
            let (_, g) = loss_grad(&net, &xs, &ys).unwrap();
            let gflat = g.flat();
            let base = net.flat();
            for (idx, &ga) in gflat.iter().enumerate() {
                let mut plus = net.clone();
                let mut minus = net.clone();
                plus.zip_apply(&net, |i, p, _| if i == idx { *p = base[idx] + h });
                minus.zip_apply(&net, |i, p, _| if i == idx { *p = base[idx] - h });
                let fd = (mse_loss(&plus, &xs, &ys).unwrap() - mse_loss(&minus, &xs, &ys).unwrap()) / (2.0 * h);
                let denom = ga.abs().max(fd.abs()).max(1e-3);
                // a kink inside the stencil spoils the difference quotient; skip those
                if (ga - fd).abs() / denom >= 1e-5 {
                    let kink = xs.iter().any(|x| {
                        let tp = plus.forward_trace(x).unwrap();
                        let tm = minus.forward_trace(x).unwrap();
                        tp.pre_activations.iter().zip(&tm.pre_activations).any(|(a, b)| a.iter().zip(b).any(|(u, v)| (u > &0.0) != (v > &0.0)))
                    });
                    assert!(kink, "case {case} param {idx}: analytic {ga} fd {fd}");
                } else {
                    checked += 1;
                }
            }
        }
        assert!(checked > 2000);
    }

    #[test]
    fn interpolating_net_has_zero_gradient() {
        let arch = Architecture::new(vec![1, 6, 1]).unwrap();
        let net = init_network(&arch, &[InitScheme::HeWithBias; 2], 3).unwrap();
        let xs: Vec<Vec<f64>> = (0..5).map(|i| vec![-1.0 + 0.5 * i as f64]).collect();
        let ys: Vec<Vec<f64>> = xs.iter().map(|x| net.forward(x).unwrap()).collect();
        let (loss, g) = loss_grad(&net, &xs, &ys).unwrap();
        assert_eq!(loss, 0.0);
        assert!(g.flat().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dead_first_layer_neuron_gets_no_gradient() {
        let arch = Architecture::new(vec![1, 8, 1]).unwrap();
        let mut net = init_network(&arch, &[InitScheme::HeWithBias; 2], 5).unwrap();
        net.layers_mut()[0].weights[(3, 0)] = 0.4;
        net.layers_mut()[0].biases[3] = -0.9;
        let (xs, ys) = random_batch(1, 1, 32, 9);
        let (_, g) = loss_grad(&net, &xs, &ys).unwrap();
        assert_eq!(g.layer(0).weights[(3, 0)], 0.0);
        assert_eq!(g.layer(0).biases[3], 0.0);
        assert_eq!(g.layer(1).weights[(0, 3)], 0.0);
    }

    #[test]
    fn mismatched_batch_is_rejected() {
        let net = init_network(&Architecture::new(vec![2, 3, 1]).unwrap(), &[InitScheme::HeNoBias; 2], 0).unwrap();
        assert!(loss_grad(&net, &[vec![1.0]], &[vec![0.0]]).is_err());
        assert!(loss_grad(&net, &[], &[]).is_err());
    }
}
