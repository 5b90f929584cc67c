use serde::Deserialize;

use super::Architecture;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::output::fmt17;

/// One affine layer: `weights` is `n_t × n_{t-1}`, `biases` has length `n_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Matrix,
    pub biases: Vec<f64>,
}

impl Layer {
    pub fn zeros(fan_out: usize, fan_in: usize) -> Self {
        Self {
            weights: Matrix::zeros(fan_out, fan_in),
            biases: vec![0.0; fan_out],
        }
    }

    pub fn fan_in(&self) -> usize {
        self.weights.cols()
    }

    pub fn fan_out(&self) -> usize {
        self.weights.rows()
    }

    fn apply_into(&self, input: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = self.weights.row(i);
            let mut acc = self.biases[i];
            for (w, x) in row.iter().zip(input) {
                acc += w * x;
            }
            *o = acc;
        }
    }
}

/// Parameters of a ReLU network. Hidden layers apply `φ = max(·, 0)`, the last
/// layer is affine.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    arch: Architecture,
    layers: Vec<Layer>,
}

/// Pre-activations `N^t(x)` of every layer for one input.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub pre_activations: Vec<Vec<f64>>,
}

impl Trace {
    pub fn output(&self) -> &[f64] {
        self.pre_activations.last().unwrap()
    }
}

impl NetworkParams {
    pub fn zeros(arch: &Architecture) -> Self {
        let layers = arch
            .widths()
            .windows(2)
            .map(|w| Layer::zeros(w[1], w[0]))
            .collect();
        Self {
            arch: arch.clone(),
            layers,
        }
    }

    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        let first = layers
            .first()
            .ok_or_else(|| Error::config("a network needs at least one layer"))?;
        let mut widths = vec![first.fan_in()];
        for layer in &layers {
            let prev = *widths.last().unwrap();
            if layer.fan_in() != prev {
                return Err(Error::DimensionMismatch {
                    expected: prev,
                    got: layer.fan_in(),
                    context: "layer fan-in",
                });
            }
            if layer.biases.len() != layer.fan_out() {
                return Err(Error::DimensionMismatch {
                    expected: layer.fan_out(),
                    got: layer.biases.len(),
                    context: "bias length",
                });
            }
            widths.push(layer.fan_out());
        }
        Ok(Self {
            arch: Architecture::new(widths)?,
            layers,
        })
    }

    pub fn arch(&self) -> &Architecture {
        &self.arch
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn layer(&self, t: usize) -> &Layer {
        &self.layers[t]
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.as_slice().len() + l.biases.len())
            .sum()
    }

    /// Flat parameter view: each layer's weights (row-major) then its biases.
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(&l.biases);
        }
        out
    }

    /// Calls `f(index, param, other_param)` over matching flat positions.
    pub(crate) fn zip_apply(&mut self, other: &NetworkParams, mut f: impl FnMut(usize, &mut f64, f64)) {
        let mut k = 0;
        for (l, o) in self.layers.iter_mut().zip(&other.layers) {
            for (p, g) in l.weights.as_mut_slice().iter_mut().zip(o.weights.as_slice()) {
                f(k, p, *g);
                k += 1;
            }
            for (p, g) in l.biases.iter_mut().zip(&o.biases) {
                f(k, p, *g);
                k += 1;
            }
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.arch.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.arch.input_dim(),
                got: x.len(),
                context: "network input",
            });
        }
        Ok(())
    }

    /// `N^L(x)`.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut a = x.to_vec();
        let last = self.layers.len() - 1;
        for (t, layer) in self.layers.iter().enumerate() {
            let mut z = vec![0.0; layer.fan_out()];
            layer.apply_into(&a, &mut z);
            if t < last {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            a = z;
        }
        Ok(a)
    }

    /// All pre-activations `N^1(x), …, N^L(x)`.
    pub fn forward_trace(&self, x: &[f64]) -> Result<Trace> {
        self.check_input(x)?;
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut a = x.to_vec();
        for layer in &self.layers {
            let mut z = vec![0.0; layer.fan_out()];
            layer.apply_into(&a, &mut z);
            a = z.iter().map(|v| v.max(0.0)).collect();
            pre.push(z);
        }
        Ok(Trace {
            pre_activations: pre,
        })
    }

    /// JSON document with layer-major, row-major arrays; every number is
    /// written with 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut s = String::new();
        s.push_str("{\n  \"widths\": [");
        s.push_str(
            &self
                .arch
                .widths()
                .iter()
                .map(|w| w.to_string())
                .collect::<Vec<_>>()
                .join(", "),
        );
        s.push_str("],\n  \"layers\": [\n");
        for (t, l) in self.layers.iter().enumerate() {
            s.push_str("    {\n      \"weights\": [");
            let rows: Vec<String> = (0..l.fan_out())
                .map(|i| format!("[{}]", join_f64(l.weights.row(i))))
                .collect();
            s.push_str(&rows.join(", "));
            s.push_str("],\n      \"biases\": [");
            s.push_str(&join_f64(&l.biases));
            s.push_str("]\n    }");
            if t + 1 < self.layers.len() {
                s.push(',');
            }
            s.push('\n');
        }
        s.push_str("  ]\n}\n");
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct LayerDoc {
            weights: Vec<Vec<f64>>,
            biases: Vec<f64>,
        }
        #[derive(Deserialize)]
        struct Doc {
            widths: Vec<usize>,
            layers: Vec<LayerDoc>,
        }
        let doc: Doc = serde_json::from_str(text)?;
        let arch = Architecture::new(doc.widths)?;
        let mut layers = Vec::with_capacity(doc.layers.len());
        for (t, l) in doc.layers.into_iter().enumerate() {
            let weights = if l.weights.is_empty() {
                Matrix::zeros(0, arch.widths()[t])
            } else {
                Matrix::from_rows(&l.weights)?
            };
            layers.push(Layer {
                weights,
                biases: l.biases,
            });
        }
        let net = Self::from_layers(layers)?;
        if net.arch != arch {
            return Err(Error::config("layer shapes disagree with the declared widths"));
        }
        Ok(net)
    }
}

fn join_f64(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt17(x)).collect::<Vec<_>>().join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn abs_net() -> NetworkParams {
        let l1 = Layer {
            weights: Matrix::from_rows(&[vec![1.0], vec![-1.0]]).unwrap(),
            biases: vec![0.0, 0.0],
        };
        let l2 = Layer {
            weights: Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap(),
            biases: vec![0.0],
        };
        NetworkParams::from_layers(vec![l1, l2]).unwrap()
    }

    #[test]
    fn abs_representation() {
        let net = abs_net();
        assert_eq!(net.forward(&[-0.3]).unwrap(), vec![0.3]);
        assert_eq!(net.forward(&[0.7]).unwrap(), vec![0.7]);
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = NetworkParams::zeros(&Architecture::new(vec![3, 5, 4, 2]).unwrap());
        assert_eq!(net.forward(&[1.0, -2.0, 0.5]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn input_dimension_is_checked() {
        let net = abs_net();
        assert!(matches!(
            net.forward(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn bias_only_path_at_origin() {
        let mut net = NetworkParams::zeros(&Architecture::new(vec![2, 3, 2, 1]).unwrap());
        net.layers_mut()[0].weights = Matrix::from_rows(&[vec![0.3, -1.0], vec![2.0, 0.1], vec![-0.5, 0.5]]).unwrap();
        net.layers_mut()[0].biases = vec![0.5, -0.25, 1.0];
        net.layers_mut()[1].weights = Matrix::from_rows(&[vec![1.0, 2.0, -1.0], vec![0.5, 0.5, 0.5]]).unwrap();
        net.layers_mut()[1].biases = vec![0.25, -2.0];
        net.layers_mut()[2].weights = Matrix::from_rows(&[vec![3.0, -1.0]]).unwrap();
        net.layers_mut()[2].biases = vec![0.125];
        // layer 1 at x = 0: relu(b1) = (0.5, 0, 1)
        // layer 2: (0.5 - 1 + 0.25, 0.25 + 0.5 - 2) = (-0.25, -1.25) -> relu (0, 0)
        // output: 0.125
        assert_eq!(net.forward(&[0.0, 0.0]).unwrap(), vec![0.125]);
        let tr = net.forward_trace(&[0.0, 0.0]).unwrap();
        assert_eq!(tr.pre_activations[0], vec![0.5, -0.25, 1.0]);
        assert_eq!(tr.pre_activations[1], vec![-0.25, -1.25]);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mut net = abs_net();
        net.layers_mut()[0].biases = vec![0.1, -1.0 / 3.0];
        net.layers_mut()[1].weights[(0, 1)] = std::f64::consts::PI;
        let text = net.to_json();
        assert!(text.contains("3.1415926535897931e0"));
        let back = NetworkParams::from_json(&text).unwrap();
        assert_eq!(back, net);
    }
}
