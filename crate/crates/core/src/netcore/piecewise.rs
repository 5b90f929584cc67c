use super::NetworkParams;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Exact description of a network with scalar input restricted to `[-r, r]`.
///
/// Between consecutive knots every pre-activation, and hence the output, is affine.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseEval {
    pub knots: Vec<f64>,
    /// `pre_activations[t]` is `n_{t+1} × knots.len()`; the last entry is the output layer.
    pub pre_activations: Vec<Matrix>,
}

impl PiecewiseEval {
    /// Output values at the knots, `n_L × knots.len()`.
    pub fn outputs(&self) -> &Matrix {
        self.pre_activations.last().unwrap()
    }

    /// Output at `x ∈ [-r, r]` by linear interpolation between knots.
    pub fn eval(&self, x: f64) -> Vec<f64> {
        let k = &self.knots;
        let out = self.outputs();
        let j = match k.partition_point(|&v| v <= x) {
            0 => 0,
            p if p >= k.len() => k.len() - 2,
            p => p - 1,
        };
        let (a, b) = (k[j], k[j + 1]);
        let t = if b > a { (x - a) / (b - a) } else { 0.0 };
        (0..out.rows())
            .map(|i| {
                let va = out[(i, j)];
                let vb = out[(i, j + 1)];
                va + t * (vb - va)
            })
            .collect()
    }

    /// `(min, max)` of the pre-activation of neuron `i` in layer `t` (0-based) on `[-r, r]`.
    pub fn range(&self, t: usize, i: usize) -> (f64, f64) {
        self.pre_activations[t]
            .row(i)
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

fn evaluate_at(params: &NetworkParams, knots: &[f64]) -> Vec<Matrix> {
    let arch = params.arch();
    let mut mats: Vec<Matrix> = arch.widths()[1..]
        .iter()
        .map(|&n| Matrix::zeros(n, knots.len()))
        .collect();
    for (c, &x) in knots.iter().enumerate() {
        // input dimension was checked by the caller
        let trace = params.forward_trace(&[x]).expect("scalar input");
        for (t, z) in trace.pre_activations.iter().enumerate() {
            for (i, &v) in z.iter().enumerate() {
                mats[t][(i, c)] = v;
            }
        }
    }
    mats
}

/// Locates every kink of every hidden pre-activation on `[-r, r]` by pushing
/// breakpoints through the layers one at a time.
pub fn eval_piecewise_1d(params: &NetworkParams, r: f64) -> Result<PiecewiseEval> {
    if params.arch().input_dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: params.arch().input_dim(),
            context: "piecewise evaluation needs a scalar input",
        });
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("radius must be positive and finite, got {r}")));
    }
    let mut knots = vec![-r, r];
    let hidden = params.arch().depth() - 1;
    for t in 0..hidden {
        let z = &evaluate_at(params, &knots)[t];
        let mut extra = Vec::new();
        for i in 0..z.rows() {
            let row = z.row(i);
            for c in 0..knots.len() - 1 {
                let (za, zb) = (row[c], row[c + 1]);
                if (za < 0.0 && zb > 0.0) || (za > 0.0 && zb < 0.0) {
                    let (xa, xb) = (knots[c], knots[c + 1]);
                    let root = xa + (xb - xa) * za / (za - zb);
                    if root > xa && root < xb {
                        extra.push(root);
                    }
                }
            }
        }
        if !extra.is_empty() {
            knots.extend(extra);
            knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
            knots.dedup();
        }
    }
    let pre_activations = evaluate_at(params, &knots);
    Ok(PiecewiseEval {
        knots,
        pre_activations,
    })
}
