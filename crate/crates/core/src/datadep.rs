//! Data-dependent bias initialization for over-parameterized shallow networks.
//!
//! Neuron `i` gets `b_i = −w_iᵀ x_{j_i} + |ε_i|`, where the anchors `j_i` cycle
//! through the training inputs, so every neuron starts with its kink at (or just
//! past) a data point and none is born dead. The scales are calibrated so that
//! the mean squared output over the data matches He initialization without bias.

use std::f64::consts::PI;

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::netcore::{Architecture, InitScheme, Layer, NetworkParams};
use crate::rng::{seeded, substream, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataDepConfig {
    pub sigma_in: f64,
    pub sigma_e: f64,
    pub sigma_out: f64,
    /// Over-parameterization ratio `n / m`.
    pub h: f64,
}

impl DataDepConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.sigma_in, self.sigma_e, self.sigma_out, self.h].iter().all(|v| v.is_finite());
        if !finite || self.sigma_in <= 0.0 || self.sigma_e < 0.0 || self.sigma_out < 0.0 || self.h < 1.0 {
            return Err(Error::config(format!("invalid data-dependent parameters {self:?}")));
        }
        Ok(())
    }

    /// Width `n = ⌈h m⌉` for `m` training points.
    pub fn width(&self, m: usize) -> usize {
        let x = self.h * m as f64;
        let r = x.round();
        if (x - r).abs() < 1e-9 {
            r as usize
        } else {
            x.ceil() as usize
        }
    }

    /// `s = σ_e / σ_in`.
    pub fn noise_ratio(&self) -> f64 {
        self.sigma_e / self.sigma_in
    }

    pub fn scheme(&self) -> InitScheme {
        InitScheme::DataDependent {
            sigma_in: self.sigma_in,
            sigma_e: self.sigma_e,
            sigma_out: self.sigma_out,
        }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn sq_norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

/// `Σ_{k<i} ‖x_k − x_i‖²`
fn pair_sum(inputs: &[Vec<f64>]) -> f64 {
    let mut s = 0.0;
    for i in 0..inputs.len() {
        for k in 0..i {
            s += sq_dist(&inputs[k], &inputs[i]);
        }
    }
    s
}

/// Default calibration: `σ_in² = 2/d`, `σ_e = 0` and
/// `σ_out² = (1/h) Σ‖x_j‖² / Σ_{k<i}‖x_k − x_i‖²`.
///
/// `h` is first rounded up to `⌈h m⌉ / m` so that the width is an integer.
pub fn default_params(inputs: &[Vec<f64>], h: f64, d: usize) -> Result<DataDepConfig> {
    if !(h >= 1.0 && h.is_finite()) || d == 0 {
        return Err(Error::config(format!("need h ≥ 1 and d ≥ 1, got h = {h}, d = {d}")));
    }
    let m = inputs.len();
    let denom = pair_sum(inputs);
    if denom <= 0.0 {
        return Err(Error::DegenerateData("the inputs must contain at least two distinct points".into()));
    }
    let n = DataDepConfig { sigma_in: 1.0, sigma_e: 0.0, sigma_out: 1.0, h }.width(m);
    let h = n as f64 / m as f64;
    let num: f64 = inputs.iter().map(|x| sq_norm(x)).sum();
    Ok(DataDepConfig {
        sigma_in: (2.0 / d as f64).sqrt(),
        sigma_e: 0.0,
        sigma_out: (num / (h * denom)).sqrt(),
        h,
    })
}

/// Index of the anchor point of neuron `i` (0-based): the data are used in order, cyclically.
pub fn anchor(i: usize, m: usize) -> usize {
    i % m
}

fn biases_with_rng(weights: &Matrix, inputs: &[Vec<f64>], sigma_e: f64, rng: &mut Rng) -> Result<Vec<f64>> {
    let (n, m) = (weights.rows(), inputs.len());
    if m == 0 || n < m {
        return Err(Error::config(format!("width {n} is smaller than the number of data points {m}")));
    }
    if !(sigma_e >= 0.0 && sigma_e.is_finite()) {
        return Err(Error::config(format!("noise scale must be finite and nonnegative, got {sigma_e}")));
    }
    if let Some(x) = inputs.iter().find(|x| x.len() != weights.cols()) {
        return Err(Error::DimensionMismatch {
            expected: weights.cols(),
            got: x.len(),
            context: "data point vs layer fan-in",
        });
    }
    let noise = Normal::new(0.0, sigma_e).map_err(|e| Error::config(e.to_string()))?;
    Ok((0..n)
        .map(|i| {
            let x = &inputs[anchor(i, m)];
            let wx: f64 = weights.row(i).iter().zip(x).map(|(w, v)| w * v).sum();
            let e: f64 = if sigma_e > 0.0 { noise.sample(rng) } else { 0.0 };
            -wx + e.abs()
        })
        .collect())
}

/// `b_i = −w_iᵀ x_{j_i} + |ε_i|` with `ε_i ~ N(0, σ_e²)` drawn from `seed`.
pub fn datadep_biases(weights: &Matrix, inputs: &[Vec<f64>], sigma_e: f64, seed: u64) -> Result<Vec<f64>> {
    biases_with_rng(weights, inputs, sigma_e, &mut seeded(seed))
}

fn gaussian_matrix(rows: usize, cols: usize, sigma: f64, rng: &mut Rng) -> Matrix {
    let mut m = Matrix::zeros(rows, cols);
    if sigma > 0.0 {
        let g = Normal::new(0.0, sigma).expect("finite scale");
        m.as_mut_slice().iter_mut().for_each(|v| *v = g.sample(rng));
    }
    m
}

fn sample_network(arch: &Architecture, inputs: &[Vec<f64>], cfg: &DataDepConfig, rng: &mut Rng) -> Result<NetworkParams> {
    let &[d, n, k] = arch.widths() else {
        return Err(Error::unsupported("the data-dependent scheme is defined for shallow networks only"));
    };
    let weights = gaussian_matrix(n, d, cfg.sigma_in, rng);
    let biases = biases_with_rng(&weights, inputs, cfg.sigma_e, rng)?;
    let out = Layer {
        weights: gaussian_matrix(k, n, cfg.sigma_out, rng),
        biases: vec![0.0; k],
    };
    NetworkParams::from_layers(vec![Layer { weights, biases }, out])
}

/// Shallow network `(d, n, d_out)` with data-dependent first-layer biases and a
/// zero output bias.
pub fn init_datadep(arch: &Architecture, inputs: &[Vec<f64>], cfg: &DataDepConfig, seed: u64) -> Result<NetworkParams> {
    cfg.validate()?;
    sample_network(arch, inputs, cfg, &mut seeded(seed))
}

/// `(s² + Δ²)(tan⁻¹(s/Δ) + π/2) + sΔ`, continuous at `Δ = 0` where it equals `s²π`.
fn pair_term(s: f64, delta: f64) -> f64 {
    if delta == 0.0 {
        return s * s * PI;
    }
    (s * s + delta * delta) * ((s / delta).atan() + PI / 2.0) + s * delta
}

/// Mean over the data of `E‖N(x_k)‖² / d_out` under the data-dependent scheme:
/// `h σ_out² σ_in² / (m π) · Σ_{k,i} [(s² + Δ_{ki}²)(tan⁻¹(s/Δ_{ki}) + π/2) + s Δ_{ki}]`
/// with `Δ_{ki} = ‖x_k − x_i‖` and `h = n/m`.
pub fn expected_q(inputs: &[Vec<f64>], n: usize, cfg: &DataDepConfig) -> f64 {
    let m = inputs.len();
    if m == 0 {
        return 0.0;
    }
    let s = cfg.noise_ratio();
    let h = n as f64 / m as f64;
    let mut acc = 0.0;
    for xk in inputs {
        for xi in inputs {
            acc += pair_term(s, sq_dist(xk, xi).sqrt());
        }
    }
    h * cfg.sigma_out.powi(2) * cfg.sigma_in.powi(2) / (m as f64 * PI) * acc
}

/// Same quantity for weights `N(0, σ_in²)`, `N(0, σ_out²)` and no biases:
/// `n σ_out² σ_in² / (2m) · Σ‖x_k‖²`.
pub fn no_bias_q(inputs: &[Vec<f64>], n: usize, sigma_in: f64, sigma_out: f64) -> f64 {
    let m = inputs.len() as f64;
    let f: f64 = inputs.iter().map(|x| sq_norm(x)).sum();
    n as f64 * sigma_out.powi(2) * sigma_in.powi(2) / (2.0 * m) * f
}

/// [`no_bias_q`] at He scales `σ_in² = 2/d`, `σ_out² = 2/n`.
pub fn he_reference_q(inputs: &[Vec<f64>], n: usize) -> f64 {
    let d = inputs.first().map_or(1, Vec::len) as f64;
    no_bias_q(inputs, n, (2.0 / d).sqrt(), (2.0 / n as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
}

const MC_CHUNK: u64 = 8192;

/// Sampled `(1/m) Σ_k ‖N(x_k)‖² / d_out` over independent initializations.
/// Chunk sums are combined in a fixed order, so the result does not depend on
/// the thread count.
pub fn mc_q(inputs: &[Vec<f64>], arch: &Architecture, cfg: &DataDepConfig, samples: u64, seed: u64) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::config("samples must be at least 1"));
    }
    if !(cfg.sigma_in > 0.0) || !(cfg.sigma_out >= 0.0) || !(cfg.sigma_e >= 0.0) {
        return Err(Error::config(format!("invalid data-dependent parameters {cfg:?}")));
    }
    sample_network(arch, inputs, cfg, &mut substream(seed, 0))?;
    let m = inputs.len() as f64;
    let k = arch.output_dim() as f64;
    let chunks = samples.div_ceil(MC_CHUNK);
    let parts: Vec<Result<(f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let (mut s1, mut s2) = (0.0, 0.0);
            for i in c * MC_CHUNK..((c + 1) * MC_CHUNK).min(samples) {
                let mut rng = substream(seed, i);
                let net = sample_network(arch, inputs, cfg, &mut rng)?;
                let mut q = 0.0;
                for x in inputs {
                    q += sq_norm(&net.forward(x)?);
                }
                q /= m * k;
                s1 += q;
                s2 += q * q;
            }
            Ok((s1, s2))
        })
        .collect();
    let (mut s1, mut s2) = (0.0, 0.0);
    for p in parts {
        let (a, b) = p?;
        s1 += a;
        s2 += b;
    }
    let nf = samples as f64;
    let mean = s1 / nf;
    let var = if samples > 1 { ((s2 - nf * mean * mean) / (nf - 1.0)).max(0.0) } else { 0.0 };
    Ok(McEstimate {
        estimate: mean,
        stderr: (var / nf).sqrt(),
        samples,
    })
}

/// Random inputs in the unit ball of dimension `d`, for tests and demos.
pub fn random_inputs(m: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seeded(seed);
    (0..m)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0) / (d as f64).sqrt()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::{neuron_status, LifeState};
    use proptest::prelude::*;

    #[test]
    fn default_params_example() {
        let x = vec![vec![1.0, 0.0], vec![-1.0, 0.0]];
        let c = default_params(&x, 1.0, 2).unwrap();
        assert!((c.sigma_out.powi(2) - 0.5).abs() < 1e-15);
        assert!((c.sigma_in.powi(2) - 1.0).abs() < 1e-15);
        assert_eq!(c.sigma_e, 0.0);
        let c2 = default_params(&x, 2.0, 2).unwrap();
        assert!((c2.sigma_out.powi(2) - 0.25).abs() < 1e-15);
        assert!(default_params(&[vec![0.3, 0.3], vec![0.3, 0.3]], 1.0, 2).is_err());
    }

    #[test]
    fn fractional_ratio_is_rounded_up() {
        let x = random_inputs(3, 2, 1);
        let c = default_params(&x, 1.5, 2).unwrap();
        assert_eq!(c.width(3), 5);
        assert!((c.h - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(DataDepConfig { h: 10.0 / 3.0, ..c }.width(3), 10);
    }

    #[test]
    fn anchors_have_zero_pre_activation() {
        let x = random_inputs(5, 3, 2);
        let w = gaussian_matrix(10, 3, 1.0, &mut seeded(3));
        let b = datadep_biases(&w, &x, 0.0, 4).unwrap();
        for i in 0..10 {
            let xi = &x[anchor(i, 5)];
            let z: f64 = w.row(i).iter().zip(xi).map(|(a, v)| a * v).sum::<f64>() + b[i];
            assert!(z.abs() < 1e-15);
        }
        // n = 2m: every point anchors two neurons
        let mut uses = [0; 5];
        (0..10).for_each(|i| uses[anchor(i, 5)] += 1);
        assert_eq!(uses, [2; 5]);
        assert!(datadep_biases(&w, &random_inputs(11, 3, 0), 0.0, 0).is_err());
    }

    #[test]
    fn noise_makes_anchors_strictly_active() {
        let x = random_inputs(4, 2, 5);
        let mut rng = seeded(6);
        for _ in 0..10_000 {
            let w = gaussian_matrix(4, 2, 1.0, &mut rng);
            let b = biases_with_rng(&w, &x, 0.3, &mut rng).unwrap();
            for i in 0..4 {
                let z: f64 = w.row(i).iter().zip(&x[i]).map(|(a, v)| a * v).sum::<f64>() + b[i];
                assert!(z > 0.0);
            }
        }
    }

    #[test]
    fn pair_term_is_continuous_at_zero() {
        for s in [0.0, 0.1, 2.0] {
            assert!((pair_term(s, 1e-12) - pair_term(s, 0.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn single_input_cases() {
        let x = vec![vec![0.4, -0.2]];
        let c = DataDepConfig { sigma_in: 1.0, sigma_e: 0.0, sigma_out: 0.7, h: 3.0 };
        assert_eq!(expected_q(&x, 3, &c), 0.0);
        let c = DataDepConfig { sigma_e: 0.5, ..c };
        let want = 3.0 * 0.49 * 0.25;
        assert!((expected_q(&x, 3, &c) - want).abs() < 1e-15);
    }

    #[test]
    fn calibration_matches_he_without_bias() {
        for seed in 0..10 {
            let d = 1 + (seed % 4) as usize;
            let x = random_inputs(6 + seed as usize, d, seed);
            let c = default_params(&x, 2.0, d).unwrap();
            let n = c.width(x.len());
            let got = expected_q(&x, n, &c);
            let want = he_reference_q(&x, n);
            assert!(((got - want) / want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn mc_agrees_with_formula() {
        let x = random_inputs(5, 2, 9);
        let mut c = default_params(&x, 2.0, 2).unwrap();
        c.sigma_e = 0.1;
        let arch = Architecture::new(vec![2, 10, 1]).unwrap();
        let mc = mc_q(&x, &arch, &c, 100_000, 1).unwrap();
        let want = expected_q(&x, 10, &c);
        assert!((mc.estimate - want).abs() < 4.0 * mc.stderr, "{mc:?} vs {want}");
        assert_eq!(mc, mc_q(&x, &arch, &c, 100_000, 1).unwrap());
    }

    #[test]
    fn zero_output_scale_gives_zero() {
        let x = random_inputs(3, 2, 0);
        let c = DataDepConfig { sigma_in: 1.0, sigma_e: 0.2, sigma_out: 0.0, h: 1.0 };
        let arch = Architecture::new(vec![2, 3, 2]).unwrap();
        assert_eq!(mc_q(&x, &arch, &c, 100, 0).unwrap().estimate, 0.0);
    }

    #[test]
    fn no_neuron_is_born_dead() {
        let x = random_inputs(8, 2, 1);
        let c = default_params(&x, 2.0, 2).unwrap();
        let arch = Architecture::new(vec![2, 16, 1]).unwrap();
        let r = crate::dataset::Dataset::enclosing_radius(&x);
        for seed in 0..10_000 {
            let net = init_datadep(&arch, &x, &c, seed).unwrap();
            let dead = neuron_status(&net, r, 0).unwrap().iter().filter(|s| s.state == LifeState::PermanentlyDead).count();
            assert_eq!(dead, 0);
        }
    }

    #[test]
    fn deep_architectures_are_rejected() {
        let x = random_inputs(2, 1, 0);
        let c = default_params(&x, 1.0, 1).unwrap();
        assert!(init_datadep(&Architecture::new(vec![1, 2, 2, 1]).unwrap(), &x, &c, 0).is_err());
    }

    proptest! {
        #[test]
        fn sigma_out_is_scale_free(c in 0.01f64..100.0, seed in 0u64..1000) {
            let x = random_inputs(5, 3, seed);
            let y: Vec<Vec<f64>> = x.iter().map(|p| p.iter().map(|v| v * c).collect()).collect();
            let a = default_params(&x, 1.0, 3).unwrap().sigma_out;
            let b = default_params(&y, 1.0, 3).unwrap().sigma_out;
            prop_assert!(((a - b) / a).abs() < 1e-12);
        }
    }
}
