use rand_distr::{Distribution, StandardNormal};

use super::{Architecture, InitScheme, Layer, NetworkParams};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{seeded, Rng};

/// Draws a network whose layer `t` follows `schemes[t]`.
///
/// A `DataDependent` first layer only gets its weights here (biases are zero);
/// [`crate::datadep`] fills in the anchored biases.
pub fn init_network(arch: &Architecture, schemes: &[InitScheme], seed: u64) -> Result<NetworkParams> {
    let mut rng = seeded(seed);
    init_with_rng(arch, schemes, &mut rng)
}

pub(crate) fn init_with_rng(
    arch: &Architecture,
    schemes: &[InitScheme],
    rng: &mut Rng,
) -> Result<NetworkParams> {
    if schemes.len() != arch.depth() {
        return Err(Error::DimensionMismatch {
            expected: arch.depth(),
            got: schemes.len(),
            context: "one init scheme per layer",
        });
    }
    let mut layers = Vec::with_capacity(arch.depth());
    for (t, (w, scheme)) in arch.widths().windows(2).zip(schemes).enumerate() {
        scheme.validate()?;
        if matches!(scheme, InitScheme::DataDependent { .. }) && (t != 0 || arch.depth() != 2) {
            return Err(Error::unsupported(
                "the data-dependent scheme applies to the first layer of a shallow network only",
            ));
        }
        layers.push(draw_layer(w[0], w[1], scheme, rng));
    }
    NetworkParams::from_layers(layers)
}

fn normal(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Uniform point on the unit sphere in `ℝ^dim`.
pub fn sample_unit_sphere(dim: usize, rng: &mut impl rand::Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

pub(crate) fn draw_layer(fan_in: usize, fan_out: usize, scheme: &InitScheme, rng: &mut Rng) -> Layer {
    let mut weights = Matrix::zeros(fan_out, fan_in);
    let mut biases = vec![0.0; fan_out];
    for i in 0..fan_out {
        let row = weights.row_mut(i);
        match *scheme {
            InitScheme::NormalNoBias { sigma } => {
                row.iter_mut().for_each(|w| *w = sigma * normal(rng));
            }
            InitScheme::NormalWithBias { sigma_w, sigma_b } => {
                row.iter_mut().for_each(|w| *w = sigma_w * normal(rng));
                biases[i] = sigma_b * normal(rng);
            }
            InitScheme::HeNoBias => {
                let s = (2.0 / fan_in as f64).sqrt();
                row.iter_mut().for_each(|w| *w = s * normal(rng));
            }
            InitScheme::HeWithBias => {
                let s = (2.0 / (fan_in as f64 + 1.0)).sqrt();
                row.iter_mut().for_each(|w| *w = s * normal(rng));
                biases[i] = s * normal(rng);
            }
            InitScheme::UnitSphereNoBias => {
                let v = sample_unit_sphere(fan_in, rng);
                row.copy_from_slice(&v);
            }
            InitScheme::UnitSphereWithBias => {
                let v = sample_unit_sphere(fan_in + 1, rng);
                row.copy_from_slice(&v[..fan_in]);
                biases[i] = v[fan_in];
            }
            InitScheme::DataDependent { sigma_in, .. } => {
                row.iter_mut().for_each(|w| *w = sigma_in * normal(rng));
            }
        }
    }
    Layer { weights, biases }
}
