//! ReLU networks: representation, initialization schemes, exact evaluation,
//! neuron life-state classification, gradients and training.

mod grad;
mod init;
mod network;
mod piecewise;
mod status;
mod train;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use grad::{loss_grad, mse_loss, rmse};
pub use init::{init_network, sample_unit_sphere};
pub(crate) use init::init_with_rng;
pub use network::{Layer, NetworkParams, Trace};
pub use piecewise::{eval_piecewise_1d, PiecewiseEval};
pub use status::{
    layer_counts, neuron_status, status_counts, LayerCounts, LifeState, NeuronStatus,
    DEFAULT_PROBE_COUNT,
};
pub use train::{train, HistoryPoint, OptimizerConfig, OptimizerMethod, TrainOutcome};

/// Layer widths `(n₀, n₁, …, n_L)`; `n₀` is the input dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Architecture {
    widths: Vec<usize>,
}

impl Architecture {
    pub fn new(widths: impl Into<Vec<usize>>) -> Result<Self> {
        let widths = widths.into();
        if widths.len() < 2 {
            return Err(Error::config("an architecture needs an input and an output layer"));
        }
        if widths.contains(&0) {
            return Err(Error::config(format!("all widths must be positive: {widths:?}")));
        }
        Ok(Self { widths })
    }

    /// Shallow network `(d_in, n, d_out)`.
    pub fn shallow(d_in: usize, width: usize, d_out: usize) -> Result<Self> {
        Self::new(vec![d_in, width, d_out])
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().unwrap()
    }

    /// Number of affine layers `L`.
    pub fn depth(&self) -> usize {
        self.widths.len() - 1
    }

    /// Widths of the hidden layers `n₁ … n_{L-1}`.
    pub fn hidden(&self) -> &[usize] {
        &self.widths[1..self.widths.len() - 1]
    }
}

/// How one layer's weights and biases are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitScheme {
    /// `W ~ N(0, σ²)`, `b = 0`.
    NormalNoBias { sigma: f64 },
    /// `W ~ N(0, σ_w²)`, `b ~ N(0, σ_b²)`.
    NormalWithBias { sigma_w: f64, sigma_b: f64 },
    /// `W ~ N(0, 2/fan_in)`, `b = 0`.
    HeNoBias,
    /// Rows of `[W, b] ~ N(0, 2/(fan_in + 1))`.
    HeWithBias,
    /// Rows of `W` uniform on the unit sphere of dimension `fan_in`, `b = 0`.
    UnitSphereNoBias,
    /// Rows of `[W, b]` uniform on the unit sphere of dimension `fan_in + 1`.
    UnitSphereWithBias,
    /// `W ~ N(0, σ_in²)` with biases anchored at training points; see [`crate::datadep`].
    DataDependent {
        sigma_in: f64,
        sigma_e: f64,
        sigma_out: f64,
    },
}

impl InitScheme {
    pub fn has_bias(&self) -> bool {
        matches!(
            self,
            InitScheme::NormalWithBias { .. }
                | InitScheme::HeWithBias
                | InitScheme::UnitSphereWithBias
                | InitScheme::DataDependent { .. }
        )
    }

    /// True when the direction of each row `[w, b]` is uniform on the sphere,
    /// which is what the born-dead formulas assume.
    pub fn is_isotropic_with_bias(&self) -> bool {
        match *self {
            InitScheme::HeWithBias | InitScheme::UnitSphereWithBias => true,
            InitScheme::NormalWithBias { sigma_w, sigma_b } => sigma_w == sigma_b,
            _ => false,
        }
    }

    /// Radius at which an isotropic neuron has the same dead probability as this
    /// scheme on `B_r(0)`: `r σ_w / σ_b` for unequal normal scales, `r` otherwise.
    pub fn effective_radius(&self, r: f64) -> Option<f64> {
        match *self {
            InitScheme::HeWithBias | InitScheme::UnitSphereWithBias => Some(r),
            InitScheme::NormalWithBias { sigma_w, sigma_b } => Some(r * sigma_w / sigma_b),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            InitScheme::NormalNoBias { sigma } => sigma > 0.0 && sigma.is_finite(),
            InitScheme::NormalWithBias { sigma_w, sigma_b } => {
                sigma_w > 0.0 && sigma_b > 0.0 && sigma_w.is_finite() && sigma_b.is_finite()
            }
            InitScheme::DataDependent {
                sigma_in,
                sigma_e,
                sigma_out,
            } => {
                sigma_in > 0.0
                    && sigma_out > 0.0
                    && sigma_e >= 0.0
                    && sigma_in.is_finite()
                    && sigma_e.is_finite()
                    && sigma_out.is_finite()
            }
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!("invalid scheme parameters: {self:?}")))
        }
    }

    /// Short label used in CSV output.
    pub fn tag(&self) -> &'static str {
        match self {
            InitScheme::NormalNoBias { .. } => "normal-no-bias",
            InitScheme::NormalWithBias { .. } => "normal-with-bias",
            InitScheme::HeNoBias => "he-no-bias",
            InitScheme::HeWithBias => "he-with-bias",
            InitScheme::UnitSphereNoBias => "sphere-no-bias",
            InitScheme::UnitSphereWithBias => "sphere-with-bias",
            InitScheme::DataDependent { .. } => "data-dependent",
        }
    }

    /// Parses the labels produced by [`InitScheme::tag`] (parameter-free schemes only,
    /// normal schemes get unit scales).
    pub fn from_tag(tag: &str) -> Result<Self> {
        Ok(match tag {
            "normal-no-bias" => InitScheme::NormalNoBias { sigma: 1.0 },
            "normal-with-bias" => InitScheme::NormalWithBias {
                sigma_w: 1.0,
                sigma_b: 1.0,
            },
            "he-no-bias" => InitScheme::HeNoBias,
            "he-with-bias" => InitScheme::HeWithBias,
            "sphere-no-bias" => InitScheme::UnitSphereNoBias,
            "sphere-with-bias" => InitScheme::UnitSphereWithBias,
            other => return Err(Error::config(format!("unknown scheme tag '{other}'"))),
        })
    }
}
