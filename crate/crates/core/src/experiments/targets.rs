use std::f64::consts::PI;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::seeded;

/// Target functions used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TargetId {
    /// `|x|` on `[−√3, √3]`.
    #[serde(rename = "f1")]
    F1,
    /// `|x| − √3/(√3 − 1) (φ(x − 1) + φ(−x − 1))` on `[−√3, √3]`.
    #[serde(rename = "f2")]
    F2,
    /// `sin(πx₁) cos(πx₂) e^{−x₁² − x₂²}` on `[−1, 1]²`.
    #[serde(rename = "f3")]
    F3,
    /// `sin(π(x₁ − x₂)) e^{x₁ + x₂}` on `[−1, 1]²`.
    #[serde(rename = "f4")]
    F4,
    /// `sin(4πx) + sin(6πx)` on `[−1, 1]`.
    #[serde(rename = "sine-sum")]
    SineSum,
}

fn relu(x: f64) -> f64 {
    x.max(0.0)
}

impl TargetId {
    pub const ALL: [TargetId; 5] = [TargetId::F1, TargetId::F2, TargetId::F3, TargetId::F4, TargetId::SineSum];

    pub fn id(self) -> &'static str {
        match self {
            TargetId::F1 => "f1",
            TargetId::F2 => "f2",
            TargetId::F3 => "f3",
            TargetId::F4 => "f4",
            TargetId::SineSum => "sine-sum",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.id() == s)
            .ok_or_else(|| Error::config(format!("unknown target '{s}'")))
    }

    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            TargetId::F1 => x[0].abs(),
            TargetId::F2 => {
                let c = 3f64.sqrt() / (3f64.sqrt() - 1.0);
                x[0].abs() - c * relu(x[0] - 1.0) - c * relu(-x[0] - 1.0)
            }
            TargetId::F3 => (PI * x[0]).sin() * (PI * x[1]).cos() * (-x[0] * x[0] - x[1] * x[1]).exp(),
            TargetId::F4 => (PI * (x[0] - x[1])).sin() * (x[0] + x[1]).exp(),
            TargetId::SineSum => (4.0 * PI * x[0]).sin() + (6.0 * PI * x[0]).sin(),
        }
    }

    pub fn input_dim(self) -> usize {
        match self {
            TargetId::F3 | TargetId::F4 => 2,
            _ => 1,
        }
    }

    /// Inputs live in the cube `[−a, a]^d`.
    pub fn half_width(self) -> f64 {
        match self {
            TargetId::F1 | TargetId::F2 => 3f64.sqrt(),
            _ => 1.0,
        }
    }

    /// Radius of the ball enclosing the input cube.
    pub fn domain_radius(self) -> f64 {
        self.half_width() * (self.input_dim() as f64).sqrt()
    }

    /// Width of the smallest shallow network representing the target exactly.
    pub fn minimal_width(self) -> Option<usize> {
        match self {
            TargetId::F1 => Some(2),
            TargetId::F2 => Some(4),
            _ => None,
        }
    }

    /// `count` points drawn uniformly from the input cube.
    pub fn uniform_data(self, count: usize, seed: u64) -> Result<Dataset> {
        let mut rng = seeded(seed);
        let a = self.half_width();
        let xs = (0..count)
            .map(|_| (0..self.input_dim()).map(|_| rng.random_range(-a..=a)).collect())
            .collect();
        Dataset::from_fn(xs, self.domain_radius(), |x| self.eval(x))
    }

    /// `count` equidistant points on `[−a, a]` (scalar targets only).
    pub fn grid_data(self, count: usize) -> Result<Dataset> {
        if self.input_dim() != 1 || count < 2 {
            return Err(Error::config("grid data needs a scalar target and at least two points"));
        }
        let a = self.half_width();
        let xs = (0..count).map(|i| vec![-a + 2.0 * a * i as f64 / (count - 1) as f64]).collect();
        Dataset::from_fn(xs, self.domain_radius(), |x| self.eval(x))
    }
}
