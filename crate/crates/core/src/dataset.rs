//! Training pairs `(x_i, y_i)` with the radius of the ball that holds the inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::output::fmt17;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
    pub r: f64,
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl Dataset {
    /// Checks shapes and that every input lies in `B_r(0)`.
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<Vec<f64>>, r: f64) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::config("a dataset needs at least one point"));
        }
        if inputs.len() != targets.len() {
            return Err(Error::DimensionMismatch {
                expected: inputs.len(),
                got: targets.len(),
                context: "targets per input",
            });
        }
        let d = inputs[0].len();
        let k = targets[0].len();
        if d == 0 || k == 0 {
            return Err(Error::config("inputs and targets need at least one component"));
        }
        for (x, y) in inputs.iter().zip(&targets) {
            if x.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: x.len(), context: "input dimension" });
            }
            if y.len() != k {
                return Err(Error::DimensionMismatch { expected: k, got: y.len(), context: "target dimension" });
            }
            if x.iter().chain(y).any(|v| !v.is_finite()) {
                return Err(Error::config("dataset contains a non-finite value"));
            }
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::domain(format!("radius must be positive and finite, got {r}")));
        }
        let rmax = Self::enclosing_radius(&inputs);
        if rmax > r * (1.0 + 1e-12) {
            return Err(Error::domain(format!("input of norm {rmax} lies outside B_{r}(0)")));
        }
        Ok(Self { inputs, targets, r })
    }

    /// Like [`Dataset::new`] with `r` set to the largest input norm (1 if all inputs are 0).
    pub fn enclosed(inputs: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> Result<Self> {
        let r = Self::enclosing_radius(&inputs);
        Self::new(inputs, targets, if r > 0.0 { r } else { 1.0 })
    }

    /// Scalar-target dataset `y_i = f(x_i)`.
    pub fn from_fn(inputs: Vec<Vec<f64>>, r: f64, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let targets = inputs.iter().map(|x| vec![f(x)]).collect();
        Self::new(inputs, targets, r)
    }

    pub fn enclosing_radius(inputs: &[Vec<f64>]) -> f64 {
        inputs.iter().map(|x| norm(x)).fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs[0].len()
    }

    pub fn output_dim(&self) -> usize {
        self.targets[0].len()
    }

    /// Header `x1,…,xd,y` (or `y1,…,yk` for vector targets), one row per point.
    pub fn to_csv(&self) -> String {
        let d = self.input_dim();
        let k = self.output_dim();
        let mut cols: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
        if k == 1 {
            cols.push("y".into());
        } else {
            cols.extend((1..=k).map(|i| format!("y{i}")));
        }
        let mut s = cols.join(",");
        s.push('\n');
        for (x, y) in self.inputs.iter().zip(&self.targets) {
            let row: Vec<String> = x.iter().chain(y).map(|&v| fmt17(v)).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    /// Parses [`Dataset::to_csv`] output; `r` defaults to the enclosing radius.
    pub fn from_csv(text: &str, r: Option<f64>) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::config("empty CSV"))?;
        let names: Vec<&str> = header.split(',').map(str::trim).collect();
        let d = names.iter().filter(|n| n.starts_with('x')).count();
        let k = names.iter().filter(|n| n.starts_with('y')).count();
        if d == 0 || k == 0 || d + k != names.len() || names[..d].iter().any(|n| !n.starts_with('x')) {
            return Err(Error::config(format!("CSV header must be x columns followed by y columns: '{header}'")));
        }
        let mut inputs = Vec::new();
        let mut targets = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let vals = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::config(format!("CSV row {}: {e}", lineno + 2)))?;
            if vals.len() != d + k {
                return Err(Error::config(format!("CSV row {} has {} fields, expected {}", lineno + 2, vals.len(), d + k)));
            }
            inputs.push(vals[..d].to_vec());
            targets.push(vals[d..].to_vec());
        }
        match r {
            Some(r) => Self::new(inputs, targets, r),
            None => Self::enclosed(inputs, targets),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Dataset = serde_json::from_str(text)?;
        Self::new(raw.inputs, raw.targets, raw.r)
    }
}
