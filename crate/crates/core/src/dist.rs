//! Distribution of the number of active neurons per hidden layer.
//!
//! `π_t = π_{t-1} P_t`, where row `i` of the stochastic matrix `P_t` is the law
//! of the active count in layer `t` given `i` active neurons in layer `t − 1`.
//! The first layer is exact for every input dimension; the second-layer
//! matrices are available for scalar inputs and four initialization pairs.
//! Anything else is covered by [`mc_active_dist`].

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::Serialize;

use crate::bdp::bdp_exact;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::mathkit::{binomial, binomial_pmf, integrate, stable_sum};
use crate::netcore::{init_with_rng, neuron_status, Architecture, InitScheme, LifeState, DEFAULT_PROBE_COUNT};
use crate::output::Table;
use crate::rng::substream;

const SUM_TOL: f64 = 1e-10;

/// Probability mass over `0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbVector {
    probs: Vec<f64>,
}

impl ProbVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::domain("a probability vector needs at least one entry"));
        }
        if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::domain("probabilities must be finite and nonnegative"));
        }
        let s = stable_sum(probs.iter().copied());
        if (s - 1.0).abs() > SUM_TOL {
            return Err(Error::domain(format!("probabilities sum to {s}, not 1")));
        }
        Ok(Self { probs })
    }

    /// Point mass at `at` on `0..=n`.
    pub fn point_mass(n: usize, at: usize) -> Self {
        let mut probs = vec![0.0; n + 1];
        probs[at] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Largest count `n`.
    pub fn support_max(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn mean(&self) -> f64 {
        stable_sum(self.probs.iter().enumerate().map(|(k, p)| k as f64 * p))
    }

    /// `Pr(count ≥ m)`.
    pub fn tail(&self, m: usize) -> f64 {
        stable_sum(self.probs.iter().skip(m).copied())
    }

    /// Total-variation distance `½ Σ |p_k − q_k|`; shorter vectors are padded with zeros.
    pub fn tv_distance(&self, other: &[f64]) -> f64 {
        let n = self.probs.len().max(other.len());
        0.5 * stable_sum((0..n).map(|k| {
            let a = self.probs.get(k).copied().unwrap_or(0.0);
            let b = other.get(k).copied().unwrap_or(0.0);
            (a - b).abs()
        }))
    }
}

/// Row-stochastic matrix of shape `(n_{t-1}+1) × (n_t+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochMatrix {
    m: Matrix,
}

impl StochMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        for i in 0..m.rows() {
            let row = m.row(i);
            if row.iter().any(|p| !(*p >= -1e-15 && *p <= 1.0 + 1e-12)) {
                return Err(Error::domain(format!("row {i} has an entry outside [0, 1]")));
            }
            let s = stable_sum(row.iter().copied());
            if (s - 1.0).abs() > SUM_TOL {
                return Err(Error::domain(format!("row {i} sums to {s}, not 1")));
            }
        }
        Ok(Self { m })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: Matrix::identity(n + 1),
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn rows(&self) -> usize {
        self.m.rows()
    }

    pub fn cols(&self) -> usize {
        self.m.cols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.m.row(i)
    }

    /// Product of two stochastic matrices.
    pub fn then(&self, next: &StochMatrix) -> Result<StochMatrix> {
        Ok(StochMatrix {
            m: self.m.matmul(&next.m)?,
        })
    }
}

/// Law of the active count in layer 1 on `B_r(0)`.
///
/// Without bias every neuron is active. With an isotropic biased scheme the count
/// is `Binomial(n₁, 1 − p̂_d(r))`; unequal normal scales shift the radius to `r σ_w / σ_b`.
pub fn pi1(n1: usize, d: u32, r: f64, scheme: &InitScheme) -> Result<ProbVector> {
    scheme.validate()?;
    if !scheme.has_bias() {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::domain(format!("radius must be positive and finite, got {r}")));
        }
        return Ok(ProbVector::point_mass(n1, n1));
    }
    let r_eff = scheme
        .effective_radius(r)
        .ok_or_else(|| Error::unsupported(format!("no closed-form first-layer law for '{}'", scheme.tag())))?;
    let p = bdp_exact(d, r_eff)?;
    ProbVector::new(binomial_pmf(n1 as u64, 1.0 - p))
}

/// The four initialization pairs with a closed-form second-layer matrix (scalar input).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum P2Case {
    /// Sphere without bias, then normal without bias.
    #[serde(rename = "1.1")]
    NoBiasNoBias,
    /// Sphere without bias, then normal with bias.
    #[serde(rename = "1.2")]
    NoBiasWithBias,
    /// Sphere with bias (`n₁ = 1`), then normal without bias.
    #[serde(rename = "2.1")]
    WithBiasNoBias,
    /// Sphere with bias (`n₁ = 1`), then normal with bias.
    #[serde(rename = "2.2")]
    WithBiasWithBias,
}

impl P2Case {
    pub const ALL: [P2Case; 4] = [
        P2Case::NoBiasNoBias,
        P2Case::NoBiasWithBias,
        P2Case::WithBiasNoBias,
        P2Case::WithBiasWithBias,
    ];

    pub fn id(self) -> &'static str {
        match self {
            P2Case::NoBiasNoBias => "1.1",
            P2Case::NoBiasWithBias => "1.2",
            P2Case::WithBiasNoBias => "2.1",
            P2Case::WithBiasWithBias => "2.2",
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        P2Case::ALL
            .into_iter()
            .find(|c| c.id() == id)
            .ok_or_else(|| Error::unsupported(format!("unknown case '{id}', expected one of 1.1, 1.2, 2.1, 2.2")))
    }

    /// Whether the first layer carries a bias.
    pub fn first_layer_bias(self) -> bool {
        matches!(self, P2Case::WithBiasNoBias | P2Case::WithBiasWithBias)
    }

    /// Representative schemes for the two hidden layers.
    pub fn schemes(self) -> (InitScheme, InitScheme) {
        let s1 = if self.first_layer_bias() {
            InitScheme::UnitSphereWithBias
        } else {
            InitScheme::UnitSphereNoBias
        };
        let s2 = match self {
            P2Case::NoBiasNoBias | P2Case::WithBiasNoBias => InitScheme::HeNoBias,
            _ => InitScheme::HeWithBias,
        };
        (s1, s2)
    }

    /// Matches a scheme pair to a case.
    ///
    /// In one dimension a bias-free first layer only contributes signs, so any
    /// bias-free scheme works for case 1.1, but 1.2 needs the unit-sphere draw
    /// (`|w| = 1`). Biased layers must be isotropic in `(w, b)`.
    pub fn classify(s1: &InitScheme, s2: &InitScheme) -> Result<Self> {
        let bad = || {
            Error::unsupported(format!(
                "no closed-form second-layer matrix for ('{}', '{}')",
                s1.tag(),
                s2.tag()
            ))
        };
        let l2_nobias = !s2.has_bias();
        let l2_iso = s2.is_isotropic_with_bias();
        if !s1.has_bias() {
            if l2_nobias {
                Ok(P2Case::NoBiasNoBias)
            } else if l2_iso && *s1 == InitScheme::UnitSphereNoBias {
                Ok(P2Case::NoBiasWithBias)
            } else {
                Err(bad())
            }
        } else if s1.is_isotropic_with_bias() {
            if l2_nobias {
                Ok(P2Case::WithBiasNoBias)
            } else if l2_iso {
                Ok(P2Case::WithBiasWithBias)
            } else {
                Err(bad())
            }
        } else {
            Err(bad())
        }
    }
}

/// `sin(tan⁻¹ x)`
fn sin_atan(x: f64) -> f64 {
    x / (1.0 + x * x).sqrt()
}

/// Conditional dead probability of a biased second-layer neuron when `s` of the
/// `n₁` bias-free first-layer neurons point right (case 1.2).
///
/// The angle splitting the two integrals is `tan⁻¹(√s / √(n₁ − s))`, the polar
/// angle of the vector `(√s, √(n₁ − s))` whose coordinates scale the two slopes.
pub fn p2_given_split(n1: usize, s: usize, r: f64) -> f64 {
    assert!(s <= n1);
    let a = (s as f64).sqrt();
    let c = ((n1 - s) as f64).sqrt();
    let alpha = a.atan2(c);
    let first = integrate(|t| sin_atan(r * a * t.cos()), FRAC_PI_2, PI + alpha);
    let second = integrate(|t| sin_atan(r * c * t.sin()), PI + alpha, 2.0 * PI);
    0.5 + (first + second) / (4.0 * PI)
}

/// Conditional dead probability of a biased second-layer neuron behind one
/// active biased first-layer neuron, as a function of that neuron's angle
/// `ω ∈ (0, π/2 + tan⁻¹ r)` (case 2.2).
pub fn p2_given_angle(omega: f64, r: f64) -> f64 {
    let ar = r.atan();
    let c = (r * r + 1.0).sqrt();
    let g = |x: f64| (1.0 / (c * x.cos())).atan();
    if omega >= FRAC_PI_2 - ar {
        0.25 + g(omega - ar) / (2.0 * PI)
    } else {
        0.25 + (g(omega - ar) + (c * (omega + ar).cos()).atan()) / (2.0 * PI)
    }
}

/// `E_s[f(𝔭₂(s))]` with `s ~ Binomial(n₁, ½)`, as an exact finite sum.
pub fn expect_over_split(n1: usize, r: f64, f: impl Fn(f64) -> f64) -> f64 {
    let w = binomial_pmf(n1 as u64, 0.5);
    stable_sum((0..=n1).map(|s| w[s] * f(p2_given_split(n1, s, r))))
}

/// `E_ω[f(𝔭₂(ω))]` with `ω ~ Unif(0, π/2 + tan⁻¹ r)`, split at the branch point.
pub fn expect_over_angle(r: f64, f: impl Fn(f64) -> f64) -> f64 {
    let ar = r.atan();
    let len = FRAC_PI_2 + ar;
    let h = |w: f64| f(p2_given_angle(w, r));
    (integrate(h, 0.0, FRAC_PI_2 - ar) + integrate(h, FRAC_PI_2 - ar, len)) / len
}

/// Binomial mixture row `C(n₂, j) E[(1 − p)^j p^{n₂ − j}]`.
fn mixture_row(n2: usize, expect: impl Fn(&dyn Fn(f64) -> f64) -> f64) -> Vec<f64> {
    (0..=n2)
        .map(|j| {
            let c = binomial(n2 as u64, j as u64);
            c * expect(&|p: f64| (1.0 - p).powi(j as i32) * p.powi((n2 - j) as i32))
        })
        .collect()
}

/// Active row of the second-layer matrix for `case` (the row where every
/// first-layer neuron that can be active is active).
pub fn p2_active_row(case: P2Case, n1: usize, n2: usize, r: f64) -> Vec<f64> {
    match case {
        P2Case::NoBiasNoBias => {
            let a = 1.0 - 2f64.powi(1 - n1 as i32);
            let b = 2f64.powi(1 - (n1 + n2) as i32);
            (0..=n2)
                .map(|j| binomial(n2 as u64, j as u64) * (a * 3f64.powi(j as i32) / 4f64.powi(n2 as i32) + b))
                .collect()
        }
        P2Case::NoBiasWithBias => mixture_row(n2, |f| expect_over_split(n1, r, f)),
        P2Case::WithBiasNoBias => binomial_pmf(n2 as u64, 0.5),
        P2Case::WithBiasWithBias => mixture_row(n2, |f| expect_over_angle(r, f)),
    }
}

/// Second-layer stochastic matrix for a scalar-input network on `B_r(0)`.
///
/// Rows for fewer active first-layer neurons than the case allows are `[1, 0, …, 0]`.
pub fn p2_matrix(n1: usize, n2: usize, r: f64, scheme1: &InitScheme, scheme2: &InitScheme) -> Result<StochMatrix> {
    let case = P2Case::classify(scheme1, scheme2)?;
    p2_matrix_for_case(case, n1, n2, r)
}

pub fn p2_matrix_for_case(case: P2Case, n1: usize, n2: usize, r: f64) -> Result<StochMatrix> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::domain("widths must be positive"));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("radius must be positive and finite, got {r}")));
    }
    if case.first_layer_bias() && n1 != 1 {
        return Err(Error::unsupported(format!("case {} needs n1 = 1, got {n1}", case.id())));
    }
    let mut m = Matrix::zeros(n1 + 1, n2 + 1);
    for i in 0..n1 {
        m[(i, 0)] = 1.0;
    }
    for (j, v) in p2_active_row(case, n1, n2, r).into_iter().enumerate() {
        m[(n1, j)] = v;
    }
    StochMatrix::new(m)
}

/// `π₀ P₁ ⋯ P_j`.
pub fn compose_dist(pi0: &ProbVector, matrices: &[StochMatrix]) -> Result<ProbVector> {
    let mut v = pi0.probs.clone();
    for (k, p) in matrices.iter().enumerate() {
        if p.rows() != v.len() {
            return Err(Error::DimensionMismatch {
                expected: v.len(),
                got: p.rows(),
                context: if k == 0 { "first matrix rows" } else { "matrix chain" },
            });
        }
        v = p.m.left_mul_vec(&v)?;
    }
    ProbVector::new(v)
}

/// Empirical law of the active count in one hidden layer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalLayer {
    /// Hidden layer, starting at 1.
    pub layer: usize,
    pub counts: Vec<u64>,
    pub probs: Vec<f64>,
    /// `√(p(1 − p)/N)` per entry.
    pub stderr: Vec<f64>,
}

impl EmpiricalLayer {
    pub fn max_stderr(&self) -> f64 {
        self.stderr.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McActiveDist {
    pub samples: u64,
    pub layers: Vec<EmpiricalLayer>,
}

impl McActiveDist {
    /// CSV-ready rows `layer, count, probability, stderr`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["layer", "count", "probability", "stderr"]);
        for l in &self.layers {
            for (k, (p, s)) in l.probs.iter().zip(&l.stderr).enumerate() {
                t.push(vec![l.layer.into(), k.into(), (*p).into(), (*s).into()]);
            }
        }
        t
    }
}

/// Samples that are classified in one go, to bound memory.
const MC_CHUNK: u64 = 4096;

/// Draws `samples` independent networks and histograms the active count of every
/// hidden layer (per [`neuron_status`]). Sample `k` uses stream `k` of `seed`, so
/// the result does not depend on thread scheduling.
pub fn mc_active_dist(arch: &Architecture, schemes: &[InitScheme], r: f64, samples: u64, seed: u64) -> Result<McActiveDist> {
    if samples == 0 {
        return Err(Error::config("samples must be at least 1"));
    }
    if schemes.iter().any(|s| matches!(s, InitScheme::DataDependent { .. })) {
        return Err(Error::unsupported("the data-dependent scheme needs training data"));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("radius must be positive and finite, got {r}")));
    }
    // surface configuration errors before going parallel
    init_with_rng(arch, schemes, &mut substream(seed, 0))?;
    let hidden = arch.hidden().to_vec();
    let empty = || hidden.iter().map(|&n| vec![0u64; n + 1]).collect::<Vec<_>>();
    let merge = |mut a: Vec<Vec<u64>>, b: Vec<Vec<u64>>| {
        for (x, y) in a.iter_mut().zip(b) {
            x.iter_mut().zip(y).for_each(|(u, v)| *u += v);
        }
        a
    };
    let chunks = samples.div_ceil(MC_CHUNK);
    let hist = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<Vec<Vec<u64>>> {
            let mut h = empty();
            for k in c * MC_CHUNK..((c + 1) * MC_CHUNK).min(samples) {
                let net = init_with_rng(arch, schemes, &mut substream(seed, k))?;
                let st = neuron_status(&net, r, DEFAULT_PROBE_COUNT)?;
                let mut active = vec![0usize; hidden.len()];
                for s in st.iter().filter(|s| s.state == LifeState::Active) {
                    active[s.layer - 1] += 1;
                }
                for (t, a) in active.into_iter().enumerate() {
                    h[t][a] += 1;
                }
            }
            Ok(h)
        })
        .try_reduce(empty, |a, b| Ok(merge(a, b)))?;
    let nf = samples as f64;
    let layers = hist
        .into_iter()
        .enumerate()
        .map(|(t, counts)| {
            let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / nf).collect();
            let stderr = probs.iter().map(|p| (p * (1.0 - p) / nf).sqrt()).collect();
            EmpiricalLayer {
                layer: t + 1,
                counts,
                probs,
                stderr,
            }
        })
        .collect();
    Ok(McActiveDist { samples, layers })
}
