//! Special functions, quadrature and log-domain combinatorics.
//!
//! Everything here is pure. The quadrature is a composite Gauss-Legendre rule of
//! fixed order per panel; panels are doubled until two successive estimates agree.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Order of the per-panel Gauss-Legendre rule used by [`integrate`].
pub const PANEL_ORDER: usize = 32;

/// Default stopping threshold for panel doubling.
pub const DEFAULT_TOL: f64 = 1e-13;

const MAX_PANELS: usize = 1 << 14;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl QuadratureRule {
    /// Builds the `order`-point Gauss-Legendre rule by Newton iteration on `P_order`.
    pub fn gauss_legendre(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess for the i-th largest root.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self {
            nodes,
            weights,
            order,
        }
    }

    /// Applies the rule to `f` on `[a, b]`.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = NeumaierSum::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(mid + half * x));
        }
        acc.total() * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let (p, pm1) = if n == 0 { (1.0, 0.0) } else { (p1, p0) };
    let d = n as f64 * (x * p - pm1) / (x * x - 1.0);
    (p, d)
}

thread_local! {
    static PANEL_RULE: QuadratureRule = QuadratureRule::gauss_legendre(PANEL_ORDER);
}

/// Composite Gauss-Legendre integral of a smooth `f` over `[a, b]`.
///
/// Panels double until successive estimates differ by less than `tol`
/// (absolute, relaxed to relative for large integrals).
pub fn integrate_tol<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    PANEL_RULE.with(|rule| {
        let mut panels = 1usize;
        let mut prev = composite(rule, &f, a, b, panels);
        loop {
            panels *= 2;
            let cur = composite(rule, &f, a, b, panels);
            if (cur - prev).abs() < tol.max(tol * cur.abs()) || panels >= MAX_PANELS {
                return cur;
            }
            prev = cur;
        }
    })
}

/// [`integrate_tol`] at [`DEFAULT_TOL`].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    integrate_tol(f, a, b, DEFAULT_TOL)
}

fn composite<F: Fn(f64) -> f64>(rule: &QuadratureRule, f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = NeumaierSum::default();
    for k in 0..panels {
        let lo = a + h * k as f64;
        let hi = if k + 1 == panels { b } else { lo + h };
        acc.add(rule.apply(f, lo, hi));
    }
    acc.total()
}

/// `Γ((d+1)/2) / Γ(d/2)`, via a log-gamma difference so large `d` does not overflow.
pub fn gamma_ratio(d: u32) -> f64 {
    assert!(d >= 1, "gamma_ratio needs d >= 1");
    let d = d as f64;
    (ln_gamma(0.5 * (d + 1.0)) - ln_gamma(0.5 * d)).exp()
}

/// `∫₀^alpha (sin u)^(d-1) du` for `alpha ∈ [0, π]`.
pub fn integrate_sin_power(alpha: f64, d: u32) -> Result<f64> {
    if !(0.0..=PI).contains(&alpha) {
        return Err(Error::domain(format!("alpha = {alpha} outside [0, pi]")));
    }
    if d == 0 {
        return Err(Error::domain("d must be at least 1"));
    }
    Ok(match d {
        1 => alpha,
        2 => 1.0 - alpha.cos(),
        _ => {
            let k = (d - 1) as i32;
            integrate(|u| u.sin().powi(k), 0.0, alpha)
        }
    })
}

/// Natural log of the multinomial coefficient `n! / (k₁! ⋯ k_j!)`.
pub fn log_multinomial(n: u64, parts: &[u64]) -> Result<f64> {
    let total: u64 = parts.iter().sum();
    if total != n {
        return Err(Error::InvalidPartition {
            n,
            parts: parts.to_vec(),
        });
    }
    let mut acc = ln_factorial(n);
    for &k in parts {
        acc -= ln_factorial(k);
    }
    Ok(acc)
}

/// Multinomial coefficient as a float (exact for the small cases used by the bounds).
pub fn multinomial(n: u64, parts: &[u64]) -> Result<f64> {
    Ok(log_multinomial(n, parts)?.exp().round())
}

pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        0.0
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

pub fn ln_binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Binomial coefficient rounded to the nearest integer-valued float.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        0.0
    } else {
        ln_binomial(n, k).exp().round()
    }
}

/// Probability mass function of `Binomial(n, p)`, entries `0..=n`, evaluated in log space.
pub fn binomial_pmf(n: u64, p: f64) -> Vec<f64> {
    assert!((0.0..=1.0).contains(&p), "binomial success probability {p} outside [0, 1]");
    (0..=n).map(|k| binomial_term(n, k, p)).collect()
}

fn binomial_term(n: u64, k: u64, p: f64) -> f64 {
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let lp = ln_binomial(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p();
    lp.exp()
}

/// `Pr(Binomial(n, p) ≥ m)` with compensated summation of log-space terms.
pub fn binomial_upper_tail(n: u64, m: u64, p: f64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    if m > n {
        return 0.0;
    }
    let upper: NeumaierSum = (m..=n).map(|k| binomial_term(n, k, p)).collect();
    let upper = upper.total();
    if upper <= 0.5 {
        return upper.clamp(0.0, 1.0);
    }
    // close to 1: the complement is the accurate side
    let lower: NeumaierSum = (0..m).map(|k| binomial_term(n, k, p)).collect();
    (1.0 - lower.total()).clamp(0.0, 1.0)
}

/// Neumaier's compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of an iterator of floats.
pub fn stable_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<NeumaierSum>().total()
}
