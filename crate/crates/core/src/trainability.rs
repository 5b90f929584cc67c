//! Trainability: the probability that an initialization keeps enough usable
//! neurons in every hidden layer.
//!
//! Closed forms cover shallow networks in any dimension, three-layer scalar-input
//! networks for four initialization pairs (lower bounds) and deep zero-bias
//! networks (an upper bound). [`mc_trainability`] estimates the rest.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::bdp::{bdp_bounds, bdp_exact};
use crate::dist::{expect_over_angle, expect_over_split, P2Case};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::mathkit::{binomial, binomial_upper_tail, multinomial, NeumaierSum};
use crate::netcore::{init_with_rng, neuron_status, Architecture, InitScheme, LifeState, DEFAULT_PROBE_COUNT};
use crate::output::Table;
use crate::rng::substream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainabilityKind {
    Exact,
    LowerBound,
    UpperBound,
    MonteCarlo,
}

impl TrainabilityKind {
    pub fn label(self) -> &'static str {
        match self {
            TrainabilityKind::Exact => "exact",
            TrainabilityKind::LowerBound => "lower-bound",
            TrainabilityKind::UpperBound => "upper-bound",
            TrainabilityKind::MonteCarlo => "monte-carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrainabilityEstimate {
    pub value: f64,
    /// Zero for analytic values.
    pub stderr: f64,
    pub kind: TrainabilityKind,
}

impl TrainabilityEstimate {
    fn analytic(value: f64, kind: TrainabilityKind) -> Self {
        Self { value, stderr: 0.0, kind }
    }
}

/// Minimum number of usable neurons per hidden layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Requirement {
    m: Vec<usize>,
}

impl Requirement {
    /// `m_t ≤ n_t` for every hidden layer; `m_t = 0` means "no requirement".
    pub fn new(m: Vec<usize>, arch: &Architecture) -> Result<Self> {
        let hidden = arch.hidden();
        if m.len() != hidden.len() {
            return Err(Error::DimensionMismatch {
                expected: hidden.len(),
                got: m.len(),
                context: "one requirement per hidden layer",
            });
        }
        if let Some(t) = m.iter().zip(hidden).position(|(mt, nt)| mt > nt) {
            return Err(Error::domain(format!("layer {} requires {} of {} neurons", t + 1, m[t], hidden[t])));
        }
        Ok(Self { m })
    }

    pub fn m(&self) -> &[usize] {
        &self.m
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("radius must be positive and finite, got {r}")))
    }
}

/// `Pr(at least m of the n first-layer neurons are alive on B_r(0))`.
pub fn shallow_trainability(n: usize, m: usize, d: u32, r: f64, scheme: &InitScheme) -> Result<TrainabilityEstimate> {
    if m > n {
        return Err(Error::domain(format!("required {m} active neurons out of {n}")));
    }
    check_radius(r)?;
    scheme.validate()?;
    if !scheme.has_bias() {
        return Ok(TrainabilityEstimate::analytic(1.0, TrainabilityKind::Exact));
    }
    let r_eff = scheme
        .effective_radius(r)
        .ok_or_else(|| Error::unsupported(format!("no closed-form trainability for '{}'", scheme.tag())))?;
    let p = bdp_exact(d, r_eff)?;
    Ok(TrainabilityEstimate::analytic(
        binomial_upper_tail(n as u64, m as u64, 1.0 - p),
        TrainabilityKind::Exact,
    ))
}

/// Lower bound `n (1 − √(d/2π) α_r (sin α_r)^{d−1})` on the mean number of alive
/// neurons in a biased first layer.
pub fn expected_active_lower(n: usize, d: u32, r: f64) -> Result<f64> {
    let (_, upper) = bdp_bounds(d, r)?;
    Ok(n as f64 * (1.0 - upper))
}

/// Multinomial `n! / (a! b! c!)`.
fn mult3(n: usize, a: usize, b: usize, c: usize) -> f64 {
    multinomial(n as u64, &[a as u64, b as u64, c as u64]).expect("parts add up by construction")
}

/// Probability bound for a three-layer scalar-input network (`n₀ = 1`) to keep at
/// least `m₂` usable second-layer neurons, for one of the four closed-form cases.
///
/// The formulas are evaluated as stated, including their layer-1 prefactors:
/// `(1 − p̂₁(r))^{n₁}` appears in cases 1.2 and 2.2 but not in 1.1 or 2.1.
/// Nothing is clamped: the case 1.1 expression exceeds 1 for `n₁ ≥ 2`, and
/// neither 1.1 nor 2.1 is a valid lower bound in general.
pub fn deep3_trainability(case: P2Case, n1: usize, n2: usize, m1: usize, m2: usize, r: f64) -> Result<TrainabilityEstimate> {
    if n1 == 0 || n2 == 0 || m2 == 0 {
        return Err(Error::domain("widths and the layer-2 requirement must be positive"));
    }
    if m1 > n1 || m2 > n2 {
        return Err(Error::domain(format!("requirement ({m1}, {m2}) exceeds widths ({n1}, {n2})")));
    }
    if case.first_layer_bias() && (n1 != 1 || m1 != 1) {
        return Err(Error::unsupported(format!("case {} needs n1 = m1 = 1", case.id())));
    }
    check_radius(r)?;

    // (j, l, multinomial) for j usable-but-short, l permanently dead
    let pairs: Vec<(usize, usize, f64)> = (1..m2)
        .flat_map(|j| (0..=n2 - m2).map(move |l| (j, l)))
        .map(|(j, l)| (j, l, mult3(n2, n2 - j - l, j, l)))
        .collect();
    let c = |j: usize| binomial(n2 as u64, j as u64);
    let pow2 = |e: i32| 2f64.powi(e);
    let (n1i, n2i) = (n1 as i32, n2 as i32);

    let mut acc = NeumaierSum::default();
    let value = match case {
        P2Case::NoBiasNoBias => {
            let a = 1.0 - pow2(1 - n1i);
            for j in m2..=n2 {
                acc.add(c(j) * (a * 3f64.powi(j as i32) / 4f64.powi(n2i) + pow2(1 - n1i - n2i)));
            }
            let t1 = 1.0 - pow2(-n1i);
            let t2 = 0.75 - pow2(-n1i - 1);
            for &(j, l, k) in &pairs {
                let (ji, li, rest) = (j as i32, l as i32, (n2 - j - l) as i32);
                let q = t1.powi(rest) / pow2((li + 1) * n1i + n2i - 1)
                    + a * 3f64.powi(ji) * t2.powi(rest) / pow2((n1i + 1) * li + 2 * ji);
                acc.add(k * q);
            }
            acc.total()
        }
        P2Case::NoBiasWithBias => {
            let floor = pow2(-n1i - 1);
            for j in m2..=n2 {
                acc.add(c(j) * expect_over_split(n1, r, |p| (1.0 - p).powi(j as i32) * p.powi(n2i - j as i32)));
            }
            for &(j, l, k) in &pairs {
                let rest = (n2 - j - l) as i32;
                acc.add(k * expect_over_split(n1, r, |p| (1.0 - p).powi(j as i32) * (p - floor).powi(rest) * floor.powi(l as i32)));
            }
            (1.0 - bdp_exact(1, r)?).powi(n1i) * acc.total()
        }
        P2Case::WithBiasNoBias => {
            for j in m2..=n2 {
                acc.add(c(j) * pow2(-n2i));
            }
            for &(j, _, k) in &pairs {
                acc.add(k * pow2(-2 * n2i + j as i32));
            }
            acc.total()
        }
        P2Case::WithBiasWithBias => {
            for j in m2..=n2 {
                acc.add(c(j) * expect_over_angle(r, |p| (1.0 - p).powi(j as i32) * p.powi(n2i - j as i32)));
            }
            for &(j, l, k) in &pairs {
                let rest = (n2 - j - l) as i32;
                acc.add(k * expect_over_angle(r, |p| (1.0 - p).powi(j as i32) * (p - 0.25).powi(rest) * 0.25f64.powi(l as i32)));
            }
            (1.0 - bdp_exact(1, r)?).powi(n1i) * acc.total()
        }
    };
    Ok(TrainabilityEstimate::analytic(value, TrainabilityKind::LowerBound))
}

/// Upper bound on the trainability of a zero-bias network with `L` hidden layers
/// of constant width `n` on scalar inputs (`L + 1` weight layers):
/// `a₁^{L−1} − (1 − 2^{1−n})(1 − 2^{−n}) / (1 + (n − 1) 2^{−n}) · (a₂^{L−1} − a₁^{L−1})`
/// with `a₁ = 1 − 2^{−n}` and `a₂ = 1 − 2^{1−n} − (n − 1) 2^{−2n}`.
pub fn zero_bias_upper_1d(n: usize, depth: usize) -> Result<TrainabilityEstimate> {
    if n == 0 || depth < 2 {
        return Err(Error::domain(format!("need n ≥ 1 and L ≥ 2, got n = {n}, L = {depth}")));
    }
    let ni = n as i32;
    let h = 2f64.powi(-ni);
    let a1 = 1.0 - h;
    let a2 = 1.0 - 2.0 * h - (n - 1) as f64 * h * h;
    let coef = (1.0 - 2.0 * h) * (1.0 - h) / (1.0 + (n - 1) as f64 * h);
    let e = (depth - 1) as i32;
    let value = a1.powi(e) - coef * (a2.powi(e) - a1.powi(e));
    Ok(TrainabilityEstimate::analytic(value, TrainabilityKind::UpperBound))
}

/// `π′₁ P′₂ ⋯ P′_{L−1} 𝟙 + π′₁ P̂₂ ⋯ P̂_{L−1} 𝟙`.
///
/// The caller supplies the truncated first-layer law and both matrix chains. An
/// empty `p_hat` contributes nothing, so with two empty chains the result is the
/// sum of `pi1_tail`.
pub fn compose_trainability(pi1_tail: &[f64], p_primed: &[Matrix], p_hat: &[Matrix]) -> Result<f64> {
    let chain = |ms: &[Matrix], what: &'static str| -> Result<f64> {
        let mut v = pi1_tail.to_vec();
        for m in ms {
            if m.rows() != v.len() {
                return Err(Error::DimensionMismatch {
                    expected: v.len(),
                    got: m.rows(),
                    context: what,
                });
            }
            v = m.left_mul_vec(&v)?;
        }
        Ok(v.iter().sum())
    };
    let first = chain(p_primed, "primed chain")?;
    let second = if p_hat.is_empty() { 0.0 } else { chain(p_hat, "hat chain")? };
    Ok(first + second)
}

/// Whether one sampled network meets `req`: in every hidden layer at most
/// `n_t − m_t` neurons are permanently dead, and at least one neuron is alive
/// whenever `m_t ≥ 1` (a layer with no alive neuron makes the network constant).
fn meets(widths: &[usize], req: &[usize], perm: &[usize], active: &[usize]) -> bool {
    widths
        .iter()
        .zip(req)
        .zip(perm.iter().zip(active))
        .all(|((&n, &m), (&p, &a))| p + m <= n && a >= m.min(1))
}

/// Samples evaluated per rayon task.
const MC_CHUNK: u64 = 2048;

/// Sampled trainability of several requirements at once (one pass over the
/// networks). Sample `k` uses stream `k` of `seed`.
pub fn mc_trainability_multi(
    arch: &Architecture,
    schemes: &[InitScheme],
    r: f64,
    reqs: &[Requirement],
    samples: u64,
    seed: u64,
) -> Result<Vec<TrainabilityEstimate>> {
    if samples == 0 {
        return Err(Error::config("samples must be at least 1"));
    }
    if schemes.iter().any(|s| matches!(s, InitScheme::DataDependent { .. })) {
        return Err(Error::unsupported("the data-dependent scheme needs training data"));
    }
    check_radius(r)?;
    let hidden = arch.hidden().to_vec();
    for q in reqs {
        if q.m.len() != hidden.len() {
            return Err(Error::DimensionMismatch {
                expected: hidden.len(),
                got: q.m.len(),
                context: "requirement does not match the architecture",
            });
        }
    }
    init_with_rng(arch, schemes, &mut substream(seed, 0))?;
    let chunks = samples.div_ceil(MC_CHUNK);
    let hits = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<Vec<u64>> {
            let mut h = vec![0u64; reqs.len()];
            let mut perm = vec![0usize; hidden.len()];
            let mut active = vec![0usize; hidden.len()];
            for k in c * MC_CHUNK..((c + 1) * MC_CHUNK).min(samples) {
                let net = init_with_rng(arch, schemes, &mut substream(seed, k))?;
                perm.fill(0);
                active.fill(0);
                for s in neuron_status(&net, r, DEFAULT_PROBE_COUNT)? {
                    match s.state {
                        LifeState::Active => active[s.layer - 1] += 1,
                        LifeState::PermanentlyDead => perm[s.layer - 1] += 1,
                        LifeState::TentativelyDead => {}
                    }
                }
                for (hq, q) in h.iter_mut().zip(reqs) {
                    *hq += meets(&hidden, &q.m, &perm, &active) as u64;
                }
            }
            Ok(h)
        })
        .try_reduce(
            || vec![0u64; reqs.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )?;
    let nf = samples as f64;
    Ok(hits
        .into_iter()
        .map(|h| {
            let p = h as f64 / nf;
            TrainabilityEstimate {
                value: p,
                stderr: (p * (1.0 - p) / nf).sqrt(),
                kind: TrainabilityKind::MonteCarlo,
            }
        })
        .collect())
}

pub fn mc_trainability(
    arch: &Architecture,
    schemes: &[InitScheme],
    r: f64,
    req: &Requirement,
    samples: u64,
    seed: u64,
) -> Result<TrainabilityEstimate> {
    Ok(mc_trainability_multi(arch, schemes, r, std::slice::from_ref(req), samples, seed)?[0])
}

/// One line of a trainability table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainabilityRow {
    pub label: String,
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    pub r: f64,
    pub schemes: Vec<String>,
    pub estimate: TrainabilityEstimate,
}

impl TrainabilityRow {
    /// FNV-1a over the configuration fields, stable across runs and platforms.
    pub fn config_hash(&self) -> String {
        let mut key = String::new();
        let _ = write!(key, "{}|{:?}|{:?}|{:e}|{}", self.label, self.n, self.m, self.r, self.schemes.join(","));
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in key.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

pub fn rows_to_table(rows: &[TrainabilityRow]) -> Table {
    let mut t = Table::new(&["config_hash", "label", "n", "m", "r", "schemes", "value", "stderr", "kind"]);
    for row in rows {
        t.push(vec![
            row.config_hash().into(),
            row.label.clone().into(),
            join(&row.n).into(),
            join(&row.m).into(),
            row.r.into(),
            row.schemes.join(";").into(),
            row.estimate.value.into(),
            row.estimate.stderr.into(),
            row.estimate.kind.label().into(),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::p2_active_row;
    use proptest::prelude::*;

    const BIAS: InitScheme = InitScheme::HeWithBias;

    #[test]
    fn shallow_examples() {
        let v = shallow_trainability(2, 2, 1, 1.0, &BIAS).unwrap();
        assert!((v.value - 0.5625).abs() < 1e-12);
        assert_eq!(v.kind, TrainabilityKind::Exact);
        assert_eq!(shallow_trainability(2, 2, 1, 1.0, &InitScheme::HeNoBias).unwrap().value, 1.0);
        let v = shallow_trainability(6, 2, 1, 1.0, &BIAS).unwrap().value;
        let want = 1.0 - 0.25f64.powi(6) - 6.0 * 0.75 * 0.25f64.powi(5);
        assert!((v - want).abs() < 1e-12);
        assert!((v - 0.995361).abs() < 1e-6);
        assert!(shallow_trainability(2, 3, 1, 1.0, &BIAS).is_err());
    }

    #[test]
    fn shallow_is_monotone() {
        for d in [1, 3, 10] {
            for r in [0.3, 1.0, 4.0] {
                for n in 1..=15 {
                    let t = |n, m| shallow_trainability(n, m, d, r, &BIAS).unwrap().value;
                    for m in 1..n {
                        assert!(t(n, m + 1) <= t(n, m) + 1e-14);
                        assert!(t(n + 1, m) + 1e-14 >= t(n, m), "d {d} r {r} n {n} m {m}: {} < {}", t(n + 1, m), t(n, m));
                    }
                }
            }
        }
    }

    #[test]
    fn expected_active_examples() {
        let v = expected_active_lower(100, 1, 1.0).unwrap();
        let want = 100.0 * (1.0 - (1.0 / (2.0 * std::f64::consts::PI)).sqrt() * std::f64::consts::FRAC_PI_4);
        assert!((v - want).abs() < 1e-10);
        assert!((v - 68.67).abs() < 0.01);
        assert!((expected_active_lower(50, 3, 1e8).unwrap() - 50.0).abs() < 1e-5);
        for d in 1..=20 {
            for r in [0.1, 0.5, 1.0, 3.0] {
                let exact = 40.0 * (1.0 - bdp_exact(d, r).unwrap());
                assert!(expected_active_lower(40, d, r).unwrap() <= exact + 1e-12);
            }
        }
    }

    #[test]
    fn deep3_examples() {
        let v = deep3_trainability(P2Case::WithBiasNoBias, 1, 1, 1, 1, 1.0).unwrap();
        assert_eq!(v.value, 0.5);
        assert_eq!(v.kind, TrainabilityKind::LowerBound);
        assert_eq!(deep3_trainability(P2Case::NoBiasNoBias, 1, 1, 1, 1, 1.0).unwrap().value, 0.5);
        assert!(deep3_trainability(P2Case::WithBiasWithBias, 2, 3, 1, 1, 1.0).is_err());
        assert!(deep3_trainability(P2Case::NoBiasWithBias, 2, 3, 1, 4, 1.0).is_err());
    }

    #[test]
    fn case_11_as_printed_exceeds_one() {
        // 0.40625 from the main term plus 2 · 0.328125 from (j, l) = (1, 0)
        assert_eq!(deep3_trainability(P2Case::NoBiasNoBias, 2, 2, 2, 2, 1.0).unwrap().value, 1.0625);
    }

    #[test]
    fn deep3_main_term_is_the_tail_of_the_active_row() {
        // with m₂ = 1 the double sum is empty
        for case in P2Case::ALL {
            let n1 = if case.first_layer_bias() { 1 } else { 3 };
            for n2 in 1..=5 {
                let row = p2_active_row(case, n1, n2, 0.8);
                let tail: f64 = row[1..].iter().sum();
                let pre = match case {
                    P2Case::NoBiasWithBias | P2Case::WithBiasWithBias => (1.0 - bdp_exact(1, 0.8).unwrap()).powi(n1 as i32),
                    _ => 1.0,
                };
                let v = deep3_trainability(case, n1, n2, n1.min(1), 1, 0.8).unwrap().value;
                assert!((v - pre * tail).abs() < 1e-12, "{case:?} {n2}");
            }
        }
    }

    #[test]
    fn deep3_values_are_probabilities() {
        for case in P2Case::ALL {
            for n1 in 1..=4 {
                if case.first_layer_bias() && n1 > 1 {
                    continue;
                }
                for n2 in 1..=6 {
                    for m2 in 1..=n2 {
                        for r in [0.2, 1.0, 5.0] {
                            let v = deep3_trainability(case, n1, n2, 1, m2, r).unwrap().value;
                            let ok = (-1e-12..=1.0 + 1e-12).contains(&v);
                            // the printed case 1.1 expression overshoots 1 once n₁ ≥ 2
                            assert!(ok || (case == P2Case::NoBiasNoBias && n1 >= 2), "{case:?} {n1} {n2} {m2} {r}: {v}");
                        }
                    }
                }
            }
        }
    }

    /// Case 2.1 split into the two chains: the active-row tail and the (j, l) terms.
    fn case21_chains(n2: usize, m2: usize) -> (Vec<Matrix>, Vec<Matrix>) {
        let row = p2_active_row(P2Case::WithBiasNoBias, 1, n2, 1.0);
        let primed = Matrix::from_vec(1, n2 - m2 + 1, row[m2..].to_vec()).unwrap();
        let mut hat = Vec::new();
        for j in 1..m2 {
            for l in 0..=n2 - m2 {
                hat.push(mult3(n2, n2 - j - l, j, l) * 0.5f64.powi(j as i32) * 0.25f64.powi((n2 - j) as i32));
            }
        }
        let hat = if hat.is_empty() { vec![] } else { vec![Matrix::from_vec(1, hat.len(), hat).unwrap()] };
        (vec![primed], hat)
    }

    #[test]
    fn composition_matches_deep3_case_21() {
        for n2 in 1..=7 {
            for m2 in 1..=n2 {
                let (p, h) = case21_chains(n2, m2);
                let got = compose_trainability(&[1.0], &p, &h).unwrap();
                let want = deep3_trainability(P2Case::WithBiasNoBias, 1, n2, 1, m2, 1.0).unwrap().value;
                assert!((got - want).abs() < 1e-10, "{n2} {m2}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn composition_reductions() {
        let pmf = crate::mathkit::binomial_pmf(6, 0.75);
        let got = compose_trainability(&pmf[2..], &[], &[]).unwrap();
        let want = shallow_trainability(6, 2, 1, 1.0, &BIAS).unwrap().value;
        assert!((got - want).abs() < 1e-12);
        let p = Matrix::from_rows(&[vec![0.5, 0.5], vec![0.2, 0.8]]).unwrap();
        let z = Matrix::zeros(2, 2);
        assert!((compose_trainability(&[0.3, 0.7], std::slice::from_ref(&p), &[z]).unwrap() - 1.0).abs() < 1e-15);
        assert!(compose_trainability(&[1.0], &[p], &[]).is_err());
    }

    #[test]
    fn corollary_value() {
        let v = zero_bias_upper_1d(2, 3).unwrap();
        assert_eq!(v.value, 0.673828125);
        assert_eq!(v.kind, TrainabilityKind::UpperBound);
        assert!(zero_bias_upper_1d(40, 5).unwrap().value > 1.0 - 1e-9);
        assert!(zero_bias_upper_1d(2, 1).is_err());
    }

    #[test]
    fn mc_trivial_cases() {
        let arch = Architecture::new(vec![1, 4, 3, 1]).unwrap();
        let s = [BIAS; 3];
        let zero = Requirement::new(vec![0, 0], &arch).unwrap();
        assert_eq!(mc_trainability(&arch, &s, 1.0, &zero, 500, 1).unwrap().value, 1.0);
        let shallow = Architecture::new(vec![2, 5, 1]).unwrap();
        let full = Requirement::new(vec![5], &shallow).unwrap();
        let v = mc_trainability(&shallow, &[InitScheme::HeNoBias; 2], 1.0, &full, 500, 1).unwrap();
        assert_eq!(v.value, 1.0);
        assert!(Requirement::new(vec![5, 1], &arch).is_err());
    }

    #[test]
    fn mc_matches_shallow_closed_form() {
        for (n, m, r, d) in [(2, 2, 1.0, 1), (6, 2, 1.0, 1), (10, 4, 1.0 / 3f64.sqrt(), 1), (5, 4, 0.7, 3)] {
            let arch = Architecture::new(vec![d, n, 1]).unwrap();
            let req = Requirement::new(vec![m], &arch).unwrap();
            let mc = mc_trainability(&arch, &[BIAS; 2], r, &req, 20_000, 11).unwrap();
            let exact = shallow_trainability(n, m, d as u32, r, &BIAS).unwrap().value;
            assert!((mc.value - exact).abs() <= 4.0 * mc.stderr.max(1e-4), "{n} {m} {r}: {} vs {exact}", mc.value);
        }
    }

    #[test]
    fn mc_is_deterministic() {
        let arch = Architecture::new(vec![1, 3, 3, 1]).unwrap();
        let req = Requirement::new(vec![2, 2], &arch).unwrap();
        let a = mc_trainability(&arch, &[BIAS; 3], 1.0, &req, 3000, 5).unwrap();
        let b = mc_trainability(&arch, &[BIAS; 3], 1.0, &req, 3000, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_rows() {
        let row = TrainabilityRow {
            label: "shallow".into(),
            n: vec![2],
            m: vec![2],
            r: 1.0,
            schemes: vec!["he-with-bias".into()],
            estimate: shallow_trainability(2, 2, 1, 1.0, &BIAS).unwrap(),
        };
        let csv = rows_to_table(std::slice::from_ref(&row)).to_csv();
        assert!(csv.starts_with("config_hash,label,n,m,r,schemes,value,stderr,kind"));
        assert!(csv.contains("exact"));
        assert_eq!(row.config_hash(), row.clone().config_hash());
    }

    proptest! {
        #[test]
        fn analytic_values_in_unit_interval(n in 1usize..40, m in 0usize..40, d in 1u32..30, r in 0.01f64..50.0) {
            prop_assume!(m <= n);
            let v = shallow_trainability(n, m, d, r, &BIAS).unwrap().value;
            prop_assert!((0.0..=1.0).contains(&v));
        }

        #[test]
        fn corollary_in_unit_interval(n in 1usize..30, l in 2usize..30) {
            let v = zero_bias_upper_1d(n, l).unwrap().value;
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&v));
        }
    }
}
