//! Width-`m` shallow networks through `m + 1` points, and datasets on a line that
//! no much narrower network can fit.

use rand::Rng as _;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::netcore::{sample_unit_sphere, Layer, NetworkParams};
use crate::rng::seeded;

/// Random directions tried before giving up.
pub const DIRECTION_ATTEMPTS: usize = 1000;
/// Smallest accepted gap between consecutive projections, relative to the data radius.
pub const MIN_GAP: f64 = 1e-12;
/// Separating directions compared; the one with the widest smallest gap wins,
/// which keeps the output weights small.
const CANDIDATES: usize = 32;

fn project(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Indices sorting the projections and the smallest consecutive gap, if that
/// gap is at least `gap`.
fn order_with_gap(w: &[f64], points: &[Vec<f64>], gap: f64) -> Option<(Vec<usize>, f64)> {
    let proj: Vec<f64> = points.iter().map(|x| project(w, x)).collect();
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| proj[a].total_cmp(&proj[b]));
    let min = idx.windows(2).map(|p| proj[p[1]] - proj[p[0]]).fold(f64::INFINITY, f64::min);
    (min >= gap).then_some((idx, min))
}

/// Unit vector on which the points project to distinct values.
///
/// Scalar inputs use `+1`. Otherwise random directions are drawn from `seed`;
/// the search fails only for repeated points, or points so close that no
/// direction separates them by `MIN_GAP · r`.
pub fn find_direction(points: &[Vec<f64>], seed: u64) -> Result<Vec<f64>> {
    Ok(direction_and_order(points, seed)?.0)
}

fn direction_and_order(points: &[Vec<f64>], seed: u64) -> Result<(Vec<f64>, Vec<usize>)> {
    let dim = points.first().map(Vec::len).ok_or_else(|| Error::DegenerateData("no points".into()))?;
    if dim == 0 || points.iter().any(|p| p.len() != dim) {
        return Err(Error::DegenerateData("points must share a positive dimension".into()));
    }
    let r = Dataset::enclosing_radius(points).max(f64::MIN_POSITIVE);
    let gap = MIN_GAP * r;
    if dim == 1 {
        let w = vec![1.0];
        return order_with_gap(&w, points, gap)
            .map(|(o, _)| (w, o))
            .ok_or_else(|| Error::DegenerateData("repeated scalar inputs".into()));
    }
    let mut rng = seeded(seed);
    let mut best: Option<(Vec<f64>, Vec<usize>, f64)> = None;
    let mut found = 0;
    for _ in 0..DIRECTION_ATTEMPTS {
        let w = sample_unit_sphere(dim, &mut rng);
        if let Some((o, g)) = order_with_gap(&w, points, gap) {
            if best.as_ref().is_none_or(|b| g > b.2) {
                best = Some((w, o, g));
            }
            found += 1;
            if found == CANDIDATES {
                break;
            }
        }
    }
    if let Some((w, o, _)) = best {
        return Ok((w, o));
    }
    Err(Error::DegenerateData(format!(
        "no separating direction in {DIRECTION_ATTEMPTS} attempts; inputs are repeated or nearly so"
    )))
}

/// Shallow network of width `m` that reproduces all `m + 1` data points.
///
/// After sorting the points along a separating direction `w`, neuron `i` is
/// `φ(wᵀ(x − x_i))`, and its output weight is the change of slope needed to
/// hit the next point. The output bias is the first target.
pub fn build_interpolant(data: &Dataset) -> Result<NetworkParams> {
    build_interpolant_seeded(data, 0)
}

pub fn build_interpolant_seeded(data: &Dataset, seed: u64) -> Result<NetworkParams> {
    if data.len() < 2 {
        return Err(Error::DegenerateData("need at least two points".into()));
    }
    let (w, order) = direction_and_order(&data.inputs, seed)?;
    let m = data.len() - 1;
    let d = data.input_dim();
    let k = data.output_dim();
    let xs: Vec<&[f64]> = order.iter().map(|&i| data.inputs[i].as_slice()).collect();
    let ys: Vec<&[f64]> = order.iter().map(|&i| data.targets[i].as_slice()).collect();
    let p: Vec<f64> = xs.iter().map(|x| project(&w, x)).collect();

    let mut hidden = Layer::zeros(m, d);
    for i in 0..m {
        hidden.weights.row_mut(i).copy_from_slice(&w);
        hidden.biases[i] = -p[i];
    }
    // c[i][o]: output weight of neuron i for component o
    let mut c = vec![vec![0.0; k]; m];
    for i in 0..m {
        for o in 0..k {
            let before: f64 = ys[0][o] + (0..i).map(|q| c[q][o] * (p[i + 1] - p[q])).sum::<f64>();
            c[i][o] = (ys[i + 1][o] - before) / (p[i + 1] - p[i]);
        }
    }
    let mut out = Layer::zeros(k, m);
    for (i, ci) in c.iter().enumerate() {
        for (o, v) in ci.iter().enumerate() {
            out.weights[(o, i)] = *v;
        }
    }
    out.biases.copy_from_slice(ys[0]);
    NetworkParams::from_layers(vec![hidden, out])
}

/// Largest `|N(x_i) − y_i|` over the data.
pub fn max_residual(net: &NetworkParams, data: &Dataset) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (x, y) in data.inputs.iter().zip(&data.targets) {
        for (a, b) in net.forward(x)?.iter().zip(y) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

/// `m + 1` collinear points `x_i = α_i x₁` (`0 < α₁ = 1 < α₂ < ⋯`) in the unit
/// ball of dimension `dim`, with scalar targets whose consecutive slopes
/// alternate in sign and grow in magnitude, so any two of three consecutive
/// slopes (per unit length along the line) differ by at least 0.4. The
/// piecewise-linear interpolant through them changes slope `m − 1` times.
pub fn witness_data(m: usize, seed: u64, dim: usize) -> Result<Dataset> {
    if m < 4 {
        return Err(Error::domain(format!("witness data needs m ≥ 4, got {m}")));
    }
    if dim == 0 {
        return Err(Error::domain("dimension must be positive"));
    }
    let mut rng = seeded(seed);
    let u = sample_unit_sphere(dim, &mut rng);
    let count = m + 1;
    // positions in (0, 1], strictly increasing
    let t: Vec<f64> = (0..count).map(|i| (i as f64 + 0.2 + 0.6 * rng.random::<f64>()) / count as f64).collect();
    let mut y = vec![rng.random_range(-0.5..0.5)];
    for i in 0..m {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let slope = sign * (1.0 + 0.25 * i as f64 + 0.1 * rng.random::<f64>());
        y.push(y[i] + slope * (t[i + 1] - t[i]));
    }
    let inputs = t.iter().map(|&s| u.iter().map(|v| v * s).collect()).collect();
    Dataset::new(inputs, y.into_iter().map(|v| vec![v]).collect(), 1.0)
}

/// Coordinates `α_i` with `x_i = α_i x₁` for collinear data (`x₁` the first input).
pub fn line_coordinates(data: &Dataset) -> Result<Vec<f64>> {
    let x1 = &data.inputs[0];
    let nn = project(x1, x1);
    if nn == 0.0 {
        return Err(Error::DegenerateData("first input is the origin".into()));
    }
    data.inputs
        .iter()
        .map(|x| {
            let a = project(x1, x) / nn;
            let off = x.iter().zip(x1).map(|(v, w)| (v - a * w).abs()).fold(0.0, f64::max);
            if off > 1e-12 * nn.sqrt().max(1.0) {
                Err(Error::DegenerateData("inputs are not collinear with the first one".into()))
            } else {
                Ok(a)
            }
        })
        .collect()
}

/// Divided differences `(y_{i+1} − y_i)/(α_{i+1} − α_i)` after sorting by `α`.
pub fn divided_differences(alpha: &[f64], y: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..alpha.len()).collect();
    idx.sort_by(|&a, &b| alpha[a].total_cmp(&alpha[b]));
    idx.windows(2).map(|p| (y[p[1]] - y[p[0]]) / (alpha[p[1]] - alpha[p[0]])).collect()
}

/// Number of slope changes of the piecewise-linear interpolant through
/// `(α_i, y_i)`: adjacent divided differences that differ by more than `tol`.
pub fn count_slope_changes(alpha: &[f64], y: &[f64], tol: f64) -> usize {
    divided_differences(alpha, y).windows(2).filter(|s| (s[1] - s[0]).abs() > tol).count()
}

/// Smallest gap between any two of three consecutive divided differences.
pub fn slope_margin(alpha: &[f64], y: &[f64]) -> f64 {
    let dd = divided_differences(alpha, y);
    let mut best = f64::INFINITY;
    for i in 0..dd.len().saturating_sub(1) {
        best = best.min((dd[i + 1] - dd[i]).abs());
        if i + 2 < dd.len() {
            best = best.min((dd[i + 2] - dd[i]).abs());
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::{neuron_status, LifeState};
    use proptest::prelude::*;

    fn random_data(count: usize, dim: usize, seed: u64) -> Dataset {
        let mut rng = seeded(seed);
        let xs: Vec<Vec<f64>> = (0..count)
            .map(|_| {
                let dir = sample_unit_sphere(dim, &mut rng);
                let rho = rng.random::<f64>();
                dir.into_iter().map(|v| v * rho).collect()
            })
            .collect();
        let ys = (0..count).map(|_| vec![rng.random_range(-1.0..1.0)]).collect();
        Dataset::new(xs, ys, 1.0).unwrap()
    }

    #[test]
    fn scalar_direction_is_plus_one() {
        assert_eq!(find_direction(&[vec![0.3], vec![-0.2]], 9).unwrap(), vec![1.0]);
    }

    #[test]
    fn planar_directions_order_strictly() {
        for seed in 0..10 {
            let data = random_data(30, 2, seed);
            let w = find_direction(&data.inputs, seed).unwrap();
            assert!((project(&w, &w) - 1.0).abs() < 1e-12);
            let mut p: Vec<f64> = data.inputs.iter().map(|x| project(&w, x)).collect();
            p.sort_by(f64::total_cmp);
            assert!(p.windows(2).all(|q| q[1] > q[0]));
        }
    }

    #[test]
    fn repeated_points_are_degenerate() {
        assert!(matches!(find_direction(&[vec![0.1, 0.2], vec![0.1, 0.2]], 0), Err(Error::DegenerateData(_))));
        let d = Dataset::new(vec![vec![0.5], vec![0.5]], vec![vec![0.0], vec![1.0]], 1.0).unwrap();
        assert!(build_interpolant(&d).is_err());
    }

    #[test]
    fn two_points_one_neuron() {
        let d = Dataset::new(vec![vec![-0.5], vec![0.25]], vec![vec![1.0], vec![-2.0]], 1.0).unwrap();
        let net = build_interpolant(&d).unwrap();
        assert_eq!(net.arch().widths(), &[1, 1, 1]);
        let c1 = (-2.0 - 1.0) / 0.75;
        assert!((net.layer(1).weights[(0, 0)] - c1).abs() < 1e-15);
        assert!(max_residual(&net, &d).unwrap() < 1e-15);
    }

    #[test]
    fn constant_targets_give_constant_network() {
        let data = random_data(8, 3, 4);
        let ys = vec![vec![0.7]; 8];
        let d = Dataset::new(data.inputs, ys, 1.0).unwrap();
        let net = build_interpolant(&d).unwrap();
        assert!(net.layer(1).weights.as_slice().iter().all(|&c| c == 0.0));
        assert_eq!(net.forward(&[0.1, -0.2, 0.3]).unwrap(), vec![0.7]);
    }

    #[test]
    fn eleven_scalar_points() {
        let mut rng = seeded(77);
        let xs = (0..11).map(|_| vec![rng.random_range(-1.0..1.0)]).collect();
        let ys = (0..11).map(|_| vec![rng.random_range(-3.0..3.0)]).collect();
        let d = Dataset::new(xs, ys, 1.0).unwrap();
        let net = build_interpolant(&d).unwrap();
        assert_eq!(net.arch().widths(), &[1, 10, 1]);
        assert!(max_residual(&net, &d).unwrap() < 1e-10);
    }

    #[test]
    fn vector_targets() {
        let mut d = random_data(6, 2, 3);
        d.targets = d.targets.iter().map(|y| vec![y[0], 2.0 * y[0] - 1.0]).collect();
        let net = build_interpolant(&d).unwrap();
        assert!(max_residual(&net, &d).unwrap() < 1e-12);
    }

    #[test]
    fn all_neurons_active() {
        for (dim, seed) in [(1, 0), (2, 1), (3, 2)] {
            let d = random_data(12, dim, seed);
            let net = build_interpolant(&d).unwrap();
            let st = neuron_status(&net, 1.0, 0).unwrap();
            assert_eq!(st.len(), 11);
            assert!(st.iter().all(|s| s.state == LifeState::Active));
        }
    }

    #[test]
    fn witness_properties() {
        for m in 4..20 {
            let d = witness_data(m, m as u64, 3).unwrap();
            assert_eq!(d.len(), m + 1);
            let a = line_coordinates(&d).unwrap();
            assert!(a.windows(2).all(|p| p[1] > p[0]));
            let y: Vec<f64> = d.targets.iter().map(|t| t[0]).collect();
            assert!(slope_margin(&a, &y) >= 1e-6);
            assert_eq!(count_slope_changes(&a, &y, 1e-9), m - 1);
        }
        let a = witness_data(6, 42, 2).unwrap();
        let b = witness_data(6, 42, 2).unwrap();
        assert_eq!(a, b);
        assert!(witness_data(3, 0, 1).is_err());
    }

    #[test]
    fn witness_five_needs_four_changes() {
        let d = witness_data(5, 5, 1).unwrap();
        let a: Vec<f64> = d.inputs.iter().map(|x| x[0]).collect();
        let y: Vec<f64> = d.targets.iter().map(|t| t[0]).collect();
        // brute force: every adjacent pair of slopes differs
        let dd = divided_differences(&a, &y);
        let changes = dd.windows(2).filter(|s| s[0] != s[1]).count();
        assert_eq!(changes, 4);
        // and the width-5 interpolant realizes them
        let net = build_interpolant(&d).unwrap();
        assert!(max_residual(&net, &d).unwrap() < 1e-12);
    }

    #[test]
    fn crowded_planar_points_stay_accurate() {
        // the first separating direction here nearly collides two points
        let d = random_data(29, 2, 8666890058363452586);
        let net = build_interpolant(&d).unwrap();
        assert!(max_residual(&net, &d).unwrap() < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn interpolates_random_data(count in 2usize..40, dim in 1usize..6, seed in any::<u64>()) {
            let d = random_data(count, dim, seed);
            let net = build_interpolant(&d).unwrap();
            prop_assert_eq!(net.arch().hidden(), &[count - 1]);
            prop_assert!(max_residual(&net, &d).unwrap() < 1e-10);
        }
    }
}
