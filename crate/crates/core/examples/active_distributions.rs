//! Distribution of the number of active neurons in the first two hidden layers
//! of a scalar-input network, composed from transition matrices and compared
//! with sampling.

use relu_trainability::dist::{compose_dist, mc_active_dist, p2_matrix, pi1, P2Case};
use relu_trainability::netcore::Architecture;

fn main() -> relu_trainability::Result<()> {
    let r = 1.0;
    for (n1, n2) in [(6, 4), (1, 8)] {
        for case in P2Case::ALL {
            if case.first_layer_bias() && n1 != 1 {
                continue;
            }
            let (s1, s2) = case.schemes();
            let p1 = pi1(n1, 1, r, &s1)?;
            let p2 = compose_dist(&p1, &[p2_matrix(n1, n2, r, &s1, &s2)?])?;
            let arch = Architecture::new(vec![1, n1, n2, 1])?;
            let mc = mc_active_dist(&arch, &[s1, s2, s2], r, 50_000, 7)?;
            println!("({n1}, {n2}) case {}:", case.id());
            println!("  layer 2 analytic {:?}", round(p2.probs()));
            println!("  layer 2 sampled  {:?}", round(&mc.layers[1].probs));
            println!("  total variation {:.4}", p2.tv_distance(&mc.layers[1].probs));
        }
    }
    Ok(())
}

fn round(p: &[f64]) -> Vec<f64> {
    p.iter().map(|v| (v * 1e4).round() / 1e4).collect()
}
