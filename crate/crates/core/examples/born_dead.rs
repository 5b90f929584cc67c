//! Born-dead probability of a single ReLU neuron, its bounds, and the width
//! that leaves enough neurons alive on average.

use relu_trainability::bdp::{bdp, overparam_condition, suggested_width};

fn main() -> relu_trainability::Result<()> {
    println!("{:>3} {:>8} {:>10} {:>10} {:>10}", "d", "r", "lower", "exact", "upper");
    for d in [1, 2, 5, 20] {
        for r in [0.5, 1.0, 3.0] {
            let b = bdp(d, r)?;
            println!("{d:>3} {r:>8.3} {:>10.6} {:>10.6} {:>10.6}", b.lower, b.exact, b.upper);
        }
    }

    let r = 1.0 / 3f64.sqrt();
    println!("\np(1, 1/sqrt 3) = {:.12}", bdp(1, r)?.exact);
    println!("width for 200 active neurons on average: {}", suggested_width(200, 1, r, true)?);
    println!("without bias no neuron is born dead: {}", suggested_width(200, 1, r, false)?);

    for (m, d, delta) in [(10, 1, 0.05), (1000, 3, 0.05), (1, 50, 0.99)] {
        println!("over-parameterization condition (m={m}, d={d}, delta={delta}): {}", overparam_condition(m, d, 1.0, delta)?);
    }
    Ok(())
}
