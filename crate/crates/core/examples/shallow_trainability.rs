//! Probability that a freshly initialized shallow network keeps at least `m`
//! alive neurons, against a sampled estimate.

use relu_trainability::netcore::{Architecture, InitScheme};
use relu_trainability::trainability::{expected_active_lower, mc_trainability, shallow_trainability, Requirement};

fn main() -> relu_trainability::Result<()> {
    let s = InitScheme::HeWithBias;
    let v = shallow_trainability(2, 2, 1, 1.0, &s)?.value;
    println!("two neurons, both needed, r = 1: {v:.4} (failure {:.4})", 1.0 - v);

    let r = 3f64.sqrt();
    println!("\n|x| needs 2 neurons on [-sqrt 3, sqrt 3]:");
    for n in [2, 3, 4, 8, 16] {
        let exact = shallow_trainability(n, 2, 1, r, &s)?.value;
        let arch = Architecture::new(vec![1, n, 1])?;
        let req = Requirement::new(vec![2], &arch)?;
        let mc = mc_trainability(&arch, &[s; 2], r, &req, 50_000, n as u64)?;
        println!("  n = {n:>2}: exact {exact:.5}, sampled {:.5} +- {:.5}", mc.value, mc.stderr);
    }

    println!("\nexpected alive neurons out of 100 (lower bound), d = 3, r = 1: {:.2}", expected_active_lower(100, 3, 1.0)?);
    println!("bias-free networks never lose a neuron: {}", shallow_trainability(5, 5, 1, 1.0, &InitScheme::HeNoBias)?.value);
    Ok(())
}
