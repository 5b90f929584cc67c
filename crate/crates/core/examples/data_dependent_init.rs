//! Data-dependent bias initialization: calibration against He without bias,
//! a sampled check, and a short training comparison on f3.

use relu_trainability::datadep::{default_params, expected_q, he_reference_q, mc_q, random_inputs};
use relu_trainability::experiments::{compare_methods, ExperimentConfig, ExperimentId};
use relu_trainability::netcore::Architecture;

fn main() -> relu_trainability::Result<()> {
    let xs = random_inputs(10, 2, 9);
    let n = 30;
    let cfg = default_params(&xs, n as f64 / 10.0, 2)?;
    println!("parameters: {cfg:?}");
    println!("expected q {:.6}, He reference {:.6}", expected_q(&xs, n, &cfg), he_reference_q(&xs, n));
    let mc = mc_q(&xs, &Architecture::shallow(2, n, 1)?, &cfg, 100_000, 1)?;
    println!("sampled q {:.6} +- {:.6}", mc.estimate, mc.stderr);

    let mut c = ExperimentConfig::preset(ExperimentId::InitCompare);
    c.replicates = 3;
    c.optimizer.max_epochs = Some(2000);
    for s in compare_methods(&c)? {
        println!(
            "{:>15}: median final RMSE {:.4}, dead neurons before {:?} after {:?}",
            s.method.tag(),
            s.median_final_rmse(),
            s.dead_initial,
            s.dead_final
        );
    }
    Ok(())
}
