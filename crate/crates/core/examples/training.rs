//! Build, train and inspect a small ReLU network: exact piecewise-linear view,
//! neuron life states, and the fact that born-dead neurons never move.

use relu_trainability::experiments::TargetId;
use relu_trainability::netcore::{
    eval_piecewise_1d, init_network, neuron_status, train, Architecture, InitScheme, LifeState, OptimizerConfig,
};

fn main() -> relu_trainability::Result<()> {
    let arch = Architecture::new(vec![1, 8, 1])?;
    let data = TargetId::F1.uniform_data(200, 1)?;
    let r = data.r;
    let net = init_network(&arch, &[InitScheme::HeWithBias; 2], 21)?;
    let dead: Vec<usize> = neuron_status(&net, r, 0)?
        .iter()
        .filter(|s| s.layer == 1 && s.state != LifeState::Active)
        .map(|s| s.neuron)
        .collect();
    println!("born-dead first-layer neurons: {dead:?}");

    let out = train(&net, &data, &OptimizerConfig::adam(1e-2, 32, 300, 0))?;
    for h in out.history.iter().step_by(60) {
        println!("epoch {:>4}: rmse {:.5}", h.epoch, h.rmse);
    }
    for &i in &dead {
        let (before, after) = (net.layer(0).weights.row(i), out.params.layer(0).weights.row(i));
        println!("neuron {i}: weight {before:?} -> {after:?}");
    }

    let pw = eval_piecewise_1d(&out.params, r)?;
    println!("trained network has {} knots on [-r, r]", pw.knots.len());
    Ok(())
}
