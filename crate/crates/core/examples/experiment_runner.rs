//! Running an experiment from a JSON config and writing its tables with a
//! manifest that replays the run.

use relu_trainability::experiments::{self, ExperimentConfig};
use relu_trainability::output::Format;

fn main() -> relu_trainability::Result<()> {
    let cfg = ExperimentConfig::from_json(
        r#"{"experiment": "success-rate", "target": "f1", "widths": [2, 4], "replicates": 8,
            "train_points": 100, "optimizer": {"max_epochs": 2000}}"#,
    )?;
    let out = experiments::run(&cfg)?;
    print!("{}", out.table("success_rate").unwrap().to_csv());

    let dir = std::env::temp_dir().join("relu-trainability-example");
    for p in experiments::write_outputs(&dir, &cfg, &out, Format::Json)? {
        println!("wrote {}", p.display());
    }
    let replay = ExperimentConfig::load(&dir.join("manifest.json"))?;
    println!("manifest replays the same config: {}", replay == cfg);
    Ok(())
}
