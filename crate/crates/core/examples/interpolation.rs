//! Width-m network through m + 1 points, and witness data that no narrower
//! network can fit.

use relu_trainability::datadep::random_inputs;
use relu_trainability::interp::{build_interpolant, count_slope_changes, line_coordinates, max_residual, witness_data};
use relu_trainability::Dataset;

fn main() -> relu_trainability::Result<()> {
    let xs = random_inputs(21, 3, 4);
    let ys = (0..21).map(|i| vec![(i as f64 * 0.7).sin()]).collect();
    let data = Dataset::enclosed(xs, ys)?;
    let net = build_interpolant(&data)?;
    println!("21 points in 3-D: width {}, max residual {:.2e}", net.arch().hidden()[0], max_residual(&net, &data)?);

    let w = witness_data(8, 1, 2)?;
    let y: Vec<f64> = w.targets.iter().map(|t| t[0]).collect();
    let alpha = line_coordinates(&w)?;
    println!("witness data for m = 8: {} points, {} slope changes", w.len(), count_slope_changes(&alpha, &y, 1e-9));
    let net = build_interpolant(&w)?;
    println!("its interpolant has width {} and residual {:.2e}", net.arch().hidden()[0], max_residual(&net, &w)?);
    Ok(())
}
