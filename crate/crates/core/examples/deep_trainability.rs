//! Three-layer closed forms and the zero-bias upper bound next to sampled
//! trainability. Cases 1.1 and 2.1 are printed as stated and can exceed the
//! sampled value, or even 1.

use relu_trainability::dist::P2Case;
use relu_trainability::netcore::{Architecture, InitScheme};
use relu_trainability::trainability::{deep3_trainability, mc_trainability, zero_bias_upper_1d, Requirement};

fn main() -> relu_trainability::Result<()> {
    let r = 1.0;
    for case in P2Case::ALL {
        let (s1, s2) = case.schemes();
        let n1 = if case.first_layer_bias() { 1 } else { 2 };
        for (n2, m2) in [(2, 1), (4, 2), (6, 3)] {
            let formula = deep3_trainability(case, n1, n2, 1, m2, r)?.value;
            let arch = Architecture::new(vec![1, n1, n2, 1])?;
            let req = Requirement::new(vec![1, m2], &arch)?;
            let mc = mc_trainability(&arch, &[s1, s2, s2], r, &req, 20_000, 3)?;
            println!(
                "case {} n=({n1},{n2}) m2={m2}: formula {formula:.4}, sampled {:.4} +- {:.4}",
                case.id(),
                mc.value,
                mc.stderr
            );
        }
    }

    println!("\nzero-bias networks, width n, L hidden layers:");
    for (n, l) in [(2, 3), (3, 4), (5, 6)] {
        let bound = zero_bias_upper_1d(n, l)?.value;
        let mut widths = vec![1];
        widths.extend(std::iter::repeat_n(n, l));
        widths.push(1);
        let arch = Architecture::new(widths)?;
        let req = Requirement::new(vec![1; l], &arch)?;
        let schemes = vec![InitScheme::NormalNoBias { sigma: 1.0 }; l + 1];
        let mc = mc_trainability(&arch, &schemes, r, &req, 20_000, 5)?;
        println!("  n={n} L={l}: bound {bound:.6}, sampled {:.4}", mc.value);
    }
    Ok(())
}
