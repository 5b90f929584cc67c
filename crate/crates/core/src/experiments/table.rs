use super::ExperimentConfig;
use crate::bdp::suggested_width;
use crate::dist::P2Case;
use crate::error::Result;
use crate::netcore::{Architecture, InitScheme};
use crate::output::Table;
use crate::rng::derive_seed;
use crate::trainability::{
    deep3_trainability, mc_trainability, rows_to_table, shallow_trainability, zero_bias_upper_1d, Requirement,
    TrainabilityEstimate, TrainabilityRow,
};

// (n1, n2, m2); a biased first layer only has a closed form for n1 = 1
const DEEP3_GRID: [(usize, usize, usize); 4] = [(1, 2, 1), (2, 2, 2), (3, 4, 2), (4, 6, 3)];
const DEEP3_GRID_N1_ONE: [(usize, usize, usize); 3] = [(1, 2, 1), (1, 4, 2), (1, 6, 3)];
const COROLLARY_GRID: [(usize, usize); 6] = [(1, 2), (2, 2), (2, 3), (2, 5), (3, 3), (4, 4)];

struct Builder<'a> {
    cfg: &'a ExperimentConfig,
    rows: Vec<TrainabilityRow>,
}

impl Builder<'_> {
    fn push(&mut self, label: &str, n: Vec<usize>, m: Vec<usize>, r: f64, schemes: &[InitScheme], estimate: TrainabilityEstimate) {
        self.rows.push(TrainabilityRow {
            label: label.into(),
            n,
            m,
            r,
            schemes: schemes.iter().map(|s| s.tag().to_string()).collect(),
            estimate,
        });
    }

    /// Adds a sampled row for the same configuration when samples were requested.
    fn cross_check(&mut self, label: &str, widths: Vec<usize>, m: Vec<usize>, r: f64, schemes: &[InitScheme]) -> Result<()> {
        if self.cfg.samples == 0 {
            return Ok(());
        }
        let arch = Architecture::new(widths.clone())?;
        let req = Requirement::new(m.clone(), &arch)?;
        let seed = derive_seed(self.cfg.seed, self.rows.len() as u64);
        let est = mc_trainability(&arch, schemes, r, &req, self.cfg.samples, seed)?;
        let hidden = arch.hidden().to_vec();
        self.push(&format!("{label}-mc"), hidden, m, r, schemes, est);
        Ok(())
    }
}

/// Closed-form trainability values: shallow nets over `cfg.widths`, the
/// suggested width for 200 required neurons at `r = 1/√3`, the four
/// three-layer cases and the zero-bias upper bound for deep scalar nets.
/// With `cfg.samples > 0` every analytic row is followed by a sampled one.
pub fn run_trainability_table(cfg: &ExperimentConfig) -> Result<Table> {
    let r = cfg.radius.unwrap_or(1.0);
    let mut b = Builder { cfg, rows: vec![] };
    let bias = [InitScheme::HeWithBias; 2];

    let mut shallow = vec![(2, 2, 1.0)];
    for &n in &cfg.widths {
        for m in [1, 2, n.div_ceil(2), n] {
            if m <= n && !shallow.contains(&(n, m, r)) {
                shallow.push((n, m, r));
            }
        }
    }
    for (n, m, r) in shallow {
        b.push("shallow", vec![n], vec![m], r, &bias, shallow_trainability(n, m, 1, r, &bias[0])?);
        b.cross_check("shallow", vec![1, n, 1], vec![m], r, &bias)?;
    }

    let r3 = 1.0 / 3f64.sqrt();
    let n = suggested_width(200, 1, r3, true)? as usize;
    b.push("suggested-width", vec![n], vec![200], r3, &bias, shallow_trainability(n, 200, 1, r3, &bias[0])?);

    for case in P2Case::ALL {
        let (s1, s2) = case.schemes();
        let schemes = [s1, s2, s2];
        let grid: &[_] = if case.first_layer_bias() { &DEEP3_GRID_N1_ONE } else { &DEEP3_GRID };
        for &(n1, n2, m2) in grid {
            let est = deep3_trainability(case, n1, n2, 1, m2, r)?;
            let label = format!("deep3-case-{}", case.id());
            b.push(&label, vec![n1, n2], vec![1, m2], r, &schemes, est);
            b.cross_check(&label, vec![1, n1, n2, 1], vec![1, m2], r, &schemes)?;
        }
    }

    // the corollary counts hidden layers
    let zero = [InitScheme::NormalNoBias { sigma: 1.0 }; 8];
    for (n, hidden) in COROLLARY_GRID {
        let mut widths = vec![1];
        widths.extend(std::iter::repeat_n(n, hidden));
        widths.push(1);
        let m = vec![1; hidden];
        let schemes = &zero[..=hidden];
        b.push("zero-bias-upper", vec![n; hidden], m.clone(), r, schemes, zero_bias_upper_1d(n, hidden)?);
        b.cross_check("zero-bias-upper", widths, m, r, schemes)?;
    }
    Ok(rows_to_table(&b.rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::ExperimentId;

    fn value(t: &Table, label: &str, n: &str, m: &str) -> f64 {
        let row = (0..t.len())
            .find(|&i| t.text(i, "label") == Some(label) && t.text(i, "n") == Some(n) && t.text(i, "m") == Some(m))
            .unwrap_or_else(|| panic!("no row {label} {n} {m}"));
        t.float(row, "value").unwrap()
    }

    #[test]
    fn known_rows() {
        let t = run_trainability_table(&ExperimentConfig::preset(ExperimentId::TrainabilityTable)).unwrap();
        assert!((value(&t, "shallow", "2", "2") - 0.5625).abs() < 1e-12);
        assert_eq!(value(&t, "zero-bias-upper", "2;2;2", "1;1;1"), 0.673828125);
        let sw = value(&t, "suggested-width", "300", "200");
        assert!(sw > 0.0 && sw < 1.0);
        assert!((0..t.len()).all(|i| t.text(i, "kind") != Some("monte-carlo")));
    }

    #[test]
    fn samples_add_cross_checks() {
        let mut c = ExperimentConfig::preset(ExperimentId::TrainabilityTable);
        c.widths = vec![2];
        c.samples = 200;
        let t = run_trainability_table(&c).unwrap();
        let mc = (0..t.len()).filter(|&i| t.text(i, "kind") == Some("monte-carlo")).count();
        // shallow (2,2) and (2,1), 4 + 4 + 3 + 3 three-layer rows, six corollary configs
        assert_eq!(mc, 2 + 14 + 6);
    }

    #[test]
    fn corollary_bound_holds_on_samples() {
        let mut c = ExperimentConfig::preset(ExperimentId::TrainabilityTable);
        c.widths = vec![];
        c.samples = 20_000;
        let t = run_trainability_table(&c).unwrap();
        for i in 0..t.len() {
            if t.text(i, "label") == Some("zero-bias-upper-mc") {
                let bound = t.float(i - 1, "value").unwrap();
                let mc = t.float(i, "value").unwrap();
                assert!(mc <= bound + 3.0 * t.float(i, "stderr").unwrap(), "{:?}: {mc} > {bound}", t.text(i, "n"));
            }
        }
    }
}
