use super::ExperimentConfig;
use crate::dist::{compose_dist, mc_active_dist, p2_matrix, pi1, ProbVector};
use crate::error::{Error, Result};
use crate::netcore::Architecture;
use crate::output::{Cell, Table};

/// Analytic laws available for `arch`: layer 1 always, layer 2 for scalar
/// inputs and a supported scheme pair.
pub(crate) fn analytic_layers(arch: &Architecture, schemes: &[crate::netcore::InitScheme], r: f64) -> Result<Vec<ProbVector>> {
    let hidden = arch.hidden();
    if hidden.is_empty() {
        return Ok(vec![]);
    }
    let d = u32::try_from(arch.input_dim()).map_err(|_| Error::config("input dimension too large"))?;
    let p1 = pi1(hidden[0], d, r, &schemes[0])?;
    let mut out = vec![p1.clone()];
    if hidden.len() >= 2 && arch.input_dim() == 1 {
        if let Ok(p) = p2_matrix(hidden[0], hidden[1], r, &schemes[0], &schemes[1]) {
            out.push(compose_dist(&p1, &[p])?);
        }
    }
    Ok(out)
}

/// Rows `layer, count, analytic, empirical, stderr`; the analytic cell is empty
/// where no closed form exists.
pub fn run_dist_check(cfg: &ExperimentConfig) -> Result<Table> {
    let widths = cfg.architecture.clone().ok_or_else(|| Error::config("dist-check needs an architecture"))?;
    let arch = Architecture::new(widths)?;
    let schemes = cfg.schemes.clone().ok_or_else(|| Error::config("dist-check needs one scheme per layer"))?;
    if schemes.len() != arch.depth() {
        return Err(Error::config(format!("{} schemes for {} layers", schemes.len(), arch.depth())));
    }
    let r = cfg.radius.unwrap_or(1.0);
    let samples = if cfg.samples == 0 { 100_000 } else { cfg.samples };
    let analytic = analytic_layers(&arch, &schemes, r)?;
    let mc = mc_active_dist(&arch, &schemes, r, samples, cfg.seed)?;
    let mut t = Table::new(&["layer", "count", "analytic", "empirical", "stderr"]);
    for (l, emp) in mc.layers.iter().enumerate() {
        for k in 0..emp.probs.len() {
            let a: Cell = analytic.get(l).map_or(Cell::Text(String::new()), |p| p.probs()[k].into());
            t.push(vec![emp.layer.into(), k.into(), a, emp.probs[k].into(), emp.stderr[k].into()]);
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::ExperimentId;
    use crate::netcore::InitScheme;

    #[test]
    fn sphere_with_bias_layer_one_matches() {
        let mut c = ExperimentConfig::preset(ExperimentId::DistCheck);
        c.samples = 20_000;
        let t = run_dist_check(&c).unwrap();
        // hidden layers of widths 6 and 4
        assert_eq!(t.len(), 7 + 5);
        let mut tv = 0.0;
        let mut total = 0.0;
        for i in 0..7 {
            tv += (t.float(i, "analytic").unwrap() - t.float(i, "empirical").unwrap()).abs() / 2.0;
            total += t.float(i, "empirical").unwrap();
        }
        assert!(tv < 0.02, "{tv}");
        assert!((total - 1.0).abs() < 1e-12);
        // layer 2 has no closed form for n₁ = 6 with a biased first layer
        assert_eq!(t.float(7, "analytic"), None);
    }

    #[test]
    fn no_bias_first_layer_is_a_point_mass() {
        let mut c = ExperimentConfig::preset(ExperimentId::DistCheck);
        c.samples = 2000;
        c.architecture = Some(vec![1, 6, 4, 1]);
        c.schemes = Some(vec![InitScheme::UnitSphereNoBias, InitScheme::HeWithBias, InitScheme::HeWithBias]);
        let t = run_dist_check(&c).unwrap();
        assert_eq!(t.float(6, "empirical"), Some(1.0));
        assert!(t.float(7, "analytic").is_some());
    }
}
