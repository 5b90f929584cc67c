use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use relu_trainability::bdp::{bdp, suggested_width};
use relu_trainability::dist::P2Case;
use relu_trainability::experiments::{self, ExperimentConfig, ExperimentId};
use relu_trainability::interp::{build_interpolant_seeded, count_slope_changes, line_coordinates, max_residual, witness_data};
use relu_trainability::netcore::{Architecture, InitScheme};
use relu_trainability::output::{Format, Table};
use relu_trainability::trainability::{
    deep3_trainability, mc_trainability, rows_to_table, shallow_trainability, zero_bias_upper_1d, Requirement,
    TrainabilityRow,
};
use relu_trainability::{Dataset, Error, Result};

#[derive(Parser)]
#[command(version, about = "Born-dead probabilities and trainability of ReLU networks")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct Global {
    /// JSON experiment config (or a manifest written by a previous run).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; tables go to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Monte Carlo samples; zero disables sampled checks.
    #[arg(long, global = true)]
    samples: Option<u64>,
    #[arg(long, global = true)]
    replicates: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Fmt::Csv)]
    format: Fmt,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fmt {
    Csv,
    Json,
}

impl From<Fmt> for Format {
    fn from(f: Fmt) -> Self {
        match f {
            Fmt::Csv => Format::Csv,
            Fmt::Json => Format::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Born-dead probability of one neuron with its bounds.
    Bdp {
        #[arg(long, short)]
        d: u32,
        #[arg(long, short)]
        r: f64,
        /// Also report the width needed for this many active neurons.
        #[arg(long)]
        m: Option<u64>,
    },
    /// Closed-form or sampled trainability.
    Trainability {
        #[command(subcommand)]
        kind: TrainCmd,
    },
    /// Analytic vs sampled active-neuron distributions.
    Dist {
        /// Layer widths including input and output, e.g. 1,6,4,1.
        #[arg(long, value_delimiter = ',')]
        arch: Vec<usize>,
        /// One scheme tag per layer, e.g. he-with-bias.
        #[arg(long, value_delimiter = ',')]
        schemes: Vec<String>,
        #[arg(long, short, default_value_t = 1.0)]
        r: f64,
    },
    /// Builds the width-m interpolant of m + 1 points.
    Interpolate {
        /// Width of the witness data interpolant (m + 1 points).
        #[arg(long, short, default_value_t = 10)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// CSV file with x… columns then one y column, used instead of witness data.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Desk-scale experiments.
    Experiment {
        #[command(subcommand)]
        action: ExpCmd,
    },
}

#[derive(Subcommand)]
enum TrainCmd {
    /// Shallow network of width n needing m active neurons.
    Shallow {
        #[arg(long, short)]
        n: usize,
        #[arg(long, short)]
        m: usize,
        #[arg(long, short, default_value_t = 1)]
        d: u32,
        #[arg(long, short)]
        r: f64,
        #[arg(long, default_value = "he-with-bias")]
        scheme: String,
    },
    /// Three-layer scalar-input network, case 1.1, 1.2, 2.1 or 2.2.
    Deep3 {
        #[arg(long)]
        case: String,
        #[arg(long)]
        n1: usize,
        #[arg(long)]
        n2: usize,
        #[arg(long, default_value_t = 1)]
        m1: usize,
        #[arg(long)]
        m2: usize,
        #[arg(long, short)]
        r: f64,
    },
    /// Upper bound for deep zero-bias scalar networks of constant width.
    ZeroBiasUpper {
        #[arg(long, short)]
        n: usize,
        /// Number of hidden layers.
        #[arg(long)]
        hidden: usize,
    },
    /// Sampled trainability of an arbitrary architecture.
    Mc {
        #[arg(long, value_delimiter = ',')]
        arch: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        schemes: Vec<String>,
        /// Required active neurons per hidden layer.
        #[arg(long, value_delimiter = ',')]
        m: Vec<usize>,
        #[arg(long, short, default_value_t = 1.0)]
        r: f64,
    },
}

#[derive(Subcommand)]
enum ExpCmd {
    List,
    Run { id: String },
}

fn schemes_from(tags: &[String]) -> Result<Vec<InitScheme>> {
    tags.iter().map(|t| InitScheme::from_tag(t)).collect()
}

fn emit(g: &Global, name: &str, table: &Table) -> Result<()> {
    let fmt = Format::from(g.format);
    match &g.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let p = dir.join(format!("{name}.{}", fmt.extension()));
            std::fs::write(&p, fmt.render(table))?;
            eprintln!("wrote {}", p.display());
        }
        None => print!("{}", fmt.render(table)),
    }
    Ok(())
}

fn row(label: &str, n: Vec<usize>, m: Vec<usize>, r: f64, schemes: &[InitScheme], est: relu_trainability::trainability::TrainabilityEstimate) -> TrainabilityRow {
    TrainabilityRow {
        label: label.into(),
        n,
        m,
        r,
        schemes: schemes.iter().map(|s| s.tag().to_string()).collect(),
        estimate: est,
    }
}

fn run_experiment(g: &Global, id: &str) -> Result<()> {
    let id = ExperimentId::parse(id)?;
    let mut cfg = match &g.config {
        Some(p) => {
            let c = ExperimentConfig::load(p)?;
            if c.experiment != id {
                return Err(Error::Config(format!("config is for '{}', not '{}'", c.experiment.id(), id.id())));
            }
            c
        }
        None => ExperimentConfig::preset(id),
    };
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(s) = g.samples {
        cfg.samples = s;
    }
    if let Some(r) = g.replicates {
        cfg.replicates = r;
    }
    if g.out.is_some() {
        cfg.output.clone_from(&g.out);
    }
    let cfg = cfg.with_defaults();
    let out = experiments::run(&cfg)?;
    match &cfg.output {
        Some(dir) => {
            for p in experiments::write_outputs(dir, &cfg, &out, g.format.into())? {
                eprintln!("wrote {}", p.display());
            }
        }
        None => {
            for (name, t) in &out.tables {
                println!("# {name}");
                print!("{}", Format::from(g.format).render(t));
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    let seed = g.seed.unwrap_or(0);
    let samples = g.samples.unwrap_or(0);
    match cli.cmd {
        Command::Bdp { d, r, m } => {
            let b = bdp(d, r)?;
            let mut cols = vec!["d", "r", "exact", "lower", "upper"];
            if m.is_some() {
                cols.extend(["m", "suggested_width"]);
            }
            let mut t = Table::new(&cols);
            let mut cells = vec![(d as usize).into(), r.into(), b.exact.into(), b.lower.into(), b.upper.into()];
            if let Some(m) = m {
                cells.extend([m.into(), suggested_width(m, d, r, true)?.into()]);
            }
            t.push(cells);
            emit(g, "bdp", &t)
        }
        Command::Trainability { kind } => {
            let r = match kind {
                TrainCmd::Shallow { n, m, d, r, scheme } => {
                    let s = InitScheme::from_tag(&scheme)?;
                    row("shallow", vec![n], vec![m], r, &[s], shallow_trainability(n, m, d, r, &s)?)
                }
                TrainCmd::Deep3 { case, n1, n2, m1, m2, r } => {
                    let case = P2Case::from_id(&case)?;
                    let (s1, s2) = case.schemes();
                    row(
                        &format!("deep3-case-{}", case.id()),
                        vec![n1, n2],
                        vec![m1, m2],
                        r,
                        &[s1, s2, s2],
                        deep3_trainability(case, n1, n2, m1, m2, r)?,
                    )
                }
                TrainCmd::ZeroBiasUpper { n, hidden } => {
                    // the bound does not depend on r
                    row("zero-bias-upper", vec![n; hidden], vec![1; hidden], 1.0, &[], zero_bias_upper_1d(n, hidden)?)
                }
                TrainCmd::Mc { arch, schemes, m, r } => {
                    if samples == 0 {
                        return Err(Error::Config("trainability mc needs --samples".into()));
                    }
                    let a = Architecture::new(arch)?;
                    let s = schemes_from(&schemes)?;
                    let req = Requirement::new(m.clone(), &a)?;
                    row("mc", a.hidden().to_vec(), m, r, &s, mc_trainability(&a, &s, r, &req, samples, seed)?)
                }
            };
            emit(g, "trainability", &rows_to_table(&[r]))
        }
        Command::Dist { arch, schemes, r } => {
            let mut cfg = ExperimentConfig::preset(ExperimentId::DistCheck);
            cfg.architecture = Some(arch);
            cfg.schemes = Some(schemes_from(&schemes)?);
            cfg.radius = Some(r);
            cfg.seed = seed;
            if samples > 0 {
                cfg.samples = samples;
            }
            emit(g, "dist", &experiments::run_dist_check(&cfg)?)
        }
        Command::Interpolate { m, dim, data } => {
            let data = match data {
                Some(p) => Dataset::from_csv(&std::fs::read_to_string(&p)?, None)?,
                None => witness_data(m, seed, dim)?,
            };
            let net = build_interpolant_seeded(&data, seed)?;
            let y: Vec<f64> = data.targets.iter().map(|t| t[0]).collect();
            let changes = count_slope_changes(&line_coordinates(&data)?, &y, 1e-9);
            let mut t = Table::new(&["points", "dim", "width", "max_residual", "slope_changes"]);
            t.push(vec![
                data.len().into(),
                data.input_dim().into(),
                net.arch().hidden()[0].into(),
                max_residual(&net, &data)?.into(),
                changes.into(),
            ]);
            emit(g, "interpolate", &t)
        }
        Command::Experiment { action } => match action {
            ExpCmd::List => {
                for id in ExperimentId::ALL {
                    println!("{:<20} {}", id.id(), id.describe());
                }
                Ok(())
            }
            ExpCmd::Run { id } => run_experiment(g, &id),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::UnsupportedCase(_) => 3,
                Error::Io(_) => 1,
                _ => 2,
            })
        }
    }
}
