use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use zloch::cli::{self, AnalyzeOptions, CliError, Outcome, EXIT_INVALID};

#[derive(Parser)]
#[command(
    name = "zloch",
    version,
    about = "Vortex flows, zero loci and Poincaré duality on lattice 3-tori"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Integrality tolerance for vorticity and test thresholds.
    #[arg(long, global = true, env = "ZLOCH_TOLERANCE")]
    tolerance: Option<f64>,
    /// Seed for all random choices.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Print the JSON report instead of the summary.
    #[arg(long, global = true)]
    json: bool,
    /// Include wall-clock timing in the report.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Extract the zero locus of a section and compare its class with PD(c1).
    Analyze {
        #[arg(long)]
        section: PathBuf,
        #[arg(long)]
        bundle: PathBuf,
    },
    /// Test PD(c1) for membership in the image of the graph's flows.
    Obstruction {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        dims: String,
        /// Chern coordinates c1.
        #[arg(long, allow_hyphen_values = true)]
        class: String,
    },
    /// Shortest integer cycle in a homology class of the cubical 3-torus.
    ShortestFlow {
        #[arg(long)]
        dims: String,
        #[arg(long, allow_hyphen_values = true)]
        class: String,
        /// Lattice spacing, decimal or fraction.
        #[arg(long, default_value = "1")]
        spacing: String,
        #[arg(long, default_value_t = zloch::optimize::DEFAULT_NODE_LIMIT)]
        node_limit: usize,
        /// Write the witness chain here.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Moment map of random paired spinor tuples.
    MuCheck {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 3)]
        spinors: usize,
    },
    /// Local model checks for the harmonic spinor (w^N, 0).
    ModelLab {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 41)]
        lattice: usize,
        /// Exponents of the tuple used for the kernel-map check.
        #[arg(long, default_value = "1,2")]
        phi0: String,
    },
    /// Write a constant-flux bundle.
    GenBundle {
        #[arg(long)]
        dims: String,
        #[arg(long, allow_hyphen_values = true)]
        class: String,
        /// Apply a random gauge transformation with this seed.
        #[arg(long)]
        gauge_seed: Option<u64>,
        /// Set one link phase to π, breaking flux integrality.
        #[arg(long)]
        corrupt: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a section of a bundle: vortex seeds if given, random otherwise.
    GenSection {
        #[arg(long)]
        bundle: PathBuf,
        /// axis:x:y:multiplicity, repeatable.
        #[arg(long, allow_hyphen_values = true)]
        vortex: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_text(path: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

enum Done {
    Report(Outcome),
    Written,
}

fn run(cli: &Cli) -> Result<Done, CliError> {
    let g = &cli.global;
    let outcome = match &cli.command {
        Command::Analyze { section, bundle } => {
            let mut opts = AnalyzeOptions {
                seed: g.seed,
                ..AnalyzeOptions::default()
            };
            if let Some(t) = g.tolerance {
                opts.integrality_tolerance = t;
            }
            cli::analyze(&read_json(section)?, &read_json(bundle)?, opts)?
        }
        Command::Obstruction { graph, dims, class } => cli::obstruction(
            &read_json(graph)?,
            cli::parse_dims(dims)?,
            cli::parse_class(class)?,
        )?,
        Command::ShortestFlow {
            dims,
            class,
            spacing,
            node_limit,
            witness,
        } => {
            let out = cli::shortest(
                cli::parse_dims(dims)?,
                cli::parse_class(class)?,
                spacing,
                *node_limit,
            )?;
            if let Some(p) = witness {
                let text = serde_json::to_string_pretty(&out.report["witness"]).expect("json");
                fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            }
            out
        }
        Command::MuCheck { samples, spinors } => {
            cli::mu_check(*samples, *spinors, g.seed, g.tolerance.unwrap_or(1e-12))?
        }
        Command::ModelLab { n, lattice, phi0 } => {
            let exps: Vec<u32> = if phi0.trim().is_empty() {
                Vec::new()
            } else {
                let k = phi0.split(',').count();
                cli::parse_ints(phi0, k, "--phi0")?
            };
            cli::model_lab(*n, *lattice, &exps, g.seed)?
        }
        Command::GenBundle {
            dims,
            class,
            gauge_seed,
            corrupt,
            out,
        } => {
            let v = cli::gen_bundle(
                cli::parse_dims(dims)?,
                cli::parse_class(class)?,
                *gauge_seed,
                *corrupt,
            )?;
            write_text(out, &v.to_string()).map_err(|e| CliError::Input(format!("{e:#}")))?;
            return Ok(Done::Written);
        }
        Command::GenSection {
            bundle,
            vortex,
            out,
        } => {
            let seeds = vortex
                .iter()
                .map(|s| cli::parse_seed(s))
                .collect::<Result<Vec<_>, _>>()?;
            let seeds = if seeds.is_empty() {
                None
            } else {
                Some(seeds.as_slice())
            };
            let v = cli::gen_section(&read_json(bundle)?, seeds, g.seed)?;
            write_text(out, &v.to_string()).map_err(|e| CliError::Input(format!("{e:#}")))?;
            return Ok(Done::Written);
        }
    };
    Ok(Done::Report(outcome))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(EXIT_INVALID as u8);
        }
    }
    let start = Instant::now();
    match run(&cli) {
        Ok(Done::Written) => ExitCode::SUCCESS,
        Ok(Done::Report(mut out)) => {
            if cli.global.timing {
                out = out.with_timing(start);
            }
            let pretty = serde_json::to_string_pretty(&out.report).expect("json");
            if let Some(p) = &cli.global.report {
                if let Err(e) = fs::write(p, &pretty) {
                    eprintln!("error: writing {}: {e}", p.display());
                    return ExitCode::from(EXIT_INVALID as u8);
                }
            }
            if cli.global.json {
                println!("{pretty}");
            } else {
                print!("{}", cli::summary(&out.report));
            }
            ExitCode::from(out.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INVALID as u8)
        }
    }
}
