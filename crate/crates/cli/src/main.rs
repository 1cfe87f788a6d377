use clap::{Parser, Subcommand};
use qfisher_cli::config::{ExperimentConfig, ExperimentKind, InputState};
use qfisher_cli::{experiments, plot, CliError};
use std::path::PathBuf;

/// Density-matrix magnetometry toolkit: estimate quantum Fisher
/// information bounds, train probe states, and reproduce the
/// trainability and bound-comparison studies.
#[derive(Parser)]
#[command(name = "qfisher", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Config file (flat key-value with sections); flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Base RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker thread count (0 = library default).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Output path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Enable shot-sampling mode where supported.
    #[arg(long, global = true)]
    shots: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Bounds report for configured input states.
    Estimate,
    /// Train the probe circuit to maximize the QFI lower bound.
    Optimize,
    /// Optimize across truncation orders m = 1..m.
    MSweep,
    /// Optimize across the configured purity list.
    PuritySweep,
    /// Variance of cost differences versus system size.
    VarianceScan,
    /// Lower bounds versus the purity-loss bound at optimal probes.
    BoundCompare,
    /// Render an experiment CSV as a static SVG.
    Plot {
        /// Input CSV produced by one of the experiments.
        input: PathBuf,
        /// One of: cost-vs-iteration, bounds-vs-purity, log-variance-vs-n.
        #[arg(long)]
        kind: String,
    },
    /// Print the default configuration in config-file format.
    Defaults,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::parse_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(workers) = cli.workers {
        cfg.workers = workers;
    }
    if let Some(out) = &cli.out {
        cfg.out_path = out.clone();
    }
    if cli.shots {
        cfg.shots_mode = true;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Defaults => {
            print!("{}", ExperimentConfig::default().render());
            Ok(())
        }
        Command::Plot { input, kind } => {
            let kind = plot::PlotKind::parse(kind)
                .ok_or_else(|| CliError::Config(format!("unknown plot kind '{kind}'")))?;
            let out = cli
                .out
                .clone()
                .unwrap_or_else(|| input.with_extension("svg"));
            plot::plot(input, kind, &out)?;
            eprintln!("wrote {}", out.display());
            Ok(())
        }
        Command::Estimate => {
            let cfg = load_config(&cli)?;
            let rows = experiments::run_estimate(&cfg)?;
            eprintln!("wrote {} ({} rows)", cfg.out_path.display(), rows.len());
            Ok(())
        }
        Command::Optimize | Command::MSweep | Command::PuritySweep => {
            let mut cfg = load_config(&cli)?;
            let kind = match &cli.command {
                Command::Optimize => ExperimentKind::Optimize,
                Command::MSweep => ExperimentKind::MSweep,
                _ => ExperimentKind::PuritySweep,
            };
            if matches!(kind, ExperimentKind::PuritySweep)
                && cfg.input_state != InputState::RandomPurity
            {
                cfg.input_state = InputState::RandomPurity;
            }
            let outcomes = experiments::run_optimize(&cfg, kind)?;
            for o in &outcomes {
                eprintln!(
                    "{}: final cost {:.6} (ceiling {:.6}, J_delta {:.6})",
                    o.label, o.final_cost, o.ceiling, o.final_report.j_delta
                );
            }
            eprintln!(
                "wrote {} and {}",
                cfg.out_path.display(),
                experiments::sibling_path(&cfg.out_path, "_final").display()
            );
            Ok(())
        }
        Command::VarianceScan => {
            let cfg = load_config(&cli)?;
            let rows = experiments::run_variance_scan(&cfg)?;
            eprintln!("wrote {} ({} rows)", cfg.out_path.display(), rows.len());
            Ok(())
        }
        Command::BoundCompare => {
            let cfg = load_config(&cli)?;
            let rows = experiments::run_bound_compare(&cfg)?;
            eprintln!("wrote {} ({} rows)", cfg.out_path.display(), rows.len());
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
