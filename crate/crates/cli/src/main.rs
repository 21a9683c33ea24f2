//! Experiment harness CLI.
//!
//! Exit codes: 0 success, 2 configuration error, 3 divergence during
//! simulation, 4 precondition violation (for example a delay bound that
//! breaks the small-delay hypothesis).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lagtrack::experiments::{
    run_dataset_sweep, run_delay_sweep, run_online_trigger, run_tradeoff_report,
    validate_experiment, ExperimentConfig, ExperimentKind, Resolved, ResultTable,
};
use lagtrack::Error;

#[derive(Parser)]
#[command(
    name = "lagtrack",
    about = "GP tracking control under computational delay: simulation sweeps and bound reports",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// TOML experiment config; the built-in benchmark config when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte-Carlo repetition override.
    #[arg(long)]
    reps: Option<usize>,
    /// Output directory for CSV/JSON results.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Integrator step override.
    #[arg(long)]
    dt: Option<f64>,
    /// Suppress the per-row summary on stdout.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Fixed data sets under constant computation delays, plus the
    /// no-model baseline.
    DelaySweep(CommonArgs),
    /// Accuracy-delay tradeoff over initial training-set sizes.
    DatasetSweep(CommonArgs),
    /// Event-triggered online learning at the minimal admissible bound.
    OnlineTrigger(CommonArgs),
    /// Offline-vs-online tracking-bound certificate report.
    Tradeoff(CommonArgs),
    /// Parse and validate a config without running anything.
    ValidateConfig(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load(args: &CommonArgs, kind: ExperimentKind) -> Result<Resolved, Error> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            let cfg = ExperimentConfig::from_toml_str(&text)?;
            if cfg.kind != kind {
                return Err(Error::Config(format!(
                    "config kind {:?} does not match the subcommand",
                    cfg.kind
                )));
            }
            cfg
        }
        None => ExperimentConfig::benchmark(kind),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(reps) = args.reps {
        config.reps = reps;
    }
    if let Some(dt) = args.dt {
        config.dt = dt;
    }
    let rx = config.resolve()?;
    validate_experiment(&rx)?;
    Ok(rx)
}

fn out_dir(args: &CommonArgs, kind: &str) -> PathBuf {
    args.out
        .clone()
        .unwrap_or_else(|| PathBuf::from("out").join(kind))
}

fn print_table(table: &ResultTable, quiet: bool) {
    if quiet {
        return;
    }
    println!(
        "{:<10} {:>12} {:>12} {:>12} {:>12}",
        "label", table.sweep_name, "mean", "min", "max"
    );
    for row in &table.rows {
        println!(
            "{:<10} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
            row.label,
            row.sweep_value,
            row.mean_max_error(),
            row.min_max_error(),
            row.max_max_error()
        );
    }
}

fn print_counts(table: &ResultTable, quiet: bool) {
    if quiet {
        return;
    }
    println!(
        "{:<10} {:>12} {:>12} {:>12} {:>10}",
        "label", table.sweep_name, "evaluated", "selected", "fraction"
    );
    for row in &table.rows {
        if row.total_evaluated() == 0 {
            continue;
        }
        println!(
            "{:<10} {:>12.6} {:>12} {:>12} {:>10.4}",
            row.label,
            row.sweep_value,
            row.total_evaluated(),
            row.total_selected(),
            row.selected_fraction()
        );
    }
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::DelaySweep(args) => {
            let rx = load(&args, ExperimentKind::DelaySweep)?;
            let dir = out_dir(&args, "delay-sweep");
            let table = run_delay_sweep(&rx, Some(&dir))?;
            print_table(&table, args.quiet);
            if !args.quiet {
                println!("results written to {}", dir.display());
            }
            Ok(())
        }
        Command::DatasetSweep(args) => {
            let rx = load(&args, ExperimentKind::DatasetSweep)?;
            let dir = out_dir(&args, "dataset-sweep");
            let table = run_dataset_sweep(&rx, Some(&dir))?;
            print_table(&table, args.quiet);
            if !args.quiet {
                println!("results written to {}", dir.display());
            }
            Ok(())
        }
        Command::OnlineTrigger(args) => {
            let rx = load(&args, ExperimentKind::OnlineTrigger)?;
            let dir = out_dir(&args, "online-trigger");
            let table = run_online_trigger(&rx, Some(&dir))?;
            print_table(&table, args.quiet);
            print_counts(&table, args.quiet);
            if !args.quiet {
                println!("results written to {}", dir.display());
            }
            Ok(())
        }
        Command::Tradeoff(args) => {
            let rx = load(&args, ExperimentKind::TradeoffSweep)?;
            let dir = out_dir(&args, "tradeoff");
            let report = run_tradeoff_report(&rx, Some(&dir))?;
            if !args.quiet {
                println!(
                    "xi = {:.6}, chi = {:.6}, L_f = {:.6}, F_d = {:.6}",
                    report.xi, report.chi, report.l_f, report.f_d
                );
                println!(
                    "eta_sup = {:.6}, eta_inf = {:.6}",
                    report.eta_sup, report.eta_inf
                );
                for e in &report.entries {
                    let c = &e.certificate;
                    println!(
                        "delta_bar_1 = {:.4}, delta_bar_2 = {:.4}: e_bar_offline = {:.6}, e_bar_online = {:.6}",
                        c.delta_bar_1, c.delta_bar_2, e.e_bar_offline, e.e_bar_online
                    );
                    println!(
                        "  disjunct 1: {:.6} >= {:.6} -> {}",
                        c.first_lhs, c.first_rhs, c.first_holds
                    );
                    println!(
                        "  disjunct 2: {:.6} >= {:.6} -> {}",
                        c.second_lhs, c.second_rhs, c.second_holds
                    );
                    println!(
                        "  verdict: {}",
                        if c.offline_certified {
                            "offline certified no worse than online"
                        } else {
                            "no certificate"
                        }
                    );
                }
                println!("report written to {}", dir.join("tradeoff_report.json").display());
            }
            Ok(())
        }
        Command::ValidateConfig(args) => {
            let path = args.config.clone().ok_or_else(|| {
                Error::Config("validate-config requires --config <path>".to_string())
            })?;
            let text = fs::read_to_string(&path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            let config = ExperimentConfig::from_toml_str(&text)?;
            let mut config = config;
            if let Some(seed) = args.seed {
                config.seed = seed;
            }
            if let Some(reps) = args.reps {
                config.reps = reps;
            }
            if let Some(dt) = args.dt {
                config.dt = dt;
            }
            let rx = config.resolve()?;
            validate_experiment(&rx)?;
            if !args.quiet {
                println!("config ok: {:?}, seed {}, reps {}", rx.config.kind, rx.config.seed, rx.config.reps);
            }
            Ok(())
        }
    }
}
