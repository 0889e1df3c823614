use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use seqaudit::csv_out::{out_path, write_summary, write_table, write_trace};
use seqaudit::experiments::{
    decoupling_grid, dpsgd_audit, epsilon_sweep, mean_mechanism_table, single_audit, sweep_rows,
    synthetic_suite,
};
use seqaudit::summary::strategy_str;
use seqaudit::{ExperimentConfig, HarnessError};
use seqaudit_core::mechanisms::MechanismKind;
use seqaudit_core::seq_test::Strategy;

#[derive(Parser)]
#[command(
    name = "seqaudit",
    version,
    about = "Sequential auditor for approximate differential privacy",
    long_about = "Audits black-box mechanisms by betting on kernel MMD evidence from paired \
                  output streams. Subcommands reproduce the benchmark tables, the decoupling \
                  grid, synthetic power studies, and DP-SGD canary sweeps; results land as CSV \
                  files under --out."
)]
struct Cli {
    /// JSON experiment configuration; omitted fields take protocol defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed override
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for CSV files
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Wealth process: ONS-driven supermartingale or e-process
    #[arg(long, global = true, value_enum)]
    strategy: Option<StrategyArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Ons,
    Eprocess,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::Ons => Strategy::OnsSupermartingale,
            StrategyArg::Eprocess => Strategy::EProcess,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one audit of the configured stream and write its trace
    Audit,
    /// Mean-mechanism benchmark (supermartingale wealth)
    Table1,
    /// Mean-mechanism benchmark (e-process wealth)
    Table2,
    /// 8-variant sequential/batch decoupling grid
    Decouple,
    /// Synthetic two-sample studies: uniforms, perturbed uniform, Gaussian shifts
    Synthetic,
    /// DP-SGD canary audits with per-step privacy lower bounds
    Dpsgd,
    /// Privacy lower-bound sweep over the configured stream
    SweepEpsilon,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: Cli) -> seqaudit::Result<()> {
    if let Ok(raw) = std::env::var("SEQAUDIT_THREADS") {
        if raw.parse::<usize>().map_or(true, |n| n < 1) {
            return Err(HarnessError::Usage(format!(
                "SEQAUDIT_THREADS must be an integer >= 1, got {raw:?}"
            )));
        }
    }
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(strategy) = cli.strategy {
        cfg.strategy = strategy.into();
    }
    cfg.validate()?;
    let out = cli.out.unwrap_or_else(|| PathBuf::from("seqaudit-out"));
    let hash = cfg.fingerprint();

    match cli.command {
        Command::Audit => {
            let result = single_audit(&cfg)?;
            write_trace(&out_path(&out, "audit_trace.csv"), hash, &result.trace)?;
            println!(
                "audit: rejected={} stopping_time={} final_log_wealth={:.6} pilot={} truncated={}",
                result.rejected,
                result
                    .stopping_time
                    .map(|t| t.to_string())
                    .unwrap_or_else(|| "-".into()),
                result.final_log_wealth,
                result.pilot_consumed,
                result.truncated
            );
            println!("trace written to {}", out.join("audit_trace.csv").display());
        }
        Command::Table1 | Command::Table2 => {
            let strategy = match cli.command {
                Command::Table1 => cfg.strategy,
                _ => Strategy::EProcess,
            };
            let name = match cli.command {
                Command::Table1 => "table1",
                _ => "table2",
            };
            let run = mean_mechanism_table(&cfg, strategy, &MechanismKind::ALL, true)?;
            print_summary_rows(&run.rows);
            write_summary(
                &out_path(&out, &format!("{name}_summary.csv")),
                hash,
                &run.rows,
            )?;
            for entry in &run.traces {
                write_trace(
                    &out_path(&out, &format!("{name}_{}", entry.name)),
                    entry.config_fingerprint,
                    &entry.trace,
                )?;
            }
            println!(
                "{} summary + {} trace files written to {}",
                name,
                run.traces.len(),
                out.display()
            );
        }
        Command::Decouple => {
            let cells = decoupling_grid(&cfg)?;
            println!(
                "{:<34} {:>12} {:>12} {:>12}",
                "variant", "DPGaussian", "NonDP1", "NonDP2"
            );
            for chunk in cells.chunks(3) {
                println!(
                    "{:<34} {:>12.2} {:>12.2} {:>12.2}",
                    chunk[0].variant,
                    chunk[0].rejection_rate,
                    chunk[1].rejection_rate,
                    chunk[2].rejection_rate
                );
            }
            let rows: Vec<String> = cells
                .iter()
                .map(|c| {
                    format!(
                        "{},{},{:.12e},{}",
                        c.variant, c.mechanism, c.rejection_rate, c.runs
                    )
                })
                .collect();
            write_table(
                &out_path(&out, "decouple.csv"),
                hash,
                "variant,mechanism,rejection_rate,runs",
                &rows,
            )?;
            println!("grid written to {}", out.join("decouple.csv").display());
        }
        Command::Synthetic => {
            let rows = synthetic_suite(&cfg)?;
            print_summary_rows(&rows);
            write_summary(&out_path(&out, "synthetic_summary.csv"), hash, &rows)?;
            println!(
                "summary written to {}",
                out.join("synthetic_summary.csv").display()
            );
        }
        Command::Dpsgd => {
            for (fixture, sigma) in [
                ("private", cfg.canary_sigma_private),
                ("nonprivate", cfg.canary_sigma_nonprivate),
            ] {
                let sweeps = dpsgd_audit(&cfg, sigma, fixture)?;
                for (run_idx, sweep) in sweeps.iter().enumerate() {
                    let name = format!("dpsgd_{fixture}_run{run_idx}.csv");
                    write_table(&out_path(&out, &name), hash, "t,eps_lb", &sweep_rows(sweep))?;
                    let last = sweep.lower_bound.last().copied().unwrap_or(f64::NAN);
                    println!(
                        "dpsgd {fixture} run {run_idx}: eps_lb({}) = {:.4}",
                        sweep.lower_bound.len(),
                        last
                    );
                }
            }
            println!("lower-bound traces written to {}", out.display());
        }
        Command::SweepEpsilon => {
            let sweep = epsilon_sweep(&cfg)?;
            write_table(
                &out_path(&out, "sweep_epsilon.csv"),
                hash,
                "t,eps_lb",
                &sweep_rows(&sweep),
            )?;
            for (candidate, result) in sweep.candidates.iter().zip(&sweep.results) {
                println!(
                    "candidate eps={candidate}: rejected={} stop={}",
                    result.rejected,
                    result
                        .stopping_time
                        .map(|t| t.to_string())
                        .unwrap_or_else(|| "-".into()),
                );
            }
            let last = sweep.lower_bound.last().copied().unwrap_or(f64::NAN);
            println!("final eps_lb = {last:.4}");
            println!(
                "trace written to {}",
                out.join("sweep_epsilon.csv").display()
            );
        }
    }
    Ok(())
}

fn print_summary_rows(rows: &[seqaudit::summary::SummaryRow]) {
    println!(
        "{:<26} {:>8} {:>10} {:>12} {:>14} {:>6}",
        "mechanism", "epsilon", "strategy", "rej_rate", "mean_stop", "runs"
    );
    for r in rows {
        println!(
            "{:<26} {:>8} {:>10} {:>6.2}±{:<5.2} {:>14} {:>6}",
            r.mechanism,
            r.epsilon,
            strategy_str(r.strategy),
            r.rejection_rate,
            r.rate_stderr,
            r.mean_stop
                .map(|m| format!("{m:.1}±{:.1}", r.stop_stderr.unwrap_or(0.0)))
                .unwrap_or_else(|| "-".into()),
            r.runs
        );
    }
}
