use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use bdris_sim::channel::ScenarioConfig;
use bdris_sim::sim::{audit_invariants, run_sweep, summarize, write_csv, SweepSpec, SweepVar};
use bdris_sim::{Error, SchemeId};

#[derive(Parser)]
#[command(name = "bdris-sim", about = "BD-RIS-assisted MIMO rate simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKind {
    /// Sweep transmit power (dBm grid from the config).
    Pt,
    /// Sweep the Ricean factor of the RIS links.
    K,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded Monte Carlo sweep and write rates to CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        sweep: SweepKind,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated scheme list (default: all schemes).
        #[arg(long, value_delimiter = ',')]
        schemes: Option<Vec<String>>,
        /// Override the config's trial count.
        #[arg(long)]
        trials: Option<usize>,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the invariant audit and print a pass/fail report.
    Audit {
        /// Reduced trial counts.
        #[arg(long)]
        quick: bool,
        /// Optional scenario config (default: the shipped scenario).
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load_config(path: &PathBuf) -> Result<ScenarioConfig, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg: ScenarioConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("invalid config {}: {e}", path.display())))?;
    cfg.validate()?;
    Ok(cfg)
}

fn run() -> Result<u8, Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate {
            config,
            sweep,
            out,
            schemes,
            trials,
            seed,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.validate()?;
            let schemes: Vec<SchemeId> = match schemes {
                Some(names) => names
                    .iter()
                    .map(|n| n.trim().parse())
                    .collect::<Result<_, _>>()?,
                None => SchemeId::all().to_vec(),
            };
            let spec = match sweep {
                SweepKind::Pt => SweepSpec {
                    var: SweepVar::PtDbm,
                    values: cfg.pt_sweep_dbm.clone(),
                },
                SweepKind::K => SweepSpec {
                    var: SweepVar::RiceanK,
                    values: cfg.k_sweep.clone(),
                },
            };
            let results = run_sweep(&cfg, &spec, &schemes)?;
            let file = fs::File::create(&out)
                .map_err(|e| Error::Config(format!("cannot create {}: {e}", out.display())))?;
            write_csv(&results, std::io::BufWriter::new(file))
                .map_err(|e| Error::Config(format!("cannot write CSV: {e}")))?;
            for row in summarize(&results)? {
                println!(
                    "{:<14} {}={:<8} mean={:.4} bits/s/Hz stderr={:.4} ({} trials)",
                    row.scheme.to_string(),
                    row.sweep_var.name(),
                    row.sweep_value,
                    row.mean,
                    row.stderr,
                    row.trials
                );
            }
            println!("wrote {} rows to {}", results.len(), out.display());
            Ok(0)
        }
        Command::Audit { quick, config } => {
            let cfg = match config {
                Some(p) => load_config(&p)?,
                None => ScenarioConfig::default_scenario(),
            };
            let report = audit_invariants(&cfg, quick)?;
            print!("{report}");
            Ok(if report.passed() { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
