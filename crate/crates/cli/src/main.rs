use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use boolnet_cli::config::Loaded;
use boolnet_cli::{output, selftest, CliError};

#[derive(Parser)]
#[command(name = "boolnet", version, about = "Noise sensitivity experiments for random Boolean networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single-point config.
    Run(RunArgs),
    /// Run every point of a config's sweep grid.
    Sweep(RunArgs),
    /// Quick oracle checks.
    Selftest,
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads.
    #[arg(long, env = "BOOLNET_WORKERS")]
    workers: Option<usize>,
    /// Override the config's root seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn run(args: &RunArgs, sweep: bool) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut loaded = Loaded::parse(&text)?;
    if let Some(s) = args.seed {
        loaded = loaded.with_seed(s);
    }
    match (sweep, loaded.config.sweep.is_some()) {
        (false, true) => return Err(CliError::Config("config has a sweep; use `boolnet sweep`".into())),
        (true, false) => return Err(CliError::Config("config has no `sweep` grid".into())),
        _ => {}
    }
    if let Some(w) = args.workers {
        if w == 0 {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(w).build_global().map_err(|e| CliError::Config(e.to_string()))?;
    }
    let summary = output::execute(&loaded, &args.out)?;
    for p in &summary.points {
        for m in &p.metrics {
            println!("point {} {}: {} ± {}", p.index, m.name, m.estimate, m.stderr);
        }
    }
    eprintln!("wrote {} (digest {})", summary.csv.display(), summary.digest);
    if let Some(s) = &summary.sidecar {
        eprintln!("wrote {}", s.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Run(a) => run(a, false),
        Command::Sweep(a) => run(a, true),
        Command::Selftest => {
            let checks = selftest::run();
            for c in &checks {
                println!("{} {}: {} [{:.2} s]", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail, c.seconds);
            }
            if checks.iter().all(|c| c.pass) {
                Ok(())
            } else {
                Err(CliError::Numeric("self-test failed".into()))
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("boolnet: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
