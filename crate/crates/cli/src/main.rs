//! `uqprop`: run, validate and list uncertainty-propagation scenarios.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use uqprop_cli::scenario::Scenario;
use uqprop_cli::{bundled, output, run, BUNDLED};

#[derive(Parser)]
#[command(name = "uqprop", version, about = "Uncertainty propagation through SDEs with DA, PLASMA and adaptive mixtures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or a bundled scenario name.
    Run {
        config: String,
        /// Override the Monte Carlo base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Parent directory for run artifacts.
        #[arg(long, env = "UQPROP_OUT_DIR", default_value = "runs")]
        out_dir: PathBuf,
    },
    /// Parse and check a scenario without running it.
    Validate { config: String },
    /// List the bundled scenarios.
    ListScenarios,
}

enum Failure {
    Validation(String),
    Runtime(String),
}

fn load(config: &str) -> Result<Scenario, Failure> {
    let text = match bundled(config) {
        Some(t) => t.to_string(),
        None => fs::read_to_string(config).map_err(|e| Failure::Validation(format!("{config}: {e}")))?,
    };
    let scn = Scenario::from_toml(&text).map_err(|e| Failure::Validation(e.to_string()))?;
    scn.validate().map_err(|e| Failure::Validation(e.to_string()))?;
    Ok(scn)
}

fn run_command(config: &str, seed: Option<u64>, threads: Option<usize>, out_dir: PathBuf) -> Result<bool, Failure> {
    let mut scn = load(config)?;
    if let Some(s) = seed {
        match scn.mc.as_mut() {
            Some(mc) => mc.seed = s,
            None => eprintln!("note: --seed ignored, scenario has no Monte Carlo run"),
        }
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(Failure::Validation("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Failure::Runtime(e.to_string()))?;
    let n_threads = pool.current_num_threads();
    let start = Instant::now();
    let outcome = pool.install(|| run::run(&scn)).map_err(Failure::Runtime)?;
    let total = start.elapsed().as_secs_f64();
    let dir = out_dir.join(&scn.name);
    let manifest = output::write_all(&dir, &scn, &outcome, n_threads, total).map_err(Failure::Runtime)?;
    println!("scenario {} ({} threads, {total:.2} s)", scn.name, n_threads);
    for line in &outcome.summary {
        println!("  {line}");
    }
    for (stage, t) in &outcome.timings {
        println!("  {stage}: {t:.3} s");
    }
    let mut ok = true;
    for c in &outcome.checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        ok &= c.pass;
    }
    println!("artifacts in {} (manifest {})", dir.display(), manifest.display());
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            seed,
            threads,
            out_dir,
        } => run_command(&config, seed, threads, out_dir),
        Command::Validate { config } => load(&config).map(|s| {
            println!("{}: valid (method {})", s.name, s.method.name());
            true
        }),
        Command::ListScenarios => {
            for (name, text) in BUNDLED {
                let desc = Scenario::from_toml(text).map(|s| s.description).unwrap_or_default();
                println!("{name:28} {desc}");
            }
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Validation(m)) => {
            eprintln!("validation error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("runtime error: {m}");
            ExitCode::from(1)
        }
    }
}
