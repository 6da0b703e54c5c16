use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use fklab_cli::{run, Command, RunConfig};
use fklab_core::Exec;

#[derive(Parser, Debug)]
#[command(name = "fklab", version, about = "Frenkel-Kontorova chain laboratory")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// INI run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `[output] directory`, default ./out.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `[environment] seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let mut cfg = match RunConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    let exec = match cli.threads {
        Some(0) => {
            eprintln!("config error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        Some(1) => Exec::Sequential,
        Some(n) => {
            #[cfg(feature = "parallel")]
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("warning: cannot size thread pool: {e}");
            }
            #[cfg(not(feature = "parallel"))]
            let _ = n;
            Exec::Parallel
        }
        None => Exec::Parallel,
    };
    let dir = cli.out.or_else(|| cfg.directory.clone()).unwrap_or_else(|| PathBuf::from("out"));
    match run(cli.command, &cfg, &dir, exec) {
        Ok(summary) => {
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "{} ok: config {} -> {} in {:.3} s",
                summary.command,
                &summary.config_hash[..12],
                dir.display(),
                start.elapsed().as_secs_f64()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}: {e}", cli.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
