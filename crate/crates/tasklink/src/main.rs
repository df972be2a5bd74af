use std::process::ExitCode;

use clap::Parser;
use tracing_subscriber::EnvFilter;

use tasklink::cli::{run, Cli, UsageError, EXIT_USAGE};

fn main() -> ExitCode {
    tracing_subscriber::fmt().with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info"))).with_writer(std::io::stderr).init();
    let cli = Cli::parse();
    match run(cli, &mut std::io::stdout().lock()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = if e.downcast_ref::<UsageError>().is_some() { EXIT_USAGE } else { 1 };
            ExitCode::from(code as u8)
        }
    }
}
