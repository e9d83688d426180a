use std::process::ExitCode;

use clap::Parser;
use weyllab_cli::{render, run, Cli, EXIT_VIOLATION};

fn threads() -> Result<(), String> {
    let Ok(v) = std::env::var("WEYLLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().map_err(|_| format!("WEYLLAB_THREADS = '{v}' is not a thread count"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let out = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let text = render(&cli, &out);
    let written = match &cli.output {
        Some(p) => std::fs::write(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    let side = out.files.iter().try_for_each(|(p, body)| std::fs::write(p, body));
    if let Err(e) = written.and(side) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if out.violations > 0 {
        eprintln!("{} bound violation(s)", out.violations);
        return ExitCode::from(EXIT_VIOLATION as u8);
    }
    ExitCode::SUCCESS
}
