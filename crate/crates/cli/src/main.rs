mod args;
mod commands;
mod error;
mod output;

use clap::Parser;

use args::{Cli, Command};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RESPIRE_LOG", "info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("worker pool: {e}");
        }
    }
    let result = match cli.command {
        Command::Features(a) => commands::features(&a),
        Command::Pool(a) => commands::pool(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Footprint(a) => commands::footprint(&a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
