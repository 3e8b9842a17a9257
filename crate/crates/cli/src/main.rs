mod args;
mod artifacts;
mod audio;
mod commands;
mod error;
mod synth;

use clap::Parser;

use args::{Cli, Command};

fn run(cli: &Cli) -> error::Result<()> {
    match &cli.command {
        Command::SimulateGaf(a) => commands::simulate_gaf(a),
        Command::Tables(a) => commands::tables(a),
        Command::Calibrate(a) => commands::calibrate_cmd(a),
        Command::Filter(a) => commands::filter(a),
        Command::Analyze(a) => commands::analyze_cmd(a),
        Command::ConvergenceCheck(a) => commands::convergence_check(a),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
