use std::process::ExitCode;

use invasion::driver::run;
use invasion_cli::{parse_cli, Parsed};

fn main() -> ExitCode {
    let config = match parse_cli(std::env::args_os()) {
        Ok(Parsed::Info(text)) => {
            print!("{text}");
            return ExitCode::SUCCESS;
        }
        Ok(Parsed::Run { config, warnings }) => {
            for w in warnings {
                eprintln!("warning: {w}");
            }
            config
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    match run(&config) {
        Ok(summary) => {
            println!(
                "{}: {} steps, {} snapshots in {:.2}s, output in {}",
                config.experiment,
                summary.steps,
                summary.snapshots.len(),
                summary.wall_time_s,
                config.out_dir.display()
            );
            if summary.lemma_violations > 0 {
                eprintln!("warning: {} bound violations recorded", summary.lemma_violations);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
