use std::process::ExitCode;

use hive_cote::experiments::{run_experiment, RunSpec, USAGE};

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "-h" || a == "--help") {
        print!("{USAGE}");
        return ExitCode::SUCCESS;
    }
    let spec = match RunSpec::from_args(&args) {
        Ok(spec) => spec,
        Err(error) => {
            eprintln!("error: {error}");
            eprint!("{USAGE}");
            return ExitCode::from(2);
        }
    };
    match run_experiment(&spec) {
        Ok(outcome) => {
            for path in &outcome.skipped {
                println!("skipped existing {}", path.display());
            }
            for path in &outcome.written {
                println!("wrote {}", path.display());
            }
            if let Some(accuracy) = outcome.test_accuracy {
                println!("test accuracy {accuracy}");
            }
            ExitCode::SUCCESS
        }
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::FAILURE
        }
    }
}
