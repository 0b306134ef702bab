use ionage_cli::config::{parse_args, ParseOutcome};
use ionage_cli::run::run;
use std::process::ExitCode;

fn main() -> ExitCode {
    let outcome = parse_args(std::env::args_os()).and_then(|o| match o {
        ParseOutcome::Info(text) => {
            print!("{text}");
            Ok(())
        }
        ParseOutcome::Run(config) => run(&config),
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string();
            if msg.starts_with("error:") {
                eprintln!("{}", msg.trim_end());
            } else {
                eprintln!("ionage: {}", msg.trim_end());
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
