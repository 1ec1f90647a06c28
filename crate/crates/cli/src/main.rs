use std::process::ExitCode;

fn main() -> ExitCode {
    match softrange_cli::run(std::env::args_os()) {
        Ok(()) => ExitCode::from(softrange_cli::exit::SUCCESS),
        Err(e) => {
            eprintln!("error: {}", e.to_string().trim_end());
            ExitCode::from(e.exit_code())
        }
    }
}
