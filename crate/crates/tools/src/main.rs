use std::process::ExitCode;

fn main() -> ExitCode {
    match mcc_tools::cli::run(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mcc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
