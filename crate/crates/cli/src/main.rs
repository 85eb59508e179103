use std::process::ExitCode;

fn main() -> ExitCode {
    let stdout = std::io::stdout();
    match viscorom_cli::run(std::env::args_os(), &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
