use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    kemeny_harness::cli::main_with(&args, &mut std::io::stdout(), &mut std::io::stderr())
}
