use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut stdout = std::io::stdout();
    let mut stderr = std::io::stderr();
    ExitCode::from(liger::cli::run(&args, &mut stdout, &mut stderr) as u8)
}
