use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let run = gggp_cli::execute(std::env::args_os());
    // Ignore broken pipes on output; the exit code still reports the run.
    let _ = std::io::stdout().write_all(run.stdout.as_bytes());
    let _ = std::io::stderr().write_all(run.stderr.as_bytes());
    ExitCode::from(run.code as u8)
}
