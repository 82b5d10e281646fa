use std::io::{self, BufReader};
use std::process::ExitCode;

fn main() -> ExitCode {
    let mut stdin = BufReader::new(io::stdin());
    let code = textrl::cli::run(std::env::args_os(), &mut stdin, &mut io::stdout(), &mut io::stderr());
    ExitCode::from(code as u8)
}
