use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match tortuga_cli::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                tortuga_cli::EXIT_USAGE
            } else {
                tortuga_cli::EXIT_OK
            });
        }
    };
    let stdin = io::stdin();
    let mut input = stdin.lock();
    let mut out = io::stdout().lock();
    let code = tortuga_cli::run(&cli, &mut input, &mut out, &mut io::stderr());
    let _ = out.flush();
    ExitCode::from(code)
}
