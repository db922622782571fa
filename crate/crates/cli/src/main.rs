use std::process::ExitCode;

use clap::Parser;
use qsot_cli::{run, Cli, CliError};

fn execute(cli: &Cli) -> Result<bool, CliError> {
    let output = run(cli)?;
    let text = output.render(cli.global.format);
    match &cli.global.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(output.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // --help and --version are not errors.
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.threads)
        .build_global()
    {
        eprintln!("error: cannot start thread pool: {e}");
        return ExitCode::from(3);
    }
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
