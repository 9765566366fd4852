use clap::error::ErrorKind;
use clap::Parser;

use vie_cli::cli::{dispatch, Cli};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                std::process::exit(0);
            }
            eprint!("{err}");
            std::process::exit(2);
        }
    };
    if let Err(err) = dispatch(cli) {
        eprintln!("error: {}", err.message());
        std::process::exit(err.exit_code());
    }
}
