use std::process;

use clap::Parser;
use penum_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            process::exit(1);
        }
    }
}
