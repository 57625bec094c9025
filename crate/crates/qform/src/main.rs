use clap::Parser;

use qform::cli::{run, Cli};

fn main() {
    let (code, report) = run(&Cli::parse());
    println!("{report}");
    std::process::exit(code);
}
