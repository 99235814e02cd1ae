use canonical_spectra::cli::{execute, Cli};
use clap::Parser;

fn main() {
    // clap reports usage errors itself, with exit code 2
    let outcome = execute(&Cli::parse());
    println!("{}", serde_json::to_string_pretty(&outcome.summary).expect("summary serializes"));
    std::process::exit(outcome.code);
}
