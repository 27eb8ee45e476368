use clap::Parser;
use qfa_core::cli::{run, Cli};

fn main() -> anyhow::Result<()> {
    let code = run(Cli::parse())?;
    std::process::exit(code);
}
