use clap::Parser;

use affect_signals::cli::{run, Cli};

fn main() -> anyhow::Result<()> {
    run(&Cli::parse())?;
    Ok(())
}
