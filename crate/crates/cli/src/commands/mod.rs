use crate::error::CliError;
use crate::{Cli, Command};

mod asympt;
mod complete;
mod harper;
mod quasiprob;
mod selftest;
mod states;

pub fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Harper => harper::run(g),
        Command::States(args) => states::run(g, args),
        Command::Quasiprob(args) => quasiprob::run(g, args),
        Command::Complete => complete::run(g),
        Command::Asympt(args) => asympt::run(g, args),
        Command::Selftest(args) => selftest::run(g, args),
    }
}
