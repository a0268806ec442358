use clap::Parser;

fn main() {
    std::process::exit(rwseg_cli::run(rwseg_cli::Cli::parse()));
}
