use clap::Parser;

fn main() {
    let cli = fgl::cli::Cli::parse();
    std::process::exit(fgl::cli::run(&cli));
}
