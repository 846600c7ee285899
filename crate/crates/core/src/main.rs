use clap::Parser;

fn main() {
    let cli = gradform::cli::Cli::parse();
    std::process::exit(gradform::cli::run(cli));
}
