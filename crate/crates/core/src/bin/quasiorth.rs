use std::io::Write;

fn main() {
    quasiorth::cli::configure_threads();
    let out = quasiorth::cli::run(std::env::args());
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    std::io::stdout().flush().ok();
    std::process::exit(out.code);
}
