use env_logger::Env;

fn main() {
    env_logger::Builder::from_env(Env::default().default_filter_or("info")).init();
    std::process::exit(nlkpp::cli::main_with_args(std::env::args_os()));
}
