fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    std::process::exit(chirp_atlas::cli::run(std::env::args_os()));
}
