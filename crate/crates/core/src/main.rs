fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = spectral_grasp::cli::init_thread_pool() {
        eprintln!("error: {e}");
        std::process::exit(spectral_grasp::cli::EXIT_USAGE);
    }
    std::process::exit(spectral_grasp::cli::run(std::env::args_os()));
}
