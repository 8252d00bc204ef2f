use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FLOWKIT_LOG", "warn")).init();
    flowkit::cli::run(std::env::args_os())
}
