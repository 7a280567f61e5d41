fn main() -> std::process::ExitCode {
    bbpl::cli::main_from_env()
}
