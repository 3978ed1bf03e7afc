fn main() -> std::process::ExitCode {
    mlc::cli::main()
}
