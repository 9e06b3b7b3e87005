fn main() -> std::process::ExitCode {
    geri::cli::run()
}
