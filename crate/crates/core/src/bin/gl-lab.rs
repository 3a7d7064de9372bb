fn main() -> std::process::ExitCode {
    gl_lab::lab::cli::main()
}
