fn main() -> std::process::ExitCode {
    schmidt_ldp::cli::main()
}
