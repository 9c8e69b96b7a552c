use std::process::ExitCode;

fn main() -> ExitCode {
    qipm_lab::cli::main()
}
