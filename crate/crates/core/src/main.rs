use std::process::ExitCode;

fn main() -> ExitCode {
    let out = std::io::stdout();
    let err = std::io::stderr();
    let status = arp_core::cli::main_with(std::env::args_os(), &mut out.lock(), &mut err.lock());
    ExitCode::from(status)
}
