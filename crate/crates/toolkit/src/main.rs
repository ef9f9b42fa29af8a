use std::io::{self, Write};

fn main() {
    let stdin = io::stdin();
    let (stdout, stderr) = (io::stdout(), io::stderr());
    let code = mrpn_toolkit::cli::run(
        std::env::args_os(),
        &mut stdin.lock(),
        &mut stdout.lock(),
        &mut stderr.lock(),
    );
    let _ = io::stdout().flush();
    std::process::exit(code);
}
