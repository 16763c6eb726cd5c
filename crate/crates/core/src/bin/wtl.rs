use std::io::{self, IsTerminal, Read, Write};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    // Only commands reading `-` consume stdin.
    let mut stdin = Vec::new();
    let wants_stdin = args.iter().any(|a| a == "-");
    if wants_stdin && !io::stdin().is_terminal() {
        io::stdin().read_to_end(&mut stdin).expect("read stdin");
    }
    let out = wtl_core::cli::run(&args, &stdin);
    io::stdout().write_all(&out.stdout).expect("write stdout");
    io::stderr().write_all(&out.stderr).expect("write stderr");
    std::process::exit(out.code);
}
