use std::io::Write;

fn main() {
    let threads = std::env::var(votelab_cli::THREADS_VAR).ok();
    let out = votelab_cli::run(std::env::args_os(), threads.as_deref());
    std::io::stdout().write_all(out.stdout.as_bytes()).ok();
    std::io::stderr().write_all(out.stderr.as_bytes()).ok();
    std::process::exit(out.code);
}
