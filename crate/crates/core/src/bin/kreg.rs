fn main() {
    let (code, out) = kregular::cli::main_with_args(std::env::args_os());
    if code == 0 {
        print!("{out}");
    } else {
        eprint!("{out}");
    }
    std::process::exit(code);
}
