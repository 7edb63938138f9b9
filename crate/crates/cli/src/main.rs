/// `println!` that ignores a closed stdout instead of panicking.
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

mod args;
mod commands;
mod output;

use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = match args::parse(std::env::args().collect()) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let common = cli.command.common().clone();
    if let Some(n) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli.command) {
        Ok(art) => match commands::persist(&art, &common.out, common.plot) {
            Ok(_) => ExitCode::from(commands::exit_code(art.outcome)),
            Err(e) => {
                eprintln!("error: cannot write outputs: {e}");
                ExitCode::from(1)
            }
        },
        Err(f) => {
            eprintln!("error: {}", f.error);
            if let Some(marker) = f.marker {
                if let Err(e) = commands::persist(&marker, &common.out, false) {
                    eprintln!("error: cannot write failure marker: {e}");
                }
            }
            ExitCode::from(commands::error_code(&f.error))
        }
    }
}
