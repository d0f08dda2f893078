use std::io::{self, Write};
use std::process::ExitCode;

use cr_timeshare::experiment::{parse_args, run_plan};
use cr_timeshare::Error;

fn main() -> ExitCode {
    let plan = match parse_args(std::env::args_os()) {
        Ok(plan) => plan,
        Err(Error::Help(text)) => {
            print!("{text}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("cr-timeshare: {e}");
            return ExitCode::from(2);
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run_plan(&plan, &mut out) {
        Ok(_) => {
            let _ = out.flush();
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("cr-timeshare: {e}");
            ExitCode::FAILURE
        }
    }
}
