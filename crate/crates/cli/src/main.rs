use std::process::ExitCode;

use eda_cli::{exit_status, parse_args, presets, resolve, run_experiment};

fn main() -> ExitCode {
    let (args, matches) = match parse_args(std::env::args_os()) {
        Ok(parsed) => parsed,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };

    if args.list_presets {
        for p in presets() {
            let tag = if p.slow { " (slow)" } else { "" };
            println!("{:<20} {}{tag}", p.name, p.description);
        }
        return ExitCode::SUCCESS;
    }

    let invocation = match resolve(&args, &matches) {
        Ok(inv) => inv,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    match run_experiment(&invocation.name, &invocation.config, &invocation.out) {
        Ok(report) => {
            for o in &report.outcome.per_tx {
                println!(
                    "{}: converged={} rounds={} value={:.6} spread={:.3e}",
                    o.tx, o.converged, o.rounds_used, o.final_value, o.final_spread
                );
            }
            if !report.outcome.collisions.is_empty() {
                println!("collisions: {}", report.outcome.collisions.len());
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            exit_status(&report)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
