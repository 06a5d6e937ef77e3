use std::process::ExitCode;

use clap::Parser;
use msond::analysis::fit_decay;
use msond::config::{echo, resolve, Cli};
use msond::experiment::{build_lookup_table, run_dist_check, run_experiment, ExperimentKind};
use msond::Result;

fn run(cli: &Cli) -> Result<()> {
    let kind = cli.command.kind();
    let spec = resolve(kind, &cli.flags)?;
    print!("{}", echo(&spec));
    let out = spec
        .out
        .as_deref()
        .expect("resolved specs carry an output path");
    match kind {
        ExperimentKind::Lookup => {
            let table = build_lookup_table(&spec)?;
            for b in &table.boundaries {
                println!("N={}: {} -> {} at {} dB", b.n, b.from, b.to, b.snr_db);
            }
        }
        ExperimentKind::DistCheck => {
            for row in run_dist_check(&spec)? {
                println!(
                    "{} shape {}: KS distance {:.5}",
                    row.metric, row.shape, row.ks_distance
                );
            }
        }
        _ => {
            let result = run_experiment(&spec)?;
            let discarded: usize = result.rows.iter().map(|r| r.discarded).sum();
            println!(
                "{} rows, {} discarded trials, {:.2} s",
                result.rows.len(),
                discarded,
                result.wall_time_s
            );
            if kind == ExperimentKind::TilDecay {
                if let Ok(fit) = fit_decay(&result.til_points()) {
                    println!("TIL decay slope {:.4} (r2 {:.4})", fit.slope, fit.r2);
                }
            }
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
