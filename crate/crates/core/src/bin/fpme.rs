use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fpme::harness::{self, Preset, PropertyConfig, RunConfig, RunOutcome};
use fpme::metrics::{observed_order, Metric};

#[derive(Parser)]
#[command(name = "fpme", about = "Monotone solver for the porous medium equation with nonlocal pressure")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a built-in experiment.
    Preset {
        /// exp1, exp2, exp3 or exp4
        name: String,
        #[arg(long, default_value_t = 0.5)]
        s: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Experiment 2 only: CFL2 with the discrete Lipschitz constant M/h.
        #[arg(long)]
        discrete_cfl2: bool,
    },
    /// Print the quadrature weights as CSV.
    Weights {
        #[arg(long)]
        s: f64,
        #[arg(long)]
        h: f64,
        /// Number of rows.
        #[arg(long, default_value_t = 20)]
        k: usize,
    },
    /// Randomized structure-preservation suite.
    Props {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        pairs: usize,
    },
}

fn report(outcome: &RunOutcome) {
    let cfg = &outcome.config;
    println!("{}: s = {}, m = {}, {}", cfg.name, cfg.s, cfg.m, cfg.cfl_mode);
    for r in &outcome.rungs {
        print!("  h = {:<10} tau = {:.3e} steps = {:<7} Cs = {:.4}", r.h, r.time.tau, r.time.steps, r.am.cs);
        if let Some(e) = r.errors {
            print!("  E_v = {:.3e}  E_u = {:.3e}  d0 <= {:.3e}", e.e_v, e.e_u, e.d0_bound);
        }
        println!();
    }
    if outcome.table.rows().len() >= 2 {
        if let Ok(o) = observed_order(&outcome.table, Metric::Ev) {
            println!("  observed orders (E_v): {o:.3?}");
        }
    }
    for p in &outcome.pairs {
        println!(
            "  pair h = {}: V ordering violations {}, U crossings at t = 0: {}",
            p.h, p.v_order_violations, p.initial_u_crossings
        );
        match p.largest_crossing {
            Some(w) => println!("  U1 > U2 at t = {}, x = {}: {} > {}", w.time, w.x, w.u1, w.u2),
            None => println!("  no crossing of U found"),
        }
    }
    for f in &outcome.failures {
        eprintln!("  rung h = {} failed: {}", f.h, f.message);
    }
}

fn finish(result: fpme::Result<RunOutcome>) -> ExitCode {
    match result {
        Ok(outcome) => {
            report(&outcome);
            if outcome.is_success() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config } => {
            let cfg = std::fs::read_to_string(&config)
                .map_err(fpme::Error::from)
                .and_then(|text| RunConfig::parse(&text));
            finish(cfg.and_then(|c| harness::run(&c)))
        }
        Command::Preset {
            name,
            s,
            out,
            discrete_cfl2,
        } => {
            let cfg = name.parse::<Preset>().and_then(|p| harness::preset(p, s)).map(|mut c| {
                c.out_dir = out;
                if discrete_cfl2 {
                    c = harness::with_discrete_cfl2(c);
                }
                c
            });
            finish(cfg.and_then(|c| harness::run(&c)))
        }
        Command::Weights { s, h, k } => match harness::weight_rows(s, h, k) {
            Ok(rows) => {
                println!("k,w,scaled_cumsum");
                for (k, w, c) in rows {
                    println!("{k},{w:e},{c:e}");
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
        Command::Props { seed, pairs } => {
            let cfg = PropertyConfig {
                seed,
                pairs,
                ..PropertyConfig::default()
            };
            match harness::property_suite(&cfg) {
                Ok(rep) => {
                    for m in &rep.modes {
                        println!("{}: {} pairs x {} steps, {} violations", m.mode, m.pairs, m.steps, m.violations.len());
                        for v in &m.violations {
                            print!("{v}");
                        }
                    }
                    for m in &rep.negative_controls {
                        println!(
                            "{} with tau x{}: {} violations (negative control)",
                            m.mode,
                            m.tau_multiplier,
                            m.violations.len()
                        );
                        for v in &m.violations {
                            println!("  {} at pair {}, step {}", v.kind, v.pair, v.step);
                        }
                    }
                    println!(
                        "translation by {}: {} mismatches over {} steps",
                        rep.translation.shift, rep.translation.mismatches, rep.translation.steps
                    );
                    if rep.passed() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::FAILURE
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
