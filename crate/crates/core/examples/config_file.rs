//! Running from the flat `key = value` configuration format.

use fpme::harness::{manifest, run, RunConfig, RunOutcome};

const CONFIG: &str = "\
# explicit solution at s = 0.4, short horizon
name = config-demo
s = 0.4
m = 2
cfl = cfl1
datum = explicit
t0 = 1
R = 0.5
T = 0.5
snapshots = 0.25
ladder = 2^-3, 2^-4, 2^-5
reference = analytic
";

pub fn run_example() -> fpme::Result<RunOutcome> {
    let cfg = RunConfig::parse(CONFIG)?;
    let out = run(&cfg)?;
    print!("{}", manifest(&out));
    Ok(out)
}

fn main() -> fpme::Result<()> {
    run_example().map(|_| ())
}
