//! The whole suite at a reduced scale, printed as deterministic JSON.

use mlab::format::to_json;
use mlab::report::{run_suite, RunConfig};

fn main() -> mlab::Result<()> {
    let cfg = RunConfig { n_max: 200_000, conv_cap: 100_000, ..RunConfig::default() };
    let (report, timings) = run_suite(&cfg)?;
    for c in &report.checks {
        println!("{:<40} {:?}{}", c.name, c.status, if c.asserted { "" } else { " (measured)" });
    }
    for t in &timings {
        eprintln!("{:<16} {:.3}s", t.stage, t.seconds);
    }
    let json = to_json(&report).expect("report serializes");
    println!("{} bytes of JSON, {} failures", json.len(), report.failures().len());
    Ok(())
}
