//! Drive the experiment harness from code: run the identity suite and print
//! the report that `trilab --command identity-suite` would write.

use trilinear_lab::harness::{run, Command, RunConfig};

fn main() -> trilinear_lab::Result<()> {
    let cfg = RunConfig {
        n: Some(16),
        ..RunConfig::for_command(Command::IdentitySuite)
    };
    let out = run(&cfg)?;
    for c in &out.report.checks {
        println!(
            "{} {} = {:.3e} ({})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.rule
        );
    }
    for t in &out.tables {
        println!("table {}: {} rows", t.name, t.rows.len());
    }
    Ok(())
}
