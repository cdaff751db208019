//! Acceptance suite: one line per criterion, nonzero exit on any failure.
//!
//! Preset defaults to `desk-N2`; override with `LD_VORTEX_PRESET=quick`.

use ld_vortex::harness::acceptance_with;

fn main() {
    let name = std::env::var("LD_VORTEX_PRESET").unwrap_or_else(|_| "desk-N2".into());
    println!("acceptance preset {name}");
    let report = match acceptance_with(&name, |c| println!("{}", c.line())) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("acceptance could not start: {e}");
            std::process::exit(2);
        }
    };
    let failed = report.criteria.iter().filter(|c| !c.passed).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        report.criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
