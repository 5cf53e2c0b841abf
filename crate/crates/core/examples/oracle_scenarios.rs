//! Fixed-atom trajectory runs checked against the dense reference.

use cqed_beam::scenario::{run_scenario, Scenario};

fn main() -> cqed_beam::Result<()> {
    for s in Scenario::ALL {
        let r = run_scenario(s, 2000, 1)?;
        let analytic = r.analytic_rel_dev.map(|d| format!("{d:.3}")).unwrap_or_else(|| "-".into());
        println!(
            "{:<22} samples {:5}  max rel dev {:.3}  vs closed form {analytic}  {}",
            s.to_string(),
            r.trajectory.samples,
            r.max_rel_dev,
            if r.passed { "ok" } else { "outside tolerance" }
        );
    }
    Ok(())
}
