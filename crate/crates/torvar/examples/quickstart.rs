//! End-to-end tour: sample a commuting pair on each variety, build the
//! certified homotopy between them, and re-verify the path independently.
//!
//! Run with `cargo run -p torvar --example quickstart`.

use torvar::{
    cube_homotopy, disk_homotopy, eth, gen_member, gen_perturbation, torus_homotopy, verify_path,
    VarietyKind,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (n, m, delta, seed) = (6, 2, 0.1, 2026);

    for kind in [VarietyKind::Cube, VarietyKind::Disk, VarietyKind::Torus] {
        let x = gen_member(kind, n, m, seed)?;
        let radius = match kind {
            VarietyKind::Disk => delta / 2.0,
            _ => delta,
        };
        let y = gen_perturbation(&x, kind, radius, seed + 1)?;
        let dist = eth(&x, &y)?;

        let (path, cert) = match kind {
            VarietyKind::Cube => cube_homotopy(&x, &y, delta, 4.0)?,
            VarietyKind::Disk => disk_homotopy(&x, &y, delta, 4.0)?,
            VarietyKind::Torus => torus_homotopy(&x, &y, delta, 4.0)?,
        };

        // certificates are cheap to re-check from scratch at any sampling rate
        let recheck = verify_path(&path, kind, &x, cert.epsilon_budget, 512)?;

        println!(
            "{kind:?}: eth(x, y) = {dist:.3e}, budget = {:.3e}, deviation = {:.3e}, \
             defect = {:.3e}, endpoints = ({:.1e}, {:.1e}), built pass = {}, recheck pass = {}",
            cert.epsilon_budget,
            cert.max_eth_deviation,
            cert.max_membership_defect,
            cert.endpoint_residuals.0,
            cert.endpoint_residuals.1,
            cert.passed,
            recheck.passed,
        );
        assert!(cert.passed && recheck.passed, "{kind:?} certification failed");
    }

    println!("all three varieties certified");
    Ok(())
}
