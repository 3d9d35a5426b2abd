//! Steady intracavity photon number of the cascaded squeezer model against
//! its closed form.
use strobe::lindblad::{cascaded_photon_number, cascaded_steady_photons, dpa_drive_for_target, RunOptions};
use strobe::params::SystemParams;

fn main() -> strobe::Result<()> {
    env_logger::init();
    let p = SystemParams::experiment();
    let ns: f64 = std::env::args()
        .nth(1)
        .map_or(Ok(0.5), |a| a.parse())
        .expect("N_s must be a number");
    let lambda = dpa_drive_for_target(ns, &p)?;
    let (n, spec) = cascaded_steady_photons(&p, ns, 0.0, &RunOptions::steady_photons(), 1e-4)?;
    println!(
        "N_s = {ns}: pump {lambda:.4} rad/us, closed form {:.5}, master equation {n:.5} on {spec}",
        cascaded_photon_number(lambda, &p)?
    );
    Ok(())
}
