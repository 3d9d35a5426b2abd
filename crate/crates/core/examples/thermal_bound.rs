//! Residual thermal photon number implied by a measured T2.
use strobe::homodyne::{thermal_dephasing_rate, thermal_photon_bound};
use strobe::params::SystemParams;

fn main() -> strobe::Result<()> {
    let p = SystemParams::experiment();
    for t2 in [20.0, 64.0, 200.0] {
        let n = thermal_photon_bound(t2, p.chi, p.kappa)?;
        println!(
            "T2 = {t2:5.1} us -> n_th = {n:.5} (rate check {:.3e})",
            thermal_dephasing_rate(n, p.chi, p.kappa) - 1.0 / t2
        );
    }
    Ok(())
}
