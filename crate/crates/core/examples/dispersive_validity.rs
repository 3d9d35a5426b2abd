//! Small-parameter checks of the dispersive approximation and the derived rates.
use strobe::homodyne::gamma_phi_vac_from_params;
use strobe::params::{angular_to_mhz, validate_dispersive, SystemParams};

fn main() -> strobe::Result<()> {
    let p = SystemParams::experiment();
    let v = validate_dispersive(&p, 0.1)?;
    println!(
        "chi/2pi = {:.3} MHz, beta = {:.5}, gamma = {:.4}",
        angular_to_mhz(p.chi),
        p.beta(),
        p.gamma()
    );
    println!(
        "validity ratios {:?} all below {}: {}",
        v.ratios,
        v.threshold,
        v.all_pass()
    );
    println!(
        "Gamma_phi,vac for the full drive amplitude: {:.4} /us",
        gamma_phi_vac_from_params(2.0 * p.a_bar0, p.chi, p.kappa)?
    );
    Ok(())
}
