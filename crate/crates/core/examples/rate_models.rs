//! Dephasing rate, measurement rate and efficiency versus squeezing angle.
use std::f64::consts::PI;
use strobe::homodyne::{dephasing_rate, efficiency, measurement_rate_at, RateModel};
use strobe::params::gain_to_squeeze;

fn main() -> strobe::Result<()> {
    let rm = RateModel::experiment();
    println!("phi/pi  G_phi(3.8 dB)  G_meas(3.8 dB)  eta(1 dB)");
    for k in 0..=8 {
        let phi = PI * k as f64 / 8.0;
        let sq = gain_to_squeeze(3.8, phi)?;
        let sq1 = gain_to_squeeze(1.0, phi)?;
        println!(
            "{:5.3}  {:12.4}  {:13.4}  {:8.4}",
            k as f64 / 8.0,
            dephasing_rate(phi, &sq, &rm)?,
            measurement_rate_at(phi, &sq, &rm)?,
            efficiency(phi, &sq1, &rm)?
        );
    }
    Ok(())
}
