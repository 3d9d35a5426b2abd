//! Effective qubit lifetime under squeezed input for both squeezing models.
use strobe::lindblad::{simulate_lifetime, RunOptions, SqueezeSource};
use strobe::params::{photons_from_dpa_gain_db, SystemParams};

fn main() -> strobe::Result<()> {
    env_logger::init();
    let p = SystemParams::experiment();
    let db: f64 = std::env::args()
        .nth(1)
        .map_or(Ok(3.0), |a| a.parse())
        .expect("gain must be a number");
    let ns = photons_from_dpa_gain_db(db)?;
    for src in [SqueezeSource::Broadband, SqueezeSource::Cascaded] {
        let run = simulate_lifetime(&p, ns, 0.0, src, &RunOptions::for_source(src))?;
        println!(
            "{db} dB ({ns:.3} photons) {src:?}: T_eff = {:.3} us on {}",
            run.fit.t_eff, run.spec
        );
    }
    Ok(())
}
