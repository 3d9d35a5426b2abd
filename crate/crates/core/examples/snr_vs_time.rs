//! SNR growth with integration time from the full signal and noise expressions,
//! and the time to reach 99.9% assignment fidelity.
use strobe::homodyne::{fidelity_time, snr};
use strobe::params::{photons_from_dpa_gain_db, SqueezeSpec, SystemParams};

fn main() -> strobe::Result<()> {
    let p = SystemParams::experiment();
    for db in [0.0, 6.0, 10.0] {
        let r = photons_from_dpa_gain_db(db)?.sqrt().asinh();
        let sq = SqueezeSpec::from_r(r, 0.0)?;
        let curve: Vec<String> = [0.5, 1.0, 2.0, 4.0]
            .iter()
            .map(|&t| snr(t, &p, &sq).map(|s| format!("{:.3}", s.snr)))
            .collect::<strobe::Result<_>>()?;
        let t_f = fidelity_time(&p, &sq, 0.999, 1e3)?;
        println!(
            "{db:4.1} dB: SNR at 0.5/1/2/4 us = {}; 99.9% after {t_f:.3} us",
            curve.join(" / ")
        );
    }
    Ok(())
}
