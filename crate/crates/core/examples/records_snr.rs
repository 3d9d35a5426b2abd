//! Synthetic homodyne records, SNR(t) and the measurement-rate fit.
use strobe::estimation::{measurement_rate_from_records, snr_vs_time, synth_records, QubitState, SynthOptions};
use strobe::homodyne::RateModel;
use strobe::params::{gain_to_squeeze, SystemParams};

fn main() -> strobe::Result<()> {
    let p = SystemParams::experiment();
    let rm = RateModel::experiment();
    let opts = SynthOptions {
        p_relax: 0.0,
        ..SynthOptions::default()
    };
    for gain in [0.0, 3.8] {
        let sq = gain_to_squeeze(gain, -rm.eff.delta_align)?;
        let g = synth_records(&p, &sq, &rm, QubitState::Ground, 20_000, 1.8, 1, &opts)?;
        let e = synth_records(&p, &sq, &rm, QubitState::Excited, 20_000, 1.8, 1, &opts)?;
        let snr = snr_vs_time(&g, &e)?;
        let fit = measurement_rate_from_records(&g, &e, None, 20)?;
        println!(
            "{gain} dB: SNR(1.8 us) = {:.3}, Gamma_meas = {:.4} +- {:.4} /us",
            snr.real("snr")?.last().unwrap(),
            fit.gamma_meas,
            fit.std_err
        );
    }
    Ok(())
}
