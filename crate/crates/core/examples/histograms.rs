//! Histograms of mean homodyne voltages with and without squeezing, and the
//! double-Gaussian fit of the excited-state histogram.
use strobe::estimation::{fit_double_gaussian, overlap_area, synth_records, QubitState, SynthOptions};
use strobe::homodyne::RateModel;
use strobe::params::{gain_to_squeeze, SystemParams};

fn main() -> strobe::Result<()> {
    let p = SystemParams::experiment();
    let rm = RateModel::experiment();
    let opts = SynthOptions::default();
    for gain in [0.0, 3.8] {
        let sq = gain_to_squeeze(gain, -rm.eff.delta_align)?;
        let g = synth_records(&p, &sq, &rm, QubitState::Ground, 20_000, 1.8, 3, &opts)?.mean_voltages();
        let e = synth_records(&p, &sq, &rm, QubitState::Excited, 20_000, 1.8, 3, &opts)?.mean_voltages();
        let fit = fit_double_gaussian(&e, g.iter().sum::<f64>() / g.len() as f64)?;
        println!(
            "{gain} dB: overlap {:.4}, excited fit weight {:.3}, sigma {:.4}",
            overlap_area(&g, &e)?,
            fit.model.weight,
            fit.model.sigma_main
        );
    }
    Ok(())
}
