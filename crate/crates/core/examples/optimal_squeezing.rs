//! Long-time SNR improvement versus squeezing and its optimum.
use strobe::homodyne::{optimal_squeezing, snr_ratio_longtime};
use strobe::params::SystemParams;

fn main() -> strobe::Result<()> {
    let p = SystemParams::experiment();
    let opt = optimal_squeezing(&p)?;
    println!(
        "optimum: r = {:.4}, e^2r = {:.2} dB, ratio = {:.3}",
        opt.r, opt.gain_db, opt.ratio
    );
    for db in [0.0, 3.0, 6.0, 10.0, 15.0, 20.0, 25.0] {
        let r = 0.05 * db * std::f64::consts::LN_10;
        println!("{db:5.1} dB  ratio {:8.4}", snr_ratio_longtime(r, &p)?);
    }
    Ok(())
}
