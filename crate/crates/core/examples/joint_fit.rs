//! Joint fit of eps_in, the alignment error and a global phase to noisy sweeps.
use std::f64::consts::PI;
use strobe::estimation::{joint_fit, synthetic_sweeps};
use strobe::homodyne::RateModel;

fn main() -> strobe::Result<()> {
    let rm = RateModel::experiment();
    let phis: Vec<f64> = (0..16).map(|k| PI * k as f64 / 16.0).collect();
    let (d, m) = synthetic_sweeps(&rm, &[1.5, 3.0, 4.0], &phis, 0.03, 7)?;
    let fit = joint_fit(&d, &m, &rm)?;
    for ((n, v), s) in fit.names.iter().zip(&fit.estimates).zip(&fit.std_errors) {
        println!("{n:>13} = {v:.5} +- {s:.5}");
    }
    println!(
        "delta = {:.2} deg, converged = {} (gradient norm {:.1e}, {} iterations)",
        fit.get("delta_align")?.to_degrees(),
        fit.converged,
        fit.gradient_norm,
        fit.iterations
    );
    Ok(())
}
