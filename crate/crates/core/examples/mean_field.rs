//! Cavity mean field from the series solution, the Langevin equation and a
//! Lindblad run of the longitudinal Hamiltonian.
use strobe::homodyne::{langevin_mean_trajectory, mean_cavity_field_from_vacuum};
use strobe::lindblad::{longitudinal_mean_field, EvolutionConfig};
use strobe::params::SystemParams;

fn main() -> strobe::Result<()> {
    let p = SystemParams::experiment();
    let t_end = 10.0 / p.kappa;
    let cfg = EvolutionConfig::new(t_end, 0.01).tolerances(1e-10, 1e-12);
    let me = longitudinal_mean_field(&p, 1.0, 8, &cfg)?;
    let lv = langevin_mean_trajectory(&p, 1.0, 0.0, t_end, 1e-4)?;
    let d_me = me.column("d")?;
    let d_lv = lv.column("d")?;
    for (i, &t) in me.times.iter().enumerate().step_by(5) {
        let closed = mean_cavity_field_from_vacuum(t, &p, 1.0, None)?;
        let k = lv.times.partition_point(|&s| s < t - 1e-9);
        println!(
            "t = {t:.3}  series {closed:.6}  langevin {:.6}  lindblad {:.6}",
            d_lv[k], d_me[i]
        );
    }
    Ok(())
}
