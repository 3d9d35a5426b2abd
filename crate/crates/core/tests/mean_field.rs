use strobe::homodyne::{langevin_mean_trajectory, mean_cavity_field, mean_cavity_field_from_vacuum};
use strobe::lindblad::{longitudinal_mean_field, EvolutionConfig};
use strobe::params::SystemParams;

#[test]
fn closed_form_langevin_and_master_equation_agree() {
    let p = SystemParams::experiment();
    let t_end = 0.5;
    let dt = 0.0025;
    for &sz in &[1.0, -1.0] {
        let cfg = EvolutionConfig::new(t_end, dt).tolerances(1e-10, 1e-12);
        let me = longitudinal_mean_field(&p, sz, 8, &cfg).unwrap();
        let lv = langevin_mean_trajectory(&p, sz, 0.0, t_end, dt).unwrap();
        assert_eq!(me.len(), lv.len());
        let (d_me, d_lv) = (me.column("d").unwrap(), lv.column("d").unwrap());
        let sz_me = me.real("sz").unwrap();
        let mut checked = 0;
        for (i, &t) in me.times.iter().enumerate() {
            assert!((sz_me[i] - sz).abs() < 1e-9);
            let cf = mean_cavity_field_from_vacuum(t, &p, sz, None).unwrap();
            assert!((d_me[i] - cf).norm() < 1e-6, "t = {t}: {} vs {cf}", d_me[i]);
            if p.kappa * t >= 5.0 {
                assert!((d_lv[i] - cf).norm() < 1e-4);
                assert!((d_me[i] - d_lv[i]).norm() < 1e-4);
                checked += 1;
            }
            if p.kappa * t >= 20.0 {
                let steady = mean_cavity_field(t, &p, sz, None).unwrap();
                assert!((d_me[i] - steady).norm() < 1e-4);
            }
        }
        assert!(checked > 100);
    }
}
