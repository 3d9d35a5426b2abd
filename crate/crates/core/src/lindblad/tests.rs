use super::*;
use crate::operators::number;
use crate::params::SqueezeSpec;

fn cavity_spec(nc: usize) -> HilbertSpec {
    HilbertSpec::new(vec![2, nc]).unwrap()
}

#[test]
fn plain_loss_decays_exponentially() {
    let spec = HilbertSpec::single(4).unwrap();
    let kappa = 2.0;
    let rho0 = DensityMatrix::basis(&spec, &[1]).unwrap();
    let h = TimeDependentHamiltonian::zero(&spec);
    let l = photon_loss(kappa, 0, &spec).unwrap();
    let cfg = EvolutionConfig::new(2.0, 0.05)
        .tolerances(1e-10, 1e-12)
        .observe("n", number(4).unwrap());
    let ts = evolve(&rho0, &h, &[l], &cfg).unwrap();
    assert_eq!(ts.len(), 41);
    for (t, n) in ts.times.iter().zip(ts.real("n").unwrap()) {
        assert!((n - (-kappa * t).exp()).abs() < 1e-6, "t={t}");
    }
    assert!(ts.health.max_trace_error < 1e-10);
    assert!(ts.health.min_eigenvalue.unwrap() > -1e-10);
}

#[test]
fn qnd_coupling_preserves_sigma_z() {
    let p = SystemParams::experiment();
    let spec = cavity_spec(8);
    let h = h_rabi_frame(&p, &spec, false).unwrap();
    let l = photon_loss(p.kappa, CAVITY, &spec).unwrap();
    let cfg = EvolutionConfig::new(0.5, 0.05).observe("sz", qubit_op(Pauli::Z, &spec).unwrap());
    let ts = evolve(&excited_vacuum(&spec).unwrap(), &h, &[l], &cfg).unwrap();
    for v in ts.real("sz").unwrap() {
        assert!((v - 1.0).abs() < 1e-12);
    }
    assert!(ts.health.truncation_ok);
}

#[test]
fn step_cap_follows_fastest_envelope() {
    let p = SystemParams::experiment();
    let spec = cavity_spec(3);
    let h = h_rabi_frame(&p, &spec, true).unwrap();
    let cfg = EvolutionConfig::new(0.1, 0.01);
    let prop = Propagator::new(&h, &[], &[], &cfg).unwrap();
    assert!(prop.max_step() <= TWO_PI / p.omega_r / 20.0 * (1.0 + 1e-12));
}

fn quadratures(spec: &HilbertSpec) -> (Operator, Operator) {
    let d = mode_op(CAVITY, spec).unwrap();
    let x = (&d + &d.dagger()) * 0.5;
    let y = (&d.dagger() - &d) * C64::new(0.0, 0.5);
    (&x * &x, &y * &y)
}

fn squeezed_steady(ns: f64, phi: f64, nc: usize) -> (f64, f64, f64) {
    let spec = cavity_spec(nc);
    let h = TimeDependentHamiltonian::zero(&spec);
    let l = broadband_squeezed_dissipators(ns, phi, 1.0, &spec).unwrap();
    let (x2, y2) = quadratures(&spec);
    let d = mode_op(CAVITY, &spec).unwrap();
    let cfg = EvolutionConfig::new(60.0, 1.0)
        .tolerances(1e-10, 1e-13)
        .observe("x2", x2)
        .observe("y2", y2)
        .observe("n", &d.dagger() * &d);
    let ss = steady_state(&excited_vacuum(&spec).unwrap(), &h, &l, &cfg, 1.0, 1e-9).unwrap();
    (
        ss.average("x2").unwrap().re,
        ss.average("y2").unwrap().re,
        ss.average("n").unwrap().re,
    )
}

#[test]
fn broadband_reservoir_squeezes_cavity() {
    let sq = SqueezeSpec::from_r(0.5, 0.0).unwrap();
    let (x2, y2, _) = squeezed_steady(sq.n_photons, 0.0, 20);
    let (wide, narrow) = ((2.0 * sq.r).exp() / 4.0, (-2.0 * sq.r).exp() / 4.0);
    // <d d> = +M at phi = 0, so i(d^dag - d) carries the reduced noise.
    assert!((x2 - wide).abs() < 1e-5 * wide);
    assert!((y2 - narrow).abs() < 1e-5 * wide);
    let (x2b, y2b, _) = squeezed_steady(sq.n_photons, std::f64::consts::FRAC_PI_2, 20);
    assert!((x2b - y2).abs() < 1e-7);
    assert!((y2b - x2).abs() < 1e-7);
}

#[test]
fn broadband_photon_number() {
    let (_, _, n) = squeezed_steady(1.0, 0.3, 30);
    assert!((n - 1.0).abs() < 0.01);
}

#[test]
fn plain_loss_is_zero_squeezing() {
    let spec = cavity_spec(5);
    let l = broadband_squeezed_dissipators(0.0, 0.7, 3.0, &spec).unwrap();
    let want = mode_op(CAVITY, &spec).unwrap() * 3f64.sqrt();
    assert!((&l[0] - &want).max_abs() < 1e-15);
    assert!(broadband_squeezed_dissipators(-0.1, 0.0, 1.0, &spec).is_err());
}

#[test]
fn dpa_drive_inversion() {
    let p = SystemParams::experiment();
    assert_eq!(dpa_drive_for_target(0.0, &p).unwrap(), 0.0);
    let lambda = dpa_drive_for_target(1.5, &p).unwrap();
    assert!((cascaded_photon_number(lambda, &p).unwrap() - 1.5).abs() < 1e-8);
    assert!(lambda < dpa_threshold(&p));
    assert!(dpa_drive_for_target(-1.0, &p).is_err());
    assert!(dpa_drive_for_target(f64::INFINITY, &p).is_err());
}

#[test]
fn cascaded_photon_number_diverges_at_threshold() {
    let p = SystemParams::experiment();
    let th = dpa_threshold(&p);
    let mut prev = 0.0;
    for k in 1..8 {
        let lambda = th * (1.0 - 10f64.powi(-k));
        let n = cascaded_photon_number(lambda, &p).unwrap();
        assert!(n > prev);
        prev = n;
    }
    assert!(prev > 1e5);
    assert!(matches!(
        cascaded_photon_number(th, &p),
        Err(Error::AboveThreshold { .. })
    ));
}

#[test]
fn lifetime_fit_exact_exponential() {
    let times: Vec<f64> = (0..50).map(|i| i as f64 * 0.02).collect();
    let vals = times.iter().map(|t| (-2.0 * t / 10.0).exp()).collect();
    let ts = TimeSeries::from_real("sz", times, vals).unwrap();
    let fit = effective_lifetime(&ts, "sz", 1.0).unwrap();
    assert!((fit.t_eff - 10.0).abs() < 1e-10);
    assert!(fit.std_err < 1e-10);
    assert_eq!(lifetime_window(&ts, "sz", 0.8).unwrap(), 0.98);
}

#[test]
fn lifetime_fit_rejects_bad_windows() {
    let ts = TimeSeries::from_real("sz", vec![0.0, 0.1, 0.2, 0.3], vec![1.0, 0.5, -0.1, 0.2]).unwrap();
    assert!(effective_lifetime(&ts, "sz", 1.0).is_err());
    let flat = TimeSeries::from_real("sz", vec![0.0, 0.1, 0.2, 0.3], vec![1.0; 4]).unwrap();
    assert!(effective_lifetime(&flat, "sz", 1.0).is_err());
}

#[test]
fn growing_run_matches_large_fixed_run() {
    let p = SystemParams::experiment();
    let build = |spec: &HilbertSpec| {
        let d = mode_op(CAVITY, spec)?;
        Ok(ModelParts {
            h: h_rabi_frame(&p, spec, false)?,
            collapse: broadband_squeezed_dissipators(0.3, 0.0, p.kappa, spec)?,
            observables: vec![("sz".into(), qubit_op(Pauli::Z, spec)?), ("n".into(), &d.dagger() * &d)],
        })
    };
    let cfg = EvolutionConfig::new(0.2, 0.01).tolerances(1e-9, 1e-12);
    let small = HilbertSpec::new(vec![2, 4]).unwrap();
    let (ts, spec) = evolve_growing(&excited_vacuum(&small).unwrap(), 60, &cfg, build, |_, _| {
        Control::Continue
    })
    .unwrap();
    assert!(spec.dims()[1] > 4);
    assert!(ts.health.max_top_population[1] <= 1e-6);
    assert_eq!(ts.times.len(), 21);
    assert!(ts.times.windows(2).all(|w| w[1] > w[0]));

    let big = cavity_spec(24);
    let mut parts = build(&big).unwrap();
    let mut fixed_cfg = cfg.clone();
    fixed_cfg.observables = std::mem::take(&mut parts.observables);
    let want = evolve(&excited_vacuum(&big).unwrap(), &parts.h, &parts.collapse, &fixed_cfg).unwrap();
    for name in ["sz", "n"] {
        for (x, y) in ts.real(name).unwrap().iter().zip(&want.real(name).unwrap()) {
            assert!((x - y).abs() < 1e-5, "{name}: {x} vs {y}");
        }
    }
}

#[test]
fn padding_keeps_level_labels() {
    let from = HilbertSpec::new(vec![2, 3]).unwrap();
    let to = HilbertSpec::new(vec![2, 5]).unwrap();
    let rho = DensityMatrix::basis(&from, &[1, 2]).unwrap();
    let padded = pad_state(rho.matrix(), &from, &to).unwrap();
    let want = DensityMatrix::basis(&to, &[1, 2]).unwrap();
    assert_eq!(&padded, want.matrix());
    assert!(pad_state(want.matrix(), &to, &from).is_err());
}

#[test]
fn tolerance_halving_converges() {
    let p = SystemParams::experiment();
    let spec = cavity_spec(8);
    let h = h_rabi_frame(&p, &spec, true).unwrap();
    let l = broadband_squeezed_dissipators(0.2, 0.0, p.kappa, &spec).unwrap();
    let d = mode_op(CAVITY, &spec).unwrap();
    let run = |rtol: f64, atol: f64| {
        let cfg = EvolutionConfig::new(0.2, 0.01)
            .tolerances(rtol, atol)
            .observe("sz", qubit_op(Pauli::Z, &spec).unwrap())
            .observe("n", &d.dagger() * &d);
        evolve(&excited_vacuum(&spec).unwrap(), &h, &l, &cfg).unwrap()
    };
    let a = run(1e-7, 1e-10);
    let b = run(5e-8, 5e-11);
    for name in ["sz", "n"] {
        let (va, vb) = (a.real(name).unwrap(), b.real(name).unwrap());
        let scale = va.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (x, y) in va.iter().zip(&vb) {
            assert!((x - y).abs() < 1e-5 * scale, "{name}: {x} vs {y}");
        }
    }
    assert!(b.health.min_eigenvalue.unwrap() > -POSITIVITY_TOL);
    assert!(b.health.max_trace_error < 1e-9);
}

#[test]
fn rhs_is_hermitian_and_traceless() {
    let p = SystemParams::experiment();
    let spec = HilbertSpec::new(vec![2, 3, 3]).unwrap();
    let lambda = dpa_drive_for_target(0.5, &p).unwrap();
    let h = h_cascaded(&p, &spec, lambda, 0.3, true).unwrap();
    let c = cascaded_dissipators(&p, &spec).unwrap();
    let mut gen = solver_probe(&h, &c);
    // A generic mixed state: thermal cavity, excited qubit, DPA vacuum.
    let rho = DensityMatrix::product(&[
        &DensityMatrix::basis(&HilbertSpec::single(2).unwrap(), &[0]).unwrap(),
        &DensityMatrix::thermal(3, 0.3).unwrap(),
        &DensityMatrix::thermal(3, 0.1).unwrap(),
    ])
    .unwrap();
    let out = gen(0.0123, rho.matrix());
    assert!((&out - out.adjoint()).camax() < 1e-10);
    assert!(out.trace().norm() < 1e-10);
    // Agrees with the commutator + dissipator form.
    let hm = h.at(0.0123);
    let mut want = (hm.matrix() * rho.matrix() - rho.matrix() * hm.matrix()) * C64::new(0.0, -1.0);
    want += crate::operators::dissipator(&c[0], &rho).unwrap();
    assert!((&out - want).camax() < 1e-9);
}

fn solver_probe(
    h: &TimeDependentHamiltonian,
    c: &[Operator],
) -> impl FnMut(f64, &nalgebra::DMatrix<C64>) -> nalgebra::DMatrix<C64> {
    let cfg = EvolutionConfig::new(1.0, 0.1);
    let mut prop = Propagator::new(h, c, &[], &cfg).unwrap();
    move |t, rho| prop.rhs_probe(t, rho)
}

#[test]
fn frame_vacuum_is_annihilated() {
    let f = SqueezeFrame::new(0.6, 1.1).unwrap();
    let spec = HilbertSpec::new(vec![2, 40]).unwrap().with_frame(1, Some(f)).unwrap();
    let rho = excited_vacuum(&spec).unwrap();
    let d = mode_op(CAVITY, &spec).unwrap();
    let n = crate::operators::expect(&(&d.dagger() * &d), &rho).unwrap();
    assert!(n.norm() < 1e-9);
}

fn lifetime_observables(spec: &HilbertSpec, ns: f64, fraction: f64) -> TimeSeries {
    let p = SystemParams::experiment();
    let frames = squeeze_frames(&p, SqueezeSource::Broadband, ns, 0.0, fraction).unwrap();
    let spec = spec.clone().with_frame(1, frames[0]).unwrap();
    let (h, c) = squeezed_model(&p, &spec, SqueezeSource::Broadband, ns, 0.0, true).unwrap();
    let d = mode_op(CAVITY, &spec).unwrap();
    let cfg = EvolutionConfig::new(0.1, 0.01)
        .tolerances(1e-9, 1e-12)
        .observe("sz", qubit_op(Pauli::Z, &spec).unwrap())
        .observe("n", &d.dagger() * &d);
    evolve(&excited_vacuum(&spec).unwrap(), &h, &c, &cfg).unwrap()
}

#[test]
fn framed_basis_matches_fock_basis() {
    let spec = cavity_spec(30);
    let a = lifetime_observables(&spec, 0.3, 0.0);
    let b = lifetime_observables(&spec, 0.3, 0.5);
    for name in ["sz", "n"] {
        for (x, y) in a.real(name).unwrap().iter().zip(b.real(name).unwrap()) {
            assert!((x - y).abs() < 1e-7, "{name}: {x} vs {y}");
        }
    }
}

#[test]
fn steady_frame_needs_few_levels() {
    let p = SystemParams::experiment();
    let sq = SqueezeSpec::from_r(1.0, 0.0).unwrap();
    let frames = squeeze_frames(&p, SqueezeSource::Broadband, sq.n_photons, 0.0, 1.0).unwrap();
    let spec = cavity_spec(4).with_frame(1, frames[0]).unwrap();
    let h = TimeDependentHamiltonian::zero(&spec);
    let l = broadband_squeezed_dissipators(sq.n_photons, 0.0, p.kappa, &spec).unwrap();
    let d = mode_op(CAVITY, &spec).unwrap();
    let rho0 = DensityMatrix::basis(&spec, &[0, 0]).unwrap();
    let cfg = EvolutionConfig::new(0.2, 0.05)
        .strict_truncation(true)
        .observe("n", &d.dagger() * &d);
    let ts = evolve(&rho0, &h, &l, &cfg).unwrap();
    for n in ts.real("n").unwrap() {
        assert!((n - sq.n_photons).abs() < 1e-8);
    }
}
