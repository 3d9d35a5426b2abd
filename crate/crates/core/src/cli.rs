//! Command implementations behind the `strobe` binary. Each command turns a
//! configuration into a CSV table (plus an optional JSON report) and can run
//! its oracle checks.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::estimation::{
    fit_double_gaussian, histogram, joint_fit, overlap_area, snr_vs_time, synth_records, QubitState, SweepPoint,
    SynthOptions,
};
use crate::homodyne::{
    dephasing_rate, efficiency, fidelity_time, measurement_rate_at, optimal_squeezing, snr, snr_ratio_longtime,
    RateModel,
};
use crate::lindblad::{simulate_lifetime, RunOptions, SqueezeSource};
use crate::params::{db_to_linear, gain_to_squeeze, photons_from_dpa_gain_db, SqueezeSpec, SystemParams};

/// Subcommands of the front end.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    DephaseSweep,
    MeasSweep,
    Eta,
    SnrCurve,
    Lifetime,
    Histograms,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::DephaseSweep,
        Command::MeasSweep,
        Command::Eta,
        Command::SnrCurve,
        Command::Lifetime,
        Command::Histograms,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::DephaseSweep => "dephase-sweep",
            Command::MeasSweep => "meas-sweep",
            Command::Eta => "eta",
            Command::SnrCurve => "snr-curve",
            Command::Lifetime => "lifetime",
            Command::Histograms => "histograms",
        }
    }
}

/// One oracle cross-check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: String) -> Self {
        Check {
            name: name.into(),
            pass,
            detail,
        }
    }
}

/// Result of a command.
#[derive(Clone, Debug, Default)]
pub struct Output {
    pub csv: String,
    pub report: Option<serde_json::Value>,
    pub checks: Vec<Check>,
}

impl Output {
    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Full-precision CSV text: 17 significant digits.
pub struct Table {
    text: String,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            text: header.join(",") + "\n",
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        let cells: Vec<String> = values.iter().map(|v| format!("{v:.16e}")).collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// Runs `cmd`; checks are evaluated only when `check` is set.
pub fn run(cmd: Command, cfg: &ExperimentConfig, check: bool) -> Result<Output> {
    match cmd {
        Command::DephaseSweep => rate_sweep(cfg, check, RateKind::Dephasing),
        Command::MeasSweep => rate_sweep(cfg, check, RateKind::Measurement),
        Command::Eta => eta(cfg, check),
        Command::SnrCurve => snr_curve(cfg, check),
        Command::Lifetime => lifetime(cfg, check),
        Command::Histograms => histograms(cfg, check),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum RateKind {
    Dephasing,
    Measurement,
}

fn rate(kind: RateKind, phi: f64, gain_db: f64, rm: &RateModel) -> Result<f64> {
    let sq = gain_to_squeeze(gain_db, phi)?;
    match kind {
        RateKind::Dephasing => dephasing_rate(phi, &sq, rm),
        RateKind::Measurement => measurement_rate_at(phi, &sq, rm),
    }
}

fn grid(cfg: &ExperimentConfig) -> Result<Vec<(f64, f64)>> {
    let gains = cfg.sweep.gains_db.values()?;
    let phis = cfg.sweep.phases_rad.values()?;
    Ok(gains.iter().flat_map(|&g| phis.iter().map(move |&p| (g, p))).collect())
}

fn sweep_points(kind: RateKind, cfg: &ExperimentConfig, rm: &RateModel) -> Result<Vec<SweepPoint>> {
    grid(cfg)?
        .into_par_iter()
        .map(|(gain_db, phi)| {
            Ok(SweepPoint {
                phi,
                gain_db,
                rate: rate(kind, phi, gain_db, rm)?,
            })
        })
        .collect()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1e-300)
}

fn rate_sweep(cfg: &ExperimentConfig, check: bool, kind: RateKind) -> Result<Output> {
    let rm = cfg.rate_model();
    let pts = sweep_points(kind, cfg, &rm)?;
    let col = match kind {
        RateKind::Dephasing => "gamma_phi_per_us",
        RateKind::Measurement => "gamma_meas_per_us",
    };
    let mut t = Table::new(&["phi_rad", "gain_db", col]);
    for p in &pts {
        t.row(&[p.phi, p.gain_db, p.rate]);
    }
    let mut out = Output {
        csv: t.finish(),
        ..Output::default()
    };
    if check {
        out.checks = rate_checks(cfg, kind, &rm, &pts)?;
    }
    Ok(out)
}

fn rate_checks(cfg: &ExperimentConfig, kind: RateKind, rm: &RateModel, pts: &[SweepPoint]) -> Result<Vec<Check>> {
    let vac = match kind {
        RateKind::Dephasing => rm.gamma_phi_vac,
        RateKind::Measurement => rm.gamma_meas_vac,
    };
    let mut checks = Vec::new();
    let zero: Vec<_> = pts.iter().filter(|p| p.gain_db == 0.0).collect();
    let worst = zero.iter().map(|p| (p.rate / vac - 1.0).abs()).fold(0.0, f64::max);
    checks.push(Check::new(
        "squeezer off gives the vacuum rate",
        worst < 1e-12,
        format!("{} rows at 0 dB, worst relative deviation {worst:.2e}", zero.len()),
    ));
    let mut worst = 0.0f64;
    for p in pts {
        worst = worst.max((rate(kind, p.phi + PI, p.gain_db, rm)? / p.rate - 1.0).abs());
    }
    checks.push(Check::new(
        "period pi in phi",
        worst < 1e-12,
        format!("worst relative deviation {worst:.2e}"),
    ));
    if kind == RateKind::Dephasing {
        // Ratio of the extremes at G = 3.8 dB against the closed-form ratio.
        let sq = gain_to_squeeze(3.8, 0.0)?;
        let (n, m) = (sq.n_photons, sq.m_coherence);
        let e = 2.0 * rm.eff.eps_in;
        let want = (1.0 + e * (n + m)) / (1.0 + e * (n - m));
        let phi0 = rm.eff.global_phase;
        let got = rate(kind, -phi0, 3.8, rm)? / rate(kind, FRAC_PI_2 - phi0, 3.8, rm)?;
        checks.push(Check::new(
            "max/min ratio at 3.8 dB",
            rel_close(got, want, 1e-12),
            format!("{got:.6} vs {want:.6}"),
        ));
    }
    checks.push(refit_check(cfg, rm)?);
    Ok(checks)
}

/// Re-fits noiseless sweeps on the configured grid and compares eps_in.
fn refit_check(cfg: &ExperimentConfig, rm: &RateModel) -> Result<Check> {
    let name = "joint re-fit recovers eps_in";
    let phis = cfg.sweep.phases_rad.values()?;
    let span =
        phis.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - phis.iter().cloned().fold(f64::INFINITY, f64::min);
    let gains = cfg.sweep.gains_db.values()?;
    if span < FRAC_PI_2 || !gains.iter().any(|&g| g > 0.0) || rm.eff.eps_in == 0.0 {
        return Ok(Check::new(
            name,
            true,
            "skipped: grid spans under half a period or has no squeezing".into(),
        ));
    }
    let d = sweep_points(RateKind::Dephasing, cfg, rm)?;
    let m = sweep_points(RateKind::Measurement, cfg, rm)?;
    let start = RateModel {
        eff: crate::params::EfficiencyParams {
            eps_in: 0.2,
            delta_align: 0.0,
            global_phase: 0.0,
            ..rm.eff
        },
        ..*rm
    };
    let fit = joint_fit(&d, &m, &start)?;
    let got = fit.get("eps_in")?;
    Ok(Check::new(
        name,
        (got - rm.eff.eps_in).abs() < 1e-6,
        format!("eps_in {got:.10} vs {}", rm.eff.eps_in),
    ))
}

fn eta(cfg: &ExperimentConfig, check: bool) -> Result<Output> {
    let rm = cfg.rate_model();
    let rows: Vec<[f64; 5]> = grid(cfg)?
        .into_par_iter()
        .map(|(g, phi)| {
            let sq = gain_to_squeeze(g, phi)?;
            Ok([
                phi,
                g,
                dephasing_rate(phi, &sq, &rm)?,
                measurement_rate_at(phi, &sq, &rm)?,
                efficiency(phi, &sq, &rm)?,
            ])
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(&["phi_rad", "gain_db", "gamma_phi_per_us", "gamma_meas_per_us", "eta"]);
    for r in &rows {
        t.row(r);
    }
    let mut out = Output {
        csv: t.finish(),
        ..Output::default()
    };
    if check {
        let off = efficiency(0.3, &SqueezeSpec::vacuum(0.3), &rm)?;
        out.checks.push(Check::new(
            "squeezer off gives eps_out",
            rel_close(off, rm.eff.eps_out, 1e-12),
            format!("eta = {off:.6}, eps_out = {}", rm.eff.eps_out),
        ));
        let aligned = RateModel {
            eff: crate::params::EfficiencyParams {
                delta_align: 0.0,
                ..rm.eff
            },
            ..rm
        };
        let e42 = efficiency(FRAC_PI_2, &gain_to_squeeze(1.0, FRAC_PI_2)?, &aligned)?;
        out.checks.push(Check::new(
            "eta(pi/2, 1 dB, delta = 0) near 0.42",
            (e42 - 0.42).abs() <= 0.02,
            format!("{e42:.4}"),
        ));
        let mut asym = 0.0f64;
        let centre = FRAC_PI_2 - aligned.eff.global_phase;
        for x in [0.2, 0.5, 0.9, 1.3] {
            let at = |phi: f64| -> Result<f64> { efficiency(phi, &gain_to_squeeze(2.0, phi)?, &aligned) };
            asym = asym.max((at(centre + x)? - at(centre - x)?).abs());
        }
        out.checks.push(Check::new(
            "eta symmetric about pi/2 when delta = 0",
            asym < 1e-12,
            format!("largest asymmetry {asym:.2e}"),
        ));
    }
    Ok(out)
}

fn snr_curve(cfg: &ExperimentConfig, check: bool) -> Result<Output> {
    let p = cfg.params()?;
    let taus = cfg.snr_curve.taus_us.values()?;
    let gains = cfg.snr_curve.gains_db.values()?;
    let phi = cfg.snr_curve.phi;
    let rows: Vec<[f64; 8]> = gains
        .iter()
        .flat_map(|&g| taus.iter().map(move |&t| (g, t)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(g, tau)| {
            let r = 0.5 * db_to_linear(g).ln();
            let s = snr(tau, &p, &SqueezeSpec::from_r(r, phi)?)?;
            let s0 = snr(tau, &p, &SqueezeSpec::vacuum(phi))?;
            Ok([
                g,
                r,
                tau,
                s.signal_sq,
                s.noise_sq,
                s.snr,
                s.snr / s0.snr,
                snr_ratio_longtime(r, &p)?,
            ])
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(&[
        "gain_db",
        "r",
        "tau_us",
        "signal_sq",
        "noise_sq",
        "snr",
        "ratio_to_unsqueezed",
        "ratio_longtime",
    ]);
    for r in &rows {
        t.row(r);
    }
    let opt = optimal_squeezing(&p)?;
    let mut out = Output {
        csv: t.finish(),
        report: Some(json!({ "optimal_squeezing": opt })),
        checks: Vec::new(),
    };
    if check {
        out.checks = snr_checks(&p)?;
    }
    Ok(out)
}

fn snr_checks(p: &SystemParams) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let vac = SqueezeSpec::vacuum(0.0);
    let kt = [50.0, 100.0, 200.0];
    let rates: Vec<f64> = kt
        .iter()
        .map(|k| {
            let tau = k / p.kappa;
            Ok(snr(tau, p, &vac)?.snr / tau)
        })
        .collect::<Result<_>>()?;
    let spread = (rates[0] / rates[2] - 1.0).abs();
    checks.push(Check::new(
        "unsqueezed SNR linear at long times",
        spread < 0.02,
        format!("SNR/tau varies by {spread:.2e} between kappa tau = 50 and 200"),
    ));
    let opt = optimal_squeezing(p)?;
    checks.push(Check::new(
        "optimal squeezing near 15.9 dB",
        (opt.gain_db - 15.9).abs() <= 0.1,
        format!("{:.4} dB", opt.gain_db),
    ));
    checks.push(Check::new(
        "peak long-time ratio near 19.4",
        (opt.ratio / 19.4 - 1.0).abs() <= 0.02,
        format!("{:.4}", opt.ratio),
    ));
    let lt = snr_ratio_longtime(opt.r, p)?;
    let worst = [opt.r - 0.05, opt.r + 0.05]
        .iter()
        .map(|&r| snr_ratio_longtime(r, p))
        .collect::<Result<Vec<_>>>()?;
    checks.push(Check::new(
        "closed-form optimum is a maximum",
        worst.iter().all(|&w| w < lt),
        format!("ratio {lt:.6} vs neighbours {worst:?}"),
    ));
    Ok(checks)
}

/// `T_eff` per configured source and the reference fidelity time, for one DPA gain.
#[derive(Clone, Debug, Serialize)]
pub struct LifetimeRow {
    pub dpa_gain_db: f64,
    pub n_s: f64,
    pub t_eff: Vec<(SqueezeSource, f64)>,
    pub t_fidelity: f64,
}

/// Lifetime runs for every configured gain and source, in grid order.
pub fn lifetime_rows(cfg: &ExperimentConfig) -> Result<Vec<LifetimeRow>> {
    let p = cfg.params()?;
    let lc = &cfg.lifetime;
    let gains = lc.dpa_gains_db.values()?;
    let jobs: Vec<(f64, SqueezeSource)> = gains
        .iter()
        .flat_map(|&g| lc.sources.iter().map(move |&s| (g, s)))
        .collect();
    let t_eff: Vec<f64> = jobs
        .par_iter()
        .map(|&(g, src)| {
            let ns = photons_from_dpa_gain_db(g)?;
            Ok(simulate_lifetime(&p, ns, lc.phi, src, &RunOptions::for_source(src))?
                .fit
                .t_eff)
        })
        .collect::<Result<_>>()?;
    gains
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            let ns = photons_from_dpa_gain_db(g)?;
            let r = ns.sqrt().asinh();
            let k = lc.sources.len();
            Ok(LifetimeRow {
                dpa_gain_db: g,
                n_s: ns,
                t_eff: lc
                    .sources
                    .iter()
                    .copied()
                    .zip(t_eff[i * k..(i + 1) * k].iter().copied())
                    .collect(),
                t_fidelity: fidelity_time(&p, &SqueezeSpec::from_r(r, lc.phi)?, lc.fidelity, 1e4)?,
            })
        })
        .collect()
}

fn source_name(s: SqueezeSource) -> &'static str {
    match s {
        SqueezeSource::Broadband => "broadband",
        SqueezeSource::Cascaded => "cascaded",
    }
}

fn lifetime(cfg: &ExperimentConfig, check: bool) -> Result<Output> {
    let rows = lifetime_rows(cfg)?;
    let mut header = vec!["dpa_gain_db".to_string(), "n_s".into()];
    header.extend(
        cfg.lifetime
            .sources
            .iter()
            .map(|s| format!("t_eff_{}_us", source_name(*s))),
    );
    header.push("t_fidelity_us".into());
    let hdr: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut t = Table::new(&hdr);
    for r in &rows {
        let mut v = vec![r.dpa_gain_db, r.n_s];
        v.extend(r.t_eff.iter().map(|x| x.1));
        v.push(r.t_fidelity);
        t.row(&v);
    }
    let mut out = Output {
        csv: t.finish(),
        ..Output::default()
    };
    if check {
        for r in &rows {
            let get = |s| r.t_eff.iter().find(|x| x.0 == s).map(|x| x.1);
            if let (Some(b), Some(c)) = (get(SqueezeSource::Broadband), get(SqueezeSource::Cascaded)) {
                out.checks.push(Check::new(
                    &format!("{} dB: cascaded outlives broadband", r.dpa_gain_db),
                    c > b,
                    format!("cascaded {c:.4} us, broadband {b:.4} us"),
                ));
            }
            for (s, te) in &r.t_eff {
                out.checks.push(Check::new(
                    &format!(
                        "{} dB: {} lifetime exceeds the fidelity time",
                        r.dpa_gain_db,
                        source_name(*s)
                    ),
                    *te > r.t_fidelity,
                    format!("{te:.4} us vs {:.4} us", r.t_fidelity),
                ));
            }
        }
    }
    Ok(out)
}

fn histograms(cfg: &ExperimentConfig, check: bool) -> Result<Output> {
    let p = cfg.params()?;
    let rm = cfg.rate_model();
    let hc = &cfg.histograms;
    let phi = hc.phi.unwrap_or(-rm.eff.delta_align);
    let opts = SynthOptions {
        samples_per_us: hc.samples_per_us,
        p_relax: hc.p_relax,
    };
    let gains = hc.gains_db.values()?;
    let mut t = Table::new(&["gain_db", "state", "bin_center", "density"]);
    let mut reports = Vec::new();
    let mut spreads = Vec::new();
    for &g in &gains {
        let sq = gain_to_squeeze(g, phi)?;
        let bg = synth_records(
            &p,
            &sq,
            &rm,
            QubitState::Ground,
            hc.n_shots,
            hc.t_int_us,
            cfg.seed,
            &opts,
        )?;
        let be = synth_records(
            &p,
            &sq,
            &rm,
            QubitState::Excited,
            hc.n_shots,
            hc.t_int_us,
            cfg.seed,
            &opts,
        )?;
        let (vg, ve) = (bg.mean_voltages(), be.mean_voltages());
        let pooled: Vec<f64> = vg.iter().chain(&ve).copied().collect();
        let lo = pooled.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = pooled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w = crate::estimation::freedman_diaconis_width(&pooled)?;
        for (label, v) in [("g", &vg), ("e", &ve)] {
            let h = histogram(v, Some(w), Some((lo, hi)))?;
            for (c, d) in h.centers().iter().zip(&h.density) {
                t.text_row(g, label, *c, *d);
            }
        }
        let snr_t = snr_vs_time(&bg, &be)?;
        let final_snr = snr_t.real("snr")?.last().copied().unwrap_or(0.0);
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let fit_e = fit_double_gaussian(&ve, mean(&vg))?;
        let fit_g = fit_double_gaussian(&vg, mean(&ve))?;
        let sd = |v: &[f64]| {
            let m = mean(v);
            (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
        };
        spreads.push(sd(&vg));
        reports.push(json!({
            "gain_db": g,
            "phi_rad": phi,
            "bin_width": w,
            "overlap_area": overlap_area(&vg, &ve)?,
            "snr": final_snr,
            "sd_ground": sd(&vg),
            "sd_excited": sd(&ve),
            "relaxed_fraction": be.relaxed.iter().filter(|&&r| r).count() as f64 / be.n_shots() as f64,
            "fit_excited": fit_e,
            "fit_ground": fit_g,
        }));
    }
    let csv = t.finish();
    let mut out = Output {
        csv,
        report: Some(
            json!({ "seed": cfg.seed, "n_shots": hc.n_shots, "t_int_us": hc.t_int_us, "histograms": reports }),
        ),
        checks: Vec::new(),
    };
    if check {
        let again = histograms(cfg, false)?;
        out.checks.push(Check::new(
            "seed determinism",
            again.csv == out.csv,
            "rerun with the same seed".into(),
        ));
        let zero = spreads.first().copied();
        let narrower = gains
            .iter()
            .zip(&spreads)
            .all(|(g, s)| *g == gains[0] || zero.is_none_or(|z| *s < z));
        out.checks.push(Check::new(
            "squeezed histograms narrower than the first gain",
            gains.len() < 2 || narrower,
            format!("ground-state spreads {spreads:?}"),
        ));
        // Weight recovery is meaningful only when the two states are well separated.
        let sq = gain_to_squeeze(gains[0], phi)?;
        let long = SynthOptions { p_relax: 0.05, ..opts };
        let bg = synth_records(&p, &sq, &rm, QubitState::Ground, 20_000, 20.0, cfg.seed, &long)?;
        let be = synth_records(&p, &sq, &rm, QubitState::Excited, 20_000, 20.0, cfg.seed, &long)?;
        let vg = bg.mean_voltages();
        let fit = fit_double_gaussian(&be.mean_voltages(), vg.iter().sum::<f64>() / vg.len() as f64)?;
        let actual = be.relaxed.iter().filter(|&&r| r).count() as f64 / be.n_shots() as f64;
        out.checks.push(Check::new(
            "double-Gaussian weight recovers contamination",
            (fit.model.weight - actual).abs() < 0.01,
            format!("fitted {:.4}, actual {actual:.4} (20 us records)", fit.model.weight),
        ));
    }
    Ok(out)
}

impl Table {
    fn text_row(&mut self, gain: f64, label: &str, center: f64, density: f64) {
        self.text
            .push_str(&format!("{gain:.16e},{label},{center:.16e},{density:.16e}\n"));
    }
}

/// Maps an error to the process exit code: 1 for configuration, 2 for numerics.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_config() {
        1
    } else {
        2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(doc: &str) -> ExperimentConfig {
        ExperimentConfig::from_json_str(doc).unwrap()
    }

    fn parse(csv: &str) -> (Vec<String>, Vec<Vec<f64>>) {
        let mut lines = csv.lines();
        let header = lines.next().unwrap().split(',').map(String::from).collect();
        let rows = lines
            .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
            .collect();
        (header, rows)
    }

    #[test]
    fn zero_gain_dephasing_rows_are_constant() {
        let out = run(Command::DephaseSweep, &cfg(r#"{"sweep": {"gains_db": [0]}}"#), true).unwrap();
        let (h, rows) = parse(&out.csv);
        assert_eq!(h, ["phi_rad", "gain_db", "gamma_phi_per_us"]);
        assert!(rows.iter().all(|r| r[2] == 0.54));
        assert!(out.all_checks_pass(), "{:?}", out.checks);
    }

    #[test]
    fn rate_sweeps_pass_their_checks() {
        for c in [Command::DephaseSweep, Command::MeasSweep, Command::Eta] {
            let out = run(c, &ExperimentConfig::default(), true).unwrap();
            assert!(out.all_checks_pass(), "{}: {:?}", c.name(), out.checks);
            assert_eq!(out.csv.lines().count(), 1 + 4 * 37);
        }
    }

    #[test]
    fn sweeps_are_byte_identical_across_thread_counts() {
        let c = ExperimentConfig::default();
        let a = run(Command::Eta, &c, false).unwrap().csv;
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| run(Command::Eta, &c, false)).unwrap().csv;
        assert_eq!(a, b);
    }

    #[test]
    fn csv_keeps_full_precision() {
        let out = run(Command::MeasSweep, &ExperimentConfig::default(), false).unwrap();
        let (_, rows) = parse(&out.csv);
        let rm = RateModel::experiment();
        for r in rows.iter().take(40) {
            assert_eq!(r[2], rate(RateKind::Measurement, r[0], r[1], &rm).unwrap());
        }
    }

    #[test]
    fn snr_curve_reports_optimum() {
        let out = run(
            Command::SnrCurve,
            &cfg(r#"{"snr_curve": {"taus_us": [1, 2], "gains_db": [0, 6]}}"#),
            true,
        )
        .unwrap();
        assert!(out.all_checks_pass(), "{:?}", out.checks);
        let (_, rows) = parse(&out.csv);
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().filter(|r| r[0] == 0.0).all(|r| (r[6] - 1.0).abs() < 1e-12));
        let opt = &out.report.unwrap()["optimal_squeezing"];
        assert!((opt["gain_db"].as_f64().unwrap() - 15.9).abs() < 0.1);
    }

    #[test]
    fn histograms_are_deterministic_and_narrow_with_squeezing() {
        let c = cfg(r#"{"histograms": {"n_shots": 4000}, "seed": 5}"#);
        let out = run(Command::Histograms, &c, true).unwrap();
        assert!(out.all_checks_pass(), "{:?}", out.checks);
        let report = out.report.unwrap();
        let h = report["histograms"].as_array().unwrap();
        assert!(h[1]["overlap_area"].as_f64().unwrap() < h[0]["overlap_area"].as_f64().unwrap());
    }

    #[test]
    fn config_errors_map_to_exit_one() {
        let e = ExperimentConfig::from_json_str(r#"{"nope": 1}"#).unwrap_err();
        assert_eq!(exit_code(&e), 1);
        assert_eq!(exit_code(&Error::Fit("x".into())), 2);
    }
}
