//! Synthetic homodyne records, SNR(t) and Ramsey-decay fits, the joint
//! nonlinear fit of the rate models, and histograms with double-Gaussian fits.

mod histogram;
mod lm;

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::{Read, Write};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homodyne::{dephasing_rate, measurement_rate_at, RateModel};
use crate::params::{gain_to_squeeze, EfficiencyParams, SqueezeSpec, SystemParams};
use crate::series::TimeSeries;

pub use histogram::{
    fit_double_gaussian, freedman_diaconis_width, histogram, overlap_area, DoubleGaussian, DoubleGaussianFit,
    Histogram, MAX_MINOR_WEIGHT,
};
pub use lm::{levenberg_marquardt, LmOptions, LmReport};

/// Prepared qubit state of a batch of shots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QubitState {
    Ground,
    Excited,
}

impl QubitState {
    fn sign(self) -> f64 {
        match self {
            QubitState::Ground => -1.0,
            QubitState::Excited => 1.0,
        }
    }

    fn label(self) -> &'static str {
        match self {
            QubitState::Ground => "g",
            QubitState::Excited => "e",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "g" => Ok(QubitState::Ground),
            "e" => Ok(QubitState::Excited),
            _ => Err(Error::Config(format!("unknown qubit state label {s:?}"))),
        }
    }
}

/// Record synthesis settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthOptions {
    /// Digitiser rate in samples per us.
    pub samples_per_us: f64,
    /// Probability that an excited-state preparation is found in the ground state.
    pub p_relax: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            samples_per_us: 20.0,
            p_relax: 0.02,
        }
    }
}

/// Integrated homodyne voltages `V(t_k)`, `t_k = k dt` for `k = 1..n`, one row per shot.
#[derive(Clone, Debug, PartialEq)]
pub struct RecordBatch {
    pub dt: f64,
    pub state: QubitState,
    pub seed: u64,
    pub shots: Vec<Vec<f64>>,
    /// Excited-state preparations that actually started in the ground state.
    pub relaxed: Vec<bool>,
}

/// Mean signal per unit time, `a_bar0 chi / kappa` in detector units.
pub fn record_signal(p: &SystemParams) -> Result<f64> {
    if !(p.kappa > 0.0) {
        return Err(Error::Domain("record signal needs kappa > 0".into()));
    }
    Ok(p.a_bar0 * p.chi / p.kappa)
}

/// Noise power per unit time of the integrated voltage. Unsqueezed it makes
/// the power SNR grow as `8 Gamma_phi,vac eps_out t`; squeezing scales it by
/// `Gamma_meas,vac / Gamma_meas`. Without a drive (`a_bar0 = 0`) the
/// drive-independent limit `1 / (16 kappa eps_out)` is used, which is the
/// same value when `Gamma_phi,vac = 8 a_bar0^2 chi^2 / kappa`.
pub fn record_noise_density(p: &SystemParams, sq: &SqueezeSpec, rm: &RateModel) -> Result<f64> {
    let s = record_signal(p)?;
    let vac = if s == 0.0 {
        1.0 / (16.0 * p.kappa * rm.eff.eps_out)
    } else {
        s * s / (2.0 * rm.gamma_phi_vac * rm.eff.eps_out)
    };
    if !vac.is_finite() || !(vac > 0.0) {
        return Err(Error::Domain(
            "record noise needs gamma_phi_vac > 0 and eps_out > 0".into(),
        ));
    }
    Ok(vac * rm.gamma_meas_vac / measurement_rate_at(sq.phi, sq, rm)?)
}

/// Gaussian records for `n_shots` preparations of `state` over `t_int` us.
/// Shot `i` draws from its own ChaCha stream, so batches are reproducible
/// for a given seed regardless of thread count.
#[allow(clippy::too_many_arguments)]
pub fn synth_records(
    p: &SystemParams,
    sq: &SqueezeSpec,
    rm: &RateModel,
    state: QubitState,
    n_shots: usize,
    t_int: f64,
    seed: u64,
    opts: &SynthOptions,
) -> Result<RecordBatch> {
    if n_shots == 0 {
        return Err(Error::Domain("need at least one shot".into()));
    }
    if !(opts.samples_per_us > 0.0) || !(t_int > 0.0) {
        return Err(Error::Domain(
            "sampling rate and integration time must be positive".into(),
        ));
    }
    if !(0.0..=1.0).contains(&opts.p_relax) {
        return Err(Error::Domain(format!("p_relax = {} outside [0, 1]", opts.p_relax)));
    }
    let n = (t_int * opts.samples_per_us).round().max(1.0) as usize;
    let dt = 1.0 / opts.samples_per_us;
    let s = record_signal(p)?;
    let sd = (record_noise_density(p, sq, rm)? * dt).sqrt();
    let stream_bit = matches!(state, QubitState::Excited) as u64;
    let rows: Vec<(Vec<f64>, bool)> = (0..n_shots)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(2 * i as u64 + stream_bit);
            let relaxed = state == QubitState::Excited && rng.gen::<f64>() < opts.p_relax;
            let mean = if relaxed { -s } else { state.sign() * s } * dt;
            let mut v = 0.0;
            let row = (0..n)
                .map(|_| {
                    let z: f64 = rng.sample(StandardNormal);
                    v += mean + sd * z;
                    v
                })
                .collect();
            (row, relaxed)
        })
        .collect();
    let (shots, relaxed) = rows.into_iter().unzip();
    Ok(RecordBatch {
        dt,
        state,
        seed,
        shots,
        relaxed,
    })
}

impl RecordBatch {
    pub fn n_shots(&self) -> usize {
        self.shots.len()
    }

    pub fn n_samples(&self) -> usize {
        self.shots.first().map_or(0, Vec::len)
    }

    pub fn times(&self) -> Vec<f64> {
        (1..=self.n_samples()).map(|k| k as f64 * self.dt).collect()
    }

    /// Final integrated voltage divided by the integration time, per shot.
    pub fn mean_voltages(&self) -> Vec<f64> {
        let t = self.n_samples() as f64 * self.dt;
        self.shots
            .iter()
            .map(|r| r.last().copied().unwrap_or(0.0) / t)
            .collect()
    }

    fn check(&self) -> Result<()> {
        let n = self.n_samples();
        if self.shots.is_empty() || n == 0 {
            return Err(Error::Domain("empty record batch".into()));
        }
        if self.shots.iter().any(|r| r.len() != n) || self.relaxed.len() != self.shots.len() {
            return Err(Error::Domain("record rows differ in length".into()));
        }
        Ok(())
    }

    /// CSV with one shot per row: `seed,state,relaxed,<t_1>,...,<t_n>`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        self.check()?;
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["seed".to_string(), "state".into(), "relaxed".into()];
        header.extend(self.times().iter().map(|t| format!("{t:.16e}")));
        wr.write_record(&header)?;
        for (row, &relaxed) in self.shots.iter().zip(&self.relaxed) {
            let mut rec = vec![
                self.seed.to_string(),
                self.state.label().into(),
                (relaxed as u8).to_string(),
            ];
            rec.extend(row.iter().map(|v| format!("{v:.16e}")));
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Inverse of [`write_csv`](Self::write_csv).
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers()?.clone();
        if header.len() < 4 || &header[0] != "seed" || &header[1] != "state" || &header[2] != "relaxed" {
            return Err(Error::Config(
                "record CSV must start with seed,state,relaxed and a time column".into(),
            ));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad number {s:?}: {e}")))
        };
        let dt = parse(&header[3])?;
        let mut batch = RecordBatch {
            dt,
            state: QubitState::Ground,
            seed: 0,
            shots: Vec::new(),
            relaxed: Vec::new(),
        };
        for (i, rec) in rd.records().enumerate() {
            let rec = rec?;
            let seed = rec[0]
                .parse::<u64>()
                .map_err(|e| Error::Config(format!("bad seed: {e}")))?;
            let state = QubitState::parse(&rec[1])?;
            if i == 0 {
                batch.seed = seed;
                batch.state = state;
            } else if seed != batch.seed || state != batch.state {
                return Err(Error::Config(format!("row {} mixes seeds or states", i + 1)));
            }
            batch.relaxed.push(&rec[2] == "1");
            batch.shots.push(rec.iter().skip(3).map(parse).collect::<Result<_>>()?);
        }
        batch.check()?;
        Ok(batch)
    }
}

fn check_pair(g: &RecordBatch, e: &RecordBatch) -> Result<()> {
    g.check()?;
    e.check()?;
    if g.n_samples() != e.n_samples() || (g.dt - e.dt).abs() > 1e-12 * g.dt {
        return Err(Error::Domain("batches use different time grids".into()));
    }
    Ok(())
}

/// Per-time sums `(sum V, sum V^2)` over a set of shots.
fn moments<'a>(rows: impl Iterator<Item = &'a Vec<f64>>, n: usize) -> (Vec<f64>, Vec<f64>, usize) {
    let mut s1 = vec![0.0; n];
    let mut s2 = vec![0.0; n];
    let mut count = 0;
    for r in rows {
        for (k, &v) in r.iter().enumerate() {
            s1[k] += v;
            s2[k] += v * v;
        }
        count += 1;
    }
    (s1, s2, count)
}

fn snr_from_moments(g: (&[f64], &[f64], usize), e: (&[f64], &[f64], usize)) -> Result<Vec<f64>> {
    let stats = |(s1, s2, n): (&[f64], &[f64], usize), k: usize| {
        let n = n as f64;
        let mean = s1[k] / n;
        let var = if n > 1.0 {
            ((s2[k] - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        (mean, var.sqrt())
    };
    (0..g.0.len())
        .map(|k| {
            let (mg, sg) = stats(g, k);
            let (me, se) = stats(e, k);
            let width = sg + se;
            if !(width > 0.0) {
                return Err(Error::Fit(format!("degenerate spread at sample {}", k + 1)));
            }
            Ok((2.0 * (me - mg) / width).powi(2))
        })
        .collect()
}

/// Power SNR `(2 (V_e - V_g) / (sigma_e + sigma_g))^2` at every sample time.
pub fn snr_vs_time(g: &RecordBatch, e: &RecordBatch) -> Result<TimeSeries> {
    check_pair(g, e)?;
    let n = g.n_samples();
    let mg = moments(g.shots.iter(), n);
    let me = moments(e.shots.iter(), n);
    let snr = snr_from_moments((&mg.0, &mg.1, mg.2), (&me.0, &me.1, me.2))?;
    TimeSeries::from_real("snr", g.times(), snr)
}

/// Measurement rate from the SNR slope, `SNR(t) = 4 Gamma_meas t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub gamma_meas: f64,
    pub std_err: f64,
    /// Fitted `d SNR / dt`.
    pub slope: f64,
    pub n_points: usize,
    pub window: f64,
}

fn slope_through_origin(t: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if t.len() < 5 {
        return Err(Error::Fit(format!("need at least 5 points, got {}", t.len())));
    }
    if t.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite SNR data".into()));
    }
    let sxx: f64 = t.iter().map(|x| x * x).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("all times are zero".into()));
    }
    let slope = t.iter().zip(y).map(|(x, v)| x * v).sum::<f64>() / sxx;
    let ss: f64 = t.iter().zip(y).map(|(x, v)| (v - slope * x).powi(2)).sum();
    Ok((slope, (ss / (t.len() - 1) as f64 / sxx).sqrt()))
}

fn windowed(ts: &TimeSeries, window: Option<f64>) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let y = ts.real(
        ts.names
            .first()
            .ok_or_else(|| Error::Fit("series has no columns".into()))?,
    )?;
    let w = window.unwrap_or(f64::INFINITY);
    let (t, y): (Vec<f64>, Vec<f64>) = ts
        .times
        .iter()
        .copied()
        .zip(y)
        .filter(|(t, _)| *t <= w * (1.0 + 1e-12))
        .unzip();
    let used = t.last().copied().unwrap_or(0.0);
    Ok((t, y, used))
}

/// Least-squares line through the origin of the first column of `snr_ts`
/// on `t <= window`; `Gamma_meas` is a quarter of the slope.
pub fn fit_measurement_rate(snr_ts: &TimeSeries, window: Option<f64>) -> Result<RateFit> {
    let (t, y, used) = windowed(snr_ts, window)?;
    let (slope, se) = slope_through_origin(&t, &y)?;
    Ok(RateFit {
        gamma_meas: slope / 4.0,
        std_err: se / 4.0,
        slope,
        n_points: t.len(),
        window: used,
    })
}

/// [`fit_measurement_rate`] on the SNR of two record batches, with a
/// delete-one-group jackknife standard error over `groups` shot groups
/// (the SNR points share shots and are strongly correlated in time).
pub fn measurement_rate_from_records(
    g: &RecordBatch,
    e: &RecordBatch,
    window: Option<f64>,
    groups: usize,
) -> Result<RateFit> {
    check_pair(g, e)?;
    if groups < 2 || g.n_shots() < 2 * groups || e.n_shots() < 2 * groups {
        return Err(Error::Fit(format!(
            "need at least {} shots per batch for {groups} groups",
            2 * groups
        )));
    }
    let n = g.n_samples();
    let times = g.times();
    let w = window.unwrap_or(f64::INFINITY);
    let m = times.iter().filter(|&&t| t <= w * (1.0 + 1e-12)).count();
    let group_moments = |b: &RecordBatch| -> Vec<(Vec<f64>, Vec<f64>, usize)> {
        (0..groups)
            .map(|j| moments(b.shots.iter().skip(j).step_by(groups), n))
            .collect()
    };
    let (gg, ge) = (group_moments(g), group_moments(e));
    let total = |gs: &[(Vec<f64>, Vec<f64>, usize)], skip: Option<usize>| {
        let mut s1 = vec![0.0; n];
        let mut s2 = vec![0.0; n];
        let mut c = 0;
        for (j, (a, b, k)) in gs.iter().enumerate() {
            if Some(j) == skip {
                continue;
            }
            for i in 0..n {
                s1[i] += a[i];
                s2[i] += b[i];
            }
            c += k;
        }
        (s1, s2, c)
    };
    let slope_for = |skip: Option<usize>| -> Result<f64> {
        let (a, b) = (total(&gg, skip), total(&ge, skip));
        let snr = snr_from_moments((&a.0, &a.1, a.2), (&b.0, &b.1, b.2))?;
        Ok(slope_through_origin(&times[..m], &snr[..m])?.0)
    };
    let full = slope_for(None)?;
    let leave: Vec<f64> = (0..groups).map(|j| slope_for(Some(j))).collect::<Result<_>>()?;
    let mean = leave.iter().sum::<f64>() / groups as f64;
    let var = (groups - 1) as f64 / groups as f64 * leave.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    Ok(RateFit {
        gamma_meas: full / 4.0,
        std_err: var.sqrt() / 4.0,
        slope: full,
        n_points: m,
        window: times[m.max(1) - 1],
    })
}

/// Dephasing rate from a Ramsey trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RamseyFit {
    pub gamma_phi: f64,
    pub std_err: f64,
    /// The initial value used for normalisation.
    pub initial: f64,
}

/// Fits `y(t) / y(t_0) = exp(-Gamma (t - t_0))` to the real part of the
/// first column of `ts` by Gauss-Newton on `Gamma`.
pub fn fit_ramsey(ts: &TimeSeries) -> Result<RamseyFit> {
    let y = ts.real(
        ts.names
            .first()
            .ok_or_else(|| Error::Fit("series has no columns".into()))?,
    )?;
    if y.len() < 3 {
        return Err(Error::Fit("need at least three Ramsey points".into()));
    }
    let y0 = y[0];
    if !(y0 > 0.0) {
        return Err(Error::Fit(format!("initial amplitude {y0} must be positive")));
    }
    let t0 = ts.times[0];
    let x: Vec<f64> = ts.times.iter().map(|t| t - t0).collect();
    let z: Vec<f64> = y.iter().map(|v| v / y0).collect();
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite Ramsey data".into()));
    }
    // Log-linear start on the points that are still clearly positive.
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (&xi, &zi) in x.iter().zip(&z).skip(1) {
        if zi > 0.05 {
            sxx += xi * xi;
            sxy += xi * zi.ln();
        }
    }
    let mut gamma = if sxx > 0.0 { -sxy / sxx } else { 0.0 };
    if !(gamma > 0.0) {
        return Err(Error::Fit("Ramsey trace does not decay".into()));
    }
    let resid = |g: f64| -> f64 { x.iter().zip(&z).map(|(xi, zi)| (zi - (-g * xi).exp()).powi(2)).sum() };
    for _ in 0..200 {
        let (mut jtj, mut jtr) = (0.0, 0.0);
        for (&xi, &zi) in x.iter().zip(&z) {
            let m = (-gamma * xi).exp();
            let j = -xi * m;
            jtj += j * j;
            jtr += j * (zi - m);
        }
        if !(jtj > 0.0) {
            break;
        }
        let mut step = jtr / jtj;
        let base = resid(gamma);
        while resid(gamma + step) > base && step.abs() > 1e-16 * gamma.abs() {
            step *= 0.5;
        }
        gamma += step;
        if step.abs() <= 1e-14 * gamma.abs() {
            break;
        }
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Fit("Ramsey trace does not decay".into()));
    }
    let jtj: f64 = x.iter().map(|xi| (xi * (-gamma * xi).exp()).powi(2)).sum();
    let s2 = resid(gamma) / (x.len() - 1) as f64;
    Ok(RamseyFit {
        gamma_phi: gamma,
        std_err: (s2 / jtj).sqrt(),
        initial: y0,
    })
}

/// One rate measured at squeezing angle `phi` (rad) and squeezer gain `gain_db`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPoint {
    pub phi: f64,
    pub gain_db: f64,
    pub rate: f64,
}

/// Estimates, standard errors and diagnostics of a nonlinear fit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub names: Vec<String>,
    pub estimates: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Euclidean norm of the relative residuals.
    pub residual_norm: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    /// Set only when the gradient norm fell below the tolerance.
    pub converged: bool,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Result<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.estimates[i])
            .ok_or_else(|| Error::Domain(format!("no fitted parameter {name:?}")))
    }
}

/// Rate model with `(eps_in, delta, global phase)` replaced by `x`.
fn model_with(rm: &RateModel, x: &[f64]) -> RateModel {
    RateModel {
        eff: EfficiencyParams {
            eps_in: x[0],
            delta_align: x[1],
            global_phase: x[2],
            ..rm.eff
        },
        ..*rm
    }
}

/// Relative residuals of both sweeps plus a bound residual on `eps_in`.
fn joint_residuals(dephase: &[SweepPoint], meas: &[SweepPoint], rm: &RateModel, x: &[f64]) -> Vec<f64> {
    let clamped = [x[0].clamp(0.0, 1.0), x[1], x[2]];
    let m = model_with(rm, &clamped);
    let penalty = 1e3;
    let mut r = Vec::with_capacity(dephase.len() + meas.len() + 1);
    // Zero inside [0, 1]; grows linearly outside so the fit is pushed back.
    r.push(100.0 * (x[0] - clamped[0]));
    for pt in dephase {
        let v = gain_to_squeeze(pt.gain_db, pt.phi).and_then(|sq| dephasing_rate(pt.phi, &sq, &m));
        r.push(v.map_or(penalty, |v| v / pt.rate - 1.0));
    }
    for pt in meas {
        let v = gain_to_squeeze(pt.gain_db, pt.phi).and_then(|sq| measurement_rate_at(pt.phi, &sq, &m));
        r.push(v.map_or(penalty, |v| v / pt.rate - 1.0));
    }
    r
}

fn phase_span(pts: &[SweepPoint]) -> f64 {
    let lo = pts.iter().map(|p| p.phi).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|p| p.phi).fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

/// Wraps an angle of period `pi` into `(-pi/2, pi/2]`.
fn wrap_half_period(a: f64) -> f64 {
    let w = a - PI * (a / PI).round();
    if w <= -FRAC_PI_2 {
        w + PI
    } else {
        w
    }
}

/// Joint least-squares fit of `(eps_in, delta, global phase)` to a dephasing
/// sweep and a measurement-rate sweep, holding the vacuum rates and `eps_out`
/// of `rm_fixed`. Residuals are relative. Several starting phases are tried
/// and the lowest cost kept.
pub fn joint_fit(dephase: &[SweepPoint], meas: &[SweepPoint], rm_fixed: &RateModel) -> Result<FitResult> {
    if dephase.is_empty() || meas.is_empty() {
        return Err(Error::Domain("both sweeps need data".into()));
    }
    for (name, pts) in [("dephasing", dephase), ("measurement", meas)] {
        if phase_span(pts) < FRAC_PI_2 - 1e-12 {
            return Err(Error::Domain(format!(
                "{name} sweep spans less than half a period in phi"
            )));
        }
        if pts.iter().any(|p| !(p.rate > 0.0) || !p.phi.is_finite()) {
            return Err(Error::Domain(format!(
                "{name} sweep has non-positive or non-finite entries"
            )));
        }
    }
    let f = |x: &[f64]| joint_residuals(dephase, meas, rm_fixed, x);
    let opts = LmOptions::default();
    let starts = [-0.6, 0.0, 0.6];
    let mut best: Option<LmReport> = None;
    for &d0 in &starts {
        for &g0 in &starts {
            let rep = levenberg_marquardt(&f, &[0.3, d0, g0], &opts)?;
            if best.as_ref().is_none_or(|b| rep.cost < b.cost) {
                best = Some(rep);
            }
        }
    }
    let rep = best.expect("at least one start");
    let m = dephase.len() + meas.len();
    let dof = m.saturating_sub(3).max(1) as f64;
    let s2 = 2.0 * rep.cost / dof;
    let cov = rep
        .jtj
        .clone()
        .try_inverse()
        .unwrap_or_else(|| DMatrix::from_element(3, 3, f64::NAN));
    let std_errors = (0..3).map(|i| (cov[(i, i)] * s2).max(0.0).sqrt()).collect();
    let x = &rep.x;
    Ok(FitResult {
        names: vec!["eps_in".into(), "delta_align".into(), "global_phase".into()],
        estimates: vec![x[0], wrap_half_period(x[1]), wrap_half_period(x[2])],
        std_errors,
        residual_norm: (2.0 * rep.cost).sqrt(),
        gradient_norm: rep.gradient_norm,
        iterations: rep.iterations,
        converged: rep.converged,
    })
}

/// Model sweeps on the `gains x phis` grid with multiplicative Gaussian
/// noise of relative size `noise`: `(dephasing, measurement)`.
pub fn synthetic_sweeps(
    rm: &RateModel,
    gains_db: &[f64],
    phis: &[f64],
    noise: f64,
    seed: u64,
) -> Result<(Vec<SweepPoint>, Vec<SweepPoint>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dephase = Vec::new();
    let mut meas = Vec::new();
    for &g in gains_db {
        for &phi in phis {
            let sq = gain_to_squeeze(g, phi)?;
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            dephase.push(SweepPoint {
                phi,
                gain_db: g,
                rate: dephasing_rate(phi, &sq, rm)? * (1.0 + noise * z1),
            });
            meas.push(SweepPoint {
                phi,
                gain_db: g,
                rate: measurement_rate_at(phi, &sq, rm)? * (1.0 + noise * z2),
            });
        }
    }
    Ok((dephase, meas))
}

/// Complex helper used by the CLI to tabulate model curves.
pub fn rate_curves(rm: &RateModel, phi: f64, gain_db: f64) -> Result<(f64, f64)> {
    let sq = gain_to_squeeze(gain_db, phi)?;
    Ok((dephasing_rate(phi, &sq, rm)?, measurement_rate_at(phi, &sq, rm)?))
}
