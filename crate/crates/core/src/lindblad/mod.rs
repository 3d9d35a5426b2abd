//! Lindblad dynamics with broadband and cascaded (finite-bandwidth) squeezed
//! input, steady states and short-time qubit lifetimes.

pub mod gaussian;
mod solver;
mod sparse;

use log::{debug, info};
use nalgebra::DVector;

pub use solver::Control;
use solver::Propagator;

use crate::error::{Error, Result};
use crate::hamiltonians::{
    cascade_coupling, dpa_threshold, h_cascaded, h_longitudinal, h_qnd, h_rabi_frame, mode_op, qubit_op, Envelope,
    TimeDependentHamiltonian, CAVITY, DPA,
};
use crate::operators::{CMatrix, DensityMatrix, HilbertSpec, Operator, Pauli, SqueezeFrame, C64};
use crate::params::{SystemParams, TWO_PI};
use crate::series::TimeSeries;

/// Integration settings. Observables are sampled on `t_start + k * sample_dt`.
#[derive(Clone, Debug)]
pub struct EvolutionConfig {
    pub t_start: f64,
    pub t_end: f64,
    pub sample_dt: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the step; tightened further to a tenth of the fastest
    /// envelope period of the Hamiltonian.
    pub max_step: Option<f64>,
    pub initial_step: Option<f64>,
    pub max_steps: usize,
    pub observables: Vec<(String, Operator)>,
    /// Largest tolerated `|Tr rho - 1|`.
    pub trace_tol: f64,
    /// Largest tolerated population of the top two Fock levels.
    pub truncation_threshold: f64,
    /// Slots watched by the truncation check; `None` watches every slot of dimension > 2.
    pub truncation_slots: Option<Vec<usize>>,
    /// Promote truncation warnings to [`Error::Truncation`].
    pub truncation_error: bool,
    /// Diagonalise the final state and record its smallest eigenvalue.
    pub check_positivity: bool,
}

impl EvolutionConfig {
    pub fn new(t_end: f64, sample_dt: f64) -> Self {
        EvolutionConfig {
            t_start: 0.0,
            t_end,
            sample_dt,
            rtol: 1e-8,
            atol: 1e-10,
            max_step: None,
            initial_step: None,
            max_steps: 20_000_000,
            observables: Vec::new(),
            trace_tol: 1e-7,
            truncation_threshold: 1e-6,
            truncation_slots: None,
            truncation_error: false,
            check_positivity: true,
        }
    }

    pub fn observe(mut self, name: &str, op: Operator) -> Self {
        self.observables.push((name.to_string(), op));
        self
    }

    pub fn tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn strict_truncation(mut self, on: bool) -> Self {
        self.truncation_error = on;
        self
    }

    fn names(&self) -> Vec<String> {
        self.observables.iter().map(|(n, _)| n.clone()).collect()
    }

    fn ops(&self) -> Vec<Operator> {
        self.observables.iter().map(|(_, o)| o.clone()).collect()
    }
}

/// Positivity tolerance on trajectories.
pub const POSITIVITY_TOL: f64 = 1e-6;

fn finish(ts: &mut TimeSeries, rho: nalgebra::DMatrix<C64>, spec: &HilbertSpec, cfg: &EvolutionConfig) -> Result<()> {
    let state = DensityMatrix::new_unchecked(rho, spec.clone())?;
    if cfg.check_positivity {
        let ev = state.min_eigenvalue();
        ts.health.min_eigenvalue = Some(ev);
        if ev < -POSITIVITY_TOL {
            return Err(Error::Integration {
                t: *ts.times.last().unwrap_or(&cfg.t_end),
                reason: format!("state lost positivity (eigenvalue {ev:e})"),
            });
        }
    }
    ts.final_state = Some(state);
    Ok(())
}

/// Hamiltonian, collapse operators and named observables of a model on one Hilbert space.
pub struct ModelParts {
    pub h: TimeDependentHamiltonian,
    pub collapse: Vec<Operator>,
    pub observables: Vec<(String, Operator)>,
}

type Builder<'a> = Box<dyn FnMut(&HilbertSpec) -> Result<ModelParts> + 'a>;

/// Copies `rho` on `from` into the larger `to` (same frames), leaving the new levels empty.
pub fn pad_state(rho: &CMatrix, from: &HilbertSpec, to: &HilbertSpec) -> Result<CMatrix> {
    let (fd, td) = (from.dims(), to.dims());
    if fd.len() != td.len() || fd.iter().zip(td).any(|(a, b)| a > b) || rho.nrows() != from.total() {
        return Err(Error::DimensionMismatch {
            expected: to.total(),
            found: rho.nrows(),
        });
    }
    let map: Vec<usize> = (0..from.total())
        .map(|mut i| {
            let mut levels = vec![0; fd.len()];
            for s in (0..fd.len()).rev() {
                levels[s] = i % fd[s];
                i /= fd[s];
            }
            levels.iter().zip(td).fold(0, |acc, (&l, &d)| acc * d + l)
        })
        .collect();
    let mut out = CMatrix::zeros(to.total(), to.total());
    for (j, &mj) in map.iter().enumerate() {
        for (i, &mi) in map.iter().enumerate() {
            out[(mi, mj)] = rho[(i, j)];
        }
    }
    Ok(out)
}

/// Density-matrix integrator. In growing mode a slot whose top two levels
/// exceed the truncation threshold at a sample time gains `max(2, d/4)`
/// levels: the state is padded, the model rebuilt and integration resumes
/// from that sample.
struct Integrator<'a> {
    build: Option<Builder<'a>>,
    max_dim: usize,
    cfg: EvolutionConfig,
    spec: HilbertSpec,
    prop: Propagator,
    rho: CMatrix,
    names: Vec<String>,
    steps: (usize, usize),
    max_trace_error: f64,
    period: Option<f64>,
}

impl<'a> Integrator<'a> {
    fn fixed(
        rho0: &DensityMatrix,
        h: &TimeDependentHamiltonian,
        collapse: &[Operator],
        cfg: &EvolutionConfig,
    ) -> Result<Self> {
        if rho0.spec() != h.spec() {
            return Err(Error::DimensionMismatch {
                expected: h.spec().total(),
                found: rho0.dim(),
            });
        }
        Ok(Integrator {
            build: None,
            max_dim: 0,
            prop: Propagator::new(h, collapse, &cfg.ops(), cfg)?,
            spec: h.spec().clone(),
            rho: rho0.matrix().clone(),
            names: cfg.names(),
            cfg: cfg.clone(),
            steps: (0, 0),
            max_trace_error: 0.0,
            period: drive_period(h),
        })
    }

    fn growing(
        rho0: &DensityMatrix,
        max_dim: usize,
        cfg: &EvolutionConfig,
        mut build: impl FnMut(&HilbertSpec) -> Result<ModelParts> + 'a,
    ) -> Result<Self> {
        let spec = rho0.spec().clone();
        let parts = build(&spec)?;
        let mut cfg = cfg.clone().strict_truncation(true);
        cfg.observables = parts.observables;
        let mut me = Integrator::fixed(rho0, &parts.h, &parts.collapse, &cfg)?;
        me.build = Some(Box::new(build));
        me.max_dim = max_dim;
        Ok(me)
    }

    fn grow(&mut self, slot: usize, population: f64, threshold: f64) -> Result<()> {
        let d = self.spec.dims()[slot];
        let Some(build) = self.build.as_mut().filter(|_| d < self.max_dim) else {
            return Err(Error::Truncation {
                slot,
                population,
                threshold,
            });
        };
        let next = (d + (d / 4).max(2)).min(self.max_dim);
        info!(
            "raising slot {slot} from {d} to {next} levels at t = {:.4} (top population {population:e})",
            self.prop.time()
        );
        let mut dims = self.spec.dims().to_vec();
        dims[slot] = next;
        let spec = self.spec.with_dims(dims)?;
        let parts = build(&spec)?;
        let names: Vec<String> = parts.observables.iter().map(|(n, _)| n.clone()).collect();
        if names != self.names {
            return Err(Error::Domain("rebuilt model changed its observables".into()));
        }
        self.cfg.observables = parts.observables;
        let mut prop = Propagator::new(&parts.h, &parts.collapse, &self.cfg.ops(), &self.cfg)?;
        prop.set_step_hint(self.prop.step_hint());
        let old = std::mem::replace(&mut self.prop, prop);
        self.steps.0 += old.health.steps_accepted;
        self.steps.1 += old.health.steps_rejected;
        self.max_trace_error = self.max_trace_error.max(old.health.max_trace_error);
        self.rho = pad_state(&self.rho, &self.spec, &spec)?;
        self.spec = spec;
        Ok(())
    }

    /// As [`Propagator::run`], growing truncations on the way if allowed.
    fn run<F>(&mut self, t0: f64, t1: f64, dt: f64, mut sample: F) -> Result<f64>
    where
        F: FnMut(f64, &[C64]) -> Control,
    {
        let mut t = t0;
        loop {
            match self
                .prop
                .resume(&mut self.rho, t0, t, t1, dt, |ts, _, vals| sample(ts, vals))
            {
                Err(Error::Truncation {
                    slot,
                    population,
                    threshold,
                }) => {
                    t = self.prop.time();
                    self.grow(slot, population, threshold)?;
                }
                other => return other,
            }
        }
    }

    fn health(&self) -> crate::series::Health {
        let mut h = self.prop.health.clone();
        h.steps_accepted += self.steps.0;
        h.steps_rejected += self.steps.1;
        h.max_trace_error = h.max_trace_error.max(self.max_trace_error);
        h
    }

    fn evolve<F>(mut self, monitor: F) -> Result<(TimeSeries, HilbertSpec)>
    where
        F: FnMut(f64, &[C64]) -> Control,
    {
        let mut monitor = monitor;
        let mut ts = TimeSeries::new(self.names.clone());
        let mut push_err = None;
        let (t0, t1, dt) = (self.cfg.t_start, self.cfg.t_end, self.cfg.sample_dt);
        self.run(t0, t1, dt, |t, vals| {
            if let Err(e) = ts.push(t, vals) {
                push_err = Some(e);
                return Control::Stop;
            }
            monitor(t, vals)
        })?;
        if let Some(e) = push_err {
            return Err(e);
        }
        ts.health = self.health();
        finish(&mut ts, self.rho, &self.spec, &self.cfg)?;
        debug!(
            "evolve on {}: {} accepted / {} rejected steps",
            self.spec, ts.health.steps_accepted, ts.health.steps_rejected
        );
        Ok((ts, self.spec))
    }

    fn steady(mut self, relax_time: f64, tol: f64) -> Result<(SteadyState, HilbertSpec)> {
        if !(relax_time > 0.0) {
            return Err(Error::Domain("relaxation time must be positive".into()));
        }
        let period = self.period.unwrap_or(relax_time);
        let chunk = (relax_time / period).ceil().max(1.0) * period;
        let dt = period / 32.0;
        let mut t = self.cfg.t_start;
        let mut last: Option<Vec<C64>> = None;
        loop {
            if t >= self.cfg.t_end {
                return Err(Error::Integration {
                    t,
                    reason: format!("no steady state within {} us", self.cfg.t_end),
                });
            }
            let mut window: Vec<Vec<C64>> = Vec::new();
            let start_last_period = t + chunk - period;
            let t1 = t + chunk;
            self.run(t, t1, dt, |ts, vals| {
                if ts >= start_last_period - 1e-12 * t1.abs().max(1.0) {
                    window.push(vals.to_vec());
                }
                Control::Continue
            })?;
            t = t1;
            let now = window.last().cloned().unwrap_or_default();
            log::trace!("steady-state chunk ending at t = {t}: {now:?}");
            let converged = match &last {
                Some(prev) => prev.iter().zip(&now).all(|(a, b)| (a - b).norm() < tol),
                None => false,
            };
            last = Some(now);
            if converged {
                // Trapezoid over one period: endpoints share a weight.
                let n = window.len();
                let mut avg = vec![C64::new(0.0, 0.0); self.names.len()];
                for (i, row) in window.iter().enumerate() {
                    let wgt = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
                    for (a, v) in avg.iter_mut().zip(row) {
                        *a += v * wgt;
                    }
                }
                for a in avg.iter_mut() {
                    *a /= (n - 1) as f64;
                }
                let health = self.health();
                debug!(
                    "steady state on {} at t = {t}: {} accepted / {} rejected steps",
                    self.spec, health.steps_accepted, health.steps_rejected
                );
                let state = DensityMatrix::new_unchecked(self.rho, self.spec.clone())?;
                return Ok((
                    SteadyState {
                        rho: state,
                        t,
                        averages: avg,
                        names: self.names,
                        health,
                    },
                    self.spec,
                ));
            }
        }
    }
}

/// Integrates `d rho/dt = -i[H, rho] + sum_j D[L_j] rho` and samples the
/// configured observables.
pub fn evolve(
    rho0: &DensityMatrix,
    h: &TimeDependentHamiltonian,
    collapse: &[Operator],
    cfg: &EvolutionConfig,
) -> Result<TimeSeries> {
    evolve_until(rho0, h, collapse, cfg, |_, _| Control::Continue)
}

/// As [`evolve`], stopping early once `monitor` returns [`Control::Stop`].
pub fn evolve_until<F>(
    rho0: &DensityMatrix,
    h: &TimeDependentHamiltonian,
    collapse: &[Operator],
    cfg: &EvolutionConfig,
    monitor: F,
) -> Result<TimeSeries>
where
    F: FnMut(f64, &[C64]) -> Control,
{
    Ok(Integrator::fixed(rho0, h, collapse, cfg)?.evolve(monitor)?.0)
}

/// As [`evolve_until`] on a model rebuilt by `build`, raising bosonic
/// truncations (up to `max_dim` levels) while the run proceeds. The
/// observables come from `build`; those in `cfg` are ignored. Returns the
/// series and the final Hilbert space.
pub fn evolve_growing<B, F>(
    rho0: &DensityMatrix,
    max_dim: usize,
    cfg: &EvolutionConfig,
    build: B,
    monitor: F,
) -> Result<(TimeSeries, HilbertSpec)>
where
    B: FnMut(&HilbertSpec) -> Result<ModelParts>,
    F: FnMut(f64, &[C64]) -> Control,
{
    Integrator::growing(rho0, max_dim, cfg, build)?.evolve(monitor)
}

/// `sqrt(kappa) a` on `slot`.
pub fn photon_loss(kappa: f64, slot: usize, spec: &HilbertSpec) -> Result<Operator> {
    if kappa < 0.0 {
        return Err(Error::Domain("loss rate must be non-negative".into()));
    }
    Ok(mode_op(slot, spec)? * kappa.sqrt())
}

/// Collapse operator `sqrt(kappa) (sqrt(Ns + 1) d - e^{2 i phi} sqrt(Ns) d^dag)`
/// of a cavity (slot 1 of `spec`) driven by broadband squeezed vacuum.
///
/// The steady cavity state is a squeezed vacuum with `<d d> = e^{2 i phi} M`;
/// at `phi = 0` the quadrature `i(d^dag - d)` is the squeezed one.
pub fn broadband_squeezed_dissipators(ns: f64, phi: f64, kappa: f64, spec: &HilbertSpec) -> Result<Vec<Operator>> {
    if !(ns >= 0.0) || !ns.is_finite() {
        return Err(Error::Domain(format!("squeezed photon number {ns} must be >= 0")));
    }
    if kappa < 0.0 {
        return Err(Error::Domain("loss rate must be non-negative".into()));
    }
    let d = mode_op(CAVITY, spec)?;
    let l = &d * ((ns + 1.0).sqrt()) - &d.dagger() * (C64::new(0.0, 2.0 * phi).exp() * ns.sqrt());
    Ok(vec![l * kappa.sqrt()])
}

/// Single cascaded collapse operator `sqrt(kappa_sqz) b + sqrt(kappa) d`.
pub fn cascaded_dissipators(p: &SystemParams, spec: &HilbertSpec) -> Result<Vec<Operator>> {
    let b = mode_op(DPA, spec)?;
    let d = mode_op(CAVITY, spec)?;
    Ok(vec![&b * p.kappa_sqz.sqrt() + &d * p.kappa.sqrt()])
}

/// Closed-form steady intracavity photon number of the cascaded model for pump `lambda`.
pub fn cascaded_photon_number(lambda: f64, p: &SystemParams) -> Result<f64> {
    let ks = p.kappa_sqz;
    let k = p.kappa;
    if lambda < 0.0 {
        return Err(Error::Domain("pump strength must be non-negative".into()));
    }
    let threshold = dpa_threshold(p);
    if lambda >= threshold {
        return Err(Error::AboveThreshold { lambda, threshold });
    }
    let a = (ks / 2.0).powi(2) - (2.0 * lambda).powi(2);
    let den = a * (a + ks * k / 2.0 + (k / 2.0).powi(2));
    if den <= 0.0 {
        return Err(Error::Singularity("cascaded photon number denominator vanished".into()));
    }
    Ok(2.0 * ks * lambda * lambda * (2.0 * ks + k) / den)
}

/// Pump strength `lambda` giving a steady cavity photon number `ns_target`,
/// by bisection on `[0, kappa_sqz / 4)`.
pub fn dpa_drive_for_target(ns_target: f64, p: &SystemParams) -> Result<f64> {
    if !(ns_target >= 0.0) || !ns_target.is_finite() {
        return Err(Error::Unreachable(format!("photon number {ns_target}")));
    }
    if ns_target == 0.0 {
        return Ok(0.0);
    }
    let threshold = dpa_threshold(p);
    if threshold <= 0.0 || p.kappa < 0.0 {
        return Err(Error::Unreachable("squeezer has no bandwidth".into()));
    }
    let (mut lo, mut hi) = (0.0, threshold);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cascaded_photon_number(mid, p)? < ns_target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Result of a steady-state run.
#[derive(Clone, Debug)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// Time at which the convergence criterion was met.
    pub t: f64,
    /// Observables averaged over the last drive period.
    pub averages: Vec<C64>,
    pub names: Vec<String>,
    pub health: crate::series::Health,
}

impl SteadyState {
    pub fn average(&self, name: &str) -> Result<C64> {
        let i = self
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Domain(format!("no observable named {name:?}")))?;
        Ok(self.averages[i])
    }
}

fn drive_period(h: &TimeDependentHamiltonian) -> Option<f64> {
    let fundamental = h
        .terms()
        .iter()
        .map(|(_, e)| e.frequency())
        .filter(|&f| f > 0.0)
        .fold(f64::INFINITY, f64::min);
    fundamental.is_finite().then(|| TWO_PI / fundamental)
}

/// Evolves until every observable, sampled stroboscopically once per drive
/// period, moves by less than `tol` over an interval of `relax_time`.
/// `cfg.t_end` bounds the search.
pub fn steady_state(
    rho0: &DensityMatrix,
    h: &TimeDependentHamiltonian,
    collapse: &[Operator],
    cfg: &EvolutionConfig,
    relax_time: f64,
    tol: f64,
) -> Result<SteadyState> {
    Ok(Integrator::fixed(rho0, h, collapse, cfg)?.steady(relax_time, tol)?.0)
}

/// As [`steady_state`] with the growing truncations of [`evolve_growing`].
pub fn steady_state_growing<B>(
    rho0: &DensityMatrix,
    max_dim: usize,
    cfg: &EvolutionConfig,
    build: B,
    relax_time: f64,
    tol: f64,
) -> Result<(SteadyState, HilbertSpec)>
where
    B: FnMut(&HilbertSpec) -> Result<ModelParts>,
{
    Integrator::growing(rho0, max_dim, cfg, build)?.steady(relax_time, tol)
}

/// Exponential short-time lifetime fit `<sigma_z^R>(t) = exp(-2 t / T_eff)`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct LifetimeFit {
    pub t_eff: f64,
    pub std_err: f64,
    /// Root-mean-square residual of `log <sigma_z>`.
    pub residual_rms: f64,
    pub n_points: usize,
    pub window: f64,
}

/// Least-squares fit of `log <sigma_z>` through the origin on `t <= window`.
pub fn effective_lifetime(ts: &TimeSeries, name: &str, window: f64) -> Result<LifetimeFit> {
    let t0 = *ts.times.first().ok_or_else(|| Error::Fit("empty series".into()))?;
    let vals = ts.real(name)?;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut pts = Vec::new();
    for (&t, &v) in ts.times.iter().zip(&vals) {
        if t - t0 > window * (1.0 + 1e-12) {
            break;
        }
        if !(v > 0.0) {
            return Err(Error::Fit(format!("non-positive <sigma_z> = {v} at t = {t}")));
        }
        let x = t - t0;
        let y = v.ln();
        sxx += x * x;
        sxy += x * y;
        pts.push((x, y));
    }
    if pts.len() < 3 || sxx == 0.0 {
        return Err(Error::Fit("fewer than three points in the lifetime window".into()));
    }
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Err(Error::Fit("no decay in the lifetime window".into()));
    }
    let ss: f64 = pts.iter().map(|(x, y)| (y - slope * x).powi(2)).sum();
    let n = pts.len();
    let se = (ss / (n - 1) as f64 / sxx).sqrt();
    Ok(LifetimeFit {
        t_eff: -2.0 / slope,
        std_err: 2.0 * se / (slope * slope),
        residual_rms: (ss / n as f64).sqrt(),
        n_points: n,
        window,
    })
}

/// Default short-time window: from the start until `<sigma_z>` first drops
/// to `level` (0.8 by default), or the whole series if it never does.
pub fn lifetime_window(ts: &TimeSeries, name: &str, level: f64) -> Result<f64> {
    let vals = ts.real(name)?;
    let t0 = *ts.times.first().ok_or_else(|| Error::Fit("empty series".into()))?;
    let end = ts
        .times
        .iter()
        .zip(&vals)
        .find(|(_, &v)| v <= level)
        .map(|(&t, _)| t)
        .unwrap_or(*ts.times.last().unwrap());
    Ok(end - t0)
}

/// Squeezing source feeding the cavity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SqueezeSource {
    /// Infinite-bandwidth squeezed vacuum.
    Broadband,
    /// Degenerate parametric amplifier of linewidth `kappa_sqz` cascaded into the cavity.
    Cascaded,
}

/// Settings for the lifetime and steady-state drivers.
#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Initial `[qubit, cavity]` or `[qubit, cavity, dpa]` dimensions.
    pub dims: Vec<usize>,
    pub max_dim: usize,
    pub t_max: f64,
    pub sample_dt: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Top-two-level population that triggers a truncation raise.
    pub truncation_threshold: f64,
    /// Stop the lifetime run once `<sigma_z>` reaches this level.
    pub window_level: f64,
    pub include_counter_rotating: bool,
    /// Bosonic slots use a squeezed Fock basis whose squeeze parameter is this
    /// fraction of the linear steady state's (0 keeps the plain Fock basis).
    pub frame_fraction: f64,
}

impl RunOptions {
    pub fn broadband() -> Self {
        RunOptions {
            dims: vec![2, 10],
            max_dim: 120,
            t_max: 1.0,
            sample_dt: 0.002,
            rtol: 1e-7,
            atol: 1e-10,
            truncation_threshold: 1e-6,
            window_level: 0.8,
            include_counter_rotating: true,
            frame_fraction: 0.5,
        }
    }

    pub fn cascaded() -> Self {
        RunOptions {
            dims: vec![2, 10, 14],
            ..RunOptions::broadband()
        }
    }

    /// Cascaded steady-photon runs: `(2, 8, 12)` start, full-strength frames and
    /// a looser truncation trigger, since the steady photon number is
    /// insensitive to the far counter-rotating tail of the cavity distribution.
    pub fn steady_photons() -> Self {
        RunOptions {
            dims: vec![2, 8, 12],
            t_max: 20.0,
            truncation_threshold: 1e-4,
            frame_fraction: 1.0,
            ..RunOptions::cascaded()
        }
    }

    /// Starting Hilbert space for `src`, with frames from [`squeeze_frames`].
    pub fn start_spec(&self, p: &SystemParams, src: SqueezeSource, ns: f64, phi: f64) -> Result<HilbertSpec> {
        let frames = squeeze_frames(p, src, ns, phi, self.frame_fraction)?;
        if frames.len() + 1 != self.dims.len() {
            return Err(Error::DimensionMismatch {
                expected: frames.len() + 1,
                found: self.dims.len(),
            });
        }
        let mut spec = HilbertSpec::new(self.dims.clone())?;
        for (k, f) in frames.into_iter().enumerate() {
            spec = spec.with_frame(k + 1, f)?;
        }
        Ok(spec)
    }

    fn config(&self) -> EvolutionConfig {
        let mut cfg = EvolutionConfig::new(self.t_max, self.sample_dt).tolerances(self.rtol, self.atol);
        cfg.truncation_threshold = self.truncation_threshold;
        cfg
    }

    pub fn for_source(src: SqueezeSource) -> Self {
        match src {
            SqueezeSource::Broadband => Self::broadband(),
            SqueezeSource::Cascaded => Self::cascaded(),
        }
    }
}

/// Squeeze frames for the cavity (and DPA) slots: `fraction` of the squeeze
/// of each mode's steady state in the qubit-free linear model. `None` where
/// the resulting squeeze is negligible.
pub fn squeeze_frames(
    p: &SystemParams,
    src: SqueezeSource,
    ns: f64,
    phi: f64,
    fraction: f64,
) -> Result<Vec<Option<SqueezeFrame>>> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::Domain(format!("frame fraction {fraction} outside [0, 1]")));
    }
    let (model, modes) = match src {
        SqueezeSource::Broadband => (gaussian::broadband_linear_model(p, ns, phi), 1),
        SqueezeSource::Cascaded => (
            gaussian::cascaded_linear_model(p, dpa_drive_for_target(ns, p)?, phi)?,
            2,
        ),
    };
    if fraction == 0.0 || ns == 0.0 {
        return Ok(vec![None; modes]);
    }
    let moments = model.steady_moments()?;
    (0..modes)
        .map(|k| {
            let f = moments.shape(k)?.frame;
            let r = fraction * f.r;
            Ok((r > 1e-3).then_some(SqueezeFrame::new(r, f.theta)?))
        })
        .collect()
}

/// Hamiltonian and collapse operators of one squeezing model.
pub fn squeezed_model(
    p: &SystemParams,
    spec: &HilbertSpec,
    src: SqueezeSource,
    ns: f64,
    phi: f64,
    include_counter_rotating: bool,
) -> Result<(TimeDependentHamiltonian, Vec<Operator>)> {
    match src {
        SqueezeSource::Broadband => Ok((
            h_rabi_frame(p, spec, include_counter_rotating)?,
            broadband_squeezed_dissipators(ns, phi, p.kappa, spec)?,
        )),
        SqueezeSource::Cascaded => {
            let lambda = dpa_drive_for_target(ns, p)?;
            Ok((
                h_cascaded(p, spec, lambda, phi, include_counter_rotating)?,
                cascaded_dissipators(p, spec)?,
            ))
        }
    }
}

/// `|e>_q |0>_c (|0>_dpa)`, with each bosonic vacuum written in its slot's frame.
pub fn excited_vacuum(spec: &HilbertSpec) -> Result<DensityMatrix> {
    let mut psi = DVector::from_element(1, C64::new(1.0, 0.0));
    for (slot, &d) in spec.dims().iter().enumerate() {
        let v = match spec.frame(slot) {
            Some(f) => f.vacuum(d),
            None => {
                let mut v = DVector::zeros(d);
                v[0] = C64::new(1.0, 0.0);
                v
            }
        };
        psi = psi.kronecker(&v);
    }
    DensityMatrix::pure(&psi, spec)
}

/// A lifetime simulation and its fit.
#[derive(Clone, Debug)]
pub struct LifetimeRun {
    pub fit: LifetimeFit,
    pub spec: HilbertSpec,
    pub series: TimeSeries,
    pub ns: f64,
}

/// Short-time decay of `<sigma_z^R>` from `|e>|0>` with squeezed input of
/// `ns` photons at angle `phi`, fitted over the default window.
pub fn simulate_lifetime(
    p: &SystemParams,
    ns: f64,
    phi: f64,
    src: SqueezeSource,
    opts: &RunOptions,
) -> Result<LifetimeRun> {
    let level = opts.window_level;
    let spec = opts.start_spec(p, src, ns, phi)?;
    let cfg = opts.config();
    let build = |spec: &HilbertSpec| {
        let (h, collapse) = squeezed_model(p, spec, src, ns, phi, opts.include_counter_rotating)?;
        let d = mode_op(CAVITY, spec)?;
        Ok(ModelParts {
            h,
            collapse,
            observables: vec![("sz".into(), qubit_op(Pauli::Z, spec)?), ("n".into(), &d.dagger() * &d)],
        })
    };
    let (series, spec) = evolve_growing(&excited_vacuum(&spec)?, opts.max_dim, &cfg, build, |_, v| {
        if v[0].re <= level {
            Control::Stop
        } else {
            Control::Continue
        }
    })?;
    let window = lifetime_window(&series, "sz", level)?;
    let fit = effective_lifetime(&series, "sz", window)?;
    Ok(LifetimeRun { fit, spec, series, ns })
}

/// Cavity mean field `<d>(t)` with the qubit frozen in `|e>` (`sigma_z = 1`)
/// or `|g>` (`sigma_z = -1`), the cavity starting in vacuum and no
/// squeezing, under the longitudinal Rabi-frame Hamiltonian. Observables
/// `d` and `sz` are sampled on `cfg`'s grid.
pub fn longitudinal_mean_field(
    p: &SystemParams,
    sigma_z: f64,
    cavity_dim: usize,
    cfg: &EvolutionConfig,
) -> Result<TimeSeries> {
    let level = if sigma_z == 1.0 {
        0
    } else if sigma_z == -1.0 {
        1
    } else {
        return Err(Error::Domain(format!("sigma_z = {sigma_z} must be +1 or -1")));
    };
    let spec = HilbertSpec::new(vec![2, cavity_dim])?;
    let h = h_longitudinal(p, &spec)?;
    let collapse = vec![photon_loss(p.kappa, CAVITY, &spec)?];
    let mut cfg = cfg.clone();
    cfg.observables = vec![
        ("d".into(), mode_op(CAVITY, &spec)?),
        ("sz".into(), qubit_op(Pauli::Z, &spec)?),
    ];
    evolve(&DensityMatrix::basis(&spec, &[level, 0])?, &h, &collapse, &cfg)
}

/// Ramsey trace under the QND coupling alone: qubit in `(|e> + |g>)/sqrt 2`,
/// cavity in vacuum with loss `kappa`, no squeezing. Observable `sx`.
pub fn ramsey_qnd(p: &SystemParams, cavity_dim: usize, cfg: &EvolutionConfig) -> Result<TimeSeries> {
    let spec = HilbertSpec::new(vec![2, cavity_dim])?;
    let h = TimeDependentHamiltonian::new(spec.clone()).with_term(h_qnd(p, &spec)?, Envelope::one())?;
    let collapse = vec![photon_loss(p.kappa, CAVITY, &spec)?];
    let mut psi = DVector::zeros(spec.total());
    let amp = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    psi[spec.index_of(&[0, 0])?] = amp;
    psi[spec.index_of(&[1, 0])?] = amp;
    let mut cfg = cfg.clone();
    cfg.observables = vec![("sx".into(), qubit_op(Pauli::X, &spec)?)];
    evolve(&DensityMatrix::pure(&psi, &spec)?, &h, &collapse, &cfg)
}

/// Steady state of the qubit-free cascade (cavity slot 0, DPA slot 1) on
/// `spec`, growing truncations as needed.
pub fn cascade_linear_steady(
    p: &SystemParams,
    spec: &HilbertSpec,
    lambda: f64,
    phi: f64,
    opts: &RunOptions,
    tol: f64,
) -> Result<(SteadyState, HilbertSpec)> {
    let mut cfg = opts.config();
    cfg.check_positivity = false;
    let build = |spec: &HilbertSpec| {
        let (d, b) = (mode_op(0, spec)?, mode_op(1, spec)?);
        let mut h = TimeDependentHamiltonian::zero(spec);
        h.push(cascade_coupling(p, &d, &b, lambda, phi), Envelope::one())?;
        Ok(ModelParts {
            h,
            collapse: vec![&b * p.kappa_sqz.sqrt() + &d * p.kappa.sqrt()],
            observables: vec![("n".into(), &d.dagger() * &d)],
        })
    };
    let rho0 = DensityMatrix::basis(spec, &[0, 0])?;
    steady_state_growing(&rho0, opts.max_dim, &cfg, build, 1.0 / p.kappa, tol)
}

/// `D(alpha) rho D(alpha)^dag` with `D(alpha) = exp(alpha a^dag - alpha^* a)`
/// for the (frame) lowering operator `a` of `slot`.
pub fn displace(rho: &DensityMatrix, slot: usize, alpha: C64) -> Result<DensityMatrix> {
    let spec = rho.spec();
    let a = mode_op(slot, spec)?;
    let gen = &(a.dagger() * alpha) - &(&a * alpha.conj());
    let d = gen.into_matrix().exp();
    let m = &d * rho.matrix() * d.adjoint();
    DensityMatrix::new_unchecked(m, spec.clone())
}

/// Steady intracavity photon number of the cascaded model, period-averaged,
/// with the full Rabi-frame Hamiltonian. The run starts from the qubit in
/// `|e>` times the steady state of the qubit-free cascade, with the cavity
/// displaced by the qubit-conditioned mean field, so only the remaining
/// qubit-induced corrections have to relax.
pub fn cascaded_steady_photons(
    p: &SystemParams,
    ns: f64,
    phi: f64,
    opts: &RunOptions,
    tol: f64,
) -> Result<(f64, HilbertSpec)> {
    let src = SqueezeSource::Cascaded;
    let start = opts.start_spec(p, src, ns, phi)?;
    let lambda = dpa_drive_for_target(ns, p)?;
    let modes = HilbertSpec::new(start.dims()[1..].to_vec())?
        .with_frame(0, start.frame(CAVITY))?
        .with_frame(1, start.frame(DPA))?;
    let (linear, _) = cascade_linear_steady(p, &modes, lambda, phi, opts, 0.1 * tol)?;
    let alpha = if opts.include_counter_rotating {
        crate::homodyne::mean_cavity_field(0.0, p, 1.0, None)?
    } else {
        C64::new(0.0, -2.0 * p.chi * p.a_bar0 / p.kappa)
    };
    let linear = displace(&linear.rho, 0, alpha)?;
    let qubit = DensityMatrix::basis(&HilbertSpec::new(vec![2])?, &[0])?;
    let rho0 = DensityMatrix::product(&[&qubit, &linear])?;
    let mut cfg = opts.config();
    cfg.check_positivity = false;
    let build = |spec: &HilbertSpec| {
        let (h, collapse) = squeezed_model(p, spec, src, ns, phi, opts.include_counter_rotating)?;
        let d = mode_op(CAVITY, spec)?;
        Ok(ModelParts {
            h,
            collapse,
            observables: vec![("n".into(), &d.dagger() * &d)],
        })
    };
    let (ss, spec) = steady_state_growing(&rho0, opts.max_dim, &cfg, build, 1.0 / p.kappa, tol)?;
    Ok((ss.average("n")?.re, spec))
}

#[cfg(test)]
mod tests;
