//! Adaptive Dormand-Prince 5(4) integration of the Lindblad equation.
//!
//! The right-hand side is assembled as `K + K^dagger` with
//! `K = -i H_eff rho + (1/2) sum_j L_j rho L_j^dagger` and
//! `H_eff = H - (i/2) sum_j L_j^dagger L_j`, so every evaluation is exactly
//! Hermitian and round-off cannot seed an anti-Hermitian mode.

use log::warn;

use super::sparse::{
    add_mul_right_adjoint, add_mul_right_adjoint_vals, hermitize, mul_left, trace_product, Csr, Pattern,
};
use super::EvolutionConfig;
use crate::error::{Error, Result};
use crate::hamiltonians::{Envelope, TimeDependentHamiltonian};
use crate::operators::{CMatrix, HilbertSpec, Operator, C64};
use crate::params::TWO_PI;
use crate::series::Health;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// What a sampling callback asks the integrator to do next.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

struct Generator {
    pattern: Pattern,
    constant: Vec<C64>,
    varying: Vec<(Vec<C64>, Envelope)>,
    collapse: Vec<Csr>,
    vals: Vec<C64>,
}

impl Generator {
    fn new(h: &TimeDependentHamiltonian, collapse: &[Operator]) -> Self {
        let n = h.spec().total();
        let minus_i = C64::new(0.0, -1.0);
        let mut damping = CMatrix::zeros(n, n);
        for l in collapse {
            damping += l.matrix().adjoint() * l.matrix();
        }
        damping *= C64::new(-0.5, 0.0);
        let mut constant_m = damping;
        let mut varying_m = Vec::new();
        for (op, env) in h.terms() {
            match env {
                Envelope::Constant(c) => constant_m += op.matrix() * (minus_i * c),
                _ => varying_m.push((op.matrix() * minus_i, env.clone())),
            }
        }
        let mut mats: Vec<&CMatrix> = vec![&constant_m];
        mats.extend(varying_m.iter().map(|(m, _)| m));
        let pattern = Pattern::union(n, &mats);
        let constant = pattern.gather(&constant_m);
        let varying = varying_m.iter().map(|(m, e)| (pattern.gather(m), e.clone())).collect();
        let collapse = collapse.iter().map(|l| Csr::from_dense(l.matrix())).collect();
        let vals = constant.clone();
        Generator {
            pattern,
            constant,
            varying,
            collapse,
            vals,
        }
    }

    fn rhs(&mut self, t: f64, rho: &CMatrix, out: &mut CMatrix, scratch: &mut CMatrix) {
        self.vals.copy_from_slice(&self.constant);
        for (v, env) in &self.varying {
            let c = env.at(t);
            for (dst, src) in self.vals.iter_mut().zip(v) {
                *dst += c * src;
            }
        }
        out.fill(ZERO);
        add_mul_right_adjoint_vals(&self.pattern, &self.vals, rho, 1.0, out);
        for l in &self.collapse {
            mul_left(&l.pattern, &l.values, rho, scratch);
            add_mul_right_adjoint(scratch, l, 0.5, out);
        }
        hermitize(out);
    }
}

/// Slot masks used for the truncation check: for each watched slot, the
/// basis indices whose level is one of the top two.
fn top_level_masks(spec: &HilbertSpec, slots: &[usize]) -> Vec<(usize, Vec<usize>)> {
    slots
        .iter()
        .map(|&s| {
            let d = spec.dims()[s];
            let idx = (0..spec.total()).filter(|&i| spec.level(i, s) + 2 >= d).collect();
            (s, idx)
        })
        .collect()
}

pub(crate) struct Propagator {
    gen: Generator,
    observables: Vec<Csr>,
    masks: Vec<(usize, Vec<usize>)>,
    spec: HilbertSpec,
    max_step: f64,
    cfg: EvolutionConfig,
    k: [CMatrix; 7],
    stage: CMatrix,
    scratch: CMatrix,
    h_next: Option<f64>,
    t_now: f64,
    pub health: Health,
}

// Dormand-Prince tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [&[f64]; 7] = [
    &[],
    &[0.2],
    &[3.0 / 40.0, 9.0 / 40.0],
    &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
    &[
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
    ],
    &[
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

impl Propagator {
    pub fn new(
        h: &TimeDependentHamiltonian,
        collapse: &[Operator],
        observables: &[Operator],
        cfg: &EvolutionConfig,
    ) -> Result<Self> {
        let spec = h.spec().clone();
        for op in collapse.iter().chain(observables) {
            if op.spec() != &spec {
                return Err(Error::DimensionMismatch {
                    expected: spec.total(),
                    found: op.dim(),
                });
            }
        }
        let w = h.max_frequency();
        let mut max_step = cfg.max_step.unwrap_or(f64::INFINITY);
        if w > 0.0 {
            max_step = max_step.min(TWO_PI / w / 10.0);
        }
        let n = spec.total();
        let slots = cfg
            .truncation_slots
            .clone()
            .unwrap_or_else(|| (0..spec.n_slots()).filter(|&s| spec.dims()[s] > 2).collect());
        let masks = top_level_masks(&spec, &slots);
        let z = || CMatrix::zeros(n, n);
        Ok(Propagator {
            gen: Generator::new(h, collapse),
            observables: observables.iter().map(|o| Csr::from_dense(o.matrix())).collect(),
            masks,
            max_step,
            cfg: cfg.clone(),
            k: [z(), z(), z(), z(), z(), z(), z()],
            stage: z(),
            scratch: z(),
            h_next: None,
            t_now: f64::NAN,
            health: Health {
                truncation_ok: true,
                max_top_population: vec![0.0; spec.n_slots()],
                ..Health::default()
            },
            spec,
        })
    }

    #[cfg(test)]
    pub fn rhs_probe(&mut self, t: f64, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
        self.gen.rhs(t, rho, &mut out, &mut self.scratch);
        out
    }

    /// Time of the last accepted step or health check.
    pub fn time(&self) -> f64 {
        self.t_now
    }

    /// Step size the next run starts with.
    pub fn step_hint(&self) -> Option<f64> {
        self.h_next
    }

    pub fn set_step_hint(&mut self, h: Option<f64>) {
        self.h_next = h;
    }

    #[cfg(test)]
    pub fn max_step(&self) -> f64 {
        self.max_step
    }

    pub fn expectations(&self, rho: &CMatrix) -> Vec<C64> {
        self.observables.iter().map(|o| trace_product(o, rho)).collect()
    }

    fn check_health(&mut self, t: f64, rho: &CMatrix) -> Result<()> {
        let tr = rho.trace();
        let err = (tr - C64::new(1.0, 0.0)).norm();
        self.health.max_trace_error = self.health.max_trace_error.max(err);
        if !err.is_finite() || err > self.cfg.trace_tol {
            return Err(Error::Integration {
                t,
                reason: format!("trace drifted to {tr}"),
            });
        }
        for (slot, idx) in &self.masks {
            let pop: f64 = idx.iter().map(|&i| rho[(i, i)].re).sum();
            let m = &mut self.health.max_top_population[*slot];
            *m = m.max(pop);
            if pop > self.cfg.truncation_threshold {
                if self.cfg.truncation_error {
                    return Err(Error::Truncation {
                        slot: *slot,
                        population: pop,
                        threshold: self.cfg.truncation_threshold,
                    });
                }
                if self.health.truncation_ok {
                    warn!(
                        "truncation: slot {slot} of {} holds {pop:e} in its top levels at t = {t}",
                        self.spec
                    );
                }
                self.health.truncation_ok = false;
            }
        }
        Ok(())
    }

    /// Hairer's RMS norm of the embedded error estimate `h sum_j e_j k_j`.
    fn error_norm(&self, y: &CMatrix, h: f64) -> f64 {
        let (atol, rtol) = (self.cfg.atol, self.cfg.rtol);
        let ynew = self.stage.as_slice();
        let ks: Vec<(&[C64], f64)> = self
            .k
            .iter()
            .zip(E)
            .filter(|(_, e)| *e != 0.0)
            .map(|(k, e)| (k.as_slice(), h * e))
            .collect();
        let mut s = 0.0;
        for (i, (a, b)) in y.as_slice().iter().zip(ynew).enumerate() {
            let mut err = ZERO;
            for (k, e) in &ks {
                err += k[i] * *e;
            }
            let sc = atol + rtol * a.norm().max(b.norm());
            s += err.norm_sqr() / (sc * sc);
        }
        (s / y.len() as f64).sqrt()
    }

    /// Integrates `rho` from `t_start` to `t1`, calling `sample` on the grid
    /// `origin + k dt` (and at `t1`). `t_start` itself is sampled only if it
    /// lies on the grid. Health is checked after every accepted step. Returns
    /// the final time reached, which is earlier than `t1` only if `sample`
    /// returned `Stop`.
    pub fn resume<F>(
        &mut self,
        rho: &mut CMatrix,
        origin: f64,
        t_start: f64,
        t1: f64,
        dt: f64,
        mut sample: F,
    ) -> Result<f64>
    where
        F: FnMut(f64, &CMatrix, &[C64]) -> Control,
    {
        let t0 = origin;
        if !(t1 >= t_start) || !(t_start >= t0) || !(dt > 0.0) {
            return Err(Error::Domain(format!("bad span [{t_start}, {t1}] / sample step {dt}")));
        }
        let n_samples = ((t1 - t0) / dt - 1e-9).ceil().max(1.0) as usize;
        let sample_time = |i: usize| if i >= n_samples { t1 } else { t0 + i as f64 * dt };
        let tiny = 1e-9 * dt;
        let mut next = (((t_start - t0) / dt) - 1e-6).ceil().max(0.0) as usize;
        self.t_now = t_start;
        self.check_health(t_start, rho)?;
        if (sample_time(next) - t_start).abs() <= tiny {
            let stop = sample(t_start, rho, &self.expectations(rho)) == Control::Stop;
            if stop || t1 - t_start <= tiny {
                return Ok(t_start);
            }
            next += 1;
        }
        let mut t = t_start;
        let mut h = self
            .h_next
            .unwrap_or_else(|| self.cfg.initial_step.unwrap_or(self.max_step * 1e-2))
            .min(self.max_step);
        let mut fresh = true;
        let mut steps = 0usize;
        let mut err_old = 1e-4f64;
        let mut rejected = false;
        loop {
            let target = sample_time(next);
            let clamped = (target - t) <= h * (1.0 + 1e-12);
            let step = if clamped { target - t } else { h };
            if fresh {
                self.gen.rhs(t, rho, &mut self.k[0], &mut self.scratch);
                fresh = false;
            }
            for s in 1..7 {
                stage_combo(&mut self.stage, rho, step, A[s], &self.k);
                self.gen
                    .rhs(t + C[s] * step, &self.stage, &mut self.k[s], &mut self.scratch);
            }
            // stage now holds the 5th-order solution (row 7 of A equals b).
            let err = self.error_norm(rho, step);
            steps += 1;
            if steps > self.cfg.max_steps {
                return Err(Error::Integration {
                    t,
                    reason: format!("exceeded {} steps", self.cfg.max_steps),
                });
            }
            if !err.is_finite() {
                return Err(Error::Integration {
                    t,
                    reason: "non-finite error estimate".into(),
                });
            }
            if err <= 1.0 {
                self.health.steps_accepted += 1;
                std::mem::swap(rho, &mut self.stage);
                self.k.swap(0, 6);
                t = if clamped { target } else { t + step };
                self.t_now = t;
                // PI control with Hairer's stabilisation exponents.
                let fac_max = if rejected { 1.0 } else { 5.0 };
                let fac = if err == 0.0 {
                    fac_max
                } else {
                    (0.9 * err.powf(-0.17) * err_old.powf(0.04)).clamp(0.2, fac_max)
                };
                err_old = err.max(1e-4);
                rejected = false;
                if !clamped || step >= h * 0.5 {
                    h = (step * fac).min(self.max_step);
                }
                self.h_next = Some(h);
                self.check_health(t, rho)?;
                if clamped {
                    let vals = self.expectations(rho);
                    if sample(t, rho, &vals) == Control::Stop {
                        self.h_next = Some(h);
                        return Ok(t);
                    }
                    if next >= n_samples {
                        self.h_next = Some(h);
                        return Ok(t);
                    }
                    next += 1;
                }
            } else {
                self.health.steps_rejected += 1;
                rejected = true;
                h = step * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::Integration {
                        t,
                        reason: "step size underflow".into(),
                    });
                }
            }
        }
    }
}

/// `out = y + h sum_j a_j k_j` in a single pass.
fn stage_combo(out: &mut CMatrix, y: &CMatrix, h: f64, a: &[f64], k: &[CMatrix; 7]) {
    let ks: Vec<(&[C64], f64)> = a
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(j, c)| (k[j].as_slice(), h * c))
        .collect();
    let y = y.as_slice();
    for (i, o) in out.as_mut_slice().iter_mut().enumerate() {
        let mut v = y[i];
        for (kj, c) in &ks {
            v += kj[i] * *c;
        }
        *o = v;
    }
}
