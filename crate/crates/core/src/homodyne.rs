//! Closed-form homodyne readout: mean output field, integrated signal and
//! noise of the information quadrature, SNR and its squeezing optimum, the
//! phenomenological dephasing/measurement-rate models and the thermal-photon
//! bound.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erf, erf_inv};

use crate::error::{Error, Result};
use crate::operators::C64;
use crate::params::{linear_to_db, EfficiencyParams, SqueezeSpec, SystemParams};
use crate::series::TimeSeries;
use crate::special::{bessel_cutoff, bessel_j};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Default Jacobi-Anger truncation: `max(5, first k with |J_k(beta_z)| < 1e-16)`.
pub fn default_bessel_order(beta_z: f64) -> usize {
    bessel_cutoff(beta_z, 1e-16, 0).max(5)
}

fn beta_z(p: &SystemParams, sigma_z: f64) -> f64 {
    p.chi / p.omega_r * sigma_z
}

/// `e^{-kappa t/2} D(t)` from the truncated Jacobi-Anger series.
fn damped_d_integral(t: f64, p: &SystemParams, bz: f64, k_max: usize) -> C64 {
    let (kappa, om) = (p.kappa, p.omega_r);
    let term = |m: i64| C64::new(0.0, m as f64 * om * t).exp() / C64::new(kappa, 2.0 * m as f64 * om);
    let k_max = k_max as i64;
    let sum: C64 = (-k_max..=k_max)
        .map(|k| bessel_j(k as i32, bz) * (term(k - 2) + term(k) * 2.0 + term(k + 2)))
        .sum();
    sum * 0.5
}

/// Steady (periodic) mean output field `<d_out>(t)` for a qubit frozen at
/// `sigma_z`, summing Bessel orders `|k| <= k_max` (default from
/// [`default_bessel_order`]).
pub fn mean_output_field(t: f64, p: &SystemParams, sigma_z: f64, k_max: Option<usize>) -> Result<C64> {
    let bz = beta_z(p, sigma_z);
    let k_max = k_max.unwrap_or_else(|| default_bessel_order(bz));
    if k_max < 1 {
        return Err(Error::Domain("k_max must be >= 1".into()));
    }
    let pre = I * 2.0 * p.kappa.sqrt() * bz * p.omega_r * p.a_bar0;
    Ok(pre * C64::new(0.0, -bz * (p.omega_r * t).sin()).exp() * damped_d_integral(t, p, bz, k_max))
}

/// Steady mean intracavity field `<d>(t) = -<d_out>(t) / sqrt(kappa)`.
pub fn mean_cavity_field(t: f64, p: &SystemParams, sigma_z: f64, k_max: Option<usize>) -> Result<C64> {
    if p.kappa <= 0.0 {
        return Err(Error::Singularity("input-output relation needs kappa > 0".into()));
    }
    Ok(-mean_output_field(t, p, sigma_z, k_max)? / p.kappa.sqrt())
}

/// Mean intracavity field for a cavity starting in vacuum at `t = 0`: the
/// periodic solution plus the homogeneous term that cancels it initially.
pub fn mean_cavity_field_from_vacuum(t: f64, p: &SystemParams, sigma_z: f64, k_max: Option<usize>) -> Result<C64> {
    let bz = beta_z(p, sigma_z);
    let d0 = mean_cavity_field(0.0, p, sigma_z, k_max)?;
    let homogeneous = C64::new(-0.5 * p.kappa * t, -bz * (p.omega_r * t).sin()).exp();
    Ok(mean_cavity_field(t, p, sigma_z, k_max)? - d0 * homogeneous)
}

/// Right-hand side of the mean Langevin equation
/// `d' = -i chi a_bar0 (1 + cos 2 Omega t) sigma_z - i chi cos(Omega t) sigma_z d - kappa d / 2`.
fn langevin_rhs(p: &SystemParams, sigma_z: f64, t: f64, d: C64) -> C64 {
    let om = p.omega_r;
    -I * p.chi * p.a_bar0 * (1.0 + (2.0 * om * t).cos()) * sigma_z
        - I * p.chi * (om * t).cos() * sigma_z * d
        - d * (0.5 * p.kappa)
}

/// Integrates the noise-free Langevin equation for `<d>` from `d(t0) = d0`
/// with classical RK4 and samples `d` and `d_out = -sqrt(kappa) d` every
/// `dt` up to `t1`.
pub fn langevin_mean_trajectory_from(
    p: &SystemParams,
    sigma_z: f64,
    d0: C64,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<TimeSeries> {
    if !(dt > 0.0) || !(t1 >= t0) {
        return Err(Error::Domain(format!("bad time grid [{t0}, {t1}] step {dt}")));
    }
    let period = std::f64::consts::TAU / p.omega_r;
    let fastest = p.kappa.max(2.0 * p.omega_r).max(p.chi);
    let h_max = (period / 400.0).min(0.05 / fastest);
    let n_samples = ((t1 - t0) / dt + 1e-9).floor() as usize;
    let sub = (dt / h_max).ceil().max(1.0) as usize;
    let h = dt / sub as f64;
    let out_scale = -p.kappa.sqrt();
    let mut ts = TimeSeries::new(vec!["d".into(), "d_out".into()]);
    let mut d = d0;
    ts.push(t0, &[d, d * out_scale])?;
    for i in 0..n_samples {
        let ts0 = t0 + i as f64 * dt;
        for j in 0..sub {
            let t = ts0 + j as f64 * h;
            let k1 = langevin_rhs(p, sigma_z, t, d);
            let k2 = langevin_rhs(p, sigma_z, t + 0.5 * h, d + k1 * (0.5 * h));
            let k3 = langevin_rhs(p, sigma_z, t + 0.5 * h, d + k2 * (0.5 * h));
            let k4 = langevin_rhs(p, sigma_z, t + h, d + k3 * h);
            d += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
        if !(d.re.is_finite() && d.im.is_finite()) {
            return Err(Error::Integration {
                t: ts0 + dt,
                reason: "non-finite mean field".into(),
            });
        }
        ts.push(t0 + (i + 1) as f64 * dt, &[d, d * out_scale])?;
    }
    Ok(ts)
}

/// [`langevin_mean_trajectory_from`] with the cavity in vacuum at `t0`.
pub fn langevin_mean_trajectory(p: &SystemParams, sigma_z: f64, t0: f64, t1: f64, dt: f64) -> Result<TimeSeries> {
    langevin_mean_trajectory_from(p, sigma_z, C64::new(0.0, 0.0), t0, t1, dt)
}

/// Leading envelope of the integrated signal,
/// `tau/kappa + sin(W tau)/(kappa^2 + 16 W^2) [4 sin(W tau) + (kappa/W) cos(W tau)]`.
pub fn f0(tau: f64, p: &SystemParams) -> f64 {
    let (k, w) = (p.kappa, p.omega_r);
    let (s, c) = (w * tau).sin_cos();
    tau / k + s / (k * k + 16.0 * w * w) * (4.0 * s + k / w * c)
}

/// Counter-rotating correction `R(tau)` to the integrated signal.
pub fn r_correction(tau: f64, p: &SystemParams) -> f64 {
    let (k, w) = (p.kappa, p.omega_r);
    let (k2, w2) = (k * k, w * w);
    let (s1, c1) = (w * tau).sin_cos();
    let (s2, c2) = (2.0 * w * tau).sin_cos();
    -3.0 * tau / (4.0 * k) + k * tau / (4.0 * (k2 + 16.0 * w2)) + k * tau / (2.0 * (k2 + 4.0 * w2)) + s2 / (4.0 * k * w)
        - s1 / (k2 + 4.0 * w2) * (s1 + k / (2.0 * w) * c1)
        - s1 * s1 / (k2 + 36.0 * w2) * (3.0 * c2 - k / (2.0 * w) * s2)
        - s1 / (k2 + 16.0 * w2) * (2.0 * s1.powi(3) + k / (2.0 * w) * c1 - k / (4.0 * w) * c1 * c2)
        + s2 / (k2 + 64.0 * w2) * (s2 + k / (8.0 * w) * c2)
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Domain(format!("integration time {tau} must be > 0")));
    }
    Ok(())
}

/// `|Q_up - Q_down|^2 = 64 kappa^2 chi^2 n [F0^2 + beta^2 F0 R]` with `n = a_bar0^2`.
pub fn integrated_signal_sq(tau: f64, p: &SystemParams) -> Result<f64> {
    check_tau(tau)?;
    let f = f0(tau, p);
    let beta = p.beta();
    let n = p.a_bar0 * p.a_bar0;
    Ok(64.0 * (p.kappa * p.chi).powi(2) * n * (f * f + beta * beta * f * r_correction(tau, p)))
}

/// `Q_up^2 + Q_down^2` for squeezed input `sq` (squeezing angle `sq.phi`).
pub fn integrated_noise_sq(tau: f64, p: &SystemParams, sq: &SqueezeSpec) -> Result<f64> {
    check_tau(tau)?;
    let (k, w) = (p.kappa, p.omega_r);
    let (k2, w2) = (k * k, w * w);
    let kt = k * tau;
    let (r, th) = (sq.r, sq.phi);
    let c2t = (2.0 * th).cos();
    let lead = 2.0 * ((2.0 * r).cosh() - c2t * (2.0 * r).sinh()) * kt;
    let d1 = k2 + w2;
    let d4 = k2 + 4.0 * w2;
    let d16 = k2 + 16.0 * w2;
    let c1 = (w * tau).cos();
    let (s2, c2) = (2.0 * w * tau).sin_cos();
    let bracket = 32.0 * w2 / d4 * kt - 16.0 * w2 * (5.0 * k2 * k2 + 16.0 * w2 * w2) / (d4 * d4 * d1)
        + 16.0 * k2 * w * (w * (-7.0 * k2 + 8.0 * w2) * c2 + k * (k2 - 14.0 * w2) * s2) / (d1 * d4 * d16)
        + 16.0
            * (-0.5 * kt).exp()
            * (4.0 * w2 * (2.0 * k2 * k2 + 3.0 * k2 * w2 + 16.0 * w2 * w2) / (d1 * d4 * d16)
                + 2.0 * k2 * w * (k2 - 2.0 * w2) * (2.0 * w * c1 + k * s2) / (d4 * d4 * d1));
    let beta = p.beta();
    let noise = lead + beta * beta * (2.0 * r).sinh() * c2t * bracket;
    if !(noise > 0.0) {
        return Err(Error::Domain(format!("integrated noise {noise} is not positive")));
    }
    Ok(noise)
}

/// Integrated signal, noise and their ratio at one integration time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SnrBreakdown {
    pub signal_sq: f64,
    pub noise_sq: f64,
    pub snr: f64,
    pub tau: f64,
}

/// Power SNR `|Q_up - Q_down|^2 / (Q_up^2 + Q_down^2)`.
pub fn snr(tau: f64, p: &SystemParams, sq: &SqueezeSpec) -> Result<SnrBreakdown> {
    let signal_sq = integrated_signal_sq(tau, p)?;
    let noise_sq = integrated_noise_sq(tau, p, sq)?;
    Ok(SnrBreakdown {
        signal_sq,
        noise_sq,
        snr: signal_sq / noise_sq,
        tau,
    })
}

/// `1 - gamma^2/4 + gamma^4/16` with `gamma = kappa / Omega_R`.
fn gamma_factor(p: &SystemParams) -> f64 {
    let g2 = p.gamma().powi(2);
    1.0 - g2 / 4.0 + g2 * g2 / 16.0
}

/// Long-time SNR improvement
/// `e^{2r} / (1 + 2 beta^2 (1 - gamma^2/4 + gamma^4/16)(e^{4r} - 1))`.
pub fn snr_ratio_longtime(r: f64, p: &SystemParams) -> Result<f64> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("squeezing parameter r = {r} must be >= 0")));
    }
    let beta2 = p.beta().powi(2);
    let e2 = (2.0 * r).exp();
    Ok(e2 / (1.0 + 2.0 * beta2 * gamma_factor(p) * (e2 * e2 - 1.0)))
}

/// Squeezing that maximises [`snr_ratio_longtime`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimalSqueezing {
    pub r: f64,
    /// `e^{2 r_opt}`.
    pub e2r: f64,
    /// `10 log10(e^{2 r_opt})`.
    pub gain_db: f64,
    pub ratio: f64,
}

/// `e^{2 r_opt} = sqrt((8 - beta^2 c) / (beta^2 c))` with `c = 16 - 4 gamma^2 + gamma^4`.
pub fn optimal_squeezing(p: &SystemParams) -> Result<OptimalSqueezing> {
    let bc = p.beta().powi(2) * 16.0 * gamma_factor(p);
    let arg = (8.0 - bc) / bc;
    if !(arg > 1.0) || !arg.is_finite() {
        return Err(Error::Domain(format!(
            "optimal squeezing undefined: (8 - beta^2 c)/(beta^2 c) = {arg}"
        )));
    }
    let e2r = arg.sqrt();
    let r = 0.5 * e2r.ln();
    Ok(OptimalSqueezing {
        r,
        e2r,
        gain_db: linear_to_db(e2r),
        ratio: snr_ratio_longtime(r, p)?,
    })
}

/// Assignment fidelity `erf(sqrt(SNR)/2)` of a power SNR for two equal-width Gaussians.
pub fn fidelity_from_snr(snr: f64) -> f64 {
    erf(snr.max(0.0).sqrt() / 2.0)
}

/// Power SNR needed for assignment fidelity `fidelity`.
pub fn snr_for_fidelity(fidelity: f64) -> Result<f64> {
    if !(fidelity > 0.0 && fidelity < 1.0) {
        return Err(Error::Domain(format!("fidelity {fidelity} outside (0, 1)")));
    }
    Ok(4.0 * erf_inv(fidelity).powi(2))
}

/// First integration time at which [`snr`] reaches the fidelity target,
/// scanning in steps of `tau_step` up to `tau_max` and refining by bisection.
pub fn fidelity_time(p: &SystemParams, sq: &SqueezeSpec, fidelity: f64, tau_max: f64) -> Result<f64> {
    let target = snr_for_fidelity(fidelity)?;
    let tau_step = 0.25 / p.kappa.max(1e-3);
    let mut lo = 0.0;
    let mut hi = tau_step;
    while snr(hi, p, sq)?.snr < target {
        lo = hi;
        hi += tau_step;
        if hi > tau_max {
            return Err(Error::Unreachable(format!(
                "SNR {target:.3} not reached within {tau_max} us"
            )));
        }
    }
    while hi - lo > 1e-12 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid > 0.0 && snr(mid, p, sq)?.snr >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Vacuum rates and chain efficiencies of the phenomenological rate models.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateModel {
    /// Dephasing rate without squeezing (1/us).
    pub gamma_phi_vac: f64,
    /// Measurement rate without squeezing (1/us).
    pub gamma_meas_vac: f64,
    pub eff: EfficiencyParams,
}

impl RateModel {
    pub fn new(gamma_phi_vac: f64, gamma_meas_vac: f64, eff: EfficiencyParams) -> Result<Self> {
        let rm = RateModel {
            gamma_phi_vac,
            gamma_meas_vac,
            eff,
        };
        rm.check()?;
        Ok(rm)
    }

    /// Measured vacuum rates 0.54 and 0.41 per us with the fitted efficiencies.
    pub fn experiment() -> Self {
        RateModel {
            gamma_phi_vac: 0.54,
            gamma_meas_vac: 0.41,
            eff: EfficiencyParams::experiment(),
        }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.gamma_phi_vac > 0.0) || !(self.gamma_meas_vac > 0.0) {
            return Err(Error::Domain("vacuum rates must be positive".into()));
        }
        self.eff.check()
    }
}

/// `Gamma_phi = Gamma_phi,vac (1 + 2 eps_in (N + M cos 2(phi + phi0)))`.
pub fn dephasing_rate(phi: f64, sq: &SqueezeSpec, rm: &RateModel) -> Result<f64> {
    let e = &rm.eff;
    let arg = 2.0 * (phi + e.global_phase);
    let factor = 1.0 + 2.0 * e.eps_in * (sq.n_photons + sq.m_coherence * arg.cos());
    if !(factor > 0.0) {
        return Err(Error::Domain(format!("dephasing factor {factor} is not positive")));
    }
    Ok(rm.gamma_phi_vac * factor)
}

/// `Gamma_meas = Gamma_meas,vac / (1 + 2 eps_in eps_out (N - M cos 2(phi_tilde + phi0)))`,
/// where `phi_tilde = phi + delta` is the angle relative to the amplified quadrature.
pub fn measurement_rate(phi_tilde: f64, sq: &SqueezeSpec, rm: &RateModel) -> Result<f64> {
    let e = &rm.eff;
    let arg = 2.0 * (phi_tilde + e.global_phase);
    let denom = 1.0 + 2.0 * e.eps_in * e.eps_out * (sq.n_photons - sq.m_coherence * arg.cos());
    if !(denom > 0.0) {
        return Err(Error::Domain(format!(
            "measurement-rate denominator {denom} is not positive"
        )));
    }
    Ok(rm.gamma_meas_vac / denom)
}

/// [`measurement_rate`] at squeezing angle `phi`, i.e. `phi_tilde = phi + delta`.
pub fn measurement_rate_at(phi: f64, sq: &SqueezeSpec, rm: &RateModel) -> Result<f64> {
    measurement_rate(phi + rm.eff.delta_align, sq, rm)
}

/// `eta = eps_out (Gamma_phi,vac / Gamma_phi)(Gamma_meas / Gamma_meas,vac)` at squeezing angle `phi`.
pub fn efficiency(phi: f64, sq: &SqueezeSpec, rm: &RateModel) -> Result<f64> {
    let gphi = dephasing_rate(phi, sq, rm)?;
    let gmeas = measurement_rate_at(phi, sq, rm)?;
    Ok(rm.eff.eps_out * (rm.gamma_phi_vac / gphi) * (gmeas / rm.gamma_meas_vac))
}

/// Pure dephasing rate `(kappa/2) Re[sqrt((1 + 2i chi/kappa)^2 + 8i chi n_th/kappa) - 1]`
/// of a dispersively coupled qubit in a thermal cavity.
pub fn thermal_dephasing_rate(n_th: f64, chi: f64, kappa: f64) -> f64 {
    let z = Complex64::new(1.0, 2.0 * chi / kappa);
    let s = (z * z + Complex64::new(0.0, 8.0 * chi * n_th / kappa)).sqrt();
    0.5 * kappa * (s - 1.0).re
}

/// Thermal photon number whose dephasing alone gives `1/T2`, by bisection on `[0, 10]`.
pub fn thermal_photon_bound(t2: f64, chi: f64, kappa: f64) -> Result<f64> {
    if !(t2 > 0.0) {
        return Err(Error::Domain(format!("T2 = {t2} must be > 0")));
    }
    if !(kappa > 0.0) {
        return Err(Error::Domain(format!("kappa = {kappa} must be > 0")));
    }
    let target = 1.0 / t2;
    let f = |n: f64| thermal_dephasing_rate(n, chi, kappa) - target;
    let (mut lo, mut hi) = (0.0, 10.0);
    if f(lo) > 0.0 || f(hi) < 0.0 {
        return Err(Error::Unreachable(format!(
            "no thermal photon number in [0, 10] gives 1/T2 = {target}"
        )));
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Dephasing rate `2 a_bar0^2 chi^2 / kappa` of the unsqueezed stroboscopic measurement.
pub fn gamma_phi_vac_from_params(a_bar0: f64, chi: f64, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::Domain(format!("kappa = {kappa} must be > 0")));
    }
    Ok(2.0 * a_bar0 * a_bar0 * chi * chi / kappa)
}

/// Drive amplitude `a_bar0` giving the vacuum dephasing rate `gamma_phi`.
pub fn a_bar0_for_gamma_phi(gamma_phi: f64, chi: f64, kappa: f64) -> Result<f64> {
    if !(gamma_phi >= 0.0) || !(kappa > 0.0) || chi == 0.0 {
        return Err(Error::Domain("need gamma_phi >= 0, kappa > 0, chi != 0".into()));
    }
    Ok((gamma_phi * kappa / (2.0 * chi * chi)).sqrt())
}
