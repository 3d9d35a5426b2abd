//! Device, squeezing and measurement-chain parameters.
//!
//! Everything inside the crate works in angular units: frequencies and rates
//! in rad/us, times in us. Values quoted as `f = omega / 2pi` in MHz cross
//! into the crate through [`mhz_to_angular`] (and JSON documents, which are
//! always written in MHz).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TWO_PI: f64 = 2.0 * PI;

/// Default ratio threshold for [`validate_dispersive`].
pub const DEFAULT_VALIDITY_THRESHOLD: f64 = 0.01;

/// `f` in MHz (value of omega/2pi) to angular rad/us.
#[inline]
pub fn mhz_to_angular(f_mhz: f64) -> f64 {
    TWO_PI * f_mhz
}

/// Angular rad/us back to MHz.
#[inline]
pub fn angular_to_mhz(omega: f64) -> f64 {
    omega / TWO_PI
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Dispersive shift `g^2 / delta`.
pub fn chi_from_g_delta(g: f64, delta: f64) -> Result<f64> {
    if delta == 0.0 {
        return Err(Error::Singularity("chi = g^2/delta with delta = 0".into()));
    }
    Ok(g * g / delta)
}

/// Qubit, cavity and drive parameters. All angular quantities in rad/us.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemParams {
    pub omega_q: f64,
    pub omega_c: f64,
    pub g: f64,
    /// Always `omega_q - omega_c`.
    pub delta: f64,
    pub chi: f64,
    pub kappa: f64,
    pub omega_r: f64,
    /// Classical cavity amplitude in the displaced frame, `a -> 2 a_bar0 cos(omega_r t) + d`.
    pub a_bar0: f64,
    pub kappa_sqz: f64,
    pub eps_plus: Complex64,
    pub eps_minus: Complex64,
}

impl SystemParams {
    /// Builds a parameter set with `chi = g^2/delta` and sideband drives
    /// chosen to sustain the displacement `a_bar0`.
    pub fn new(
        omega_q: f64,
        omega_c: f64,
        g: f64,
        kappa: f64,
        omega_r: f64,
        a_bar0: f64,
        kappa_sqz: f64,
    ) -> Result<Self> {
        let delta = omega_q - omega_c;
        let chi = chi_from_g_delta(g, delta)?;
        let (eps_plus, eps_minus) = sideband_drives(a_bar0, kappa, omega_r);
        let p = SystemParams {
            omega_q,
            omega_c,
            g,
            delta,
            chi,
            kappa,
            omega_r,
            a_bar0,
            kappa_sqz,
            eps_plus,
            eps_minus,
        };
        p.check()?;
        Ok(p)
    }

    /// The measured device: qubit 3.898 GHz, cavity 6.694 GHz, g/2pi = 45.2 MHz,
    /// with the simulation values kappa/2pi = 5.9 MHz, chi/2pi = 0.73 MHz,
    /// Omega_R/2pi = 40 MHz, a_bar0 = 0.35 and kappa_SQZ/2pi = 26 MHz.
    ///
    /// `chi` is the quoted magnitude rather than `g^2/delta` (which is
    /// -0.731 MHz with the sign of the negative detuning).
    pub fn experiment() -> Self {
        let mut p = SystemParams::new(
            mhz_to_angular(3898.0),
            mhz_to_angular(6694.0),
            mhz_to_angular(45.2),
            mhz_to_angular(5.9),
            mhz_to_angular(40.0),
            0.35,
            mhz_to_angular(26.0),
        )
        .expect("experiment parameters are well formed");
        p.chi = mhz_to_angular(0.73);
        p
    }

    pub fn with_chi(mut self, chi: f64) -> Self {
        self.chi = chi;
        self
    }

    pub fn with_a_bar0(mut self, a_bar0: f64) -> Result<Self> {
        self.a_bar0 = a_bar0;
        let (p, m) = sideband_drives(a_bar0, self.kappa, self.omega_r);
        self.eps_plus = p;
        self.eps_minus = m;
        self.check()?;
        Ok(self)
    }

    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        self.kappa = kappa;
        let (p, m) = sideband_drives(self.a_bar0, kappa, self.omega_r);
        self.eps_plus = p;
        self.eps_minus = m;
        self.check()?;
        Ok(self)
    }

    pub fn with_omega_r(mut self, omega_r: f64) -> Result<Self> {
        self.omega_r = omega_r;
        let (p, m) = sideband_drives(self.a_bar0, self.kappa, omega_r);
        self.eps_plus = p;
        self.eps_minus = m;
        self.check()?;
        Ok(self)
    }

    pub fn with_sidebands(mut self, eps_plus: Complex64, eps_minus: Complex64) -> Self {
        self.eps_plus = eps_plus;
        self.eps_minus = eps_minus;
        self
    }

    /// `chi / omega_r`, the expansion parameter of the counter-rotating corrections.
    pub fn beta(&self) -> f64 {
        self.chi / self.omega_r
    }

    /// `kappa / omega_r`.
    pub fn gamma(&self) -> f64 {
        self.kappa / self.omega_r
    }

    /// Qubit drive frequency that cancels the static part of the qubit detuning:
    /// `omega_q + chi + 4 chi a_bar0^2`.
    pub fn omega_d(&self) -> f64 {
        self.omega_q + self.chi + 4.0 * self.chi * self.a_bar0 * self.a_bar0
    }

    /// Checks the field-level invariants.
    pub fn check(&self) -> Result<()> {
        let finite = [
            self.omega_q,
            self.omega_c,
            self.g,
            self.delta,
            self.chi,
            self.kappa,
            self.omega_r,
            self.a_bar0,
            self.kappa_sqz,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Domain("non-finite system parameter".into()));
        }
        if self.delta != self.omega_q - self.omega_c {
            return Err(Error::Domain("delta must equal omega_q - omega_c".into()));
        }
        if self.kappa < 0.0 || self.kappa_sqz < 0.0 {
            return Err(Error::Domain("linewidths must be non-negative".into()));
        }
        if self.a_bar0 < 0.0 {
            return Err(Error::Domain("a_bar0 must be non-negative".into()));
        }
        if self.omega_r <= 0.0 {
            return Err(Error::Domain("omega_r must be positive".into()));
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: SystemParamsDoc = serde_json::from_str(s)?;
        doc.into_params()
    }

    pub fn to_doc(&self) -> SystemParamsDoc {
        let c = |z: Complex64| Some([angular_to_mhz(z.re), angular_to_mhz(z.im)]);
        SystemParamsDoc {
            omega_q: Some(angular_to_mhz(self.omega_q)),
            omega_c: Some(angular_to_mhz(self.omega_c)),
            g: Some(angular_to_mhz(self.g)),
            delta: Some(angular_to_mhz(self.delta)),
            chi: Some(angular_to_mhz(self.chi)),
            kappa: Some(angular_to_mhz(self.kappa)),
            omega_r: Some(angular_to_mhz(self.omega_r)),
            a_bar0: Some(self.a_bar0),
            kappa_sqz: Some(angular_to_mhz(self.kappa_sqz)),
            eps_plus: c(self.eps_plus),
            eps_minus: c(self.eps_minus),
        }
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams::experiment()
    }
}

/// Sideband drive amplitudes that hold the cavity at
/// `a(t) = a_bar0 (e^{-i omega_r t} + e^{i omega_r t})` in the frame rotating at `omega_c`.
pub fn sideband_drives(a_bar0: f64, kappa: f64, omega_r: f64) -> (Complex64, Complex64) {
    let plus = Complex64::new(omega_r, kappa / 2.0) * a_bar0;
    let minus = Complex64::new(-omega_r, kappa / 2.0) * a_bar0;
    (plus, minus)
}

/// JSON form of [`SystemParams`]. Frequencies are omega/2pi in MHz; complex
/// drives are `[re, im]` pairs. Missing `delta`, `chi` and drives are derived.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SystemParamsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_bar0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_sqz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_plus: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_minus: Option<[f64; 2]>,
}

impl SystemParamsDoc {
    /// Fills unspecified keys from [`SystemParams::experiment`] and converts to angular units.
    pub fn into_params(self) -> Result<SystemParams> {
        let base = SystemParams::experiment().to_doc();
        let pick = |v: Option<f64>, d: Option<f64>| v.or(d).unwrap_or_default();
        let omega_q = mhz_to_angular(pick(self.omega_q, base.omega_q));
        let omega_c = mhz_to_angular(pick(self.omega_c, base.omega_c));
        let delta = omega_q - omega_c;
        if let Some(d) = self.delta {
            let given = mhz_to_angular(d);
            if (given - delta).abs() > 1e-9 * delta.abs().max(1.0) {
                return Err(Error::Config(format!(
                    "delta = {d} MHz disagrees with omega_q - omega_c = {} MHz",
                    angular_to_mhz(delta)
                )));
            }
        }
        let g = mhz_to_angular(pick(self.g, base.g));
        let kappa = mhz_to_angular(pick(self.kappa, base.kappa));
        let omega_r = mhz_to_angular(pick(self.omega_r, base.omega_r));
        let a_bar0 = pick(self.a_bar0, base.a_bar0);
        let kappa_sqz = mhz_to_angular(pick(self.kappa_sqz, base.kappa_sqz));
        let chi = match self.chi {
            Some(c) => mhz_to_angular(c),
            // Explicit g or detuning without chi means chi follows from them.
            None if self.g.is_some() || self.omega_q.is_some() || self.omega_c.is_some() => chi_from_g_delta(g, delta)?,
            None => mhz_to_angular(base.chi.unwrap_or_default()),
        };
        let (dp, dm) = sideband_drives(a_bar0, kappa, omega_r);
        let c = |v: Option<[f64; 2]>, d: Complex64| {
            v.map(|[re, im]| Complex64::new(mhz_to_angular(re), mhz_to_angular(im)))
                .unwrap_or(d)
        };
        let p = SystemParams {
            omega_q,
            omega_c,
            g,
            delta,
            chi,
            kappa,
            omega_r,
            a_bar0,
            kappa_sqz,
            eps_plus: c(self.eps_plus, dp),
            eps_minus: c(self.eps_minus, dm),
        };
        p.check().map_err(|e| Error::Config(e.to_string()))?;
        Ok(p)
    }
}

/// Ideal squeezed-vacuum description.
///
/// `n_photons = sinh^2 r`, `m_coherence = sinh r cosh r = sqrt(N (N + 1))`,
/// and the squeezer's phase-preserving power gain is `G = N + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezeSpec {
    pub r: f64,
    pub phi: f64,
    pub n_photons: f64,
    pub m_coherence: f64,
    pub gain_db: f64,
}

impl SqueezeSpec {
    pub fn vacuum(phi: f64) -> Self {
        SqueezeSpec {
            r: 0.0,
            phi,
            n_photons: 0.0,
            m_coherence: 0.0,
            gain_db: 0.0,
        }
    }

    pub fn from_r(r: f64, phi: f64) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("squeezing parameter r = {r} must be >= 0")));
        }
        let (s, c) = (r.sinh(), r.cosh());
        let n = s * s;
        Ok(SqueezeSpec {
            r,
            phi,
            n_photons: n,
            m_coherence: s * c,
            gain_db: linear_to_db(n + 1.0),
        })
    }

    /// Same squeezing, different angle.
    pub fn with_phi(self, phi: f64) -> Self {
        SqueezeSpec { phi, ..self }
    }

    /// Quadrature variances `((1/2 + N + M)/2, (1/2 + N - M)/2)` at the squeezer output.
    pub fn variances(&self) -> (f64, f64) {
        let n = self.n_photons;
        let m = self.m_coherence;
        ((0.5 + n + m) / 2.0, (0.5 + n - m) / 2.0)
    }
}

/// Converts a phase-preserving squeezer gain to the ideal squeezed state it produces.
pub fn gain_to_squeeze(gain_db: f64, phi: f64) -> Result<SqueezeSpec> {
    if !(gain_db >= 0.0) || !gain_db.is_finite() {
        return Err(Error::Domain(format!("squeezer gain {gain_db} dB must be >= 0")));
    }
    let g = db_to_linear(gain_db);
    let n = g - 1.0;
    let m = (n * (n + 1.0)).sqrt();
    let r = (g.sqrt() + n.sqrt()).ln();
    Ok(SqueezeSpec {
        r,
        phi,
        n_photons: n,
        m_coherence: m,
        gain_db,
    })
}

/// Inverse of [`gain_to_squeeze`]: phase-preserving gain in dB from `r`.
pub fn squeeze_to_gain(sq: &SqueezeSpec) -> f64 {
    let s = sq.r.sinh();
    linear_to_db(1.0 + s * s)
}

/// Intracavity photon number `sinh^2 r` for a squeezing level quoted as a
/// DPA gain `e^{2r}` in dB.
pub fn photons_from_dpa_gain_db(gain_db: f64) -> Result<f64> {
    if !(gain_db >= 0.0) {
        return Err(Error::Domain(format!("DPA gain {gain_db} dB must be >= 0")));
    }
    let r = 0.5 * db_to_linear(gain_db).ln();
    Ok(r.sinh().powi(2))
}

/// Measurement-chain efficiencies and phase offsets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EfficiencyParams {
    pub eps_in: f64,
    pub eps_out: f64,
    /// Misalignment of the amplified quadrature, `delta = phi_tilde - phi` (rad).
    #[serde(default)]
    pub delta_align: f64,
    /// Offset added to the squeezing angle in both rate models (rad).
    #[serde(default)]
    pub global_phase: f64,
}

impl EfficiencyParams {
    pub fn new(eps_in: f64, eps_out: f64, delta_align: f64, global_phase: f64) -> Result<Self> {
        let e = EfficiencyParams {
            eps_in,
            eps_out,
            delta_align,
            global_phase,
        };
        e.check()?;
        Ok(e)
    }

    /// Fitted values of the experiment: eps_in = 0.48, eps_out = 0.38, delta = 14 deg.
    pub fn experiment() -> Self {
        EfficiencyParams {
            eps_in: 0.48,
            eps_out: 0.38,
            delta_align: 14f64.to_radians(),
            global_phase: 0.0,
        }
    }

    pub fn check(&self) -> Result<()> {
        for (name, v) in [("eps_in", self.eps_in), ("eps_out", self.eps_out)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Dimensionless ratios that must be small for the dispersive approximation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ValidityReport {
    /// `g Omega_R / Delta^2`, `g Omega_R / (Delta (Delta + 2 omega_c))`,
    /// `(g/Delta) |eps_+| / |Omega_R - Delta|`, `(g/Delta) |eps_-| / |Omega_R + Delta|`.
    pub ratios: [f64; 4],
    pub pass: [bool; 4],
    pub threshold: f64,
}

impl ValidityReport {
    pub fn all_pass(&self) -> bool {
        self.pass.iter().all(|&p| p)
    }
}

pub fn validate_dispersive(p: &SystemParams, threshold: f64) -> Result<ValidityReport> {
    let d = p.delta;
    if d == 0.0 {
        return Err(Error::Singularity("delta = 0".into()));
    }
    if (p.omega_r - d).abs() == 0.0 || (p.omega_r + d).abs() == 0.0 {
        return Err(Error::Singularity("omega_r = |delta|".into()));
    }
    let g = p.g;
    let ratios = [
        (g * p.omega_r / (d * d)).abs(),
        (g * p.omega_r / (d * (d + 2.0 * p.omega_c))).abs(),
        (g / d * p.eps_plus.norm() / (p.omega_r - d).abs()).abs(),
        (g / d * p.eps_minus.norm() / (p.omega_r + d).abs()).abs(),
    ];
    let pass = ratios.map(|r| r < threshold);
    Ok(ValidityReport {
        ratios,
        pass,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn zero_gain_is_vacuum() {
        let s = gain_to_squeeze(0.0, 0.0).unwrap();
        assert_eq!((s.n_photons, s.m_coherence, s.r), (0.0, 0.0, 0.0));
    }

    #[test]
    fn gain_examples() {
        // N = 10^(G/10) - 1, M = sqrt(N (N+1)), evaluated independently.
        let s = gain_to_squeeze(3.8, 0.0).unwrap();
        assert_relative_eq!(s.n_photons, 1.398_832_919_019_490_4, max_relative = 1e-12);
        assert_relative_eq!(s.m_coherence, 1.831_820_530_060_758_4, max_relative = 1e-12);
        let s = gain_to_squeeze(4.0, 0.0).unwrap();
        assert_relative_eq!(s.n_photons, 1.511_886_431_509_580_1, max_relative = 1e-12);
        assert_relative_eq!(s.m_coherence, 1.948_765_510_083_846, max_relative = 1e-12);
    }

    #[test]
    fn negative_gain_rejected() {
        assert!(matches!(gain_to_squeeze(-0.1, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn chi_examples() {
        let chi = chi_from_g_delta(mhz_to_angular(45.2), mhz_to_angular(2796.0)).unwrap();
        assert_relative_eq!(angular_to_mhz(chi), 0.730_701, max_relative = 1e-5);
        assert_eq!(chi_from_g_delta(0.0, 3.0).unwrap(), 0.0);
        let neg = chi_from_g_delta(mhz_to_angular(45.2), -mhz_to_angular(2796.0)).unwrap();
        assert_eq!(neg, -chi);
        assert!(matches!(chi_from_g_delta(1.0, 0.0), Err(Error::Singularity(_))));
    }

    #[test]
    fn construction_invariants() {
        let p = SystemParams::new(20.0, 30.0, 0.5, 1.0, 2.0, 0.3, 4.0).unwrap();
        assert_eq!(p.delta, p.omega_q - p.omega_c);
        assert_relative_eq!(p.chi, p.g * p.g / p.delta, max_relative = 1e-12);
        assert!(SystemParams::new(20.0, 30.0, 0.5, 1.0, 0.0, 0.3, 4.0).is_err());
        assert!(SystemParams::new(20.0, 30.0, 0.5, -1.0, 1.0, 0.3, 4.0).is_err());
    }

    #[test]
    fn experiment_is_dispersive() {
        let p = SystemParams::experiment();
        let rep = validate_dispersive(&p, DEFAULT_VALIDITY_THRESHOLD).unwrap();
        assert!(rep.all_pass(), "{rep:?}");
        // 45.2 * 40 / 2796^2
        assert_relative_eq!(rep.ratios[0], 2.312_7e-4, max_relative = 1e-4);
        assert!(rep.ratios.iter().all(|&r| r >= 0.0));
    }

    #[test]
    fn strong_coupling_fails_validity() {
        let mut p = SystemParams::experiment();
        p.g = p.delta.abs();
        let rep = validate_dispersive(&p, 0.01).unwrap();
        assert!(!rep.pass[0]);
    }

    #[test]
    fn validity_singularities() {
        let mut p = SystemParams::experiment();
        p.omega_c = p.omega_q;
        p.delta = 0.0;
        assert!(matches!(validate_dispersive(&p, 0.01), Err(Error::Singularity(_))));
        let mut p = SystemParams::experiment();
        p.omega_r = p.delta.abs();
        assert!(matches!(validate_dispersive(&p, 0.01), Err(Error::Singularity(_))));
    }

    #[test]
    fn omega_d_absorbs_static_shifts() {
        let p = SystemParams::experiment();
        let shift = p.omega_d() - p.omega_q;
        assert_relative_eq!(shift, p.chi * (1.0 + 4.0 * 0.35 * 0.35), max_relative = 1e-12);
    }

    #[test]
    fn sideband_drives_sustain_displacement() {
        // a' = -i (eps_+ e^{-iWt} + eps_- e^{iWt}) - kappa/2 a with a = a0 (e^{-iWt} + e^{iWt}).
        let (kappa, w, a0) = (3.0, 17.0, 0.4);
        let (ep, em) = sideband_drives(a0, kappa, w);
        let i = Complex64::i();
        let lhs_plus = -i * w * a0;
        let rhs_plus = -i * ep - kappa / 2.0 * a0;
        assert!((lhs_plus - rhs_plus).norm() < 1e-12);
        let lhs_minus = i * w * a0;
        let rhs_minus = -i * em - kappa / 2.0 * a0;
        assert!((lhs_minus - rhs_minus).norm() < 1e-12);
    }

    #[test]
    fn json_loader_converts_mhz() {
        let p = SystemParams::from_json_str(
            r#"{"omega_q": 3898, "omega_c": 6694, "g": 45.2, "kappa": 5.9,
                "omega_r": 40, "a_bar0": 0.35, "kappa_sqz": 26}"#,
        )
        .unwrap();
        assert_relative_eq!(p.kappa, TWO_PI * 5.9, max_relative = 1e-15);
        assert_relative_eq!(p.chi, p.g * p.g / p.delta, max_relative = 1e-12);
        assert!(SystemParams::from_json_str(r#"{"kapa": 1}"#).is_err());
        assert!(SystemParams::from_json_str(r#"{"omega_q": 1, "omega_c": 2, "delta": 5}"#).is_err());
        let back = SystemParams::experiment().to_doc().into_params().unwrap();
        assert_relative_eq!(back.chi, SystemParams::experiment().chi, max_relative = 1e-14);
    }

    #[test]
    fn dpa_gain_photons() {
        assert_eq!(photons_from_dpa_gain_db(0.0).unwrap(), 0.0);
        // e^{2r} = 10 -> sinh^2 r = (sqrt(10) - 1/sqrt(10))^2 / 4
        let expect = (10f64.sqrt() - 1.0 / 10f64.sqrt()).powi(2) / 4.0;
        assert_relative_eq!(photons_from_dpa_gain_db(10.0).unwrap(), expect, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn gain_round_trip(g in 0.0f64..20.0) {
            let s = gain_to_squeeze(g, 0.3).unwrap();
            prop_assert!((squeeze_to_gain(&s) - g).abs() < 1e-10);
            prop_assert!((s.m_coherence - (s.n_photons * (s.n_photons + 1.0)).sqrt()).abs()
                <= 1e-12 * s.m_coherence.max(1.0));
            let (amp, sqz) = s.variances();
            prop_assert!((amp / ((2.0 * s.r).exp() / 4.0) - 1.0).abs() < 1e-10);
            prop_assert!((sqz / ((-2.0 * s.r).exp() / 4.0) - 1.0).abs() < 1e-10);
        }

        #[test]
        fn minimum_uncertainty(r in 0.0f64..3.0) {
            let s = SqueezeSpec::from_r(r, 0.0).unwrap();
            let prod = (0.5 + s.n_photons + s.m_coherence) * (0.5 + s.n_photons - s.m_coherence);
            prop_assert!((prod - 0.25).abs() < 1e-10);
        }

        #[test]
        fn unit_conversion_inverts(f in -1e4f64..1e4) {
            prop_assert!((angular_to_mhz(mhz_to_angular(f)) - f).abs() <= 1e-12 * f.abs().max(1.0));
        }
    }
}
