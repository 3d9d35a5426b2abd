//! Steady second moments of linear bosonic models. The qubit-free parts of the
//! squeezing models are linear, and their moments fix the squeeze frames used
//! to keep truncations small.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hamiltonians::dpa_threshold;
use crate::operators::{CMatrix, SqueezeFrame, C64};
use crate::params::SystemParams;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// `H = sum G_jk a_j^dag a_k + (1/2) sum (P_jk a_j^dag a_k^dag + h.c.)` with
/// jump operators `L = sum_j u_j a_j + v_j a_j^dag`.
#[derive(Clone, Debug)]
pub struct LinearModel {
    pub g: CMatrix,
    pub p: CMatrix,
    pub jumps: Vec<(Vec<C64>, Vec<C64>)>,
}

/// Steady moments `C_ij = <alpha_i alpha_j>` with `alpha = (a_1..a_m, a_1^dag..a_m^dag)`.
#[derive(Clone, Debug)]
pub struct Moments {
    pub c: CMatrix,
    modes: usize,
}

/// A single-mode Gaussian state written as `S(xi) rho_thermal(n_th) S(xi)^dag`.
#[derive(Clone, Copy, Debug)]
pub struct ModeShape {
    pub frame: SqueezeFrame,
    pub n_thermal: f64,
}

impl LinearModel {
    pub fn modes(&self) -> usize {
        self.g.nrows()
    }

    /// Drift matrix of `alpha` and the diffusion term of the moment equation.
    fn drift(&self) -> (CMatrix, CMatrix) {
        let m = self.modes();
        let mut a = &self.g * (-I);
        let mut b = &self.p * (-I);
        let mut d = CMatrix::zeros(2 * m, 2 * m);
        for (u, v) in &self.jumps {
            for i in 0..m {
                for j in 0..m {
                    a[(i, j)] += 0.5 * (v[i] * v[j].conj() - u[i].conj() * u[j]);
                    b[(i, j)] += 0.5 * (v[i] * u[j].conj() - u[i].conj() * v[j]);
                }
            }
            // [L^dag, alpha_i] [alpha_j, L]
            let c: Vec<C64> = u.iter().map(|x| -x.conj()).chain(v.iter().map(|x| x.conj())).collect();
            let e: Vec<C64> = v.iter().copied().chain(u.iter().map(|x| -x)).collect();
            for i in 0..2 * m {
                for j in 0..2 * m {
                    d[(i, j)] += c[i] * e[j];
                }
            }
        }
        let mut big = CMatrix::zeros(2 * m, 2 * m);
        big.view_mut((0, 0), (m, m)).copy_from(&a);
        big.view_mut((0, m), (m, m)).copy_from(&b);
        big.view_mut((m, 0), (m, m)).copy_from(&b.map(|z| z.conj()));
        big.view_mut((m, m), (m, m)).copy_from(&a.map(|z| z.conj()));
        (big, d)
    }

    /// Solves `M C + C M^T + D = 0`; fails when the drift is not strictly damped.
    pub fn steady_moments(&self) -> Result<Moments> {
        let m = self.modes();
        let (drift, d) = self.drift();
        let unstable = drift
            .clone()
            .schur()
            .eigenvalues()
            .is_none_or(|ev| ev.iter().any(|z| z.re >= 0.0));
        if unstable {
            return Err(Error::Singularity("linear model has no damped steady state".into()));
        }
        let n = 2 * m;
        let id = CMatrix::identity(n, n);
        let sys = id.kronecker(&drift) + drift.kronecker(&id);
        let rhs = -DMatrix::from_column_slice(n * n, 1, d.as_slice());
        let sol = sys
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Singularity("moment equations are singular".into()))?;
        Ok(Moments {
            c: CMatrix::from_column_slice(n, n, sol.as_slice()),
            modes: m,
        })
    }
}

impl Moments {
    /// `<a_k^dag a_k>`.
    pub fn number(&self, k: usize) -> f64 {
        self.c[(self.modes + k, k)].re
    }

    /// `<a_k a_k>`.
    pub fn pair(&self, k: usize) -> C64 {
        self.c[(k, k)]
    }

    /// Squeeze and thermal occupation reproducing mode `k`'s reduced moments.
    pub fn shape(&self, k: usize) -> Result<ModeShape> {
        let (n, m) = (self.number(k), self.pair(k));
        let nu2 = (n + 0.5).powi(2) - m.norm_sqr();
        if !(nu2 >= 0.25 * (1.0 - 1e-9)) {
            return Err(Error::Domain(format!("moments n={n}, m={m} violate uncertainty")));
        }
        let nu = nu2.max(0.25).sqrt();
        let r = 0.5 * (m.norm() / nu).asinh();
        let theta = if m.norm() > 0.0 { (-m).arg() } else { 0.0 };
        Ok(ModeShape {
            frame: SqueezeFrame::new(r, theta)?,
            n_thermal: nu - 0.5,
        })
    }
}

/// Cavity fed by broadband squeezed vacuum of `ns` photons at angle `phi`.
pub fn broadband_linear_model(p: &SystemParams, ns: f64, phi: f64) -> LinearModel {
    let k = p.kappa.sqrt();
    LinearModel {
        g: CMatrix::zeros(1, 1),
        p: CMatrix::zeros(1, 1),
        jumps: vec![(
            vec![C64::new(k * (ns + 1.0).sqrt(), 0.0)],
            vec![-C64::from_polar(k * ns.sqrt(), 2.0 * phi)],
        )],
    }
}

/// Cavity (mode 0) driven by a degenerate parametric amplifier (mode 1) pumped at `lambda`.
pub fn cascaded_linear_model(p: &SystemParams, lambda: f64, phi: f64) -> Result<LinearModel> {
    let threshold = dpa_threshold(p);
    if lambda >= threshold {
        return Err(Error::AboveThreshold { lambda, threshold });
    }
    let link = 0.5 * (p.kappa_sqz * p.kappa).sqrt();
    let mut g = CMatrix::zeros(2, 2);
    g[(1, 0)] = I * link;
    g[(0, 1)] = -I * link;
    let mut pair = CMatrix::zeros(2, 2);
    pair[(1, 1)] = I * C64::from_polar(2.0 * lambda, 2.0 * phi);
    Ok(LinearModel {
        g,
        p: pair,
        jumps: vec![(
            vec![C64::new(p.kappa.sqrt(), 0.0), C64::new(p.kappa_sqz.sqrt(), 0.0)],
            vec![C64::new(0.0, 0.0); 2],
        )],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{cascaded_photon_number, dpa_drive_for_target};
    use crate::params::SqueezeSpec;

    #[test]
    fn plain_loss_relaxes_to_vacuum() {
        let p = SystemParams::experiment();
        let m = broadband_linear_model(&p, 0.0, 0.0).steady_moments().unwrap();
        assert!(m.number(0).abs() < 1e-12);
        assert!(m.pair(0).norm() < 1e-12);
        assert!((m.c[(0, 1)] - 1.0).norm() < 1e-12);
    }

    #[test]
    fn broadband_moments_match_input() {
        let p = SystemParams::experiment();
        let sq = SqueezeSpec::from_r(0.7, 0.0).unwrap();
        let m = broadband_linear_model(&p, sq.n_photons, 0.4).steady_moments().unwrap();
        assert!((m.number(0) - sq.n_photons).abs() < 1e-10);
        let want = C64::from_polar(sq.m_coherence, 0.8);
        assert!((m.pair(0) - want).norm() < 1e-10);
        let shape = m.shape(0).unwrap();
        assert!((shape.frame.r - 0.7).abs() < 1e-9);
        assert!(shape.n_thermal.abs() < 1e-9);
    }

    #[test]
    fn cascaded_number_matches_closed_form() {
        let p = SystemParams::experiment();
        for target in [0.1, 0.5, 2.0] {
            let lambda = dpa_drive_for_target(target, &p).unwrap();
            let m = cascaded_linear_model(&p, lambda, 0.3)
                .unwrap()
                .steady_moments()
                .unwrap();
            let want = cascaded_photon_number(lambda, &p).unwrap();
            assert!((m.number(0) - want).abs() < 1e-9 * want, "{} vs {want}", m.number(0));
            let shape = m.shape(0).unwrap();
            assert!(shape.n_thermal >= 0.0 && shape.frame.r > 0.0);
        }
    }

    #[test]
    fn above_threshold_has_no_steady_state() {
        let p = SystemParams::experiment();
        let th = dpa_threshold(&p);
        assert!(cascaded_linear_model(&p, th * 1.01, 0.0).is_err());
        let mut m = cascaded_linear_model(&p, 0.0, 0.0).unwrap();
        m.p[(1, 1)] = C64::new(0.0, 4.0 * th);
        assert!(m.steady_moments().is_err());
    }
}
