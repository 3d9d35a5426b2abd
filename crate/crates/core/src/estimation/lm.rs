//! Levenberg-Marquardt least squares with a central-difference Jacobian.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LmOptions {
    /// Converged once `|J^T r| <` this.
    pub gradient_tol: f64,
    pub max_iterations: usize,
    /// Relative step of the extrapolated central differences.
    pub diff_step: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            gradient_tol: 1e-10,
            max_iterations: 500,
            diff_step: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LmReport {
    pub x: Vec<f64>,
    /// `|r|^2 / 2` at `x`.
    pub cost: f64,
    pub gradient_norm: f64,
    /// `J^T J` at `x`.
    pub jtj: DMatrix<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn cost_of(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|v| v * v).sum::<f64>()
}

/// Central differences at steps `h` and `h/2` combined by Richardson
/// extrapolation, so the truncation error is `O(h^4)`.
fn jacobian<F: Fn(&[f64]) -> Vec<f64>>(f: &F, x: &[f64], m: usize, step: f64) -> Result<DMatrix<f64>> {
    let mut j = DMatrix::zeros(m, x.len());
    let mut xp = x.to_vec();
    let central = |k: usize, h: f64, xp: &mut Vec<f64>| -> Result<Vec<f64>> {
        xp[k] = x[k] + h;
        let rp = f(xp);
        xp[k] = x[k] - h;
        let rm = f(xp);
        xp[k] = x[k];
        if rp.len() != m || rm.len() != m {
            return Err(Error::Fit("residual length changed between evaluations".into()));
        }
        Ok(rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * h)).collect())
    };
    for k in 0..x.len() {
        let h = step * x[k].abs().max(1.0);
        let d1 = central(k, h, &mut xp)?;
        let d2 = central(k, 0.5 * h, &mut xp)?;
        for i in 0..m {
            j[(i, k)] = (4.0 * d2[i] - d1[i]) / 3.0;
        }
    }
    Ok(j)
}

/// Minimises `|f(x)|^2 / 2` from `x0`.
pub fn levenberg_marquardt<F: Fn(&[f64]) -> Vec<f64>>(f: &F, x0: &[f64], opts: &LmOptions) -> Result<LmReport> {
    let mut x = x0.to_vec();
    let mut r = f(&x);
    let m = r.len();
    if m < x.len() {
        return Err(Error::Fit(format!("{m} residuals for {} parameters", x.len())));
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite residual at the starting point".into()));
    }
    let mut cost = cost_of(&r);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    let mut j = jacobian(f, &x, m, opts.diff_step)?;
    let mut jtj = j.transpose() * &j;
    let mut g = j.transpose() * DVector::from_column_slice(&r);
    while iterations < opts.max_iterations {
        if g.norm() < opts.gradient_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let mut accepted = false;
        for _ in 0..40 {
            let mut a = jtj.clone();
            for k in 0..x.len() {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(delta) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                lambda *= 10.0;
                continue;
            };
            let xn: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, d)| a + d).collect();
            let rn = f(&xn);
            let cn = cost_of(&rn);
            if cn.is_finite() && cn <= cost {
                let stalled =
                    cost - cn <= 1e-15 * cost && delta.norm() <= 1e-15 * (1.0 + DVector::from_column_slice(&x).norm());
                x = xn;
                r = rn;
                cost = cn;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = !stalled;
                break;
            }
            lambda *= 4.0;
        }
        j = jacobian(f, &x, m, opts.diff_step)?;
        jtj = j.transpose() * &j;
        g = j.transpose() * DVector::from_column_slice(&r);
        if !accepted {
            converged = g.norm() < opts.gradient_tol;
            break;
        }
    }
    if !converged && g.norm() < opts.gradient_tol {
        converged = true;
    }
    Ok(LmReport {
        x,
        cost,
        gradient_norm: g.norm(),
        jtj,
        iterations,
        converged,
    })
}
