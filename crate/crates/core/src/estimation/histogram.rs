//! Freedman-Diaconis histograms, overlap areas and the double-Gaussian fit.

use serde::Serialize;
pub(crate) use statrs::statistics::{Data, OrderStatistics};

use crate::error::{Error, Result};

/// Normalised histogram: `density` integrates to one over the bins.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub density: Vec<f64>,
}

impl Histogram {
    pub fn width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

fn check_values(values: &[f64]) -> Result<()> {
    if values.len() < 2 {
        return Err(Error::Domain("need at least two values".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite value".into()));
    }
    Ok(())
}

/// Bin width `2 IQR / n^(1/3)`.
pub fn freedman_diaconis_width(values: &[f64]) -> Result<f64> {
    check_values(values)?;
    let iqr = Data::new(values.to_vec()).interquartile_range();
    let w = 2.0 * iqr / (values.len() as f64).cbrt();
    if !(w > 0.0) {
        return Err(Error::Fit("zero interquartile range".into()));
    }
    Ok(w)
}

/// Histogram with the given bin width (Freedman-Diaconis if `None`) over
/// `range` (the data range if `None`).
pub fn histogram(values: &[f64], width: Option<f64>, range: Option<(f64, f64)>) -> Result<Histogram> {
    check_values(values)?;
    let w = match width {
        Some(w) if w > 0.0 => w,
        Some(w) => return Err(Error::Domain(format!("bin width {w} must be positive"))),
        None => freedman_diaconis_width(values)?,
    };
    let (lo, hi) = range.unwrap_or_else(|| {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    });
    if !(hi >= lo) {
        return Err(Error::Domain("empty histogram range".into()));
    }
    let nb = (((hi - lo) / w).ceil() as usize).max(1);
    let edges: Vec<f64> = (0..=nb).map(|k| lo + k as f64 * w).collect();
    let mut counts = vec![0u64; nb];
    for &v in values {
        if v < lo || v > edges[nb] {
            continue;
        }
        let k = (((v - lo) / w) as usize).min(nb - 1);
        counts[k] += 1;
    }
    let norm = values.len() as f64 * w;
    let density = counts.iter().map(|&c| c as f64 / norm).collect();
    Ok(Histogram { edges, counts, density })
}

/// Shared area `sum min(p_a, p_b) w` of two normalised histograms on a
/// common Freedman-Diaconis grid built from the pooled values.
pub fn overlap_area(a: &[f64], b: &[f64]) -> Result<f64> {
    check_values(a)?;
    check_values(b)?;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let w = freedman_diaconis_width(&pooled)?;
    let lo = pooled.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = pooled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ha = histogram(a, Some(w), Some((lo, hi)))?;
    let hb = histogram(b, Some(w), Some((lo, hi)))?;
    Ok(ha.density.iter().zip(&hb.density).map(|(x, y)| x.min(*y) * w).sum())
}

/// `(1 - weight) N(mu_main, sigma_main) + weight N(mu_minor, sigma_minor)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DoubleGaussian {
    pub weight: f64,
    pub mu_main: f64,
    pub sigma_main: f64,
    pub mu_minor: f64,
    pub sigma_minor: f64,
}

fn normal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

impl DoubleGaussian {
    pub fn pdf(&self, x: f64) -> f64 {
        (1.0 - self.weight) * normal_pdf(x, self.mu_main, self.sigma_main)
            + self.weight * normal_pdf(x, self.mu_minor, self.sigma_minor)
    }

    pub fn log_likelihood(&self, values: &[f64]) -> f64 {
        values.iter().map(|&x| self.pdf(x).max(f64::MIN_POSITIVE).ln()).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DoubleGaussianFit {
    pub model: DoubleGaussian,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Largest admitted contamination weight.
pub const MAX_MINOR_WEIGHT: f64 = 0.1;

/// Maximum-likelihood double Gaussian by expectation-maximisation, with the
/// minor weight clamped to `[0, 0.1]`. `minor_mean_guess` seeds the minor
/// component (for example the mean of the other prepared state).
pub fn fit_double_gaussian(values: &[f64], minor_mean_guess: f64) -> Result<DoubleGaussianFit> {
    check_values(values)?;
    if !minor_mean_guess.is_finite() {
        return Err(Error::Domain("minor mean guess must be finite".into()));
    }
    let mut data = Data::new(values.to_vec());
    let sigma0 = data.interquartile_range() / 1.349;
    if !(sigma0 > 0.0) {
        return Err(Error::Fit("zero spread".into()));
    }
    let mut m = DoubleGaussian {
        weight: 0.05,
        mu_main: data.median(),
        sigma_main: sigma0,
        mu_minor: minor_mean_guess,
        sigma_minor: sigma0,
    };
    let floor = 1e-6 * sigma0;
    let mut ll = m.log_likelihood(values);
    let mut converged = false;
    let mut iterations = 0;
    let n = values.len() as f64;
    for it in 1..=2000 {
        iterations = it;
        let resp: Vec<f64> = values
            .iter()
            .map(|&x| {
                let b = m.weight * normal_pdf(x, m.mu_minor, m.sigma_minor);
                let a = (1.0 - m.weight) * normal_pdf(x, m.mu_main, m.sigma_main);
                if a + b > 0.0 {
                    b / (a + b)
                } else {
                    0.0
                }
            })
            .collect();
        let n_minor: f64 = resp.iter().sum();
        let n_main = n - n_minor;
        let mean_var = |w: &dyn Fn(f64) -> f64, total: f64| {
            let mu = values.iter().zip(&resp).map(|(x, r)| w(*r) * x).sum::<f64>() / total;
            let var = values
                .iter()
                .zip(&resp)
                .map(|(x, r)| w(*r) * (x - mu).powi(2))
                .sum::<f64>()
                / total;
            (mu, var.sqrt().max(floor))
        };
        let (mu_a, s_a) = mean_var(&|r| 1.0 - r, n_main);
        m.mu_main = mu_a;
        m.sigma_main = s_a;
        m.weight = (n_minor / n).clamp(0.0, MAX_MINOR_WEIGHT);
        if n_minor > 1e-9 * n {
            let (mu_b, s_b) = mean_var(&|r| r, n_minor);
            m.mu_minor = mu_b;
            m.sigma_minor = s_b;
        }
        let ll_new = m.log_likelihood(values);
        if (ll_new - ll).abs() <= 1e-12 * ll.abs().max(1.0) {
            ll = ll_new;
            converged = true;
            break;
        }
        ll = ll_new;
    }
    Ok(DoubleGaussianFit {
        model: m,
        log_likelihood: ll,
        iterations,
        converged,
    })
}
