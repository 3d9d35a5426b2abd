//! JSON experiment configuration for the command-line front end. Every
//! section is optional; unknown keys are errors.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homodyne::RateModel;
use crate::lindblad::SqueezeSource;
use crate::params::{SystemParams, SystemParamsDoc};

/// A list of values or an inclusive linear range of `n` points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, n: usize },
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>> {
        let v = match self {
            Grid::List(v) => v.clone(),
            Grid::Range { start, stop, n } => match n {
                0 => Vec::new(),
                1 => vec![*start],
                _ => (0..*n)
                    .map(|k| start + (stop - start) * k as f64 / (*n - 1) as f64)
                    .collect(),
            },
        };
        if v.is_empty() {
            return Err(Error::Config("empty grid".into()));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("non-finite grid value".into()));
        }
        Ok(v)
    }
}

/// Gains and phases of the rate-model sweeps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Phase-preserving squeezer gains in dB (`N = G - 1`).
    pub gains_db: Grid,
    /// Squeezing angles in rad.
    pub phases_rad: Grid,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            gains_db: Grid::List(vec![0.0, 1.0, 2.0, 3.8]),
            phases_rad: Grid::Range {
                start: 0.0,
                stop: PI,
                n: 37,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SnrCurveConfig {
    /// Integration times in us.
    pub taus_us: Grid,
    /// DPA gains `10 log10 e^{2r}` in dB.
    pub gains_db: Grid,
    /// Squeezing angle of the input statistics (0 squeezes the signal quadrature).
    pub phi: f64,
}

impl Default for SnrCurveConfig {
    fn default() -> Self {
        SnrCurveConfig {
            taus_us: Grid::Range {
                start: 0.1,
                stop: 10.0,
                n: 100,
            },
            gains_db: Grid::List(vec![0.0, 3.0, 6.0, 10.0, 15.89]),
            phi: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LifetimeConfig {
    /// DPA gains in dB; the squeezed photon number is `sinh^2 r`.
    pub dpa_gains_db: Grid,
    pub phi: f64,
    pub sources: Vec<SqueezeSource>,
    /// Assignment fidelity defining the reference measurement time.
    pub fidelity: f64,
}

impl Default for LifetimeConfig {
    fn default() -> Self {
        LifetimeConfig {
            dpa_gains_db: Grid::List(vec![3.0, 6.0, 10.0]),
            phi: 0.0,
            sources: vec![SqueezeSource::Broadband, SqueezeSource::Cascaded],
            fidelity: 0.999,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HistogramConfig {
    /// Phase-preserving squeezer gains in dB.
    pub gains_db: Grid,
    /// Squeezing angle in rad; by default `-delta`, which squeezes the signal quadrature.
    pub phi: Option<f64>,
    pub n_shots: usize,
    pub t_int_us: f64,
    pub p_relax: f64,
    pub samples_per_us: f64,
}

impl Default for HistogramConfig {
    fn default() -> Self {
        HistogramConfig {
            gains_db: Grid::List(vec![0.0, 3.8]),
            phi: None,
            n_shots: 20_000,
            t_int_us: 1.8,
            p_relax: 0.02,
            samples_per_us: 20.0,
        }
    }
}

/// The whole configuration document.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub system: SystemParamsDoc,
    /// Vacuum rates and efficiencies; defaults to the experiment's fitted values.
    pub rates: Option<RateModel>,
    pub sweep: SweepConfig,
    pub snr_curve: SnrCurveConfig,
    pub lifetime: LifetimeConfig,
    pub histograms: HistogramConfig,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Parses a document; errors carry line and column positions.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn params(&self) -> Result<SystemParams> {
        self.system.clone().into_params()
    }

    pub fn rate_model(&self) -> RateModel {
        self.rates.unwrap_or_else(RateModel::experiment)
    }

    /// Checks everything that can be checked without running a command.
    pub fn validate(&self) -> Result<()> {
        let cfg_err = |e: Error| Error::Config(e.to_string());
        self.params()?;
        self.rate_model().check().map_err(cfg_err)?;
        for (name, g) in [
            ("sweep.gains_db", &self.sweep.gains_db),
            ("sweep.phases_rad", &self.sweep.phases_rad),
            ("snr_curve.taus_us", &self.snr_curve.taus_us),
            ("snr_curve.gains_db", &self.snr_curve.gains_db),
            ("lifetime.dpa_gains_db", &self.lifetime.dpa_gains_db),
            ("histograms.gains_db", &self.histograms.gains_db),
        ] {
            let v = g.values().map_err(|e| Error::Config(format!("{name}: {e}")))?;
            let nonneg = !name.ends_with("phases_rad");
            if nonneg && v.iter().any(|&x| x < 0.0) {
                return Err(Error::Config(format!("{name}: values must be >= 0")));
            }
        }
        if self.lifetime.sources.is_empty() {
            return Err(Error::Config("lifetime.sources is empty".into()));
        }
        if !(self.lifetime.fidelity > 0.5 && self.lifetime.fidelity < 1.0) {
            return Err(Error::Config("lifetime.fidelity must lie in (0.5, 1)".into()));
        }
        let h = &self.histograms;
        if h.n_shots < 2 || !(h.t_int_us > 0.0) || !(h.samples_per_us > 0.0) || !(0.0..=1.0).contains(&h.p_relax) {
            return Err(Error::Config(
                "histograms: need n_shots >= 2, t_int_us > 0, samples_per_us > 0, p_relax in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = ExperimentConfig::from_json_str("{}").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.rate_model(), RateModel::experiment());
        assert_eq!(cfg.params().unwrap(), SystemParams::experiment());
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = ExperimentConfig::from_json_str("{\n  \"sweep\": {\n    \"gain\": [1]\n  }\n}").unwrap_err();
        let msg = err.to_string();
        assert!(err.is_config());
        assert!(msg.contains("line 3"), "{msg}");
        assert!(msg.contains("gain"), "{msg}");
    }

    #[test]
    fn grids_expand() {
        let g: Grid = serde_json::from_str(r#"{"start": 0, "stop": 1, "n": 5}"#).unwrap();
        assert_eq!(g.values().unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let l: Grid = serde_json::from_str("[2, 3]").unwrap();
        assert_eq!(l.values().unwrap(), vec![2.0, 3.0]);
        assert!(Grid::List(vec![]).values().is_err());
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for doc in [
            r#"{"sweep": {"gains_db": [-1]}}"#,
            r#"{"rates": {"gamma_phi_vac": 0.54, "gamma_meas_vac": 0.41, "eff": {"eps_in": 2, "eps_out": 0.38}}}"#,
            r#"{"lifetime": {"sources": []}}"#,
            r#"{"histograms": {"n_shots": 1}}"#,
            r#"{"system": {"kappa": -1}}"#,
            "{",
        ] {
            let e = ExperimentConfig::from_json_str(doc).unwrap_err();
            assert!(e.is_config(), "{doc}: {e}");
        }
    }

    #[test]
    fn round_trips_through_json() {
        let cfg = ExperimentConfig {
            seed: 9,
            ..ExperimentConfig::default()
        };
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json_str(&text).unwrap(), cfg);
    }
}
