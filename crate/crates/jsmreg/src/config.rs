//! Registration settings from TOML files, layered under command-line flags.
//!
//! A [`PartialConfig`] holds only the fields that were actually given.
//! [`resolve`] starts from the built-in defaults and applies layers in
//! order, so passing the config file first and the flag values second makes
//! flags override the file.

use std::path::Path;

use crate::histogram::Interpolation;
use crate::jsm::CosinePolicy;
use crate::registration::{MeasureSpec, RegistrationConfig};
use crate::{Error, Result};

/// A sparse slice of [`RegistrationConfig`]: every field optional.
#[derive(Debug, Clone, Default, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub measure: Option<MeasureSpec>,
    pub interpolation: Option<Interpolation>,
    pub bins: Option<usize>,
    pub pyramid_levels: Option<usize>,
    pub jsm_cadence: Option<usize>,
    pub saliency_threshold: Option<f64>,
    pub cosine_policy: Option<CosinePolicy>,
    pub max_evals: Option<usize>,
    pub min_step: Option<f64>,
    pub initial_step: Option<[f64; 3]>,
}

impl PartialConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(format!("config: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::parse(&text)
    }

    /// Copy the present fields onto `cfg`, leaving the rest untouched.
    pub fn apply(&self, cfg: &mut RegistrationConfig) {
        if let Some(v) = self.measure {
            cfg.measure = v;
        }
        if let Some(v) = self.interpolation {
            cfg.interpolation = v;
        }
        if let Some(v) = self.bins {
            cfg.bins = v;
        }
        if let Some(v) = self.pyramid_levels {
            cfg.pyramid_levels = Some(v);
        }
        if let Some(v) = self.jsm_cadence {
            cfg.jsm_cadence = v;
        }
        if let Some(v) = self.saliency_threshold {
            cfg.saliency_threshold = v;
        }
        if let Some(v) = self.cosine_policy {
            cfg.cosine_policy = v;
        }
        if let Some(v) = self.max_evals {
            cfg.optimizer.max_evals = v;
        }
        if let Some(v) = self.min_step {
            cfg.optimizer.min_step = v;
        }
        if let Some(v) = self.initial_step {
            cfg.optimizer.initial_step = v;
        }
    }
}

/// Build a validated config from defaults plus layers, later layers winning.
pub fn resolve(layers: &[&PartialConfig]) -> Result<RegistrationConfig> {
    let mut cfg = RegistrationConfig::default();
    for layer in layers {
        layer.apply(&mut cfg);
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn measure_from_str(s: &str) -> Result<MeasureSpec> {
    match s {
        "jmi" => Ok(MeasureSpec::Jmi),
        "nmi-baseline" | "nmi" => Ok(MeasureSpec::NmiBaseline),
        _ => Err(Error::InvalidParameter(format!(
            "unknown measure '{s}' (expected: jmi, nmi-baseline)"
        ))),
    }
}

pub fn interpolation_from_str(s: &str) -> Result<Interpolation> {
    match s {
        "nearest" => Ok(Interpolation::Nearest),
        "bilinear" => Ok(Interpolation::Bilinear),
        "pv" => Ok(Interpolation::Pv),
        _ => Err(Error::InvalidParameter(format!(
            "unknown interpolation '{s}' (expected: nearest, bilinear, pv)"
        ))),
    }
}

pub fn cosine_policy_from_str(s: &str) -> Result<CosinePolicy> {
    match s {
        "abs" => Ok(CosinePolicy::Abs),
        "clamp" => Ok(CosinePolicy::Clamp),
        _ => Err(Error::InvalidParameter(format!(
            "unknown cosine policy '{s}' (expected: abs, clamp)"
        ))),
    }
}
