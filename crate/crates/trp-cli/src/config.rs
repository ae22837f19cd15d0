//! Run configuration: a single JSON file with named blocks, plus dotted-path
//! `--set` overrides applied before deserialization.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use trp::{
    eta_from_theory, ExperimentalParams, IntegratorSettings, ProfileError, SweepProfile,
    TwoQubitSystem,
};

use crate::AppError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experimental: Option<ExperimentalConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorConfig>,
}

/// Profile block: either the dimensional keys `n, b, a, B` or the
/// dimensionless keys `n, lambda, eta, tau0`. `tau0` may be omitted to use
/// the default window policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileConfig {
    Theory {
        n: u32,
        b: f64,
        a: f64,
        #[serde(rename = "B")]
        twist: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tau0: Option<f64>,
    },
    Dimensionless {
        n: u32,
        lambda: f64,
        eta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tau0: Option<f64>,
    },
}

impl ProfileConfig {
    /// `(n, λ, η)` of the configured profile.
    pub fn dimensionless(&self) -> Result<(u32, f64, f64), ProfileError> {
        match *self {
            ProfileConfig::Theory { n, b, a, twist, .. } => {
                let d = eta_from_theory(n, a, b, twist)?;
                Ok((n, d.lambda, d.eta))
            }
            ProfileConfig::Dimensionless { n, lambda, eta, .. } => {
                if !(lambda.is_finite() && lambda > 0.0) {
                    return Err(ProfileError::NonPositive { name: "lambda", value: lambda });
                }
                if !eta.is_finite() {
                    return Err(ProfileError::NonFinite { name: "eta", value: eta });
                }
                Ok((n, lambda, eta))
            }
        }
    }

    pub fn tau0(&self) -> Option<f64> {
        match *self {
            ProfileConfig::Theory { tau0, .. } | ProfileConfig::Dimensionless { tau0, .. } => tau0,
        }
    }

    /// Validated profile, with the window policy applied when `tau0` is
    /// absent.
    pub fn build(&self) -> Result<SweepProfile, ProfileError> {
        match *self {
            ProfileConfig::Theory { n, b, a, twist, tau0 } => {
                let tau0 = match tau0 {
                    Some(t) => t,
                    None => trp::default_window(n, eta_from_theory(n, a, b, twist)?.eta),
                };
                SweepProfile::new(n, b, a, twist, tau0)
            }
            ProfileConfig::Dimensionless { n, lambda, eta, tau0 } => match tau0 {
                Some(t) => SweepProfile::from_dimensionless(n, lambda, eta, t),
                None => SweepProfile::from_dimensionless_auto(n, lambda, eta),
            },
        }
    }
}

/// Experimental block. `angular = true` re-reads the Hz values as angular
/// frequencies (every rate scaled by 2π) before any formula is applied;
/// the default applies the translation formulas verbatim to the values as
/// given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentalConfig {
    #[serde(rename = "A_hz")]
    pub a_hz: f64,
    pub delta_hz: f64,
    pub omega1_hz: f64,
    #[serde(rename = "B_exp", default, skip_serializing_if = "Option::is_none")]
    pub b_exp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega0_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angular: Option<bool>,
}

impl ExperimentalConfig {
    pub fn build(&self) -> Result<ExperimentalParams, ProfileError> {
        let params = ExperimentalParams::new(
            self.a_hz,
            self.delta_hz,
            self.omega1_hz,
            self.b_exp.unwrap_or(0.0),
            self.omega0_hz.unwrap_or(0.0),
        )?;
        Ok(if self.angular.unwrap_or(false) { params.to_angular() } else { params })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub omega_c: f64,
    pub omega_t: f64,
    #[serde(rename = "J")]
    pub coupling: f64,
}

impl SystemConfig {
    pub fn build(&self) -> Result<TwoQubitSystem, trp::CnotError> {
        TwoQubitSystem::new(self.omega_c, self.omega_t, self.coupling)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n: u32,
    pub lambda: f64,
    pub eta_lo: f64,
    pub eta_hi: f64,
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IntegratorConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rtol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
}

impl IntegratorConfig {
    pub fn to_settings(&self) -> IntegratorSettings {
        let d = IntegratorSettings::default();
        IntegratorSettings {
            rtol: self.rtol.unwrap_or(d.rtol),
            atol: self.atol.unwrap_or(d.atol),
            max_step: self.max_step.unwrap_or(d.max_step),
            grid_points: self.grid_points.unwrap_or(d.grid_points),
        }
    }
}

impl RunConfig {
    pub fn settings(&self) -> IntegratorSettings {
        self.integrator.clone().unwrap_or_default().to_settings()
    }
}

/// Reads the JSON config and applies `--set path.key=value` overrides
/// (values parse as JSON, falling back to strings) before deserializing.
pub fn load_config(path: &Path, sets: &[String]) -> Result<RunConfig, AppError> {
    let text = fs::read_to_string(path)
        .map_err(|e| AppError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let mut value: Value = serde_json::from_str(&text)
        .map_err(|e| AppError::Config(format!("config {} is not valid JSON: {e}", path.display())))?;
    for spec in sets {
        apply_set(&mut value, spec)?;
    }
    serde_json::from_value(value).map_err(|e| AppError::Config(format!("invalid config: {e}")))
}

fn apply_set(root: &mut Value, spec: &str) -> Result<(), AppError> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| AppError::Config(format!("--set expects KEY=VALUE, got '{spec}'")))?;
    let parsed: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let segments: Vec<&str> = path.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(AppError::Config(format!("--set path '{path}' has an empty segment")));
    }
    let mut cursor = root;
    for (k, segment) in segments.iter().enumerate() {
        let map = cursor
            .as_object_mut()
            .ok_or_else(|| AppError::Config(format!("--set path '{path}' does not address an object")))?;
        if k == segments.len() - 1 {
            map.insert(segment.to_string(), parsed);
            break;
        }
        cursor = map.entry(segment.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}
