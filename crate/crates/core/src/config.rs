//! Run configuration: a strict TOML schema (unknown keys rejected) with
//! per-subcommand sections. CLI flags override individual fields.

use crate::error::{Error, Result};
use crate::profile::Tolerances;
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    /// closed-form expression in the profile DSL
    pub expr: String,
    /// upper bound for the smallest period (the builder divides it down)
    pub period_hint: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    /// Chebyshev C^2 samples per band and side
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// run the brute-force witness scan on every certificate
    #[serde(default = "default_true")]
    pub oracle: bool,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig { samples: default_samples(), oracle: true }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicConfig {
    #[serde(default = "default_eps")]
    pub eps: i8,
    #[serde(default = "default_c2")]
    pub c2: f64,
    #[serde(default)]
    pub band: usize,
    /// "left" or "right" of the band's critical point
    #[serde(default = "default_side")]
    pub side: String,
    /// CSV sample count
    #[serde(default = "default_trace_samples")]
    pub samples: usize,
}

impl Default for GeodesicConfig {
    fn default() -> Self {
        GeodesicConfig {
            eps: default_eps(),
            c2: default_c2(),
            band: 0,
            side: default_side(),
            samples: default_trace_samples(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaddleConfig {
    /// zero index anchoring the chart
    #[serde(default)]
    pub k: usize,
    /// grid points per axis
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// half-width of the (u, v) box; defaults to the chart's j-halfwidth
    #[serde(default)]
    pub half_width: Option<f64>,
}

impl Default for SaddleConfig {
    fn default() -> Self {
        SaddleConfig { k: 0, grid: default_grid(), half_width: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    /// random C^2 instances per band and side
    #[serde(default = "default_oracle_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { samples: default_oracle_samples(), seed: 0 }
    }
}

fn default_samples() -> usize {
    64
}
fn default_true() -> bool {
    true
}
fn default_eps() -> i8 {
    1
}
fn default_c2() -> f64 {
    0.5
}
fn default_side() -> String {
    "left".to_string()
}
fn default_trace_samples() -> usize {
    512
}
fn default_grid() -> usize {
    16
}
fn default_oracle_samples() -> usize {
    24
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub profile: ProfileConfig,
    #[serde(default)]
    pub certify: CertifyConfig,
    #[serde(default)]
    pub geodesic: GeodesicConfig,
    #[serde(default)]
    pub saddle: SaddleConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    /// worker threads for sweeps; 0 = library default
    #[serde(default)]
    pub jobs: usize,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let t = &self.profile.tolerances;
        let all = [
            t.tol_root,
            t.tol_sym,
            t.margin_simple,
            t.tol_sign,
            t.tol_crit,
            t.ode_rtol,
            t.ode_atol,
            t.quad_tol,
        ];
        if all.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::Config("all tolerances must be positive".to_string()));
        }
        if !(self.profile.period_hint > 0.0) {
            return Err(Error::Config("period_hint must be positive".to_string()));
        }
        if !matches!(self.geodesic.side.as_str(), "left" | "right") {
            return Err(Error::Config(format!(
                "geodesic.side must be \"left\" or \"right\", got {:?}",
                self.geodesic.side
            )));
        }
        if !(self.geodesic.eps == 1 || self.geodesic.eps == -1) {
            return Err(Error::Config("geodesic.eps must be +1 or -1".to_string()));
        }
        if self.certify.samples < 2 {
            return Err(Error::Config("certify.samples must be at least 2".to_string()));
        }
        Ok(())
    }
}
