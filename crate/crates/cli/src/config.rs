//! Run configuration read from a TOML file.

use std::path::{Path, PathBuf};

use robinwave::{Closure, OracleSettings, WellConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WellSection {
    pub alpha0: f64,
    pub alpha1: f64,
    pub a: f64,
    #[serde(default = "one")]
    pub d: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchingSection {
    #[serde(rename = "N", default = "default_order")]
    pub n: usize,
    #[serde(default = "default_scan")]
    pub scan_points: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_order() -> usize {
    32
}

fn default_scan() -> usize {
    400
}

fn default_tol() -> f64 {
    1e-13
}

impl Default for MatchingSection {
    fn default() -> Self {
        MatchingSection {
            n: default_order(),
            scan_points: default_scan(),
            tol: default_tol(),
        }
    }
}

/// Quantity varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Half-width of the well in units of `d`.
    AOverD,
    Alpha0,
    Alpha1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: SweepParameter,
    #[serde(default)]
    pub values: Vec<f64>,
    /// Optional `(alpha0, alpha1)` pairs; each family is swept separately
    /// and overrides the well couplings.
    #[serde(default)]
    pub families: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(rename = "L")]
    pub l: Option<f64>,
    #[serde(default = "default_refinements")]
    pub refinements: usize,
    /// Coarsest spacing; defaults to `d/64`.
    pub h0: Option<f64>,
    #[serde(default = "default_closure")]
    pub closure: Closure,
}

fn default_refinements() -> usize {
    2
}

fn default_closure() -> Closure {
    Closure::Dirichlet
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection {
            l: None,
            refinements: default_refinements(),
            h0: None,
            closure: default_closure(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavefunctionSection {
    /// Ordinal of the state (1 is the ground state).
    #[serde(default = "one_usize")]
    pub state: usize,
    #[serde(default = "default_nx")]
    pub nx: usize,
    #[serde(default = "default_ny")]
    pub ny: usize,
    /// Half-length of the sampled window; by default wide enough for the
    /// state to decay by `e^-12`.
    pub x_extent: Option<f64>,
}

fn one_usize() -> usize {
    1
}

fn default_nx() -> usize {
    401
}

fn default_ny() -> usize {
    41
}

impl Default for WavefunctionSection {
    fn default() -> Self {
        WavefunctionSection {
            state: 1,
            nx: default_nx(),
            ny: default_ny(),
            x_extent: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExistenceSection {
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_plateau")]
    pub plateau: f64,
    #[serde(default = "default_support")]
    pub support: f64,
}

fn default_n_max() -> usize {
    64
}

fn default_plateau() -> f64 {
    0.125
}

fn default_support() -> f64 {
    0.25
}

impl Default for ExistenceSection {
    fn default() -> Self {
        ExistenceSection {
            n_max: default_n_max(),
            plateau: default_plateau(),
            support: default_support(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json, Format::Svg]
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: default_dir(),
            formats: default_formats(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub well: WellSection,
    #[serde(default)]
    pub matching: MatchingSection,
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub wavefunction: WavefunctionSection,
    #[serde(default)]
    pub existence: ExistenceSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(config_err(format!("{name} must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn well_config(&self) -> Result<WellConfig, CliError> {
        let w = &self.well;
        WellConfig::new(w.alpha0, w.alpha1, w.a, w.d).map_err(|e| config_err(e.to_string()))
    }

    pub fn oracle_settings(&self, well: &WellConfig) -> OracleSettings {
        let mut s = OracleSettings::for_config(well);
        if let Some(l) = self.oracle.l {
            s.l = l;
        }
        if let Some(h0) = self.oracle.h0 {
            s.h0 = h0;
        }
        s.refinements = self.oracle.refinements;
        s.closure = self.oracle.closure;
        s
    }

    pub fn wants(&self, format: Format) -> bool {
        self.output.formats.contains(&format)
    }

    /// Checks every numeric field against the solver preconditions.
    pub fn validate(&self) -> Result<(), CliError> {
        let well = self.well_config()?;
        let m = &self.matching;
        if m.n < 2 {
            return Err(config_err(format!("matching.N must be at least 2, got {}", m.n)));
        }
        if m.scan_points < 3 {
            return Err(config_err(format!(
                "matching.scan_points must be at least 3, got {}",
                m.scan_points
            )));
        }
        positive("matching.tol", m.tol)?;
        if let Some(s) = &self.sweep {
            for &v in &s.values {
                positive("sweep value", v)?;
            }
            for &[a0, a1] in &s.families {
                positive("family alpha0", a0)?;
                positive("family alpha1", a1)?;
            }
            if !s.families.is_empty() && s.parameter != SweepParameter::AOverD {
                return Err(config_err("sweep.families requires parameter = \"a_over_d\""));
            }
        }
        let o = self.oracle_settings(&well);
        positive("oracle.L", o.l)?;
        positive("oracle.h0", o.h0)?;
        if o.l < 4.0 * well.a.max(well.d) {
            return Err(config_err(format!("oracle.L = {} is below 4 max(a, d)", o.l)));
        }
        if o.refinements < 2 {
            return Err(config_err("oracle.refinements must be at least 2"));
        }
        let w = &self.wavefunction;
        if w.state == 0 {
            return Err(config_err("wavefunction.state starts at 1"));
        }
        if w.nx < 2 || w.ny < 2 {
            return Err(config_err("wavefunction grid needs at least 2 samples per direction"));
        }
        if let Some(x) = w.x_extent {
            positive("wavefunction.x_extent", x)?;
        }
        let e = &self.existence;
        if e.n_max == 0 {
            return Err(config_err("existence.n_max must be at least 1"));
        }
        robinwave::BumpProfile::new(e.plateau, e.support).map_err(|err| config_err(err.to_string()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = RunConfig::from_toml("[well]\nalpha0 = 20\nalpha1 = 5\na = 0.3\n").unwrap();
        assert_eq!(cfg.well.d, 1.0);
        assert_eq!(cfg.matching.n, 32);
        assert_eq!(cfg.matching.scan_points, 400);
        assert_eq!(cfg.output.formats.len(), 3);
        assert!(cfg.sweep.is_none());
    }

    #[test]
    fn full_config_parses() {
        let text = r#"
[well]
alpha0 = 1e5
alpha1 = 1e-5
a = 0.8
d = 1.0

[matching]
N = 24
scan_points = 300
tol = 1e-12

[sweep]
parameter = "a_over_d"
values = [0.2, 0.4]
families = [[50, 3], [70, 2]]

[oracle]
L = 8.0
refinements = 3
closure = "neumann"

[output]
dir = "results"
formats = ["csv"]
"#;
        let cfg = RunConfig::from_toml(text).unwrap();
        assert_eq!(cfg.matching.n, 24);
        assert_eq!(cfg.sweep.as_ref().unwrap().families.len(), 2);
        assert_eq!(cfg.oracle.closure, Closure::Neumann);
        assert!(cfg.wants(Format::Csv) && !cfg.wants(Format::Svg));
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for text in [
            "[well]\nalpha0 = -1\nalpha1 = 5\na = 0.3\n",
            "[well]\nalpha0 = 20\nalpha1 = 5\na = 0.3\n[matching]\nN = 1\n",
            "[well]\nalpha0 = 20\nalpha1 = 5\na = 0.3\n[oracle]\nL = 1.0\n",
            "[well]\nalpha0 = 20\nalpha1 = 5\na = 0.3\nextra = 1\n",
            "[well]\nalpha0 = 20\nalpha1 = 5\na = 0.3\n[sweep]\nparameter = \"width\"\n",
            "[well]\nalpha0 = 20\nalpha1 = 5\n",
        ] {
            assert!(matches!(RunConfig::from_toml(text), Err(CliError::Config(_))), "{text}");
        }
    }
}
